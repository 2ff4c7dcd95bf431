mod common;

use std::collections::BTreeSet;

use common::*;
use kltrace::bisim::bisimulation_partition;
use kltrace::distributivity::DistLaw;
use kltrace::functors::{
    alpha_fold, alpha_unfold, enumerate_terms, FStruct, FunctorExpr, LtsShape, Symbol, Term,
};
use kltrace::gen::{functor_catalog, Atom, Sampler, ATOMS};
use kltrace::monads::{dst, kleisli_compose, MonadTag, Prob, TValue};
use kltrace::omega::{
    accepts_finite, accepts_up_word, candidate_included, check_infinite_solution,
    finite_candidate, maximal_candidate, UPWord,
};
use kltrace::par::Execution;
use kltrace::syntax::{parse_system, render_system};
use kltrace::system::{StateId, System};
use kltrace::testing::{
    check_expressive, passing_tests, relation_converse, theory_map_naive, theory_maps,
};
use kltrace::traces::{
    finite_trace, finite_trace_with, perturbation_search, trace_approximants, trace_lift_exact,
    trace_oracle_lts, trace_oracle_plts,
};
use num::One;
use proptest::prelude::*;

const TAGS: [MonadTag; 3] = [MonadTag::Lift, MonadTag::Powerset, MonadTag::Subdist];

fn lts2() -> FunctorExpr {
    FunctorExpr::lts(["a", "b"])
}

fn small_sampler(seed: u64) -> Sampler {
    let mut s = Sampler::new(seed);
    s.support = 2;
    s.list_len = 2;
    s
}

fn random_lts(seed: u64, tag: MonadTag, n: usize) -> System {
    Sampler::new(seed).system(tag, &lts2(), n)
}

/// A system over a catalog functor, kept small enough for depth 3.
fn random_any(seed: u64, tag: MonadTag) -> System {
    let catalog = functor_catalog();
    let mut s = small_sampler(seed);
    let f = catalog[s.below(catalog.len())].clone();
    let n = 1 + s.below(3);
    s.system(tag, &f, n)
}

/// The quotient of a system by its bisimulation partition, with the
/// projection onto it.
fn quotient(sys: &System) -> (System, Vec<StateId>) {
    let p = bisimulation_partition(sys).unwrap();
    let h: Vec<StateId> = sys.ids().map(|x| StateId(p.block(x))).collect();
    let reps: Vec<StateId> = p.blocks().iter().map(|b| b[0]).collect();
    let transitions = reps
        .iter()
        .map(|r| sys.transition(*r).map(|s| s.fmap(&mut |y: &StateId| h[y.0])))
        .collect();
    let names = (0..reps.len()).map(|i| format!("q{i}")).collect();
    let q = System::new("quotient", sys.tag(), sys.functor().clone(), names, transitions).unwrap();
    (q, h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_is_a_partial_order_with_bottom(seed in any::<u64>(), t in 0usize..3) {
        let tag = TAGS[t];
        let mut s = Sampler::new(seed);
        let u = s.tvalue(tag, &ATOMS);
        let v = s.above(&u, &ATOMS);
        let w = s.above(&v, &ATOMS);
        let other = s.tvalue(tag, &ATOMS);
        prop_assert!(u.leq(&u).unwrap());
        prop_assert!(u.leq(&v).unwrap() && v.leq(&w).unwrap() && u.leq(&w).unwrap());
        if u.leq(&other).unwrap() && other.leq(&u).unwrap() {
            prop_assert_eq!(&u, &other);
        }
        prop_assert!(TValue::<Atom>::bottom(tag).leq(&u).unwrap());
    }

    #[test]
    fn bind_is_left_strict_and_monotone(seed in any::<u64>(), t in 0usize..3) {
        let tag = TAGS[t];
        let mut s = Sampler::new(seed);
        let f = s.kleisli(tag);
        let u = s.tvalue(tag, &ATOMS);
        let v = s.above(&u, &ATOMS);
        let k = |a: &Atom| Ok(f.apply(a).unwrap().clone());
        prop_assert!(TValue::<Atom>::bottom(tag).bind(k).unwrap().is_bottom());
        prop_assert!(u.bind(k).unwrap().leq(&v.bind(k).unwrap()).unwrap());
    }

    #[test]
    fn kleisli_composition_is_associative(seed in any::<u64>(), t in 0usize..3) {
        let tag = TAGS[t];
        let mut s = Sampler::new(seed);
        let (f, g, h) = (s.kleisli(tag), s.kleisli(tag), s.kleisli(tag));
        let left = kleisli_compose(&kleisli_compose(&f, &g).unwrap(), &h).unwrap();
        let right = kleisli_compose(&f, &kleisli_compose(&g, &h).unwrap()).unwrap();
        prop_assert_eq!(format!("{left:?}"), format!("{right:?}"));
    }

    #[test]
    fn dst_units_and_mass(seed in any::<u64>(), t in 0usize..3) {
        let tag = TAGS[t];
        let mut s = Sampler::new(seed);
        let u = s.tvalue(tag, &ATOMS);
        let v = s.tvalue(tag, &ATOMS);
        let a = s.atom();
        prop_assert_eq!(
            dst(tag, &TValue::unit(tag, a), &v).unwrap(),
            v.map(|b| (a, *b))
        );
        prop_assert_eq!(
            dst(tag, &u, &TValue::unit(tag, a)).unwrap(),
            u.map(|b| (*b, a))
        );
        let uv = dst(tag, &u, &v).unwrap();
        if tag == MonadTag::Subdist {
            prop_assert_eq!(uv.mass(), u.mass() * v.mass());
        }
        if u.is_bottom() || v.is_bottom() {
            prop_assert!(uv.is_bottom());
        }
    }

    #[test]
    fn fmap_laws_and_fold_unfold(seed in any::<u64>()) {
        let catalog = functor_catalog();
        let mut s = Sampler::new(seed);
        let f = &catalog[s.below(catalog.len())];
        let x = s.fstruct(f, &mut |s: &mut Sampler| s.atom());
        let g = s.function();
        let h = s.function();
        prop_assert_eq!(x.fmap(&mut |a: &Atom| *a), x.clone());
        prop_assert_eq!(
            x.fmap(&mut |a: &Atom| g[*a as usize]).fmap(&mut |b: &Atom| h[*b as usize]),
            x.fmap(&mut |a: &Atom| h[g[*a as usize] as usize])
        );
        for t in enumerate_terms(f, 2, 2) {
            let body = alpha_unfold(&t);
            prop_assert_eq!(alpha_fold(f, body).unwrap(), t);
        }
    }

    #[test]
    fn parallel_equals_sequential(seed in any::<u64>(), t in 0usize..3) {
        let sys = random_lts(seed, TAGS[t], 4);
        let l = law(&sys);
        let a = finite_trace_with(&sys, &l, 4, Execution::Sequential).unwrap();
        let b = finite_trace_with(&sys, &l, 4, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn approximants_ascend(seed in any::<u64>(), t in 0usize..3) {
        let sys = random_any(seed, TAGS[t]);
        let chain = trace_approximants(&sys, &law(&sys), 3, Execution::default()).unwrap();
        for w in chain.windows(2) {
            prop_assert!(w[0].leq(&w[1]).unwrap());
        }
        for m in &chain {
            for v in m.values() {
                prop_assert!(v.mass() <= Prob::one());
                prop_assert!(v.support().all(|t| t.height() <= m.depth()));
            }
        }
    }

    #[test]
    fn lift_stabilises_at_the_exact_trace(seed in any::<u64>(), n in 1usize..5) {
        let sys = random_lts(seed, MonadTag::Lift, n);
        let l = law(&sys);
        let exact = trace_lift_exact(&sys).unwrap();
        let m = finite_trace(&sys, &l, n + 1).unwrap();
        prop_assert_eq!(m.values(), exact.as_slice());
        let later = finite_trace(&sys, &l, n + 3).unwrap();
        prop_assert_eq!(later.values(), exact.as_slice());
    }

    #[test]
    fn oracles_agree_on_random_systems(seed in any::<u64>(), n in 1usize..5) {
        let nd = random_lts(seed, MonadTag::Powerset, n);
        prop_assert_eq!(finite_trace(&nd, &law(&nd), 5).unwrap(), trace_oracle_lts(&nd, 5).unwrap());
        let pr = random_lts(seed, MonadTag::Subdist, n);
        prop_assert_eq!(finite_trace(&pr, &law(&pr), 5).unwrap(), trace_oracle_plts(&pr, 5).unwrap());
    }

    #[test]
    fn bisimilar_states_are_trace_equivalent(seed in any::<u64>(), t in 1usize..3) {
        let sys = random_any(seed, TAGS[t]);
        let (q, h) = quotient(&sys);
        prop_assert!(sys.is_morphism_to(&q, &h));
        let m = finite_trace(&sys, &law(&sys), 3).unwrap();
        let mq = finite_trace(&q, &law(&q), 3).unwrap();
        for x in sys.ids() {
            prop_assert_eq!(m.get(x), mq.get(h[x.0]));
        }
    }

    #[test]
    fn morphisms_preserve_theories(seed in any::<u64>()) {
        let sys = random_any(seed, MonadTag::Powerset);
        let (q, h) = quotient(&sys);
        let th = theory_maps(&sys, &law(&sys), 3, 2).unwrap();
        let thq = theory_maps(&q, &law(&q), 3, 2).unwrap();
        for x in sys.ids() {
            prop_assert_eq!(&th[x.0].passed, &thq[h[x.0].0].passed);
        }
    }

    #[test]
    fn theory_equals_trace(seed in any::<u64>()) {
        let sys = random_any(seed, MonadTag::Powerset);
        let r = check_expressive(&sys, &law(&sys), 3, 2).unwrap();
        prop_assert!(r.passed(), "{}", r);
    }

    #[test]
    fn theories_grow_with_depth(seed in any::<u64>()) {
        let sys = random_lts(seed, MonadTag::Powerset, 3);
        let l = law(&sys);
        let a = theory_maps(&sys, &l, 3, 4).unwrap();
        let b = theory_maps(&sys, &l, 4, 4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(x.passed.is_subset(&y.passed));
        }
    }

    #[test]
    fn pruned_enumeration_matches_naive(seed in any::<u64>()) {
        let sys = random_any(seed, MonadTag::Powerset);
        let l = law(&sys);
        let pruned = theory_maps(&sys, &l, 3, 2).unwrap();
        for x in sys.ids() {
            prop_assert_eq!(&theory_map_naive(&sys, &l, x, 3, 2).unwrap().passed, &pruned[x.0].passed);
        }
        let seq = passing_tests(&sys, &l, 3, 2, Execution::Sequential).unwrap();
        let par = passing_tests(&sys, &l, 3, 2, Execution::Parallel).unwrap();
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn converse_is_involutive_and_reverses_composition(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let f = s.kleisli(MonadTag::Powerset);
        let g = s.kleisli(MonadTag::Powerset);
        let ff = relation_converse(&relation_converse(&f).unwrap()).unwrap();
        prop_assert_eq!(format!("{ff:?}"), format!("{f:?}"));
        let lhs = relation_converse(&kleisli_compose(&f, &g).unwrap()).unwrap();
        let rhs = kleisli_compose(&relation_converse(&g).unwrap(), &relation_converse(&f).unwrap()).unwrap();
        prop_assert_eq!(format!("{lhs:?}"), format!("{rhs:?}"));
    }

    #[test]
    fn accepts_finite_matches_finite_trace(seed in any::<u64>(), n in 1usize..4) {
        let sys = random_lts(seed, MonadTag::Powerset, n);
        let shape = LtsShape::of(sys.functor()).unwrap();
        let m = finite_trace(&sys, &law(&sys), 4).unwrap();
        let letters: Vec<Symbol> = shape.alphabet().iter().cloned().collect();
        let mut words: Vec<Vec<Symbol>> = vec![vec![]];
        for len in 0..3 {
            let next: Vec<Vec<Symbol>> = words
                .iter()
                .filter(|w| w.len() == len)
                .flat_map(|w| letters.iter().map(move |a| [w.clone(), vec![a.clone()]].concat()))
                .collect();
            words.extend(next);
        }
        for x in sys.ids() {
            for w in &words {
                prop_assert_eq!(
                    accepts_finite(&sys, x, w).unwrap(),
                    m.get(x).contains(&shape.word_term(w))
                );
            }
        }
    }

    #[test]
    fn unrolling_a_period_changes_nothing(seed in any::<u64>(), n in 1usize..4) {
        let sys = random_lts(seed, MonadTag::Powerset, n);
        let mut s = Sampler::new(seed ^ 0x5eed);
        let letter = |s: &mut Sampler| Symbol::new(["a", "b"][s.below(2)]);
        let u: Vec<Symbol> = (0..s.below(3)).map(|_| letter(&mut s)).collect();
        let v: Vec<Symbol> = (0..1 + s.below(3)).map(|_| letter(&mut s)).collect();
        let w = UPWord::new(u.clone(), v.clone()).unwrap();
        let longer = UPWord::new([u.clone(), v.clone()].concat(), v.clone()).unwrap();
        let doubled = UPWord::new(u.clone(), [v.clone(), v.clone()].concat()).unwrap();
        prop_assert_eq!(&w, &longer);
        prop_assert_eq!(&w, &doubled);
        let view = sys.lts_view().unwrap();
        for x in sys.ids() {
            let acc = accepts_up_word(&sys, x, &w).unwrap();
            if !u.is_empty() {
                // reading one letter moves to some successor accepting the tail
                let tail_ok = view.steps(x)
                    .filter(|(a, _)| **a == *w.head())
                    .any(|(_, y)| accepts_up_word(&sys, y, &w.tail()).unwrap());
                prop_assert_eq!(acc, tail_ok);
            }
        }
    }

    #[test]
    fn infinite_candidates_pass_and_nest(seed in any::<u64>(), n in 1usize..4) {
        let sys = random_lts(seed, MonadTag::Powerset, n);
        let lo = finite_candidate(&sys, 4).unwrap();
        let hi = maximal_candidate(&sys, 4).unwrap();
        prop_assert!(check_infinite_solution(&sys, &lo, 4).unwrap().passed());
        prop_assert!(check_infinite_solution(&sys, &hi, 4).unwrap().passed());
        prop_assert!(candidate_included(&lo, &hi));
    }

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>(), t in 0usize..3) {
        let sys = random_any(seed, TAGS[t]);
        let text = render_system(&sys);
        let back = parse_system(&text).unwrap();
        prop_assert_eq!(&back, &sys, "{}", text);
        prop_assert_eq!(render_system(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn no_single_edit_solves_the_square(seed in any::<u64>(), t in 0usize..3) {
        let sys = random_lts(seed, TAGS[t], 2);
        let r = perturbation_search(&sys, &law(&sys), 3).unwrap();
        prop_assert!(r.passed(), "{}", r);
    }
}

#[test]
fn lts_level_sizes() {
    // words of length < n over k letters: (k^n - 1) / (k - 1)
    for k in 1..=3usize {
        let letters: Vec<String> = (0..k).map(|i| format!("l{i}")).collect();
        let f = FunctorExpr::lts(letters.iter().map(|s| s.as_str()));
        let mut previous = BTreeSet::<Term>::new();
        for n in 0..5u32 {
            let level = enumerate_terms(&f, n as usize, 4);
            let expected: usize = (0..n).map(|i| k.pow(i)).sum();
            assert_eq!(level.len(), expected, "k = {k}, n = {n}");
            assert!(previous.is_subset(&level));
            previous = level;
        }
    }
}

#[test]
fn empty_universe_gives_no_terms() {
    assert!(enumerate_terms(&FunctorExpr::Identity, 4, 4).is_empty());
    let x: FStruct<TValue<Atom>> = FStruct::Var(TValue::set([]));
    let law = DistLaw::canonical(MonadTag::Powerset, FunctorExpr::Identity).unwrap();
    use kltrace::distributivity::DistributiveLaw;
    assert!(law.apply(&x).unwrap().is_bottom());
}
