mod common;

use common::*;
use kltrace::bisim::{bisimilar, bisimulation_partition};
use kltrace::distributivity::{DistLaw, DistributiveLaw};
use kltrace::functors::{FStruct, FunctorExpr, LtsShape, Symbol, Term};
use kltrace::monads::{dst, ratio, MonadTag, TValue};
use kltrace::omega::{
    accepts_finite, accepts_up_word, check_infinite_solution, finite_candidate, maximal_candidate,
    AnyWord, UPWord,
};
use kltrace::testing::{check_expressive, testing_equivalent, theory_map};
use kltrace::traces::{
    check_coinduction_square, finite_trace, perturbation_search, trace_equivalent,
    trace_lift_exact, trace_oracle_lts, trace_oracle_plts, TraceMap,
};
use kltrace::Error;
use num::{One, Zero};

fn word(s: &str) -> Vec<Symbol> {
    s.chars().map(|c| Symbol::new(&c.to_string())).collect()
}

fn up(text: &str) -> UPWord {
    match text.parse::<AnyWord>().unwrap() {
        AnyWord::Periodic(w) => w,
        AnyWord::Finite(_) => panic!("expected a periodic word"),
    }
}

#[test]
fn running_nd_prefix_of_ab_star() {
    let sys = load(RUNNING_ND);
    let m = finite_trace(&sys, &law(&sys), 6).unwrap();
    let x = id(&sys, "x");
    assert_eq!(m.render_state(&sys, x), "{a, a.b, a.b.b, a.b.b.b, a.b.b.b.b}");
    let y = id(&sys, "y");
    assert_eq!(m.render_state(&sys, y), "{eps, b, b.b, b.b.b, b.b.b.b, b.b.b.b.b}");
}

#[test]
fn running_nd_small_depths() {
    let sys = load(RUNNING_ND);
    let l = law(&sys);
    let x = id(&sys, "x");
    assert_eq!(finite_trace(&sys, &l, 0).unwrap().render_state(&sys, x), "{}");
    assert_eq!(finite_trace(&sys, &l, 1).unwrap().render_state(&sys, x), "{}");
    assert_eq!(finite_trace(&sys, &l, 2).unwrap().render_state(&sys, x), "{a}");
    assert_eq!(
        finite_trace(&sys, &l, 3).unwrap().render(&sys),
        "x: {a, a.b}\ny: {eps, b, b.b}\n"
    );
}

#[test]
fn running_prob_geometric_weights() {
    let sys = load(RUNNING_PROB);
    let m = finite_trace(&sys, &law(&sys), 4).unwrap();
    let x = id(&sys, "x'");
    assert_eq!(
        m.render_state(&sys, x),
        "[eps -> 1/3, a -> 1/6, a.a -> 1/12, a.a.a -> 1/24]"
    );
    let shape = LtsShape::of(sys.functor()).unwrap();
    for n in 0..4 {
        let w = vec![Symbol::new("a"); n];
        let expected = ratio(1, 3) * ratio(1, 2i64.pow(n as u32));
        assert_eq!(m.get(x).weight(&shape.word_term(&w)), expected);
    }
    // z' only loops, so its trace is the zero subdistribution
    assert!(m.get(id(&sys, "z'")).mass().is_zero());
}

#[test]
fn running_prob_mass_is_two_thirds_in_the_limit() {
    let sys = load(RUNNING_PROB);
    let l = law(&sys);
    let x = id(&sys, "x'");
    let mut m = TraceMap::bottom(&sys);
    for n in 1..=20u32 {
        m = kltrace::traces::phi_step(&sys, &l, &m).unwrap();
        let expected = ratio(2, 3) * (ratio(1, 1) - ratio(1, 2i64.pow(n)));
        assert_eq!(m.get(x).mass(), expected, "n = {n}");
        assert!(m.get(x).mass() < ratio(2, 3));
    }
}

#[test]
fn peano_cfg_parse_trees() {
    let sys = load(PEANO_CFG);
    let l = law(&sys);
    let t = id(&sys, "T");
    assert_eq!(finite_trace(&sys, &l, 0).unwrap().render_state(&sys, t), "{}");
    assert_eq!(finite_trace(&sys, &l, 1).unwrap().render_state(&sys, t), "{[0]}");
    assert_eq!(
        finite_trace(&sys, &l, 2).unwrap().render_state(&sys, t),
        "{[0], [s [0]]}"
    );
    assert_eq!(
        finite_trace(&sys, &l, 3).unwrap().render_state(&sys, t),
        "{[0], [s [0]], [s [s [0]]]}"
    );
    assert_eq!(finite_trace(&sys, &l, 4).unwrap().get(t).support_len(), 4);
}

#[test]
fn classic_contrast() {
    let sys = load(CLASSIC);
    let l = law(&sys);
    let (x, y) = (id(&sys, "x"), id(&sys, "y"));
    for d in 0..=8 {
        assert!(trace_equivalent(&sys, &l, x, y, d).unwrap(), "depth {d}");
    }
    assert!(!bisimilar(&sys, x, y).unwrap());
    assert_eq!(
        finite_trace(&sys, &l, 4).unwrap().render_state(&sys, x),
        "{a.b, a.c}"
    );
    // only the four terminated leaves collapse
    let p = bisimulation_partition(&sys).unwrap();
    assert!(p.same_block(id(&sys, "x3"), id(&sys, "y3")));
    assert!(!p.same_block(id(&sys, "x1"), id(&sys, "y1")));
}

#[test]
fn lift_trio_clauses() {
    let sys = load(LIFT_TRIO);
    let exact = trace_lift_exact(&sys).unwrap();
    let shape = LtsShape::of(sys.functor()).unwrap();
    assert_eq!(exact[id(&sys, "s0").0], TValue::lift(Some(shape.word_term(&word("a")))));
    assert_eq!(exact[id(&sys, "s1").0], TValue::lift(Some(shape.word_term(&[]))));
    assert!(exact[id(&sys, "t0").0].is_bottom());
    assert!(exact[id(&sys, "u0").0].is_bottom());
    assert!(exact[id(&sys, "u1").0].is_bottom());
    let m = finite_trace(&sys, &law(&sys), 6).unwrap();
    assert_eq!(m.values(), exact.as_slice());
    assert_eq!(m.render_state(&sys, id(&sys, "s0")), "a");
    assert_eq!(m.render_state(&sys, id(&sys, "t0")), "bot");
}

#[test]
fn lift_is_not_supported_by_bisimulation() {
    let sys = load(LIFT_TRIO);
    assert!(matches!(bisimulation_partition(&sys), Err(Error::Unsupported(_))));
}

#[test]
fn oracles_agree_on_corpus() {
    let nd = load(RUNNING_ND);
    for d in 0..7 {
        assert_eq!(finite_trace(&nd, &law(&nd), d).unwrap(), trace_oracle_lts(&nd, d).unwrap());
    }
    let pr = load(RUNNING_PROB);
    for d in 0..7 {
        assert_eq!(finite_trace(&pr, &law(&pr), d).unwrap(), trace_oracle_plts(&pr, d).unwrap());
    }
}

#[test]
fn square_and_finality_on_corpus() {
    for text in CORPUS {
        let sys = load(text);
        let l = law(&sys);
        let r = check_coinduction_square(&sys, &l, 4).unwrap();
        assert!(r.passed(), "{}: {r}", sys.name());
        let p = perturbation_search(&sys, &l, 3).unwrap();
        assert!(p.passed(), "{}: {p}", sys.name());
        assert!(p.edits_tried > 0);
    }
}

#[test]
fn omega_running_nd() {
    let sys = load(RUNNING_ND);
    let (x, y) = (id(&sys, "x"), id(&sys, "y"));
    assert!(accepts_up_word(&sys, x, &up("a.(b)^w")).unwrap());
    assert!(accepts_up_word(&sys, y, &up("(b)^w")).unwrap());
    assert!(!accepts_up_word(&sys, x, &up("(a)^w")).unwrap());
    assert!(!accepts_up_word(&sys, x, &up("a.b.(a)^w")).unwrap());
    assert!(accepts_finite(&sys, x, &word("abb")).unwrap());
    assert!(!accepts_finite(&sys, x, &word("")).unwrap());
    let lo = finite_candidate(&sys, 6).unwrap();
    let hi = maximal_candidate(&sys, 6).unwrap();
    assert!(check_infinite_solution(&sys, &lo, 6).unwrap().passed());
    assert!(check_infinite_solution(&sys, &hi, 6).unwrap().passed());
    assert!(!hi[x.0].contains(&AnyWord::Periodic(up("(a)^w"))));
}

#[test]
fn omega_word_syntax() {
    assert_eq!(up("a.(b)^w").to_string(), "a.(b)^w");
    // canonical form: the prefix is absorbed into the period where possible
    assert_eq!(up("b.(b.b)^w").to_string(), "(b)^w");
    assert_eq!(up("a.b.(a.b)^w").to_string(), "(a.b)^w");
    assert_eq!("eps".parse::<AnyWord>().unwrap(), AnyWord::Finite(vec![]));
    assert!("a.(b".parse::<AnyWord>().is_err());
    assert!("a.()^w".parse::<AnyWord>().is_err());
}

#[test]
fn testing_on_corpus() {
    for text in [RUNNING_ND, CLASSIC, PEANO_CFG] {
        let sys = load(text);
        let r = check_expressive(&sys, &law(&sys), 4, 4).unwrap();
        assert!(r.passed(), "{r}");
    }
    let sys = load(CLASSIC);
    let l = law(&sys);
    assert!(testing_equivalent(&sys, &l, id(&sys, "x"), id(&sys, "y"), 5, 4).unwrap());
    let th = theory_map(&sys, &l, id(&sys, "x"), 4, 4).unwrap();
    assert_eq!(th.render(&sys), "a.b, a.c");
}

#[test]
fn dst_examples() {
    let u = TValue::set([1u8, 2]);
    let v = TValue::set(['p']);
    assert_eq!(dst(MonadTag::Powerset, &u, &v).unwrap(), TValue::set([(1, 'p'), (2, 'p')]));
    let d = TValue::dist([(1u8, ratio(1, 2)), (2, ratio(1, 4))]).unwrap();
    let e = TValue::dist([('p', ratio(1, 3))]).unwrap();
    let de = dst(MonadTag::Subdist, &d, &e).unwrap();
    assert_eq!(de.weight(&(1, 'p')), ratio(1, 6));
    assert_eq!(de.mass(), ratio(1, 4));
    let bot: TValue<u8> = TValue::lift(None);
    assert!(dst(MonadTag::Lift, &bot, &TValue::lift(Some('p'))).unwrap().is_bottom());
}

#[test]
fn canonical_law_on_a_pair_of_sets() {
    let f = FunctorExpr::prod(FunctorExpr::constant(["a", "b"]), FunctorExpr::list(FunctorExpr::Identity));
    let law = DistLaw::canonical(MonadTag::Powerset, f.clone()).unwrap();
    let s = FStruct::pair(
        FStruct::sym("a"),
        FStruct::Seq(vec![FStruct::Var(TValue::set([0u8, 1])), FStruct::Var(TValue::set([2u8]))]),
    );
    let out = law.apply(&s).unwrap();
    assert_eq!(out.support_len(), 2);
    assert_eq!(law.functor(), &f);
    // an empty set anywhere kills the whole structure
    let dead = FStruct::pair(
        FStruct::sym("a"),
        FStruct::Seq(vec![FStruct::Var(TValue::set([0u8])), FStruct::Var(TValue::set([]))]),
    );
    assert!(law.apply(&dead).unwrap().is_bottom());
    // an empty list has no leaves and is a single outcome
    let empty = FStruct::pair(FStruct::sym("b"), FStruct::<TValue<u8>>::Seq(vec![]));
    assert_eq!(law.apply(&empty).unwrap().support_len(), 1);
}

#[test]
fn terms_order_by_height_then_size() {
    let sys = load(RUNNING_ND);
    let shape = LtsShape::of(sys.functor()).unwrap();
    let ts: Vec<Term> = ["", "a", "ab", "b", "bb"].iter().map(|w| shape.word_term(&word(w))).collect();
    let mut sorted = ts.clone();
    sorted.sort();
    let rendered: Vec<Vec<Symbol>> = sorted.iter().map(|t| shape.term_word(t).unwrap()).collect();
    assert_eq!(rendered, vec![word(""), word("a"), word("b"), word("ab"), word("bb")]);
    assert!(ts.iter().all(|t| t.height() == word_len(&shape, t) + 1));
}

fn word_len(shape: &LtsShape, t: &Term) -> usize {
    shape.term_word(t).unwrap().len()
}

#[test]
fn subdist_law_needs_mass_at_most_one() {
    let one = ratio(1, 1);
    assert!(TValue::dist([(0u8, one.clone()), (1, ratio(1, 6))]).is_err());
    assert_eq!(TValue::dist([(0u8, one.clone())]).unwrap().mass(), ratio(1, 1));
    assert!(!ratio(2, 4).is_one() && ratio(2, 4) == ratio(1, 2));
}
