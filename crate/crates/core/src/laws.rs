//! Randomized law suites over the functor catalog.
//!
//! Every suite is driven by a seed and a case count and returns a
//! [`LawReport`] with the first few counterexamples.

use crate::distributivity::{check_distributive_axioms, lift_arrow, DistLaw, LawReport};
use crate::functors::{FStruct, FunctorExpr};
use crate::gen::{functor_catalog, Atom, Sampler, ATOMS};
use crate::monads::{dst, kleisli_compose, KleisliMap, MonadTag, TValue};
use crate::Result;

fn law_for(tag: MonadTag, f: &FunctorExpr) -> DistLaw {
    DistLaw::canonical(tag, f.clone()).expect("canonical laws exist for every monad")
}

/// Left unit, right unit and associativity of bind.
pub fn monad_laws(tag: MonadTag, seed: u64, cases: usize) -> LawReport {
    let mut s = Sampler::new(seed);
    let mut report = LawReport::new(format!("monad laws ({tag})"));
    for _ in 0..cases {
        let m = s.tvalue(tag, &ATOMS);
        let a = s.atom();
        let f = s.kleisli(tag);
        let g = s.kleisli(tag);
        let fx = |x: &Atom| Ok(f.apply(x).unwrap().clone());
        let gx = |x: &Atom| Ok(g.apply(x).unwrap().clone());
        let outcome = (|| -> Result<bool> {
            let left = TValue::unit(tag, a).bind(fx)? == *f.apply(&a).unwrap();
            let right = m.bind(|x| Ok(TValue::unit(tag, *x)))? == m;
            let assoc = m.bind(fx)?.bind(gx)? == m.bind(|x| f.apply(x).unwrap().bind(gx))?;
            Ok(left && right && assoc)
        })();
        report.record_result(outcome, || format!("m = {m}, a = {a}, f = {f:?}, g = {g:?}"));
    }
    report
}

fn merge(name: String, parts: Vec<LawReport>) -> LawReport {
    let mut out = LawReport::new(name);
    for p in parts {
        out.cases += p.cases;
        for f in p.failures {
            if out.failures.len() < 5 {
                out.failures.push(f);
            }
        }
    }
    out
}

fn axiom_report(s: &mut Sampler, tag: MonadTag, f: &FunctorExpr, per: usize) -> LawReport {
    let law = law_for(tag, f);
    let units: Vec<FStruct<Atom>> =
        (0..per).map(|_| s.fstruct(f, &mut |s: &mut Sampler| s.atom())).collect();
    let mults: Vec<FStruct<TValue<TValue<Atom>>>> = (0..per)
        .map(|_| {
            s.fstruct(f, &mut |s: &mut Sampler| {
                let inner: Vec<TValue<Atom>> = (0..3).map(|_| s.tvalue(tag, &ATOMS)).collect();
                s.tvalue(tag, &inner)
            })
        })
        .collect();
    let mut r = check_distributive_axioms(&law, &units, &mults);
    r.cases /= 2;
    r
}

fn axiom_sampler(seed: u64) -> Sampler {
    let mut s = Sampler::new(seed);
    s.support = 2;
    s.list_len = 2;
    s
}

/// Unit and multiplication axioms of the canonical law on every catalog
/// functor. One case is one unit sample plus one multiplication sample.
pub fn distributive_axioms(tag: MonadTag, seed: u64, cases: usize) -> LawReport {
    let mut s = axiom_sampler(seed);
    let catalog = functor_catalog();
    let per = cases.div_ceil(catalog.len());
    let parts = catalog.iter().map(|f| axiom_report(&mut s, tag, f, per)).collect();
    merge(format!("distributive-law axioms ({tag}, all constructors)"), parts)
}

/// The same axioms for a single functor.
pub fn distributive_axioms_for(tag: MonadTag, functor: &FunctorExpr, seed: u64, cases: usize) -> LawReport {
    axiom_report(&mut axiom_sampler(seed), tag, functor, cases)
}

/// `F-bar (g . f) = F-bar g . F-bar f` and `F-bar id = id`.
pub fn lifting_functoriality(tag: MonadTag, seed: u64, cases: usize) -> LawReport {
    let mut s = Sampler::new(seed);
    s.support = 2;
    let catalog = functor_catalog();
    let mut report = LawReport::new(format!("lifted functoriality ({tag})"));
    let id = KleisliMap::identity(tag, ATOMS.into());
    for i in 0..cases {
        let f_expr = &catalog[i % catalog.len()];
        let law = law_for(tag, f_expr);
        let f = s.kleisli(tag);
        let g = s.kleisli(tag);
        let x = s.fstruct(f_expr, &mut |s: &mut Sampler| s.atom());
        let outcome = (|| -> Result<bool> {
            let gf = kleisli_compose(&f, &g)?;
            let lhs = lift_arrow(&law, &gf)?.apply(&x)?;
            let lg = lift_arrow(&law, &g)?;
            let rhs = lift_arrow(&law, &f)?.apply(&x)?.bind(|y| lg.apply(y))?;
            let ident = lift_arrow(&law, &id)?.apply(&x)? == TValue::unit(tag, x.clone());
            Ok(lhs == rhs && ident)
        })();
        report.record_result(outcome, || format!("{f_expr} at {x}, f = {f:?}, g = {g:?}"));
    }
    report
}

/// `f <= g` pointwise implies `F-bar f <= F-bar g`.
pub fn local_monotonicity(tag: MonadTag, seed: u64, cases: usize) -> LawReport {
    let mut s = Sampler::new(seed);
    s.support = 2;
    let catalog = functor_catalog();
    let mut report = LawReport::new(format!("local monotonicity ({tag})"));
    for i in 0..cases {
        let f_expr = &catalog[i % catalog.len()];
        let law = law_for(tag, f_expr);
        let f = s.kleisli(tag);
        let g = KleisliMap::from_fn(tag, ATOMS.into(), ATOMS.into(), |a| {
            s.above(f.apply(a).unwrap(), &ATOMS)
        })
        .expect("atoms map into atoms");
        let x = s.fstruct(f_expr, &mut |s: &mut Sampler| s.atom());
        let outcome = (|| -> Result<bool> {
            if !f.leq(&g)? {
                return Ok(false);
            }
            let lf = lift_arrow(&law, &f)?.apply(&x)?;
            let lg = lift_arrow(&law, &g)?.apply(&x)?;
            lf.leq(&lg)
        })();
        report.record_result(outcome, || format!("{f_expr} at {x}, f = {f:?}, g = {g:?}"));
    }
    report
}

/// `lambda . F T h = T F h . lambda` for plain functions `h`.
pub fn naturality(tag: MonadTag, seed: u64, cases: usize) -> LawReport {
    let mut s = Sampler::new(seed);
    s.support = 2;
    let catalog = functor_catalog();
    let mut report = LawReport::new(format!("naturality of lambda ({tag})"));
    for i in 0..cases {
        let f_expr = &catalog[i % catalog.len()];
        let law = law_for(tag, f_expr);
        let h = s.function();
        let x = s.fstruct(f_expr, &mut |s: &mut Sampler| s.tvalue(tag, &ATOMS));
        let outcome = (|| -> Result<bool> {
            use crate::distributivity::DistributiveLaw;
            let lhs = law.apply(&x.fmap(&mut |v: &TValue<Atom>| v.map(|a| h[*a as usize])))?;
            let rhs = law.apply(&x)?.map(|st| st.fmap(&mut |a: &Atom| h[*a as usize]));
            Ok(lhs == rhs)
        })();
        report.record_result(outcome, || format!("{f_expr} at {x}, h = {h:?}"));
    }
    report
}

/// `F-bar (J h) = J (F h)`: pure arrows lift to pure arrows.
pub fn pure_compatibility(tag: MonadTag, seed: u64, cases: usize) -> LawReport {
    let mut s = Sampler::new(seed);
    let catalog = functor_catalog();
    let mut report = LawReport::new(format!("lifting of pure arrows ({tag})"));
    for i in 0..cases {
        let f_expr = &catalog[i % catalog.len()];
        let law = law_for(tag, f_expr);
        let h = s.function();
        let x = s.fstruct(f_expr, &mut |s: &mut Sampler| s.atom());
        let outcome = (|| -> Result<bool> {
            let pure = KleisliMap::embed_pure(tag, ATOMS.into(), ATOMS.into(), |a| h[*a as usize])?;
            let lhs = lift_arrow(&law, &pure)?.apply(&x)?;
            Ok(lhs == TValue::unit(tag, x.fmap(&mut |a: &Atom| h[*a as usize])))
        })();
        report.record_result(outcome, || format!("{f_expr} at {x}, h = {h:?}"));
    }
    report
}

/// The canonical powerset law agrees with the relation-lifting law.
pub fn canonical_matches_rel_lifting(seed: u64, cases: usize) -> LawReport {
    use crate::distributivity::{rel_lift_related, DistributiveLaw};
    let mut s = Sampler::new(seed);
    let catalog = functor_catalog();
    let mut report = LawReport::new("canonical law equals relation lifting (powerset)");
    for i in 0..cases {
        let f_expr = &catalog[i % catalog.len()];
        let canonical = law_for(MonadTag::Powerset, f_expr);
        let lifted = DistLaw::rel_lifting(f_expr.clone()).expect("powerset");
        let x = s.fstruct(f_expr, &mut |s: &mut Sampler| s.tvalue(MonadTag::Powerset, &ATOMS));
        let outcome = (|| -> Result<bool> {
            let a = canonical.apply(&x)?;
            let b = lifted.apply(&x)?;
            let sets = x.fmap(&mut |v: &TValue<Atom>| v.as_set().unwrap().clone());
            let related = a.support().all(|v| rel_lift_related(v, &sets));
            Ok(a == b && related)
        })();
        report.record_result(outcome, || format!("{f_expr} at {x}"));
    }
    report
}

/// `dst` is associative up to re-bracketing.
pub fn dst_associativity(tag: MonadTag, seed: u64, cases: usize) -> LawReport {
    let mut s = Sampler::new(seed);
    let mut report = LawReport::new(format!("double strength associativity ({tag})"));
    for _ in 0..cases {
        let u = s.tvalue(tag, &ATOMS);
        let v = s.tvalue(tag, &ATOMS);
        let w = s.tvalue(tag, &ATOMS);
        let outcome = (|| -> Result<bool> {
            let left = dst(tag, &dst(tag, &u, &v)?, &w)?.map(|((a, b), c)| (*a, *b, *c));
            let right = dst(tag, &u, &dst(tag, &v, &w)?)?.map(|(a, (b, c))| (*a, *b, *c));
            Ok(left == right)
        })();
        report.record_result(outcome, || format!("{u}, {v}, {w}"));
    }
    report
}

/// Every suite for every monad.
pub fn all_suites(seed: u64, cases: usize) -> Vec<LawReport> {
    let mut out = Vec::new();
    for (k, tag) in MonadTag::ALL.into_iter().enumerate() {
        let seed = seed.wrapping_add(1000 * k as u64);
        out.push(monad_laws(tag, seed, cases));
        out.push(distributive_axioms(tag, seed + 1, cases));
        out.push(lifting_functoriality(tag, seed + 2, cases));
        out.push(local_monotonicity(tag, seed + 3, cases));
        out.push(naturality(tag, seed + 4, cases));
        out.push(pure_compatibility(tag, seed + 5, cases));
        out.push(dst_associativity(tag, seed + 6, cases));
    }
    out.push(canonical_matches_rel_lifting(seed.wrapping_add(7), cases));
    out
}
