//! Distributive laws `lambda: F T => T F` and the induced liftings of
//! functors to the Kleisli category.
//!
//! Two constructions are provided. [`lambda_canonical`] works for all three
//! (commutative) monads by structural recursion on the functor expression,
//! using the unit at constants and double strength at products.
//! [`lambda_rel_lifting`] is specific to the powerset monad and collects the
//! structures related to the input by the relation lifting of membership.

use std::collections::BTreeSet;
use std::fmt;

use crate::functors::{FStruct, FunctorExpr};
use crate::monads::{dst, KleisliMap, MonadTag, TValue};
use crate::{Element, Error, Result};

/// A distributive law, applied one structure at a time.
pub trait DistributiveLaw: Sync {
    fn monad(&self) -> MonadTag;

    fn functor(&self) -> &FunctorExpr;

    /// `lambda_X` at a single element of `F T X`.
    fn apply<X: Element>(&self, s: &FStruct<TValue<X>>) -> Result<TValue<FStruct<X>>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Canonical,
    RelLifting,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistLaw {
    monad: MonadTag,
    functor: FunctorExpr,
    construction: Construction,
}

impl DistLaw {
    pub fn new(monad: MonadTag, functor: FunctorExpr, construction: Construction) -> Result<Self> {
        functor.validate()?;
        if construction == Construction::RelLifting && monad != MonadTag::Powerset {
            return Err(Error::Unsupported(format!(
                "relation lifting needs the powerset monad, not {monad}"
            )));
        }
        Ok(DistLaw {
            monad,
            functor,
            construction,
        })
    }

    pub fn canonical(monad: MonadTag, functor: FunctorExpr) -> Result<Self> {
        Self::new(monad, functor, Construction::Canonical)
    }

    pub fn rel_lifting(functor: FunctorExpr) -> Result<Self> {
        Self::new(MonadTag::Powerset, functor, Construction::RelLifting)
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }
}

impl DistributiveLaw for DistLaw {
    fn monad(&self) -> MonadTag {
        self.monad
    }

    fn functor(&self) -> &FunctorExpr {
        &self.functor
    }

    fn apply<X: Element>(&self, s: &FStruct<TValue<X>>) -> Result<TValue<FStruct<X>>> {
        match self.construction {
            Construction::Canonical => lambda_canonical(self.monad, &self.functor, s),
            Construction::RelLifting => {
                let sets = s.try_fmap(&mut |t: &TValue<X>| {
                    t.as_set().cloned().ok_or(Error::TagMismatch {
                        expected: MonadTag::Powerset,
                        found: t.tag(),
                    })
                })?;
                Ok(TValue::set(lambda_rel_lifting(&self.functor, &sets)?))
            }
        }
    }
}

impl fmt::Display for DistLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.construction {
            Construction::Canonical => "canonical",
            Construction::RelLifting => "relation-lifting",
        };
        write!(f, "{kind} law for {} over {}", self.monad, self.functor)
    }
}

/// The inductively constructed law for a commutative monad.
pub fn lambda_canonical<X: Element>(
    tag: MonadTag,
    functor: &FunctorExpr,
    s: &FStruct<TValue<X>>,
) -> Result<TValue<FStruct<X>>> {
    s.check_shape(functor)?;
    let leaves = s.leaves();
    match leaves.as_slice() {
        // double strength against units is just map
        [] => {
            let bare = s.try_fmap(&mut |_| Err(Error::Unsupported("no leaves".into())))?;
            Ok(TValue::unit(tag, bare))
        }
        [t] => {
            if t.tag() != tag {
                return Err(Error::TagMismatch {
                    expected: tag,
                    found: t.tag(),
                });
            }
            Ok(t.map(|x| s.fmap(&mut |_| x.clone())))
        }
        _ => canonical_rec(tag, s),
    }
}

fn canonical_rec<X: Element>(tag: MonadTag, s: &FStruct<TValue<X>>) -> Result<TValue<FStruct<X>>> {
    match s {
        FStruct::Var(t) => {
            if t.tag() != tag {
                return Err(Error::TagMismatch {
                    expected: tag,
                    found: t.tag(),
                });
            }
            Ok(t.map(|x| FStruct::Var(x.clone())))
        }
        FStruct::Sym(c) => Ok(TValue::unit(tag, FStruct::Sym(c.clone()))),
        FStruct::Pair(a, b) => {
            let both = dst(tag, &canonical_rec(tag, a)?, &canonical_rec(tag, b)?)?;
            Ok(both.map(|(x, y)| FStruct::pair(x.clone(), y.clone())))
        }
        FStruct::Inj(label, inner) => {
            Ok(canonical_rec(tag, inner)?.map(|v| FStruct::inj(label, v.clone())))
        }
        FStruct::Seq(items) => {
            // iterated double strength, left to right
            let mut acc: TValue<Vec<FStruct<X>>> = TValue::unit(tag, Vec::new());
            for item in items {
                let next = dst(tag, &acc, &canonical_rec(tag, item)?)?;
                acc = next.map(|(prefix, x)| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                });
            }
            Ok(acc.map(|v| FStruct::Seq(v.clone())))
        }
    }
}

/// `lambda(u) = { v | (v, u) in Rel_F(membership) }` for the powerset monad.
pub fn lambda_rel_lifting<X: Element>(
    functor: &FunctorExpr,
    s: &FStruct<BTreeSet<X>>,
) -> Result<BTreeSet<FStruct<X>>> {
    s.check_shape(functor)?;
    Ok(related_rec(s).into_iter().collect())
}

fn related_rec<X: Element>(s: &FStruct<BTreeSet<X>>) -> Vec<FStruct<X>> {
    match s {
        FStruct::Var(choices) => choices.iter().cloned().map(FStruct::Var).collect(),
        FStruct::Sym(c) => vec![FStruct::Sym(c.clone())],
        FStruct::Pair(a, b) => {
            let rights = related_rec(b);
            related_rec(a)
                .into_iter()
                .flat_map(|l| rights.iter().map(move |r| FStruct::pair(l.clone(), r.clone())))
                .collect()
        }
        FStruct::Inj(label, inner) => related_rec(inner)
            .into_iter()
            .map(|v| FStruct::inj(label, v))
            .collect(),
        FStruct::Seq(items) => {
            let mut rows: Vec<Vec<FStruct<X>>> = vec![Vec::new()];
            for item in items {
                let options = related_rec(item);
                rows = rows
                    .iter()
                    .flat_map(|row| {
                        options.iter().map(move |o| {
                            let mut r = row.clone();
                            r.push(o.clone());
                            r
                        })
                    })
                    .collect();
            }
            rows.into_iter().map(FStruct::Seq).collect()
        }
    }
}

/// Whether `v` is related to `u` by the relation lifting of membership:
/// same skeleton, equal symbols and labels, and each variable of `v` is a
/// member of the set at the same position of `u`.
pub fn rel_lift_related<X: Element>(v: &FStruct<X>, u: &FStruct<BTreeSet<X>>) -> bool {
    match (v, u) {
        (FStruct::Var(x), FStruct::Var(set)) => set.contains(x),
        (FStruct::Sym(a), FStruct::Sym(b)) => a == b,
        (FStruct::Pair(a, b), FStruct::Pair(c, d)) => {
            rel_lift_related(a, c) && rel_lift_related(b, d)
        }
        (FStruct::Inj(l, a), FStruct::Inj(m, b)) => l == m && rel_lift_related(a, b),
        (FStruct::Seq(xs), FStruct::Seq(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(a, b)| rel_lift_related(a, b))
        }
        _ => false,
    }
}

/// `F` lifted along a law to Kleisli arrows, evaluated element-wise.
pub struct LiftedArrow<'a, L, X: Ord, Y: Ord> {
    law: &'a L,
    arrow: &'a KleisliMap<X, Y>,
}

/// `F-bar f`: the arrow `F X -> F T Y -> T F Y`.
pub fn lift_arrow<'a, L: DistributiveLaw, X: Element, Y: Element>(
    law: &'a L,
    arrow: &'a KleisliMap<X, Y>,
) -> Result<LiftedArrow<'a, L, X, Y>> {
    if law.monad() != arrow.tag() {
        return Err(Error::TagMismatch {
            expected: law.monad(),
            found: arrow.tag(),
        });
    }
    Ok(LiftedArrow { law, arrow })
}

impl<L: DistributiveLaw, X: Element, Y: Element> LiftedArrow<'_, L, X, Y> {
    pub fn apply(&self, s: &FStruct<X>) -> Result<TValue<FStruct<Y>>> {
        s.check_shape(self.law.functor())?;
        let pushed = s.try_fmap(&mut |x: &X| {
            self.arrow
                .apply(x)
                .cloned()
                .ok_or_else(|| Error::DomainMismatch(format!("{x:?} is outside the domain")))
        })?;
        self.law.apply(&pushed)
    }
}

/// Outcome of a law or property suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawReport {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

/// Counterexamples kept per report.
const MAX_RECORDED: usize = 5;

impl LawReport {
    pub fn new(name: impl Into<String>) -> Self {
        LawReport {
            name: name.into(),
            cases: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Counts one case; `detail` is evaluated only when the case failed.
    pub fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failures.len() < MAX_RECORDED {
            self.failures.push(detail());
        }
    }

    /// Like [`LawReport::record`], counting errors as failures.
    pub fn record_result(&mut self, outcome: Result<bool>, detail: impl FnOnce() -> String) {
        match outcome {
            Ok(ok) => self.record(ok, detail),
            Err(e) => self.record(false, || format!("{}: {e}", detail())),
        }
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "PASS {} ({} cases)", self.name, self.cases)
        } else {
            write!(f, "FAIL {} ({} cases)", self.name, self.cases)?;
            for c in &self.failures {
                write!(f, "\n  counterexample: {c}")?;
            }
            Ok(())
        }
    }
}

/// Checks the unit axiom `lambda . F eta = eta_F` on `unit_samples` and the
/// multiplication axiom `lambda . F mu = mu_F . T lambda . lambda_T` on
/// `mult_samples`.
pub fn check_distributive_axioms<L: DistributiveLaw, X: Element>(
    law: &L,
    unit_samples: &[FStruct<X>],
    mult_samples: &[FStruct<TValue<TValue<X>>>],
) -> LawReport {
    let tag = law.monad();
    let mut report = LawReport::new(format!(
        "distributive-law axioms ({tag}, {})",
        law.functor()
    ));
    for s in unit_samples {
        let lhs = law.apply(&s.fmap(&mut |x: &X| TValue::unit(tag, x.clone())));
        let rhs = TValue::unit(tag, s.clone());
        report.record_result(lhs.map(|l| l == rhs), || format!("unit axiom at {s:?}"));
    }
    for s in mult_samples {
        let outcome = (|| -> Result<bool> {
            let flat = s.try_fmap(&mut |t: &TValue<TValue<X>>| t.flatten())?;
            let lhs = law.apply(&flat)?;
            let rhs = law.apply(s)?.bind(|inner| law.apply(inner))?;
            Ok(lhs == rhs)
        })();
        report.record_result(outcome, || format!("multiplication axiom at {s:?}"));
    }
    report
}
