//! Tests as initial-algebra terms for nondeterministic systems.
//!
//! A test `alpha(s)` passes at `x` when some structure `c(x)` can offer
//! matches `s` with every subterm replaced by a state that passes it. With
//! the powerset distributive law this reads
//!
//! ```text
//! [[alpha(s)]] = converse(c) applied to lambda(F [[-]] (s))
//! ```
//!
//! The theory of a state collects the tests it passes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::distributivity::DistributiveLaw;
use crate::functors::{enumerate_structs, enumerate_terms, FStruct, Term, TermStyle};
use crate::monads::{KleisliMap, MonadTag, TValue};
use crate::par::{try_map_range, Execution};
use crate::system::{LtsView, StateId, System};
use crate::traces::finite_trace;
use crate::{Element, Error, Result};

/// `f^v(y) = {x | y in f(x)}`.
pub fn relation_converse<X: Element, Y: Element>(f: &KleisliMap<X, Y>) -> Result<KleisliMap<Y, X>> {
    if f.tag() != MonadTag::Powerset {
        return Err(Error::TagMismatch {
            expected: MonadTag::Powerset,
            found: f.tag(),
        });
    }
    let mut back: BTreeMap<Y, BTreeSet<X>> =
        f.codomain().iter().map(|y| (y.clone(), BTreeSet::new())).collect();
    for (x, fx) in f.iter() {
        for y in fx.support() {
            back.get_mut(y).expect("support in codomain").insert(x.clone());
        }
    }
    let mapping = back.into_iter().map(|(y, xs)| (y, TValue::set(xs))).collect();
    KleisliMap::new(MonadTag::Powerset, f.codomain().clone(), f.domain().clone(), mapping)
}

fn require_powerset(sys: &System) -> Result<()> {
    if sys.tag() != MonadTag::Powerset {
        return Err(Error::Unsupported(format!(
            "tests are defined for powerset systems, got {}",
            sys.tag()
        )));
    }
    Ok(())
}

fn check_test_law<L: DistributiveLaw>(sys: &System, law: &L) -> Result<()> {
    require_powerset(sys)?;
    if law.monad() != MonadTag::Powerset {
        return Err(Error::TagMismatch {
            expected: MonadTag::Powerset,
            found: law.monad(),
        });
    }
    if law.functor() != sys.functor() {
        return Err(Error::ShapeMismatch {
            functor: sys.functor().to_string(),
            detail: format!("law is for functor {}", law.functor()),
        });
    }
    Ok(())
}

/// All tests of height at most `depth`.
pub fn enumerate_tests(sys: &System, depth: usize, list_cap: usize) -> Result<BTreeSet<Term>> {
    require_powerset(sys)?;
    Ok(enumerate_terms(sys.functor(), depth, list_cap))
}

/// The converse of the coalgebra, `F X -> P X`, as an index.
struct Converse(BTreeMap<FStruct<StateId>, BTreeSet<StateId>>);

impl Converse {
    fn of(sys: &System) -> Self {
        let mut back: BTreeMap<FStruct<StateId>, BTreeSet<StateId>> = BTreeMap::new();
        for x in sys.ids() {
            for s in sys.transition(x).support() {
                back.entry(s.clone()).or_default().insert(x);
            }
        }
        Converse(back)
    }

    /// One step of the interpretation, given the interpretation of the leaves.
    fn step<L: DistributiveLaw>(
        &self,
        law: &L,
        s: &FStruct<BTreeSet<StateId>>,
    ) -> Result<BTreeSet<StateId>> {
        let lifted = law.apply(&s.fmap(&mut |xs: &BTreeSet<StateId>| TValue::set(xs.iter().copied())))?;
        let mut out = BTreeSet::new();
        for sigma in lifted.support() {
            if let Some(xs) = self.0.get(sigma) {
                out.extend(xs.iter().copied());
            }
        }
        Ok(out)
    }
}

/// States passing the test `t`.
pub fn interpret_test<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    t: &Term,
) -> Result<BTreeSet<StateId>> {
    check_test_law(sys, law)?;
    let converse = Converse::of(sys);
    let mut memo = BTreeMap::new();
    interpret_memo(&converse, law, t, &mut memo)
}

fn interpret_memo<L: DistributiveLaw>(
    converse: &Converse,
    law: &L,
    t: &Term,
    memo: &mut BTreeMap<Term, BTreeSet<StateId>>,
) -> Result<BTreeSet<StateId>> {
    if let Some(hit) = memo.get(t) {
        return Ok(hit.clone());
    }
    let inner = t
        .body()
        .try_fmap(&mut |u: &Term| interpret_memo(converse, law, u, memo))?;
    let out = converse.step(law, &inner)?;
    memo.insert(t.clone(), out.clone());
    Ok(out)
}

/// Direct reading for `1 + Sigma x X`: the empty test passes at terminating
/// states, `a.s` where an `a`-step reaches a state passing `s`.
pub fn interpret_test_lts(sys: &System, t: &Term) -> Result<BTreeSet<StateId>> {
    require_powerset(sys)?;
    let view = sys.lts_view()?;
    let word = view
        .shape
        .term_word(t)
        .ok_or_else(|| Error::ShapeMismatch {
            functor: sys.functor().to_string(),
            detail: "test is not a word".into(),
        })?;
    fn passing(view: &LtsView, n: usize, word: &[crate::functors::Symbol]) -> BTreeSet<StateId> {
        match word.split_first() {
            None => (0..n).map(StateId).filter(|x| view.terminates(*x)).collect(),
            Some((a, rest)) => {
                let next = passing(view, n, rest);
                (0..n)
                    .map(StateId)
                    .filter(|x| view.successors(*x, a).any(|y| next.contains(&y)))
                    .collect()
            }
        }
    }
    Ok(passing(&view, sys.len(), &word))
}

/// Every test of height at most `depth` passed by at least one state,
/// together with the states passing it.
///
/// A test with a subterm nobody passes is passed by nobody, so each level
/// is built only from tests that passed at the level below.
pub fn passing_tests<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    depth: usize,
    list_cap: usize,
    exec: Execution,
) -> Result<BTreeMap<Term, BTreeSet<StateId>>> {
    check_test_law(sys, law)?;
    let converse = Converse::of(sys);
    let mut passed: BTreeMap<Term, BTreeSet<StateId>> = BTreeMap::new();
    for _ in 0..depth {
        let carrier: Vec<(Term, BTreeSet<StateId>)> =
            passed.iter().map(|(t, xs)| (t.clone(), xs.clone())).collect();
        let candidates = enumerate_structs(sys.functor(), &carrier, list_cap);
        let results = try_map_range(exec, candidates.len(), |i| {
            let s = &candidates[i];
            let xs = converse.step(law, &s.fmap(&mut |(_, xs): &(Term, BTreeSet<StateId>)| xs.clone()))?;
            Ok::<_, Error>((s, xs))
        })?;
        passed = results
            .into_iter()
            .filter(|(_, xs)| !xs.is_empty())
            .map(|(s, xs)| (Term::fold_unchecked(s.fmap(&mut |(t, _)| t.clone())), xs))
            .collect();
    }
    Ok(passed)
}

/// The tests passed by one state, up to a height.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestReport {
    pub state: String,
    pub passed: BTreeSet<Term>,
    pub depth: usize,
}

impl TestReport {
    pub fn render(&self, sys: &System) -> String {
        let style = TermStyle::for_functor(sys.functor());
        self.passed
            .iter()
            .map(|t| style.render(t))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Theories of every state.
pub fn theory_maps<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    depth: usize,
    list_cap: usize,
) -> Result<Vec<TestReport>> {
    let passing = passing_tests(sys, law, depth, list_cap, Execution::default())?;
    let mut out: Vec<TestReport> = sys
        .ids()
        .map(|x| TestReport {
            state: sys.state_name(x).to_string(),
            passed: BTreeSet::new(),
            depth,
        })
        .collect();
    for (t, xs) in passing {
        for x in xs {
            out[x.0].passed.insert(t.clone());
        }
    }
    Ok(out)
}

pub fn theory_map<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    x: StateId,
    depth: usize,
    list_cap: usize,
) -> Result<TestReport> {
    if x.0 >= sys.len() {
        return Err(Error::UnknownState(x.to_string()));
    }
    Ok(theory_maps(sys, law, depth, list_cap)?.swap_remove(x.0))
}

/// The theory computed test by test over all of [`enumerate_tests`].
pub fn theory_map_naive<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    x: StateId,
    depth: usize,
    list_cap: usize,
) -> Result<TestReport> {
    check_test_law(sys, law)?;
    if x.0 >= sys.len() {
        return Err(Error::UnknownState(x.to_string()));
    }
    let converse = Converse::of(sys);
    let mut memo = BTreeMap::new();
    let mut passed = BTreeSet::new();
    for t in enumerate_tests(sys, depth, list_cap)? {
        if interpret_memo(&converse, law, &t, &mut memo)?.contains(&x) {
            passed.insert(t);
        }
    }
    Ok(TestReport {
        state: sys.state_name(x).to_string(),
        passed,
        depth,
    })
}

pub fn testing_equivalent<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    x: StateId,
    y: StateId,
    depth: usize,
    list_cap: usize,
) -> Result<bool> {
    for s in [x, y] {
        if s.0 >= sys.len() {
            return Err(Error::UnknownState(s.to_string()));
        }
    }
    let theories = theory_maps(sys, law, depth, list_cap)?;
    Ok(theories[x.0].passed == theories[y.0].passed)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpressiveMismatch {
    pub state: String,
    pub only_in_theory: Vec<String>,
    pub only_in_trace: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpressiveReport {
    pub depth: usize,
    pub states_checked: usize,
    pub mismatches: Vec<ExpressiveMismatch>,
}

impl ExpressiveReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for ExpressiveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} theory equals trace at depth {} ({} states)",
            self.depth, self.states_checked
        )?;
        for m in &self.mismatches {
            write!(
                f,
                "\n  {}: theory only {{{}}}, trace only {{{}}}",
                m.state,
                m.only_in_theory.join(", "),
                m.only_in_trace.join(", ")
            )?;
        }
        Ok(())
    }
}

/// Compares each theory with the finite trace at the same depth.
pub fn check_expressive<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    depth: usize,
    list_cap: usize,
) -> Result<ExpressiveReport> {
    check_expressive_with(sys, law, law, depth, list_cap)
}

/// As [`check_expressive`], interpreting tests through `test_law` while
/// traces use `trace_law`.
pub fn check_expressive_with<L: DistributiveLaw, M: DistributiveLaw>(
    sys: &System,
    trace_law: &L,
    test_law: &M,
    depth: usize,
    list_cap: usize,
) -> Result<ExpressiveReport> {
    check_test_law(sys, trace_law)?;
    let traces = finite_trace(sys, trace_law, depth)?;
    let theories = theory_maps(sys, test_law, depth, list_cap)?;
    let style = TermStyle::for_functor(sys.functor());
    let mut mismatches = Vec::new();
    for x in sys.ids() {
        let tr: BTreeSet<&Term> = traces
            .get(x)
            .support()
            .filter(|t| t.list_width() <= list_cap)
            .collect();
        let th: BTreeSet<&Term> = theories[x.0].passed.iter().collect();
        if tr != th {
            mismatches.push(ExpressiveMismatch {
                state: sys.state_name(x).to_string(),
                only_in_theory: th.difference(&tr).map(|t| style.render(t)).collect(),
                only_in_trace: tr.difference(&th).map(|t| style.render(t)).collect(),
            });
        }
    }
    Ok(ExpressiveReport {
        depth,
        states_checked: sys.len(),
        mismatches,
    })
}
