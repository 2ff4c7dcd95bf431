//! Finite trace semantics as the least fixed point of the coinduction map.
//!
//! For a system `c: X -> T F X` and a distributive law, one step of the
//! iteration sends a trace map `m: X -> T A` to
//!
//! ```text
//! Phi(m) = J(alpha) . F-bar(m) . c
//! ```
//!
//! i.e. take `c(x)`, push every state inside each structure through `m`,
//! distribute the branching outwards, fold with the initial algebra and
//! flatten. Starting from the bottom map, `Phi^n(bottom)` carries exactly the
//! traces of height at most `n` (words of length below `n`). The sequence is
//! ascending and each component stabilises once the depth exceeds its height.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Zero};

use crate::distributivity::DistributiveLaw;
use crate::functors::{enumerate_terms, FStruct, Symbol, Term, TermStyle};
use crate::monads::{MonadTag, Prob, TValue};
use crate::par::{try_map_range, Execution};
use crate::system::{StateId, System};
use crate::{Error, Result};

/// An approximant `Phi^depth(bottom)`: one branching value over terms per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceMap {
    tag: MonadTag,
    depth: usize,
    assignment: Vec<TValue<Term>>,
}

impl TraceMap {
    pub fn bottom(sys: &System) -> Self {
        TraceMap {
            tag: sys.tag(),
            depth: 0,
            assignment: vec![TValue::bottom(sys.tag()); sys.len()],
        }
    }

    /// A candidate map; every term must have height at most `depth`.
    pub fn new(sys: &System, depth: usize, assignment: Vec<TValue<Term>>) -> Result<Self> {
        if assignment.len() != sys.len() {
            return Err(Error::DomainMismatch(format!(
                "trace map has {} entries for {} states",
                assignment.len(),
                sys.len()
            )));
        }
        for value in &assignment {
            if value.tag() != sys.tag() {
                return Err(Error::TagMismatch {
                    expected: sys.tag(),
                    found: value.tag(),
                });
            }
            if let Some(t) = value.support().find(|t| t.height() > depth) {
                return Err(Error::DomainMismatch(format!(
                    "term {t} is higher than depth {depth}"
                )));
            }
        }
        Ok(TraceMap {
            tag: sys.tag(),
            depth,
            assignment,
        })
    }

    pub fn tag(&self) -> MonadTag {
        self.tag
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn get(&self, x: StateId) -> &TValue<Term> {
        &self.assignment[x.0]
    }

    pub fn values(&self) -> &[TValue<Term>] {
        &self.assignment
    }

    pub fn into_values(self) -> Vec<TValue<Term>> {
        self.assignment
    }

    /// Pointwise order.
    pub fn leq(&self, other: &TraceMap) -> Result<bool> {
        if self.assignment.len() != other.assignment.len() {
            return Err(Error::DomainMismatch("trace maps of different systems".into()));
        }
        for (a, b) in self.assignment.iter().zip(&other.assignment) {
            if !a.leq(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Rendered value at one state.
    pub fn render_state(&self, sys: &System, x: StateId) -> String {
        let style = TermStyle::for_functor(sys.functor());
        self.get(x).render_with(|t| style.render(t))
    }

    /// `state: value` lines sorted by state name.
    pub fn render(&self, sys: &System) -> String {
        let mut ids: Vec<StateId> = sys.ids().collect();
        ids.sort_by_key(|x| sys.state_name(*x));
        ids.iter()
            .map(|x| format!("{}: {}\n", sys.state_name(*x), self.render_state(sys, *x)))
            .collect()
    }
}

fn check_law<L: DistributiveLaw>(sys: &System, law: &L) -> Result<()> {
    if law.monad() != sys.tag() {
        return Err(Error::TagMismatch {
            expected: sys.tag(),
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

/// `F-bar(m)` applied to one structure of states.
fn lift_through<L: DistributiveLaw>(
    law: &L,
    m: &[TValue<Term>],
    s: &FStruct<StateId>,
) -> Result<TValue<FStruct<Term>>> {
    law.apply(&s.fmap(&mut |y: &StateId| m[y.0].clone()))
}

/// One application of the coinduction map.
pub fn phi_step<L: DistributiveLaw>(sys: &System, law: &L, m: &TraceMap) -> Result<TraceMap> {
    phi_step_with(sys, law, m, Execution::default())
}

pub fn phi_step_with<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    m: &TraceMap,
    exec: Execution,
) -> Result<TraceMap> {
    check_law(sys, law)?;
    if m.assignment.len() != sys.len() || m.tag != sys.tag() {
        return Err(Error::DomainMismatch("trace map belongs to another system".into()));
    }
    let assignment = try_map_range(exec, sys.len(), |i| {
        sys.transition(StateId(i)).bind(|s| {
            let pushed = lift_through(law, &m.assignment, s)?;
            Ok(pushed.map(|fs| Term::fold_unchecked(fs.clone())))
        })
    })?;
    Ok(TraceMap {
        tag: m.tag,
        depth: m.depth + 1,
        assignment,
    })
}

/// `Phi^depth(bottom)`.
pub fn finite_trace<L: DistributiveLaw>(sys: &System, law: &L, depth: usize) -> Result<TraceMap> {
    finite_trace_with(sys, law, depth, Execution::default())
}

pub fn finite_trace_with<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    depth: usize,
    exec: Execution,
) -> Result<TraceMap> {
    check_law(sys, law)?;
    let mut m = TraceMap::bottom(sys);
    for _ in 0..depth {
        m = phi_step_with(sys, law, &m, exec)?;
    }
    Ok(m)
}

/// All approximants `Phi^0(bottom) ..= Phi^depth(bottom)`.
pub fn trace_approximants<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    depth: usize,
    exec: Execution,
) -> Result<Vec<TraceMap>> {
    check_law(sys, law)?;
    let mut out = vec![TraceMap::bottom(sys)];
    for _ in 0..depth {
        let next = phi_step_with(sys, law, out.last().unwrap(), exec)?;
        out.push(next);
    }
    Ok(out)
}

fn require(sys: &System, tag: MonadTag, what: &str) -> Result<()> {
    if sys.tag() != tag {
        return Err(Error::Unsupported(format!(
            "{what} needs a {tag} system, got {}",
            sys.tag()
        )));
    }
    Ok(())
}

/// Trace sets of a nondeterministic LTS by enumerating runs
/// `x -a1-> ... -an-> xn -> tick` with `n < depth`.
pub fn trace_oracle_lts(sys: &System, depth: usize) -> Result<TraceMap> {
    require(sys, MonadTag::Powerset, "the LTS oracle")?;
    let view = sys.lts_view()?;

    fn runs(
        view: &crate::system::LtsView,
        x: StateId,
        depth: usize,
        prefix: &mut Vec<Symbol>,
        out: &mut BTreeSet<Vec<Symbol>>,
    ) {
        if prefix.len() >= depth {
            return;
        }
        if view.terminates(x) {
            out.insert(prefix.clone());
        }
        for (a, y) in view.steps(x) {
            prefix.push(a.clone());
            runs(view, y, depth, prefix, out);
            prefix.pop();
        }
    }

    let assignment = sys
        .ids()
        .map(|x| {
            let mut words = BTreeSet::new();
            runs(&view, x, depth, &mut Vec::new(), &mut words);
            TValue::set(words.iter().map(|w| view.shape.word_term(w)))
        })
        .collect();
    TraceMap::new(sys, depth, assignment)
}

/// Trace distributions of a probabilistic LTS: the weight of a word is the
/// sum over its runs of the product of step probabilities, ending in
/// termination.
pub fn trace_oracle_plts(sys: &System, depth: usize) -> Result<TraceMap> {
    require(sys, MonadTag::Subdist, "the probabilistic oracle")?;
    let view = sys.lts_view()?;

    fn paths(
        view: &crate::system::LtsView,
        x: StateId,
        depth: usize,
        weight: &Prob,
        prefix: &mut Vec<Symbol>,
        out: &mut BTreeMap<Vec<Symbol>, Prob>,
    ) {
        if prefix.len() >= depth {
            return;
        }
        for (outcome, p) in &view.outcomes[x.0] {
            match outcome {
                None => {
                    *out.entry(prefix.clone()).or_insert_with(Prob::zero) += weight * p;
                }
                Some((a, y)) => {
                    prefix.push(a.clone());
                    paths(view, *y, depth, &(weight * p), prefix, out);
                    prefix.pop();
                }
            }
        }
    }

    let assignment = sys
        .ids()
        .map(|x| {
            let mut weights = BTreeMap::new();
            paths(&view, x, depth, &Prob::one(), &mut Vec::new(), &mut weights);
            TValue::dist(weights.iter().map(|(w, p)| (view.shape.word_term(w), p.clone())))
        })
        .collect::<Result<Vec<_>>>()?;
    TraceMap::new(sys, depth, assignment)
}

/// Exact traces of a lift-monad LTS by following the unique run. Reaching
/// termination yields the word read so far; deadlock (`bot`) or revisiting a
/// state (livelock) yields `bot`.
pub fn trace_lift_exact(sys: &System) -> Result<Vec<TValue<Term>>> {
    require(sys, MonadTag::Lift, "exact lift traces")?;
    let view = sys.lts_view()?;
    Ok(sys
        .ids()
        .map(|start| {
            let mut word = Vec::new();
            let mut seen = BTreeSet::new();
            let mut cur = start;
            loop {
                if !seen.insert(cur) {
                    return TValue::lift(None);
                }
                match view.outcomes[cur.0].first() {
                    None => return TValue::lift(None),
                    Some((None, _)) => return TValue::lift(Some(view.shape.word_term(&word))),
                    Some((Some((a, y)), _)) => {
                        word.push(a.clone());
                        cur = *y;
                    }
                }
            }
        })
        .collect())
}

/// Disagreement between the two sides of the coinduction square at a state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareMismatch {
    pub state: String,
    /// `F-bar(m) . c`, restricted.
    pub up_then_right: String,
    /// `J(alpha^-1) . m`, restricted.
    pub right_then_up: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareReport {
    pub depth: usize,
    pub states_checked: usize,
    pub mismatches: Vec<SquareMismatch>,
}

impl SquareReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for SquareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} coinduction square at depth {} ({} states)",
            self.depth, self.states_checked
        )?;
        for m in &self.mismatches {
            write!(
                f,
                "\n  {}: up-then-right {} vs right-then-up {}",
                m.state, m.up_then_right, m.right_then_up
            )?;
        }
        Ok(())
    }
}

fn component_height(s: &FStruct<Term>) -> usize {
    s.leaves().iter().map(|t| t.height()).max().unwrap_or(0)
}

/// Checks `F-bar(m) . c = J(alpha^-1) . m` on every component whose
/// subterms are below the depth of `m`.
pub fn check_square_for<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    m: &TraceMap,
) -> Result<SquareReport> {
    check_law(sys, law)?;
    let depth = m.depth;
    let style = TermStyle::for_functor(sys.functor());
    let render = |v: &TValue<FStruct<Term>>| {
        v.render_with(|s| {
            let mut text = s.fmap(&mut |t: &Term| style.render(t)).to_string();
            if text.is_empty() {
                text.push('?');
            }
            text
        })
    };
    let mut mismatches = Vec::new();
    for x in sys.ids() {
        let up = sys
            .transition(x)
            .bind(|s| lift_through(law, &m.assignment, s))?
            .restrict(|s| component_height(s) < depth);
        let right = m
            .get(x)
            .map(|t| t.body().clone())
            .restrict(|s| component_height(s) < depth);
        if up != right {
            mismatches.push(SquareMismatch {
                state: sys.state_name(x).to_string(),
                up_then_right: render(&up),
                right_then_up: render(&right),
            });
        }
    }
    Ok(SquareReport {
        depth,
        states_checked: sys.len(),
        mismatches,
    })
}

/// Computes `finite_trace(depth)` and checks the truncated coinduction square on it.
pub fn check_coinduction_square<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    depth: usize,
) -> Result<SquareReport> {
    let m = finite_trace(sys, law, depth)?;
    check_square_for(sys, law, &m)
}

/// Result of searching single-entry edits of the least solution for other
/// solutions of the truncated square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbationReport {
    pub depth: usize,
    pub edits_tried: usize,
    /// Edited maps that still satisfied the square (should stay empty).
    pub survivors: Vec<String>,
}

impl PerturbationReport {
    pub fn passed(&self) -> bool {
        self.survivors.is_empty()
    }
}

impl fmt::Display for PerturbationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} truncated finality at depth {} ({} single edits rejected)",
            self.depth,
            self.edits_tried - self.survivors.len()
        )?;
        for s in &self.survivors {
            write!(f, "\n  alternative solution: {s}")?;
        }
        Ok(())
    }
}

/// Edits one state's value of `finite_trace(depth)` at one term at a time
/// and checks that every edited map violates the truncated square.
///
/// Candidate terms: everything of height `<= depth` appearing in
/// `finite_trace(depth + 1)`, plus the first two initial-sequence levels with
/// lists of length at most 2.
pub fn perturbation_search<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    depth: usize,
) -> Result<PerturbationReport> {
    let base = finite_trace(sys, law, depth)?;
    let next = phi_step(sys, law, &base)?;
    let mut pool: BTreeSet<Term> = enumerate_terms(sys.functor(), depth.min(2), 2);
    for v in next.values() {
        pool.extend(v.support().filter(|t| t.height() <= depth).cloned());
    }
    let style = TermStyle::for_functor(sys.functor());
    let quarter = Prob::new(1.into(), 4.into());

    let mut edits_tried = 0;
    let mut survivors = Vec::new();
    for x in sys.ids() {
        let current = base.get(x);
        let mut edits: Vec<TValue<Term>> = Vec::new();
        for t in &pool {
            match sys.tag() {
                MonadTag::Powerset => {
                    let set = current.as_set().unwrap();
                    let mut edited = set.clone();
                    if !edited.remove(t) {
                        edited.insert(t.clone());
                    }
                    edits.push(TValue::set(edited));
                }
                MonadTag::Subdist => {
                    let dist = current.as_dist().unwrap();
                    let mut entries = dist.clone();
                    match entries.get(t).cloned() {
                        Some(p) => {
                            entries.remove(t);
                            edits.push(TValue::dist(entries.clone())?);
                            entries.insert(t.clone(), p / Prob::from_integer(2.into()));
                            edits.push(TValue::dist(entries)?);
                        }
                        None => {
                            let room = Prob::one() - current.mass();
                            let w = if room < quarter { room } else { quarter.clone() };
                            if !w.is_zero() {
                                entries.insert(t.clone(), w);
                                edits.push(TValue::dist(entries)?);
                            }
                        }
                    }
                }
                MonadTag::Lift => {
                    if current.as_lift() != Some(Some(t)) {
                        edits.push(TValue::lift(Some(t.clone())));
                    }
                }
            }
        }
        if sys.tag() == MonadTag::Lift && !current.is_bottom() {
            edits.push(TValue::lift(None));
        }
        for edited in edits {
            edits_tried += 1;
            let mut assignment = base.values().to_vec();
            assignment[x.0] = edited;
            let candidate = TraceMap::new(sys, depth, assignment)?;
            if check_square_for(sys, law, &candidate)?.passed() {
                survivors.push(format!(
                    "{} := {}",
                    sys.state_name(x),
                    candidate.get(x).render_with(|t| style.render(t))
                ));
            }
        }
    }
    Ok(PerturbationReport {
        depth,
        edits_tried,
        survivors,
    })
}

/// Equality of the depth-bounded trace semantics at two states.
pub fn trace_equivalent<L: DistributiveLaw>(
    sys: &System,
    law: &L,
    x: StateId,
    y: StateId,
    depth: usize,
) -> Result<bool> {
    for s in [x, y] {
        if s.0 >= sys.len() {
            return Err(Error::UnknownState(s.to_string()));
        }
    }
    let m = finite_trace(sys, law, depth)?;
    Ok(m.get(x) == m.get(y))
}
