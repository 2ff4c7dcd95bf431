//! Finite coalgebras `X -> T F X`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::One;

use crate::functors::{FStruct, FunctorExpr, LtsShape, LtsStep, Symbol};
use crate::monads::{MonadTag, Prob, TValue};
use crate::{Error, Result};

/// Index of a state within its [`System`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A finite branching system: every state has one branching value over
/// `F`-structures of states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct System {
    name: String,
    tag: MonadTag,
    functor: FunctorExpr,
    states: Vec<String>,
    transitions: Vec<TValue<FStruct<StateId>>>,
}

impl System {
    pub fn new(
        name: impl Into<String>,
        tag: MonadTag,
        functor: FunctorExpr,
        states: Vec<String>,
        transitions: Vec<TValue<FStruct<StateId>>>,
    ) -> Result<Self> {
        functor.validate()?;
        if states.len() != transitions.len() {
            return Err(Error::InvalidSystem(format!(
                "{} states but {} transition entries",
                states.len(),
                transitions.len()
            )));
        }
        let distinct: BTreeSet<&String> = states.iter().collect();
        if distinct.len() != states.len() {
            return Err(Error::InvalidSystem("duplicate state name".into()));
        }
        for (i, value) in transitions.iter().enumerate() {
            if value.tag() != tag {
                return Err(Error::TagMismatch {
                    expected: tag,
                    found: value.tag(),
                });
            }
            for s in value.support() {
                s.check_shape(&functor)?;
                if let Some(bad) = s.leaves().into_iter().find(|y| y.0 >= states.len()) {
                    return Err(Error::InvalidSystem(format!(
                        "state `{}` refers to missing state {bad}",
                        states[i]
                    )));
                }
            }
            if value.mass() > Prob::one() {
                return Err(Error::MassExceedsOne(value.mass().to_string()));
            }
        }
        Ok(System {
            name: name.into(),
            tag,
            functor,
            states,
            transitions,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tag(&self) -> MonadTag {
        self.tag
    }

    pub fn functor(&self) -> &FunctorExpr {
        &self.functor
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId)
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id.0]
    }

    pub fn state_id(&self, name: &str) -> Result<StateId> {
        self.states
            .iter()
            .position(|s| s == name)
            .map(StateId)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    /// `c(x)`.
    pub fn transition(&self, id: StateId) -> &TValue<FStruct<StateId>> {
        &self.transitions[id.0]
    }

    /// Whether the function `h` (state `i` of `self` to `h[i]` of `target`) is
    /// a coalgebra morphism: `T F h . c = d . h`.
    pub fn is_morphism_to(&self, target: &System, h: &[StateId]) -> bool {
        if h.len() != self.len()
            || self.tag != target.tag
            || self.functor != target.functor
            || h.iter().any(|y| y.0 >= target.len())
        {
            return false;
        }
        self.ids().all(|x| {
            let pushed = self.transition(x).map(|s| s.fmap(&mut |y: &StateId| h[y.0]));
            pushed == *target.transition(h[x.0])
        })
    }

    /// The system read as a (possibly probabilistic) transition system with
    /// termination, when the functor is `1 + Sigma x X`.
    pub fn lts_view(&self) -> Result<LtsView> {
        let shape = LtsShape::of(&self.functor).ok_or_else(|| {
            Error::Unsupported(format!("functor {} is not 1 + Sigma * X", self.functor))
        })?;
        let outcomes = self
            .transitions
            .iter()
            .map(|value| {
                value
                    .support()
                    .map(|s| {
                        let outcome = match shape.view(s) {
                            Some(LtsStep::Stop) => None,
                            Some(LtsStep::Step(a, y)) => Some((a.clone(), *y)),
                            None => unreachable!("shape checked at construction"),
                        };
                        (outcome, value.weight(s))
                    })
                    .collect()
            })
            .collect();
        Ok(LtsView {
            shape,
            outcomes,
        })
    }
}

/// Branch `None` is termination; `Some((a, y))` is an `a`-step to `y`.
pub type LtsOutcome = Option<(Symbol, StateId)>;

/// Explicit outcome lists of an LTS-shaped system. Weights are 1 for the
/// lift and powerset monads.
#[derive(Clone, Debug)]
pub struct LtsView {
    pub shape: LtsShape,
    pub outcomes: Vec<Vec<(LtsOutcome, Prob)>>,
}

impl LtsView {
    pub fn terminates(&self, x: StateId) -> bool {
        self.outcomes[x.0].iter().any(|(o, _)| o.is_none())
    }

    pub fn successors<'a>(
        &'a self,
        x: StateId,
        letter: &'a Symbol,
    ) -> impl Iterator<Item = StateId> + 'a {
        self.outcomes[x.0].iter().filter_map(move |(o, _)| match o {
            Some((a, y)) if a == letter => Some(*y),
            _ => None,
        })
    }

    pub fn steps(&self, x: StateId) -> impl Iterator<Item = (&Symbol, StateId)> + '_ {
        self.outcomes[x.0]
            .iter()
            .filter_map(|(o, _)| o.as_ref().map(|(a, y)| (a, *y)))
    }
}

/// `(from, Some((letter, to)), weight)`, or `(from, None, weight)` for termination.
pub type LtsStepSpec<'a> = (&'a str, Option<(&'a str, &'a str)>, Prob);

/// Convenience builder for LTS-shaped systems, mostly for tests and
/// generators. Steps are `(from, Some((letter, to)), weight)`; `None`
/// marks termination.
pub fn lts_system(
    name: &str,
    tag: MonadTag,
    alphabet: &[&str],
    states: &[&str],
    steps: &[LtsStepSpec],
) -> Result<System> {
    let functor = FunctorExpr::lts(alphabet.iter().copied());
    let shape = LtsShape::of(&functor).expect("lts functor");
    let index: BTreeMap<&str, usize> = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let lookup = |s: &str| {
        index
            .get(s)
            .copied()
            .map(StateId)
            .ok_or_else(|| Error::UnknownState(s.to_string()))
    };
    let mut per_state: Vec<Vec<(FStruct<StateId>, Prob)>> = vec![Vec::new(); states.len()];
    for (from, step, p) in steps {
        let s = match step {
            None => shape.stop(),
            Some((a, to)) => shape.step(&Symbol::new(a), lookup(to)?),
        };
        per_state[lookup(from)?.0].push((s, p.clone()));
    }
    let transitions = per_state
        .into_iter()
        .map(|entries| match tag {
            MonadTag::Powerset => Ok(TValue::set(entries.into_iter().map(|(s, _)| s))),
            MonadTag::Subdist => TValue::dist(entries),
            MonadTag::Lift => match entries.len() {
                0 => Ok(TValue::lift(None)),
                1 => Ok(TValue::lift(entries.into_iter().next().map(|(s, _)| s))),
                _ => Err(Error::InvalidSystem("lift state with several outcomes".into())),
            },
        })
        .collect::<Result<Vec<_>>>()?;
    System::new(
        name,
        tag,
        functor,
        states.iter().map(|s| s.to_string()).collect(),
        transitions,
    )
}
