//! Seeded sample generators for law suites, property tests and sweeps.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::functors::{FStruct, FunctorExpr, LtsShape, Symbol};
use crate::monads::{KleisliMap, MonadTag, Prob, TValue};
use crate::system::{StateId, System};
use crate::Element;

/// Elements drawn from a universe of four.
pub type Atom = u8;

pub const ATOMS: [Atom; 4] = [0, 1, 2, 3];

/// Functors covering every constructor, kept small enough that the
/// powerset law stays cheap on them.
pub fn functor_catalog() -> Vec<FunctorExpr> {
    vec![
        FunctorExpr::Identity,
        FunctorExpr::constant(["p", "q"]),
        FunctorExpr::one(),
        FunctorExpr::prod(FunctorExpr::Identity, FunctorExpr::Identity),
        FunctorExpr::prod(FunctorExpr::constant(["p", "q"]), FunctorExpr::Identity),
        FunctorExpr::coprod([
            ("inl", FunctorExpr::Identity),
            ("inr", FunctorExpr::prod(FunctorExpr::Identity, FunctorExpr::Identity)),
        ]),
        FunctorExpr::lts(["a", "b"]),
        FunctorExpr::list(FunctorExpr::Identity),
        FunctorExpr::cfg(["0", "s"]),
        FunctorExpr::prod(
            FunctorExpr::coprod([("inl", FunctorExpr::one()), ("inr", FunctorExpr::Identity)]),
            FunctorExpr::constant(["p", "q"]),
        ),
    ]
}

/// A seeded source of random values.
pub struct Sampler {
    rng: ChaCha8Rng,
    /// Longest generated list.
    pub list_len: usize,
    /// Largest generated support.
    pub support: usize,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            list_len: 3,
            support: 3,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn atom(&mut self) -> Atom {
        *ATOMS.choose(&mut self.rng).unwrap()
    }

    fn subset<E: Clone>(&mut self, pool: &[E], max: usize) -> Vec<E> {
        let k = self.rng.gen_range(0..=max.min(pool.len()));
        pool.choose_multiple(&mut self.rng, k).cloned().collect()
    }

    /// Weights `n_i / total` with `total >= sum n_i`, so the mass is at most 1.
    fn weights(&mut self, k: usize) -> Vec<Prob> {
        let parts: Vec<i64> = (0..k).map(|_| self.rng.gen_range(1..=3)).collect();
        let total = parts.iter().sum::<i64>() + self.rng.gen_range(0..=2);
        parts
            .into_iter()
            .map(|n| Prob::new(n.into(), total.into()))
            .collect()
    }

    /// A branching value whose support is drawn from `pool`.
    pub fn tvalue<E: Element>(&mut self, tag: MonadTag, pool: &[E]) -> TValue<E> {
        match tag {
            MonadTag::Lift => {
                if pool.is_empty() || self.rng.gen_bool(0.25) {
                    TValue::lift(None)
                } else {
                    TValue::lift(pool.choose(&mut self.rng).cloned())
                }
            }
            MonadTag::Powerset => {
                let max = self.support;
                TValue::set(self.subset(pool, max))
            }
            MonadTag::Subdist => {
                let max = self.support;
                let chosen = self.subset(pool, max);
                let w = self.weights(chosen.len());
                TValue::dist(chosen.into_iter().zip(w)).expect("mass at most one")
            }
        }
    }

    /// A branching value at least as large as `v`.
    pub fn above<E: Element>(&mut self, v: &TValue<E>, pool: &[E]) -> TValue<E> {
        match v.tag() {
            MonadTag::Lift => {
                if v.is_bottom() {
                    self.tvalue(MonadTag::Lift, pool)
                } else {
                    v.clone()
                }
            }
            MonadTag::Powerset => v.join(&self.tvalue(MonadTag::Powerset, pool)).unwrap(),
            MonadTag::Subdist => {
                let mut entries = v.as_dist().unwrap().clone();
                let room = Prob::from_integer(1.into()) - v.mass();
                if let Some(e) = pool.choose(&mut self.rng) {
                    let share = Prob::new(self.rng.gen_range(0..=2).into(), 2.into());
                    let extra = room * share;
                    if extra > Prob::from_integer(0.into()) {
                        *entries.entry(e.clone()).or_insert_with(|| Prob::from_integer(0.into())) += extra;
                    }
                }
                TValue::dist(entries).expect("still at most one")
            }
        }
    }

    /// A random structure of shape `functor`, with leaves from `leaf`.
    pub fn fstruct<X>(
        &mut self,
        functor: &FunctorExpr,
        leaf: &mut impl FnMut(&mut Self) -> X,
    ) -> FStruct<X> {
        match functor {
            FunctorExpr::Identity => FStruct::Var(leaf(self)),
            FunctorExpr::Const(symbols) => {
                let all: Vec<&Symbol> = symbols.iter().collect();
                FStruct::Sym((*all.choose(&mut self.rng).unwrap()).clone())
            }
            FunctorExpr::Prod(a, b) => {
                let l = self.fstruct(a, leaf);
                let r = self.fstruct(b, leaf);
                FStruct::pair(l, r)
            }
            FunctorExpr::Coprod(summands) => {
                let (label, f) = summands.choose(&mut self.rng).unwrap();
                FStruct::inj(label, self.fstruct(f, leaf))
            }
            FunctorExpr::List(f) => {
                let n = self.rng.gen_range(0..=self.list_len);
                FStruct::Seq((0..n).map(|_| self.fstruct(f, leaf)).collect())
            }
        }
    }

    /// A random Kleisli arrow between atom sets.
    pub fn kleisli(&mut self, tag: MonadTag) -> KleisliMap<Atom, Atom> {
        let atoms = BTreeSet::from(ATOMS);
        KleisliMap::from_fn(tag, atoms.clone(), atoms, |_| self.tvalue(tag, &ATOMS))
            .expect("atoms map into atoms")
    }

    /// A random plain function on atoms.
    pub fn function(&mut self) -> [Atom; 4] {
        [self.atom(), self.atom(), self.atom(), self.atom()]
    }

    /// A random system with `n` states.
    pub fn system(&mut self, tag: MonadTag, functor: &FunctorExpr, n: usize) -> System {
        let ids: Vec<StateId> = (0..n).map(StateId).collect();
        let transitions = (0..n)
            .map(|_| {
                let k = self.rng.gen_range(0..=self.support);
                let outcomes: Vec<FStruct<StateId>> = (0..k)
                    .map(|_| {
                        self.fstruct(functor, &mut |s: &mut Sampler| {
                            *ids.choose(&mut s.rng).unwrap()
                        })
                    })
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                self.tvalue(tag, &outcomes)
            })
            .collect();
        System::new(
            "random",
            tag,
            functor.clone(),
            (0..n).map(|i| format!("s{i}")).collect(),
            transitions,
        )
        .expect("generated systems are valid")
    }
}

/// Per-state outcomes of an LTS over `letters` and `n` states:
/// termination first, then every `(letter, target)`.
fn lts_outcomes(shape: &LtsShape, letters: &[Symbol], n: usize) -> Vec<FStruct<StateId>> {
    let mut out = vec![shape.stop()];
    for a in letters {
        for y in 0..n {
            out.push(shape.step(a, StateId(y)));
        }
    }
    out
}

/// Per-state transition choices in the exhaustive sweep, as lists of
/// `(outcome index, weight)`. Powerset: every subset. Subdist: nothing, a
/// Dirac outcome, or two distinct outcomes with weights 1/2 and 1/3.
fn state_choices(tag: MonadTag, outcomes: usize) -> Vec<Vec<(usize, Prob)>> {
    let one = Prob::from_integer(1.into());
    match tag {
        MonadTag::Powerset => (0u32..1 << outcomes)
            .map(|mask| {
                (0..outcomes)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| (i, one.clone()))
                    .collect()
            })
            .collect(),
        MonadTag::Subdist => {
            let half = Prob::new(1.into(), 2.into());
            let third = Prob::new(1.into(), 3.into());
            let mut out = vec![Vec::new()];
            out.extend((0..outcomes).map(|i| vec![(i, one.clone())]));
            for i in 0..outcomes {
                for j in 0..outcomes {
                    if i != j {
                        out.push(vec![(i, half.clone()), (j, third.clone())]);
                    }
                }
            }
            out
        }
        MonadTag::Lift => {
            let mut out = vec![Vec::new()];
            out.extend((0..outcomes).map(|i| vec![(i, one.clone())]));
            out
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every LTS-shaped system with `1..=max_states` states over one or two
/// letters, built from [`state_choices`], one representative per class
/// of state renamings and letter swaps.
pub fn exhaustive_lts(tag: MonadTag, max_states: usize) -> Vec<System> {
    let mut out = Vec::new();
    for letters in [vec![Symbol::new("a")], vec![Symbol::new("a"), Symbol::new("b")]] {
        let names: Vec<&str> = letters.iter().map(|s| s.as_str()).collect();
        let functor = FunctorExpr::lts(names.iter().copied());
        let shape = LtsShape::of(&functor).unwrap();
        for n in 1..=max_states {
            let outcomes = lts_outcomes(&shape, &letters, n);
            let choices = state_choices(tag, outcomes.len());
            // outcome index under a state renaming and an optional letter swap
            let relabel = |i: usize, perm: &[usize], swap: bool| -> usize {
                if i == 0 {
                    return 0;
                }
                let (letter, target) = ((i - 1) / n, (i - 1) % n);
                let letter = if swap { letters.len() - 1 - letter } else { letter };
                1 + letter * n + perm[target]
            };
            let index: std::collections::BTreeMap<Vec<(usize, Prob)>, usize> = choices
                .iter()
                .enumerate()
                .map(|(k, c)| (c.clone(), k))
                .collect();
            let perms = permutations(n);
            let swaps: &[bool] = if letters.len() == 2 { &[false, true] } else { &[false] };
            // choice index after relabelling, per (perm, swap, choice)
            let images: Vec<Vec<usize>> = perms
                .iter()
                .flat_map(|p| swaps.iter().map(move |s| (p, *s)))
                .map(|(perm, swap)| {
                    choices
                        .iter()
                        .map(|c| {
                            let mut moved: Vec<(usize, Prob)> = c
                                .iter()
                                .map(|(i, w)| (relabel(*i, perm, swap), w.clone()))
                                .collect();
                            if tag == MonadTag::Powerset {
                                moved.sort();
                            }
                            index[&moved]
                        })
                        .collect()
                })
                .collect();
            let group: Vec<&Vec<usize>> = perms
                .iter()
                .flat_map(|p| swaps.iter().map(move |_| p))
                .collect();

            let total = choices.len().pow(n as u32);
            let mut code = vec![0usize; n];
            for _ in 0..total {
                let canonical = images.iter().zip(&group).all(|(img, perm)| {
                    // state perm[i] of the image carries the relabelled choice of state i
                    let mut moved = vec![0usize; n];
                    for i in 0..n {
                        moved[perm[i]] = img[code[i]];
                    }
                    moved >= code
                });
                if canonical {
                    let transitions = code
                        .iter()
                        .map(|k| {
                            let c = &choices[*k];
                            match tag {
                                MonadTag::Powerset => {
                                    TValue::set(c.iter().map(|(i, _)| outcomes[*i].clone()))
                                }
                                MonadTag::Subdist => TValue::dist(
                                    c.iter().map(|(i, w)| (outcomes[*i].clone(), w.clone())),
                                )
                                .unwrap(),
                                MonadTag::Lift => {
                                    TValue::lift(c.first().map(|(i, _)| outcomes[*i].clone()))
                                }
                            }
                        })
                        .collect();
                    out.push(
                        System::new(
                            format!("sweep-{}", out.len()),
                            tag,
                            functor.clone(),
                            (0..n).map(|i| format!("s{i}")).collect(),
                            transitions,
                        )
                        .unwrap(),
                    );
                }
                // next code, little-endian counter
                for digit in code.iter_mut() {
                    *digit += 1;
                    if *digit < choices.len() {
                        break;
                    }
                    *digit = 0;
                }
            }
        }
    }
    out
}
