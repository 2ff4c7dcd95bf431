//! The three branching monads and their Kleisli categories.
//!
//! A [`TValue`] is one branching step: a lift value (`bot` or a pure
//! element), a finite set, or a finitely supported subdistribution with
//! exact rational weights. Values are kept in canonical form so that
//! structural equality coincides with semantic equality: sets are ordered,
//! distributions never store zero weights.
//!
//! Each homset carries the order used for least fixed points: the flat order
//! for lift, inclusion for powerset and the pointwise order for
//! subdistributions, with [`TValue::bottom`] as least element.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::{Element, Error, Result};

/// Exact probability weight.
pub type Prob = BigRational;

/// Shorthand for the rational `numer/denom`.
pub fn ratio(numer: i64, denom: i64) -> Prob {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MonadTag {
    Lift,
    Powerset,
    Subdist,
}

impl MonadTag {
    pub const ALL: [MonadTag; 3] = [MonadTag::Lift, MonadTag::Powerset, MonadTag::Subdist];

    pub fn name(self) -> &'static str {
        match self {
            MonadTag::Lift => "lift",
            MonadTag::Powerset => "powerset",
            MonadTag::Subdist => "subdist",
        }
    }
}

impl fmt::Display for MonadTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MonadTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lift" => Ok(MonadTag::Lift),
            "powerset" => Ok(MonadTag::Powerset),
            "subdist" | "distribution" => Ok(MonadTag::Subdist),
            other => Err(format!("unknown monad `{other}`")),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Repr<E> {
    Lift(Option<E>),
    Set(BTreeSet<E>),
    Dist(BTreeMap<E, Prob>),
}

/// A branching value over elements of type `E`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TValue<E> {
    repr: Repr<E>,
}

fn check_tags(expected: MonadTag, found: MonadTag) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::TagMismatch { expected, found })
    }
}

impl<E: Element> TValue<E> {
    /// Trivial branching: `pure e`, `{e}` or `[e -> 1]`.
    pub fn unit(tag: MonadTag, e: E) -> Self {
        let repr = match tag {
            MonadTag::Lift => Repr::Lift(Some(e)),
            MonadTag::Powerset => Repr::Set(BTreeSet::from([e])),
            MonadTag::Subdist => Repr::Dist(BTreeMap::from([(e, Prob::one())])),
        };
        TValue { repr }
    }

    /// Least value: `bot`, the empty set, or the zero subdistribution.
    pub fn bottom(tag: MonadTag) -> Self {
        let repr = match tag {
            MonadTag::Lift => Repr::Lift(None),
            MonadTag::Powerset => Repr::Set(BTreeSet::new()),
            MonadTag::Subdist => Repr::Dist(BTreeMap::new()),
        };
        TValue { repr }
    }

    pub fn lift(value: Option<E>) -> Self {
        TValue {
            repr: Repr::Lift(value),
        }
    }

    pub fn set(elements: impl IntoIterator<Item = E>) -> Self {
        TValue {
            repr: Repr::Set(elements.into_iter().collect()),
        }
    }

    /// Builds a subdistribution. Repeated elements have their weights added;
    /// every weight must lie in `(0, 1]` and the total may not exceed 1.
    pub fn dist(entries: impl IntoIterator<Item = (E, Prob)>) -> Result<Self> {
        let mut map: BTreeMap<E, Prob> = BTreeMap::new();
        for (e, p) in entries {
            if !p.is_positive() || p > Prob::one() {
                return Err(Error::InvalidProbability(p.to_string()));
            }
            *map.entry(e).or_insert_with(Prob::zero) += p;
        }
        let value = TValue {
            repr: Repr::Dist(map),
        };
        let mass = value.mass();
        if mass > Prob::one() {
            return Err(Error::MassExceedsOne(mass.to_string()));
        }
        Ok(value)
    }

    // Entries are strictly positive and sum to at most 1 by construction at
    // every call site (products and convex combinations of valid values).
    fn dist_trusted(map: BTreeMap<E, Prob>) -> Self {
        debug_assert!(map.values().all(|p| p.is_positive()));
        TValue {
            repr: Repr::Dist(map),
        }
    }

    pub fn tag(&self) -> MonadTag {
        match self.repr {
            Repr::Lift(_) => MonadTag::Lift,
            Repr::Set(_) => MonadTag::Powerset,
            Repr::Dist(_) => MonadTag::Subdist,
        }
    }

    pub fn is_bottom(&self) -> bool {
        match &self.repr {
            Repr::Lift(v) => v.is_none(),
            Repr::Set(s) => s.is_empty(),
            Repr::Dist(d) => d.is_empty(),
        }
    }

    /// `Some(inner)` for lift values.
    pub fn as_lift(&self) -> Option<Option<&E>> {
        match &self.repr {
            Repr::Lift(v) => Some(v.as_ref()),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&BTreeSet<E>> {
        match &self.repr {
            Repr::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_dist(&self) -> Option<&BTreeMap<E, Prob>> {
        match &self.repr {
            Repr::Dist(d) => Some(d),
            _ => None,
        }
    }

    /// Elements carrying nonzero weight, in canonical order.
    pub fn support(&self) -> Box<dyn Iterator<Item = &E> + '_> {
        match &self.repr {
            Repr::Lift(v) => Box::new(v.iter()),
            Repr::Set(s) => Box::new(s.iter()),
            Repr::Dist(d) => Box::new(d.keys()),
        }
    }

    pub fn support_len(&self) -> usize {
        match &self.repr {
            Repr::Lift(v) => usize::from(v.is_some()),
            Repr::Set(s) => s.len(),
            Repr::Dist(d) => d.len(),
        }
    }

    pub fn contains(&self, e: &E) -> bool {
        match &self.repr {
            Repr::Lift(v) => v.as_ref() == Some(e),
            Repr::Set(s) => s.contains(e),
            Repr::Dist(d) => d.contains_key(e),
        }
    }

    /// Weight of `e`; lift and powerset members weigh 1.
    pub fn weight(&self, e: &E) -> Prob {
        match &self.repr {
            Repr::Dist(d) => d.get(e).cloned().unwrap_or_else(Prob::zero),
            _ if self.contains(e) => Prob::one(),
            _ => Prob::zero(),
        }
    }

    /// Total weight. Non-bottom lift values and nonempty sets count as 1.
    pub fn mass(&self) -> Prob {
        match &self.repr {
            Repr::Dist(d) => d.values().fold(Prob::zero(), |acc, p| acc + p),
            _ if self.is_bottom() => Prob::zero(),
            _ => Prob::one(),
        }
    }

    /// Functor action `T f`. Colliding images are merged (union, or summed weight).
    pub fn map<F: Element>(&self, mut f: impl FnMut(&E) -> F) -> TValue<F> {
        let repr = match &self.repr {
            Repr::Lift(v) => Repr::Lift(v.as_ref().map(f)),
            Repr::Set(s) => Repr::Set(s.iter().map(f).collect()),
            Repr::Dist(d) => {
                let mut out: BTreeMap<F, Prob> = BTreeMap::new();
                for (e, p) in d {
                    *out.entry(f(e)).or_insert_with(Prob::zero) += p;
                }
                Repr::Dist(out)
            }
        };
        TValue { repr }
    }

    /// Keeps only the elements satisfying `keep`; a dropped lift value becomes `bot`.
    pub fn restrict(&self, mut keep: impl FnMut(&E) -> bool) -> Self {
        let repr = match &self.repr {
            Repr::Lift(v) => Repr::Lift(v.clone().filter(|e| keep(e))),
            Repr::Set(s) => Repr::Set(s.iter().filter(|e| keep(e)).cloned().collect()),
            Repr::Dist(d) => Repr::Dist(
                d.iter()
                    .filter(|(e, _)| keep(e))
                    .map(|(e, p)| (e.clone(), p.clone()))
                    .collect(),
            ),
        };
        TValue { repr }
    }

    /// Kleisli extension: apply `f` to every branch and flatten.
    pub fn bind<F: Element>(&self, mut f: impl FnMut(&E) -> Result<TValue<F>>) -> Result<TValue<F>> {
        let tag = self.tag();
        match &self.repr {
            Repr::Lift(None) => Ok(TValue::bottom(tag)),
            Repr::Lift(Some(e)) => {
                let inner = f(e)?;
                check_tags(tag, inner.tag())?;
                Ok(inner)
            }
            Repr::Set(s) => {
                let mut out = BTreeSet::new();
                for e in s {
                    let inner = f(e)?;
                    check_tags(tag, inner.tag())?;
                    if let Repr::Set(inner) = inner.repr {
                        out.extend(inner);
                    }
                }
                Ok(TValue { repr: Repr::Set(out) })
            }
            Repr::Dist(d) => {
                let mut out: BTreeMap<F, Prob> = BTreeMap::new();
                for (e, p) in d {
                    let inner = f(e)?;
                    check_tags(tag, inner.tag())?;
                    if let Repr::Dist(inner) = inner.repr {
                        for (k, q) in inner {
                            *out.entry(k).or_insert_with(Prob::zero) += p * q;
                        }
                    }
                }
                Ok(TValue::dist_trusted(out))
            }
        }
    }

    /// Flat order for lift, inclusion for sets, pointwise order for distributions.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        check_tags(self.tag(), other.tag())?;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Lift(None), Repr::Lift(_)) => true,
            (Repr::Lift(Some(a)), Repr::Lift(b)) => b.as_ref() == Some(a),
            (Repr::Set(a), Repr::Set(b)) => a.is_subset(b),
            (Repr::Dist(a), Repr::Dist(b)) => a
                .iter()
                .all(|(e, p)| b.get(e).is_some_and(|q| p <= q)),
            _ => unreachable!("tags checked"),
        })
    }

    /// Least upper bound of two values. Sets always have one; lift values and
    /// distributions are joined only when comparable.
    pub fn join(&self, other: &Self) -> Result<Self> {
        check_tags(self.tag(), other.tag())?;
        if let (Repr::Set(a), Repr::Set(b)) = (&self.repr, &other.repr) {
            return Ok(TValue {
                repr: Repr::Set(a.union(b).cloned().collect()),
            });
        }
        if self.leq(other)? {
            Ok(other.clone())
        } else if other.leq(self)? {
            Ok(self.clone())
        } else {
            Err(Error::IncomparableJoin)
        }
    }

    /// Renders with a caller-supplied element printer.
    pub fn render_with(&self, mut element: impl FnMut(&E) -> String) -> String {
        match &self.repr {
            Repr::Lift(None) => "bot".to_string(),
            Repr::Lift(Some(e)) => element(e),
            Repr::Set(s) => {
                let items: Vec<String> = s.iter().map(element).collect();
                format!("{{{}}}", items.join(", "))
            }
            Repr::Dist(d) => {
                let items: Vec<String> = d
                    .iter()
                    .map(|(e, p)| format!("{} -> {}", element(e), p))
                    .collect();
                format!("[{}]", items.join(", "))
            }
        }
    }
}

impl<E: Element> TValue<TValue<E>> {
    /// Flattening `T T E -> T E`.
    pub fn flatten(&self) -> Result<TValue<E>> {
        self.bind(|inner| Ok(inner.clone()))
    }
}

impl<E: Element + fmt::Display> fmt::Display for TValue<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(|e| e.to_string()))
    }
}

impl<E: Element> fmt::Debug for TValue<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(|e| format!("{e:?}")))
    }
}

pub fn unit<E: Element>(tag: MonadTag, e: E) -> TValue<E> {
    TValue::unit(tag, e)
}

pub fn bottom<E: Element>(tag: MonadTag) -> TValue<E> {
    TValue::bottom(tag)
}

/// Multiplication `mu`; `tag` must agree with the outer and every inner value.
pub fn mult<E: Element>(tag: MonadTag, outer: &TValue<TValue<E>>) -> Result<TValue<E>> {
    check_tags(tag, outer.tag())?;
    outer.flatten()
}

/// Double strength `T A x T B -> T (A x B)`.
pub fn dst<A: Element, B: Element>(
    tag: MonadTag,
    u: &TValue<A>,
    v: &TValue<B>,
) -> Result<TValue<(A, B)>> {
    check_tags(tag, u.tag())?;
    check_tags(tag, v.tag())?;
    let repr = match (&u.repr, &v.repr) {
        (Repr::Lift(Some(a)), Repr::Lift(Some(b))) => Repr::Lift(Some((a.clone(), b.clone()))),
        (Repr::Lift(_), Repr::Lift(_)) => Repr::Lift(None),
        (Repr::Set(a), Repr::Set(b)) => Repr::Set(
            a.iter()
                .flat_map(|x| b.iter().map(move |y| (x.clone(), y.clone())))
                .collect(),
        ),
        (Repr::Dist(a), Repr::Dist(b)) => Repr::Dist(
            a.iter()
                .flat_map(|(x, p)| b.iter().map(move |(y, q)| ((x.clone(), y.clone()), p * q)))
                .collect(),
        ),
        _ => unreachable!("tags checked"),
    };
    Ok(TValue { repr })
}

pub fn leq<E: Element>(u: &TValue<E>, v: &TValue<E>) -> Result<bool> {
    u.leq(v)
}

/// An arrow `X -> Y` of the Kleisli category: a total map `X -> T Y`
/// between explicit finite sets.
#[derive(Clone, PartialEq, Eq)]
pub struct KleisliMap<X: Ord, Y: Ord> {
    tag: MonadTag,
    domain: BTreeSet<X>,
    codomain: BTreeSet<Y>,
    mapping: BTreeMap<X, TValue<Y>>,
}

impl<X: Element, Y: Element> KleisliMap<X, Y> {
    pub fn new(
        tag: MonadTag,
        domain: BTreeSet<X>,
        codomain: BTreeSet<Y>,
        mapping: BTreeMap<X, TValue<Y>>,
    ) -> Result<Self> {
        if mapping.len() != domain.len() || !mapping.keys().all(|x| domain.contains(x)) {
            return Err(Error::DomainMismatch(
                "mapping must be defined exactly on the domain".into(),
            ));
        }
        for value in mapping.values() {
            check_tags(tag, value.tag())?;
            if let Some(y) = value.support().find(|y| !codomain.contains(y)) {
                return Err(Error::DomainMismatch(format!("{y:?} is outside the codomain")));
            }
        }
        Ok(KleisliMap {
            tag,
            domain,
            codomain,
            mapping,
        })
    }

    pub fn from_fn(
        tag: MonadTag,
        domain: BTreeSet<X>,
        codomain: BTreeSet<Y>,
        mut f: impl FnMut(&X) -> TValue<Y>,
    ) -> Result<Self> {
        let mapping = domain.iter().map(|x| (x.clone(), f(x))).collect();
        Self::new(tag, domain, codomain, mapping)
    }

    /// The arrow `eta . f` for a plain function `f`.
    pub fn embed_pure(
        tag: MonadTag,
        domain: BTreeSet<X>,
        codomain: BTreeSet<Y>,
        f: impl Fn(&X) -> Y,
    ) -> Result<Self> {
        Self::from_fn(tag, domain, codomain, |x| TValue::unit(tag, f(x)))
    }

    pub fn bottom(tag: MonadTag, domain: BTreeSet<X>, codomain: BTreeSet<Y>) -> Self {
        let mapping = domain.iter().map(|x| (x.clone(), TValue::bottom(tag))).collect();
        KleisliMap {
            tag,
            domain,
            codomain,
            mapping,
        }
    }

    pub fn tag(&self) -> MonadTag {
        self.tag
    }

    pub fn domain(&self) -> &BTreeSet<X> {
        &self.domain
    }

    pub fn codomain(&self) -> &BTreeSet<Y> {
        &self.codomain
    }

    pub fn apply(&self, x: &X) -> Option<&TValue<Y>> {
        self.mapping.get(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&X, &TValue<Y>)> {
        self.mapping.iter()
    }

    /// `g . self`: first `self`, then `g`, then flatten.
    pub fn then<Z: Element>(&self, g: &KleisliMap<Y, Z>) -> Result<KleisliMap<X, Z>> {
        kleisli_compose(self, g)
    }

    /// Pointwise order on the homset.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::DomainMismatch("maps live in different homsets".into()));
        }
        for (x, v) in &self.mapping {
            if !v.leq(&other.mapping[x])? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl<X: Element> KleisliMap<X, X> {
    pub fn identity(tag: MonadTag, carrier: BTreeSet<X>) -> Self {
        let mapping = carrier
            .iter()
            .map(|x| (x.clone(), TValue::unit(tag, x.clone())))
            .collect();
        KleisliMap {
            tag,
            domain: carrier.clone(),
            codomain: carrier,
            mapping,
        }
    }
}

impl<X: Element, Y: Element> fmt::Debug for KleisliMap<X, Y> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.mapping.iter()).finish()
    }
}

pub fn embed_pure<X: Element, Y: Element>(
    tag: MonadTag,
    domain: BTreeSet<X>,
    codomain: BTreeSet<Y>,
    f: impl Fn(&X) -> Y,
) -> Result<KleisliMap<X, Y>> {
    KleisliMap::embed_pure(tag, domain, codomain, f)
}

/// `g . f` in the Kleisli category, i.e. `mu . T g . f` pointwise.
pub fn kleisli_compose<X: Element, Y: Element, Z: Element>(
    f: &KleisliMap<X, Y>,
    g: &KleisliMap<Y, Z>,
) -> Result<KleisliMap<X, Z>> {
    check_tags(f.tag, g.tag)?;
    if f.codomain != g.domain {
        return Err(Error::DomainMismatch(
            "codomain of the first arrow differs from the domain of the second".into(),
        ));
    }
    let mut mapping = BTreeMap::new();
    for (x, fx) in &f.mapping {
        mapping.insert(x.clone(), fx.bind(|y| Ok(g.mapping[y].clone()))?);
    }
    Ok(KleisliMap {
        tag: f.tag,
        domain: f.domain.clone(),
        codomain: g.codomain.clone(),
        mapping,
    })
}
