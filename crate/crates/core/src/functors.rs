//! Shapely transition functors, their structures and initial-algebra terms.
//!
//! A [`FunctorExpr`] is built from the identity, finite constant sets,
//! binary products, finite labelled coproducts and the list functor (the
//! countable coproduct of all finite powers). An [`FStruct`] is one element
//! of `F X`; a [`Term`] is a well-founded tree in the initial algebra,
//! i.e. an `FStruct` whose variable positions hold terms again.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::{Error, Result};

/// Interned constant symbol or coproduct label.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The single symbol of the constant functor `1`.
pub const UNIT_SYMBOL: &str = "*";

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum FunctorExpr {
    Identity,
    Const(BTreeSet<Symbol>),
    Prod(Box<FunctorExpr>, Box<FunctorExpr>),
    Coprod(Vec<(Symbol, FunctorExpr)>),
    List(Box<FunctorExpr>),
}

impl FunctorExpr {
    pub fn constant<'a>(symbols: impl IntoIterator<Item = &'a str>) -> Self {
        FunctorExpr::Const(symbols.into_iter().map(Symbol::new).collect())
    }

    /// The terminal functor `1`.
    pub fn one() -> Self {
        Self::constant([UNIT_SYMBOL])
    }

    pub fn prod(left: FunctorExpr, right: FunctorExpr) -> Self {
        FunctorExpr::Prod(Box::new(left), Box::new(right))
    }

    pub fn coprod<'a>(summands: impl IntoIterator<Item = (&'a str, FunctorExpr)>) -> Self {
        FunctorExpr::Coprod(
            summands
                .into_iter()
                .map(|(l, f)| (Symbol::new(l), f))
                .collect(),
        )
    }

    pub fn list(inner: FunctorExpr) -> Self {
        FunctorExpr::List(Box::new(inner))
    }

    /// `1 + Sigma x X`: labelled transition systems with termination.
    pub fn lts<'a>(alphabet: impl IntoIterator<Item = &'a str>) -> Self {
        Self::coprod([
            ("inl", Self::one()),
            (
                "inr",
                Self::prod(Self::constant(alphabet), FunctorExpr::Identity),
            ),
        ])
    }

    /// `(Sigma + X)*`: context-free grammars.
    pub fn cfg<'a>(terminals: impl IntoIterator<Item = &'a str>) -> Self {
        Self::list(Self::coprod([
            ("inl", Self::constant(terminals)),
            ("inr", FunctorExpr::Identity),
        ]))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FunctorExpr::Identity => Ok(()),
            FunctorExpr::Const(s) if s.is_empty() => {
                Err(Error::InvalidFunctor("constant with an empty symbol set".into()))
            }
            FunctorExpr::Const(_) => Ok(()),
            FunctorExpr::Prod(a, b) => {
                a.validate()?;
                b.validate()
            }
            FunctorExpr::Coprod(summands) => {
                if summands.is_empty() {
                    return Err(Error::InvalidFunctor("empty coproduct".into()));
                }
                let labels: BTreeSet<_> = summands.iter().map(|(l, _)| l).collect();
                if labels.len() != summands.len() {
                    return Err(Error::InvalidFunctor("duplicate coproduct label".into()));
                }
                summands.iter().try_for_each(|(_, f)| f.validate())
            }
            FunctorExpr::List(inner) => inner.validate(),
        }
    }

    /// Every constant symbol occurring in the expression.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            FunctorExpr::Identity => {}
            FunctorExpr::Const(s) => out.extend(s.iter().cloned()),
            FunctorExpr::Prod(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            FunctorExpr::Coprod(s) => s.iter().for_each(|(_, f)| f.collect_symbols(out)),
            FunctorExpr::List(inner) => inner.collect_symbols(out),
        }
    }

    /// Expression text; `name_of` may abbreviate a constant set by a name.
    pub fn render(&self, name_of: &dyn Fn(&BTreeSet<Symbol>) -> Option<String>) -> String {
        match self {
            FunctorExpr::Identity => "X".into(),
            FunctorExpr::Const(s) => {
                if let Some(name) = name_of(s) {
                    name
                } else if s.len() == 1 && s.iter().next().unwrap().as_str() == UNIT_SYMBOL {
                    "1".into()
                } else {
                    let items: Vec<&str> = s.iter().map(Symbol::as_str).collect();
                    format!("{{{}}}", items.join(", "))
                }
            }
            FunctorExpr::Prod(a, b) => {
                let left = match **a {
                    FunctorExpr::Coprod(_) => format!("({})", a.render(name_of)),
                    _ => a.render(name_of),
                };
                let right = match **b {
                    FunctorExpr::Coprod(_) | FunctorExpr::Prod(..) => {
                        format!("({})", b.render(name_of))
                    }
                    _ => b.render(name_of),
                };
                format!("{left} * {right}")
            }
            FunctorExpr::Coprod(s) => {
                let parts: Vec<String> = s
                    .iter()
                    .map(|(_, f)| match f {
                        FunctorExpr::Coprod(_) => format!("({})", f.render(name_of)),
                        _ => f.render(name_of),
                    })
                    .collect();
                parts.join(" + ")
            }
            FunctorExpr::List(inner) => format!("list({})", inner.render(name_of)),
        }
    }
}

impl fmt::Display for FunctorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|_| None))
    }
}

/// One element of `F X`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FStruct<X> {
    Var(X),
    Sym(Symbol),
    Pair(Box<FStruct<X>>, Box<FStruct<X>>),
    Inj(Symbol, Box<FStruct<X>>),
    Seq(Vec<FStruct<X>>),
}

impl<X> FStruct<X> {
    /// Number of `Sym` and `Var` positions.
    pub fn positions(&self) -> usize {
        match self {
            FStruct::Var(_) | FStruct::Sym(_) => 1,
            FStruct::Pair(a, b) => a.positions() + b.positions(),
            FStruct::Inj(_, s) => s.positions(),
            FStruct::Seq(items) => items.iter().map(|s| s.positions()).sum(),
        }
    }

    pub fn pair(a: FStruct<X>, b: FStruct<X>) -> Self {
        FStruct::Pair(Box::new(a), Box::new(b))
    }

    pub fn inj(label: &Symbol, inner: FStruct<X>) -> Self {
        FStruct::Inj(label.clone(), Box::new(inner))
    }

    pub fn sym(s: &str) -> Self {
        FStruct::Sym(Symbol::new(s))
    }

    /// Applies `f` at every variable position.
    pub fn fmap<Y>(&self, f: &mut impl FnMut(&X) -> Y) -> FStruct<Y> {
        match self {
            FStruct::Var(x) => FStruct::Var(f(x)),
            FStruct::Sym(s) => FStruct::Sym(s.clone()),
            FStruct::Pair(a, b) => FStruct::pair(a.fmap(f), b.fmap(f)),
            FStruct::Inj(l, s) => FStruct::Inj(l.clone(), Box::new(s.fmap(f))),
            FStruct::Seq(items) => FStruct::Seq(items.iter().map(|s| s.fmap(f)).collect()),
        }
    }

    pub fn try_fmap<Y, E>(&self, f: &mut impl FnMut(&X) -> Result<Y, E>) -> Result<FStruct<Y>, E> {
        Ok(match self {
            FStruct::Var(x) => FStruct::Var(f(x)?),
            FStruct::Sym(s) => FStruct::Sym(s.clone()),
            FStruct::Pair(a, b) => FStruct::pair(a.try_fmap(f)?, b.try_fmap(f)?),
            FStruct::Inj(l, s) => FStruct::Inj(l.clone(), Box::new(s.try_fmap(f)?)),
            FStruct::Seq(items) => FStruct::Seq(
                items
                    .iter()
                    .map(|s| s.try_fmap(f))
                    .collect::<Result<_, E>>()?,
            ),
        })
    }

    pub fn leaves(&self) -> Vec<&X> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a X>) {
        match self {
            FStruct::Var(x) => out.push(x),
            FStruct::Sym(_) => {}
            FStruct::Pair(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            FStruct::Inj(_, s) => s.collect_leaves(out),
            FStruct::Seq(items) => items.iter().for_each(|s| s.collect_leaves(out)),
        }
    }

    /// Longest list occurring in the structure (0 when there are none).
    pub fn list_width(&self) -> usize {
        match self {
            FStruct::Var(_) | FStruct::Sym(_) => 0,
            FStruct::Pair(a, b) => a.list_width().max(b.list_width()),
            FStruct::Inj(_, s) => s.list_width(),
            FStruct::Seq(items) => items
                .iter()
                .map(FStruct::list_width)
                .max()
                .unwrap_or(0)
                .max(items.len()),
        }
    }

    pub fn matches(&self, functor: &FunctorExpr) -> bool {
        self.check_shape(functor).is_ok()
    }

    pub fn check_shape(&self, functor: &FunctorExpr) -> Result<()> {
        let mismatch = |detail: &str| Error::ShapeMismatch {
            functor: functor.to_string(),
            detail: detail.to_string(),
        };
        match (functor, self) {
            (FunctorExpr::Identity, FStruct::Var(_)) => Ok(()),
            (FunctorExpr::Const(symbols), FStruct::Sym(s)) => {
                if symbols.contains(s) {
                    Ok(())
                } else {
                    Err(mismatch(&format!("symbol `{s}` is not in the constant set")))
                }
            }
            (FunctorExpr::Prod(fa, fb), FStruct::Pair(a, b)) => {
                a.check_shape(fa)?;
                b.check_shape(fb)
            }
            (FunctorExpr::Coprod(summands), FStruct::Inj(label, inner)) => {
                match summands.iter().find(|(l, _)| l == label) {
                    Some((_, f)) => inner.check_shape(f),
                    None => Err(mismatch(&format!("unknown injection `{label}`"))),
                }
            }
            (FunctorExpr::List(f), FStruct::Seq(items)) => {
                items.iter().try_for_each(|s| s.check_shape(f))
            }
            _ => Err(mismatch("constructor does not fit the expression")),
        }
    }
}

impl<X: fmt::Display> fmt::Display for FStruct<X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FStruct::Var(x) => write!(f, "{x}"),
            FStruct::Sym(s) => write!(f, "{s}"),
            FStruct::Pair(a, b) => write!(f, "({a}, {b})"),
            FStruct::Inj(l, s) => write!(f, "{l}:{s}"),
            FStruct::Seq(items) => {
                f.write_str("[")?;
                for (i, s) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Functor action on a single element, after checking its shape.
pub fn fmap_element<X, Y>(
    functor: &FunctorExpr,
    f: &mut impl FnMut(&X) -> Y,
    s: &FStruct<X>,
) -> Result<FStruct<Y>> {
    s.check_shape(functor)?;
    Ok(s.fmap(f))
}

struct TermNode {
    height: usize,
    weight: usize,
    body: FStruct<Term>,
}

/// An element of the initial algebra: a finite tree of `F`-structures.
///
/// Terms are ordered by height, then by the number of symbol and subterm
/// positions, then structurally. Sets of words come out
/// length-then-lexicographic.
#[derive(Clone)]
pub struct Term(Arc<TermNode>);

impl Term {
    /// `alpha` without the shape check; the caller guarantees `body` fits `F`.
    pub fn fold_unchecked(body: FStruct<Term>) -> Term {
        let leaves = body.leaves();
        let height = 1 + leaves.iter().map(|t| t.height()).max().unwrap_or(0);
        let weight = body.positions() + leaves.iter().map(|t| t.0.weight).sum::<usize>();
        Term(Arc::new(TermNode {
            height,
            weight,
            body,
        }))
    }

    /// Height of the constructor tree; `F^n 0` holds exactly the terms of height `<= n`.
    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn body(&self) -> &FStruct<Term> {
        &self.0.body
    }

    /// Widest list anywhere in the tree.
    pub fn list_width(&self) -> usize {
        let own = self.body().list_width();
        self.body()
            .leaves()
            .iter()
            .map(|t| t.list_width())
            .max()
            .unwrap_or(0)
            .max(own)
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.height == other.0.height && self.0.body == other.0.body)
    }
}

impl Eq for Term {}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0
            .height
            .cmp(&other.0.height)
            .then_with(|| self.0.weight.cmp(&other.0.weight))
            .then_with(|| self.0.body.cmp(&other.0.body))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.body.hash(state);
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.body)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.body)
    }
}

/// The initial algebra structure `alpha: F A -> A`.
pub fn alpha_fold(functor: &FunctorExpr, s: FStruct<Term>) -> Result<Term> {
    s.check_shape(functor)?;
    Ok(Term::fold_unchecked(s))
}

/// The inverse `alpha^-1: A -> F A`.
pub fn alpha_unfold(t: &Term) -> FStruct<Term> {
    t.body().clone()
}

/// Every structure of shape `functor` over `carrier`, with lists of length
/// at most `list_cap`.
pub fn enumerate_structs<X: Clone>(
    functor: &FunctorExpr,
    carrier: &[X],
    list_cap: usize,
) -> Vec<FStruct<X>> {
    match functor {
        FunctorExpr::Identity => carrier.iter().cloned().map(FStruct::Var).collect(),
        FunctorExpr::Const(symbols) => symbols.iter().cloned().map(FStruct::Sym).collect(),
        FunctorExpr::Prod(fa, fb) => {
            let left = enumerate_structs(fa, carrier, list_cap);
            let right = enumerate_structs(fb, carrier, list_cap);
            let mut out = Vec::with_capacity(left.len() * right.len());
            for a in &left {
                for b in &right {
                    out.push(FStruct::pair(a.clone(), b.clone()));
                }
            }
            out
        }
        FunctorExpr::Coprod(summands) => summands
            .iter()
            .flat_map(|(l, f)| {
                enumerate_structs(f, carrier, list_cap)
                    .into_iter()
                    .map(move |s| FStruct::inj(l, s))
            })
            .collect(),
        FunctorExpr::List(f) => {
            let items = enumerate_structs(f, carrier, list_cap);
            let mut layer: Vec<Vec<FStruct<X>>> = vec![Vec::new()];
            let mut out = vec![FStruct::Seq(Vec::new())];
            for _ in 0..list_cap {
                let mut next = Vec::with_capacity(layer.len() * items.len());
                for prefix in &layer {
                    for item in &items {
                        let mut seq = prefix.clone();
                        seq.push(item.clone());
                        next.push(seq);
                    }
                }
                out.extend(next.iter().cloned().map(FStruct::Seq));
                layer = next;
                if layer.is_empty() {
                    break;
                }
            }
            out
        }
    }
}

/// The level `F^depth 0` of the initial sequence, i.e. all terms of height
/// `<= depth`, with list nodes limited to `list_cap` entries.
pub fn enumerate_terms(functor: &FunctorExpr, depth: usize, list_cap: usize) -> BTreeSet<Term> {
    let mut level: BTreeSet<Term> = BTreeSet::new();
    for _ in 0..depth {
        let carrier: Vec<Term> = level.iter().cloned().collect();
        level = enumerate_structs(functor, &carrier, list_cap)
            .into_iter()
            .map(Term::fold_unchecked)
            .collect();
    }
    level
}

/// Recognizer and helpers for `1 + Sigma x X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LtsShape {
    stop_label: Symbol,
    step_label: Symbol,
    tick: Symbol,
    alphabet: BTreeSet<Symbol>,
}

/// One branch of an LTS-shaped structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LtsStep<'a, X> {
    Stop,
    Step(&'a Symbol, &'a X),
}

impl LtsShape {
    pub fn of(functor: &FunctorExpr) -> Option<LtsShape> {
        let FunctorExpr::Coprod(summands) = functor else {
            return None;
        };
        let [(stop_label, FunctorExpr::Const(ticks)), (step_label, FunctorExpr::Prod(a, b))] =
            summands.as_slice()
        else {
            return None;
        };
        let (FunctorExpr::Const(alphabet), FunctorExpr::Identity) = (&**a, &**b) else {
            return None;
        };
        if ticks.len() != 1 {
            return None;
        }
        Some(LtsShape {
            stop_label: stop_label.clone(),
            step_label: step_label.clone(),
            tick: ticks.iter().next().unwrap().clone(),
            alphabet: alphabet.clone(),
        })
    }

    pub fn alphabet(&self) -> &BTreeSet<Symbol> {
        &self.alphabet
    }

    pub fn stop<X>(&self) -> FStruct<X> {
        FStruct::inj(&self.stop_label, FStruct::Sym(self.tick.clone()))
    }

    pub fn step<X>(&self, letter: &Symbol, next: X) -> FStruct<X> {
        FStruct::inj(
            &self.step_label,
            FStruct::pair(FStruct::Sym(letter.clone()), FStruct::Var(next)),
        )
    }

    pub fn view<'a, X>(&self, s: &'a FStruct<X>) -> Option<LtsStep<'a, X>> {
        let FStruct::Inj(label, inner) = s else {
            return None;
        };
        if *label == self.stop_label {
            return Some(LtsStep::Stop);
        }
        match &**inner {
            FStruct::Pair(a, x) if *label == self.step_label => match (&**a, &**x) {
                (FStruct::Sym(letter), FStruct::Var(next)) => Some(LtsStep::Step(letter, next)),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn word_term(&self, letters: &[Symbol]) -> Term {
        let mut t = Term::fold_unchecked(self.stop());
        for letter in letters.iter().rev() {
            t = Term::fold_unchecked(self.step(letter, t));
        }
        t
    }

    pub fn term_word(&self, t: &Term) -> Option<Vec<Symbol>> {
        let mut word = Vec::new();
        let mut cur = t;
        loop {
            match self.view(cur.body())? {
                LtsStep::Stop => return Some(word),
                LtsStep::Step(a, next) => {
                    word.push(a.clone());
                    cur = next;
                }
            }
        }
    }
}

/// Recognizer and helpers for `(Sigma + X)*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfgShape {
    terminal_label: Symbol,
    child_label: Symbol,
    terminals: BTreeSet<Symbol>,
}

/// One item of a right-hand side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RhsItem<X> {
    Terminal(Symbol),
    Child(X),
}

impl CfgShape {
    pub fn of(functor: &FunctorExpr) -> Option<CfgShape> {
        let FunctorExpr::List(inner) = functor else {
            return None;
        };
        let FunctorExpr::Coprod(summands) = &**inner else {
            return None;
        };
        let [(terminal_label, FunctorExpr::Const(terminals)), (child_label, FunctorExpr::Identity)] =
            summands.as_slice()
        else {
            return None;
        };
        Some(CfgShape {
            terminal_label: terminal_label.clone(),
            child_label: child_label.clone(),
            terminals: terminals.clone(),
        })
    }

    pub fn terminals(&self) -> &BTreeSet<Symbol> {
        &self.terminals
    }

    pub fn rhs<X>(&self, items: Vec<RhsItem<X>>) -> FStruct<X> {
        FStruct::Seq(
            items
                .into_iter()
                .map(|item| match item {
                    RhsItem::Terminal(s) => FStruct::inj(&self.terminal_label, FStruct::Sym(s)),
                    RhsItem::Child(x) => FStruct::inj(&self.child_label, FStruct::Var(x)),
                })
                .collect(),
        )
    }

    pub fn view<'a, X>(&self, s: &'a FStruct<X>) -> Option<Vec<RhsItem<&'a X>>> {
        let FStruct::Seq(items) = s else {
            return None;
        };
        items
            .iter()
            .map(|item| match item {
                FStruct::Inj(l, inner) => match &**inner {
                    FStruct::Sym(t) if *l == self.terminal_label => {
                        Some(RhsItem::Terminal(t.clone()))
                    }
                    FStruct::Var(x) if *l == self.child_label => Some(RhsItem::Child(x)),
                    _ => None,
                },
                _ => None,
            })
            .collect()
    }
}

/// How terms of a given functor are printed.
#[derive(Clone, Debug)]
pub enum TermStyle {
    /// `eps`, `a`, `a.b`
    Word(LtsShape),
    /// `[0]`, `[s [0]]`
    Tree(CfgShape),
    Generic,
}

impl TermStyle {
    pub fn for_functor(functor: &FunctorExpr) -> TermStyle {
        if let Some(lts) = LtsShape::of(functor) {
            TermStyle::Word(lts)
        } else if let Some(cfg) = CfgShape::of(functor) {
            TermStyle::Tree(cfg)
        } else {
            TermStyle::Generic
        }
    }

    pub fn render(&self, t: &Term) -> String {
        match self {
            TermStyle::Word(lts) => match lts.term_word(t) {
                Some(word) if word.is_empty() => "eps".into(),
                Some(word) => word
                    .iter()
                    .map(Symbol::as_str)
                    .collect::<Vec<_>>()
                    .join("."),
                None => t.to_string(),
            },
            TermStyle::Tree(cfg) => match cfg.view(t.body()) {
                Some(items) => {
                    let parts: Vec<String> = items
                        .into_iter()
                        .map(|item| match item {
                            RhsItem::Terminal(s) => s.to_string(),
                            RhsItem::Child(child) => self.render(child),
                        })
                        .collect();
                    format!("[{}]", parts.join(" "))
                }
                None => t.to_string(),
            },
            TermStyle::Generic => t.to_string(),
        }
    }
}
