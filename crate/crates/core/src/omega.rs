//! Possibly infinite traces of nondeterministic transition systems.
//!
//! Infinite traces are handled symbolically: finite words plus ultimately
//! periodic words `u.(v)^w`. Membership in the maximal solution of
//!
//! ```text
//! eps   in tr(x)  iff  x -> tick
//! a.s   in tr(x)  iff  x -a-> x' and s in tr(x') for some x'
//! ```
//!
//! is decided by reading `u` and then looking for an infinite path in the
//! product of the system with the cycle of `v`. Candidate solutions can be
//! checked against both directions of these clauses on a bounded universe.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::functors::Symbol;
use crate::monads::MonadTag;
use crate::system::{LtsView, StateId, System};
use crate::{Error, Result};

pub type Word = Vec<Symbol>;

/// `u.(v)^w`, kept canonical: `v` is primitive and `u` is as short as possible.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UPWord {
    prefix: Word,
    period: Word,
}

fn primitive_root(v: &[Symbol]) -> &[Symbol] {
    let n = v.len();
    for d in 1..n {
        if n.is_multiple_of(d) && (d..n).all(|i| v[i] == v[i - d]) {
            return &v[..d];
        }
    }
    v
}

impl UPWord {
    pub fn new(prefix: Word, period: Word) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidWord("empty period".into()));
        }
        let mut prefix = prefix;
        let mut period = primitive_root(&period).to_vec();
        while !prefix.is_empty() && prefix.last() == period.last() {
            prefix.pop();
            period.rotate_right(1);
        }
        Ok(UPWord { prefix, period })
    }

    pub fn prefix(&self) -> &[Symbol] {
        &self.prefix
    }

    pub fn period(&self) -> &[Symbol] {
        &self.period
    }

    /// `|u| + |v|` of the canonical form.
    pub fn size(&self) -> usize {
        self.prefix.len() + self.period.len()
    }

    pub fn head(&self) -> &Symbol {
        self.prefix.first().unwrap_or(&self.period[0])
    }

    /// The word without its first letter.
    pub fn tail(&self) -> UPWord {
        if self.prefix.is_empty() {
            let mut period = self.period.clone();
            period.rotate_left(1);
            UPWord {
                prefix: Vec::new(),
                period,
            }
        } else {
            UPWord::new(self.prefix[1..].to_vec(), self.period.clone()).unwrap()
        }
    }

    /// The distinct suffixes reached by repeatedly taking tails, self included.
    pub fn orbit(&self) -> BTreeSet<UPWord> {
        let mut out = BTreeSet::new();
        let mut cur = self.clone();
        while out.insert(cur.clone()) {
            cur = cur.tail();
        }
        out
    }
}

fn render_word(w: &[Symbol]) -> String {
    if w.is_empty() {
        return "eps".to_string();
    }
    w.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(".")
}

impl fmt::Display for UPWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.prefix.is_empty() {
            write!(f, "{}.", render_word(&self.prefix))?;
        }
        write!(f, "({})^w", render_word(&self.period))
    }
}

impl fmt::Debug for UPWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite or ultimately periodic word.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AnyWord {
    Finite(Word),
    Periodic(UPWord),
}

impl fmt::Display for AnyWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyWord::Finite(w) => f.write_str(&render_word(w)),
            AnyWord::Periodic(w) => write!(f, "{w}"),
        }
    }
}

fn parse_letters(text: &str) -> Result<Word> {
    let text = text.trim();
    if text.is_empty() || text == "eps" {
        return Ok(Vec::new());
    }
    text.split('.')
        .map(|part| {
            let part = part.trim();
            if part.is_empty() || part.contains(|c: char| c.is_whitespace() || "()^".contains(c)) {
                Err(Error::InvalidWord(format!("bad letter `{part}` in `{text}`")))
            } else {
                Ok(Symbol::new(part))
            }
        })
        .collect()
}

/// Parses `a.b`, `eps`, `a.(b)^w` or `(a.b)^w`.
impl FromStr for AnyWord {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let Some(open) = text.find('(') else {
            return parse_letters(text).map(AnyWord::Finite);
        };
        let rest = &text[open + 1..];
        let close = rest
            .find(")^w")
            .ok_or_else(|| Error::InvalidWord(format!("expected `(v)^w` in `{text}`")))?;
        if !rest[close + 3..].trim().is_empty() {
            return Err(Error::InvalidWord(format!("trailing input after `^w` in `{text}`")));
        }
        let head = &text[..open];
        let prefix = if head.is_empty() {
            Vec::new()
        } else {
            let head = head
                .strip_suffix('.')
                .ok_or_else(|| Error::InvalidWord(format!("expected `.` before `(` in `{text}`")))?;
            parse_letters(head)?
        };
        let period = parse_letters(&rest[..close])?;
        UPWord::new(prefix, period).map(AnyWord::Periodic)
    }
}

impl FromStr for UPWord {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text.parse()? {
            AnyWord::Periodic(w) => Ok(w),
            AnyWord::Finite(_) => Err(Error::InvalidWord(format!("`{text}` is not periodic"))),
        }
    }
}

fn nd_view(sys: &System, x: StateId) -> Result<LtsView> {
    if sys.tag() != MonadTag::Powerset {
        return Err(Error::Unsupported(format!(
            "infinite traces need a powerset system, got {}",
            sys.tag()
        )));
    }
    if x.0 >= sys.len() {
        return Err(Error::UnknownState(x.to_string()));
    }
    sys.lts_view()
}

fn read(view: &LtsView, from: BTreeSet<StateId>, w: &[Symbol]) -> BTreeSet<StateId> {
    w.iter().fold(from, |cur, a| {
        cur.iter().flat_map(|q| view.successors(*q, a)).collect()
    })
}

/// Whether `x` has a run reading `w` and then terminating.
pub fn accepts_finite(sys: &System, x: StateId, w: &[Symbol]) -> Result<bool> {
    let view = nd_view(sys, x)?;
    Ok(read(&view, BTreeSet::from([x]), w)
        .into_iter()
        .any(|q| view.terminates(q)))
}

/// Whether `x` has an infinite run reading `u.(v)^w`.
pub fn accepts_up_word(sys: &System, x: StateId, w: &UPWord) -> Result<bool> {
    let view = nd_view(sys, x)?;
    let start = read(&view, BTreeSet::from([x]), w.prefix());
    let n = w.period().len();
    // product nodes (q, i): in state q, about to read period[i]
    let node = |q: StateId, i: usize| q.0 * n + i;
    let succ: Vec<Vec<usize>> = (0..sys.len() * n)
        .map(|k| {
            let (q, i) = (StateId(k / n), k % n);
            view.successors(q, &w.period()[i])
                .map(|r| node(r, (i + 1) % n))
                .collect()
        })
        .collect();
    // greatest set of nodes that each have a successor inside the set
    let mut live = vec![true; succ.len()];
    loop {
        let mut changed = false;
        for k in 0..succ.len() {
            if live[k] && !succ[k].iter().any(|j| live[*j]) {
                live[k] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(start.into_iter().any(|q| live[node(q, 0)]))
}

pub fn accepts(sys: &System, x: StateId, w: &AnyWord) -> Result<bool> {
    match w {
        AnyWord::Finite(w) => accepts_finite(sys, x, w),
        AnyWord::Periodic(w) => accepts_up_word(sys, x, w),
    }
}

/// A finitely presented set of words: finite words plus periodic words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WordSet {
    pub finite: BTreeSet<Word>,
    pub periodic: BTreeSet<UPWord>,
}

impl WordSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, w: AnyWord) {
        match w {
            AnyWord::Finite(w) => {
                self.finite.insert(w);
            }
            AnyWord::Periodic(w) => {
                self.periodic.insert(w);
            }
        }
    }

    pub fn contains(&self, w: &AnyWord) -> bool {
        match w {
            AnyWord::Finite(w) => self.finite.contains(w),
            AnyWord::Periodic(w) => self.periodic.contains(w),
        }
    }

    pub fn is_subset(&self, other: &WordSet) -> bool {
        self.finite.is_subset(&other.finite) && self.periodic.is_subset(&other.periodic)
    }
}

impl FromIterator<AnyWord> for WordSet {
    fn from_iter<I: IntoIterator<Item = AnyWord>>(iter: I) -> Self {
        let mut out = WordSet::new();
        for w in iter {
            out.insert(w);
        }
        out
    }
}

/// A candidate solution: one word set per state.
pub type Candidate = Vec<WordSet>;

/// Which way a clause failed at a state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClauseViolation {
    /// Listed, but the right-hand side of the clause does not hold.
    Unsupported { state: String, word: AnyWord },
    /// Derivable by the clause, but not listed.
    Missing { state: String, word: AnyWord },
}

impl fmt::Display for ClauseViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClauseViolation::Unsupported { state, word } => {
                write!(f, "{state}: {word} is listed but not derivable")
            }
            ClauseViolation::Missing { state, word } => {
                write!(f, "{state}: {word} is derivable but not listed")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionReport {
    pub bound: usize,
    pub words_checked: usize,
    pub violations: Vec<ClauseViolation>,
}

impl SolutionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for SolutionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} infinite-trace clauses at bound {} ({} checks)",
            self.bound, self.words_checked
        )?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

fn words_up_to(alphabet: &[Symbol], max_len: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    let mut level = vec![Vec::new()];
    for _ in 0..max_len {
        level = level
            .iter()
            .flat_map(|w: &Word| {
                alphabet.iter().map(move |a| {
                    let mut w = w.clone();
                    w.push(a.clone());
                    w
                })
            })
            .collect();
        out.extend(level.iter().cloned());
    }
    out
}

/// Canonical periodic words with `|u| + |v| <= bound`.
pub fn periodic_words_up_to(alphabet: &[Symbol], bound: usize) -> BTreeSet<UPWord> {
    let all = words_up_to(alphabet, bound);
    let mut out = BTreeSet::new();
    for v in all.iter().filter(|v| !v.is_empty()) {
        for u in all.iter().filter(|u| u.len() + v.len() <= bound) {
            out.insert(UPWord::new(u.clone(), v.clone()).unwrap());
        }
    }
    out
}

/// Checks both directions of the infinite-trace clauses for `candidate`.
///
/// The universe is every finite word of length `<= bound`, every canonical
/// periodic word of size `<= bound`, and the tails of every periodic word the
/// candidate lists. Finite words longer than `bound` in the candidate are
/// ignored.
pub fn check_infinite_solution(
    sys: &System,
    candidate: &Candidate,
    bound: usize,
) -> Result<SolutionReport> {
    if sys.is_empty() {
        return Err(Error::InvalidSystem("no states".into()));
    }
    let view = nd_view(sys, StateId(0))?;
    if candidate.len() != sys.len() {
        return Err(Error::DomainMismatch(format!(
            "candidate has {} entries for {} states",
            candidate.len(),
            sys.len()
        )));
    }
    let alphabet: Vec<Symbol> = view.shape.alphabet().iter().cloned().collect();
    let finite = words_up_to(&alphabet, bound);
    let mut periodic = periodic_words_up_to(&alphabet, bound);
    for set in candidate {
        for w in &set.periodic {
            periodic.extend(w.orbit());
        }
    }

    let derivable = |x: StateId, head: Option<(&Symbol, AnyWord)>| match head {
        None => view.terminates(x),
        Some((a, rest)) => view
            .successors(x, a)
            .any(|y| candidate[y.0].contains(&rest)),
    };

    let mut words_checked = 0;
    let mut violations = Vec::new();
    for x in sys.ids() {
        let universe = finite
            .iter()
            .map(|w| {
                let split = w
                    .split_first()
                    .map(|(a, rest)| (a, AnyWord::Finite(rest.to_vec())));
                (AnyWord::Finite(w.clone()), split)
            })
            .chain(periodic.iter().map(|w| {
                (
                    AnyWord::Periodic(w.clone()),
                    Some((w.head(), AnyWord::Periodic(w.tail()))),
                )
            }));
        for (word, split) in universe {
            words_checked += 1;
            let listed = candidate[x.0].contains(&word);
            let rhs = derivable(x, split);
            let state = sys.state_name(x).to_string();
            if listed && !rhs {
                violations.push(ClauseViolation::Unsupported { state, word });
            } else if rhs && !listed {
                violations.push(ClauseViolation::Missing { state, word });
            }
        }
    }
    Ok(SolutionReport {
        bound,
        words_checked,
        violations,
    })
}

/// Pointwise inclusion of candidates.
pub fn candidate_included(smaller: &Candidate, larger: &Candidate) -> bool {
    smaller.len() == larger.len() && smaller.iter().zip(larger).all(|(a, b)| a.is_subset(b))
}

/// The finite traces of length `<= bound`, as a candidate.
pub fn finite_candidate(sys: &System, bound: usize) -> Result<Candidate> {
    if sys.is_empty() {
        return Ok(Vec::new());
    }
    let view = nd_view(sys, StateId(0))?;
    let alphabet: Vec<Symbol> = view.shape.alphabet().iter().cloned().collect();
    let words = words_up_to(&alphabet, bound);
    sys.ids()
        .map(|x| {
            let mut set = WordSet::new();
            for w in &words {
                if accepts_finite(sys, x, w)? {
                    set.finite.insert(w.clone());
                }
            }
            Ok(set)
        })
        .collect()
}

/// The finite candidate plus every periodic word of size `<= bound` that
/// is accepted. Closed under tails, so the clause check sees it whole.
pub fn maximal_candidate(sys: &System, bound: usize) -> Result<Candidate> {
    let mut out = finite_candidate(sys, bound)?;
    if out.is_empty() {
        return Ok(out);
    }
    let view = sys.lts_view()?;
    let alphabet: Vec<Symbol> = view.shape.alphabet().iter().cloned().collect();
    let periodic = periodic_words_up_to(&alphabet, bound);
    let mut cache: BTreeMap<(StateId, UPWord), bool> = BTreeMap::new();
    for x in sys.ids() {
        for w in &periodic {
            let hit = match cache.get(&(x, w.clone())) {
                Some(b) => *b,
                None => {
                    let b = accepts_up_word(sys, x, w)?;
                    cache.insert((x, w.clone()), b);
                    b
                }
            };
            if hit {
                out[x.0].periodic.insert(w.clone());
            }
        }
    }
    Ok(out)
}
