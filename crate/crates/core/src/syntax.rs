//! The line-oriented system file format.
//!
//! ```text
//! # comments run to the end of the line
//! [system]
//! name = running-nd
//! monad = powerset
//! functor = 1 + Sigma * X
//! alphabet = a, b
//! states = x, y
//!
//! [transitions]
//! x: a -> y
//! y: b -> y
//! y: !
//! ```
//!
//! Transition lines depend on the functor. For `1 + Sigma * X` a line is
//! `a -> y`, `!` (terminate) or `bot` (no outcome). For `list(Sigma + X)` a
//! line lists right-hand sides, `T: 0 | s T`, with `eps` for the empty one.
//! Any other functor takes structures written as they print: `(a, b)`,
//! `label:inner`, `[a b c]`. Subdistribution systems put a weight `p/q` in
//! front of every outcome.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Zero};

use crate::functors::{CfgShape, FStruct, FunctorExpr, LtsShape, LtsStep, RhsItem, Symbol, UNIT_SYMBOL};
use crate::monads::{MonadTag, Prob, TValue};
use crate::system::{StateId, System};
use crate::{Error, Result};

/// Name the alphabet is bound to in functor expressions.
pub const ALPHABET_NAME: &str = "Sigma";

#[derive(Clone, Debug, PartialEq, Eq)]
struct Tok {
    text: String,
    col: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits `text` into identifiers, `->`, and single-character tokens from
/// `punct`. Columns are 1-based and offset by `base`.
fn lex(text: &str, base: usize, punct: &str) -> Vec<Tok> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Tok {
                text: "->".into(),
                col: base + i,
            });
            i += 2;
        } else if punct.contains(c) {
            out.push(Tok {
                text: c.to_string(),
                col: base + i,
            });
            i += 1;
        } else {
            let start = i;
            while i < chars.len()
                && !chars[i].is_whitespace()
                && !punct.contains(chars[i])
                && !(chars[i] == '-' && chars.get(i + 1) == Some(&'>'))
            {
                i += 1;
            }
            out.push(Tok {
                text: chars[start..i].iter().collect(),
                col: base + start,
            });
        }
    }
    out
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || "_'.-/*!".contains(c))
}

/// Recursive-descent parser for functor expressions.
struct FunctorParser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    line: usize,
    end_col: usize,
    named: &'a BTreeMap<String, BTreeSet<Symbol>>,
}

impl FunctorParser<'_> {
    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|t| t.text.as_str())
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn expect(&mut self, what: &str) -> Result<()> {
        if self.peek() == Some(what) {
            self.pos += 1;
            Ok(())
        } else {
            Err(err(self.line, self.col(), format!("expected `{what}`")))
        }
    }

    fn sum(&mut self) -> Result<FunctorExpr> {
        let mut parts = vec![self.product()?];
        while self.peek() == Some("+") {
            self.pos += 1;
            parts.push(self.product()?);
        }
        if parts.len() == 1 {
            return Ok(parts.pop().unwrap());
        }
        let labels: Vec<String> = if parts.len() == 2 {
            vec!["inl".into(), "inr".into()]
        } else {
            (1..=parts.len()).map(|i| format!("in{i}")).collect()
        };
        Ok(FunctorExpr::coprod(
            labels.iter().map(String::as_str).zip(parts),
        ))
    }

    fn product(&mut self) -> Result<FunctorExpr> {
        let mut left = self.atom()?;
        while self.peek() == Some("*") {
            self.pos += 1;
            left = FunctorExpr::prod(left, self.atom()?);
        }
        Ok(left)
    }

    fn atom(&mut self) -> Result<FunctorExpr> {
        let col = self.col();
        let Some(tok) = self.peek().map(str::to_string) else {
            return Err(err(self.line, col, "unexpected end of functor expression"));
        };
        self.pos += 1;
        match tok.as_str() {
            "X" => Ok(FunctorExpr::Identity),
            "1" => Ok(FunctorExpr::one()),
            "(" => {
                let inner = self.sum()?;
                self.expect(")")?;
                Ok(inner)
            }
            "list" => {
                self.expect("(")?;
                let inner = self.sum()?;
                self.expect(")")?;
                Ok(FunctorExpr::list(inner))
            }
            "{" => {
                let mut symbols = BTreeSet::new();
                loop {
                    let c = self.col();
                    match self.peek().map(str::to_string) {
                        Some(s) if is_identifier(&s) => {
                            self.pos += 1;
                            symbols.insert(Symbol::new(&s));
                        }
                        _ => return Err(err(self.line, c, "expected a symbol")),
                    }
                    match self.peek() {
                        Some(",") => self.pos += 1,
                        Some("}") => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(err(self.line, self.col(), "expected `,` or `}`")),
                    }
                }
                Ok(FunctorExpr::Const(symbols))
            }
            name if is_identifier(name) => match self.named.get(name) {
                Some(set) => Ok(FunctorExpr::Const(set.clone())),
                None => Err(err(
                    self.line,
                    col,
                    format!("unknown functor keyword or symbol set `{name}`"),
                )),
            },
            other => Err(err(self.line, col, format!("unexpected `{other}`"))),
        }
    }
}

fn parse_functor_at(
    text: &str,
    line: usize,
    base: usize,
    named: &BTreeMap<String, BTreeSet<Symbol>>,
) -> Result<FunctorExpr> {
    let toks = lex(text, base, "+*(){},");
    let mut p = FunctorParser {
        toks,
        pos: 0,
        line,
        end_col: base + text.chars().count(),
        named,
    };
    let f = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(err(line, p.col(), "trailing input in functor expression"));
    }
    f.validate().map_err(|e| err(line, base, e.to_string()))?;
    Ok(f)
}

/// Parses a functor expression; `Sigma` is bound to `alphabet`.
pub fn parse_functor(text: &str, alphabet: &[&str]) -> Result<FunctorExpr> {
    let mut named = BTreeMap::new();
    if !alphabet.is_empty() {
        named.insert(
            ALPHABET_NAME.to_string(),
            alphabet.iter().map(|a| Symbol::new(a)).collect(),
        );
    }
    parse_functor_at(text, 1, 1, &named)
}

fn parse_prob(tok: &Tok, line: usize) -> Result<Prob> {
    let bad = || err(line, tok.col, format!("expected a probability, found `{}`", tok.text));
    let (n, d) = match tok.text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (tok.text.as_str(), "1"),
    };
    let n: num::BigInt = n.parse().map_err(|_| bad())?;
    let d: num::BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    let p = Prob::new(n, d);
    if p <= Prob::zero() || p > Prob::one() {
        return Err(err(line, tok.col, format!("probability {p} is outside (0, 1]")));
    }
    Ok(p)
}

/// How transition lines are read.
enum LineStyle {
    Lts(LtsShape),
    Cfg(CfgShape),
    Generic,
}

impl LineStyle {
    fn for_functor(f: &FunctorExpr) -> Self {
        if let Some(s) = LtsShape::of(f) {
            LineStyle::Lts(s)
        } else if let Some(s) = CfgShape::of(f) {
            LineStyle::Cfg(s)
        } else {
            LineStyle::Generic
        }
    }
}

struct Ctx<'a> {
    line: usize,
    end_col: usize,
    functor: &'a FunctorExpr,
    states: &'a BTreeMap<String, StateId>,
}

impl Ctx<'_> {
    fn state(&self, tok: &Tok) -> Result<StateId> {
        self.states
            .get(&tok.text)
            .copied()
            .ok_or_else(|| err(self.line, tok.col, format!("undeclared state `{}`", tok.text)))
    }

    fn symbol(&self, tok: &Tok, allowed: &BTreeSet<Symbol>) -> Result<Symbol> {
        let s = Symbol::new(&tok.text);
        if allowed.contains(&s) {
            Ok(s)
        } else {
            Err(err(self.line, tok.col, format!("undeclared symbol `{}`", tok.text)))
        }
    }

    fn end(&self, toks: &[Tok], pos: usize) -> usize {
        toks.get(pos).map_or(self.end_col, |t| t.col)
    }

    /// One outcome; `None` for `bot`.
    fn outcome(&self, style: &LineStyle, toks: &[Tok]) -> Result<Option<FStruct<StateId>>> {
        if toks.is_empty() {
            return Err(err(self.line, self.end_col, "missing outcome"));
        }
        if toks.len() == 1 && toks[0].text == "bot" {
            return Ok(None);
        }
        match style {
            LineStyle::Lts(shape) => match toks {
                [t] if t.text == "!" => Ok(Some(shape.stop())),
                [a, arrow, y] if arrow.text == "->" => {
                    let letter = self.symbol(a, shape.alphabet())?;
                    Ok(Some(shape.step(&letter, self.state(y)?)))
                }
                _ => Err(err(
                    self.line,
                    toks[0].col,
                    "expected `letter -> state`, `!` or `bot`",
                )),
            },
            LineStyle::Cfg(shape) => {
                if toks.len() == 1 && toks[0].text == "eps" {
                    return Ok(Some(shape.rhs(Vec::new())));
                }
                let items = toks
                    .iter()
                    .map(|t| {
                        let is_state = self.states.contains_key(&t.text);
                        let is_terminal = shape.terminals().contains(&Symbol::new(&t.text));
                        match (is_state, is_terminal) {
                            (true, false) => Ok(RhsItem::Child(self.state(t)?)),
                            (false, true) => Ok(RhsItem::Terminal(Symbol::new(&t.text))),
                            (true, true) => Err(err(
                                self.line,
                                t.col,
                                format!("`{}` is both a state and a terminal", t.text),
                            )),
                            (false, false) => Err(err(
                                self.line,
                                t.col,
                                format!("undeclared state or symbol `{}`", t.text),
                            )),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Some(shape.rhs(items)))
            }
            LineStyle::Generic => {
                let mut pos = 0;
                let s = self.structure(self.functor, toks, &mut pos)?;
                if pos != toks.len() {
                    return Err(err(self.line, toks[pos].col, "trailing input after structure"));
                }
                Ok(Some(s))
            }
        }
    }

    fn next<'t>(&self, toks: &'t [Tok], pos: &mut usize) -> Result<&'t Tok> {
        let t = toks
            .get(*pos)
            .ok_or_else(|| err(self.line, self.end_col, "unexpected end of line"))?;
        *pos += 1;
        Ok(t)
    }

    fn punct(&self, toks: &[Tok], pos: &mut usize, what: &str) -> Result<()> {
        let col = self.end(toks, *pos);
        match toks.get(*pos) {
            Some(t) if t.text == what => {
                *pos += 1;
                Ok(())
            }
            _ => Err(err(self.line, col, format!("expected `{what}`"))),
        }
    }

    fn structure(&self, f: &FunctorExpr, toks: &[Tok], pos: &mut usize) -> Result<FStruct<StateId>> {
        match f {
            FunctorExpr::Identity => Ok(FStruct::Var(self.state(self.next(toks, pos)?)?)),
            FunctorExpr::Const(allowed) => Ok(FStruct::Sym(self.symbol(self.next(toks, pos)?, allowed)?)),
            FunctorExpr::Prod(a, b) => {
                self.punct(toks, pos, "(")?;
                let l = self.structure(a, toks, pos)?;
                self.punct(toks, pos, ",")?;
                let r = self.structure(b, toks, pos)?;
                self.punct(toks, pos, ")")?;
                Ok(FStruct::pair(l, r))
            }
            FunctorExpr::Coprod(summands) => {
                let t = self.next(toks, pos)?;
                let Some((label, inner)) = summands.iter().find(|(l, _)| l.as_str() == t.text) else {
                    return Err(err(self.line, t.col, format!("unknown injection `{}`", t.text)));
                };
                self.punct(toks, pos, ":")?;
                Ok(FStruct::inj(label, self.structure(inner, toks, pos)?))
            }
            FunctorExpr::List(inner) => {
                self.punct(toks, pos, "[")?;
                let mut items = Vec::new();
                while toks.get(*pos).map(|t| t.text.as_str()) != Some("]") {
                    if *pos >= toks.len() {
                        return Err(err(self.line, self.end_col, "expected `]`"));
                    }
                    items.push(self.structure(inner, toks, pos)?);
                }
                *pos += 1;
                Ok(FStruct::Seq(items))
            }
        }
    }
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Parses a system file.
pub fn parse_system(text: &str) -> Result<System> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Header,
        Transitions,
    }
    let mut section = Section::None;
    let mut header: BTreeMap<String, (String, usize, usize)> = BTreeMap::new();
    let mut transition_lines: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap();
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed {
            "[system]" => {
                section = Section::Header;
                continue;
            }
            "[transitions]" => {
                section = Section::Transitions;
                continue;
            }
            _ => {}
        }
        let indent = content.len() - content.trim_start().len();
        let col0 = content[..indent].chars().count() + 1;
        match section {
            Section::None => {
                return Err(err(line, col0, "expected `[system]`"));
            }
            Section::Header => {
                let Some((key, value)) = content.split_once('=') else {
                    return Err(err(line, col0, "expected `key = value`"));
                };
                let key = key.trim().to_string();
                if !["name", "monad", "functor", "alphabet", "states"].contains(&key.as_str()) {
                    return Err(err(line, col0, format!("unknown header key `{key}`")));
                }
                let value_start = content.find('=').unwrap() + 1;
                let lead = value.len() - value.trim_start().len();
                let vcol = content[..value_start + lead].chars().count() + 1;
                if header.contains_key(&key) {
                    return Err(err(line, col0, format!("duplicate header key `{key}`")));
                }
                header.insert(key, (value.trim().to_string(), line, vcol));
            }
            Section::Transitions => transition_lines.push((line, content.to_string())),
        }
    }
    let field = |key: &str| -> Result<&(String, usize, usize)> {
        header
            .get(key)
            .ok_or_else(|| err(1, 1, format!("missing header key `{key}`")))
    };

    let name = header.get("name").map(|v| v.0.clone()).unwrap_or_default();
    let (monad_text, mline, mcol) = field("monad")?;
    let tag: MonadTag = monad_text
        .parse()
        .map_err(|_| err(*mline, *mcol, format!("unknown monad `{monad_text}`")))?;

    let mut named = BTreeMap::new();
    if let Some((alpha, aline, acol)) = header.get("alphabet") {
        let letters = split_list(alpha);
        if let Some(bad) = letters.iter().find(|l| !is_identifier(l)) {
            return Err(err(*aline, *acol, format!("bad symbol `{bad}`")));
        }
        if letters.is_empty() {
            return Err(err(*aline, *acol, "empty alphabet"));
        }
        named.insert(
            ALPHABET_NAME.to_string(),
            letters.iter().map(|l| Symbol::new(l)).collect::<BTreeSet<_>>(),
        );
    }
    let (ftext, fline, fcol) = field("functor")?;
    let functor = parse_functor_at(ftext, *fline, *fcol, &named)?;

    let (stext, sline, scol) = field("states")?;
    let state_names = split_list(stext);
    if state_names.is_empty() {
        return Err(err(*sline, *scol, "no states declared"));
    }
    let mut states = BTreeMap::new();
    for (i, s) in state_names.iter().enumerate() {
        if !is_identifier(s) || s == "bot" || s == "eps" {
            return Err(err(*sline, *scol, format!("bad state name `{s}`")));
        }
        if states.insert(s.clone(), StateId(i)).is_some() {
            return Err(err(*sline, *scol, format!("duplicate state `{s}`")));
        }
    }

    let style = LineStyle::for_functor(&functor);
    let mut outcomes: Vec<Vec<(FStruct<StateId>, Prob)>> = vec![Vec::new(); state_names.len()];
    let mut mass: Vec<Prob> = vec![Prob::zero(); state_names.len()];
    let mut declared_bot = vec![false; state_names.len()];
    for (line, content) in &transition_lines {
        let line = *line;
        let toks = lex(content, 1, "|()[],:");
        let (Some(head), Some(colon)) = (toks.first(), toks.get(1)) else {
            return Err(err(line, 1, "expected `state: outcomes`"));
        };
        if colon.text != ":" {
            return Err(err(line, colon.col, "expected `:` after the state name"));
        }
        let ctx = Ctx {
            line,
            end_col: content.chars().count() + 1,
            functor: &functor,
            states: &states,
        };
        let x = ctx.state(head)?;
        for alt in toks[2..].split(|t| t.text == "|") {
            let (weight, body) = if tag == MonadTag::Subdist {
                match alt.first() {
                    Some(t) if t.text != "bot" => (parse_prob(t, line)?, &alt[1..]),
                    _ => (Prob::one(), alt),
                }
            } else {
                (Prob::one(), alt)
            };
            let col = alt.first().map_or(ctx.end_col, |t| t.col);
            match ctx.outcome(&style, body)? {
                None => declared_bot[x.0] = true,
                Some(s) => {
                    if tag == MonadTag::Lift && !outcomes[x.0].is_empty() {
                        return Err(err(
                            line,
                            col,
                            format!("duplicate transition for lift state `{}`", head.text),
                        ));
                    }
                    mass[x.0] += &weight;
                    if tag == MonadTag::Subdist && mass[x.0] > Prob::one() {
                        return Err(err(
                            line,
                            col,
                            format!("mass exceeds 1 at state `{}` ({})", head.text, mass[x.0]),
                        ));
                    }
                    outcomes[x.0].push((s, weight));
                }
            }
            if declared_bot[x.0] && !outcomes[x.0].is_empty() {
                return Err(err(line, col, format!("state `{}` has outcomes and `bot`", head.text)));
            }
        }
    }

    let transitions = outcomes
        .into_iter()
        .map(|entries| match tag {
            MonadTag::Lift => TValue::lift(entries.into_iter().next().map(|(s, _)| s)),
            MonadTag::Powerset => TValue::set(entries.into_iter().map(|(s, _)| s)),
            MonadTag::Subdist => TValue::dist(entries).expect("mass checked while parsing"),
        })
        .collect();
    System::new(name, tag, functor, state_names, transitions)
}

fn alphabet_of(f: &FunctorExpr) -> Option<BTreeSet<Symbol>> {
    match LineStyle::for_functor(f) {
        LineStyle::Lts(s) => Some(s.alphabet().clone()),
        LineStyle::Cfg(s) => Some(s.terminals().clone()),
        LineStyle::Generic => None,
    }
}

fn render_outcome(sys: &System, style: &LineStyle, s: &FStruct<StateId>) -> String {
    let name = |y: &StateId| sys.state_name(*y).to_string();
    match style {
        LineStyle::Lts(shape) => match shape.view(s) {
            Some(LtsStep::Stop) => "!".into(),
            Some(LtsStep::Step(a, y)) => format!("{a} -> {}", name(y)),
            None => unreachable!("shape checked by the system"),
        },
        LineStyle::Cfg(shape) => {
            let items = shape.view(s).expect("shape checked by the system");
            if items.is_empty() {
                return "eps".into();
            }
            items
                .iter()
                .map(|item| match item {
                    RhsItem::Terminal(t) => t.to_string(),
                    RhsItem::Child(y) => name(y),
                })
                .collect::<Vec<_>>()
                .join(" ")
        }
        LineStyle::Generic => s.fmap(&mut |y: &StateId| name(y)).to_string(),
    }
}

/// Writes a system in the file format; [`parse_system`] reads it back.
pub fn render_system(sys: &System) -> String {
    let alphabet = alphabet_of(sys.functor());
    let mut out = String::from("[system]\n");
    out.push_str(&format!("name = {}\n", sys.name()));
    out.push_str(&format!("monad = {}\n", sys.tag()));
    let functor = sys.functor().render(&|set| {
        (Some(set) == alphabet.as_ref() && !(set.len() == 1 && set.iter().next().unwrap().as_str() == UNIT_SYMBOL))
            .then(|| ALPHABET_NAME.to_string())
    });
    out.push_str(&format!("functor = {functor}\n"));
    if let Some(alpha) = &alphabet {
        if functor.contains(ALPHABET_NAME) {
            let letters: Vec<&str> = alpha.iter().map(Symbol::as_str).collect();
            out.push_str(&format!("alphabet = {}\n", letters.join(", ")));
        }
    }
    out.push_str(&format!("states = {}\n", sys.state_names().join(", ")));
    out.push_str("\n[transitions]\n");
    let style = LineStyle::for_functor(sys.functor());
    for x in sys.ids() {
        let value = sys.transition(x);
        let name = sys.state_name(x);
        if value.support_len() == 0 {
            out.push_str(&format!("{name}: bot\n"));
            continue;
        }
        for s in value.support() {
            let body = render_outcome(sys, &style, s);
            if sys.tag() == MonadTag::Subdist {
                out.push_str(&format!("{name}: {} {body}\n", value.weight(s)));
            } else {
                out.push_str(&format!("{name}: {body}\n"));
            }
        }
    }
    out
}
