//! Command-line front end: argument parsing, dispatch and rendering.
//!
//! [`run`] never touches stdout; it returns a [`CommandResult`] holding both
//! renderings so tests can compare them byte for byte.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kltrace::bisim::{bisimilar, bisimulation_partition};
use kltrace::distributivity::{DistLaw, LawReport};
use kltrace::functors::{enumerate_terms, LtsShape, Term, TermStyle};
use kltrace::laws::{all_suites, distributive_axioms_for, monad_laws};
use kltrace::monads::{MonadTag, TValue};
use kltrace::omega::{
    accepts, check_infinite_solution, finite_candidate, maximal_candidate, AnyWord, SolutionReport,
};
use kltrace::par::Execution;
use kltrace::syntax::parse_system;
use kltrace::system::{StateId, System};
use kltrace::testing::{check_expressive, passing_tests, testing_equivalent, theory_maps};
use kltrace::traces::{
    check_coinduction_square, finite_trace, perturbation_search, trace_equivalent, trace_lift_exact,
    trace_oracle_lts, trace_oracle_plts,
};
use kltrace::Error;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Plain,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "kltrace", version, about = "Finite trace semantics for branching systems")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Plain)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Depth {
    /// Iteration depth (terms of height at most this).
    #[arg(long, default_value_t = 5)]
    depth: usize,
}

#[derive(Args, Debug)]
struct ListCap {
    /// Widest list considered when enumerating terms.
    #[arg(long = "list-cap", default_value_t = 4)]
    list_cap: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Depth-bounded trace semantics.
    Trace {
        file: PathBuf,
        #[arg(long)]
        state: Option<String>,
        #[command(flatten)]
        depth: Depth,
        /// Exact traces by direct recursion (lift systems only).
        #[arg(long)]
        exact: bool,
    },
    /// Trace equivalence and bisimilarity of two states.
    Equiv {
        file: PathBuf,
        x: String,
        y: String,
        #[command(flatten)]
        depth: Depth,
    },
    /// Bisimulation classes, or bisimilarity of two states.
    Bisim {
        file: PathBuf,
        x: Option<String>,
        y: Option<String>,
    },
    /// Every passing test with the states passing it.
    Tests {
        file: PathBuf,
        #[command(flatten)]
        depth: Depth,
        #[command(flatten)]
        list_cap: ListCap,
    },
    /// Tests passed by each state, or testing equivalence of two states.
    Theory {
        file: PathBuf,
        #[arg(long)]
        state: Option<String>,
        /// Second state: report testing equivalence with `--state`.
        #[arg(long)]
        against: Option<String>,
        #[command(flatten)]
        depth: Depth,
        #[command(flatten)]
        list_cap: ListCap,
    },
    /// Infinite traces: word membership or candidate solutions.
    Omega {
        file: PathBuf,
        #[arg(long)]
        state: Option<String>,
        /// `a.b` or `a.(b)^w`.
        #[arg(long)]
        word: Option<String>,
        #[arg(long, default_value_t = 6)]
        bound: usize,
    },
    /// Square, finality, oracle and law checks for one system.
    Check {
        file: PathBuf,
        #[command(flatten)]
        depth: Depth,
        #[command(flatten)]
        list_cap: ListCap,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Randomized law suites over every monad and functor constructor.
    CheckLaws {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        cases: usize,
    },
    /// Terms of the initial algebra up to a height.
    Enumerate {
        file: PathBuf,
        #[command(flatten)]
        depth: Depth,
        #[command(flatten)]
        list_cap: ListCap,
    },
}

/// Outcome of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandResult {
    pub subcommand: String,
    /// 0 success, 1 failed check, 2 usage or input error.
    pub status: i32,
    pub plain: String,
    pub json: Value,
    pub format: Format,
}

impl CommandResult {
    fn ok(subcommand: &str, plain: String, json: Value) -> Self {
        CommandResult {
            subcommand: subcommand.into(),
            status: 0,
            plain,
            json,
            format: Format::Plain,
        }
    }

    fn usage(subcommand: &str, message: String) -> Self {
        CommandResult {
            subcommand: subcommand.into(),
            status: 2,
            json: json!({ "subcommand": subcommand, "error": message.trim_end() }),
            plain: message,
            format: Format::Plain,
        }
    }

    /// The payload in the requested format, newline-terminated.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Plain => self.plain.clone(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("json values serialize");
                s.push('\n');
                s
            }
        }
    }

    /// The payload in the format chosen on the command line.
    pub fn output(&self) -> String {
        self.render(self.format)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    CommandResult::ok("help", text.clone(), json!({ "help": text }))
                }
                _ => CommandResult::usage("usage", text),
            };
        }
    };
    let name = subcommand_name(&cli.command);
    let mut result = match dispatch(&cli.command) {
        Ok(r) => r,
        Err(e) => CommandResult::usage(name, format!("error: {e}\n")),
    };
    result.format = cli.format;
    result
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Trace { .. } => "trace",
        Command::Equiv { .. } => "equiv",
        Command::Bisim { .. } => "bisim",
        Command::Tests { .. } => "tests",
        Command::Theory { .. } => "theory",
        Command::Omega { .. } => "omega",
        Command::Check { .. } => "check",
        Command::CheckLaws { .. } => "check-laws",
        Command::Enumerate { .. } => "enumerate",
    }
}

fn load(path: &PathBuf) -> Result<System, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidSystem(format!("cannot read {}: {e}", path.display())))?;
    parse_system(&text).map_err(|e| match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{message} (in {})", path.display()),
        },
        other => other,
    })
}

fn law(sys: &System) -> DistLaw {
    DistLaw::canonical(sys.tag(), sys.functor().clone()).expect("canonical laws exist for every monad")
}

/// States sorted by name, or the one named.
fn selected(sys: &System, state: &Option<String>) -> Result<Vec<StateId>, Error> {
    match state {
        Some(name) => Ok(vec![sys.state_id(name)?]),
        None => Ok(by_name(sys)),
    }
}

fn by_name(sys: &System) -> Vec<StateId> {
    let mut ids: Vec<StateId> = sys.ids().collect();
    ids.sort_by_key(|x| sys.state_name(*x));
    ids
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn value_json(v: &TValue<Term>, style: &TermStyle) -> Value {
    match v.tag() {
        MonadTag::Lift => match v.as_lift().unwrap() {
            None => Value::Null,
            Some(t) => json!(style.render(t)),
        },
        MonadTag::Powerset => json!(v.support().map(|t| style.render(t)).collect::<Vec<_>>()),
        MonadTag::Subdist => json!(v
            .as_dist()
            .unwrap()
            .iter()
            .map(|(t, p)| json!({ "term": style.render(t), "weight": p.to_string() }))
            .collect::<Vec<_>>()),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn dispatch(command: &Command) -> Result<CommandResult, Error> {
    match command {
        Command::Trace { file, state, depth, exact } => {
            let sys = load(file)?;
            let style = TermStyle::for_functor(sys.functor());
            let ids = selected(&sys, state)?;
            let values = if *exact {
                if sys.tag() != MonadTag::Lift {
                    return Err(Error::Unsupported(format!(
                        "--exact needs a lift system, got {}",
                        sys.tag()
                    )));
                }
                trace_lift_exact(&sys)?
            } else {
                finite_trace(&sys, &law(&sys), depth.depth)?.into_values()
            };
            let mut plain = String::new();
            let mut rows = Vec::new();
            for x in ids {
                let v = &values[x.0];
                plain += &format!("{}: {}\n", sys.state_name(x), v.render_with(|t| style.render(t)));
                rows.push(json!({ "state": sys.state_name(x), "trace": value_json(v, &style) }));
            }
            let depth_json = if *exact { Value::Null } else { json!(depth.depth) };
            Ok(CommandResult::ok(
                "trace",
                plain,
                json!({ "subcommand": "trace", "system": sys.name(), "monad": sys.tag().name(),
                        "depth": depth_json, "states": rows }),
            ))
        }
        Command::Equiv { file, x, y, depth } => {
            let sys = load(file)?;
            let (a, b) = (sys.state_id(x)?, sys.state_id(y)?);
            let traces = trace_equivalent(&sys, &law(&sys), a, b, depth.depth)?;
            let bisim = match bisimilar(&sys, a, b) {
                Ok(v) => Some(v),
                Err(Error::Unsupported(_)) => None,
                Err(e) => return Err(e),
            };
            let plain = format!(
                "trace-equivalent: {}; bisimilar: {}\n",
                yes_no(traces),
                bisim.map_or("n/a", yes_no)
            );
            Ok(CommandResult::ok(
                "equiv",
                plain,
                json!({ "subcommand": "equiv", "system": sys.name(), "x": x, "y": y,
                        "depth": depth.depth, "trace_equivalent": traces, "bisimilar": bisim }),
            ))
        }
        Command::Bisim { file, x, y } => {
            let sys = load(file)?;
            match (x, y) {
                (Some(x), Some(y)) => {
                    let b = bisimilar(&sys, sys.state_id(x)?, sys.state_id(y)?)?;
                    Ok(CommandResult::ok(
                        "bisim",
                        format!("bisimilar: {}\n", yes_no(b)),
                        json!({ "subcommand": "bisim", "system": sys.name(), "x": x, "y": y, "bisimilar": b }),
                    ))
                }
                (None, None) => {
                    let p = bisimulation_partition(&sys)?;
                    let mut blocks: Vec<Vec<&str>> = p
                        .blocks()
                        .iter()
                        .map(|b| {
                            let mut names: Vec<&str> = b.iter().map(|s| sys.state_name(*s)).collect();
                            names.sort();
                            names
                        })
                        .collect();
                    blocks.sort();
                    let plain = blocks.iter().map(|b| format!("{{{}}}\n", b.join(", "))).collect();
                    Ok(CommandResult::ok(
                        "bisim",
                        plain,
                        json!({ "subcommand": "bisim", "system": sys.name(), "classes": blocks }),
                    ))
                }
                _ => Err(Error::InvalidSystem("bisim takes zero or two states".into())),
            }
        }
        Command::Tests { file, depth, list_cap } => {
            let sys = load(file)?;
            let style = TermStyle::for_functor(sys.functor());
            let passing = passing_tests(&sys, &law(&sys), depth.depth, list_cap.list_cap, Execution::default())?;
            let mut plain = String::new();
            let mut rows = Vec::new();
            for (t, xs) in &passing {
                let mut names: Vec<&str> = xs.iter().map(|x| sys.state_name(*x)).collect();
                names.sort();
                plain += &format!("{}: {}\n", style.render(t), names.join(", "));
                rows.push(json!({ "test": style.render(t), "passed_by": names }));
            }
            Ok(CommandResult::ok(
                "tests",
                plain,
                json!({ "subcommand": "tests", "system": sys.name(), "depth": depth.depth,
                        "list_cap": list_cap.list_cap, "tests": rows }),
            ))
        }
        Command::Theory { file, state, against, depth, list_cap } => {
            let sys = load(file)?;
            let l = law(&sys);
            if let Some(other) = against {
                let Some(first) = state else {
                    return Err(Error::InvalidSystem("--against needs --state".into()));
                };
                let (a, b) = (sys.state_id(first)?, sys.state_id(other)?);
                let eq = testing_equivalent(&sys, &l, a, b, depth.depth, list_cap.list_cap)?;
                return Ok(CommandResult::ok(
                    "theory",
                    format!("testing-equivalent: {}\n", yes_no(eq)),
                    json!({ "subcommand": "theory", "system": sys.name(), "x": first, "y": other,
                            "depth": depth.depth, "list_cap": list_cap.list_cap, "testing_equivalent": eq }),
                ));
            }
            let ids = selected(&sys, state)?;
            let theories = theory_maps(&sys, &l, depth.depth, list_cap.list_cap)?;
            let style = TermStyle::for_functor(sys.functor());
            let mut plain = String::new();
            let mut rows = Vec::new();
            for x in ids {
                let th = &theories[x.0];
                plain += &format!("{}: {{{}}}\n", th.state, th.render(&sys));
                let tests: Vec<String> = th.passed.iter().map(|t| style.render(t)).collect();
                rows.push(json!({ "state": th.state, "theory": tests }));
            }
            Ok(CommandResult::ok(
                "theory",
                plain,
                json!({ "subcommand": "theory", "system": sys.name(), "depth": depth.depth,
                        "list_cap": list_cap.list_cap, "states": rows }),
            ))
        }
        Command::Omega { file, state, word, bound } => {
            let sys = load(file)?;
            if let Some(text) = word {
                let w: AnyWord = text.parse()?;
                let ids = selected(&sys, state)?;
                let mut plain = String::new();
                let mut rows = Vec::new();
                for x in ids {
                    let a = accepts(&sys, x, &w)?;
                    plain += &format!("{}: {w} {}\n", sys.state_name(x), if a { "accepted" } else { "rejected" });
                    rows.push(json!({ "state": sys.state_name(x), "accepted": a }));
                }
                return Ok(CommandResult::ok(
                    "omega",
                    plain,
                    json!({ "subcommand": "omega", "system": sys.name(), "word": w.to_string(), "states": rows }),
                ));
            }
            let lo = finite_candidate(&sys, *bound)?;
            let hi = maximal_candidate(&sys, *bound)?;
            let mut plain = String::new();
            let mut reports = Vec::new();
            let mut ok = true;
            for (label, cand) in [("minimal", &lo), ("maximal", &hi)] {
                let r = check_infinite_solution(&sys, cand, *bound)?;
                ok &= r.passed();
                plain += &candidate_line(label, &r);
                plain.push('\n');
                let violations: Vec<String> = r.violations.iter().map(|v| v.to_string()).collect();
                reports.push(json!({ "candidate": label, "passed": r.passed(),
                                     "words_checked": r.words_checked, "violations": violations }));
            }
            let mut rows = Vec::new();
            for x in selected(&sys, state)? {
                let periodic: Vec<String> = hi[x.0].periodic.iter().map(|w| w.to_string()).collect();
                plain += &format!("{}: {{{}}}\n", sys.state_name(x), periodic.join(", "));
                rows.push(json!({ "state": sys.state_name(x), "periodic": periodic }));
            }
            let mut result = CommandResult::ok(
                "omega",
                plain,
                json!({ "subcommand": "omega", "system": sys.name(), "bound": bound,
                        "candidates": reports, "states": rows }),
            );
            result.status = if ok { 0 } else { 1 };
            Ok(result)
        }
        Command::Check { file, depth, list_cap, seed } => {
            let sys = load(file)?;
            let lines = check_system(&sys, depth.depth, list_cap.list_cap, *seed)?;
            let ok = lines.iter().all(|(pass, _)| *pass);
            let plain = lines.iter().map(|(_, l)| format!("{l}\n")).collect();
            let checks: Vec<Value> = lines
                .iter()
                .map(|(pass, l)| json!({ "passed": pass, "report": l }))
                .collect();
            let mut result = CommandResult::ok(
                "check",
                plain,
                json!({ "subcommand": "check", "system": sys.name(), "depth": depth.depth, "checks": checks }),
            );
            result.status = if ok { 0 } else { 1 };
            Ok(result)
        }
        Command::CheckLaws { seed, cases } => {
            let reports = all_suites(*seed, *cases);
            let mut result = law_result("check-laws", &reports);
            result.json["seed"] = json!(seed);
            Ok(result)
        }
        Command::Enumerate { file, depth, list_cap } => {
            let sys = load(file)?;
            let style = TermStyle::for_functor(sys.functor());
            let terms = enumerate_terms(sys.functor(), depth.depth, list_cap.list_cap);
            let rendered: Vec<String> = terms.iter().map(|t| style.render(t)).collect();
            let plain = rendered.iter().map(|t| format!("{t}\n")).collect();
            Ok(CommandResult::ok(
                "enumerate",
                plain,
                json!({ "subcommand": "enumerate", "functor": sys.functor().to_string(),
                        "depth": depth.depth, "list_cap": list_cap.list_cap, "terms": rendered }),
            ))
        }
    }
}

fn law_result(name: &str, reports: &[LawReport]) -> CommandResult {
    let ok = reports.iter().all(|r| r.passed());
    let plain = reports.iter().map(|r| format!("{r}\n")).collect();
    let suites: Vec<Value> = reports
        .iter()
        .map(|r| json!({ "name": r.name, "cases": r.cases, "passed": r.passed(), "counterexamples": r.failures }))
        .collect();
    let mut result = CommandResult::ok(name, plain, json!({ "subcommand": name, "suites": suites }));
    result.status = if ok { 0 } else { 1 };
    result
}

/// Every check that applies to `sys`, as `(passed, report line)`.
pub fn check_system(sys: &System, depth: usize, list_cap: usize, seed: u64) -> Result<Vec<(bool, String)>, Error> {
    let l = law(sys);
    let mut out = Vec::new();
    for r in [monad_laws(sys.tag(), seed, 200), distributive_axioms_for(sys.tag(), sys.functor(), seed, 200)] {
        out.push((r.passed(), r.to_string()));
    }
    let square = check_coinduction_square(sys, &l, depth)?;
    out.push((square.passed(), square.to_string()));
    let finality = perturbation_search(sys, &l, depth)?;
    out.push((finality.passed(), finality.to_string()));

    let lts = LtsShape::of(sys.functor()).is_some();
    let traces = finite_trace(sys, &l, depth)?;
    let oracle = match sys.tag() {
        MonadTag::Powerset if lts => Some(("nondeterministic", trace_oracle_lts(sys, depth)? == traces)),
        MonadTag::Subdist if lts => Some(("probabilistic", trace_oracle_plts(sys, depth)? == traces)),
        MonadTag::Lift if lts => {
            let exact = trace_lift_exact(sys)?;
            let settled = finite_trace(sys, &l, sys.len() + 1)?;
            Some(("exact lift", settled.values() == exact.as_slice()))
        }
        _ => None,
    };
    if let Some((kind, ok)) = oracle {
        out.push((ok, format!("{} {kind} oracle agrees at depth {depth}", verdict(ok))));
    }
    if sys.tag() == MonadTag::Powerset {
        let r = check_expressive(sys, &l, depth, list_cap)?;
        out.push((r.passed(), r.to_string()));
        if lts {
            let bound = depth.max(1);
            for (label, cand) in [
                ("minimal", finite_candidate(sys, bound)?),
                ("maximal", maximal_candidate(sys, bound)?),
            ] {
                let r = check_infinite_solution(sys, &cand, bound)?;
                out.push((r.passed(), candidate_line(label, &r)));
            }
        }
    }
    Ok(out)
}

fn candidate_line(label: &str, r: &SolutionReport) -> String {
    let mut line = format!(
        "{} {label} infinite-trace candidate at bound {} ({} checks)",
        verdict(r.passed()),
        r.bound,
        r.words_checked
    );
    for v in &r.violations {
        line += &format!("\n  {v}");
    }
    line
}
