//! One line per acceptance criterion. Exits non-zero if any fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use kltrace::bisim::bisimilar;
use kltrace::distributivity::DistLaw;
use kltrace::functors::{LtsShape, Symbol, TermStyle};
use kltrace::gen::{exhaustive_lts, Sampler};
use kltrace::laws::all_suites;
use kltrace::monads::{ratio, MonadTag, TValue};
use kltrace::omega::{
    accepts_up_word, check_infinite_solution, finite_candidate, maximal_candidate, AnyWord, UPWord,
};
use kltrace::par::{map_range, Execution};
use kltrace::syntax::parse_system;
use kltrace::system::System;
use kltrace::testing::{check_expressive, theory_maps};
use kltrace::traces::{
    check_coinduction_square, finite_trace, perturbation_search, phi_step, trace_approximants,
    trace_equivalent, trace_lift_exact, trace_oracle_lts, trace_oracle_plts, TraceMap,
};

fn corpus_path(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "cli", "corpus", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn load(name: &str) -> System {
    parse_system(&std::fs::read_to_string(corpus_path(name)).unwrap()).unwrap()
}

fn law(sys: &System) -> DistLaw {
    DistLaw::canonical(sys.tag(), sys.functor().clone()).unwrap()
}

fn words(shape: &LtsShape, ws: &[&str]) -> Vec<kltrace::functors::Term> {
    ws.iter()
        .map(|w| {
            let letters: Vec<Symbol> = w.chars().map(|c| Symbol::new(&c.to_string())).collect();
            shape.word_term(&letters)
        })
        .collect()
}

type Outcome = (bool, String);
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn c1() -> Outcome {
    let r = kltrace_cli::run([
        "kltrace".to_string(),
        "trace".into(),
        corpus_path("running-nd.sys"),
        "--state".into(),
        "x".into(),
        "--depth".into(),
        "6".into(),
    ]);
    let golden = std::fs::read_to_string(corpus_path("running-nd.golden")).unwrap();
    let sys = load("running-nd.sys");
    let shape = LtsShape::of(sys.functor()).unwrap();
    let expected = TValue::set(words(&shape, &["a", "ab", "abb", "abbb", "abbbb"]));
    let m = finite_trace(&sys, &law(&sys), 6).unwrap();
    let ok = r.status == 0
        && r.output() == golden
        && m.get(sys.state_id("x").unwrap()) == &expected;
    (ok, r.output().trim_end().to_string())
}

fn c2() -> Outcome {
    let sys = load("running-prob.sys");
    let shape = LtsShape::of(sys.functor()).unwrap();
    let x = sys.state_id("x'").unwrap();
    let w = words(&shape, &["", "a", "aa", "aaa"]);
    let expected = TValue::dist(w.into_iter().zip([ratio(1, 3), ratio(1, 6), ratio(1, 12), ratio(1, 24)])).unwrap();
    let m = finite_trace(&sys, &law(&sys), 4).unwrap();
    (m.get(x) == &expected, format!("x': {}", m.render_state(&sys, x)))
}

fn c3() -> Outcome {
    let sys = load("running-prob.sys");
    let l = law(&sys);
    let x = sys.state_id("x'").unwrap();
    let mut m = TraceMap::bottom(&sys);
    let mut ok = true;
    let mut last = ratio(0, 1);
    for n in 1..=20u32 {
        m = phi_step(&sys, &l, &m).unwrap();
        let mass = m.get(x).mass();
        ok &= mass == ratio(2, 3) * (ratio(1, 1) - ratio(1, 2i64.pow(n))) && mass <= ratio(2, 3);
        last = mass;
    }
    (ok, format!("mass at n = 20: {last}"))
}

fn c4() -> Outcome {
    let sys = load("peano-cfg.sys");
    let t = sys.state_id("T").unwrap();
    let style = TermStyle::for_functor(sys.functor());
    let m = finite_trace(&sys, &law(&sys), 4).unwrap();
    let got: BTreeSet<String> = m.get(t).support().map(|x| style.render(x)).collect();
    let want: BTreeSet<String> = ["[0]", "[s [0]]", "[s [s [0]]]"].iter().map(|s| s.to_string()).collect();
    (got == want, format!("T: {}", m.render_state(&sys, t)))
}

fn c5() -> Outcome {
    let sys = load("classic.sys");
    let l = law(&sys);
    let (x, y) = (sys.state_id("x").unwrap(), sys.state_id("y").unwrap());
    let traces = (0..=8).all(|d| trace_equivalent(&sys, &l, x, y, d).unwrap());
    let bisim = bisimilar(&sys, x, y).unwrap();
    (
        traces && !bisim,
        format!("trace-equivalent up to depth 8: {traces}; bisimilar: {bisim}"),
    )
}

fn c6() -> Outcome {
    let sys = load("lift-trio.sys");
    let shape = LtsShape::of(sys.functor()).unwrap();
    let exact = trace_lift_exact(&sys).unwrap();
    let at = |n: &str| &exact[sys.state_id(n).unwrap().0];
    let ok = at("s0") == &TValue::lift(Some(words(&shape, &["a"])[0].clone()))
        && at("t0").is_bottom()
        && at("u0").is_bottom();
    let style = TermStyle::for_functor(sys.functor());
    let shown: Vec<String> = ["s0", "t0", "u0"]
        .iter()
        .map(|n| format!("{n}: {}", at(n).render_with(|t| style.render(t))))
        .collect();
    (ok, shown.join(", "))
}

/// The exhaustive sweep shared by criteria 7 and 10.
struct Sweep {
    powerset: Vec<System>,
    subdist: Vec<System>,
}

fn sweep() -> Sweep {
    Sweep {
        powerset: exhaustive_lts(MonadTag::Powerset, 3),
        subdist: exhaustive_lts(MonadTag::Subdist, 3),
    }
}

fn agrees(sys: &System, depth: usize) -> bool {
    let chain = trace_approximants(sys, &law(sys), depth, Execution::Sequential).unwrap();
    chain.iter().enumerate().skip(1).all(|(d, m)| {
        let oracle = match sys.tag() {
            MonadTag::Powerset => trace_oracle_lts(sys, d),
            _ => trace_oracle_plts(sys, d),
        };
        *m == oracle.unwrap()
    })
}

fn c7(s: &Sweep) -> Outcome {
    let mut mismatches = 0;
    for systems in [&s.powerset, &s.subdist] {
        mismatches += map_range(Execution::default(), systems.len(), |i| agrees(&systems[i], 4))
            .into_iter()
            .filter(|ok| !ok)
            .count();
    }
    let f = kltrace::functors::FunctorExpr::lts(["a", "b", "c"]);
    let random = map_range(Execution::default(), 200, |i| {
        let mut g = Sampler::new(1000 + i as u64);
        let n = 4 + i % 3;
        let tag = if i % 2 == 0 { MonadTag::Powerset } else { MonadTag::Subdist };
        agrees(&g.system(tag, &f, n), 5)
    });
    mismatches += random.iter().filter(|ok| !**ok).count();
    (
        mismatches == 0,
        format!(
            "{} + {} exhaustive systems to depth 4, 200 random with 4-6 states to depth 5, {mismatches} mismatches",
            s.powerset.len(),
            s.subdist.len()
        ),
    )
}

fn c8() -> Outcome {
    let reports = all_suites(0, 500);
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed()).map(|r| r.to_string()).collect();
    let min_cases = reports.iter().map(|r| r.cases).min().unwrap_or(0);
    (
        failed.is_empty() && min_cases >= 500,
        if failed.is_empty() {
            format!("{} suites, at least {min_cases} cases each", reports.len())
        } else {
            failed.join("; ")
        },
    )
}

const CORPUS: [&str; 5] = ["running-nd.sys", "running-prob.sys", "peano-cfg.sys", "classic.sys", "lift-trio.sys"];

fn c9() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for name in CORPUS {
        let sys = load(name);
        let l = law(&sys);
        let square = check_coinduction_square(&sys, &l, 5).unwrap();
        let edits = perturbation_search(&sys, &l, 5).unwrap();
        ok &= square.passed() && edits.passed();
        if !square.passed() {
            notes.push(square.to_string());
        }
        if !edits.passed() {
            notes.push(edits.to_string());
        }
        notes.push(format!("{}: {} edits", sys.name(), edits.edits_tried));
    }
    (ok, notes.join(", "))
}

fn c10(s: &Sweep) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["running-nd.sys", "peano-cfg.sys", "classic.sys"] {
        let sys = load(name);
        let r = check_expressive(&sys, &law(&sys), 5, 4).unwrap();
        if !r.passed() {
            notes.push(r.to_string());
        }
        ok &= r.passed();
    }
    let systems = &s.powerset;
    let violations: usize = map_range(Execution::default(), systems.len(), |i| {
        let sys = &systems[i];
        let l = law(sys);
        let traces = finite_trace(sys, &l, 4).unwrap();
        let theories = theory_maps(sys, &l, 4, 4).unwrap();
        let mut bad = 0;
        for x in sys.ids() {
            for y in sys.ids() {
                if traces.get(x) == traces.get(y) && theories[x.0].passed != theories[y.0].passed {
                    bad += 1;
                }
            }
        }
        bad
    })
    .into_iter()
    .sum();
    ok &= violations == 0;
    notes.push(format!(
        "th = tr on 3 corpus systems at depth 5; {} swept systems, {violations} inclusion violations",
        systems.len()
    ));
    (ok, notes.join("; "))
}

fn c11() -> Outcome {
    let sys = load("running-nd.sys");
    let (x, y) = (sys.state_id("x").unwrap(), sys.state_id("y").unwrap());
    let up = |t: &str| match t.parse::<AnyWord>().unwrap() {
        AnyWord::Periodic(w) => w,
        AnyWord::Finite(_) => unreachable!(),
    };
    let w1: UPWord = up("a.(b)^w");
    let memberships = accepts_up_word(&sys, x, &w1).unwrap()
        && accepts_up_word(&sys, y, &up("(b)^w")).unwrap()
        && !accepts_up_word(&sys, x, &up("(a)^w")).unwrap();
    let lo = check_infinite_solution(&sys, &finite_candidate(&sys, 6).unwrap(), 6).unwrap();
    let hi = check_infinite_solution(&sys, &maximal_candidate(&sys, 6).unwrap(), 6).unwrap();
    (
        memberships && lo.passed() && hi.passed(),
        format!(
            "memberships {}; minimal candidate {}; maximal candidate {}",
            if memberships { "as expected" } else { "wrong" },
            if lo.passed() { "passes" } else { "fails" },
            if hi.passed() { "passes" } else { "fails" }
        ),
    )
}

fn main() {
    let started = Instant::now();
    let s = sweep();
    let sweep_time = started.elapsed();
    let criteria: Vec<Criterion> = vec![
        ("running nondeterministic example", Box::new(c1)),
        ("running probabilistic example", Box::new(c2)),
        ("mass convergence", Box::new(c3)),
        ("peano grammar parse trees", Box::new(c4)),
        ("trace-equivalent but not bisimilar", Box::new(c5)),
        ("lift trio", Box::new(c6)),
        ("oracle equivalence sweep", Box::new(|| c7(&s))),
        ("law suites", Box::new(c8)),
        ("coinduction square and truncated finality", Box::new(c9)),
        ("testing coincidence", Box::new(|| c10(&s))),
        ("infinite traces", Box::new(c11)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = check();
        if !ok {
            failures += 1;
        }
        println!(
            "{} {:>2} {name} [{:.2}s]: {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed ({:.2}s total, sweep generation {:.2}s)",
        criteria.len() - failures,
        criteria.len(),
        started.elapsed().as_secs_f64(),
        sweep_time.as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
