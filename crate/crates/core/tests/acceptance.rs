//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toast::cli::SpecFile;
use toast::constraints::{clock_set, equivalent, eval, parse_constraint, past, shift, Clock, Constraint, Valuation, ZoneSet};
use toast::generate::{random_constraint, random_valuation, ProcGen, TypeGen};
use toast::processes::{phi, run, struct_normalize, ProcNode, RunPolicy, RunResult, RunStatus};
use toast::semantics::{
    admissible_delays, all_steps, check_progress, check_progress_observed, compatible, qconfig_time, system_steps,
    system_wait, ExploreLimits, InvariantMonitor, Rule, Side, System, Verdict,
};
use toast::types::{check_well_formed, parse_type, Condition, TypeNode};
use toast::Rational;

type Check = Result<String, String>;

fn fixture(name: &str) -> SpecFile {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    SpecFile::parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn r(n: i128) -> Rational {
    Rational::integer(n)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(s: &str) -> Constraint {
    parse_constraint(s).unwrap()
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let a = past(&c("3<x<5"));
    ensure(equivalent(&a, &c("x<5")), || format!("past(3<x<5) = {a}"))?;
    let b = past(&c("x>2"));
    ensure(equivalent(&b, &Constraint::True), || format!("past(x>2) = {b}"))?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!("past(3<x<5) = x<5, past(x>2) = true in {took:?}"))
}

fn criterion_2() -> Check {
    let doc = fixture("junk.toast");
    let v0 = Valuation::zero(&doc.clocks);
    let s = check_well_formed(doc.ty("S").unwrap(), &v0);
    ensure(!s.verdict && s.has(Condition::Feasibility), || format!("S: {:?}", s.violations))?;
    let paths: Vec<String> = s.violations.iter().map(|v| v.path_string()).collect();
    ensure(paths == ["!a"], || format!("S violations at {paths:?}"))?;
    for name in ["S1", "S2"] {
        let rep = check_well_formed(doc.ty(name).unwrap(), &v0);
        ensure(rep.verdict, || format!("{name}: {:?}", rep.violations))?;
    }
    Ok("S rejected (feasibility at !a); S1, S2 accepted".into())
}

fn criterion_3() -> Check {
    let doc = fixture("unsafe_mixed.toast");
    let v0 = Valuation::zero(&doc.clocks);
    let s1 = check_well_formed(doc.ty("S1").unwrap(), &v0);
    ensure(!s1.verdict && s1.violations.iter().all(|v| v.condition == Condition::MixedChoice), || {
        format!("S1: {:?}", s1.violations)
    })?;
    let safe = check_well_formed(doc.ty("Safe").unwrap(), &v0);
    ensure(safe.verdict, || format!("Safe: {:?}", safe.violations))?;
    // The unchecked protocol really does deadlock with both queues full.
    let rep = check_progress(&doc.system("Unsafe").unwrap(), &ExploreLimits::default());
    ensure(rep.verdict == Verdict::Counterexample, || format!("Unsafe: {}", rep.verdict))?;
    let last = rep.final_state.as_ref().unwrap();
    ensure(!last.left.queue.is_empty() && !last.right.queue.is_empty(), || format!("final state {last}"))?;
    let ok = check_progress(&doc.system("SafePair").unwrap(), &ExploreLimits::default());
    ensure(ok.verdict == Verdict::Ok, || format!("SafePair: {}", ok.verdict))?;
    Ok("S1 fails mixed-choice and deadlocks on crossed queues; disjoint variant accepted and progresses".into())
}

fn criterion_4() -> Check {
    let doc = fixture("weak_persistency.toast");
    let v0 = Valuation::zero(&doc.clocks);
    let s = doc.ty("S").unwrap();
    for (name, t) in [("S", s.clone()), ("dual S", s.dual()), ("Partner", doc.ty("Partner").unwrap().clone())] {
        let rep = check_well_formed(&t, &v0);
        ensure(rep.verdict, || format!("{name}: {:?}", rep.violations))?;
    }
    let pair = doc.system("Pair").unwrap();
    let later = system_wait(&pair, r(5)).map_err(|(side, why)| format!("wait(5) refused on {side:?}: {why}"))?;
    let timeout_sent = system_steps(&later)
        .map_err(|e| e.to_string())?
        .iter()
        .any(|s| s.rule == Rule::CommR && s.message.as_ref().is_some_and(|m| m.label == "timeout"));
    ensure(timeout_sent, || format!("no timeout send from {later}"))?;

    let pending = doc.system("Pending").unwrap();
    let y = Clock::new("y");
    for start in [r(0), r(2), Rational::new(11, 4)] {
        let mut sys = pending.clone();
        sys.right.valuation.set(y.clone(), start);
        for t in [Rational::new(1, 4), r(1), r(5)] {
            match system_wait(&sys, t) {
                Err((Side::Right, _)) => {}
                other => return Err(format!("wait({t}) at y={start}: {other:?}")),
            }
            ensure(qconfig_time(&sys.right, t).is_err(), || format!("partner waits {t} at y={start}"))?;
        }
        let ds = admissible_delays(&sys, r(7));
        ensure(ds.is_empty(), || format!("admissible delays at y={start}: {ds:?}"))?;
    }
    // Once data can no longer be received, time flows again.
    let mut stale = pending.clone();
    stale.right.valuation.set(y, r(4));
    ensure(system_wait(&stale, r(1)).is_ok(), || "no wait at y=4".into())?;
    Ok("wait(5) admissible from zero and enables !timeout; no wait with data queued and y<3".into())
}

struct Exploration {
    ok: usize,
    counterexamples: usize,
    bounded: usize,
    states: usize,
    waits: usize,
    violations: Vec<String>,
    took: Duration,
    mutants: usize,
    mutant_cex: usize,
    mutant_failures: Vec<String>,
    fixture_failures: Vec<String>,
}

/// A counterexample state is genuinely stuck: not final, and no send or
/// reception now or after any delay sampled at guard boundaries.
fn is_stuck(sys: &System) -> bool {
    let horizon = sys.max_constant() + r(2);
    let moves = |s: &System| system_steps(s).map(|v| !v.is_empty()).unwrap_or(false);
    if sys.is_final() || moves(sys) {
        return false;
    }
    match all_steps(sys, horizon) {
        Ok(steps) => steps.iter().all(|w| w.rule == Rule::Wait && !moves(&w.target)),
        Err(_) => true,
    }
}

fn explore_all() -> Exploration {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let gen = TypeGen::default();
    let clocks = clock_set(["x", "y"]);
    let limits = ExploreLimits::default();
    let mut out = Exploration {
        ok: 0,
        counterexamples: 0,
        bounded: 0,
        states: 0,
        waits: 0,
        violations: Vec::new(),
        took: Duration::ZERO,
        mutants: 0,
        mutant_cex: 0,
        mutant_failures: Vec::new(),
        fixture_failures: Vec::new(),
    };
    let start = Instant::now();
    for _ in 0..200 {
        let t = gen.well_formed(&mut rng);
        let sys = System::new(t.clone(), t.dual(), &clocks);
        let mut mon = InvariantMonitor::default();
        let rep = check_progress_observed(&sys, &limits, &mut mon);
        match rep.verdict {
            Verdict::Ok => out.ok += 1,
            Verdict::Counterexample => {
                out.counterexamples += 1;
                out.violations.push(format!("counterexample for {t}: {:?}", rep.reason));
            }
            Verdict::BoundExceeded => {
                out.bounded += 1;
                out.violations.push(format!("bound exceeded for {t}"));
            }
        }
        out.states += mon.states;
        out.waits += mon.waits;
        out.violations.extend(mon.violations.into_iter().map(|v| format!("{t}: {v}")));
    }
    // The shipped protocols that are expected to progress.
    for (file, name) in [("throttle.toast", "throttle2"), ("throttle.toast", "throttle3"), ("end_only.toast", "Ends"), ("ping_pong.toast", "Sys"), ("mixed_ping_pong.toast", "Sys")] {
        let sys = fixture(file).system(name).unwrap();
        let mut mon = InvariantMonitor::default();
        let rep = check_progress_observed(&sys, &limits, &mut mon);
        if rep.verdict != Verdict::Ok {
            out.fixture_failures.push(format!("{name}: {}", rep.verdict));
        }
        out.violations.extend(mon.violations.into_iter().map(|v| format!("{name}: {v}")));
    }
    out.took = start.elapsed();

    let conditions = [Condition::Feasibility, Condition::MixedChoice];
    for i in 0..50 {
        let t = gen.violating(&mut rng, conditions[i % 2]);
        let sys = System::new(t.clone(), t.dual(), &clocks);
        out.mutants += 1;
        let rep = check_progress(&sys, &limits);
        if rep.verdict == Verdict::Counterexample {
            out.mutant_cex += 1;
            match &rep.final_state {
                Some(last) if is_stuck(last) => {}
                Some(last) => out.mutant_failures.push(format!("{t}: trace ends in {last}, which can move")),
                None => out.mutant_failures.push(format!("{t}: counterexample without a state")),
            }
        }
    }
    out
}

fn criterion_5(ex: &Exploration) -> Check {
    ensure(ex.ok == 200 && ex.counterexamples == 0 && ex.bounded == 0, || {
        format!(
            "{} ok, {} counterexamples, {} bounded; first: {:?}",
            ex.ok,
            ex.counterexamples,
            ex.bounded,
            ex.violations.first()
        )
    })?;
    ensure(ex.fixture_failures.is_empty(), || format!("{:?}", ex.fixture_failures))?;
    ensure(ex.took < Duration::from_secs(300), || format!("took {:?}", ex.took))?;
    ensure(ex.mutant_failures.is_empty(), || format!("{:?}", ex.mutant_failures))?;
    let flood = check_progress(&fixture("unbounded_send.toast").system("Sys").unwrap(), &ExploreLimits::default());
    ensure(flood.verdict == Verdict::BoundExceeded, || format!("unbounded sender: {}", flood.verdict))?;
    Ok(format!(
        "200/200 ok in {:.1?}; {} of {} single-violation types gave counterexamples, all ending stuck",
        ex.took, ex.mutant_cex, ex.mutants
    ))
}

fn criterion_6(ex: &Exploration) -> Check {
    ensure(ex.violations.is_empty(), || format!("{} violations, first: {}", ex.violations.len(), ex.violations[0]))?;
    ensure(ex.waits > 0, || "no positive wait observed".into())?;
    // The monitor's compatibility check itself, on the shipped states.
    let doc = fixture("compat.toast");
    for (name, expect) in [("Pair", true), ("Drained", true), ("Crossed", false)] {
        let got = compatible(&doc.system(name).unwrap()).compatible;
        ensure(got == expect, || format!("{name}: compatible = {got}"))?;
    }
    Ok(format!("0 violations over {} states and {} positive waits", ex.states, ex.waits))
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let names = ["x", "y"];
    let clocks = clock_set(names);
    let quarter = Rational::new(1, 4);
    let (mut evals, mut pasts) = (0usize, 0usize);
    for _ in 0..1000 {
        let size = rng.gen_range(1..=4);
        let delta = random_constraint(&mut rng, &names, 10, size);
        let zones = ZoneSet::from_constraint(&delta, &clocks).map_err(|e| e.to_string())?;
        let down = past(&delta);
        for _ in 0..1000 {
            let v = random_valuation(&mut rng, &names, 6, 4);
            let direct = eval(&v, &delta).map_err(|e| e.to_string())?;
            ensure(direct == zones.contains(&v), || format!("{delta} at {v}: eval {direct}"))?;
            evals += 1;
        }
        // With guard constants in halves, delays on the quarter grid reach
        // every region from a valuation on the half grid.
        for _ in 0..1000 {
            let v = random_valuation(&mut rng, &names, 6, 2);
            let claimed = eval(&v, &down).map_err(|e| e.to_string())?;
            let oracle = (0..=28).any(|k| {
                let w = shift(&v, quarter * r(k)).unwrap();
                eval(&w, &delta).unwrap()
            });
            ensure(claimed == oracle, || format!("past of {delta} at {v}: {claimed}, sampled {oracle}"))?;
            pasts += 1;
        }
    }
    Ok(format!("{evals} membership checks and {pasts} past checks agree"))
}

fn calls(res: &RunResult, def: &str) -> usize {
    res.events("call").filter(|e| e.detail.starts_with(def)).count()
}

fn criterion_8() -> Check {
    let doc = fixture("mixed_ping_pong.toast");
    let main = doc.process("Main").unwrap();
    let scripted = run(main, &RunPolicy::scripted([r(1), r(1), r(1), r(4)]));
    let seeded = run(main, &RunPolicy::seeded(2));
    for (how, res) in [("script", &scripted), ("seed 2", &seeded)] {
        ensure(res.status == RunStatus::Completed, || format!("{how}: {}", res.status))?;
        let loops = calls(res, "X<");
        ensure(loops >= 3, || format!("{how}: {loops} loops"))?;
        let last_send = res.events("send").last().map(|e| e.detail.clone()).unwrap_or_default();
        ensure(res.events("timeout").count() >= 1 && last_send.ends_with("! timeout"), || {
            format!("{how}: last send `{last_send}`")
        })?;
    }

    let throttle = fixture("throttle.toast");
    for (name, m) in [("Late2", 2), ("Late3", 3)] {
        let res = run(throttle.process(name).unwrap(), &RunPolicy::default());
        ensure(res.status == RunStatus::Completed, || format!("{name}: {}", res.status))?;
        let sends: Vec<&str> = res.events("send").map(|e| e.detail.as_str()).collect();
        let msgs = sends.iter().take_while(|d| d.ends_with("! msg")).count();
        ensure(msgs == m && sends.len() == m + 1 && sends[m].ends_with("! tout"), || format!("{name}: {sends:?}"))?;
        ensure(res.events("recv").all(|e| !e.detail.contains("ack")), || format!("{name}: ack received"))?;
    }

    let param = fixture("parametric_timeout.toast");
    let main = param.process("Main").unwrap();
    let mut delays = std::collections::BTreeSet::new();
    for seed in 0..20 {
        let res = run(main, &RunPolicy::seeded(seed));
        ensure(res.status == RunStatus::Completed, || format!("seed {seed}: {}", res.status))?;
        let set = res.events("set").next().ok_or("no set")?.time;
        let fired = res.events("timeout").next().ok_or("no timeout")?.time;
        ensure(fired - set == r(3), || format!("seed {seed}: set at {set}, timeout at {fired}"))?;
        delays.insert(res.events("det").next().ok_or("no det")?.detail.clone());
    }
    ensure(delays.len() >= 3, || format!("only sampled {delays:?}"))?;

    let errs = run(fixture("err_deadline.toast").process("Main").unwrap(), &RunPolicy::default());
    ensure(matches!(errs.status, RunStatus::Error { .. }), || format!("err deadline: {}", errs.status))?;
    let empty = run(fixture("empty_session.toast").process("Main").unwrap(), &RunPolicy::default());
    ensure(empty.status == RunStatus::Completed, || format!("empty session: {}", empty.status))?;
    Ok(format!(
        "ping-pong {} and {} loops then timeout; throttle 2 and 3 msg then tout; timeout at set+3 over {} distinct delays",
        calls(&scripted, "X<"),
        calls(&seeded, "X<"),
        delays.len()
    ))
}

fn criterion_9() -> Check {
    let p = |s: &str| toast::processes::parse_process(s).unwrap();
    let h = Rational::new(1, 2);
    // (case, term, t, expected result or None when undefined)
    let cases: [(&str, &str, Rational, Option<&str>); 12] = [
        ("recv, no timeout", "from p recv { a -> end }", r(9), Some("from p recv { a -> end }")),
        ("recv, e > t", "from p recv { a -> end } after 3 { err }", h, Some("from p recv { a -> end } after 5/2 { err }")),
        ("recv, e = t", "from p recv { a -> end } after 3 { err }", r(3), Some("from p recv { a -> end } after 0 { err }")),
        ("recv, e < t", "from p recv { a -> end } after 1 { delay(4).end }", r(3), Some("delay(2).end")),
        ("delay, t' >= t", "delay(5).end", r(2), Some("delay(3).end")),
        ("delay, t' < t", "delay(1).delay(4).end", r(3), Some("delay(2).end")),
        ("par", "(delay(2).end | from p recv { a -> end } after 3 { end })", r(1), Some("(delay(1).end | from p recv { a -> end } after 2 { end })")),
        ("par, wait meets neq", "new (p,q) { from p recv { a -> end } | end | pq:[] | qp:[a] }", r(1), None),
        ("end, err", "(end | err)", r(4), Some("(end | err)")),
        ("scope and buffers", "new (p,q) { delay(3).end | end | pq:[b] | qp:[] }", r(1), Some("new (p,q) { delay(2).end | end | pq:[b] | qp:[] }")),
        ("def", "def X(; ; ) = to p ! a.end in delay(3).end", r(1), Some("def X(; ; ) = to p ! a.end in delay(2).end")),
        ("send is instantaneous", "to p ! a.end", r(1), None),
    ];
    for (case, src, t, expect) in cases {
        let got = phi(t, &p(src)).ok().map(|q| struct_normalize(&q));
        let want = expect.map(|e| struct_normalize(&p(e)));
        ensure(got == want, || format!("{case}: got {got:?}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let gen = ProcGen::default();
    let mut defined = 0;
    for _ in 0..200 {
        let q = gen.session(&mut rng);
        let t1 = Rational::new(rng.gen_range(1..=16), 4);
        let t2 = Rational::new(rng.gen_range(1..=16), 4);
        let Ok(a) = phi(t1, &q) else { continue };
        let Ok(b) = phi(t2, &a) else { continue };
        let whole = phi(t1 + t2, &q).map_err(|e| format!("{q}: {t1}+{t2} undefined: {e}"))?;
        ensure(struct_normalize(&whole) == struct_normalize(&b), || format!("{q}: {t1} then {t2}"))?;
        defined += 1;
    }
    ensure(defined >= 50, || format!("only {defined} random terms let time pass"))?;
    Ok(format!("{} cases; additivity on 200 random sessions ({defined} defined)", cases.len()))
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let gen = ProcGen {
        instant_prefixes: true,
        ..ProcGen::default()
    };
    for _ in 0..500 {
        let q = gen.session(&mut rng);
        let z = ProcNode::Delay(Rational::zero(), Box::new(q.clone()));
        ensure(struct_normalize(&z) == struct_normalize(&q), || format!("delay(0).{q}"))?;
    }
    let loose = TypeGen {
        disjoint_mixing: false,
        ..TypeGen::default()
    };
    for _ in 0..500 {
        let t = loose.random_type(&mut rng);
        ensure(t.dual().dual() == t, || format!("dual of dual of {t}"))?;
        ensure(t.is_end() || t.dual() != t, || format!("dual fixes {t}"))?;
    }
    let pp = fixture("ping_pong.toast");
    for t in pp.types.values().chain(fixture("end_only.toast").types.values()) {
        ensure(t.dual().dual() == *t, || format!("{t}"))?;
        let back: TypeNode = parse_type(&t.dual().to_string()).map_err(|e| e.to_string())?;
        ensure(back == t.dual(), || format!("reparse of dual {t}"))?;
    }
    Ok("500 processes and 500 types".into())
}

fn main() {
    let ex = explore_all();
    let criteria: Vec<(u32, Box<dyn Fn() -> Check + '_>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(criterion_2)),
        (3, Box::new(criterion_3)),
        (4, Box::new(criterion_4)),
        (5, Box::new(|| criterion_5(&ex))),
        (6, Box::new(|| criterion_6(&ex))),
        (7, Box::new(criterion_7)),
        (8, Box::new(criterion_8)),
        (9, Box::new(criterion_9)),
        (10, Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (n, check) in criteria {
        let start = Instant::now();
        let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match res {
            Ok(msg) => println!("PASS criterion {n}: {msg} [{ms} ms]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {n}: {msg} [{ms} ms]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
