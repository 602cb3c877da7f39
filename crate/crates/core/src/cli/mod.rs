//! Commands over `.toast` documents, shared by the binary and the tests.
//!
//! Every command produces a [`ReportEnvelope`] plus a plain-text rendering
//! and an exit code: 0 pass, 1 violation or counterexample, 2 usage or
//! parse error, 3 bound exceeded.

mod document;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::constraints::Valuation;
use crate::processes::{run, RunPolicy, RunStatus};
use crate::rational::Rational;
use crate::semantics::{all_steps, check_progress, compatible, ExploreLimits, Verdict};
use crate::types::check_well_formed;

pub use document::{parse_valuation, DocError, SideDecl, SpecFile, SystemDecl};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BOUND: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Check { ty: String, at: Option<String> },
    Dual { ty: String },
    Progress { system: String, limits: ExploreLimits },
    Compat { system: String },
    Run { process: String, seed: u64, fuel: usize },
    Simulate { system: String, trace_len: usize, seed: u64 },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Dual { .. } => "dual",
            Command::Progress { .. } => "progress",
            Command::Compat { .. } => "compat",
            Command::Run { .. } => "run",
            Command::Simulate { .. } => "simulate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEnvelope {
    pub command: String,
    pub input: InputDigest,
    pub verdict: String,
    pub diagnostics: Vec<String>,
    pub result: Value,
    pub timing_ms: f64,
}

impl ReportEnvelope {
    /// The envelope as JSON with the timing field removed, for comparing
    /// runs.
    pub fn stable_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("envelope serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing_ms");
        }
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub envelope: ReportEnvelope,
    pub text: String,
    pub exit_code: i32,
}

impl Outcome {
    pub fn json(&self) -> String {
        serde_json::to_string_pretty(&self.envelope).expect("envelope serializes")
    }
}

struct Body {
    verdict: String,
    diagnostics: Vec<String>,
    result: Value,
    text: String,
    exit_code: i32,
}

fn usage_error(msg: String) -> Body {
    Body {
        verdict: "error".to_string(),
        diagnostics: vec![msg.clone()],
        result: Value::Null,
        text: format!("error: {msg}\n"),
        exit_code: EXIT_USAGE,
    }
}

pub fn digest(src: &str) -> String {
    hex::encode(Sha256::digest(src.as_bytes()))
}

/// Runs `cmd` on the document `src`, read from `path`.
pub fn execute(path: &str, src: &str, cmd: &Command) -> Outcome {
    let start = Instant::now();
    let body = match SpecFile::parse(src) {
        Ok(doc) => dispatch(&doc, cmd).unwrap_or_else(|e| usage_error(e.to_string())),
        Err(e) => usage_error(format!("{path}: {e}")),
    };
    let envelope = ReportEnvelope {
        command: cmd.name().to_string(),
        input: InputDigest {
            path: path.to_string(),
            sha256: digest(src),
        },
        verdict: body.verdict,
        diagnostics: body.diagnostics,
        result: body.result,
        timing_ms: start.elapsed().as_secs_f64() * 1000.0,
    };
    Outcome {
        envelope,
        text: body.text,
        exit_code: body.exit_code,
    }
}

fn dispatch(doc: &SpecFile, cmd: &Command) -> Result<Body, DocError> {
    Ok(match cmd {
        Command::Check { ty, at } => {
            let s = doc.ty(ty)?;
            let clocks = doc.clocks_for(s);
            let v = match at {
                Some(src) => parse_valuation(src, &clocks)?,
                None => Valuation::zero(&clocks),
            };
            let report = check_well_formed(s, &v);
            let diagnostics: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            let verdict = if report.verdict { "well-formed" } else { "ill-formed" };
            let mut text = format!("{ty}: {verdict} at {v}\n");
            for d in &diagnostics {
                text.push_str(&format!("  {d}\n"));
            }
            Body {
                verdict: verdict.to_string(),
                diagnostics,
                result: json!(report),
                text,
                exit_code: if report.verdict { EXIT_PASS } else { EXIT_VIOLATION },
            }
        }
        Command::Dual { ty } => {
            let d = doc.ty(ty)?.dual();
            Body {
                verdict: "ok".to_string(),
                diagnostics: Vec::new(),
                result: json!({ "dual": d.to_string() }),
                text: format!("{d}\n"),
                exit_code: EXIT_PASS,
            }
        }
        Command::Progress { system, limits } => {
            let sys = doc.system(system)?;
            let report = check_progress(&sys, limits);
            let mut text = format!("{system}: {} ({} states)\n", report.verdict, report.states);
            if let Some(r) = &report.reason {
                text.push_str(&format!("  {r}\n"));
            }
            text.push_str(&report.trace_lines());
            Body {
                verdict: report.verdict.to_string(),
                diagnostics: report.reason.iter().cloned().collect(),
                result: json!(report),
                text,
                exit_code: match report.verdict {
                    Verdict::Ok => EXIT_PASS,
                    Verdict::Counterexample => EXIT_VIOLATION,
                    Verdict::BoundExceeded => EXIT_BOUND,
                },
            }
        }
        Command::Compat { system } => {
            let sys = doc.system(system)?;
            let report = compatible(&sys);
            let verdict = if report.compatible { "compatible" } else { "incompatible" };
            let mut text = format!("{system}: {verdict}\n");
            if let Some(r) = &report.reason {
                text.push_str(&format!("  {r}\n"));
            }
            Body {
                verdict: verdict.to_string(),
                diagnostics: report.reason.iter().cloned().collect(),
                result: json!(report),
                text,
                exit_code: if report.compatible { EXIT_PASS } else { EXIT_VIOLATION },
            }
        }
        Command::Run { process, seed, fuel } => {
            let p = doc.process(process)?;
            let policy = RunPolicy {
                seed: *seed,
                fuel: *fuel,
                ..RunPolicy::default()
            };
            let res = run(p, &policy);
            let mut text: String = res.trace.iter().map(|e| format!("{e}\n")).collect();
            text.push_str(&format!("{} at time {}\n", res.status, res.time));
            let (verdict, exit_code) = match &res.status {
                RunStatus::Completed => ("completed", EXIT_PASS),
                RunStatus::Error { .. } => ("error", EXIT_VIOLATION),
                RunStatus::Stuck { .. } => ("stuck", EXIT_VIOLATION),
                RunStatus::FuelExhausted => ("fuel-exhausted", EXIT_BOUND),
            };
            let diagnostics = match &res.status {
                RunStatus::Completed => Vec::new(),
                other => vec![other.to_string()],
            };
            Body {
                verdict: verdict.to_string(),
                diagnostics,
                result: json!(res),
                text,
                exit_code,
            }
        }
        Command::Simulate {
            system,
            trace_len,
            seed,
        } => simulate(doc, system, *trace_len, *seed)?,
    })
}

/// A seeded walk through the system semantics.
fn simulate(doc: &SpecFile, name: &str, trace_len: usize, seed: u64) -> Result<Body, DocError> {
    let mut sys = doc.system(name)?;
    let limits = ExploreLimits::default();
    let horizon = limits.horizon_for(&sys);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::new();
    let mut text = format!("0 start {sys}\n");
    let (verdict, reason, exit_code) = loop {
        if sys.is_final() {
            break ("final", None, EXIT_PASS);
        }
        if sys.left.queue.len() > limits.max_queue || sys.right.queue.len() > limits.max_queue {
            break ("bound-exceeded", Some(format!("a queue holds more than {} messages", limits.max_queue)), EXIT_BOUND);
        }
        if steps.len() >= trace_len {
            break ("truncated", None, EXIT_PASS);
        }
        let options = match all_steps(&sys, horizon) {
            Ok(o) => o,
            Err(e) => break ("counterexample", Some(e.to_string()), EXIT_VIOLATION),
        };
        if options.is_empty() {
            break ("stuck", Some(format!("no step from {sys}")), EXIT_VIOLATION);
        }
        let step = options[rng.gen_range(0..options.len())].clone();
        let line = step.describe();
        text.push_str(&format!("{} {line} {}\n", steps.len() + 1, step.target));
        steps.push(json!({ "step": line, "state": step.target.to_string() }));
        sys = step.target;
    };
    text.push_str(&format!("{verdict}\n"));
    if let Some(r) = &reason {
        text.push_str(&format!("  {r}\n"));
    }
    Ok(Body {
        verdict: verdict.to_string(),
        diagnostics: reason.into_iter().collect(),
        result: json!({ "steps": steps, "horizon": horizon }),
        text,
        exit_code,
    })
}

/// Parses `3/2`-style rationals for command-line flags.
pub fn parse_rational_flag(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}
