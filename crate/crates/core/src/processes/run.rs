//! Deterministic scheduler over instantaneous and timed reductions.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constraints::Constraint;
use crate::rational::Rational;

use super::step::{active_err, det_grid, next_deadline, redexes, render_path, resolve_active, satisfies};
use super::time::{struct_normalize, time_step};
use super::{ProcNode, TimerEnv};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum DelayResolution {
    /// Seeded choice among the boundary samples and one interior point.
    #[default]
    Seeded,
    /// Durations used in order by successive Det steps; the seeded choice
    /// takes over once the script runs out.
    Scripted(Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPolicy {
    pub seed: u64,
    pub fuel: usize,
    pub delays: DelayResolution,
    /// Upper end of the sampled durations; by default the largest constant
    /// of the constraint plus 2.
    pub horizon: Option<Rational>,
}

impl Default for RunPolicy {
    fn default() -> Self {
        RunPolicy {
            seed: 0,
            fuel: 1000,
            delays: DelayResolution::Seeded,
            horizon: None,
        }
    }
}

impl RunPolicy {
    pub fn seeded(seed: u64) -> Self {
        RunPolicy {
            seed,
            ..RunPolicy::default()
        }
    }

    pub fn scripted(delays: impl IntoIterator<Item = Rational>) -> Self {
        RunPolicy {
            delays: DelayResolution::Scripted(delays.into_iter().collect()),
            ..RunPolicy::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Error { position: String },
    Stuck { position: String, reason: String },
    FuelExhausted,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Completed => f.write_str("completed"),
            RunStatus::Error { position } => write!(f, "error at {position}"),
            RunStatus::Stuck { position, reason } => write!(f, "stuck at {position}: {reason}"),
            RunStatus::FuelExhausted => f.write_str("fuel exhausted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub time: Rational,
    pub kind: String,
    pub detail: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.step, self.kind)?;
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunResult {
    pub trace: Vec<TraceEvent>,
    pub status: RunStatus,
    pub time: Rational,
    pub timers: TimerEnv,
    #[serde(rename = "final")]
    pub final_term: ProcNode,
}

impl RunResult {
    pub fn events<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a TraceEvent> + 'a {
        self.trace.iter().filter(move |e| e.kind == kind)
    }
}

struct DelayPicker {
    rng: ChaCha8Rng,
    script: VecDeque<Rational>,
    horizon: Option<Rational>,
    failure: Option<String>,
}

impl DelayPicker {
    fn pick(&mut self, var: &str, cond: &Constraint) -> Vec<Rational> {
        if let Some(t) = self.script.pop_front() {
            if satisfies(var, cond, t) {
                return vec![t];
            }
            self.failure = Some(format!("scripted delay {t} violates {cond}"));
            return Vec::new();
        }
        let grid = det_grid(var, cond, self.horizon);
        let mut cands: Vec<Rational> = grid.iter().copied().filter(|t| satisfies(var, cond, *t)).collect();
        // One interior point between two grid neighbours, kept if it
        // satisfies the constraint.
        if grid.len() >= 2 {
            let i = self.rng.gen_range(0..grid.len() - 1);
            let (lo, hi) = (grid[i], grid[i + 1]);
            let k = Rational::integer(self.rng.gen_range(1..16));
            let t = lo + (hi - lo) * k / Rational::integer(16);
            if satisfies(var, cond, t) && !cands.contains(&t) {
                cands.push(t);
            }
        }
        if cands.is_empty() {
            return cands;
        }
        let i = self.rng.gen_range(0..cands.len());
        vec![cands[i]]
    }
}

/// Runs `p` until it completes, errs, gets stuck or runs out of fuel.
///
/// Instantaneous steps take priority; the leftmost redex fires first. When
/// none is left, time advances to the earliest pending delay or timeout.
pub fn run(p: &ProcNode, policy: &RunPolicy) -> RunResult {
    let mut picker = DelayPicker {
        rng: ChaCha8Rng::seed_from_u64(policy.seed),
        script: match &policy.delays {
            DelayResolution::Seeded => VecDeque::new(),
            DelayResolution::Scripted(ts) => ts.iter().copied().collect(),
        },
        horizon: policy.horizon,
        failure: None,
    };
    let mut rho = TimerEnv::new();
    let mut term = struct_normalize(p);
    let mut time = Rational::zero();
    let mut trace = Vec::new();
    let finish = |trace, status, time, rho, term| RunResult {
        trace,
        status,
        time,
        timers: rho,
        final_term: term,
    };
    loop {
        if let Some(position) = active_err(&term) {
            return finish(trace, RunStatus::Error { position }, time, rho, term);
        }
        if super::is_completed(&term) {
            return finish(trace, RunStatus::Completed, time, rho, term);
        }
        if trace.len() >= policy.fuel {
            return finish(trace, RunStatus::FuelExhausted, time, rho, term);
        }
        term = match resolve_active(&rho, &term) {
            Ok(t) => t,
            Err(s) => {
                let status = RunStatus::Stuck {
                    position: s.position,
                    reason: s.reason,
                };
                return finish(trace, status, time, rho, term);
            }
        };
        let step = trace.len() + 1;
        let mut sampler = |v: &str, c: &Constraint| picker.pick(v, c);
        let found = redexes(&rho, &term, &mut sampler, true).into_iter().next();
        if let Some(rx) = found {
            let position = rx.position();
            let red = match rx.result {
                Ok(mut reds) if !reds.is_empty() => reds.swap_remove(0),
                Ok(_) => unreachable!("a redex always offers a reduction"),
                Err(reason) => {
                    let reason = picker.failure.take().unwrap_or(reason);
                    return finish(trace, RunStatus::Stuck { position, reason }, time, rho, term);
                }
            };
            if let Some(x) = &red.reset {
                rho.insert(x.clone(), Rational::zero());
            }
            trace.push(TraceEvent {
                step,
                time,
                kind: red.kind.to_string(),
                detail: red.detail,
            });
            term = struct_normalize(&red.node);
            continue;
        }
        let Some(t) = next_deadline(&term) else {
            let status = RunStatus::Stuck {
                position: render_path(&[]),
                reason: "no reduction and no pending delay".to_string(),
            };
            return finish(trace, status, time, rho, term);
        };
        match time_step(&rho, &term, t) {
            Ok((r, next)) => {
                rho = r;
                term = next;
                time = time + t;
                trace.push(TraceEvent {
                    step,
                    time,
                    kind: format!("delay({t})"),
                    detail: String::new(),
                });
            }
            Err(e) => {
                let status = RunStatus::Stuck {
                    position: e.blocking.clone(),
                    reason: e.to_string(),
                };
                return finish(trace, status, time, rho, term);
            }
        }
    }
}
