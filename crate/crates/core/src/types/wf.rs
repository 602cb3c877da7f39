//! The well-formedness judgement for types.
//!
//! The invariant of each state is synthesised bottom-up: a choice gets the
//! past of the disjunction of its guards, `end` gets `true`, a variable gets
//! its binding, and a recursion binds its variable to the invariant of its
//! body's head.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::constraints::{
    entails, eval, future_of, future_over, is_sat, past, reset_constraint, ClockSet, Constraint, Valuation,
};

use super::{PayloadSort, TypeNode};

pub type WfEnv = BTreeMap<String, Constraint>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unbound recursion variable `{0}`")]
pub struct GammaError(pub String);

/// Invariant of `S` under `A`.
pub fn gamma(s: &TypeNode, env: &WfEnv) -> Result<Constraint, GammaError> {
    match s {
        TypeNode::Choice(opts) => Ok(past(&Constraint::or_all(opts.iter().map(|o| o.guard.clone())))),
        TypeNode::End => Ok(Constraint::True),
        TypeNode::Var(a) => env.get(a).cloned().ok_or_else(|| GammaError(a.clone())),
        TypeNode::Rec(a, body) => {
            let head = gamma_head(body, env)?;
            let mut inner = env.clone();
            inner.insert(a.clone(), head);
            gamma(body, &inner)
        }
    }
}

/// Invariant of the first non-recursion constructor under a binder. Guards
/// never depend on continuations, so no fixpoint is needed.
fn gamma_head(s: &TypeNode, env: &WfEnv) -> Result<Constraint, GammaError> {
    match s {
        TypeNode::Rec(_, body) => gamma_head(body, env),
        other => gamma(other, env),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Feasibility,
    MixedChoice,
    Delegation,
    UnboundVar,
    DuplicateLabel,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Feasibility => "feasibility",
            Condition::MixedChoice => "mixed-choice",
            Condition::Delegation => "delegation",
            Condition::UnboundVar => "unbound-var",
            Condition::DuplicateLabel => "duplicate-label",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Option tags from the root (`!a`, `?c`, `rec a`, `<delegate>`); empty
    /// for the root itself.
    pub path: Vec<String>,
    pub condition: Condition,
    pub witness: String,
}

impl Violation {
    pub fn path_string(&self) -> String {
        if self.path.is_empty() {
            "(root)".to_string()
        } else {
            self.path.join("/")
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.condition, self.path_string(), self.witness)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WfReport {
    pub verdict: bool,
    pub violations: Vec<Violation>,
}

impl WfReport {
    pub fn has(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }

    pub fn at(&self, path: &[&str]) -> Vec<&Violation> {
        self.violations
            .iter()
            .filter(|v| v.path.iter().map(String::as_str).eq(path.iter().copied()))
            .collect()
    }
}

/// Checks `S` against the rules with `ν` as the starting valuation.
///
/// The mixed-choice premise is evaluated over the valuations that can reach
/// the choice: the delay-closure of the entry constraint of each state. At
/// a recursion binder whose variable is used, the entry constraint widens
/// to `true`.
pub fn check_well_formed(s: &TypeNode, v: &Valuation) -> WfReport {
    let mut violations = Vec::new();
    let env = WfEnv::new();
    match gamma(s, &env) {
        Ok(g) => match eval(v, &g) {
            Ok(true) => {}
            Ok(false) => violations.push(Violation {
                path: Vec::new(),
                condition: Condition::Feasibility,
                witness: format!("{v} does not satisfy {g}"),
            }),
            Err(e) => violations.push(Violation {
                path: Vec::new(),
                condition: Condition::Feasibility,
                witness: e.to_string(),
            }),
        },
        Err(GammaError(a)) => violations.push(Violation {
            path: Vec::new(),
            condition: Condition::UnboundVar,
            witness: a,
        }),
    }
    let mut clocks = v.clocks();
    clocks.extend(s.clocks());
    let ctx = future_of(v);
    check(s, &env, &ctx, &clocks, &mut Vec::new(), &mut violations);
    WfReport {
        verdict: violations.is_empty(),
        violations,
    }
}

fn check(s: &TypeNode, env: &WfEnv, ctx: &Constraint, clocks: &ClockSet, path: &mut Vec<String>, out: &mut Vec<Violation>) {
    match s {
        TypeNode::End => {}
        TypeNode::Var(a) => {
            if !env.contains_key(a) {
                out.push(Violation {
                    path: path.clone(),
                    condition: Condition::UnboundVar,
                    witness: a.clone(),
                });
            }
        }
        TypeNode::Rec(a, body) => {
            let head = match gamma_head(body, env) {
                Ok(h) => h,
                Err(GammaError(b)) => {
                    out.push(Violation {
                        path: path.clone(),
                        condition: Condition::UnboundVar,
                        witness: b,
                    });
                    return;
                }
            };
            let mut inner = env.clone();
            inner.insert(a.clone(), head);
            let body_ctx = if body.free_vars().contains(a) {
                Constraint::True
            } else {
                ctx.clone()
            };
            path.push(format!("rec {a}"));
            check(body, &inner, &body_ctx, clocks, path, out);
            path.pop();
        }
        TypeNode::Choice(opts) => {
            for (i, oi) in opts.iter().enumerate() {
                for oj in &opts[i + 1..] {
                    if oi.label == oj.label {
                        out.push(Violation {
                            path: path.clone(),
                            condition: Condition::DuplicateLabel,
                            witness: oi.label.clone(),
                        });
                    }
                    if oi.dir != oj.dir {
                        let both = ctx.clone().and(oi.guard.clone()).and(oj.guard.clone());
                        if is_sat(&both) {
                            out.push(Violation {
                                path: path.clone(),
                                condition: Condition::MixedChoice,
                                witness: format!("{}({}) and {}({}) overlap", oi.tag(), oi.guard, oj.tag(), oj.guard),
                            });
                        }
                    }
                }
            }
            for o in opts {
                path.push(o.tag());
                match gamma(&o.cont, env) {
                    Ok(g) => {
                        let after = reset_constraint(&o.guard, &o.resets);
                        if !entails(&after, &g) {
                            out.push(Violation {
                                path: path.clone(),
                                condition: Condition::Feasibility,
                                witness: format!("{after} does not entail {g}"),
                            });
                        }
                    }
                    Err(GammaError(a)) => out.push(Violation {
                        path: path.clone(),
                        condition: Condition::UnboundVar,
                        witness: a,
                    }),
                }
                if let PayloadSort::Delegate(init, session) = &o.payload {
                    path.push("<delegate>".to_string());
                    match gamma(session, &WfEnv::new()) {
                        Ok(g) => {
                            if !entails(init, &g) {
                                out.push(Violation {
                                    path: path.clone(),
                                    condition: Condition::Delegation,
                                    witness: format!("{init} does not entail {g}"),
                                });
                            }
                        }
                        Err(GammaError(a)) => out.push(Violation {
                            path: path.clone(),
                            condition: Condition::UnboundVar,
                            witness: a,
                        }),
                    }
                    // Failures inside the delegated session fail the
                    // delegation premise of this option.
                    let mut inner = Vec::new();
                    let mut own = session.clocks();
                    own.extend(init.clocks());
                    check(session, &WfEnv::new(), &future_over(init, &own), &own, &mut Vec::new(), &mut inner);
                    for v in inner {
                        let mut p = path.clone();
                        p.extend(v.path);
                        out.push(Violation {
                            path: p,
                            condition: Condition::Delegation,
                            witness: format!("{}: {}", v.condition, v.witness),
                        });
                    }
                    path.pop();
                }
                let next_ctx = future_over(&reset_constraint(&ctx.clone().and(o.guard.clone()), &o.resets), clocks);
                check(&o.cont, env, &next_ctx, clocks, path, out);
                path.pop();
            }
        }
    }
}
