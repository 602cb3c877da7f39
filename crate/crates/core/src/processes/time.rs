//! Time passing for processes.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::rational::{Extended, Rational};

use super::{Branch, ProcNode, TimeoutExpr, TimerEnv};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeoutError {
    #[error("unknown timer `{0}`")]
    UnknownTimer(String),
}

/// Value of `e` under `ρ`; negative results clamp to 0.
pub fn eval_timeout(e: &TimeoutExpr, rho: &TimerEnv) -> Result<Extended, TimeoutError> {
    match e {
        TimeoutExpr::Infinite => Ok(Extended::Infinite),
        TimeoutExpr::Linear { constant, terms } => {
            let mut v = *constant;
            for (x, k) in terms {
                let t = rho.get(x).ok_or_else(|| TimeoutError::UnknownTimer(x.clone()))?;
                v = v + *k * *t;
            }
            Ok(Extended::Finite(v.max(Rational::zero())))
        }
    }
}

/// Endpoints on which the term is waiting to receive.
pub fn wait_set(p: &ProcNode) -> BTreeSet<String> {
    match p {
        ProcNode::Receive { endpoint, .. } => BTreeSet::from([endpoint.clone()]),
        ProcNode::Scope(a, b, body) => {
            let mut s = wait_set(body);
            s.remove(a);
            s.remove(b);
            s
        }
        ProcNode::Def { cont, .. } => wait_set(cont),
        ProcNode::Par(l, r) => {
            let mut s = wait_set(l);
            s.extend(wait_set(r));
            s
        }
        _ => BTreeSet::new(),
    }
}

/// Endpoints with a non-empty inbound buffer.
pub fn neq_set(p: &ProcNode) -> BTreeSet<String> {
    match p {
        ProcNode::Buffer { to, msgs, .. } if !msgs.is_empty() => BTreeSet::from([to.clone()]),
        ProcNode::Scope(a, b, body) => {
            let mut s = neq_set(body);
            s.remove(a);
            s.remove(b);
            s
        }
        ProcNode::Def { cont, .. } => neq_set(cont),
        ProcNode::Par(l, r) => {
            let mut s = neq_set(l);
            s.extend(neq_set(r));
            s
        }
        _ => BTreeSet::new(),
    }
}

/// Why time cannot pass over a term.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct PhiUndefined {
    /// The subterm that blocks time, printed.
    pub blocking: String,
    pub reason: &'static str,
}

impl fmt::Display for PhiUndefined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "time cannot pass: {} at `{}`", self.reason, self.blocking)
    }
}

fn undefined(p: &ProcNode, reason: &'static str) -> PhiUndefined {
    let mut blocking = p.to_string();
    if blocking.len() > 80 {
        let cut = (0..=77).rev().find(|i| blocking.is_char_boundary(*i)).unwrap_or(0);
        blocking.truncate(cut);
        blocking.push_str("...");
    }
    PhiUndefined { blocking, reason }
}

/// The process after `t` units of time, when time can pass.
pub fn phi(t: Rational, p: &ProcNode) -> Result<ProcNode, PhiUndefined> {
    match p {
        ProcNode::Receive {
            endpoint,
            branches,
            after,
            timeout,
        } => match after.value() {
            Some(Extended::Infinite) => Ok(p.clone()),
            Some(Extended::Finite(e)) if e >= t => Ok(ProcNode::Receive {
                endpoint: endpoint.clone(),
                branches: branches.clone(),
                after: after.minus(t),
                timeout: timeout.clone(),
            }),
            Some(Extended::Finite(e)) => phi(t - e, timeout),
            None => Ok(ProcNode::Receive {
                endpoint: endpoint.clone(),
                branches: branches.clone(),
                after: after.minus(t),
                timeout: timeout.clone(),
            }),
        },
        ProcNode::Delay(d, cont) => {
            if *d >= t {
                Ok(ProcNode::Delay(*d - t, cont.clone()))
            } else {
                phi(t - *d, cont)
            }
        }
        ProcNode::Par(l, r) => {
            let (wl, wr) = (wait_set(l), wait_set(r));
            let (nl, nr) = (neq_set(l), neq_set(r));
            if !wl.is_disjoint(&nr) || !wr.is_disjoint(&nl) {
                return Err(undefined(p, "a waiting receiver has mail"));
            }
            Ok(ProcNode::par(phi(t, l)?, phi(t, r)?))
        }
        ProcNode::End | ProcNode::Err | ProcNode::Buffer { .. } => Ok(p.clone()),
        ProcNode::Scope(a, b, body) => Ok(ProcNode::Scope(a.clone(), b.clone(), Box::new(phi(t, body)?))),
        ProcNode::Def {
            name,
            params,
            body,
            cont,
            entered,
        } => Ok(ProcNode::Def {
            name: name.clone(),
            params: params.clone(),
            body: body.clone(),
            cont: Box::new(phi(t, cont)?),
            entered: *entered,
        }),
        ProcNode::Send { .. } => Err(undefined(p, "pending send")),
        ProcNode::If(..) => Err(undefined(p, "pending conditional")),
        ProcNode::SetTimer(..) => Err(undefined(p, "pending timer set")),
        ProcNode::Call(..) => Err(undefined(p, "pending call")),
        ProcNode::DelayConstraint { .. } => Err(undefined(p, "unresolved delay")),
    }
}

/// Advances every timer and the term by `t`.
pub fn time_step(rho: &TimerEnv, p: &ProcNode, t: Rational) -> Result<(TimerEnv, ProcNode), PhiUndefined> {
    let next = struct_normalize(&phi(t, p)?);
    let rho = rho.iter().map(|(x, v)| (x.clone(), *v + t)).collect();
    Ok((rho, next))
}

/// Canonical representative modulo structural congruence: `delay(0)` is
/// dropped, parallel components are flattened and sorted, and chains of
/// directly nested scopes are sorted.
pub fn struct_normalize(p: &ProcNode) -> ProcNode {
    match p {
        ProcNode::Delay(d, cont) if d.is_zero() => struct_normalize(cont),
        ProcNode::Delay(d, cont) => ProcNode::Delay(*d, Box::new(struct_normalize(cont))),
        ProcNode::SetTimer(x, cont) => ProcNode::SetTimer(x.clone(), Box::new(struct_normalize(cont))),
        ProcNode::Send {
            endpoint,
            label,
            value,
            cont,
        } => ProcNode::Send {
            endpoint: endpoint.clone(),
            label: label.clone(),
            value: value.clone(),
            cont: Box::new(struct_normalize(cont)),
        },
        ProcNode::Receive {
            endpoint,
            branches,
            after,
            timeout,
        } => ProcNode::Receive {
            endpoint: endpoint.clone(),
            branches: branches
                .iter()
                .map(|b| Branch {
                    label: b.label.clone(),
                    binder: b.binder.clone(),
                    body: struct_normalize(&b.body),
                })
                .collect(),
            after: after.clone(),
            timeout: Box::new(struct_normalize(timeout)),
        },
        ProcNode::If(c, a, b) => ProcNode::If(c.clone(), Box::new(struct_normalize(a)), Box::new(struct_normalize(b))),
        ProcNode::DelayConstraint { var, cond, cont } => ProcNode::DelayConstraint {
            var: var.clone(),
            cond: cond.clone(),
            cont: Box::new(struct_normalize(cont)),
        },
        ProcNode::Def {
            name,
            params,
            body,
            cont,
            entered,
        } => ProcNode::Def {
            name: name.clone(),
            params: params.clone(),
            body: Box::new(struct_normalize(body)),
            cont: Box::new(struct_normalize(cont)),
            entered: *entered,
        },
        ProcNode::Par(..) => {
            let mut parts: Vec<ProcNode> = p.components().into_iter().map(struct_normalize).collect();
            // Normalized components may themselves be compositions.
            parts = parts.iter().flat_map(|c| c.components().into_iter().cloned().collect::<Vec<_>>()).collect();
            parts.sort_by_cached_key(|c| c.to_string());
            ProcNode::par_all(parts)
        }
        ProcNode::Scope(..) => {
            let mut names = Vec::new();
            let mut cur = p;
            while let ProcNode::Scope(a, b, body) = cur {
                names.push((a.clone(), b.clone()));
                cur = body;
            }
            names.sort();
            let mut out = struct_normalize(cur);
            for (a, b) in names.into_iter().rev() {
                out = ProcNode::Scope(a, b, Box::new(out));
            }
            out
        }
        ProcNode::Call(..) | ProcNode::End | ProcNode::Err | ProcNode::Buffer { .. } => p.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::parse_process;

    fn p(s: &str) -> ProcNode {
        parse_process(s).unwrap()
    }

    fn r(n: i128) -> Rational {
        Rational::integer(n)
    }

    #[test]
    fn eval_timeout_examples() {
        let e = TimeoutExpr::minus_timer(3, "x");
        let rho = TimerEnv::from([("x".to_string(), r(1))]);
        assert_eq!(eval_timeout(&e, &rho).unwrap(), Extended::Finite(r(2)));
        let rho = TimerEnv::from([("x".to_string(), r(5))]);
        assert_eq!(eval_timeout(&e, &rho).unwrap(), Extended::Finite(r(0)));
        assert_eq!(eval_timeout(&TimeoutExpr::Infinite, &rho).unwrap(), Extended::Infinite);
        assert!(eval_timeout(&e, &TimerEnv::new()).is_err());
    }

    #[test]
    fn wait_and_neq() {
        assert_eq!(wait_set(&p("from p recv { a -> end } after 2 { end }")), BTreeSet::from(["p".to_string()]));
        assert!(wait_set(&ProcNode::End).is_empty());
        assert_eq!(
            wait_set(&p("(from p recv a -> end | from q recv b -> end)")),
            BTreeSet::from(["p".to_string(), "q".to_string()])
        );
        let s = p("new (p,q) { from p recv a -> end | end | pq:[] | qp:[a] }");
        let ProcNode::Scope(_, _, body) = &s else { panic!() };
        assert_eq!(neq_set(body), BTreeSet::from(["p".to_string()]));
        assert_eq!(wait_set(body), BTreeSet::from(["p".to_string()]));
        assert!(neq_set(&s).is_empty());
        assert!(neq_set(&p("new (p,q) { end | end | pq:[] | qp:[] }")).is_empty());
    }

    #[test]
    fn normalization() {
        assert_eq!(struct_normalize(&p("delay(0).to p ! a.end")), p("to p ! a.end"));
        let a = struct_normalize(&p("(err | (end | delay(1).end))"));
        let b = struct_normalize(&p("((delay(1).end | end) | err)"));
        assert_eq!(a, b);
        assert_eq!(struct_normalize(&a), a);
    }
}
