use std::collections::HashSet;

use serde::Serialize;

use crate::constraints::{apply_reset, equivalent, eval};
use crate::types::{Direction, TypeNode};

use super::{QConfig, System};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatReport {
    pub compatible: bool,
    /// Why the system is not compatible.
    pub reason: Option<String>,
}

/// Compatibility of a system: at most one queue is non-empty, its side can
/// drain it message by message, and what remains are dual types at equal
/// valuations.
pub fn compatible(sys: &System) -> CompatReport {
    match compat(sys.left.clone(), sys.right.clone()) {
        Ok(()) => CompatReport {
            compatible: true,
            reason: None,
        },
        Err(reason) => CompatReport {
            compatible: false,
            reason: Some(reason),
        },
    }
}

fn compat(mut l: QConfig, mut r: QConfig) -> Result<(), String> {
    loop {
        match (l.queue.is_empty(), r.queue.is_empty()) {
            (false, false) => return Err("both queues are non-empty".into()),
            (true, true) => {
                if l.valuation != r.valuation {
                    return Err(format!("valuations differ: {} vs {}", l.valuation, r.valuation));
                }
                if !dual_equivalent(&l.ty, &r.ty) {
                    return Err(format!("`{}` is not dual to `{}`", l.ty, r.ty));
                }
                return Ok(());
            }
            (false, true) => drain_one(&mut l)?,
            (true, false) => drain_one(&mut r)?,
        }
    }
}

/// Receives the queue head at the current valuation, without the urgency or
/// sort checks of the queue semantics.
fn drain_one(q: &mut QConfig) -> Result<(), String> {
    let m = q.queue.pop_front().expect("caller checked");
    let head = q.ty.unfold_head();
    let TypeNode::Choice(opts) = &head else {
        return Err(format!("`{m}` is queued for a finished session"));
    };
    let o = opts
        .iter()
        .find(|o| o.dir == Direction::Recv && o.label == m.label && o.payload == m.sort)
        .ok_or_else(|| format!("no reception for `{m}` in `{head}`"))?;
    if !eval(&q.valuation, &o.guard).unwrap_or(false) {
        return Err(format!("`{m}` cannot be received at {}", q.valuation));
    }
    q.valuation = apply_reset(&q.valuation, &o.resets);
    q.ty = o.cont.clone();
    Ok(())
}

/// Whether `b` is the dual of `a` up to unfolding and guard equivalence.
pub fn dual_equivalent(a: &TypeNode, b: &TypeNode) -> bool {
    dual_eq(a, b, &mut HashSet::new())
}

fn dual_eq(a: &TypeNode, b: &TypeNode, assumed: &mut HashSet<(TypeNode, TypeNode)>) -> bool {
    let a = a.unfold_head();
    let b = b.unfold_head();
    if !assumed.insert((a.clone(), b.clone())) {
        return true;
    }
    match (&a, &b) {
        (TypeNode::End, TypeNode::End) => true,
        (TypeNode::Choice(xs), TypeNode::Choice(ys)) => {
            xs.len() == ys.len()
                && xs.iter().all(|x| {
                    ys.iter().find(|y| y.label == x.label).is_some_and(|y| {
                        y.dir == x.dir.flip()
                            && y.payload == x.payload
                            && y.resets == x.resets
                            && (y.guard == x.guard || equivalent(&x.guard, &y.guard))
                            && dual_eq(&x.cont, &y.cont, assumed)
                    })
                })
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::clock_set;
    use crate::semantics::{enqueue, Message};
    use crate::types::{parse_type, PayloadSort};

    fn ty(s: &str) -> TypeNode {
        parse_type(s).unwrap()
    }

    #[test]
    fn duals_are_compatible() {
        let s = ty("rec a.{ ?ping(x<=3,{x}).a, !pong(x>3,{x}).a }");
        assert!(compatible(&System::new(s.clone(), s.dual(), &clock_set(["x"]))).compatible);
        let unfolded = s.dual().unfold_head();
        assert!(dual_equivalent(&s, &unfolded));
        assert!(dual_equivalent(&ty("!a(x<2 or x<1).end"), &ty("?a(x<2).end")));
        assert!(!dual_equivalent(&s, &s));
    }

    #[test]
    fn pending_message_must_be_receivable() {
        let s = ty("!a(x<1,{x}).!b.end");
        let sys = System::new(ty("!b.end"), s.dual(), &clock_set(["x"]));
        let sys = System {
            right: enqueue(&sys.right, Message::new("a", PayloadSort::None)),
            ..sys
        };
        assert!(compatible(&sys).compatible);
        let both = System {
            left: enqueue(&sys.left, Message::new("z", PayloadSort::None)),
            ..sys.clone()
        };
        assert!(!compatible(&both).compatible);
        let wrong = System {
            right: enqueue(&sys.right.clone(), Message::new("q", PayloadSort::None)),
            ..sys
        };
        assert!(!compatible(&wrong).compatible);
    }

    #[test]
    fn valuations_must_agree() {
        let s = ty("!a.end");
        let mut sys = System::new(s.clone(), s.dual(), &clock_set(["x"]));
        sys.left.valuation.set("x".into(), crate::Rational::integer(1));
        assert!(!compatible(&sys).compatible);
    }
}
