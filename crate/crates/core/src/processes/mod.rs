//! Timed processes with receive-after timeouts, program timers and
//! time-sensitive conditionals.

mod parse;
mod run;
mod step;
mod time;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::constraints::Constraint;
use crate::rational::{Extended, Rational};

pub use parse::{parse_process, parse_process_from, ProcScope};
pub use run::{run, DelayResolution, RunPolicy, RunResult, RunStatus, TraceEvent};
pub use step::{instant_step, is_completed, resolve_active, InstantStep, StepKind, Stuck};
pub use time::{eval_timeout, neq_set, phi, struct_normalize, time_step, wait_set, PhiUndefined};

pub type TimerEnv = BTreeMap<String, Rational>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Value {
    Unit,
    Nat(u64),
    Bool(bool),
    Str(String),
    /// A variable bound by a reception, or an endpoint being delegated.
    Name(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => Ok(()),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Name(n) => f.write_str(n),
        }
    }
}

/// `c + Σ kᵢ·xᵢ` over timers, or `∞`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeoutExpr {
    Infinite,
    Linear {
        constant: Rational,
        /// Zero coefficients are never stored.
        terms: BTreeMap<String, Rational>,
    },
}

impl TimeoutExpr {
    pub fn constant(c: impl Into<Rational>) -> Self {
        TimeoutExpr::Linear {
            constant: c.into(),
            terms: BTreeMap::new(),
        }
    }

    /// `c - x`.
    pub fn minus_timer(c: impl Into<Rational>, x: &str) -> Self {
        TimeoutExpr::Linear {
            constant: c.into(),
            terms: BTreeMap::from([(x.to_string(), -Rational::one())]),
        }
    }

    pub fn timers(&self) -> BTreeSet<String> {
        match self {
            TimeoutExpr::Infinite => BTreeSet::new(),
            TimeoutExpr::Linear { terms, .. } => terms.keys().cloned().collect(),
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, TimeoutExpr::Linear { terms, .. } if !terms.is_empty())
    }

    /// The numeric value when no timer occurs.
    pub fn value(&self) -> Option<Extended> {
        match self {
            TimeoutExpr::Infinite => Some(Extended::Infinite),
            TimeoutExpr::Linear { constant, terms } if terms.is_empty() => Some(Extended::Finite(*constant)),
            _ => None,
        }
    }

    /// `e - t`, kept symbolic.
    pub fn minus(&self, t: Rational) -> Self {
        match self {
            TimeoutExpr::Infinite => TimeoutExpr::Infinite,
            TimeoutExpr::Linear { constant, terms } => TimeoutExpr::Linear {
                constant: *constant - t,
                terms: terms.clone(),
            },
        }
    }

    pub fn rename_timers(&self, map: &BTreeMap<String, String>) -> Self {
        match self {
            TimeoutExpr::Infinite => TimeoutExpr::Infinite,
            TimeoutExpr::Linear { constant, terms } => {
                let mut out = BTreeMap::new();
                for (x, k) in terms {
                    let name = map.get(x).unwrap_or(x).clone();
                    let entry = out.entry(name).or_insert_with(Rational::zero);
                    *entry = *entry + *k;
                }
                out.retain(|_, k| !k.is_zero());
                TimeoutExpr::Linear {
                    constant: *constant,
                    terms: out,
                }
            }
        }
    }
}

impl fmt::Display for TimeoutExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let TimeoutExpr::Linear { constant, terms } = self else {
            return f.write_str("inf");
        };
        let mut first = true;
        if !constant.is_zero() || terms.is_empty() {
            write!(f, "{constant}")?;
            first = false;
        }
        for (x, k) in terms {
            let mag = k.abs();
            match (first, k.is_negative()) {
                (true, false) => {}
                (true, true) => f.write_str("-")?,
                (false, false) => f.write_str(" + ")?,
                (false, true) => f.write_str(" - ")?,
            }
            if mag != Rational::one() {
                write!(f, "{mag}*")?;
            }
            f.write_str(x)?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Params {
    pub values: Vec<String>,
    pub timers: Vec<String>,
    pub sessions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Args {
    pub values: Vec<Value>,
    pub timers: Vec<String>,
    pub sessions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch {
    pub label: String,
    pub binder: Option<String>,
    pub body: ProcNode,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcNode {
    SetTimer(String, Box<ProcNode>),
    Send {
        endpoint: String,
        label: String,
        value: Value,
        cont: Box<ProcNode>,
    },
    Receive {
        endpoint: String,
        branches: Vec<Branch>,
        after: TimeoutExpr,
        timeout: Box<ProcNode>,
    },
    If(Constraint, Box<ProcNode>, Box<ProcNode>),
    /// `delay(δ).P` where `δ` constrains the single clock `var`.
    DelayConstraint {
        var: Option<String>,
        cond: Constraint,
        cont: Box<ProcNode>,
    },
    Delay(Rational, Box<ProcNode>),
    Def {
        name: String,
        params: Params,
        body: Box<ProcNode>,
        cont: Box<ProcNode>,
        /// Set once the definition has been entered; reductions then happen
        /// in `cont`.
        entered: bool,
    },
    Call(String, Args),
    End,
    Err,
    Scope(String, String, Box<ProcNode>),
    Par(Box<ProcNode>, Box<ProcNode>),
    /// Messages from `from` to `to`, head first.
    Buffer {
        from: String,
        to: String,
        msgs: Vec<(String, Value)>,
    },
}

impl ProcNode {
    pub fn par(a: ProcNode, b: ProcNode) -> ProcNode {
        ProcNode::Par(Box::new(a), Box::new(b))
    }

    /// Right-nested parallel composition of `parts`; `end` when empty.
    pub fn par_all(parts: Vec<ProcNode>) -> ProcNode {
        let mut it = parts.into_iter().rev();
        let Some(mut acc) = it.next() else { return ProcNode::End };
        for p in it {
            acc = ProcNode::par(p, acc);
        }
        acc
    }

    pub fn scope(p: &str, q: &str, body: ProcNode) -> ProcNode {
        ProcNode::Scope(p.to_string(), q.to_string(), Box::new(body))
    }

    pub fn buffer(from: &str, to: &str) -> ProcNode {
        ProcNode::Buffer {
            from: from.to_string(),
            to: to.to_string(),
            msgs: Vec::new(),
        }
    }

    /// The components of a parallel composition, left to right.
    pub fn components(&self) -> Vec<&ProcNode> {
        match self {
            ProcNode::Par(a, b) => {
                let mut out = a.components();
                out.extend(b.components());
                out
            }
            other => vec![other],
        }
    }

    /// Timers that `set` mentions anywhere in the term.
    pub fn set_timers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| {
            if let ProcNode::SetTimer(x, _) = p {
                out.insert(x.clone());
            }
        });
        out
    }

    /// Pre-order traversal of every subterm.
    pub fn visit(&self, f: &mut impl FnMut(&ProcNode)) {
        f(self);
        match self {
            ProcNode::SetTimer(_, p)
            | ProcNode::Send { cont: p, .. }
            | ProcNode::DelayConstraint { cont: p, .. }
            | ProcNode::Delay(_, p)
            | ProcNode::Scope(_, _, p) => p.visit(f),
            ProcNode::Receive { branches, timeout, .. } => {
                for b in branches {
                    b.body.visit(f);
                }
                timeout.visit(f);
            }
            ProcNode::If(_, p, q) | ProcNode::Par(p, q) => {
                p.visit(f);
                q.visit(f);
            }
            ProcNode::Def { body, cont, .. } => {
                body.visit(f);
                cont.visit(f);
            }
            ProcNode::Call(..) | ProcNode::End | ProcNode::Err | ProcNode::Buffer { .. } => {}
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.values)?;
        f.write_str("; ")?;
        write_list(f, &self.timers)?;
        f.write_str("; ")?;
        write_list(f, &self.sessions)
    }
}

impl fmt::Display for Args {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.values)?;
        f.write_str("; ")?;
        write_list(f, &self.timers)?;
        f.write_str("; ")?;
        write_list(f, &self.sessions)
    }
}

fn write_message(f: &mut fmt::Formatter<'_>, label: &str, v: &Value) -> fmt::Result {
    f.write_str(label)?;
    if *v != Value::Unit {
        write!(f, "({v})")?;
    }
    Ok(())
}

impl fmt::Display for ProcNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcNode::SetTimer(x, p) => write!(f, "set({x}).{p}"),
            ProcNode::Send {
                endpoint,
                label,
                value,
                cont,
            } => {
                write!(f, "to {endpoint} ! ")?;
                write_message(f, label, value)?;
                write!(f, ".{cont}")
            }
            ProcNode::Receive {
                endpoint,
                branches,
                after,
                timeout,
            } => {
                write!(f, "from {endpoint} recv {{ ")?;
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(&b.label)?;
                    if let Some(x) = &b.binder {
                        write!(f, "({x})")?;
                    }
                    write!(f, " -> {}", b.body)?;
                }
                f.write_str(" }")?;
                if *after != TimeoutExpr::Infinite {
                    write!(f, " after {after} {{ {timeout} }}")?;
                }
                Ok(())
            }
            ProcNode::If(c, p, q) => write!(f, "if ({c}) then {p} else {q}"),
            ProcNode::DelayConstraint { cond, cont, .. } => write!(f, "delay({cond}).{cont}"),
            ProcNode::Delay(t, p) => write!(f, "delay({t}).{p}"),
            ProcNode::Def {
                name,
                params,
                body,
                cont,
                ..
            } => write!(f, "def {name}({params}) = {body} in {cont}"),
            ProcNode::Call(name, args) => write!(f, "{name}<{args}>"),
            ProcNode::End => f.write_str("end"),
            ProcNode::Err => f.write_str("err"),
            ProcNode::Scope(p, q, body) => {
                write!(f, "new ({p},{q}) {{ ")?;
                for (i, c) in body.components().iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(" }")
            }
            ProcNode::Par(..) => {
                f.write_str("(")?;
                for (i, c) in self.components().iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            ProcNode::Buffer { from, to, msgs } => {
                write!(f, "{from}{to}:[")?;
                for (i, (l, v)) in msgs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_message(f, l, v)?;
                }
                f.write_str("]")
            }
        }
    }
}

impl Serialize for ProcNode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timeout_printing() {
        assert_eq!(TimeoutExpr::minus_timer(3, "x").to_string(), "3 - x");
        assert_eq!(TimeoutExpr::constant(0).to_string(), "0");
        assert_eq!(TimeoutExpr::Infinite.to_string(), "inf");
        let e = TimeoutExpr::minus_timer(3, "x").minus(Rational::integer(3));
        assert_eq!(e.to_string(), "-x");
    }

    #[test]
    fn timer_renaming_merges_terms() {
        let e = TimeoutExpr::Linear {
            constant: Rational::integer(1),
            terms: BTreeMap::from([("x".to_string(), Rational::one()), ("y".to_string(), -Rational::one())]),
        };
        let map = BTreeMap::from([("y".to_string(), "x".to_string())]);
        assert_eq!(e.rename_timers(&map), TimeoutExpr::constant(1));
    }
}
