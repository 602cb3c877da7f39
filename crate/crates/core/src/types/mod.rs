//! Timed session types: syntax, printing, duality and well-formedness.

mod parse;
mod wf;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::constraints::{ClockSet, Constraint, ResetSet};
use crate::rational::Rational;

pub use parse::{parse_type, parse_type_from, TypeScope};
pub(crate) use parse::parse_sort;
pub use wf::{check_well_formed, gamma, Condition, GammaError, Violation, WfEnv, WfReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Direction {
    #[serde(rename = "!")]
    Send,
    #[serde(rename = "?")]
    Recv,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Send => Direction::Recv,
            Direction::Recv => Direction::Send,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Direction::Send => '!',
            Direction::Recv => '?',
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PayloadSort {
    Nat,
    Bool,
    Str,
    None,
    /// A session handed over with the message, with the constraint its
    /// clocks satisfy at hand-over.
    Delegate(Constraint, Box<TypeNode>),
}

impl fmt::Display for PayloadSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PayloadSort::Nat => f.write_str("Nat"),
            PayloadSort::Bool => f.write_str("Bool"),
            PayloadSort::Str => f.write_str("Str"),
            PayloadSort::None => f.write_str("None"),
            PayloadSort::Delegate(d, s) => write!(f, "({d}, {s})"),
        }
    }
}

impl Serialize for PayloadSort {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChoiceOption {
    pub dir: Direction,
    pub label: String,
    pub payload: PayloadSort,
    pub guard: Constraint,
    pub resets: ResetSet,
    pub cont: TypeNode,
}

impl ChoiceOption {
    pub fn new(dir: Direction, label: &str, guard: Constraint, resets: ResetSet, cont: TypeNode) -> Self {
        ChoiceOption {
            dir,
            label: label.to_string(),
            payload: PayloadSort::None,
            guard,
            resets,
            cont,
        }
    }

    /// `!label` or `?label`, as used in violation paths and traces.
    pub fn tag(&self) -> String {
        format!("{}{}", self.dir, self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeNode {
    Choice(Vec<ChoiceOption>),
    Rec(String, Box<TypeNode>),
    Var(String),
    End,
}

impl TypeNode {
    pub fn rec(var: &str, body: TypeNode) -> TypeNode {
        TypeNode::Rec(var.to_string(), Box::new(body))
    }

    pub fn var(name: &str) -> TypeNode {
        TypeNode::Var(name.to_string())
    }

    pub fn is_end(&self) -> bool {
        matches!(self, TypeNode::End)
    }

    pub fn dual(&self) -> TypeNode {
        match self {
            TypeNode::Choice(opts) => TypeNode::Choice(
                opts.iter()
                    .map(|o| ChoiceOption {
                        dir: o.dir.flip(),
                        label: o.label.clone(),
                        payload: o.payload.clone(),
                        guard: o.guard.clone(),
                        resets: o.resets.clone(),
                        cont: o.cont.dual(),
                    })
                    .collect(),
            ),
            TypeNode::Rec(a, body) => TypeNode::Rec(a.clone(), Box::new(body.dual())),
            TypeNode::Var(a) => TypeNode::Var(a.clone()),
            TypeNode::End => TypeNode::End,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            TypeNode::Choice(opts) => {
                for o in opts {
                    o.cont.collect_free(bound, out);
                }
            }
            TypeNode::Rec(a, body) => {
                bound.push(a.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            TypeNode::Var(a) => {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            TypeNode::End => {}
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Replaces free occurrences of `var` by `with`.
    pub fn substitute(&self, var: &str, with: &TypeNode) -> TypeNode {
        match self {
            TypeNode::Choice(opts) => TypeNode::Choice(
                opts.iter()
                    .map(|o| ChoiceOption {
                        cont: o.cont.substitute(var, with),
                        ..o.clone()
                    })
                    .collect(),
            ),
            TypeNode::Rec(a, body) => {
                if a == var {
                    self.clone()
                } else {
                    TypeNode::Rec(a.clone(), Box::new(body.substitute(var, with)))
                }
            }
            TypeNode::Var(a) if a == var => with.clone(),
            other => other.clone(),
        }
    }

    /// Unfolds recursion at the head until a choice or `end` appears.
    ///
    /// Panics on unguarded recursion, which the parser rejects.
    pub fn unfold_head(&self) -> TypeNode {
        let mut cur = self.clone();
        for _ in 0..10_000 {
            match cur {
                TypeNode::Rec(ref a, ref body) => {
                    let next = body.substitute(a, &cur);
                    cur = next;
                }
                TypeNode::Var(ref a) => panic!("free recursion variable `{a}` at head"),
                _ => return cur,
            }
        }
        panic!("unguarded recursion");
    }

    /// Clocks mentioned by guards and resets, excluding delegated sessions.
    pub fn clocks(&self) -> ClockSet {
        let mut out = ClockSet::new();
        self.visit_options(&mut |o| {
            out.extend(o.guard.clocks());
            out.extend(o.resets.iter().cloned());
        });
        out
    }

    /// Every guard constant of the session, delegated sessions excluded.
    pub fn constants(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        self.visit_options(&mut |o| out.extend(o.guard.constants()));
        out
    }

    pub fn has_diagonal(&self) -> bool {
        let mut found = false;
        self.visit_options(&mut |o| found |= o.guard.has_diagonal());
        found
    }

    pub fn visit_options(&self, f: &mut impl FnMut(&ChoiceOption)) {
        match self {
            TypeNode::Choice(opts) => {
                for o in opts {
                    f(o);
                    o.cont.visit_options(f);
                }
            }
            TypeNode::Rec(_, body) => body.visit_options(f),
            TypeNode::Var(_) | TypeNode::End => {}
        }
    }

    /// Nesting depth counted in choices.
    pub fn depth(&self) -> usize {
        match self {
            TypeNode::Choice(opts) => 1 + opts.iter().map(|o| o.cont.depth()).max().unwrap_or(0),
            TypeNode::Rec(_, body) => body.depth(),
            TypeNode::Var(_) | TypeNode::End => 0,
        }
    }
}

impl fmt::Display for ChoiceOption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.dir, self.label)?;
        if self.payload != PayloadSort::None {
            write!(f, "<{}>", self.payload)?;
        }
        let has_guard = self.guard != Constraint::True;
        if has_guard || !self.resets.is_empty() {
            write!(f, "({}", self.guard)?;
            if !self.resets.is_empty() {
                write!(f, ", {}", self.resets)?;
            }
            f.write_str(")")?;
        }
        write!(f, ".{}", self.cont)
    }
}

impl fmt::Display for TypeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeNode::End => f.write_str("end"),
            TypeNode::Var(a) => f.write_str(a),
            TypeNode::Rec(a, body) => write!(f, "rec {a}.{body}"),
            TypeNode::Choice(opts) if opts.len() == 1 => write!(f, "{}", opts[0]),
            TypeNode::Choice(opts) => {
                f.write_str("{ ")?;
                for (i, o) in opts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{o}")?;
                }
                f.write_str(" }")
            }
        }
    }
}

impl Serialize for TypeNode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_flips_directions_only() {
        let s = parse_type("!a(x>1,{x}).?b.end").unwrap();
        assert_eq!(s.dual().to_string(), "?a(x>1, {x}).!b.end");
        assert_eq!(TypeNode::End.dual(), TypeNode::End);
        assert_eq!(s.dual().dual(), s);
    }

    #[test]
    fn unfold_substitutes_whole_recursion() {
        let s = parse_type("rec a.{ ?d(x<=1).end, !e(1<x).a }").unwrap();
        let u = s.unfold_head();
        let TypeNode::Choice(opts) = &u else { panic!() };
        assert_eq!(opts[1].cont, s);
        assert!(u.is_closed());
        let nested = parse_type("rec a.rec b.{ !x.a, ?y.b }").unwrap();
        let u = nested.unfold_head();
        assert!(matches!(u, TypeNode::Choice(_)));
        assert!(u.is_closed());
        assert_eq!(TypeNode::End.unfold_head(), TypeNode::End);
    }
}
