//! Clocks, valuations and clock constraints.
//!
//! The core constraint grammar has five atoms (`true`, `x>c`, `x=c`,
//! `x-y>c`, `x-y=c`) closed under negation and conjunction. Every other
//! comparator is sugar that expands into a fixed shape of that grammar, and
//! the printer recognises those exact shapes again, so printing and
//! re-parsing yields the same tree.

mod ops;
mod parse;
mod zone;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::rational::Rational;

pub use ops::{
    apply_reset, boundary_delays, boundary_points, densify_delays, entails, equivalent, eval, future, future_of, future_over, is_sat, past, reset_constraint, shift,
    to_zones, trajectory_zone,
};
pub use parse::{parse_constraint, parse_constraint_from};
pub use zone::{Bound, Zone, ZoneSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("unknown clock `{0}`")]
    UnknownClock(String),
    #[error("negative delay {0}")]
    NegativeDelay(Rational),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clock(Arc<str>);

impl Clock {
    pub fn new(name: &str) -> Self {
        Clock(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Clock {
    fn from(s: &str) -> Self {
        Clock::new(s)
    }
}

impl Serialize for Clock {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

pub type ClockSet = BTreeSet<Clock>;

pub fn clock_set<'a>(names: impl IntoIterator<Item = &'a str>) -> ClockSet {
    names.into_iter().map(Clock::new).collect()
}

/// Clocks zeroed when an action fires.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct ResetSet(pub BTreeSet<Clock>);

impl ResetSet {
    pub fn empty() -> Self {
        ResetSet::default()
    }

    pub fn of<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        ResetSet(clock_set(names))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: &Clock) -> bool {
        self.0.contains(c)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Clock> {
        self.0.iter()
    }
}

impl fmt::Display for ResetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

/// Total map from a clock set to nonnegative rationals.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Valuation(BTreeMap<Clock, Rational>);

impl Valuation {
    /// Every clock of `clocks` at 0.
    pub fn zero(clocks: &ClockSet) -> Self {
        Valuation(clocks.iter().map(|c| (c.clone(), Rational::zero())).collect())
    }

    /// Panics on a negative value.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Rational)>) -> Self {
        let map: BTreeMap<Clock, Rational> = pairs
            .into_iter()
            .map(|(n, v)| {
                assert!(!v.is_negative(), "negative clock value");
                (Clock::new(n), v)
            })
            .collect();
        Valuation(map)
    }

    pub fn get(&self, c: &Clock) -> Option<Rational> {
        self.0.get(c).copied()
    }

    pub fn value(&self, c: &Clock) -> Result<Rational, ConstraintError> {
        self.get(c)
            .ok_or_else(|| ConstraintError::UnknownClock(c.name().to_string()))
    }

    pub fn set(&mut self, c: Clock, v: Rational) {
        assert!(!v.is_negative(), "negative clock value");
        self.0.insert(c, v);
    }

    pub fn clocks(&self) -> ClockSet {
        self.0.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Clock, &Rational)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Extends the domain with `clocks` at 0, keeping existing values.
    pub fn extend_zero(&mut self, clocks: &ClockSet) {
        for c in clocks {
            self.0.entry(c.clone()).or_insert_with(Rational::zero);
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (c, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}={v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    True,
    Gt(Clock, Rational),
    Eq(Clock, Rational),
    DiffGt(Clock, Clock, Rational),
    DiffEq(Clock, Clock, Rational),
    Not(Box<Constraint>),
    And(Box<Constraint>, Box<Constraint>),
}

impl Constraint {
    pub fn gt(x: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        Constraint::Gt(x.into(), c.into())
    }

    pub fn eq(x: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        Constraint::Eq(x.into(), c.into())
    }

    pub fn lt(x: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        let (x, c) = (x.into(), c.into());
        Constraint::Gt(x.clone(), c).not().and(Constraint::Eq(x, c).not())
    }

    pub fn le(x: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        Constraint::gt(x, c).not()
    }

    pub fn ge(x: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        Constraint::lt(x, c).not()
    }

    pub fn ne(x: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        Constraint::eq(x, c).not()
    }

    pub fn diff_gt(x: impl Into<Clock>, y: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        Constraint::DiffGt(x.into(), y.into(), c.into())
    }

    pub fn diff_eq(x: impl Into<Clock>, y: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        Constraint::DiffEq(x.into(), y.into(), c.into())
    }

    pub fn diff_lt(x: impl Into<Clock>, y: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        let (x, y, c) = (x.into(), y.into(), c.into());
        Constraint::DiffGt(x.clone(), y.clone(), c)
            .not()
            .and(Constraint::DiffEq(x, y, c).not())
    }

    pub fn diff_le(x: impl Into<Clock>, y: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        Constraint::diff_gt(x, y, c).not()
    }

    pub fn diff_ge(x: impl Into<Clock>, y: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        Constraint::diff_lt(x, y, c).not()
    }

    pub fn diff_ne(x: impl Into<Clock>, y: impl Into<Clock>, c: impl Into<Rational>) -> Self {
        Constraint::diff_eq(x, y, c).not()
    }

    pub fn falsity() -> Self {
        Constraint::True.not()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Constraint::Not(Box::new(self))
    }

    pub fn and(self, other: Constraint) -> Self {
        Constraint::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Constraint) -> Self {
        self.not().and(other.not()).not()
    }

    /// Left-nested conjunction; `true` for an empty iterator.
    pub fn and_all(items: impl IntoIterator<Item = Constraint>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Constraint::True,
            Some(first) => it.fold(first, Constraint::and),
        }
    }

    /// Left-nested disjunction; `false` for an empty iterator.
    pub fn or_all(items: impl IntoIterator<Item = Constraint>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Constraint::falsity(),
            Some(first) => it.fold(first, Constraint::or),
        }
    }

    pub fn clocks(&self) -> ClockSet {
        let mut out = ClockSet::new();
        self.collect_clocks(&mut out);
        out
    }

    fn collect_clocks(&self, out: &mut ClockSet) {
        match self {
            Constraint::True => {}
            Constraint::Gt(x, _) | Constraint::Eq(x, _) => {
                out.insert(x.clone());
            }
            Constraint::DiffGt(x, y, _) | Constraint::DiffEq(x, y, _) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Constraint::Not(a) => a.collect_clocks(out),
            Constraint::And(a, b) => {
                a.collect_clocks(out);
                b.collect_clocks(out);
            }
        }
    }

    /// All constants mentioned by atoms.
    pub fn constants(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| match a {
            Constraint::Gt(_, c) | Constraint::Eq(_, c) | Constraint::DiffGt(_, _, c) | Constraint::DiffEq(_, _, c) => {
                out.push(*c)
            }
            _ => {}
        });
        out
    }

    pub fn has_diagonal(&self) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |a| {
            if matches!(a, Constraint::DiffGt(..) | Constraint::DiffEq(..)) {
                found = true;
            }
        });
        found
    }

    /// Single-clock atoms as `(clock, constant)` pairs.
    pub fn clock_atoms(&self) -> Vec<(Clock, Rational)> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| match a {
            Constraint::Gt(x, c) | Constraint::Eq(x, c) => out.push((x.clone(), *c)),
            _ => {}
        });
        out
    }

    fn visit_atoms(&self, f: &mut impl FnMut(&Constraint)) {
        match self {
            Constraint::Not(a) => a.visit_atoms(f),
            Constraint::And(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            atom => f(atom),
        }
    }

    /// Renames clocks through `f`.
    pub fn map_clocks(&self, f: &impl Fn(&Clock) -> Clock) -> Constraint {
        match self {
            Constraint::True => Constraint::True,
            Constraint::Gt(x, c) => Constraint::Gt(f(x), *c),
            Constraint::Eq(x, c) => Constraint::Eq(f(x), *c),
            Constraint::DiffGt(x, y, c) => Constraint::DiffGt(f(x), f(y), *c),
            Constraint::DiffEq(x, y, c) => Constraint::DiffEq(f(x), f(y), *c),
            Constraint::Not(a) => a.map_clocks(f).not(),
            Constraint::And(a, b) => a.map_clocks(f).and(b.map_clocks(f)),
        }
    }
}

// Printer. Precedence levels: 0 disjunction, 1 conjunction, 2 atom/negation.

enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Cmp {
    fn symbol(&self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
            Cmp::Ne => "!=",
        }
    }
}

/// Left-hand side of a comparison: a clock or a clock difference.
#[derive(PartialEq)]
enum Lhs<'a> {
    Clock(&'a Clock),
    Diff(&'a Clock, &'a Clock),
}

impl fmt::Display for Lhs<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lhs::Clock(x) => write!(f, "{x}"),
            Lhs::Diff(x, y) => write!(f, "{x}-{y}"),
        }
    }
}

fn gt_atom(c: &Constraint) -> Option<(Lhs<'_>, Rational)> {
    match c {
        Constraint::Gt(x, k) => Some((Lhs::Clock(x), *k)),
        Constraint::DiffGt(x, y, k) => Some((Lhs::Diff(x, y), *k)),
        _ => None,
    }
}

fn eq_atom(c: &Constraint) -> Option<(Lhs<'_>, Rational)> {
    match c {
        Constraint::Eq(x, k) => Some((Lhs::Clock(x), *k)),
        Constraint::DiffEq(x, y, k) => Some((Lhs::Diff(x, y), *k)),
        _ => None,
    }
}

fn negated(c: &Constraint) -> Option<&Constraint> {
    match c {
        Constraint::Not(a) => Some(a),
        _ => None,
    }
}

/// `And(Not(gt), Not(eq))` on the same left side and constant: `lhs < k`.
fn lt_sugar(c: &Constraint) -> Option<(Lhs<'_>, Rational)> {
    if let Constraint::And(a, b) = c {
        let g = gt_atom(negated(a)?)?;
        let e = eq_atom(negated(b)?)?;
        if g == e {
            return Some(g);
        }
    }
    None
}

/// A comparison sugar recognised at the atom level.
fn comparison(c: &Constraint) -> Option<(Lhs<'_>, Cmp, Rational)> {
    if let Some((l, k)) = gt_atom(c) {
        return Some((l, Cmp::Gt, k));
    }
    if let Some((l, k)) = eq_atom(c) {
        return Some((l, Cmp::Eq, k));
    }
    if let Some((l, k)) = lt_sugar(c) {
        return Some((l, Cmp::Lt, k));
    }
    if let Constraint::Not(inner) = c {
        if let Some((l, k)) = gt_atom(inner) {
            return Some((l, Cmp::Le, k));
        }
        if let Some((l, k)) = eq_atom(inner) {
            return Some((l, Cmp::Ne, k));
        }
        if let Some((l, k)) = lt_sugar(inner) {
            return Some((l, Cmp::Ge, k));
        }
    }
    None
}

fn or_sugar(c: &Constraint) -> Option<(&Constraint, &Constraint)> {
    if let Constraint::Not(inner) = c {
        if let Constraint::And(a, b) = inner.as_ref() {
            return Some((negated(a)?, negated(b)?));
        }
    }
    None
}

/// `a<x<b` style interval: lower bound (`>` or `>=`) then upper (`<` or `<=`)
/// on the same plain clock.
fn interval(c: &Constraint) -> Option<(Rational, &'static str, &Clock, &'static str, Rational)> {
    if let Constraint::And(a, b) = c {
        let (l1, c1, k1) = comparison(a)?;
        let (l2, c2, k2) = comparison(b)?;
        let Lhs::Clock(x) = l1 else { return None };
        if l2 != Lhs::Clock(x) {
            return None;
        }
        let lo = match c1 {
            Cmp::Gt => "<",
            Cmp::Ge => "<=",
            _ => return None,
        };
        let hi = match c2 {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            _ => return None,
        };
        return Some((k1, lo, x, hi, k2));
    }
    None
}

impl Constraint {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        if matches!(self, Constraint::True) {
            return f.write_str("true");
        }
        if let Constraint::Not(inner) = self {
            if matches!(inner.as_ref(), Constraint::True) {
                return f.write_str("false");
            }
        }
        if let Some((l, cmp, k)) = comparison(self) {
            return write!(f, "{l}{}{k}", cmp.symbol());
        }
        if let Some((lo, s1, x, s2, hi)) = interval(self) {
            return write!(f, "{lo}{s1}{x}{s2}{hi}");
        }
        if let Some((a, b)) = or_sugar(self) {
            if prec > 0 {
                f.write_str("(")?;
            }
            a.fmt_prec(f, 0)?;
            f.write_str(" or ")?;
            b.fmt_prec(f, 1)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            return Ok(());
        }
        match self {
            Constraint::Not(a) => {
                f.write_str("not ")?;
                a.fmt_prec(f, 2)
            }
            Constraint::And(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1)?;
                f.write_str(" and ")?;
                b.fmt_prec(f, 2)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            _ => unreachable!("atoms handled by comparison()"),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

impl Serialize for Constraint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sugar_prints_back() {
        assert_eq!(Constraint::lt("x", 3).to_string(), "x<3");
        assert_eq!(Constraint::le("x", 3).to_string(), "x<=3");
        assert_eq!(Constraint::ge("x", 3).to_string(), "x>=3");
        assert_eq!(Constraint::ne("x", 3).to_string(), "x!=3");
        assert_eq!(Constraint::diff_le("x", "y", 1).to_string(), "x-y<=1");
        assert_eq!(Constraint::falsity().to_string(), "false");
        assert_eq!(
            Constraint::gt("x", 3).and(Constraint::lt("x", 5)).to_string(),
            "3<x<5"
        );
        assert_eq!(
            Constraint::le("y", 2).or(Constraint::lt("x", 5)).to_string(),
            "y<=2 or x<5"
        );
    }

    #[test]
    fn nested_connectives_parenthesise() {
        let a = Constraint::gt("x", 1);
        let b = Constraint::eq("y", 2);
        let c = Constraint::gt("z", 3);
        let conj = a.clone().and(b.clone().or(c.clone()));
        assert_eq!(conj.to_string(), "x>1 and (y=2 or z>3)");
        let right = a.clone().and(b.clone().and(c.clone()));
        assert_eq!(right.to_string(), "x>1 and (y=2 and z>3)");
        assert_eq!(a.and(b).not().to_string(), "not (x>1 and y=2)");
    }

    #[test]
    fn clocks_and_constants() {
        let d = Constraint::diff_gt("x", "y", 1).and(Constraint::lt("z", Rational::new(1, 2)));
        assert_eq!(d.clocks(), clock_set(["x", "y", "z"]));
        assert!(d.has_diagonal());
        assert_eq!(d.clock_atoms().len(), 2);
    }
}
