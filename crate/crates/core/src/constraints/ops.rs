use crate::rational::Rational;

use super::{Clock, ClockSet, Constraint, ConstraintError, ResetSet, Valuation, Zone, ZoneSet};
use super::zone::Bound;

pub fn eval(v: &Valuation, delta: &Constraint) -> Result<bool, ConstraintError> {
    Ok(match delta {
        Constraint::True => true,
        Constraint::Gt(x, c) => v.value(x)? > *c,
        Constraint::Eq(x, c) => v.value(x)? == *c,
        Constraint::DiffGt(x, y, c) => v.value(x)? - v.value(y)? > *c,
        Constraint::DiffEq(x, y, c) => v.value(x)? - v.value(y)? == *c,
        Constraint::Not(a) => !eval(v, a)?,
        Constraint::And(a, b) => eval(v, a)? && eval(v, b)?,
    })
}

/// Zones over exactly the clocks mentioned by `δ`.
pub fn to_zones(delta: &Constraint) -> ZoneSet {
    ZoneSet::from_constraint(delta, &delta.clocks()).expect("clock set covers constraint")
}

pub fn is_sat(delta: &Constraint) -> bool {
    !to_zones(delta).is_empty()
}

pub fn entails(a: &Constraint, b: &Constraint) -> bool {
    !is_sat(&a.clone().and(b.clone().not()))
}

pub fn equivalent(a: &Constraint, b: &Constraint) -> bool {
    entails(a, b) && entails(b, a)
}

/// Constraint satisfied exactly by the valuations that satisfy `δ` after
/// some delay.
pub fn past(delta: &Constraint) -> Constraint {
    let mut zs = to_zones(delta);
    zs.down();
    zs.to_constraint()
}

/// Constraint satisfied by every delay successor of a `δ` valuation, over
/// the clocks of `δ` only. Other clocks bound how far back a successor can
/// reach; use [`future_over`] when they exist.
pub fn future(delta: &Constraint) -> Constraint {
    future_over(delta, &delta.clocks())
}

/// Delay successors of `δ` over `clocks`, which must cover `δ`.
pub fn future_over(delta: &Constraint, clocks: &ClockSet) -> Constraint {
    let mut all = clocks.clone();
    all.extend(delta.clocks());
    let mut zs = ZoneSet::from_constraint(delta, &all).expect("clock set covers constraint");
    zs.up();
    zs.to_constraint()
}

/// Constraint satisfied exactly by `ν` and its delay successors.
pub fn future_of(v: &Valuation) -> Constraint {
    future(&Constraint::and_all(v.iter().map(|(c, x)| Constraint::Eq(c.clone(), *x))))
}

/// Constraint describing `{[λ↦0]ν | ν ⊨ δ}`.
pub fn reset_constraint(delta: &Constraint, lambda: &ResetSet) -> Constraint {
    if lambda.is_empty() {
        return delta.clone();
    }
    let mut clocks = delta.clocks();
    clocks.extend(lambda.iter().cloned());
    let mut zs = ZoneSet::from_constraint(delta, &clocks).expect("clock set covers constraint");
    zs.reset(lambda);
    zs.to_constraint()
}

/// Zeroes the clocks of `λ` that belong to the domain of `ν`.
pub fn apply_reset(v: &Valuation, lambda: &ResetSet) -> Valuation {
    let mut out = v.clone();
    for c in lambda.iter() {
        if out.get(c).is_some() {
            out.set(c.clone(), Rational::zero());
        }
    }
    out
}

pub fn shift(v: &Valuation, t: Rational) -> Result<Valuation, ConstraintError> {
    if t.is_negative() {
        return Err(ConstraintError::NegativeDelay(t));
    }
    let mut out = v.clone();
    for (c, x) in v.iter() {
        out.set(c.clone(), *x + t);
    }
    Ok(out)
}

/// `{ν+t′ | 0 ≤ t′ < t}`, or `t′ ≤ t` when `include_end`, over the clocks
/// of `ν`.
pub fn trajectory_zone(v: &Valuation, t: Rational, include_end: bool) -> Zone {
    let clocks: ClockSet = v.clocks();
    let mut z = Zone::universe(&clocks);
    let vals: Vec<(Clock, Rational)> = v.iter().map(|(c, x)| (c.clone(), *x)).collect();
    for (i, (_, vi)) in vals.iter().enumerate() {
        for (j, (_, vj)) in vals.iter().enumerate() {
            if i != j {
                z.constrain(i + 1, j + 1, Bound::Le(*vi - *vj));
            }
        }
    }
    if let Some((_, v0)) = vals.first() {
        z.constrain(0, 1, Bound::Le(-*v0));
        let end = *v0 + t;
        z.constrain(1, 0, if include_end { Bound::Le(end) } else { Bound::Lt(end) });
    }
    z
}

/// Finite set of delays that visits every region the guards distinguish
/// from `ν`: 0, each single-clock boundary, the midpoints between
/// consecutive boundaries, and one point past the last boundary.
pub fn boundary_delays(v: &Valuation, guards: &[Constraint], horizon: Rational) -> Vec<Rational> {
    densify_delays(boundary_points(v, guards, horizon), horizon)
}

/// Raw boundary delays `max(0, c - ν(x))` of the single-clock atoms, up to
/// `horizon`.
pub fn boundary_points(v: &Valuation, guards: &[Constraint], horizon: Rational) -> Vec<Rational> {
    let mut points = Vec::new();
    for g in guards {
        for (x, c) in g.clock_atoms() {
            let Some(now) = v.get(&x) else { continue };
            let d = (c - now).max(Rational::zero());
            if d <= horizon {
                points.push(d);
            }
        }
    }
    points
}

/// Adds 0, the midpoints of consecutive points and a point past the last
/// one (capped at `horizon`); sorted and deduplicated.
pub fn densify_delays(mut points: Vec<Rational>, horizon: Rational) -> Vec<Rational> {
    points.push(Rational::zero());
    points.sort();
    points.dedup();
    let mids: Vec<Rational> = points.windows(2).map(|w| w[0].midpoint(w[1])).collect();
    let last = *points.last().unwrap();
    points.extend(mids);
    points.push(horizon.min(last + Rational::one()));
    points.sort();
    points.dedup();
    points
}
