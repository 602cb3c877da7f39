//! Difference-bound matrices and finite unions of them.
//!
//! Entry `(i, j)` bounds `x_i - x_j`, with index 0 the constant-zero
//! reference clock. Non-empty zones are always kept canonical
//! (shortest-path closed).

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::rational::Rational;

use super::{Clock, ClockSet, Constraint, ConstraintError, ResetSet, Valuation};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Bound {
    /// `< c`
    Lt(Rational),
    /// `<= c`
    Le(Rational),
    Inf,
}

impl Bound {
    pub const ZERO: Bound = Bound::Le(Rational::zero());

    pub fn plus(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Inf, _) | (_, Bound::Inf) => Bound::Inf,
            (Bound::Le(a), Bound::Le(b)) => Bound::Le(a + b),
            (Bound::Lt(a), Bound::Le(b)) | (Bound::Le(a), Bound::Lt(b)) | (Bound::Lt(a), Bound::Lt(b)) => {
                Bound::Lt(a + b)
            }
        }
    }

    pub fn admits(self, d: Rational) -> bool {
        match self {
            Bound::Lt(c) => d < c,
            Bound::Le(c) => d <= c,
            Bound::Inf => true,
        }
    }

    pub fn value(self) -> Option<Rational> {
        match self {
            Bound::Lt(c) | Bound::Le(c) => Some(c),
            Bound::Inf => None,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Bound::Lt(_))
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Bound::Inf, Bound::Inf) => Ordering::Equal,
            (Bound::Inf, _) => Ordering::Greater,
            (_, Bound::Inf) => Ordering::Less,
            (a, b) => {
                let (va, vb) = (a.value().unwrap(), b.value().unwrap());
                va.cmp(&vb).then_with(|| match (a.is_strict(), b.is_strict()) {
                    (true, false) => Ordering::Less,
                    (false, true) => Ordering::Greater,
                    _ => Ordering::Equal,
                })
            }
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Lt(c) => write!(f, "<{c}"),
            Bound::Le(c) => write!(f, "<={c}"),
            Bound::Inf => write!(f, "<inf"),
        }
    }
}

#[derive(Clone)]
pub struct Zone {
    clocks: Arc<Vec<Clock>>,
    dim: usize,
    m: Vec<Bound>,
    empty: bool,
}

impl PartialEq for Zone {
    fn eq(&self, other: &Self) -> bool {
        if self.clocks != other.clocks {
            return false;
        }
        match (self.empty, other.empty) {
            (true, true) => true,
            (false, false) => self.m == other.m,
            _ => false,
        }
    }
}

impl Eq for Zone {}

impl Zone {
    /// All nonnegative valuations over `clocks`.
    pub fn universe(clocks: &ClockSet) -> Zone {
        Zone::universe_over(Arc::new(clocks.iter().cloned().collect()))
    }

    fn universe_over(clocks: Arc<Vec<Clock>>) -> Zone {
        let dim = clocks.len() + 1;
        let mut m = vec![Bound::Inf; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = Bound::ZERO;
            m[i] = Bound::ZERO;
        }
        Zone {
            clocks,
            dim,
            m,
            empty: false,
        }
    }

    pub fn clocks(&self) -> &[Clock] {
        &self.clocks
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// Matrix index of `c` (reference clock is 0).
    pub fn index(&self, c: &Clock) -> Option<usize> {
        self.clocks.binary_search(c).ok().map(|i| i + 1)
    }

    pub fn get(&self, i: usize, j: usize) -> Bound {
        self.m[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, b: Bound) {
        self.m[i * self.dim + j] = b;
    }

    fn mark_empty(&mut self) {
        self.empty = true;
    }

    pub fn canonicalize(&mut self) {
        if self.empty {
            return;
        }
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.get(i, k);
                if ik == Bound::Inf {
                    continue;
                }
                for j in 0..n {
                    let cand = ik.plus(self.get(k, j));
                    if cand < self.get(i, j) {
                        self.set(i, j, cand);
                    }
                }
            }
        }
        for i in 0..n {
            if self.get(i, i) < Bound::ZERO {
                self.mark_empty();
                return;
            }
        }
    }

    /// Intersects with `x_i - x_j ⋈ b`, keeping canonical form.
    /// Returns whether the zone stays non-empty.
    pub fn constrain(&mut self, i: usize, j: usize, b: Bound) -> bool {
        if self.empty {
            return false;
        }
        if b >= self.get(i, j) {
            return true;
        }
        if b.plus(self.get(j, i)) < Bound::ZERO {
            self.mark_empty();
            return false;
        }
        self.set(i, j, b);
        let n = self.dim;
        for a in 0..n {
            let ai = self.get(a, i);
            if ai == Bound::Inf {
                continue;
            }
            let via = ai.plus(b);
            for c in 0..n {
                let cand = via.plus(self.get(j, c));
                if cand < self.get(a, c) {
                    self.set(a, c, cand);
                }
            }
        }
        true
    }

    pub fn intersect(&self, other: &Zone) -> Zone {
        debug_assert_eq!(self.clocks, other.clocks);
        if self.empty || other.empty {
            let mut z = self.clone();
            z.mark_empty();
            return z;
        }
        let mut z = self.clone();
        for (k, b) in other.m.iter().enumerate() {
            if *b < z.m[k] {
                z.m[k] = *b;
            }
        }
        z.canonicalize();
        z
    }

    pub fn intersects(&self, other: &Zone) -> bool {
        !self.intersect(other).is_empty()
    }

    /// Panics if `v` lacks one of the zone's clocks.
    pub fn contains(&self, v: &Valuation) -> bool {
        if self.empty {
            return false;
        }
        let vals: Vec<Rational> = std::iter::once(Rational::zero())
            .chain(
                self.clocks
                    .iter()
                    .map(|c| v.get(c).unwrap_or_else(|| panic!("valuation lacks clock `{c}`"))),
            )
            .collect();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j && !self.get(i, j).admits(vals[i] - vals[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Zone) -> bool {
        if self.empty {
            return true;
        }
        if other.empty {
            return false;
        }
        self.m.iter().zip(other.m.iter()).all(|(a, b)| a <= b)
    }

    /// Delay predecessors: every valuation that reaches the zone by letting
    /// time pass.
    pub fn down(&mut self) {
        if self.empty {
            return;
        }
        for j in 1..self.dim {
            self.set(0, j, Bound::ZERO);
        }
        self.canonicalize();
    }

    /// Delay successors.
    pub fn up(&mut self) {
        if self.empty {
            return;
        }
        for i in 1..self.dim {
            self.set(i, 0, Bound::Inf);
        }
    }

    /// Sets clock index `x` to 0 in every valuation of the zone.
    pub fn reset_index(&mut self, x: usize) {
        if self.empty {
            return;
        }
        for j in 0..self.dim {
            let b0j = self.get(0, j);
            let bj0 = self.get(j, 0);
            self.set(x, j, b0j);
            self.set(j, x, bj0);
        }
        self.set(x, x, Bound::ZERO);
    }

    pub fn reset(&mut self, lambda: &ResetSet) {
        for c in lambda.iter() {
            if let Some(i) = self.index(c) {
                self.reset_index(i);
            }
        }
    }

    /// Finite off-diagonal entries that are not implied by nonnegativity.
    fn entries(&self) -> Vec<(usize, usize, Bound)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                let b = self.get(i, j);
                if b == Bound::Inf || (i == 0 && b == Bound::ZERO) {
                    continue;
                }
                out.push((i, j, b));
            }
        }
        out
    }

    fn from_entries(clocks: &Arc<Vec<Clock>>, entries: &[(usize, usize, Bound)]) -> Zone {
        let mut z = Zone::universe_over(clocks.clone());
        for &(i, j, b) in entries {
            if b < z.get(i, j) {
                z.set(i, j, b);
            }
        }
        z.canonicalize();
        z
    }

    /// Equivalent constraint with redundant bounds dropped.
    pub fn to_constraint(&self) -> Constraint {
        if self.empty {
            return Constraint::falsity();
        }
        let mut kept = self.entries();
        // Try dropping diagonal entries first and later clocks before
        // earlier ones: bounds on the first clocks read better.
        kept.sort_by_key(|&(i, j, _)| (i == 0 || j == 0, std::cmp::Reverse(i.max(j)), i, j));
        let mut k = 0;
        while k < kept.len() {
            let mut trial = kept.clone();
            trial.remove(k);
            if Zone::from_entries(&self.clocks, &trial) == *self {
                kept = trial;
            } else {
                k += 1;
            }
        }
        let has = |i: usize, j: usize| kept.iter().any(|&(a, b, _)| a == i && b == j);
        let mut atoms = Vec::new();
        for x in 1..self.dim {
            let clock = self.clocks[x - 1].clone();
            let upper = has(x, 0).then(|| self.get(x, 0));
            let lower = has(0, x).then(|| self.get(0, x));
            let eq_at = |ub: Bound, lb: Bound| match (ub, lb) {
                (Bound::Le(u), Bound::Le(l)) if u == -l => Some(u),
                _ => None,
            };
            if let Some(c) = eq_at(self.get(x, 0), self.get(0, x)).filter(|_| upper.is_some() || lower.is_some()) {
                atoms.push(Constraint::Eq(clock, c));
                continue;
            }
            let lo = lower.map(|b| match b {
                Bound::Lt(c) => Constraint::gt(clock.clone(), -c),
                Bound::Le(c) => Constraint::ge(clock.clone(), -c),
                Bound::Inf => unreachable!(),
            });
            let hi = upper.map(|b| match b {
                Bound::Lt(c) => Constraint::lt(clock.clone(), c),
                Bound::Le(c) => Constraint::le(clock.clone(), c),
                Bound::Inf => unreachable!(),
            });
            match (lo, hi) {
                (Some(l), Some(h)) => atoms.push(l.and(h)),
                (Some(l), None) => atoms.push(l),
                (None, Some(h)) => atoms.push(h),
                (None, None) => {}
            }
        }
        for i in 1..self.dim {
            for j in 1..self.dim {
                if i == j || !has(i, j) {
                    continue;
                }
                let (xi, xj) = (self.clocks[i - 1].clone(), self.clocks[j - 1].clone());
                if let (Bound::Le(u), Bound::Le(l)) = (self.get(i, j), self.get(j, i)) {
                    if u == -l {
                        // Emit the equality once, from the lower index.
                        if i < j || !has(j, i) {
                            atoms.push(Constraint::DiffEq(xi, xj, u));
                        }
                        continue;
                    }
                }
                atoms.push(match self.get(i, j) {
                    Bound::Lt(c) => Constraint::diff_lt(xi, xj, c),
                    Bound::Le(c) => Constraint::diff_le(xi, xj, c),
                    Bound::Inf => unreachable!(),
                });
            }
        }
        Constraint::and_all(atoms)
    }
}

impl fmt::Debug for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Zone({})", self.to_constraint())
    }
}

/// A finite union of non-empty canonical zones over one clock set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZoneSet {
    clocks: Arc<Vec<Clock>>,
    zones: Vec<Zone>,
}

enum Literal {
    Pos,
    Neg,
}

impl ZoneSet {
    pub fn empty(clocks: &ClockSet) -> ZoneSet {
        ZoneSet {
            clocks: Arc::new(clocks.iter().cloned().collect()),
            zones: Vec::new(),
        }
    }

    pub fn universe(clocks: &ClockSet) -> ZoneSet {
        let z = Zone::universe(clocks);
        ZoneSet {
            clocks: z.clocks.clone(),
            zones: vec![z],
        }
    }

    /// Zones of `δ` over `clocks`, which must cover every clock of `δ`.
    pub fn from_constraint(delta: &Constraint, clocks: &ClockSet) -> Result<ZoneSet, ConstraintError> {
        if let Some(missing) = delta.clocks().iter().find(|c| !clocks.contains(*c)) {
            return Err(ConstraintError::UnknownClock(missing.name().to_string()));
        }
        let mut set = ZoneSet::universe(clocks);
        set.zones = refine(set.zones, delta, true);
        set.prune();
        Ok(set)
    }

    pub fn clocks(&self) -> &[Clock] {
        &self.clocks
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn contains(&self, v: &Valuation) -> bool {
        self.zones.iter().any(|z| z.contains(v))
    }

    pub fn intersects_zone(&self, zone: &Zone) -> bool {
        self.zones.iter().any(|z| z.intersects(zone))
    }

    pub fn down(&mut self) {
        for z in &mut self.zones {
            z.down();
        }
        self.prune();
    }

    pub fn up(&mut self) {
        for z in &mut self.zones {
            z.up();
        }
        self.prune();
    }

    pub fn reset(&mut self, lambda: &ResetSet) {
        for z in &mut self.zones {
            z.reset(lambda);
        }
        self.prune();
    }

    /// Drops zones contained in another member.
    pub fn prune(&mut self) {
        self.zones.retain(|z| !z.is_empty());
        let mut kept: Vec<Zone> = Vec::with_capacity(self.zones.len());
        for z in self.zones.drain(..) {
            if kept.iter().any(|k| z.is_subset_of(k)) {
                continue;
            }
            kept.retain(|k| !k.is_subset_of(&z));
            kept.push(z);
        }
        self.zones = kept;
    }

    pub fn to_constraint(&self) -> Constraint {
        Constraint::or_all(self.zones.iter().map(Zone::to_constraint))
    }
}

type Alternative = Vec<(usize, usize, Bound)>;

fn atom_alternatives(z: &Zone, atom: &Constraint, lit: Literal) -> Vec<Alternative> {
    let idx = |c: &Clock| z.index(c).expect("clock checked before refinement");
    match (atom, lit) {
        (Constraint::Gt(x, c), Literal::Pos) => vec![vec![(0, idx(x), Bound::Lt(-*c))]],
        (Constraint::Gt(x, c), Literal::Neg) => vec![vec![(idx(x), 0, Bound::Le(*c))]],
        (Constraint::Eq(x, c), Literal::Pos) => {
            vec![vec![(idx(x), 0, Bound::Le(*c)), (0, idx(x), Bound::Le(-*c))]]
        }
        (Constraint::Eq(x, c), Literal::Neg) => vec![
            vec![(idx(x), 0, Bound::Lt(*c))],
            vec![(0, idx(x), Bound::Lt(-*c))],
        ],
        (Constraint::DiffGt(x, y, c), Literal::Pos) => vec![vec![(idx(y), idx(x), Bound::Lt(-*c))]],
        (Constraint::DiffGt(x, y, c), Literal::Neg) => vec![vec![(idx(x), idx(y), Bound::Le(*c))]],
        (Constraint::DiffEq(x, y, c), Literal::Pos) => vec![vec![
            (idx(x), idx(y), Bound::Le(*c)),
            (idx(y), idx(x), Bound::Le(-*c)),
        ]],
        (Constraint::DiffEq(x, y, c), Literal::Neg) => vec![
            vec![(idx(x), idx(y), Bound::Lt(*c))],
            vec![(idx(y), idx(x), Bound::Lt(-*c))],
        ],
        _ => unreachable!("not an atom"),
    }
}

/// Intersects every zone with `δ` (or its negation when `positive` is
/// false), splitting zones where the literal is a disjunction.
fn refine(zones: Vec<Zone>, delta: &Constraint, positive: bool) -> Vec<Zone> {
    if zones.is_empty() {
        return zones;
    }
    match delta {
        Constraint::True => {
            if positive {
                zones
            } else {
                Vec::new()
            }
        }
        Constraint::Not(a) => refine(zones, a, !positive),
        Constraint::And(a, b) => {
            if positive {
                let left = refine(zones, a, true);
                refine(left, b, true)
            } else {
                let mut out = refine(zones.clone(), a, false);
                out.extend(refine(zones, b, false));
                out
            }
        }
        atom => {
            let mut out = Vec::new();
            for z in zones {
                let lit = if positive { Literal::Pos } else { Literal::Neg };
                let alts = atom_alternatives(&z, atom, lit);
                for alt in alts {
                    let mut zz = z.clone();
                    if alt.iter().all(|&(i, j, b)| zz.constrain(i, j, b)) {
                        out.push(zz);
                    }
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{clock_set, parse_constraint};

    fn zs(src: &str, clocks: &[&str]) -> ZoneSet {
        ZoneSet::from_constraint(&parse_constraint(src).unwrap(), &clock_set(clocks.iter().copied())).unwrap()
    }

    #[test]
    fn bound_order() {
        let r = Rational::integer;
        assert!(Bound::Lt(r(1)) < Bound::Le(r(1)));
        assert!(Bound::Le(r(1)) < Bound::Lt(r(2)));
        assert!(Bound::Le(r(100)) < Bound::Inf);
        assert_eq!(Bound::Lt(r(1)).plus(Bound::Le(r(2))), Bound::Lt(r(3)));
    }

    #[test]
    fn true_is_one_universe_zone() {
        let z = zs("true", &["x"]);
        assert_eq!(z.len(), 1);
        assert_eq!(z.zones()[0], Zone::universe(&clock_set(["x"])));
    }

    #[test]
    fn interval_is_single_zone() {
        let z = zs("x>3 and x<5", &["x"]);
        assert_eq!(z.len(), 1);
        assert_eq!(z.to_constraint().to_string(), "3<x<5");
    }

    #[test]
    fn disequality_splits() {
        let z = zs("not (x=2)", &["x"]);
        assert_eq!(z.len(), 2);
    }

    #[test]
    fn contradiction_is_empty() {
        assert!(zs("x>3 and x<3", &["x"]).is_empty());
        assert!(zs("x-y>1 and y-x>0", &["x", "y"]).is_empty());
    }

    #[test]
    fn down_relaxes_lower_bounds_only() {
        let mut z = zs("x-y=1 and x<3", &["x", "y"]);
        z.down();
        assert_eq!(z.to_constraint().to_string(), "x<3 and x-y=1");
    }

    #[test]
    fn reset_pins_clock() {
        let mut z = zs("x>3", &["x", "y"]);
        z.reset(&ResetSet::of(["y"]));
        assert_eq!(z.to_constraint().to_string(), "x>3 and y=0");
    }

    #[test]
    fn subsumed_zones_are_pruned() {
        let z = zs("x<2 or x<5", &["x"]);
        assert_eq!(z.len(), 1);
        assert_eq!(z.to_constraint().to_string(), "x<5");
    }
}
