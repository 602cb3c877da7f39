//! Seeded random generators for constraints, valuations, types and
//! process terms, used by the property tests and the examples.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::constraints::{clock_set, Clock, Constraint, ResetSet, Valuation};
use crate::processes::{Branch, ProcNode, TimeoutExpr, Value};
use crate::rational::Rational;
use crate::types::{check_well_formed, ChoiceOption, Condition, Direction, TypeNode};

fn half(rng: &mut impl Rng, max_halves: i64) -> Rational {
    Rational::new(rng.gen_range(0..=max_halves) as i128, 2)
}

/// A random constraint over `clocks` with constants in halves up to
/// `max_halves / 2`. `size` bounds the number of atoms.
pub fn random_constraint(rng: &mut impl Rng, clocks: &[&str], max_halves: i64, size: usize) -> Constraint {
    if size <= 1 || rng.gen_bool(0.3) {
        return random_atom(rng, clocks, max_halves);
    }
    let left = rng.gen_range(1..size);
    match rng.gen_range(0..5) {
        0 => random_constraint(rng, clocks, max_halves, size - 1).not(),
        1 | 2 => random_constraint(rng, clocks, max_halves, left).and(random_constraint(rng, clocks, max_halves, size - left)),
        _ => random_constraint(rng, clocks, max_halves, left).or(random_constraint(rng, clocks, max_halves, size - left)),
    }
}

fn random_atom(rng: &mut impl Rng, clocks: &[&str], max_halves: i64) -> Constraint {
    let c = half(rng, max_halves);
    if clocks.len() >= 2 && rng.gen_bool(0.25) {
        let mut pair: Vec<&str> = clocks.choose_multiple(rng, 2).copied().collect();
        pair.shuffle(rng);
        let (x, y) = (pair[0], pair[1]);
        // Both signs of the difference matter.
        let c = if rng.gen_bool(0.5) { c } else { -c };
        return match rng.gen_range(0..6) {
            0 => Constraint::diff_lt(x, y, c),
            1 => Constraint::diff_le(x, y, c),
            2 => Constraint::diff_gt(x, y, c),
            3 => Constraint::diff_ge(x, y, c),
            4 => Constraint::diff_eq(x, y, c),
            _ => Constraint::diff_ne(x, y, c),
        };
    }
    let x = *clocks.choose(rng).expect("at least one clock");
    match rng.gen_range(0..7) {
        0 => Constraint::lt(x, c),
        1 => Constraint::le(x, c),
        2 => Constraint::gt(x, c),
        3 => Constraint::ge(x, c),
        4 => Constraint::eq(x, c),
        5 => Constraint::ne(x, c),
        _ => Constraint::True,
    }
}

/// Each clock gets a multiple of `1/denom` in `[0, max]`.
pub fn random_valuation(rng: &mut impl Rng, clocks: &[&str], max: i64, denom: i64) -> Valuation {
    Valuation::from_pairs(
        clocks
            .iter()
            .map(|x| (*x, Rational::new(rng.gen_range(0..=max * denom) as i128, denom as i128))),
    )
}

#[derive(Debug, Clone)]
pub struct TypeGen {
    pub clocks: Vec<&'static str>,
    /// Longest chain of nested choices.
    pub max_depth: usize,
    /// Guard constants are integers in `0..=max_const`.
    pub max_const: i64,
    pub max_options: usize,
    /// When false, mixed choices get independent random guards instead of
    /// a split at a common constant.
    pub disjoint_mixing: bool,
}

impl Default for TypeGen {
    fn default() -> Self {
        TypeGen {
            clocks: vec!["x", "y"],
            max_depth: 3,
            max_const: 5,
            max_options: 3,
            disjoint_mixing: true,
        }
    }
}

const LABELS: [&str; 6] = ["a", "b", "c", "d", "m", "n"];

#[derive(Clone)]
struct Binder {
    name: String,
    sent: bool,
    received: bool,
}

impl TypeGen {
    /// A random closed type. A recursion variable only occurs where the
    /// path from its binder both sends and receives.
    pub fn random_type(&self, rng: &mut impl Rng) -> TypeNode {
        let mut vars = Vec::new();
        let mut fresh = 0;
        self.node(rng, self.max_depth, &mut vars, &mut fresh, false)
    }

    /// Rejection sampling over [`TypeGen::random_type`]; only types that
    /// pass the well-formedness check at zero are returned.
    pub fn well_formed(&self, rng: &mut impl Rng) -> TypeNode {
        let v0 = Valuation::zero(&clock_set(self.clocks.iter().copied()));
        loop {
            let t = self.random_type(rng);
            if !t.is_end() && check_well_formed(&t, &v0).verdict {
                return t;
            }
        }
    }

    /// A type whose report lists only violations of `condition`, at least
    /// one of them.
    pub fn violating(&self, rng: &mut impl Rng, condition: Condition) -> TypeNode {
        let loose = TypeGen {
            disjoint_mixing: false,
            ..self.clone()
        };
        let v0 = Valuation::zero(&clock_set(self.clocks.iter().copied()));
        loop {
            let t = loose.random_type(rng);
            let report = check_well_formed(&t, &v0);
            if !report.verdict && report.violations.iter().all(|v| v.condition == condition) {
                return t;
            }
        }
    }

    fn node(&self, rng: &mut impl Rng, depth: usize, vars: &mut Vec<Binder>, fresh: &mut usize, under_rec: bool) -> TypeNode {
        let usable: Vec<String> = vars.iter().filter(|b| b.sent && b.received).map(|b| b.name.clone()).collect();
        if depth == 0 || (depth < self.max_depth && rng.gen_bool(0.15)) {
            if !usable.is_empty() && rng.gen_bool(0.7) {
                return TypeNode::var(usable.choose(rng).unwrap());
            }
            return TypeNode::End;
        }
        if !under_rec && vars.len() < 2 && rng.gen_bool(0.3) {
            let name = format!("t{}", *fresh);
            *fresh += 1;
            vars.push(Binder {
                name: name.clone(),
                sent: false,
                received: false,
            });
            let body = self.node(rng, depth, vars, fresh, true);
            vars.pop();
            return TypeNode::rec(&name, body);
        }
        let k = rng.gen_range(1..=self.max_options);
        let mut labels = LABELS.to_vec();
        labels.shuffle(rng);
        let first = if rng.gen_bool(0.5) { Direction::Send } else { Direction::Recv };
        let mixed = k >= 2 && rng.gen_bool(0.5);
        // For a disjoint mixed choice, the sides split at `s` on clock `c`.
        let split_clock = *self.clocks.choose(rng).unwrap();
        let split = rng.gen_range(1..=self.max_const);
        let strict = rng.gen_bool(0.5);
        let mut opts = Vec::with_capacity(k);
        for (i, label) in labels.into_iter().take(k).enumerate() {
            let dir = if mixed && i % 2 == 1 { first.flip() } else { first };
            let guard = if mixed && self.disjoint_mixing {
                match (dir == first, strict) {
                    (true, true) => Constraint::lt(split_clock, split),
                    (true, false) => Constraint::le(split_clock, split),
                    (false, true) => Constraint::ge(split_clock, split),
                    (false, false) => Constraint::gt(split_clock, split),
                }
            } else {
                self.random_guard(rng)
            };
            let resets = ResetSet(
                self.clocks
                    .iter()
                    .filter(|_| rng.gen_bool(0.4))
                    .map(|c| Clock::new(c))
                    .collect(),
            );
            let saved = vars.clone();
            for b in vars.iter_mut() {
                match dir {
                    Direction::Send => b.sent = true,
                    Direction::Recv => b.received = true,
                }
            }
            let cont = self.node(rng, depth - 1, vars, fresh, false);
            *vars = saved;
            opts.push(ChoiceOption::new(dir, label, guard, resets, cont));
        }
        TypeNode::Choice(opts)
    }

    fn random_guard(&self, rng: &mut impl Rng) -> Constraint {
        let x = *self.clocks.choose(rng).unwrap();
        let c = rng.gen_range(0..=self.max_const);
        match rng.gen_range(0..8) {
            0 => Constraint::True,
            1 => Constraint::lt(x, c.max(1)),
            2 => Constraint::le(x, c),
            3 => Constraint::gt(x, c),
            4 => Constraint::ge(x, c),
            5 => Constraint::eq(x, c),
            _ => {
                let lo = c.min(self.max_const - 1);
                let hi = rng.gen_range(lo + 1..=self.max_const);
                Constraint::gt(x, lo).and(Constraint::lt(x, hi))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProcGen {
    pub max_depth: usize,
    /// Also produce set, if, send, call and delay-constraint prefixes,
    /// for which time passing is undefined.
    pub instant_prefixes: bool,
}

impl Default for ProcGen {
    fn default() -> Self {
        ProcGen {
            max_depth: 3,
            instant_prefixes: false,
        }
    }
}

impl ProcGen {
    /// A session `new (p,q) { P | Q | pq:[..] | qp:[..] }`, some messages
    /// already queued.
    pub fn session(&self, rng: &mut impl Rng) -> ProcNode {
        let mut parts = vec![self.thread(rng, self.max_depth), self.thread(rng, self.max_depth)];
        for (from, to) in [("p", "q"), ("q", "p")] {
            let n = if rng.gen_bool(0.3) { rng.gen_range(1..=2) } else { 0 };
            let msgs = (0..n)
                .map(|_| (LABELS.choose(rng).unwrap().to_string(), Value::Unit))
                .collect();
            parts.push(ProcNode::Buffer {
                from: from.to_string(),
                to: to.to_string(),
                msgs,
            });
        }
        parts.shuffle(rng);
        ProcNode::scope("p", "q", ProcNode::par_all(parts))
    }

    pub fn thread(&self, rng: &mut impl Rng, depth: usize) -> ProcNode {
        if depth == 0 {
            return if rng.gen_bool(0.85) { ProcNode::End } else { ProcNode::Err };
        }
        let kinds = if self.instant_prefixes { 10 } else { 6 };
        match rng.gen_range(0..kinds) {
            0 => ProcNode::End,
            1 | 2 => ProcNode::Delay(half(rng, 8), Box::new(self.thread(rng, depth - 1))),
            3 | 4 => {
                let endpoint = if rng.gen_bool(0.5) { "p" } else { "q" };
                let after = match rng.gen_range(0..4) {
                    0 => TimeoutExpr::Infinite,
                    1 => TimeoutExpr::minus_timer(half(rng, 8), "x"),
                    _ => TimeoutExpr::constant(half(rng, 8)),
                };
                let n = rng.gen_range(1..=2);
                let branches = LABELS[..n]
                    .iter()
                    .map(|l| Branch {
                        label: l.to_string(),
                        binder: None,
                        body: self.thread(rng, depth - 1),
                    })
                    .collect();
                ProcNode::Receive {
                    endpoint: endpoint.to_string(),
                    branches,
                    after,
                    timeout: Box::new(self.thread(rng, depth - 1)),
                }
            }
            5 => ProcNode::par(self.thread(rng, depth - 1), self.thread(rng, depth - 1)),
            6 => ProcNode::SetTimer("x".to_string(), Box::new(self.thread(rng, depth - 1))),
            7 => ProcNode::Send {
                endpoint: if rng.gen_bool(0.5) { "p" } else { "q" }.to_string(),
                label: LABELS.choose(rng).unwrap().to_string(),
                value: Value::Unit,
                cont: Box::new(self.thread(rng, depth - 1)),
            },
            8 => ProcNode::If(
                random_constraint(rng, &["x"], 8, 2),
                Box::new(self.thread(rng, depth - 1)),
                Box::new(self.thread(rng, depth - 1)),
            ),
            _ => ProcNode::DelayConstraint {
                var: Some("z".to_string()),
                cond: Constraint::lt("z", half(rng, 8).max(Rational::new(1, 2))),
                cont: Box::new(self.thread(rng, depth - 1)),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_types_respect_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gen = TypeGen::default();
        for _ in 0..30 {
            let t = gen.well_formed(&mut rng);
            assert!(t.is_closed());
            assert!(t.depth() <= 3);
            assert!(t.clocks().len() <= 2);
            assert!(t.constants().iter().all(|c| *c <= Rational::integer(5)));
        }
    }

    #[test]
    fn violating_types_fail_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gen = TypeGen::default();
        let v0 = Valuation::zero(&clock_set(["x", "y"]));
        for cond in [Condition::Feasibility, Condition::MixedChoice] {
            let t = gen.violating(&mut rng, cond);
            let r = check_well_formed(&t, &v0);
            assert!(!r.verdict && r.has(cond));
        }
    }

    #[test]
    fn sessions_have_both_buffers() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = ProcGen::default().session(&mut rng);
        let mut buffers = 0;
        p.visit(&mut |n| buffers += matches!(n, ProcNode::Buffer { .. }) as usize);
        assert_eq!(buffers, 2);
    }
}
