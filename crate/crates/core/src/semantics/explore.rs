//! Bounded breadth-first exploration of a system, looking for reachable
//! states that can never perform an internal step again.
//!
//! States are identified up to region equivalence: two valuations are
//! merged when they agree on integer parts (on the grid of the constants,
//! capped above the largest one), on which clocks sit on the grid, and on
//! the order of fractional parts. Waits are sampled at every grid crossing
//! and between consecutive crossings, so every time successor region is
//! reached.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use crate::constraints::{densify_delays, Clock, ClockSet, Valuation};
use crate::rational::Rational;
use crate::types::{Direction, TypeNode};

use super::{compatible, config_comm_steps, instant_steps, wait_with, ActionLabel, ExploreLimits, Head, Rule, System, SystemStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Ok,
    Counterexample,
    BoundExceeded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Ok => "ok",
            Verdict::Counterexample => "counterexample",
            Verdict::BoundExceeded => "bound-exceeded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    #[serde(skip)]
    pub depth: usize,
    pub action: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<Direction>,
    #[serde(skip)]
    pub left: String,
    #[serde(skip)]
    pub right: String,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let action = match (&self.label, self.dir, self.t) {
            (Some(l), Some(d), _) => format!("{}({d}{l})", self.action),
            (_, _, Some(t)) => format!("{}({t})", self.action),
            _ => self.action.clone(),
        };
        write!(f, "{} {} {} || {}", self.depth, action, self.left, self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgressReport {
    pub verdict: Verdict,
    pub states: usize,
    /// Shortest path to the offending state; empty unless a counterexample.
    pub trace: Vec<TraceStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// The offending state of a counterexample.
    #[serde(skip)]
    pub final_state: Option<System>,
}

impl ProgressReport {
    pub fn trace_lines(&self) -> String {
        self.trace.iter().map(|s| format!("{s}\n")).collect()
    }
}

pub trait ExploreObserver {
    fn on_state(&mut self, _sys: &System) {}
    fn on_step(&mut self, _from: &System, _step: &SystemStep) {}
}

impl ExploreObserver for () {}

/// Checks properties that must hold at every state reachable from a
/// compatible, well-formed system.
#[derive(Debug, Default, Clone)]
pub struct InvariantMonitor {
    pub states: usize,
    pub waits: usize,
    pub violations: Vec<String>,
}

impl ExploreObserver for InvariantMonitor {
    fn on_state(&mut self, sys: &System) {
        self.states += 1;
        for (name, q) in [("left", &sys.left), ("right", &sys.right)] {
            let dirs: Vec<Direction> = config_comm_steps(&q.config())
                .into_iter()
                .filter_map(|(l, _)| match l {
                    ActionLabel::Comm(d, _) => Some(d),
                    _ => None,
                })
                .collect();
            if dirs.contains(&Direction::Send) && dirs.contains(&Direction::Recv) {
                self.violations.push(format!("{name} can both send and receive at {sys}"));
            }
        }
        if let Some(reason) = compatible(sys).reason {
            self.violations.push(format!("incompatible state {sys}: {reason}"));
        }
    }

    fn on_step(&mut self, from: &System, step: &SystemStep) {
        if step.rule == Rule::Wait && step.delay.is_some_and(|t| !t.is_zero()) {
            self.waits += 1;
            if !from.left.queue.is_empty() || !from.right.queue.is_empty() {
                self.violations.push(format!("{} taken with a non-empty queue at {from}", step.describe()));
            }
        }
    }
}

pub fn check_progress(sys: &System, limits: &ExploreLimits) -> ProgressReport {
    check_progress_observed(sys, limits, &mut ())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Slot {
    Int(i128),
    Open(i128),
    Above,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct StateKey {
    left: usize,
    right: usize,
    lq: Vec<super::Message>,
    rq: Vec<super::Message>,
    slots: Vec<Slot>,
    order: Vec<usize>,
    diffs: Vec<Slot>,
}

struct Regions {
    scale: Rational,
    cap: i128,
    diagonal: bool,
    clocks: Vec<Clock>,
}

impl Regions {
    fn new(sys: &System) -> Regions {
        let mut consts = sys.left.ty.constants();
        consts.extend(sys.right.ty.constants());
        let d = Rational::common_denominator(consts.iter());
        let scale = Rational::integer(d);
        let max = consts.iter().copied().fold(Rational::zero(), Rational::max);
        Regions {
            scale,
            cap: (max * scale).floor(),
            diagonal: sys.left.ty.has_diagonal() || sys.right.ty.has_diagonal(),
            clocks: sys.left.valuation.clocks().into_iter().collect(),
        }
    }

    fn slot(&self, v: Rational) -> Slot {
        let s = v * self.scale;
        if s > Rational::integer(self.cap) {
            Slot::Above
        } else if s.is_integer() {
            Slot::Int(s.floor())
        } else {
            Slot::Open(s.floor())
        }
    }

    fn values(&self, sys: &System) -> Vec<Rational> {
        let side = |v: &Valuation| self.clocks.iter().map(|c| v.get(c).unwrap_or(Rational::zero())).collect::<Vec<_>>();
        let mut out = side(&sys.left.valuation);
        out.extend(side(&sys.right.valuation));
        out
    }

    fn slots_and_order(&self, vals: &[Rational]) -> (Vec<Slot>, Vec<usize>) {
        let slots: Vec<Slot> = vals.iter().map(|v| self.slot(*v)).collect();
        // Zero always takes rank 0, so clocks on the grid rank 0.
        let mut fracs: Vec<Rational> = std::iter::once(Rational::zero())
            .chain(vals
            .iter()
            .zip(&slots)
            .filter(|(_, s)| **s != Slot::Above)
            .map(|(v, _)| (*v * self.scale).fract()))
            .collect();
        fracs.sort();
        fracs.dedup();
        let order = vals
            .iter()
            .zip(&slots)
            .map(|(v, s)| {
                if *s == Slot::Above {
                    usize::MAX
                } else {
                    let f = (*v * self.scale).fract();
                    fracs.iter().position(|g| *g == f).expect("collected above")
                }
            })
            .collect();
        (slots, order)
    }

    fn diffs(&self, vals: &[Rational], slots: &[Slot]) -> Vec<Slot> {
        let mut out = Vec::new();
        if !self.diagonal {
            return out;
        }
        let n = self.clocks.len();
        for base in [0, n] {
            for i in 0..n {
                for j in 0..n {
                    let (a, b) = (base + i, base + j);
                    if i == j || (slots[a] != Slot::Above && slots[b] != Slot::Above) {
                        continue;
                    }
                    let d = (vals[a] - vals[b]) * self.scale;
                    out.push(if d.abs() > Rational::integer(self.cap) {
                        if d.is_negative() { Slot::Int(i128::MIN) } else { Slot::Above }
                    } else if d.is_integer() {
                        Slot::Int(d.floor())
                    } else {
                        Slot::Open(d.floor())
                    });
                }
            }
        }
        out
    }

    /// Replaces the valuations by a fixed member of their region so that
    /// denominators stay bounded. Skipped when diagonal guards make the
    /// distance between an above-cap clock and the others matter.
    fn normalize(&self, sys: &mut System) {
        let vals = self.values(sys);
        let (slots, order) = self.slots_and_order(&vals);
        if self.diagonal && slots.contains(&Slot::Above) {
            return;
        }
        let k = order.iter().filter(|o| **o != usize::MAX).max().copied().unwrap_or(0);
        let n = self.clocks.len();
        for (i, slot) in slots.iter().enumerate() {
            let scaled = match slot {
                Slot::Above => Rational::integer(self.cap + 1),
                Slot::Int(f) | Slot::Open(f) => {
                    Rational::integer(*f) + Rational::new(order[i] as i128, k as i128 + 1)
                }
            };
            let value = scaled / self.scale;
            let target = if i < n { &mut sys.left.valuation } else { &mut sys.right.valuation };
            target.set(self.clocks[i % n].clone(), value);
        }
    }

    /// Every positive delay at which some clock crosses the grid, the
    /// midpoints between them, and one delay past the last crossing.
    fn delays(&self, sys: &System, horizon: Rational) -> Vec<Rational> {
        let mut points = Vec::new();
        for v in self.values(sys) {
            for k in 0..=self.cap {
                let d = Rational::integer(k) / self.scale - v;
                if !d.is_negative() && d <= horizon {
                    points.push(d);
                }
            }
        }
        densify_delays(points, horizon).into_iter().filter(|t| !t.is_zero()).collect()
    }
}

struct Node {
    sys: System,
    parent: Option<(usize, SystemStep)>,
    depth: usize,
}

struct Explorer {
    regions: Regions,
    types: HashMap<TypeNode, usize>,
    heads: Vec<Rc<Head>>,
    clocks: ClockSet,
}

impl Explorer {
    fn intern(&mut self, ty: &TypeNode) -> usize {
        if let Some(id) = self.types.get(ty) {
            return *id;
        }
        let head = Head::new(ty, &self.clocks).expect("system valuations cover every clock of the types");
        let id = self.heads.len();
        self.types.insert(ty.clone(), id);
        self.heads.push(Rc::new(head));
        id
    }

    fn key(&mut self, sys: &System) -> StateKey {
        let vals = self.regions.values(sys);
        let (slots, order) = self.regions.slots_and_order(&vals);
        let diffs = self.regions.diffs(&vals, &slots);
        StateKey {
            left: self.intern(&sys.left.ty),
            right: self.intern(&sys.right.ty),
            lq: sys.left.queue.iter().cloned().collect(),
            rq: sys.right.queue.iter().cloned().collect(),
            slots,
            order,
            diffs,
        }
    }

    fn heads(&mut self, sys: &System) -> (Rc<Head>, Rc<Head>) {
        let l = self.intern(&sys.left.ty);
        let r = self.intern(&sys.right.ty);
        (self.heads[l].clone(), self.heads[r].clone())
    }
}

/// Breadth-first search for a reachable, non-final state from which no
/// internal step is possible now or after any admissible wait.
///
/// Final states (both sides `end` with empty queues) are not expanded.
pub fn check_progress_observed(sys: &System, limits: &ExploreLimits, obs: &mut dyn ExploreObserver) -> ProgressReport {
    let horizon = limits.horizon_for(sys);
    let regions = Regions::new(sys);
    let mut ex = Explorer {
        clocks: sys.left.valuation.clocks(),
        regions,
        types: HashMap::new(),
        heads: Vec::new(),
    };
    let mut start = sys.clone();
    start.left.ty = start.left.ty.unfold_head();
    start.right.ty = start.right.ty.unfold_head();
    ex.regions.normalize(&mut start);

    let mut nodes = vec![Node {
        sys: start.clone(),
        parent: None,
        depth: 0,
    }];
    let mut seen = HashMap::new();
    seen.insert(ex.key(&start), 0usize);
    let mut frontier = VecDeque::from([0usize]);
    let mut bounded = false;

    while let Some(id) = frontier.pop_front() {
        let cur = nodes[id].sys.clone();
        let depth = nodes[id].depth;
        obs.on_state(&cur);
        if cur.is_final() {
            continue;
        }
        let (l, r) = ex.heads(&cur);
        let instant = match instant_steps(&cur, &l, &r) {
            Ok(s) => s,
            Err(e) => return counterexample(&nodes, id, nodes.len(), e.to_string()),
        };
        let mut waits = Vec::new();
        for t in ex.regions.delays(&cur, horizon) {
            if let Some(target) = wait_with(&cur, &l, &r, t) {
                waits.push(SystemStep {
                    rule: Rule::Wait,
                    label: ActionLabel::Time(t),
                    message: None,
                    delay: Some(t),
                    target,
                });
            }
        }
        let progresses = !instant.is_empty()
            || waits.iter().any(|w| {
                let s = &w.target;
                l.can_act(&s.left, &s.left.valuation) || r.can_act(&s.right, &s.right.valuation)
            });
        if !progresses {
            return counterexample(&nodes, id, nodes.len(), "no internal step is possible now or after any delay".into());
        }
        if depth >= limits.max_depth {
            bounded = true;
            continue;
        }
        for mut step in instant.into_iter().chain(waits) {
            obs.on_step(&cur, &step);
            if step.target.left.queue.len() > limits.max_queue || step.target.right.queue.len() > limits.max_queue {
                bounded = true;
                continue;
            }
            step.target.left.ty = step.target.left.ty.unfold_head();
            step.target.right.ty = step.target.right.ty.unfold_head();
            ex.regions.normalize(&mut step.target);
            let key = ex.key(&step.target);
            if seen.contains_key(&key) {
                continue;
            }
            if nodes.len() >= limits.max_states {
                bounded = true;
                continue;
            }
            seen.insert(key, nodes.len());
            frontier.push_back(nodes.len());
            nodes.push(Node {
                sys: step.target.clone(),
                parent: Some((id, step)),
                depth: depth + 1,
            });
        }
    }
    ProgressReport {
        verdict: if bounded { Verdict::BoundExceeded } else { Verdict::Ok },
        states: nodes.len(),
        trace: Vec::new(),
        reason: bounded.then(|| "exploration limits reached".to_string()),
        final_state: None,
    }
}

fn counterexample(nodes: &[Node], mut id: usize, states: usize, reason: String) -> ProgressReport {
    let final_state = Some(nodes[id].sys.clone());
    let mut trace = Vec::new();
    loop {
        let n = &nodes[id];
        let (action, t, label, dir) = match &n.parent {
            None => ("init".to_string(), None, None, None),
            Some((_, step)) => {
                let dir = step.message.as_ref().map(|_| match step.rule {
                    Rule::CommL | Rule::CommR => Direction::Send,
                    _ => Direction::Recv,
                });
                (step.rule.to_string(), step.delay, step.message.as_ref().map(|m| m.to_string()), dir)
            }
        };
        trace.push(TraceStep {
            depth: n.depth,
            action,
            t,
            label,
            dir,
            left: n.sys.left.to_string(),
            right: n.sys.right.to_string(),
        });
        match &n.parent {
            Some((p, _)) => id = *p,
            None => break,
        }
    }
    trace.reverse();
    ProgressReport {
        verdict: Verdict::Counterexample,
        states,
        trace,
        reason: Some(reason),
        final_state,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::clock_set;
    use crate::types::parse_type;

    fn dual_system(src: &str) -> System {
        let s = parse_type(src).unwrap();
        System::new(s.clone(), s.dual(), &clock_set(["x", "y"]))
    }

    #[test]
    fn end_is_a_single_final_state() {
        let r = check_progress(&dual_system("end"), &ExploreLimits::default());
        assert_eq!(r.verdict, Verdict::Ok);
        assert_eq!(r.states, 1);
    }

    #[test]
    fn recursive_ping_pong_progresses() {
        let r = check_progress(
            &dual_system(
                "rec a.{ ?ping(x<=3,{x}).{ !pong(x<=3,{x}).a, ?timeout(x>3).end }, \
                 !pong(x>3,{x}).{ ?ping(x<=3,{x}).a, !timeout(x>3).end } }",
            ),
            &ExploreLimits::default(),
        );
        assert_eq!(r.verdict, Verdict::Ok, "{}", r.trace_lines());
    }

    #[test]
    fn eager_resender_floods_the_queue() {
        let r = check_progress(
            &dual_system("rec a.{ ?ping(x<=3,{x}).a, !pong(x>3,{x}).a }"),
            &ExploreLimits::default(),
        );
        assert_eq!(r.verdict, Verdict::BoundExceeded);
    }

    #[test]
    fn junk_gets_stuck() {
        let r = check_progress(&dual_system("!a(x>3).{ !b(y=2).end, ?c(2<x<5).end }"), &ExploreLimits::default());
        assert_eq!(r.verdict, Verdict::Counterexample);
        let last = r.trace.last().unwrap();
        assert!(last.left.contains("y=2") || last.left.contains("!b"), "{}", r.trace_lines());
        assert_eq!(r.trace[0].action, "init");
    }

    #[test]
    fn mismatched_partners_get_stuck() {
        let s = parse_type("!a(x<1).end").unwrap();
        let sys = System::new(s.clone(), s, &clock_set(["x"]));
        let r = check_progress(&sys, &ExploreLimits::default());
        assert_eq!(r.verdict, Verdict::Counterexample);
    }

    #[test]
    fn unbounded_sending_exceeds_queue_bound() {
        let s = parse_type("rec a.!m.a").unwrap();
        let other = parse_type("rec a.?m(x>10).a").unwrap();
        let sys = System::new(s, other, &clock_set(["x"]));
        let limits = ExploreLimits {
            max_queue: 3,
            ..Default::default()
        };
        assert_eq!(check_progress(&sys, &limits).verdict, Verdict::BoundExceeded);
    }

    #[test]
    fn monitor_sees_no_violation_on_duals() {
        let mut m = InvariantMonitor::default();
        let sys = dual_system("{ !data<Str>(x<3).?ack.end, ?timeout(x>4).end }");
        let r = check_progress_observed(&sys, &ExploreLimits::default(), &mut m);
        assert_eq!(r.verdict, Verdict::Ok);
        assert!(m.violations.is_empty(), "{:?}", m.violations);
        assert!(m.waits > 0);
    }

    #[test]
    fn region_normalization_keeps_the_region() {
        let sys = dual_system("!a(x<3).end");
        let mut s = sys.clone();
        s.left.valuation.set("x".into(), Rational::new(7, 3));
        s.left.valuation.set("y".into(), Rational::new(1, 5));
        s.right.valuation = s.left.valuation.clone();
        let regions = Regions::new(&sys);
        let before = regions.slots_and_order(&regions.values(&s));
        let mut n = s.clone();
        regions.normalize(&mut n);
        assert_eq!(regions.slots_and_order(&regions.values(&n)), before);
    }
}
