//! Operational semantics of types: configurations, configurations with an
//! input queue, and systems of two such configurations.

mod compat;
mod explore;

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::constraints::{
    apply_reset, boundary_points, densify_delays, eval, shift, trajectory_zone, ClockSet, Constraint,
    ConstraintError, Valuation, ZoneSet,
};
use crate::rational::Rational;
use crate::types::{ChoiceOption, Direction, PayloadSort, TypeNode};

pub use compat::{compatible, dual_equivalent, CompatReport};
pub use explore::{
    check_progress, check_progress_observed, ExploreObserver, InvariantMonitor, ProgressReport, TraceStep, Verdict,
};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Message {
    pub label: String,
    pub sort: PayloadSort,
}

impl Message {
    pub fn new(label: &str, sort: PayloadSort) -> Self {
        Message {
            label: label.to_string(),
            sort,
        }
    }

    pub fn of(o: &ChoiceOption) -> Self {
        Message::new(&o.label, o.payload.clone())
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)?;
        if self.sort != PayloadSort::None {
            write!(f, "<{}>", self.sort)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ActionLabel {
    Comm(Direction, Message),
    Time(Rational),
    Tau,
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::Comm(d, m) => write!(f, "{d}{m}"),
            ActionLabel::Time(t) => write!(f, "{t}"),
            ActionLabel::Tau => f.write_str("tau"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unspecified reception: `{label}` carries {found}, expected {expected}")]
    UnspecifiedReception {
        label: String,
        expected: Box<PayloadSort>,
        found: Box<PayloadSort>,
    },
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

/// The premise of the time rule that rejected a delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refusal {
    /// Negative delay.
    Configuration,
    /// The configuration could act in the future before the delay but not after.
    Persistency,
    /// The head of the queue could have been received during the delay.
    Urgency,
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Refusal::Configuration => "configuration",
            Refusal::Persistency => "persistency",
            Refusal::Urgency => "urgency",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Config {
    pub valuation: Valuation,
    pub ty: TypeNode,
}

impl Config {
    pub fn new(valuation: Valuation, ty: TypeNode) -> Self {
        Config { valuation, ty }
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.valuation, self.ty)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QConfig {
    pub valuation: Valuation,
    pub ty: TypeNode,
    /// Messages waiting to be received, head first.
    pub queue: VecDeque<Message>,
}

impl QConfig {
    pub fn new(valuation: Valuation, ty: TypeNode) -> Self {
        QConfig {
            valuation,
            ty,
            queue: VecDeque::new(),
        }
    }

    pub fn with_queue(mut self, msgs: impl IntoIterator<Item = Message>) -> Self {
        self.queue.extend(msgs);
        self
    }

    pub fn config(&self) -> Config {
        Config::new(self.valuation.clone(), self.ty.clone())
    }

    pub fn is_final(&self) -> bool {
        self.queue.is_empty() && self.ty.unfold_head().is_end()
    }
}

impl fmt::Display for QConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} [", self.valuation, self.ty)?;
        for (i, m) in self.queue.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct System {
    pub left: QConfig,
    pub right: QConfig,
}

impl System {
    /// Both sides start at zero over `clocks` plus the clocks of both types,
    /// with empty queues.
    pub fn new(left: TypeNode, right: TypeNode, clocks: &ClockSet) -> Self {
        let mut all = clocks.clone();
        all.extend(left.clocks());
        all.extend(right.clocks());
        let v = Valuation::zero(&all);
        System {
            left: QConfig::new(v.clone(), left),
            right: QConfig::new(v, right),
        }
    }

    pub fn is_final(&self) -> bool {
        self.left.is_final() && self.right.is_final()
    }

    pub fn side(&self, side: Side) -> &QConfig {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// Largest guard constant of either type.
    pub fn max_constant(&self) -> Rational {
        self.left
            .ty
            .constants()
            .into_iter()
            .chain(self.right.ty.constants())
            .fold(Rational::zero(), Rational::max)
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} || {}", self.left, self.right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// The left side sends into the right queue.
    CommL,
    CommR,
    /// The left side receives from its own queue.
    ParL,
    ParR,
    Wait,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::CommL => "comm-L",
            Rule::CommR => "comm-R",
            Rule::ParL => "par-L",
            Rule::ParR => "par-R",
            Rule::Wait => "wait",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemStep {
    pub rule: Rule,
    pub label: ActionLabel,
    /// The message sent or received; `None` for waits.
    pub message: Option<Message>,
    pub delay: Option<Rational>,
    pub target: System,
}

impl SystemStep {
    /// `comm-L(!a)`, `par-R(?a)`, `wait(3/2)`.
    pub fn describe(&self) -> String {
        match (&self.message, self.delay) {
            (Some(m), _) => {
                let dir = if matches!(self.rule, Rule::CommL | Rule::CommR) { '!' } else { '?' };
                format!("{}({dir}{m})", self.rule)
            }
            (None, Some(t)) => format!("wait({t})"),
            (None, None) => self.rule.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploreLimits {
    pub max_depth: usize,
    pub max_queue: usize,
    /// Defaults to the largest constant plus 2.
    pub horizon: Option<Rational>,
    pub max_states: usize,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits {
            max_depth: 64,
            max_queue: 8,
            horizon: None,
            max_states: 100_000,
        }
    }
}

impl ExploreLimits {
    pub fn horizon_for(&self, sys: &System) -> Rational {
        self.horizon.unwrap_or_else(|| sys.max_constant() + Rational::integer(2))
    }
}

/// Precomputed view of the head of a type over a fixed clock set.
#[derive(Debug, Clone)]
pub(crate) struct Head {
    pub options: Vec<ChoiceOption>,
    /// Valuations from which some option becomes enabled after a delay.
    future_enabled: Option<ZoneSet>,
    guards: Vec<ZoneSet>,
}

impl Head {
    pub fn new(ty: &TypeNode, clocks: &ClockSet) -> Result<Head, ConstraintError> {
        let ty = ty.unfold_head();
        let options = match &ty {
            TypeNode::Choice(opts) => opts.clone(),
            _ => Vec::new(),
        };
        let guards = options
            .iter()
            .map(|o| ZoneSet::from_constraint(&o.guard, clocks))
            .collect::<Result<Vec<_>, _>>()?;
        let future_enabled = if options.is_empty() {
            None
        } else {
            let mut zs = ZoneSet::from_constraint(&Constraint::or_all(options.iter().map(|o| o.guard.clone())), clocks)?;
            zs.down();
            Some(zs)
        };
        Ok(Head {
            options,
            future_enabled,
            guards,
        })
    }

    fn of(q: &QConfig) -> Result<Head, ConstraintError> {
        Head::new(&q.ty, &q.valuation.clocks())
    }

    pub fn is_future_enabled(&self, v: &Valuation) -> bool {
        self.future_enabled.as_ref().is_some_and(|zs| zs.contains(v))
    }

    fn enabled(&self, i: usize, v: &Valuation) -> bool {
        self.guards[i].contains(v)
    }

    pub fn sends(&self, v: &Valuation) -> impl Iterator<Item = &ChoiceOption> + '_ {
        let v = v.clone();
        self.options
            .iter()
            .enumerate()
            .filter(move |(i, o)| o.dir == Direction::Send && self.enabled(*i, &v))
            .map(|(_, o)| o)
    }

    /// The receive option that takes `m` at `ν`, if any. A label match with a
    /// different sort is an error.
    pub fn receiver(&self, v: &Valuation, m: &Message) -> Result<Option<&ChoiceOption>, SemanticsError> {
        for (i, o) in self.options.iter().enumerate() {
            if o.dir != Direction::Recv || o.label != m.label {
                continue;
            }
            if o.payload != m.sort {
                return Err(SemanticsError::UnspecifiedReception {
                    label: m.label.clone(),
                    expected: Box::new(o.payload.clone()),
                    found: Box::new(m.sort.clone()),
                });
            }
            return Ok(self.enabled(i, v).then_some(o));
        }
        Ok(None)
    }

    /// The time rule for a configuration with queue.
    pub fn time(&self, q: &QConfig, t: Rational) -> Result<Valuation, Refusal> {
        if t.is_negative() {
            return Err(Refusal::Configuration);
        }
        if t.is_zero() {
            return Ok(q.valuation.clone());
        }
        let after = shift(&q.valuation, t).map_err(|_| Refusal::Configuration)?;
        if self.is_future_enabled(&q.valuation) && !self.is_future_enabled(&after) {
            return Err(Refusal::Persistency);
        }
        if let Some(m) = q.queue.front() {
            let traj = trajectory_zone(&q.valuation, t, false);
            for (i, o) in self.options.iter().enumerate() {
                if o.dir == Direction::Recv && o.label == m.label && o.payload == m.sort && self.guards[i].intersects_zone(&traj)
                {
                    return Err(Refusal::Urgency);
                }
            }
        }
        Ok(after)
    }

    /// Whether an internal step is possible at `q` right now.
    pub fn can_act(&self, q: &QConfig, v: &Valuation) -> bool {
        if self.sends(v).next().is_some() {
            return true;
        }
        match q.queue.front() {
            Some(m) => !matches!(self.receiver(v, m), Ok(None)),
            None => false,
        }
    }

    fn guard_list(&self) -> Vec<Constraint> {
        self.options.iter().map(|o| o.guard.clone()).collect()
    }
}

pub fn unfold_head(s: &TypeNode) -> TypeNode {
    s.unfold_head()
}

/// Communication steps of a configuration: every enabled option fires, with
/// its resets applied.
pub fn config_comm_steps(c: &Config) -> Vec<(ActionLabel, Config)> {
    let head = c.ty.unfold_head();
    let TypeNode::Choice(opts) = head else {
        return Vec::new();
    };
    opts.iter()
        .filter(|o| eval(&c.valuation, &o.guard).unwrap_or(false))
        .map(|o| {
            (
                ActionLabel::Comm(o.dir, Message::of(o)),
                Config::new(apply_reset(&c.valuation, &o.resets), o.cont.clone()),
            )
        })
        .collect()
}

pub fn config_tick(c: &Config, t: Rational) -> Result<Config, ConstraintError> {
    Ok(Config::new(shift(&c.valuation, t)?, c.ty.clone()))
}

/// Some option of the head is enabled now or after a delay. False for `end`.
pub fn is_future_enabled(c: &Config) -> bool {
    Head::new(&c.ty, &c.valuation.clocks())
        .map(|h| h.is_future_enabled(&c.valuation))
        .unwrap_or(false)
}

/// Sends of the configuration, plus the internal reception of the queue head.
pub fn qconfig_steps(q: &QConfig) -> Result<Vec<(ActionLabel, QConfig)>, SemanticsError> {
    let head = Head::of(q)?;
    let mut out = Vec::new();
    for o in head.sends(&q.valuation) {
        out.push((
            ActionLabel::Comm(Direction::Send, Message::of(o)),
            QConfig {
                valuation: apply_reset(&q.valuation, &o.resets),
                ty: o.cont.clone(),
                queue: q.queue.clone(),
            },
        ));
    }
    if let Some(next) = receive_head(&head, q)? {
        out.push((ActionLabel::Tau, next));
    }
    Ok(out)
}

fn receive_head(head: &Head, q: &QConfig) -> Result<Option<QConfig>, SemanticsError> {
    let Some(m) = q.queue.front() else { return Ok(None) };
    Ok(head.receiver(&q.valuation, m)?.map(|o| {
        let mut queue = q.queue.clone();
        queue.pop_front();
        QConfig {
            valuation: apply_reset(&q.valuation, &o.resets),
            ty: o.cont.clone(),
            queue,
        }
    }))
}

/// Appends `m` to the queue.
pub fn enqueue(q: &QConfig, m: Message) -> QConfig {
    let mut out = q.clone();
    out.queue.push_back(m);
    out
}

/// Lets `t` time units pass, or names the premise that forbids it. A zero
/// delay always succeeds and changes nothing.
pub fn qconfig_time(q: &QConfig, t: Rational) -> Result<QConfig, Refusal> {
    let head = Head::of(q).map_err(|_| Refusal::Configuration)?;
    let valuation = head.time(q, t)?;
    Ok(QConfig {
        valuation,
        ..q.clone()
    })
}

/// Instantaneous steps of a system: sends paired with enqueues, and
/// receptions from either queue.
pub fn system_steps(sys: &System) -> Result<Vec<SystemStep>, SemanticsError> {
    let l = Head::of(&sys.left)?;
    let r = Head::of(&sys.right)?;
    instant_steps(sys, &l, &r)
}

pub(crate) fn instant_steps(sys: &System, l: &Head, r: &Head) -> Result<Vec<SystemStep>, SemanticsError> {
    let mut out = Vec::new();
    for (side, head) in [(Side::Left, l), (Side::Right, r)] {
        let me = sys.side(side);
        for o in head.sends(&me.valuation) {
            let m = Message::of(o);
            let sent = QConfig {
                valuation: apply_reset(&me.valuation, &o.resets),
                ty: o.cont.clone(),
                queue: me.queue.clone(),
            };
            let (rule, target) = match side {
                Side::Left => (Rule::CommL, System { left: sent, right: enqueue(&sys.right, m.clone()) }),
                Side::Right => (Rule::CommR, System { left: enqueue(&sys.left, m.clone()), right: sent }),
            };
            out.push(SystemStep {
                rule,
                label: ActionLabel::Tau,
                message: Some(m),
                delay: None,
                target,
            });
        }
        if let Some(next) = receive_head(head, me)? {
            let m = me.queue.front().cloned();
            let (rule, target) = match side {
                Side::Left => (Rule::ParL, System { left: next, right: sys.right.clone() }),
                Side::Right => (Rule::ParR, System { left: sys.left.clone(), right: next }),
            };
            out.push(SystemStep {
                rule,
                label: ActionLabel::Tau,
                message: m,
                delay: None,
                target,
            });
        }
    }
    Ok(out)
}

/// Both sides let `t` pass.
pub fn system_wait(sys: &System, t: Rational) -> Result<System, (Side, Refusal)> {
    let left = qconfig_time(&sys.left, t).map_err(|r| (Side::Left, r))?;
    let right = qconfig_time(&sys.right, t).map_err(|r| (Side::Right, r))?;
    Ok(System { left, right })
}

pub(crate) fn wait_with(sys: &System, l: &Head, r: &Head, t: Rational) -> Option<System> {
    let lv = l.time(&sys.left, t).ok()?;
    let rv = r.time(&sys.right, t).ok()?;
    Some(System {
        left: QConfig { valuation: lv, ..sys.left.clone() },
        right: QConfig { valuation: rv, ..sys.right.clone() },
    })
}

/// Positive delays, drawn from the guard boundaries of both heads, that both
/// sides accept.
pub fn admissible_delays(sys: &System, horizon: Rational) -> Vec<Rational> {
    let (Ok(l), Ok(r)) = (Head::of(&sys.left), Head::of(&sys.right)) else {
        return Vec::new();
    };
    let mut points = boundary_points(&sys.left.valuation, &l.guard_list(), horizon);
    points.extend(boundary_points(&sys.right.valuation, &r.guard_list(), horizon));
    densify_delays(points, horizon)
        .into_iter()
        .filter(|t| !t.is_zero() && wait_with(sys, &l, &r, *t).is_some())
        .collect()
}

/// Instantaneous steps followed by one wait step per admissible delay.
pub fn all_steps(sys: &System, horizon: Rational) -> Result<Vec<SystemStep>, SemanticsError> {
    let mut out = system_steps(sys)?;
    for t in admissible_delays(sys, horizon) {
        if let Ok(target) = system_wait(sys, t) {
            out.push(SystemStep {
                rule: Rule::Wait,
                label: ActionLabel::Time(t),
                message: None,
                delay: Some(t),
                target,
            });
        }
    }
    Ok(out)
}
