//! Instantaneous reductions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::constraints::{boundary_delays, eval, Constraint, Valuation};
use crate::rational::{Extended, Rational};

use super::time::eval_timeout;
use super::{Args, Branch, Params, ProcNode, TimeoutExpr, TimerEnv, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Set,
    If,
    Send,
    Recv,
    Timeout,
    Det,
    Def,
    Call,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::Set => "set",
            StepKind::If => "if",
            StepKind::Send => "send",
            StepKind::Recv => "recv",
            StepKind::Timeout => "timeout",
            StepKind::Det => "det",
            StepKind::Def => "def",
            StepKind::Call => "call",
        })
    }
}

/// One instantaneous reduction of the whole term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstantStep {
    /// Index of the redex in left-to-right order; Det yields several steps
    /// sharing one index.
    pub redex: usize,
    pub position: String,
    pub kind: StepKind,
    pub detail: String,
    pub timers: TimerEnv,
    pub term: ProcNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("stuck at {position}: {reason}")]
pub struct Stuck {
    pub position: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
enum Effect {
    Enqueue(String, String, Value),
    Dequeue(String),
}

#[derive(Debug, Clone)]
pub(crate) struct Red {
    pub node: ProcNode,
    effect: Option<Effect>,
    pub reset: Option<String>,
    pub kind: StepKind,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub(crate) struct Redex {
    pub path: Vec<String>,
    pub result: Result<Vec<Red>, String>,
}

impl Redex {
    pub fn position(&self) -> String {
        render_path(&self.path)
    }
}

pub(crate) fn render_path(path: &[String]) -> String {
    if path.is_empty() {
        "top".to_string()
    } else {
        path.join("/")
    }
}

/// Candidate durations for `delay(δ)` over the bound variable.
pub(crate) type Sampler<'s> = dyn FnMut(&str, &Constraint) -> Vec<Rational> + 's;

/// (endpoint, co-endpoint, head of the inbound buffer).
type Endpoint = (String, String, Option<(String, Value)>);

#[derive(Clone, Default)]
struct Ctx<'a> {
    /// Innermost last.
    endpoints: Vec<Endpoint>,
    defs: Vec<(&'a str, &'a Params, &'a ProcNode)>,
    path: Vec<String>,
}

impl Ctx<'_> {
    fn endpoint(&self, p: &str) -> Option<&Endpoint> {
        self.endpoints.iter().rev().find(|(e, _, _)| e == p)
    }

    fn with_segment(&self, seg: String) -> Self {
        let mut c = self.clone();
        c.path.push(seg);
        c
    }
}

pub(crate) fn timer_valuation(rho: &TimerEnv) -> Valuation {
    Valuation::from_pairs(rho.iter().map(|(x, v)| (x.as_str(), *v)))
}

/// Boundary samples of `δ` over `var`, unfiltered: 0, each boundary, the
/// midpoints and one point past the last boundary, up to the horizon.
pub(crate) fn det_grid(var: &str, cond: &Constraint, horizon: Option<Rational>) -> Vec<Rational> {
    let horizon = horizon.unwrap_or_else(|| {
        cond.constants().into_iter().max().unwrap_or_else(Rational::zero).max(Rational::zero()) + Rational::integer(2)
    });
    let zero = Valuation::from_pairs([(var, Rational::zero())]);
    boundary_delays(&zero, std::slice::from_ref(cond), horizon)
}

pub(crate) fn satisfies(var: &str, cond: &Constraint, t: Rational) -> bool {
    eval(&Valuation::from_pairs([(var, t)]), cond).unwrap_or(false)
}

/// The boundary samples of `δ` that satisfy it.
pub(crate) fn det_candidates(var: &str, cond: &Constraint, horizon: Option<Rational>) -> Vec<Rational> {
    det_grid(var, cond, horizon).into_iter().filter(|t| satisfies(var, cond, *t)).collect()
}

/// All redexes in left-to-right order; with `first_only` the search stops
/// at the first one, so the sampler is consulted at most once.
pub(crate) fn redexes(rho: &TimerEnv, p: &ProcNode, sampler: &mut Sampler<'_>, first_only: bool) -> Vec<Redex> {
    let mut out = Vec::new();
    collect(rho, p, &Ctx::default(), sampler, first_only, &mut out);
    out
}

fn leaf(ctx: &Ctx<'_>, result: Result<Vec<Red>, String>) -> Vec<Redex> {
    vec![Redex {
        path: ctx.path.clone(),
        result,
    }]
}

fn red(node: ProcNode, kind: StepKind, detail: String) -> Red {
    Red {
        node,
        effect: None,
        reset: None,
        kind,
        detail,
    }
}

fn collect<'a>(
    rho: &TimerEnv,
    p: &'a ProcNode,
    ctx: &Ctx<'a>,
    sampler: &mut Sampler<'_>,
    first_only: bool,
    out: &mut Vec<Redex>,
) {
    let found = match p {
        ProcNode::Par(..) => {
            let comps = p.components();
            for (i, c) in comps.iter().enumerate() {
                if first_only && !out.is_empty() {
                    return;
                }
                let mut inner = Vec::new();
                collect(rho, c, &ctx.with_segment(i.to_string()), sampler, first_only, &mut inner);
                for mut rx in inner {
                    if let Ok(reds) = &mut rx.result {
                        for r in reds.iter_mut() {
                            let mut parts: Vec<ProcNode> = comps.iter().map(|c| (*c).clone()).collect();
                            parts[i] = std::mem::replace(&mut r.node, ProcNode::End);
                            r.node = ProcNode::par_all(parts);
                        }
                    }
                    out.push(rx);
                }
            }
            return;
        }
        ProcNode::Scope(a, b, body) => {
            let parts = body.components();
            let head = |from: &str, to: &str| {
                parts.iter().find_map(|c| match c {
                    ProcNode::Buffer { from: f, to: t, msgs } if f == from && t == to => msgs.first().cloned(),
                    _ => None,
                })
            };
            let mut inner_ctx = ctx.with_segment(format!("new({a},{b})"));
            inner_ctx.endpoints.push((a.clone(), b.clone(), head(b, a)));
            inner_ctx.endpoints.push((b.clone(), a.clone(), head(a, b)));
            let mut inner = Vec::new();
            collect(rho, body, &inner_ctx, sampler, first_only, &mut inner);
            for mut rx in inner {
                if let Ok(reds) = &mut rx.result {
                    for r in reds.iter_mut() {
                        let mut node = std::mem::replace(&mut r.node, ProcNode::End);
                        if let Some(e) = r.effect.take() {
                            match apply_effect(&mut node, a, b, &e) {
                                true => {}
                                false => r.effect = Some(e),
                            }
                        }
                        r.node = ProcNode::Scope(a.clone(), b.clone(), Box::new(node));
                    }
                }
                out.push(rx);
            }
            return;
        }
        ProcNode::Def {
            name,
            params,
            body,
            cont,
            entered: true,
        } => {
            let mut inner_ctx = ctx.with_segment(format!("def {name}"));
            inner_ctx.defs.push((name, params, body));
            let mut inner = Vec::new();
            collect(rho, cont, &inner_ctx, sampler, first_only, &mut inner);
            for mut rx in inner {
                if let Ok(reds) = &mut rx.result {
                    for r in reds.iter_mut() {
                        let node = std::mem::replace(&mut r.node, ProcNode::End);
                        r.node = ProcNode::Def {
                            name: name.clone(),
                            params: params.clone(),
                            body: body.clone(),
                            cont: Box::new(node),
                            entered: true,
                        };
                    }
                }
                out.push(rx);
            }
            return;
        }
        ProcNode::Def {
            name,
            params,
            body,
            cont,
            entered: false,
        } => leaf(
            ctx,
            Ok(vec![red(
                ProcNode::Def {
                    name: name.clone(),
                    params: params.clone(),
                    body: body.clone(),
                    cont: cont.clone(),
                    entered: true,
                },
                StepKind::Def,
                name.clone(),
            )]),
        ),
        ProcNode::SetTimer(x, cont) => {
            let mut r = red((**cont).clone(), StepKind::Set, x.clone());
            r.reset = Some(x.clone());
            leaf(ctx, Ok(vec![r]))
        }
        ProcNode::If(c, then, els) => {
            let result = match eval(&timer_valuation(rho), c) {
                Ok(true) => Ok(vec![red((**then).clone(), StepKind::If, format!("({c}) then"))]),
                Ok(false) => Ok(vec![red((**els).clone(), StepKind::If, format!("({c}) else"))]),
                Err(e) => Err(format!("condition ({c}): {e}")),
            };
            leaf(ctx, result)
        }
        ProcNode::Send {
            endpoint,
            label,
            value,
            cont,
        } => {
            let result = match ctx.endpoint(endpoint) {
                None => Err(format!("endpoint `{endpoint}` is not bound by a session")),
                Some(_) => {
                    let mut detail = format!("{endpoint} ! {label}");
                    if *value != Value::Unit {
                        detail.push_str(&format!("({value})"));
                    }
                    let mut r = red((**cont).clone(), StepKind::Send, detail);
                    r.effect = Some(Effect::Enqueue(endpoint.clone(), label.clone(), value.clone()));
                    Ok(vec![r])
                }
            };
            leaf(ctx, result)
        }
        ProcNode::Receive {
            endpoint,
            branches,
            after,
            timeout,
        } => {
            let head = ctx.endpoint(endpoint).and_then(|(_, _, h)| h.clone());
            match head {
                Some((label, value)) => {
                    let result = match branches.iter().find(|b| b.label == label) {
                        None => Err(format!("unspecified reception: `{label}` on `{endpoint}`")),
                        Some(b) => {
                            let body = match &b.binder {
                                Some(x) => Subst::names([(x.clone(), value.clone())]).apply(&b.body),
                                None => b.body.clone(),
                            };
                            let mut detail = format!("{endpoint} ? {label}");
                            if value != Value::Unit {
                                detail.push_str(&format!("({value})"));
                            }
                            let mut r = red(body, StepKind::Recv, detail);
                            r.effect = Some(Effect::Dequeue(endpoint.clone()));
                            Ok(vec![r])
                        }
                    };
                    leaf(ctx, result)
                }
                None => match eval_timeout(after, rho) {
                    Ok(Extended::Finite(e)) if e.is_zero() => leaf(
                        ctx,
                        Ok(vec![red((**timeout).clone(), StepKind::Timeout, format!("{endpoint} after {after}"))]),
                    ),
                    Ok(_) => Vec::new(),
                    Err(e) => leaf(ctx, Err(e.to_string())),
                },
            }
        }
        ProcNode::DelayConstraint { var, cond, cont } => {
            let v = var.as_deref().unwrap_or("_");
            let ts = sampler(v, cond);
            let result = if ts.is_empty() {
                Err(format!("no duration satisfies delay({cond})"))
            } else {
                Ok(ts
                    .into_iter()
                    .map(|t| red(ProcNode::Delay(t, cont.clone()), StepKind::Det, format!("{v} := {t}")))
                    .collect())
            };
            leaf(ctx, result)
        }
        ProcNode::Call(name, args) => {
            let result = match ctx.defs.iter().rev().find(|(n, _, _)| n == name) {
                None => Err(format!("undefined process `{name}`")),
                Some((_, params, body)) => instantiate(params, body, args)
                    .map(|b| vec![red(b, StepKind::Call, format!("{name}<{args}>"))]),
            };
            leaf(ctx, result)
        }
        ProcNode::Delay(..) | ProcNode::End | ProcNode::Err | ProcNode::Buffer { .. } => Vec::new(),
    };
    out.extend(found);
}

fn apply_effect(body: &mut ProcNode, a: &str, b: &str, effect: &Effect) -> bool {
    let (owner, from, to) = match effect {
        Effect::Enqueue(p, ..) => (p.as_str(), p.as_str(), if p == a { b } else { a }),
        Effect::Dequeue(p) => (p.as_str(), if p == a { b } else { a }, p.as_str()),
    };
    if owner != a && owner != b {
        return false;
    }
    let mut parts: Vec<ProcNode> = body.components().into_iter().cloned().collect();
    for part in parts.iter_mut() {
        if let ProcNode::Buffer { from: f, to: t, msgs } = part {
            if f == from && t == to {
                match effect {
                    Effect::Enqueue(_, l, v) => msgs.push((l.clone(), v.clone())),
                    Effect::Dequeue(_) => {
                        msgs.remove(0);
                    }
                }
                *body = ProcNode::par_all(parts);
                return true;
            }
        }
    }
    false
}

fn instantiate(params: &Params, body: &ProcNode, args: &Args) -> Result<ProcNode, String> {
    if params.values.len() != args.values.len()
        || params.timers.len() != args.timers.len()
        || params.sessions.len() != args.sessions.len()
    {
        return Err(format!("arity mismatch: expected ({params}), got <{args}>"));
    }
    let mut names: BTreeMap<String, Value> =
        params.values.iter().cloned().zip(args.values.iter().cloned()).collect();
    names.extend(
        params
            .sessions
            .iter()
            .cloned()
            .zip(args.sessions.iter().map(|s| Value::Name(s.clone()))),
    );
    let timers = params.timers.iter().cloned().zip(args.timers.iter().cloned()).collect();
    Ok(Subst { names, timers }.apply(body))
}

/// Capture-avoiding substitution of names (values and endpoints) and
/// renaming of timers.
#[derive(Debug, Clone, Default)]
pub(crate) struct Subst {
    names: BTreeMap<String, Value>,
    timers: BTreeMap<String, String>,
}

impl Subst {
    fn names(pairs: impl IntoIterator<Item = (String, Value)>) -> Self {
        Subst {
            names: pairs.into_iter().collect(),
            timers: BTreeMap::new(),
        }
    }

    fn is_empty(&self) -> bool {
        self.names.is_empty() && self.timers.is_empty()
    }

    fn name(&self, n: &str) -> String {
        match self.names.get(n) {
            Some(Value::Name(m)) => m.clone(),
            _ => n.to_string(),
        }
    }

    fn value(&self, v: &Value) -> Value {
        match v {
            Value::Name(n) => self.names.get(n).cloned().unwrap_or_else(|| v.clone()),
            _ => v.clone(),
        }
    }

    fn timer(&self, x: &str) -> String {
        self.timers.get(x).cloned().unwrap_or_else(|| x.to_string())
    }

    fn captures(&self, binder: &str) -> bool {
        self.names.values().any(|v| matches!(v, Value::Name(n) if n == binder))
    }

    /// Enters the scope of name binders: shadowed entries are dropped and
    /// binders that would capture are renamed in `body`.
    fn under(&self, binders: &[String], body: &ProcNode) -> (Subst, Vec<String>, ProcNode) {
        let mut inner = self.clone();
        let mut body = body.clone();
        let mut renamed = Vec::new();
        for b in binders {
            inner.names.remove(b);
        }
        for b in binders {
            if inner.captures(b) {
                let fresh = fresh_name(b, &body, &inner);
                body = Subst::names([(b.clone(), Value::Name(fresh.clone()))]).apply(&body);
                renamed.push(fresh);
            } else {
                renamed.push(b.clone());
            }
        }
        (inner, renamed, body)
    }

    pub(crate) fn apply(&self, p: &ProcNode) -> ProcNode {
        if self.is_empty() {
            return p.clone();
        }
        match p {
            ProcNode::SetTimer(x, cont) => ProcNode::SetTimer(self.timer(x), Box::new(self.apply(cont))),
            ProcNode::Send {
                endpoint,
                label,
                value,
                cont,
            } => ProcNode::Send {
                endpoint: self.name(endpoint),
                label: label.clone(),
                value: self.value(value),
                cont: Box::new(self.apply(cont)),
            },
            ProcNode::Receive {
                endpoint,
                branches,
                after,
                timeout,
            } => ProcNode::Receive {
                endpoint: self.name(endpoint),
                branches: branches
                    .iter()
                    .map(|b| match &b.binder {
                        None => Branch {
                            label: b.label.clone(),
                            binder: None,
                            body: self.apply(&b.body),
                        },
                        Some(x) => {
                            let (inner, renamed, body) = self.under(std::slice::from_ref(x), &b.body);
                            Branch {
                                label: b.label.clone(),
                                binder: renamed.into_iter().next(),
                                body: inner.apply(&body),
                            }
                        }
                    })
                    .collect(),
                after: after.rename_timers(&self.timers),
                timeout: Box::new(self.apply(timeout)),
            },
            ProcNode::If(c, a, b) => ProcNode::If(
                c.map_clocks(&|k| crate::constraints::Clock::new(&self.timer(k.name()))),
                Box::new(self.apply(a)),
                Box::new(self.apply(b)),
            ),
            ProcNode::DelayConstraint { var, cond, cont } => ProcNode::DelayConstraint {
                var: var.clone(),
                cond: cond.clone(),
                cont: Box::new(self.apply(cont)),
            },
            ProcNode::Delay(t, cont) => ProcNode::Delay(*t, Box::new(self.apply(cont))),
            ProcNode::Def {
                name,
                params,
                body,
                cont,
                entered,
            } => {
                let mut binders = params.values.clone();
                binders.extend(params.sessions.iter().cloned());
                let (mut inner, renamed, new_body) = self.under(&binders, body);
                for x in &params.timers {
                    inner.timers.remove(x);
                }
                let (values, sessions) = renamed.split_at(params.values.len());
                ProcNode::Def {
                    name: name.clone(),
                    params: Params {
                        values: values.to_vec(),
                        timers: params.timers.clone(),
                        sessions: sessions.to_vec(),
                    },
                    body: Box::new(inner.apply(&new_body)),
                    cont: Box::new(self.apply(cont)),
                    entered: *entered,
                }
            }
            ProcNode::Call(name, args) => ProcNode::Call(
                name.clone(),
                Args {
                    values: args.values.iter().map(|v| self.value(v)).collect(),
                    timers: args.timers.iter().map(|x| self.timer(x)).collect(),
                    sessions: args.sessions.iter().map(|s| self.name(s)).collect(),
                },
            ),
            ProcNode::End => ProcNode::End,
            ProcNode::Err => ProcNode::Err,
            ProcNode::Scope(a, b, body) => {
                let (inner, renamed, body) = self.under(&[a.clone(), b.clone()], body);
                let body = inner.apply(&body);
                // Buffers follow their endpoints when a binder is renamed.
                let body = rename_buffers(&body, a, &renamed[0], b, &renamed[1]);
                ProcNode::Scope(renamed[0].clone(), renamed[1].clone(), Box::new(body))
            }
            ProcNode::Par(a, b) => ProcNode::par(self.apply(a), self.apply(b)),
            ProcNode::Buffer { from, to, msgs } => ProcNode::Buffer {
                from: self.name(from),
                to: self.name(to),
                msgs: msgs.iter().map(|(l, v)| (l.clone(), self.value(v))).collect(),
            },
        }
    }
}

fn rename_buffers(body: &ProcNode, a: &str, a2: &str, b: &str, b2: &str) -> ProcNode {
    if a == a2 && b == b2 {
        return body.clone();
    }
    let ren = |n: &String| {
        if n == a {
            a2.to_string()
        } else if n == b {
            b2.to_string()
        } else {
            n.clone()
        }
    };
    let parts = body
        .components()
        .into_iter()
        .map(|c| match c {
            ProcNode::Buffer { from, to, msgs } => ProcNode::Buffer {
                from: ren(from),
                to: ren(to),
                msgs: msgs.clone(),
            },
            other => other.clone(),
        })
        .collect();
    ProcNode::par_all(parts)
}

fn fresh_name(base: &str, body: &ProcNode, s: &Subst) -> String {
    let mut used: BTreeSet<String> = BTreeSet::new();
    body.visit(&mut |p| {
        used.insert(p.to_string());
    });
    let taken = |n: &str| used.iter().any(|t| t.contains(n)) || s.captures(n) || s.names.contains_key(n);
    (1..).map(|i| format!("{base}{i}")).find(|n| !taken(n)).unwrap()
}

/// One-step instantaneous reductions of `p` under `ρ`. Det offers every
/// boundary sample of its constraint. Fails when some redex is stuck.
pub fn instant_step(rho: &TimerEnv, p: &ProcNode) -> Result<Vec<InstantStep>, Stuck> {
    let mut sampler = |v: &str, c: &Constraint| det_candidates(v, c, None);
    let mut out = Vec::new();
    for (i, rx) in redexes(rho, p, &mut sampler, false).into_iter().enumerate() {
        let position = rx.position();
        let reds = rx.result.map_err(|reason| Stuck {
            position: position.clone(),
            reason,
        })?;
        for r in reds {
            let mut timers = rho.clone();
            if let Some(x) = &r.reset {
                timers.insert(x.clone(), Rational::zero());
            }
            out.push(InstantStep {
                redex: i,
                position: position.clone(),
                kind: r.kind,
                detail: r.detail,
                timers,
                term: r.node,
            });
        }
    }
    Ok(out)
}

/// Walks the active part of the term: parallel components, scope bodies
/// and entered definitions.
pub(crate) fn active_leaves<'a>(p: &'a ProcNode, path: &mut Vec<String>, f: &mut impl FnMut(&'a ProcNode, &[String])) {
    match p {
        ProcNode::Par(..) => {
            for (i, c) in p.components().into_iter().enumerate() {
                path.push(i.to_string());
                active_leaves(c, path, f);
                path.pop();
            }
        }
        ProcNode::Scope(a, b, body) => {
            path.push(format!("new({a},{b})"));
            active_leaves(body, path, f);
            path.pop();
        }
        ProcNode::Def {
            name,
            cont,
            entered: true,
            ..
        } => {
            path.push(format!("def {name}"));
            active_leaves(cont, path, f);
            path.pop();
        }
        other => f(other, path),
    }
}

/// Every active component is `end` and every buffer is empty.
pub fn is_completed(p: &ProcNode) -> bool {
    let mut done = true;
    active_leaves(p, &mut Vec::new(), &mut |leaf, _| {
        done &= match leaf {
            ProcNode::End => true,
            ProcNode::Buffer { msgs, .. } => msgs.is_empty(),
            _ => false,
        };
    });
    done
}

/// Position of an active `err`, if any.
pub(crate) fn active_err(p: &ProcNode) -> Option<String> {
    let mut found = None;
    active_leaves(p, &mut Vec::new(), &mut |leaf, path| {
        if found.is_none() && *leaf == ProcNode::Err {
            found = Some(render_path(path));
        }
    });
    found
}

/// Earliest pending deadline: the shortest active delay or finite timeout.
pub(crate) fn next_deadline(p: &ProcNode) -> Option<Rational> {
    let mut best: Option<Rational> = None;
    active_leaves(p, &mut Vec::new(), &mut |leaf, _| {
        let t = match leaf {
            ProcNode::Delay(t, _) => Some(*t),
            ProcNode::Receive { after, .. } => after.value().and_then(Extended::finite),
            _ => None,
        };
        if let Some(t) = t.filter(|t| *t > Rational::zero()) {
            best = Some(best.map_or(t, |b| b.min(t)));
        }
    });
    best
}

/// Evaluates the timeouts of the active receives under `ρ`.
pub fn resolve_active(rho: &TimerEnv, p: &ProcNode) -> Result<ProcNode, Stuck> {
    fn go(rho: &TimerEnv, p: &ProcNode, path: &mut Vec<String>) -> Result<ProcNode, Stuck> {
        Ok(match p {
            ProcNode::Par(..) => {
                let mut parts = Vec::new();
                for (i, c) in p.components().into_iter().enumerate() {
                    path.push(i.to_string());
                    parts.push(go(rho, c, path)?);
                    path.pop();
                }
                ProcNode::par_all(parts)
            }
            ProcNode::Scope(a, b, body) => {
                path.push(format!("new({a},{b})"));
                let body = go(rho, body, path)?;
                path.pop();
                ProcNode::Scope(a.clone(), b.clone(), Box::new(body))
            }
            ProcNode::Def {
                name,
                params,
                body,
                cont,
                entered: true,
            } => {
                path.push(format!("def {name}"));
                let cont = go(rho, cont, path)?;
                path.pop();
                ProcNode::Def {
                    name: name.clone(),
                    params: params.clone(),
                    body: body.clone(),
                    cont: Box::new(cont),
                    entered: true,
                }
            }
            ProcNode::Receive {
                endpoint,
                branches,
                after,
                timeout,
            } if after.is_symbolic() => {
                let e = eval_timeout(after, rho).map_err(|e| Stuck {
                    position: render_path(path),
                    reason: e.to_string(),
                })?;
                ProcNode::Receive {
                    endpoint: endpoint.clone(),
                    branches: branches.clone(),
                    after: match e {
                        Extended::Finite(v) => TimeoutExpr::constant(v),
                        Extended::Infinite => TimeoutExpr::Infinite,
                    },
                    timeout: timeout.clone(),
                }
            }
            other => other.clone(),
        })
    }
    go(rho, p, &mut Vec::new())
}
