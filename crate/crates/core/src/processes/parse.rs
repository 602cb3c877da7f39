use std::collections::BTreeSet;

use crate::constraints::parse_constraint_from;
use crate::syntax::{Cursor, ParseError, Pos, Tok};

use super::{Args, Branch, Params, ProcNode, TimeoutExpr, Value};

const KEYWORDS: &[&str] = &[
    "set", "to", "from", "recv", "after", "if", "then", "else", "delay", "def", "in", "end", "err", "new",
];

/// Endpoint pairs of the enclosing `new` blocks, innermost last.
#[derive(Debug, Clone, Default)]
pub struct ProcScope {
    sessions: Vec<(String, String)>,
}

pub fn parse_process(src: &str) -> Result<ProcNode, ParseError> {
    let mut cur = Cursor::new(src)?;
    let p = parse_process_from(&mut cur, &mut ProcScope::default())?;
    cur.expect_eof()?;
    Ok(p)
}

pub fn parse_process_from(cur: &mut Cursor, scope: &mut ProcScope) -> Result<ProcNode, ParseError> {
    let pos = cur.pos();
    let word = match cur.peek().clone() {
        Tok::LParen => {
            cur.bump();
            let mut parts = vec![parse_process_from(cur, scope)?];
            while cur.eat(&Tok::Pipe) {
                parts.push(parse_process_from(cur, scope)?);
            }
            cur.expect(&Tok::RParen)?;
            check_disjoint_timers(&parts, pos)?;
            return Ok(ProcNode::par_all(parts));
        }
        Tok::Ident(w) => w,
        other => return Err(cur.error(format!("expected process, found {other}"))),
    };
    cur.bump();
    match word.as_str() {
        "set" => {
            cur.expect(&Tok::LParen)?;
            let x = cur.ident()?;
            cur.expect(&Tok::RParen)?;
            cur.expect(&Tok::Dot)?;
            Ok(ProcNode::SetTimer(x, Box::new(parse_process_from(cur, scope)?)))
        }
        "to" => {
            let endpoint = cur.ident()?;
            cur.expect(&Tok::Bang)?;
            let (label, value) = parse_message(cur)?;
            cur.expect(&Tok::Dot)?;
            Ok(ProcNode::Send {
                endpoint,
                label,
                value,
                cont: Box::new(parse_process_from(cur, scope)?),
            })
        }
        "from" => parse_receive(cur, scope),
        "if" => {
            cur.expect(&Tok::LParen)?;
            let cond = parse_constraint_from(cur)?;
            cur.expect(&Tok::RParen)?;
            cur.expect_keyword("then")?;
            let p = parse_process_from(cur, scope)?;
            cur.expect_keyword("else")?;
            let q = parse_process_from(cur, scope)?;
            Ok(ProcNode::If(cond, Box::new(p), Box::new(q)))
        }
        "delay" => {
            cur.expect(&Tok::LParen)?;
            let mut probe = cur.clone();
            let exact = probe.number().ok().filter(|_| probe.at(&Tok::RParen));
            let node = if let Some(t) = exact {
                *cur = probe;
                cur.expect(&Tok::RParen)?;
                cur.expect(&Tok::Dot)?;
                ProcNode::Delay(t, Box::new(parse_process_from(cur, scope)?))
            } else {
                let cpos = cur.pos();
                let cond = parse_constraint_from(cur)?;
                let clocks = cond.clocks();
                if clocks.len() > 1 {
                    return Err(ParseError::new(cpos, "a delay constraint mentions a single clock"));
                }
                cur.expect(&Tok::RParen)?;
                cur.expect(&Tok::Dot)?;
                ProcNode::DelayConstraint {
                    var: clocks.iter().next().map(|c| c.name().to_string()),
                    cond,
                    cont: Box::new(parse_process_from(cur, scope)?),
                }
            };
            Ok(node)
        }
        "def" => {
            let name = cur.ident()?;
            cur.expect(&Tok::LParen)?;
            let params = parse_params(cur)?;
            cur.expect(&Tok::RParen)?;
            cur.expect(&Tok::EqTok)?;
            let body = parse_process_from(cur, scope)?;
            cur.expect_keyword("in")?;
            let cont = parse_process_from(cur, scope)?;
            Ok(ProcNode::Def {
                name,
                params,
                body: Box::new(body),
                cont: Box::new(cont),
                entered: false,
            })
        }
        "end" => Ok(ProcNode::End),
        "err" => Ok(ProcNode::Err),
        "new" => parse_session(cur, scope, pos),
        w if KEYWORDS.contains(&w) => Err(ParseError::new(pos, format!("unexpected keyword `{w}`"))),
        _ => {
            let args = if cur.eat(&Tok::Lt) {
                let a = parse_args(cur)?;
                cur.expect(&Tok::Gt)?;
                a
            } else {
                Args::default()
            };
            Ok(ProcNode::Call(word, args))
        }
    }
}

fn parse_message(cur: &mut Cursor) -> Result<(String, Value), ParseError> {
    let label = cur.ident()?;
    let value = if cur.eat(&Tok::LParen) {
        let v = parse_value(cur)?;
        cur.expect(&Tok::RParen)?;
        v
    } else {
        Value::Unit
    };
    Ok((label, value))
}

fn parse_value(cur: &mut Cursor) -> Result<Value, ParseError> {
    match cur.peek().clone() {
        Tok::Number(n) => {
            if !n.is_integer() {
                return Err(cur.error("payload numbers are naturals"));
            }
            cur.bump();
            Ok(Value::Nat(n.numerator() as u64))
        }
        Tok::Str(s) => {
            cur.bump();
            Ok(Value::Str(s))
        }
        Tok::Ident(w) => {
            cur.bump();
            Ok(match w.as_str() {
                "true" => Value::Bool(true),
                "false" => Value::Bool(false),
                _ => Value::Name(w),
            })
        }
        other => Err(cur.error(format!("expected payload, found {other}"))),
    }
}

fn parse_receive(cur: &mut Cursor, scope: &mut ProcScope) -> Result<ProcNode, ParseError> {
    let endpoint = cur.ident()?;
    cur.expect_keyword("recv")?;
    let open = cur.pos();
    let mut branches = Vec::new();
    if cur.eat(&Tok::LBrace) {
        loop {
            branches.push(parse_branch(cur, scope)?);
            if !cur.eat(&Tok::Comma) || cur.at(&Tok::RBrace) {
                break;
            }
        }
        cur.expect(&Tok::RBrace)?;
    } else {
        branches.push(parse_branch(cur, scope)?);
    }
    let mut seen = BTreeSet::new();
    for b in &branches {
        if !seen.insert(b.label.clone()) {
            return Err(ParseError::new(open, format!("duplicate branch label `{}`", b.label)));
        }
    }
    let (after, timeout) = if cur.eat_keyword("after") {
        let e = parse_timeout(cur)?;
        cur.expect(&Tok::LBrace)?;
        let q = parse_process_from(cur, scope)?;
        cur.expect(&Tok::RBrace)?;
        (e, q)
    } else {
        (TimeoutExpr::Infinite, ProcNode::End)
    };
    Ok(ProcNode::Receive {
        endpoint,
        branches,
        after,
        timeout: Box::new(timeout),
    })
}

fn parse_branch(cur: &mut Cursor, scope: &mut ProcScope) -> Result<Branch, ParseError> {
    let label = cur.ident()?;
    let binder = if cur.eat(&Tok::LParen) {
        let b = cur.ident()?;
        cur.expect(&Tok::RParen)?;
        Some(b)
    } else {
        None
    };
    cur.expect(&Tok::Arrow)?;
    Ok(Branch {
        label,
        binder,
        body: parse_process_from(cur, scope)?,
    })
}

/// `inf` or a sum of terms `c`, `x`, `c*x`, each with an optional sign.
pub(crate) fn parse_timeout(cur: &mut Cursor) -> Result<TimeoutExpr, ParseError> {
    if cur.eat(&Tok::Infinity) || cur.eat_keyword("inf") {
        return Ok(TimeoutExpr::Infinite);
    }
    let mut e = TimeoutExpr::constant(0);
    let mut negative = cur.eat(&Tok::Minus);
    loop {
        let (k, timer) = match cur.peek().clone() {
            Tok::Number(_) => {
                let n = cur.number()?;
                if cur.eat(&Tok::Star) {
                    (n, Some(cur.ident()?))
                } else {
                    (n, None)
                }
            }
            Tok::Ident(_) => (crate::Rational::one(), Some(cur.ident()?)),
            other => return Err(cur.error(format!("expected timeout term, found {other}"))),
        };
        let k = if negative { -k } else { k };
        if let TimeoutExpr::Linear { constant, terms } = &mut e {
            match timer {
                Some(x) => {
                    let entry = terms.entry(x).or_insert_with(crate::Rational::zero);
                    *entry = *entry + k;
                }
                None => *constant = *constant + k,
            }
            terms.retain(|_, k| !k.is_zero());
        }
        if cur.eat(&Tok::Plus) {
            negative = false;
        } else if cur.eat(&Tok::Minus) {
            negative = true;
        } else {
            return Ok(e);
        }
    }
}

fn comma_idents(cur: &mut Cursor) -> Result<Vec<String>, ParseError> {
    let mut out = Vec::new();
    if matches!(cur.peek(), Tok::Ident(_)) {
        out.push(cur.ident()?);
        while cur.eat(&Tok::Comma) {
            out.push(cur.ident()?);
        }
    }
    Ok(out)
}

/// `vs; xs; ss`, where trailing groups may be left out.
fn parse_params(cur: &mut Cursor) -> Result<Params, ParseError> {
    let values = comma_idents(cur)?;
    let timers = if cur.eat(&Tok::Semi) { comma_idents(cur)? } else { Vec::new() };
    let sessions = if cur.eat(&Tok::Semi) { comma_idents(cur)? } else { Vec::new() };
    Ok(Params {
        values,
        timers,
        sessions,
    })
}

fn parse_args(cur: &mut Cursor) -> Result<Args, ParseError> {
    let mut values = Vec::new();
    if !matches!(cur.peek(), Tok::Semi | Tok::Gt) {
        values.push(parse_value(cur)?);
        while cur.eat(&Tok::Comma) {
            values.push(parse_value(cur)?);
        }
    }
    let timers = if cur.eat(&Tok::Semi) { comma_idents(cur)? } else { Vec::new() };
    let sessions = if cur.eat(&Tok::Semi) { comma_idents(cur)? } else { Vec::new() };
    Ok(Args {
        values,
        timers,
        sessions,
    })
}

/// `new (p,q) { P | Q | pq:[..] | qp:[..] }`: exactly two processes and the
/// two buffers of the session, in any order.
fn parse_session(cur: &mut Cursor, scope: &mut ProcScope, pos: Pos) -> Result<ProcNode, ParseError> {
    cur.expect(&Tok::LParen)?;
    let p = cur.ident()?;
    cur.expect(&Tok::Comma)?;
    let q = cur.ident()?;
    cur.expect(&Tok::RParen)?;
    if p == q {
        return Err(ParseError::new(pos, "a session needs two distinct endpoints"));
    }
    cur.expect(&Tok::LBrace)?;
    scope.sessions.push((p.clone(), q.clone()));
    let parts = parse_session_parts(cur, scope, &p, &q);
    scope.sessions.pop();
    let parts = parts?;
    cur.expect(&Tok::RBrace)?;
    let procs: Vec<&ProcNode> = parts.iter().filter(|c| !matches!(c, ProcNode::Buffer { .. })).collect();
    let buffers: BTreeSet<(String, String)> = parts
        .iter()
        .filter_map(|c| match c {
            ProcNode::Buffer { from, to, .. } => Some((from.clone(), to.clone())),
            _ => None,
        })
        .collect();
    let expected = BTreeSet::from([(p.clone(), q.clone()), (q.clone(), p.clone())]);
    let buffer_count = parts.len() - procs.len();
    if procs.len() != 2 || buffer_count != 2 || buffers != expected {
        return Err(ParseError::new(
            pos,
            format!("malformed session: expected `new ({p},{q}) {{ P | Q | {p}{q}:[] | {q}{p}:[] }}`"),
        ));
    }
    check_disjoint_timers(&parts, pos)?;
    Ok(ProcNode::scope(&p, &q, ProcNode::par_all(parts)))
}

fn parse_session_parts(cur: &mut Cursor, scope: &mut ProcScope, p: &str, q: &str) -> Result<Vec<ProcNode>, ParseError> {
    let mut parts = Vec::new();
    loop {
        let is_buffer = matches!(cur.peek(), Tok::Ident(_)) && cur.peek_at(1) == &Tok::Colon;
        if is_buffer {
            let bpos = cur.pos();
            let name = cur.ident()?;
            cur.expect(&Tok::Colon)?;
            let (from, to) = if name == format!("{p}{q}") {
                (p, q)
            } else if name == format!("{q}{p}") {
                (q, p)
            } else {
                return Err(ParseError::new(bpos, format!("buffer `{name}` does not belong to session ({p},{q})")));
            };
            cur.expect(&Tok::LBracket)?;
            let mut msgs = Vec::new();
            if !cur.at(&Tok::RBracket) {
                msgs.push(parse_message(cur)?);
                while cur.eat(&Tok::Comma) {
                    msgs.push(parse_message(cur)?);
                }
            }
            cur.expect(&Tok::RBracket)?;
            parts.push(ProcNode::Buffer {
                from: from.to_string(),
                to: to.to_string(),
                msgs,
            });
        } else {
            parts.push(parse_process_from(cur, scope)?);
        }
        if !cur.eat(&Tok::Pipe) {
            return Ok(parts);
        }
    }
}

fn check_disjoint_timers(parts: &[ProcNode], pos: Pos) -> Result<(), ParseError> {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for part in parts {
        for x in part.set_timers() {
            if !seen.insert(x.clone()) {
                return Err(ParseError::new(pos, format!("timer `{x}` is set by more than one parallel component")));
            }
        }
    }
    Ok(())
}
