use std::collections::BTreeSet;

use crate::constraints::{parse_constraint_from, Clock, ClockSet, Constraint, ResetSet};
use crate::syntax::{Cursor, ParseError, Pos, Tok};

use super::{ChoiceOption, Direction, PayloadSort, TypeNode};

/// Scoping state threaded through the type parser.
#[derive(Debug, Clone, Default)]
pub struct TypeScope {
    /// When set, every clock mentioned must be declared here.
    pub declared_clocks: Option<ClockSet>,
    bound: Vec<String>,
    /// Variables bound since the last communication prefix.
    unguarded: Vec<String>,
}

impl TypeScope {
    pub fn with_clocks(clocks: ClockSet) -> Self {
        TypeScope {
            declared_clocks: Some(clocks),
            ..Default::default()
        }
    }
}

pub fn parse_type(src: &str) -> Result<TypeNode, ParseError> {
    let mut cur = Cursor::new(src)?;
    let t = parse_type_from(&mut cur, &mut TypeScope::default())?;
    cur.expect_eof()?;
    Ok(t)
}

pub fn parse_type_from(cur: &mut Cursor, scope: &mut TypeScope) -> Result<TypeNode, ParseError> {
    match cur.peek().clone() {
        Tok::LParen => {
            cur.bump();
            let t = parse_type_from(cur, scope)?;
            cur.expect(&Tok::RParen)?;
            Ok(t)
        }
        Tok::LBrace => {
            let open = cur.pos();
            cur.bump();
            let mut opts = vec![parse_option(cur, scope)?];
            while cur.eat(&Tok::Comma) {
                if cur.at(&Tok::RBrace) {
                    break;
                }
                opts.push(parse_option(cur, scope)?);
            }
            cur.expect(&Tok::RBrace)?;
            check_labels(&opts, open)?;
            Ok(TypeNode::Choice(opts))
        }
        Tok::Bang | Tok::Question => Ok(TypeNode::Choice(vec![parse_option(cur, scope)?])),
        Tok::Ident(word) => {
            let pos = cur.pos();
            cur.bump();
            match word.as_str() {
                "end" => Ok(TypeNode::End),
                "rec" | "μ" => {
                    let var_pos = cur.pos();
                    let var = cur.ident()?;
                    if scope.bound.contains(&var) {
                        return Err(ParseError::new(var_pos, format!("recursion variable `{var}` shadows an enclosing binder")));
                    }
                    cur.expect(&Tok::Dot)?;
                    scope.bound.push(var.clone());
                    scope.unguarded.push(var.clone());
                    let body = parse_type_from(cur, scope);
                    scope.bound.pop();
                    scope.unguarded.retain(|v| v != &var);
                    Ok(TypeNode::Rec(var, Box::new(body?)))
                }
                _ => {
                    if !scope.bound.contains(&word) {
                        return Err(ParseError::new(pos, format!("unbound recursion variable `{word}`")));
                    }
                    if scope.unguarded.contains(&word) {
                        return Err(ParseError::new(pos, format!("unguarded recursion on `{word}`")));
                    }
                    Ok(TypeNode::Var(word))
                }
            }
        }
        other => Err(cur.error(format!("expected session type, found {other}"))),
    }
}

fn check_labels(opts: &[ChoiceOption], pos: Pos) -> Result<(), ParseError> {
    let mut seen = BTreeSet::new();
    for o in opts {
        if !seen.insert(o.label.as_str()) {
            return Err(ParseError::new(pos, format!("duplicate label `{}` in choice", o.label)));
        }
    }
    Ok(())
}

fn check_clocks(scope: &TypeScope, clocks: impl IntoIterator<Item = Clock>, pos: Pos) -> Result<(), ParseError> {
    if let Some(declared) = &scope.declared_clocks {
        for c in clocks {
            if !declared.contains(&c) {
                return Err(ParseError::new(pos, format!("undeclared clock `{c}`")));
            }
        }
    }
    Ok(())
}

fn parse_option(cur: &mut Cursor, scope: &mut TypeScope) -> Result<ChoiceOption, ParseError> {
    let dir = match cur.bump() {
        Tok::Bang => Direction::Send,
        Tok::Question => Direction::Recv,
        other => return Err(cur.error(format!("expected `!` or `?`, found {other}"))),
    };
    let label = cur.ident()?;
    let payload = if cur.eat(&Tok::Lt) {
        let p = parse_sort(cur)?;
        cur.expect(&Tok::Gt)?;
        p
    } else {
        PayloadSort::None
    };
    let mut guard = Constraint::True;
    let mut resets = ResetSet::empty();
    if cur.at(&Tok::LParen) {
        cur.bump();
        let pos = cur.pos();
        if cur.at(&Tok::LBrace) {
            resets = parse_resets(cur)?;
        } else {
            guard = parse_constraint_from(cur)?;
            check_clocks(scope, guard.clocks(), pos)?;
            if cur.eat(&Tok::Comma) {
                resets = parse_resets(cur)?;
            }
        }
        check_clocks(scope, resets.iter().cloned(), pos)?;
        cur.expect(&Tok::RParen)?;
    }
    let cont = if cur.eat(&Tok::Dot) {
        let saved = std::mem::take(&mut scope.unguarded);
        let c = parse_type_from(cur, scope);
        scope.unguarded = saved;
        c?
    } else {
        TypeNode::End
    };
    Ok(ChoiceOption {
        dir,
        label,
        payload,
        guard,
        resets,
        cont,
    })
}

fn parse_resets(cur: &mut Cursor) -> Result<ResetSet, ParseError> {
    cur.expect(&Tok::LBrace)?;
    let mut set = BTreeSet::new();
    if !cur.at(&Tok::RBrace) {
        loop {
            set.insert(Clock::new(&cur.ident()?));
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    cur.expect(&Tok::RBrace)?;
    Ok(ResetSet(set))
}

pub(crate) fn parse_sort(cur: &mut Cursor) -> Result<PayloadSort, ParseError> {
    if cur.eat(&Tok::LParen) {
        let init = parse_constraint_from(cur)?;
        cur.expect(&Tok::Comma)?;
        // Delegated sessions are closed: parse them in a fresh scope.
        let mut inner = TypeScope::default();
        let s = parse_type_from(cur, &mut inner)?;
        cur.expect(&Tok::RParen)?;
        return Ok(PayloadSort::Delegate(init, Box::new(s)));
    }
    let name = cur.ident()?;
    match name.as_str() {
        "Nat" => Ok(PayloadSort::Nat),
        "Bool" => Ok(PayloadSort::Bool),
        "Str" | "String" => Ok(PayloadSort::Str),
        "None" => Ok(PayloadSort::None),
        other => Err(cur.error(format!("unknown sort `{other}`"))),
    }
}
