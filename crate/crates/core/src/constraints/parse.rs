use crate::rational::Rational;
use crate::syntax::{Cursor, ParseError, Tok};

use super::{Clock, Constraint};

const RESERVED: [&str; 5] = ["true", "false", "not", "and", "or"];

pub fn parse_constraint(src: &str) -> Result<Constraint, ParseError> {
    let mut cur = Cursor::new(src)?;
    let c = parse_constraint_from(&mut cur)?;
    cur.expect_eof()?;
    Ok(c)
}

/// Parses a constraint starting at the cursor, stopping before the first
/// token that cannot continue it (`,`, `)`, ...).
pub fn parse_constraint_from(cur: &mut Cursor) -> Result<Constraint, ParseError> {
    parse_or(cur)
}

fn parse_or(cur: &mut Cursor) -> Result<Constraint, ParseError> {
    let mut left = parse_and(cur)?;
    while cur.eat_keyword("or") {
        let right = parse_and(cur)?;
        left = left.or(right);
    }
    Ok(left)
}

fn parse_and(cur: &mut Cursor) -> Result<Constraint, ParseError> {
    let mut left = parse_unary(cur)?;
    while cur.eat_keyword("and") {
        let right = parse_unary(cur)?;
        left = left.and(right);
    }
    Ok(left)
}

fn parse_unary(cur: &mut Cursor) -> Result<Constraint, ParseError> {
    if cur.eat_keyword("not") {
        return Ok(parse_unary(cur)?.not());
    }
    if cur.eat_keyword("true") {
        return Ok(Constraint::True);
    }
    if cur.eat_keyword("false") {
        return Ok(Constraint::falsity());
    }
    if cur.eat(&Tok::LParen) {
        let c = parse_or(cur)?;
        cur.expect(&Tok::RParen)?;
        return Ok(c);
    }
    parse_comparison(cur)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Op {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Op {
    fn flip(self) -> Op {
        match self {
            Op::Lt => Op::Gt,
            Op::Le => Op::Ge,
            Op::Gt => Op::Lt,
            Op::Ge => Op::Le,
            Op::Eq => Op::Eq,
            Op::Ne => Op::Ne,
        }
    }
}

enum Term {
    Clock(Clock),
    Diff(Clock, Clock),
}

fn parse_op(cur: &mut Cursor) -> Option<Op> {
    let op = match cur.peek() {
        Tok::Lt => Op::Lt,
        Tok::Le => Op::Le,
        Tok::Gt => Op::Gt,
        Tok::Ge => Op::Ge,
        Tok::EqTok => Op::Eq,
        Tok::Ne => Op::Ne,
        _ => return None,
    };
    cur.bump();
    Some(op)
}

fn expect_op(cur: &mut Cursor) -> Result<Op, ParseError> {
    parse_op(cur).ok_or_else(|| cur.error(format!("expected comparison operator, found {}", cur.peek())))
}

fn clock_name(cur: &mut Cursor) -> Result<Clock, ParseError> {
    let pos = cur.pos();
    let name = cur.ident()?;
    if RESERVED.contains(&name.as_str()) {
        return Err(ParseError::new(pos, format!("`{name}` is not a clock name")));
    }
    Ok(Clock::new(&name))
}

fn parse_term(cur: &mut Cursor) -> Result<Term, ParseError> {
    let x = clock_name(cur)?;
    // `x - y` is a difference only when an identifier follows the minus;
    // `x > -1` keeps its sign on the constant.
    if cur.at(&Tok::Minus) && matches!(cur.peek_at(1), Tok::Ident(_)) {
        cur.bump();
        let y = clock_name(cur)?;
        return Ok(Term::Diff(x, y));
    }
    Ok(Term::Clock(x))
}

fn build(term: &Term, op: Op, k: Rational) -> Constraint {
    match term {
        Term::Clock(x) => {
            let x = x.clone();
            match op {
                Op::Lt => Constraint::lt(x, k),
                Op::Le => Constraint::le(x, k),
                Op::Gt => Constraint::gt(x, k),
                Op::Ge => Constraint::ge(x, k),
                Op::Eq => Constraint::eq(x, k),
                Op::Ne => Constraint::ne(x, k),
            }
        }
        Term::Diff(x, y) => {
            let (x, y) = (x.clone(), y.clone());
            match op {
                Op::Lt => Constraint::diff_lt(x, y, k),
                Op::Le => Constraint::diff_le(x, y, k),
                Op::Gt => Constraint::diff_gt(x, y, k),
                Op::Ge => Constraint::diff_ge(x, y, k),
                Op::Eq => Constraint::diff_eq(x, y, k),
                Op::Ne => Constraint::diff_ne(x, y, k),
            }
        }
    }
}

fn parse_comparison(cur: &mut Cursor) -> Result<Constraint, ParseError> {
    match cur.peek() {
        Tok::Number(_) | Tok::Minus => {
            // `c op term [op c]`
            let lo = cur.signed_number()?;
            let op1 = expect_op(cur)?;
            let term = parse_term(cur)?;
            let lower = build(&term, op1.flip(), lo);
            if let Some(op2) = parse_op(cur) {
                let hi = cur.signed_number()?;
                return Ok(lower.and(build(&term, op2, hi)));
            }
            Ok(lower)
        }
        Tok::Ident(_) => {
            let term = parse_term(cur)?;
            let op = expect_op(cur)?;
            let k = cur.signed_number()?;
            Ok(build(&term, op, k))
        }
        other => Err(cur.error(format!("expected constraint, found {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Constraint {
        parse_constraint(s).unwrap()
    }

    #[test]
    fn atoms_and_sugar() {
        assert_eq!(p("x>3"), Constraint::gt("x", 3));
        assert_eq!(p("x=3"), Constraint::eq("x", 3));
        assert_eq!(p("x-y>1"), Constraint::diff_gt("x", "y", 1));
        assert_eq!(p("x - y = 1"), Constraint::diff_eq("x", "y", 1));
        assert_eq!(p("x<3"), Constraint::lt("x", 3));
        assert_eq!(p("x<=3"), Constraint::le("x", 3));
        assert_eq!(p("x≤3"), Constraint::le("x", 3));
        assert_eq!(p("3<x<5"), Constraint::gt("x", 3).and(Constraint::lt("x", 5)));
        assert_eq!(p("1<x"), Constraint::gt("x", 1));
        assert_eq!(p("false"), Constraint::falsity());
        assert_eq!(p("x>-1"), Constraint::gt("x", -1));
        assert_eq!(p("x>1.5"), Constraint::gt("x", Rational::new(3, 2)));
        assert_eq!(p("x>3/2"), Constraint::gt("x", Rational::new(3, 2)));
    }

    #[test]
    fn precedence() {
        let a = Constraint::gt("x", 1);
        let b = Constraint::eq("y", 2);
        let c = Constraint::gt("z", 3);
        assert_eq!(p("x>1 and y=2 or z>3"), a.clone().and(b.clone()).or(c.clone()));
        assert_eq!(p("x>1 and (y=2 or z>3)"), a.clone().and(b.clone().or(c)));
        assert_eq!(p("not x>1 and y=2"), a.not().and(b));
    }

    #[test]
    fn errors_carry_position() {
        let e = parse_constraint("x > ").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(parse_constraint("and > 1").is_err());
        assert!(parse_constraint("x 3").is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        for s in [
            "x<3",
            "3<x<5",
            "y<=2 or x<5",
            "not (x>1 and y=2)",
            "x-y!=1 and true",
            "x>=1/2 or (x=2 and y<1)",
            "false or x<0",
            "5>x>3",
        ] {
            let c = p(s);
            assert_eq!(p(&c.to_string()), c, "{s} printed as {c}");
        }
    }
}
