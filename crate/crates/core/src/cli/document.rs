//! The `.toast` document format: clock declarations, named types, named
//! processes and named systems.
//!
//! ```text
//! clocks x, y;
//! type S = rec a.{ ?ping(x<=3, {x}).a, !timeout(x>3).end };
//! process Main = new (p,q) { end | end | pq:[] | qp:[] };
//! system Sys = S | dual of S;
//! system Crossed = S [b] | dual of S [a];
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use crate::constraints::{ClockSet, Valuation};
use crate::processes::{parse_process_from, ProcNode, ProcScope};
use crate::rational::Rational;
use crate::semantics::{Message, System};
use crate::syntax::{Cursor, ParseError, Tok};
use crate::types::{parse_type_from, PayloadSort, TypeNode, TypeScope};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("no {kind} named `{name}`")]
    Missing { kind: &'static str, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideDecl {
    pub ty: String,
    pub dual: bool,
    pub queue: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDecl {
    pub left: SideDecl,
    pub right: SideDecl,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecFile {
    pub clocks: ClockSet,
    pub types: BTreeMap<String, TypeNode>,
    pub processes: BTreeMap<String, ProcNode>,
    pub systems: BTreeMap<String, SystemDecl>,
}

impl SpecFile {
    pub fn parse(src: &str) -> Result<SpecFile, DocError> {
        let mut cur = Cursor::new(src)?;
        let mut doc = SpecFile::default();
        let mut declared = false;
        while !cur.is_eof() {
            let pos = cur.pos();
            let kw = cur.ident()?;
            match kw.as_str() {
                "clocks" => {
                    loop {
                        doc.clocks.insert(crate::constraints::Clock::new(&cur.ident()?));
                        if !cur.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    declared = true;
                }
                "type" => {
                    let name = fresh(&cur.ident()?, &doc, pos)?;
                    cur.expect(&Tok::EqTok)?;
                    let mut scope = if declared {
                        TypeScope::with_clocks(doc.clocks.clone())
                    } else {
                        TypeScope::default()
                    };
                    let t = parse_type_from(&mut cur, &mut scope)?;
                    doc.types.insert(name, t);
                }
                "process" => {
                    let name = fresh(&cur.ident()?, &doc, pos)?;
                    cur.expect(&Tok::EqTok)?;
                    let p = parse_process_from(&mut cur, &mut ProcScope::default())?;
                    doc.processes.insert(name, p);
                }
                "system" => {
                    let name = fresh(&cur.ident()?, &doc, pos)?;
                    cur.expect(&Tok::EqTok)?;
                    let left = parse_side(&mut cur)?;
                    cur.expect(&Tok::Pipe)?;
                    let right = parse_side(&mut cur)?;
                    doc.systems.insert(name, SystemDecl { left, right });
                }
                other => {
                    return Err(ParseError::new(pos, format!("expected `clocks`, `type`, `process` or `system`, found `{other}`")).into())
                }
            }
            cur.expect(&Tok::Semi)?;
        }
        for (name, sys) in &doc.systems {
            for side in [&sys.left, &sys.right] {
                if !doc.types.contains_key(&side.ty) {
                    return Err(ParseError::new(
                        Default::default(),
                        format!("system `{name}` refers to undefined type `{}`", side.ty),
                    )
                    .into());
                }
            }
        }
        Ok(doc)
    }

    pub fn ty(&self, name: &str) -> Result<&TypeNode, DocError> {
        self.types.get(name).ok_or_else(|| DocError::Missing {
            kind: "type",
            name: name.to_string(),
        })
    }

    pub fn process(&self, name: &str) -> Result<&ProcNode, DocError> {
        self.processes.get(name).ok_or_else(|| DocError::Missing {
            kind: "process",
            name: name.to_string(),
        })
    }

    /// Declared clocks together with those of `ty`.
    pub fn clocks_for(&self, ty: &TypeNode) -> ClockSet {
        let mut all = self.clocks.clone();
        all.extend(ty.clocks());
        all
    }

    pub fn system(&self, name: &str) -> Result<System, DocError> {
        let decl = self.systems.get(name).ok_or_else(|| DocError::Missing {
            kind: "system",
            name: name.to_string(),
        })?;
        let side = |d: &SideDecl| -> Result<TypeNode, DocError> {
            let t = self.ty(&d.ty)?;
            Ok(if d.dual { t.dual() } else { t.clone() })
        };
        let mut sys = System::new(side(&decl.left)?, side(&decl.right)?, &self.clocks);
        sys.left.queue.extend(decl.left.queue.iter().cloned());
        sys.right.queue.extend(decl.right.queue.iter().cloned());
        Ok(sys)
    }
}

fn fresh(name: &str, doc: &SpecFile, pos: crate::syntax::Pos) -> Result<String, ParseError> {
    let taken = doc.types.contains_key(name) || doc.processes.contains_key(name) || doc.systems.contains_key(name);
    if taken {
        return Err(ParseError::new(pos, format!("`{name}` is defined twice")));
    }
    Ok(name.to_string())
}

fn parse_side(cur: &mut Cursor) -> Result<SideDecl, ParseError> {
    let dual = if cur.at_keyword("dual") {
        cur.bump();
        cur.expect_keyword("of")?;
        true
    } else {
        false
    };
    let ty = cur.ident()?;
    let mut queue = Vec::new();
    if cur.eat(&Tok::LBracket) {
        if !cur.at(&Tok::RBracket) {
            loop {
                let label = cur.ident()?;
                let sort = if cur.eat(&Tok::Lt) {
                    let s = crate::types::parse_sort(cur)?;
                    cur.expect(&Tok::Gt)?;
                    s
                } else {
                    PayloadSort::None
                };
                queue.push(Message::new(&label, sort));
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        cur.expect(&Tok::RBracket)?;
    }
    Ok(SideDecl { ty, dual, queue })
}

/// `x=1, y=3/2`; unmentioned clocks of `clocks` start at 0.
pub fn parse_valuation(src: &str, clocks: &ClockSet) -> Result<Valuation, ParseError> {
    let mut v = Valuation::zero(clocks);
    let mut cur = Cursor::new(src)?;
    if cur.eat(&Tok::LBrace) && cur.eat(&Tok::RBrace) {
        cur.expect_eof()?;
        return Ok(v);
    }
    let mut cur = Cursor::new(src.trim_start_matches('{').trim_end_matches('}'))?;
    loop {
        let x = cur.ident()?;
        cur.expect(&Tok::EqTok)?;
        let n: Rational = cur.number()?;
        v.set(crate::constraints::Clock::new(&x), n);
        if !cur.eat(&Tok::Comma) {
            break;
        }
    }
    cur.expect_eof()?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_sections() {
        let doc = SpecFile::parse(
            "clocks x;\n\
             type S = !a(x<1).end; // trailing comment\n\
             process P = end;\n\
             system Sys = S | dual of S;\n\
             system Full = S [b, c<Nat>] | dual of S;",
        )
        .unwrap();
        assert_eq!(doc.types.len(), 1);
        assert_eq!(*doc.process("P").unwrap(), ProcNode::End);
        let sys = doc.system("Sys").unwrap();
        assert_eq!(sys.right.ty, doc.ty("S").unwrap().dual());
        let full = doc.system("Full").unwrap();
        assert_eq!(full.left.queue.len(), 2);
        assert_eq!(full.left.queue[1].to_string(), "c<Nat>");
    }

    #[test]
    fn document_errors() {
        assert!(SpecFile::parse("clocks x; type S = !a(y<1).end;").is_err());
        assert!(SpecFile::parse("type S = end; type S = end;").is_err());
        assert!(SpecFile::parse("system Sys = S | dual of S;").is_err());
        assert!(SpecFile::parse("type S = end").is_err());
        let doc = SpecFile::parse("type S = end;").unwrap();
        assert!(matches!(doc.system("nope"), Err(DocError::Missing { .. })));
    }

    #[test]
    fn valuations() {
        let clocks = crate::constraints::clock_set(["x", "y"]);
        let v = parse_valuation("x=1, y=3/2", &clocks).unwrap();
        assert_eq!(v.to_string(), "{x=1, y=3/2}");
        assert_eq!(parse_valuation("{}", &clocks).unwrap(), Valuation::zero(&clocks));
        assert!(parse_valuation("x=", &clocks).is_err());
    }
}
