//! Checking types for well-formedness: a junk type and two repairs, and an
//! unsafe mixed choice.
//!
//! cargo run --example well_formedness

use toast::constraints::{clock_set, Valuation};
use toast::types::{check_well_formed, parse_type};

fn main() {
    let v0 = Valuation::zero(&clock_set(["x", "y"]));
    let cases = [
        ("junk", "!a(x>3).{ !b(y=2).end, ?c(2<x<5).end }"),
        ("reset y", "!a(x>3, {y}).{ !b(y=2).end, ?c(2<x<5).end }"),
        ("bounded x", "!a(3<x<5).{ !b(y=2).end, ?c(2<x<5).end }"),
        ("unsafe mixed", "{ ?a(x<5).end, !b(x=0).end }"),
        ("disjoint mixed", "{ ?a(0<x<5).end, !b(x=0).end }"),
    ];
    for (name, src) in cases {
        let rep = check_well_formed(&parse_type(src).unwrap(), &v0);
        println!("{name:15} {}", if rep.verdict { "well-formed" } else { "ill-formed" });
        for v in &rep.violations {
            println!("{:15}   {v}", "");
        }
    }
}
