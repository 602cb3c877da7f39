//! Zones, the past of a constraint, and entailment.
//!
//! cargo run --example past_operator

use toast::constraints::{entails, equivalent, is_sat, parse_constraint, past, reset_constraint, ResetSet};

fn main() {
    for src in ["3<x<5", "x>2", "x=1 and y>2", "x-y>1 and y<2", "x<1 or x>4"] {
        let d = parse_constraint(src).unwrap();
        println!("past({src}) = {}", past(&d));
    }

    let a = parse_constraint("3<x<5").unwrap();
    let b = parse_constraint("x<5").unwrap();
    println!("past(3<x<5) <=> x<5: {}", equivalent(&past(&a), &b));
    println!("3<x<5 entails x>2: {}", entails(&a, &parse_constraint("x>2").unwrap()));
    println!("x<1 and x>1 satisfiable: {}", is_sat(&parse_constraint("x<1 and x>1").unwrap()));

    let g = parse_constraint("x>3 and y<1").unwrap();
    println!("after resetting y: {}", reset_constraint(&g, &ResetSet::of(["y"])));
}
