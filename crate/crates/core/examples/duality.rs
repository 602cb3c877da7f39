//! Duals flip every direction and keep guards and resets.
//!
//! cargo run --example duality

use toast::semantics::dual_equivalent;
use toast::types::parse_type;

fn main() {
    let s = parse_type(
        "rec a.{ !ping(x<=3, {x}).{ ?ping(x<=3, {x}).a, ?pong(x>3, {x}).a }, \
                 !pong(x>3, {x}).{ ?ping(x<=3, {x}).a, ?pong(x>3, {x}).a } }",
    )
    .unwrap();
    let d = s.dual();
    println!("S      = {s}");
    println!("dual S = {d}");
    println!("dual dual S == S: {}", d.dual() == s);
    println!("S and dual S are dual: {}", dual_equivalent(&s, &d));
}
