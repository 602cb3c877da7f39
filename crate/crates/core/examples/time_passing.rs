//! The time-passing function on process terms.
//!
//! cargo run --example time_passing

use toast::processes::{parse_process, phi, struct_normalize};
use toast::Rational;

fn main() {
    let terms = [
        ("from p recv { a -> end } after 3 { err }", 2),
        ("from p recv { a -> end } after 1 { delay(5).end }", 3),
        ("from p recv { a -> end } after 3 - x { end }", 1),
        ("delay(1).from p recv { a -> end } after 4 { end }", 3),
        ("new (p,q) { from p recv { a -> end } | end | pq:[] | qp:[a] }", 1),
        ("to p ! a.end", 1),
    ];
    for (src, t) in terms {
        let p = parse_process(src).unwrap();
        match phi(Rational::integer(t), &p) {
            Ok(q) => println!("phi_{t}({src})\n    = {}", struct_normalize(&q)),
            Err(e) => println!("phi_{t}({src})\n    undefined: {e}"),
        }
    }
}
