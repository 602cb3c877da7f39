//! Generated well-formed types paired with their duals make progress.
//!
//! cargo run --release --example random_types [count] [seed]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toast::constraints::clock_set;
use toast::generate::TypeGen;
use toast::semantics::{check_progress, ExploreLimits, System, Verdict};

fn main() {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gen = TypeGen::default();
    let clocks = clock_set(["x", "y"]);
    let mut ok = 0;
    for _ in 0..count {
        let t = gen.well_formed(&mut rng);
        let rep = check_progress(&System::new(t.clone(), t.dual(), &clocks), &ExploreLimits::default());
        if rep.verdict == Verdict::Ok {
            ok += 1;
        } else {
            println!("{}: {t}", rep.verdict);
        }
    }
    println!("{ok}/{count} ok");
}
