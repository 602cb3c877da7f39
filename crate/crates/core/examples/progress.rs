//! Bounded progress checking: message throttling makes progress, an unsafe
//! mixed choice deadlocks with both queues full.
//!
//! cargo run --example progress

use toast::cli::SpecFile;
use toast::semantics::{check_progress, check_progress_observed, ExploreLimits, InvariantMonitor};

const THROTTLE: &str = include_str!("../fixtures/throttle.toast");
const UNSAFE: &str = include_str!("../fixtures/unsafe_mixed.toast");

fn main() {
    let limits = ExploreLimits::default();
    let doc = SpecFile::parse(THROTTLE).unwrap();
    for name in ["throttle2", "throttle3"] {
        let mut mon = InvariantMonitor::default();
        let rep = check_progress_observed(&doc.system(name).unwrap(), &limits, &mut mon);
        println!("{name}: {} over {} states, {} invariant violations", rep.verdict, rep.states, mon.violations.len());
    }

    let doc = SpecFile::parse(UNSAFE).unwrap();
    let rep = check_progress(&doc.system("Unsafe").unwrap(), &limits);
    println!("Unsafe: {}", rep.verdict);
    print!("{}", rep.trace_lines());
}
