//! Running processes: mixed-choice ping-pong under a delay script and a
//! seed, and message throttling against a receiver that never acknowledges.
//!
//! cargo run --example run_process [seed]

use toast::cli::SpecFile;
use toast::processes::{run, RunPolicy};
use toast::Rational;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let doc = SpecFile::parse(include_str!("../fixtures/mixed_ping_pong.toast")).unwrap();
    let main = doc.process("Main").unwrap();

    let script = [1, 1, 1, 4].map(Rational::integer);
    let res = run(main, &RunPolicy::scripted(script));
    println!("scripted delays 1,1,1,4:");
    for e in &res.trace {
        println!("  {e}");
    }
    println!("  {} at {}", res.status, res.time);

    let res = run(main, &RunPolicy::seeded(seed));
    let loops = res.events("call").filter(|e| e.detail.starts_with("X<")).count();
    println!("seed {seed}: {loops} loops, {} at {}", res.status, res.time);

    let doc = SpecFile::parse(include_str!("../fixtures/throttle.toast")).unwrap();
    for name in ["Late2", "Late3"] {
        let res = run(doc.process(name).unwrap(), &RunPolicy::default());
        let sends: Vec<String> = res.events("send").map(|e| e.detail.clone()).collect();
        println!("{name}: {} then {}", sends.join(", "), res.status);
    }
}
