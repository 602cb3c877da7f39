//! Stepping a system by hand: weak persistency lets a send deadline pass
//! while a timeout can still be received, and urgency stops time while a
//! queued message is receivable.
//!
//! cargo run --example timed_semantics

use toast::constraints::clock_set;
use toast::semantics::{admissible_delays, qconfig_time, system_steps, system_wait, Message, System};
use toast::types::{parse_type, PayloadSort};
use toast::Rational;

fn main() {
    let s = parse_type("{ !data<Str>(x<3).end, ?timeout(x>4).end }").unwrap();
    let sys = System::new(s.clone(), s.dual(), &clock_set(["x"]));
    println!("start      {sys}");
    println!("delays     {:?}", admissible_delays(&sys, Rational::integer(7)).iter().map(|t| t.to_string()).collect::<Vec<_>>());
    let later = system_wait(&sys, Rational::integer(5)).unwrap();
    println!("wait(5)    {later}");
    for step in system_steps(&later).unwrap() {
        println!("  {}", step.describe());
    }

    let mut held = sys.right.clone();
    held.queue.push_back(Message::new("data", PayloadSort::Str));
    match qconfig_time(&held, Rational::integer(1)) {
        Ok(q) => println!("waited to {q}"),
        Err(why) => println!("with data queued, wait(1) is refused: {why}"),
    }
}
