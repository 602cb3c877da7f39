//! Driving the command layer from code and reading the JSON report.
//!
//! cargo run --example spec_files

use toast::cli::{execute, Command};
use toast::semantics::ExploreLimits;

const SRC: &str = "
clocks x;
type P = !a(x<2).?b.end;
system Pair = P | dual of P;
process Main = new (p,q) { to p ! a.end | from q recv { a -> end } | pq:[] | qp:[] };
";

fn main() {
    let cmds = [
        Command::Check { ty: "P".into(), at: None },
        Command::Dual { ty: "P".into() },
        Command::Progress {
            system: "Pair".into(),
            limits: ExploreLimits::default(),
        },
        Command::Run {
            process: "Main".into(),
            seed: 0,
            fuel: 100,
        },
    ];
    for cmd in &cmds {
        let out = execute("inline.toast", SRC, cmd);
        println!("exit {}: {}", out.exit_code, out.envelope.stable_json());
    }
}
