use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toast::cli::{execute, parse_rational_flag, Command, EXIT_USAGE};
use toast::semantics::ExploreLimits;
use toast::Rational;

#[derive(Parser)]
#[command(name = "toast", version, about = "Timed session types with mixed choice and timeouts")]
struct Args {
    /// Print the machine-readable report envelope.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a type for well-formedness.
    Check {
        file: String,
        name: String,
        /// Starting valuation, e.g. `x=1, y=1/2`.
        #[arg(long)]
        at: Option<String>,
    },
    /// Print the dual of a type.
    Dual { file: String, name: String },
    /// Explore a system and report whether it makes progress.
    Progress {
        file: String,
        name: String,
        #[arg(long, default_value_t = 64)]
        depth: usize,
        #[arg(long, default_value_t = 8)]
        queue: usize,
        #[arg(long, value_parser = parse_rational_flag)]
        horizon: Option<Rational>,
        #[arg(long, default_value_t = 100_000)]
        states: usize,
    },
    /// Check a system for compatibility.
    Compat { file: String, name: String },
    /// Run a process.
    Run {
        file: String,
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        fuel: usize,
    },
    /// Print a seeded walk through the semantics of a system.
    Simulate {
        file: String,
        name: String,
        #[arg(long, default_value_t = 20)]
        trace_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (file, cmd) = match args.cmd {
        Cmd::Check { file, name, at } => (file, Command::Check { ty: name, at }),
        Cmd::Dual { file, name } => (file, Command::Dual { ty: name }),
        Cmd::Progress {
            file,
            name,
            depth,
            queue,
            horizon,
            states,
        } => (
            file,
            Command::Progress {
                system: name,
                limits: ExploreLimits {
                    max_depth: depth,
                    max_queue: queue,
                    horizon,
                    max_states: states,
                },
            },
        ),
        Cmd::Compat { file, name } => (file, Command::Compat { system: name }),
        Cmd::Run { file, name, seed, fuel } => (file, Command::Run { process: name, seed, fuel }),
        Cmd::Simulate {
            file,
            name,
            trace_len,
            seed,
        } => (
            file,
            Command::Simulate {
                system: name,
                trace_len,
                seed,
            },
        ),
    };
    let src = match std::fs::read_to_string(&file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {file}: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let out = execute(&file, &src, &cmd);
    if args.json {
        println!("{}", out.json());
    } else {
        print!("{}", out.text);
    }
    ExitCode::from(out.exit_code as u8)
}
