//! Library half of the `stablecluster` binary: argument types, command
//! implementations, and the timing sweep reused by the acceptance suite.

pub mod args;
pub mod commands;
pub mod fileio;
pub mod sweep;

use clap::Parser as _;

/// Parse arguments, dispatch, and return the process exit code
/// (0 ok, 2 I/O/parse, 3 domain precondition, 4 budget exceeded).
pub fn run() -> i32 {
    let cli = args::Cli::parse();
    if cli.threads > 0 {
        // a second configuration attempt in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let outcome = match &cli.command {
        args::Command::Solve(a) => commands::cmd_solve(a),
        args::Command::Oracle(a) => commands::cmd_oracle(a),
        args::Command::Check(a) => commands::cmd_check(a),
        args::Command::Perturb(a) => commands::cmd_perturb(a),
        args::Command::Generate(a) => commands::cmd_generate(a),
        args::Command::Compare(a) => commands::cmd_compare(a),
        args::Command::Bench(a) => commands::cmd_bench(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
