//! Thin command-line front end: read a JSON run configuration, execute it,
//! write artifacts, and map the result to an exit status.

use qdom::config::parse_config;
use qdom::driver::{execute, Flags};
use std::process::ExitCode;

const USAGE: &str = "\
usage: qdom <config.json> [flags]

Solves a one-phase quadrature-domain problem described by the config file
and writes artifacts (fields, contours, iteration log, summary) into the
configured output directory.

flags:
  --dump-fields              write per-iteration level sets / marker curves
  --verify                   also run the other method and compare boundaries
  --verify-shape-derivative  check dE against a finite difference (method two)
  --parallel-times           solve injection times concurrently (cold starts)

exit codes: 0 converged, 2 not converged, 3 configuration error,
4 invariant violation";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args.iter().any(|a| a == "--help" || a == "-h") {
        eprintln!("{USAGE}");
        return ExitCode::from(if args.is_empty() { 3 } else { 0 });
    }

    let mut config_path = None;
    let mut flags = Flags::default();
    for arg in &args {
        match arg.as_str() {
            "--dump-fields" => flags.dump_fields = true,
            "--verify" => flags.verify = true,
            "--verify-shape-derivative" => flags.verify_shape_derivative = true,
            "--parallel-times" => flags.parallel_times = true,
            other if other.starts_with("--") => {
                eprintln!("unknown flag {other}\n{USAGE}");
                return ExitCode::from(3);
            }
            path => {
                if config_path.replace(path).is_some() {
                    eprintln!("more than one config file given\n{USAGE}");
                    return ExitCode::from(3);
                }
            }
        }
    }
    let Some(path) = config_path else {
        eprintln!("no config file given\n{USAGE}");
        return ExitCode::from(3);
    };

    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {path}: {e}");
            return ExitCode::from(3);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(3);
        }
    };
    match execute(&cfg, &flags) {
        Ok(outcome) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&outcome.summary).unwrap_or_default()
            );
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
