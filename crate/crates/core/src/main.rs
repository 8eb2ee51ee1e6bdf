use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use coopval::scenario::{self, Format, Overrides};

/// Run a valuation or ledger scenario and write its report.
#[derive(Debug, Parser)]
#[command(name = "coopval", version)]
struct Args {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for the report files; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Master seed, overriding the scenario's (mm_fuzz only).
    #[arg(long)]
    seed: Option<u64>,
    /// Relative tolerance, overriding the scenario's.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        seed: args.seed,
        tol: args.tol,
    };
    let outcome = match scenario::run_file(&args.scenario, overrides, args.format) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}", e.to_json());
            return ExitCode::from(2);
        }
    };
    if let Err(e) = outcome.report.write(&args.out, args.format) {
        let msg = serde_json::json!({
            "error": "IoError",
            "message": format!("cannot write report to {}: {e}", args.out.display()),
            "path": null,
        });
        eprintln!("{msg}");
        return ExitCode::from(2);
    }
    print!("{}", outcome.report.to_human());
    if outcome.check_failed {
        eprintln!(r#"{{"error":"CheckFailed","message":"one or more checks exceeded tolerance; see report","path":null}}"#);
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
