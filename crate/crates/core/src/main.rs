use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cgconf::scenario::{registry, run_scenario, ReportDocument, ScenarioConfig, ScenarioError};

#[derive(Parser)]
#[command(name = "cgconf", version, about = "Numerical checks for conformal bundle differentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its JSON report.
    Run {
        scenario: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        samples: Option<usize>,
        /// Replaces every upper-bound tolerance in the scenario.
        #[arg(long)]
        tol: Option<f64>,
        /// Scenario parameter, repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the registered scenarios.
    List,
    /// Run every scenario with default settings.
    All {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Write a JSON array of reports here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let value = v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), value))
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn emit(json: &str, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{json}\n")),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn summarize(report: &ReportDocument) {
    let verdict = if report.overall_pass { "PASS" } else { "FAIL" };
    eprintln!("{verdict} {} ({:.0} ms)", report.scenario, report.elapsed_ms);
    if let Some(err) = &report.error {
        eprintln!("  error: {err}");
    }
    for check in report.failed_checks() {
        eprintln!("  failed: {} (residual {:e}, tolerance {:e})", check.name, check.residual, check.tolerance);
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::List => {
            for info in registry() {
                let params = if info.params.is_empty() { String::new() } else { format!(" [params: {}]", info.params.join(", ")) };
                println!("{:<26} {}{params}", info.name, info.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Run { scenario, seed, samples, tol, params, out } => {
            let mut config = ScenarioConfig::new(scenario).with_seed(seed);
            config.samples = samples;
            config.tol = tol;
            config.params.extend(params);
            config.output_path = out;
            let report = match run_scenario(&config) {
                Ok(r) => r,
                Err(e @ (ScenarioError::Unknown(_) | ScenarioError::Config(_))) => return usage_error(e),
            };
            summarize(&report);
            if let Err(e) = emit(&report.to_json(), config.output_path.as_ref()) {
                return usage_error(e);
            }
            ExitCode::from(u8::from(!report.overall_pass))
        }
        Command::All { seed, out } => {
            let mut reports = Vec::new();
            for info in registry() {
                match run_scenario(&ScenarioConfig::new(info.name).with_seed(seed)) {
                    Ok(r) => {
                        summarize(&r);
                        reports.push(r);
                    }
                    Err(e) => return usage_error(e),
                }
            }
            let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
            if let Err(e) = emit(&json, out.as_ref()) {
                return usage_error(e);
            }
            ExitCode::from(u8::from(!reports.iter().all(|r| r.overall_pass)))
        }
    }
}
