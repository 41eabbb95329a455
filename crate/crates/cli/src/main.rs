use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use subdyn::scenario::Parameters;
use subdyn::{builtins, resolve_scenario, run_battery, run_scenario, study};

/// Scenario runner for submeasure dynamics on finite spaces.
#[derive(Parser)]
#[command(name = "subdyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct ParamArgs {
    /// Metric resolution: cluster-derivation radius and blowup fiber separation.
    #[arg(long)]
    delta: Option<f64>,
    /// Absolute tolerance for order and convergence checks.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget for invariant constructions.
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    /// Selection-enumeration cap per generator.
    #[arg(long)]
    cap: Option<usize>,
    /// Generator-count cap before midpoint merging.
    #[arg(long = "prune-cap")]
    prune_cap: Option<usize>,
    /// Word length for the admissible-path entropy oracle.
    #[arg(long = "words-L", alias = "words-l")]
    words_l: Option<usize>,
    /// RNG seed recorded in the report.
    #[arg(long)]
    seed: Option<u64>,
    /// Fiber size override for blowup scenarios.
    #[arg(long)]
    fibers: Option<usize>,
    /// Symbol/point count override for shift and infinity models.
    #[arg(long)]
    symbols: Option<usize>,
}

impl ParamArgs {
    fn to_parameters(&self) -> Parameters {
        let mut p = Parameters::default();
        if let Some(v) = self.delta {
            p.delta = Some(v);
        }
        if let Some(v) = self.tol {
            p.tol = v;
        }
        if let Some(v) = self.n_max {
            p.n_max = v;
        }
        if let Some(v) = self.cap {
            p.cap = v;
        }
        if let Some(v) = self.prune_cap {
            p.prune_cap = v;
        }
        if let Some(v) = self.words_l {
            p.words_l = v;
        }
        if let Some(v) = self.seed {
            p.seed = v;
        }
        p.fibers = self.fibers;
        p.symbols = self.symbols;
        p
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (a builtin name, `all`, or a JSON file path).
    Run {
        scenario: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Write the report JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a refinement family of a scenario across resolutions, CSV out.
    Study {
        scenario: String,
        /// Comma-separated resolution list, e.g. 2,4,8.
        #[arg(long, value_delimiter = ',', required = true)]
        resolutions: Vec<usize>,
        #[command(flatten)]
        params: ParamArgs,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// List builtin scenario names.
    List,
}

fn emit(text: &str, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            params,
            out,
        } => {
            let params = params.to_parameters();
            if scenario == "all" {
                match run_battery(&params) {
                    Ok(text) => {
                        let passed = serde_json::from_str::<serde_json::Value>(&text)
                            .ok()
                            .and_then(|v| v["passed"].as_bool())
                            .unwrap_or(false);
                        if let Err(e) = emit(&text, out.as_ref()) {
                            eprintln!("error: {e}");
                            return ExitCode::from(2);
                        }
                        return if passed {
                            ExitCode::SUCCESS
                        } else {
                            eprintln!("assertions failed; see report");
                            ExitCode::FAILURE
                        };
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            let loaded = match resolve_scenario(&scenario, &params) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match run_scenario(&loaded) {
                Ok(report) => {
                    let text = report.to_json();
                    if let Err(e) = emit(&text, out.as_ref()) {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                    if report.passed {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("assertions failed; see report");
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Study {
            scenario,
            resolutions,
            params,
            out,
        } => {
            let params = params.to_parameters();
            let base = match resolve_scenario(&scenario, &params) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match study::refinement_study(&scenario, &base, &params, &resolutions) {
                Ok(csv) => {
                    if let Err(e) = std::fs::write(&out, csv) {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::List => {
            for name in builtins::BUILTIN_NAMES {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
    }
}
