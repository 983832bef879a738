//! `dpnash simulate | validate | oracle`
//!
//! Exit status: 0 on success, 2 when the configuration or assumptions fail
//! validation, 1 on runtime errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dpnash::config::{load_config, ConventionSetting, NoiseSetting};
use dpnash::error::HarnessError;
use dpnash::harness::{run_experiment, solve_oracle};
use dpnash::summary::density_report;
use dpnash_core::game::verify_strong_monotonicity_sample;
use dpnash_core::graph::check_d_strong_connectivity;
use dpnash_core::privacy::check_budget_summable;
use dpnash_core::schedule::validate_assumptions;

#[derive(Parser)]
#[command(
    name = "dpnash",
    version,
    about = "Differentially private NE seeking simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeker for one or more seeds and write CSVs and a summary.
    Simulate {
        /// Config file or preset name.
        #[arg(long)]
        config: String,
        #[arg(long, conflicts_with = "seeds")]
        seed: Option<u64>,
        /// Comma-separated seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        zero_noise: bool,
        #[arg(long, value_enum)]
        convention: Option<ConventionSetting>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check connectivity, schedule conditions and the privacy budget.
    Validate {
        #[arg(long)]
        config: String,
    },
    /// Print the Nash equilibrium of the configured game.
    Oracle {
        #[arg(long)]
        config: String,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Simulate {
            config,
            seed,
            seeds,
            horizon,
            zero_noise,
            convention,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seeds = vec![s];
            }
            if let Some(s) = seeds {
                cfg.seeds = s;
            }
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            if zero_noise {
                cfg.noise = NoiseSetting::ZeroNoise;
            }
            if let Some(c) = convention {
                cfg.convention = c;
            }
            let out = out
                .or_else(|| cfg.out.clone())
                .ok_or_else(|| Failure::Validation("--out is required".into()))?;
            let outcome = run_experiment(&cfg, &out)?;
            print!("{}", outcome.summary.render());
            println!("artifacts in {}", out.display());
            if outcome.failures.is_empty() {
                Ok(())
            } else {
                for f in &outcome.failures {
                    eprintln!("seed {} failed: {}", f.seed, f.error);
                }
                Err(Failure::Runtime(format!(
                    "{} seed(s) failed",
                    outcome.failures.len()
                )))
            }
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            let sc = cfg.validate()?;
            let mut ok = true;

            let connected = check_d_strong_connectivity(&sc.graphs);
            ok &= connected;
            println!(
                "[{}] topology is {}-strongly connected",
                mark(connected),
                sc.graphs.d_window()
            );
            let d = density_report(&sc.graphs);
            println!(
                "      density per phase {:?} (min {:.3}, max {:.3})",
                d.density, d.min, d.max
            );

            let report = validate_assumptions(&sc.schedules, cfg.horizon, 1e-9);
            for c in &report.checks {
                let tag = if c.required { mark(c.passed) } else { "info" };
                let value = c
                    .summation
                    .as_ref()
                    .map(|s| format!(" ~ {:.6e} ({:?})", s.estimate, s.verdict))
                    .unwrap_or_default();
                println!("[{tag}] {}{value}", c.name);
            }
            if let Some(note) = &report.step_sum_contradiction {
                println!("[note] {note}");
            }
            ok &= report.passed();

            let budget =
                check_budget_summable(&sc.schedules, 1e-9, (16 * cfg.horizon).max(1 << 20));
            ok &= budget.verdict.is_finite();
            println!(
                "[{}] {} ~ {:.6e} ({:?})",
                mark(budget.verdict.is_finite()),
                budget.series,
                budget.estimate,
                budget.verdict
            );

            let mono =
                verify_strong_monotonicity_sample(&sc.spec, 1000, 0).map_err(HarnessError::from)?;
            ok &= mono.passed;
            println!(
                "[{}] strong monotonicity: sampled ratio {:.6} >= m = {:.6}",
                mark(mono.passed),
                mono.min_ratio,
                mono.required
            );
            if ok {
                Ok(())
            } else {
                Err(Failure::Validation("one or more checks failed".into()))
            }
        }
        Command::Oracle { config } => {
            let cfg = load_config(&config)?;
            let sc = cfg.validate()?;
            let sol = solve_oracle(&sc)?;
            let q: Vec<String> = sol.q.as_slice().iter().map(|x| format!("{x:.6}")).collect();
            println!("q* = ({})", q.join(", "));
            println!(
                "residual {:.3e} after {} iterations",
                sol.residual, sol.iterations
            );
            if let Some(d) = sol.disagreement {
                println!("linear-solve disagreement {d:.3e}");
            }
            Ok(())
        }
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        " ok "
    } else {
        "FAIL"
    }
}
