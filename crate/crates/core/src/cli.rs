//! Command-line front end.
//!
//! Exit codes: `0` when the checked inequality holds (or the command simply
//! succeeded), `2` when it is empirically violated, `1` for invalid input or a
//! failed hypothesis.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::appendix::{self, AppendixGrid};
use crate::bounds;
use crate::distributions::{
    check_kr_condition, check_theorem1_condition, check_theorem2_condition,
    check_theorem4_condition, ConditionReport, Law, DEFAULT_GRID_SIZE,
};
use crate::error::{Error, Result};
use crate::majorization::{premise_holds, random_majorization_pair, transform};
use crate::rng::SeededStream;
use crate::sum_engine::{
    check_hypotheses, compare_weighted_sums_detailed, expected_log_capacity, MonteCarlo, TGrid,
    DEFAULT_Z,
};
use crate::{DistributionSpec, PremiseMode, WeightVector};

pub const THREADS_ENV: &str = "WSUM_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "wsum",
    version,
    about = "Stochastic ordering of weighted sums of i.i.d. variables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// `auto` or `min:max:count`.
    #[arg(long = "t-grid", default_value = "auto")]
    pub t_grid: TGrid,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_Z)]
    pub z: f64,
}

impl McArgs {
    fn mc(&self) -> Result<MonteCarlo> {
        MonteCarlo::new(self.samples, self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    Sandwich,
    Upper,
    Lower,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the distributional conditions on a law.
    CheckConditions {
        #[arg(long)]
        dist: DistributionSpec,
        /// Restrict to one premise mode's condition.
        #[arg(long)]
        mode: Option<PremiseMode>,
        /// Exponent for the power conditions when no mode is given.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        grid_size: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the majorization premise between two weight vectors.
    CheckPremise {
        #[arg(long)]
        mode: PremiseMode,
        #[arg(long)]
        a: WeightVector,
        #[arg(long)]
        b: WeightVector,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo dominance test between `Σ a_i Y_i` and `Σ b_i Y_i`.
    Dominance {
        #[arg(long)]
        dist: DistributionSpec,
        #[arg(long)]
        mode: PremiseMode,
        #[arg(long)]
        a: WeightVector,
        #[arg(long)]
        b: WeightVector,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Geometric/power-mean tail bounds.
    Bounds {
        #[arg(long)]
        dist: DistributionSpec,
        #[arg(long)]
        a: WeightVector,
        /// Power-mean exponent `q > 1` (needed for `sandwich` and `lower`).
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, value_enum, default_value_t = BoundKind::Sandwich)]
        kind: BoundKind,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare `E ln(1 + Σ a_i Y_i)` with `E ln(1 + Σ b_i Y_i)`.
    Capacity {
        #[arg(long)]
        dist: DistributionSpec,
        #[arg(long)]
        a: WeightVector,
        #[arg(long)]
        b: Option<WeightVector>,
        #[arg(long, default_value = "thm1")]
        mode: PremiseMode,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_Z)]
        z: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check every inequality used in the monotonicity arguments.
    VerifyAppendix {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = appendix::DEFAULT_Y_RESOLUTION)]
        y_resolution: usize,
        /// Use this law (instead of the defaults) for the density-based checks.
        #[arg(long)]
        dist: Option<DistributionSpec>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Generate a random pair satisfying a premise.
    GenPair {
        #[arg(long)]
        mode: PremiseMode,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PremiseCheck {
    pub mode: PremiseMode,
    pub a: WeightVector,
    pub b: WeightVector,
    pub transformed_a: Vec<f64>,
    pub transformed_b: Vec<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub dist: DistributionSpec,
    pub a: WeightVector,
    pub estimate_a: CapacityEstimate,
    pub b: Option<WeightVector>,
    pub estimate_b: Option<CapacityEstimate>,
    pub pooled_se: Option<f64>,
    /// `estimate_a ≤ estimate_b + z·pooled_se`.
    pub holds: bool,
    pub n_samples: usize,
    pub seed: u64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedPair {
    pub mode: PremiseMode,
    pub seed: u64,
    pub a: WeightVector,
    pub b: WeightVector,
}

/// Rendered report and whether the checked statement holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub holds: bool,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn json_only(format: Format, command: &str) -> Result<()> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(Error::InvalidParameter(format!(
            "csv output is not available for {command}"
        ))),
    }
}

fn conditions(
    d: &DistributionSpec,
    mode: Option<PremiseMode>,
    p: Option<f64>,
    grid: usize,
) -> Vec<ConditionReport> {
    match mode {
        Some(PremiseMode::Thm1Log) => vec![check_theorem1_condition(d, grid)],
        Some(PremiseMode::Thm2Power { q }) => {
            vec![check_theorem2_condition(
                d,
                crate::majorization::conjugate(q),
                grid,
            )]
        }
        Some(PremiseMode::KrPower { q }) => {
            vec![check_kr_condition(
                d,
                crate::majorization::conjugate(q),
                grid,
            )]
        }
        Some(PremiseMode::Thm4Identity) => vec![check_theorem4_condition(d, grid)],
        None if !d.positive_support() => vec![check_theorem4_condition(d, grid)],
        None => {
            let mut v = vec![check_theorem1_condition(d, grid)];
            match p {
                Some(p) if p > 1.0 => v.push(check_theorem2_condition(d, p, grid)),
                Some(p) => v.push(check_kr_condition(d, p, grid)),
                None => {}
            }
            v
        }
    }
}

/// Runs a parsed command and renders its report.
pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::CheckConditions {
            dist,
            mode,
            p,
            grid_size,
            output,
        } => {
            json_only(output.format, "check-conditions")?;
            let reports = conditions(dist, *mode, *p, *grid_size);
            Ok(Outcome {
                holds: reports.iter().all(|r| r.holds),
                text: json(&reports),
            })
        }
        Command::CheckPremise { mode, a, b, output } => {
            json_only(output.format, "check-premise")?;
            let r = PremiseCheck {
                mode: *mode,
                a: a.clone(),
                b: b.clone(),
                transformed_a: transform(a, *mode)?,
                transformed_b: transform(b, *mode)?,
                holds: premise_holds(a, b, *mode)?,
            };
            Ok(Outcome {
                holds: r.holds,
                text: json(&r),
            })
        }
        Command::Dominance {
            dist,
            mode,
            a,
            b,
            mc,
            output,
        } => {
            let c = compare_weighted_sums_detailed(dist, a, b, *mode, &mc.t_grid, mc.mc()?, mc.z)?;
            let text = match output.format {
                Format::Json => json(&c.report),
                Format::Csv => {
                    let mut s = String::from("t,left,left_se,right,right_se\n");
                    for i in 0..c.left.len() {
                        s.push_str(&format!(
                            "{},{},{},{},{}\n",
                            c.left.t_grid[i],
                            c.left.values[i],
                            c.left.std_errors[i],
                            c.right.values[i],
                            c.right.std_errors[i]
                        ));
                    }
                    s
                }
            };
            Ok(Outcome {
                holds: c.report.holds,
                text,
            })
        }
        Command::Bounds {
            dist,
            a,
            q,
            kind,
            mc,
            output,
        } => {
            let need_q = || {
                q.ok_or_else(|| {
                    Error::InvalidParameter(format!("--q is required for {kind:?} bounds"))
                })
            };
            let r = match kind {
                BoundKind::Sandwich => {
                    bounds::sandwich(dist, a, need_q()?, &mc.t_grid, mc.mc()?, mc.z)?
                }
                BoundKind::Upper => bounds::upper_bound(dist, a, &mc.t_grid, mc.mc()?, mc.z)?,
                BoundKind::Lower => {
                    bounds::lower_bound(dist, a, need_q()?, &mc.t_grid, mc.mc()?, mc.z)?
                }
            };
            let text = match output.format {
                Format::Json => json(&r),
                Format::Csv => r.to_csv(),
            };
            Ok(Outcome {
                holds: r.holds,
                text,
            })
        }
        Command::Capacity {
            dist,
            a,
            b,
            mode,
            samples,
            seed,
            z,
            output,
        } => {
            json_only(output.format, "capacity")?;
            if let Some(b) = b {
                check_hypotheses(dist, a, b, *mode)?;
            }
            let est = |w: &WeightVector| {
                expected_log_capacity(dist, w, *samples, *seed)
                    .map(|(mean, se)| CapacityEstimate { mean, se })
            };
            let ea = est(a)?;
            let eb = b.as_ref().map(est).transpose()?;
            let pooled = eb.map(|eb| ea.se.hypot(eb.se));
            let holds = match (eb, pooled) {
                (Some(eb), Some(se)) => ea.mean <= eb.mean + z * se,
                _ => true,
            };
            let r = CapacityReport {
                dist: *dist,
                a: a.clone(),
                estimate_a: ea,
                b: b.clone(),
                estimate_b: eb,
                pooled_se: pooled,
                holds,
                n_samples: *samples,
                seed: *seed,
                z: *z,
            };
            Ok(Outcome {
                holds,
                text: json(&r),
            })
        }
        Command::VerifyAppendix {
            p,
            beta,
            t,
            y_resolution,
            dist,
            output,
        } => {
            json_only(output.format, "verify-appendix")?;
            let mut grid = AppendixGrid::default();
            if let Some(p) = p {
                grid.ps = vec![*p];
            }
            if let Some(b) = beta {
                grid.betas = vec![*b];
            }
            if let Some(t) = t {
                grid.ts = vec![*t];
            }
            grid.y_resolution = *y_resolution;
            if let Some(d) = dist {
                grid.thm1_laws = vec![*d];
                grid.thm2_laws = vec![*d];
            }
            let reports = appendix::verify_all(&grid)?;
            Ok(Outcome {
                holds: reports.iter().all(|r| r.holds),
                text: json(&reports),
            })
        }
        Command::GenPair {
            mode,
            n,
            seed,
            steps,
            output,
        } => {
            json_only(output.format, "gen-pair")?;
            let (a, b) = random_majorization_pair(*n, *mode, SeededStream::new(*seed), *steps)?;
            Ok(Outcome {
                holds: true,
                text: json(&GeneratedPair {
                    mode: *mode,
                    seed: *seed,
                    a,
                    b,
                }),
            })
        }
    }
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::CheckConditions { output, .. }
        | Command::CheckPremise { output, .. }
        | Command::Dominance { output, .. }
        | Command::Bounds { output, .. }
        | Command::Capacity { output, .. }
        | Command::VerifyAppendix { output, .. }
        | Command::GenPair { output, .. } => output,
    }
}

fn thread_pool() -> std::result::Result<rayon::ThreadPool, String> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("{THREADS_ENV}={v}: {e}"))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let outcome = match pool.install(|| execute(&cli.command)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let written = match &output_args(&cli.command).out {
        Some(path) => {
            std::fs::write(path, &outcome.text).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => {
            print!("{}", outcome.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 1;
    }
    if outcome.holds {
        0
    } else {
        2
    }
}
