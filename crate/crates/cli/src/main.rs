use clap::{Parser, Subcommand};
use std::path::PathBuf;
use twofe::family::FamilyKind;
use twofe::sim::{DgpKind, Pattern};
use twofe_cli::run::{
    cmd_fit, cmd_replicate_table, cmd_simulate, CorrectionSpec, CovChoice, FitSpec, SimulateSpec,
};
use twofe_cli::CliError;

/// Binary-choice and linear panel models with two-way fixed effects:
/// estimation, incidental-parameter bias corrections, and a Monte Carlo lab.
#[derive(Parser)]
#[command(name = "twofe", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on a CSV panel and report corrected estimates and APEs.
    Fit {
        /// CSV file with a header row; one row per (individual, time) cell.
        #[arg(long)]
        input: PathBuf,
        /// Outcome column (0/1 for binary families).
        #[arg(long)]
        outcome: String,
        /// Individual identifier column.
        #[arg(long)]
        indiv: String,
        /// Integer time period column.
        #[arg(long)]
        time: String,
        /// Regressor column, `name` or `name:kind` with kind `continuous`
        /// (default) or `binary`. Repeat per regressor.
        #[arg(long = "regressor", required = true)]
        regressors: Vec<String>,
        /// Name of the regressor holding the lagged outcome, if any.
        #[arg(long)]
        lag_regressor: Option<String>,
        /// Distribution: logit, probit, cloglog, or gaussian-identity.
        #[arg(long, value_enum, default_value = "probit")]
        family: FamilyArg,
        /// Correction to apply: abc1, abc2, abc3, abc4, spj1, spj2.
        /// Repeat for several; pair each with a --bandwidth.
        #[arg(long = "correction")]
        corrections: Vec<String>,
        /// Spectral bandwidth L for the matching --correction (by position).
        #[arg(long = "bandwidth")]
        bandwidths: Vec<usize>,
        /// APE covariance estimator.
        #[arg(long, value_enum, default_value = "simplified")]
        cov: CovArg,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads (default: all cores, or RAYON_NUM_THREADS).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run a Monte Carlo experiment on one of the built-in designs.
    Simulate {
        /// dynamic-probit or dynamic-linear.
        #[arg(long, value_enum, default_value = "dynamic-probit")]
        design: DesignArg,
        /// balanced, pattern1, or pattern2.
        #[arg(long, value_enum, default_value = "balanced")]
        pattern: PatternArg,
        /// Individuals (balanced designs).
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Time periods (balanced designs).
        #[arg(long, default_value_t = 10)]
        t: usize,
        /// Type-1 individuals (unbalanced patterns).
        #[arg(long)]
        n1: Option<usize>,
        /// Type-2 individuals (unbalanced patterns).
        #[arg(long)]
        n2: Option<usize>,
        /// Type-1 span (unbalanced patterns).
        #[arg(long)]
        t1: Option<usize>,
        /// Type-2 span (unbalanced patterns).
        #[arg(long)]
        t2: Option<usize>,
        /// Comma-separated estimators, e.g. `mle,abc1:1,abc1:2,spj1,lpm:1`
        /// (the number after `:` is the bandwidth L).
        #[arg(long, default_value = "mle,abc1:1")]
        estimators: String,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write per-replication estimates.
        #[arg(long)]
        keep_draws: bool,
        /// Write `<prefix>.json` and `<prefix>.csv` instead of stdout.
        #[arg(long)]
        output_prefix: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Re-run the designs behind a published simulation table
    /// (2, 3, 4, 5, 6, 7, 8, 9, or 12) at a chosen replication count.
    ReplicateTable {
        #[arg(long)]
        table: u32,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the formatted table here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum FamilyArg {
    Logit,
    Probit,
    Cloglog,
    #[value(name = "gaussian-identity")]
    GaussianIdentity,
}

impl From<FamilyArg> for FamilyKind {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Logit => FamilyKind::Logit,
            FamilyArg::Probit => FamilyKind::Probit,
            FamilyArg::Cloglog => FamilyKind::Cloglog,
            FamilyArg::GaussianIdentity => FamilyKind::GaussianIdentity,
        }
    }
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum CovArg {
    Simplified,
    Full,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum DesignArg {
    #[value(name = "dynamic-probit")]
    DynamicProbit,
    #[value(name = "dynamic-linear")]
    DynamicLinear,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum PatternArg {
    Balanced,
    Pattern1,
    Pattern2,
}

fn real_main() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Fit {
            input,
            outcome,
            indiv,
            time,
            regressors,
            lag_regressor,
            family,
            corrections,
            bandwidths,
            cov,
            output,
            threads,
        } => {
            if bandwidths.len() > corrections.len() {
                return Err(CliError::Usage(
                    "more --bandwidth values than --correction values".into(),
                ));
            }
            let corrections = corrections
                .into_iter()
                .enumerate()
                .map(|(i, variant)| CorrectionSpec {
                    variant,
                    bandwidth: bandwidths.get(i).copied().unwrap_or(1),
                })
                .collect();
            let spec = FitSpec {
                input,
                outcome,
                indiv,
                time,
                regressors,
                lag_regressor,
                family: family.into(),
                corrections,
                covariance: match cov {
                    CovArg::Simplified => CovChoice::Simplified,
                    CovArg::Full => CovChoice::Full,
                },
                output,
                threads,
            };
            cmd_fit(&spec).map(|_| ())
        }
        Command::Simulate {
            design,
            pattern,
            n,
            t,
            n1,
            n2,
            t1,
            t2,
            estimators,
            reps,
            seed,
            keep_draws,
            output_prefix,
            threads,
        } => {
            let spec = SimulateSpec {
                design: match design {
                    DesignArg::DynamicProbit => DgpKind::DynamicProbit,
                    DesignArg::DynamicLinear => DgpKind::DynamicLinear,
                },
                pattern: match pattern {
                    PatternArg::Balanced => Pattern::Balanced,
                    PatternArg::Pattern1 => Pattern::Pattern1,
                    PatternArg::Pattern2 => Pattern::Pattern2,
                },
                n,
                t,
                n1,
                n2,
                t1,
                t2,
                estimators,
                reps,
                seed,
                keep_draws,
                output_prefix,
                threads,
            };
            cmd_simulate(&spec).map(|_| ())
        }
        Command::ReplicateTable {
            table,
            reps,
            seed,
            output,
            threads,
        } => cmd_replicate_table(table, reps, seed, threads, output.as_deref()).map(|_| ()),
    }
}

fn main() {
    if let Err(e) = real_main() {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
