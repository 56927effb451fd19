//! Command implementations behind the CLI surface.

use crate::csv_io::{read_panel_csv, ColumnRoles};
use crate::report::{CorrectionBlock, Estimate, FitReport, Metadata, SCHEMA_VERSION};
use crate::{with_threads, CliError, CliResult};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use twofe::ape;
use twofe::bias::{self, BcConfig, SpjVariant};
use twofe::family::{Family, FamilyKind};
use twofe::feglm::{self, FitConfig, FitResult};
use twofe::panel::{DropLog, PanelData};
use twofe::sim::{self, DgpConfig, DgpKind, EstimatorKind, McConfig, Pattern};

/// Correction requested on the command line: a variant name plus bandwidth.
#[derive(Debug, Clone, Serialize)]
pub struct CorrectionSpec {
    pub variant: String,
    pub bandwidth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CovChoice {
    Simplified,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSpec {
    pub input: PathBuf,
    pub outcome: String,
    pub indiv: String,
    pub time: String,
    pub regressors: Vec<String>,
    pub lag_regressor: Option<String>,
    pub family: FamilyKind,
    pub corrections: Vec<CorrectionSpec>,
    pub covariance: CovChoice,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn parse_regressors(specs: &[String]) -> CliResult<Vec<(String, twofe::panel::RegressorKind)>> {
    use twofe::panel::RegressorKind::*;
    specs
        .iter()
        .map(|s| {
            let (name, kind) = match s.rsplit_once(':') {
                Some((n, "continuous")) => (n, Continuous),
                Some((n, "binary")) => (n, Binary),
                Some((_, other)) => {
                    return Err(CliError::Usage(format!(
                        "regressor kind must be `continuous` or `binary`, got `{other}`"
                    )))
                }
                None => (s.as_str(), Continuous),
            };
            Ok((name.to_string(), kind))
        })
        .collect()
}

fn merge_drops(mut build: DropLog, prune: DropLog) -> DropLog {
    build.passes.extend(prune.passes);
    build.n_dropped_obs += prune.n_dropped_obs;
    build
}

fn ape_block(
    names: &[String],
    state: &FitResult,
    panel: &PanelData,
    fam: &Family,
    cfg: &FitConfig,
    cov: CovChoice,
    corrected: Option<&[f64]>,
) -> CliResult<Vec<Estimate>> {
    let pe = ape::partial_effects(&state.eta, &state.beta, panel, fam)?;
    let values = match corrected {
        Some(v) => v.to_vec(),
        None => ape::ape(&pe),
    };
    let j = values.len();
    let covm = match cov {
        CovChoice::Simplified => ape::ape_cov_simplified(&pe, state, panel, cfg, false)?,
        CovChoice::Full => ape::ape_cov_full(&pe, state, panel, cfg, false)?,
    };
    Ok((0..j)
        .map(|c| Estimate {
            name: names[c].clone(),
            estimate: values[c],
            se: covm[c * j + c].sqrt(),
        })
        .collect())
}

fn estimates(names: &[String], values: &[f64], ses: &[f64]) -> Vec<Estimate> {
    names
        .iter()
        .zip(values.iter().zip(ses))
        .map(|(n, (v, s))| Estimate {
            name: n.clone(),
            estimate: *v,
            se: *s,
        })
        .collect()
}

/// Fit a CSV panel, apply the requested corrections, and write the report.
pub fn cmd_fit(spec: &FitSpec) -> CliResult<FitReport> {
    let started = std::time::Instant::now();
    let roles = ColumnRoles {
        outcome: spec.outcome.clone(),
        indiv: spec.indiv.clone(),
        time: spec.time.clone(),
        regressors: parse_regressors(&spec.regressors)?,
        lag_regressor: spec.lag_regressor.clone(),
    };
    let (panel_raw, build_log) = read_panel_csv(&spec.input, &roles)?;
    let n_obs_input = panel_raw.n_obs() + build_log.n_dropped_obs;
    let fam = Family::new(spec.family);
    let fit_cfg = FitConfig::default();

    let report = with_threads(spec.threads, || -> CliResult<FitReport> {
        let (panel, fit) = {
            let (panel, mut fr) = feglm::prune_and_fit(&panel_raw, &fam, &fit_cfg)?;
            let prune_log = std::mem::take(&mut fr.dropped);
            fr.dropped = merge_drops(build_log.clone(), prune_log);
            (panel, fr)
        };
        let names = panel.names().to_vec();
        let fit_ses = fit.standard_errors()?;
        let apes = ape_block(&names, &fit, &panel, &fam, &fit_cfg, spec.covariance, None)?;
        let out_of_unit = if fam.is_binary() {
            None
        } else {
            Some(
                fit.eta.iter().filter(|v| **v < 0.0 || **v > 1.0).count() as f64
                    / panel.n_obs() as f64,
            )
        };

        let mut blocks = Vec::new();
        for c in &spec.corrections {
            let bc_cfg = BcConfig {
                bandwidth: c.bandwidth,
                fit: fit_cfg,
                ..Default::default()
            };
            let block = match c.variant.as_str() {
                "abc1" | "abc2" | "abc3" | "abc4" => {
                    let bc = match c.variant.as_str() {
                        "abc1" => bias::abc1(&fit, &panel, &fam, &bc_cfg)?,
                        "abc2" => bias::abc2(&fit, &panel, &fam, &bc_cfg)?,
                        "abc3" => bias::abc3(&fit, &panel, &fam, &bc_cfg)?,
                        _ => bias::abc4(&fit, &panel, &fam, &bc_cfg)?,
                    };
                    let state = match &bc.corrected_state {
                        Some(s) => s.clone(),
                        None => feglm::refit_state(
                            &panel,
                            &fam,
                            &bc.beta_corrected,
                            &fit.beta,
                            &fit.eta,
                            &fit_cfg,
                        )?,
                    };
                    // one-shot correction keeps the uncorrected Hessian for
                    // inference; the iterated/score variants re-evaluate it
                    let coef_ses = if c.variant == "abc1" {
                        fit_ses.clone()
                    } else {
                        state.standard_errors()?
                    };
                    let pe = ape::partial_effects(&state.eta, &state.beta, &panel, &fam)?;
                    let corrected_apes =
                        ape::ape_abc(&state, &pe, &panel, &fam, c.bandwidth, &fit_cfg)?;
                    let apes = ape_block(
                        &names,
                        &state,
                        &panel,
                        &fam,
                        &fit_cfg,
                        spec.covariance,
                        Some(&corrected_apes),
                    )?;
                    CorrectionBlock {
                        label: bc.label,
                        coefficients: estimates(&names, &bc.beta_corrected, &coef_ses),
                        apes,
                        bias_hat: bc.bias_hat,
                        subpanel_betas: None,
                    }
                }
                "spj1" | "spj2" => {
                    let variant = if c.variant == "spj1" {
                        SpjVariant::Spj1
                    } else {
                        SpjVariant::Spj2
                    };
                    let subs = bias::spj_subfits(&panel, &fam, &fit_cfg, variant)?;
                    let betas: Vec<Vec<f64>> = subs.iter().map(|s| s.fit.beta.clone()).collect();
                    let corrected = bias::jackknife_combine(&fit.beta, &betas, variant);
                    let full_ape = ape::plugin_ape(&fit, &panel, &fam)?;
                    let spj_apes = ape::ape_spj_from_subfits(&full_ape, &subs, &fam, variant)?;
                    let state = feglm::refit_state(
                        &panel, &fam, &corrected, &fit.beta, &fit.eta, &fit_cfg,
                    )?;
                    let apes = ape_block(
                        &names,
                        &state,
                        &panel,
                        &fam,
                        &fit_cfg,
                        spec.covariance,
                        Some(&spj_apes),
                    )?;
                    CorrectionBlock {
                        label: if variant == SpjVariant::Spj1 {
                            "SPJ1".into()
                        } else {
                            "SPJ2".into()
                        },
                        coefficients: estimates(&names, &corrected, &fit_ses),
                        apes,
                        bias_hat: fit
                            .beta
                            .iter()
                            .zip(&corrected)
                            .map(|(b, c)| b - c)
                            .collect(),
                        subpanel_betas: Some(betas),
                    }
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown correction `{other}` (expected abc1..abc4, spj1, spj2)"
                    )))
                }
            };
            blocks.push(block);
        }

        Ok(FitReport {
            metadata: Metadata {
                schema_version: SCHEMA_VERSION,
                tool_version: crate::report::tool_version(),
                command: "fit",
                spec: serde_json::to_value(spec).expect("spec serializes"),
                seed: None,
                generator: None,
            },
            family: fam.label().into(),
            covariance: match spec.covariance {
                CovChoice::Simplified => "simplified",
                CovChoice::Full => "full",
            },
            n_obs_input,
            n_obs_used: panel.n_obs(),
            n_indiv: panel.n_indiv(),
            n_time: panel.n_time(),
            dropped: fit.dropped.clone(),
            loglik: fit.loglik,
            iterations: fit.iterations,
            coefficients: estimates(&names, &fit.beta, &fit_ses),
            apes,
            out_of_unit_fraction: out_of_unit,
            corrections: blocks,
        })
    })??;

    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Data(format!("serialization: {e}")))?;
    match &spec.output {
        Some(path) => std::fs::write(path, json.as_bytes())?,
        None => println!("{json}"),
    }
    eprintln!("fit completed in {:.3?}", started.elapsed());
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSpec {
    pub design: DgpKind,
    pub pattern: Pattern,
    pub n: usize,
    pub t: usize,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub t1: Option<usize>,
    pub t2: Option<usize>,
    pub estimators: String,
    pub reps: usize,
    pub seed: u64,
    pub keep_draws: bool,
    pub output_prefix: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub fn parse_estimators(list: &str) -> CliResult<Vec<EstimatorKind>> {
    list.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let (name, l) = match tok.split_once(':') {
                Some((n, l)) => (
                    n,
                    l.parse::<usize>().map_err(|_| {
                        CliError::Usage(format!("bad bandwidth in estimator `{tok}`"))
                    })?,
                ),
                None => (tok, 1),
            };
            Ok(match name {
                "mle" => EstimatorKind::Mle,
                "abc1" => EstimatorKind::Abc1(l),
                "abc2" => EstimatorKind::Abc2(l),
                "abc3" => EstimatorKind::Abc3(l),
                "abc4" => EstimatorKind::Abc4(l),
                "spj1" => EstimatorKind::Spj1,
                "spj2" => EstimatorKind::Spj2,
                "lpm" => EstimatorKind::Lpm(l),
                "lm" => EstimatorKind::Lpm(0),
                other => return Err(CliError::Usage(format!("unknown estimator `{other}`"))),
            })
        })
        .collect()
}

pub fn dgp_from_spec(spec: &SimulateSpec) -> CliResult<DgpConfig> {
    let dgp = match spec.pattern {
        Pattern::Balanced => DgpConfig::balanced(spec.design, spec.n, spec.t),
        p => {
            let (Some(n1), Some(n2), Some(t1), Some(t2)) = (spec.n1, spec.n2, spec.t1, spec.t2)
            else {
                return Err(CliError::Usage(
                    "unbalanced patterns need --n1, --n2, --t1, --t2".into(),
                ));
            };
            DgpConfig::unbalanced(spec.design, p, n1, n2, t1, t2)
        }
    };
    dgp.validate()?;
    Ok(dgp)
}

/// Flatten a summary into CSV rows.
pub fn summary_csv(summary: &sim::McSummary) -> String {
    let mut out = String::from(
        "estimator,target,parameter,bias_pct,sd_pct,rmse_pct,se_sd,cp95,wald_size,n_ok,n_failed\n",
    );
    for e in &summary.estimators {
        for (target, stats) in [("coef", &e.coef), ("ape", &e.ape)] {
            for s in stats {
                let wald = e.wald_size.map(|w| w.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{},{target},{},{},{},{},{},{},{wald},{},{}\n",
                    e.label,
                    s.name,
                    s.bias_pct,
                    s.sd_pct,
                    s.rmse_pct,
                    s.se_sd,
                    s.cp95,
                    e.n_ok,
                    e.n_failed
                ));
            }
        }
    }
    out
}

fn draws_csv(summary: &sim::McSummary) -> String {
    let mut out = String::from("rep,estimator,parameter,coef,coef_se,ape,ape_se,truth_ape,wald\n");
    if let Some(draws) = &summary.draws {
        for d in draws {
            for (j, name) in ["y_lag", "x"].iter().enumerate() {
                let wald = d.record.wald.map(|w| w.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{name},{},{},{},{},{},{wald}\n",
                    d.rep,
                    d.estimator,
                    d.record.coef[j],
                    d.record.coef_se[j],
                    d.record.ape[j],
                    d.record.ape_se[j],
                    d.truth_ape[j],
                ));
            }
        }
    }
    out
}

/// Run a Monte Carlo experiment and write the JSON + CSV summaries.
pub fn cmd_simulate(spec: &SimulateSpec) -> CliResult<sim::McSummary> {
    let started = std::time::Instant::now();
    let dgp = dgp_from_spec(spec)?;
    let estimators = parse_estimators(&spec.estimators)?;
    if estimators.is_empty() {
        return Err(CliError::Usage("no estimators requested".into()));
    }
    let mut mc = McConfig::new(dgp, estimators, spec.reps, spec.seed);
    mc.keep_draws = spec.keep_draws;
    let summary = with_threads(spec.threads, || sim::run_monte_carlo(&mc))?;

    #[derive(Serialize)]
    struct SimulateReport<'a> {
        metadata: Metadata,
        #[serde(flatten)]
        summary: &'a sim::McSummary,
    }
    let report = SimulateReport {
        metadata: Metadata {
            schema_version: SCHEMA_VERSION,
            tool_version: crate::report::tool_version(),
            command: "simulate",
            spec: serde_json::to_value(spec).expect("spec serializes"),
            seed: Some(spec.seed),
            generator: Some(summary.generator.clone()),
        },
        summary: &summary,
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Data(format!("serialization: {e}")))?;
    match &spec.output_prefix {
        Some(prefix) => {
            let base = prefix.to_string_lossy();
            std::fs::write(format!("{base}.json"), json.as_bytes())?;
            std::fs::write(format!("{base}.csv"), summary_csv(&summary).as_bytes())?;
            if spec.keep_draws {
                std::fs::write(format!("{base}_draws.csv"), draws_csv(&summary).as_bytes())?;
            }
        }
        None => println!("{json}"),
    }
    eprintln!("simulate completed in {:.3?}", started.elapsed());
    Ok(summary)
}

/// Run the designs behind one of the published simulation tables.
pub fn cmd_replicate_table(
    table: u32,
    reps: usize,
    seed: u64,
    threads: Option<usize>,
    output: Option<&Path>,
) -> CliResult<String> {
    let started = std::time::Instant::now();
    let text = with_threads(threads, || crate::tables::replicate(table, reps, seed))??;
    match output {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(text.as_bytes())?;
        }
        None => println!("{text}"),
    }
    eprintln!("replicate-table completed in {:.3?}", started.elapsed());
    Ok(text)
}
