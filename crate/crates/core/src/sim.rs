//! Data-generating processes, the Monte Carlo engine, evaluation statistics,
//! and Wald tests.
//!
//! The dynamic designs draw two-way normal heterogeneity, an AR(1) exogenous
//! regressor loaded on both effects, and build the outcome recursively from a
//! static initial condition; the initial period serves only as the first lag
//! and never enters the estimation sample. Replications are seeded through
//! independent counter-indexed streams of a ChaCha generator, so results are
//! identical under any parallel schedule.

use crate::ape;
use crate::bias::{self, BcConfig, SpjVariant};
use crate::error::{Error, Result};
use crate::family::{norm_cdf, norm_pdf, Family};
use crate::feglm::{self, FitConfig, FitResult};
use crate::linalg::Cholesky;
use crate::lpm;
use crate::panel::{build_panel, PanelData, RegressorKind, Row};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Identity of the random source recorded in every output.
pub const GENERATOR_ID: &str = "chacha20(stream=replication)+ziggurat-normal";

/// 95th percentiles of chi-square for 1..=10 degrees of freedom.
const CHI2_95: [f64; 10] = [
    3.841458820694124,
    5.991464547107979,
    7.814727903251179,
    9.487729036781154,
    11.070497693516351,
    12.591587243743977,
    14.067140449340169,
    15.507313055865453,
    16.918977604620448,
    18.307038053275146,
];

/// Two-sided 95% normal critical value used for coverage.
pub const Z_95: f64 = 1.959964;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DgpKind {
    DynamicProbit,
    DynamicLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Balanced,
    /// Both types start at t = 1; type 1 leaves after T1 periods.
    Pattern1,
    /// Type 1 is observed for T1 periods starting at a random period.
    Pattern2,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DgpConfig {
    pub kind: DgpKind,
    pub pattern: Pattern,
    /// Number of type-1 individuals (all individuals when balanced).
    pub n1: usize,
    /// Number of type-2 individuals (0 when balanced).
    pub n2: usize,
    /// Estimation span of type-1 individuals (T when balanced).
    pub t1: usize,
    /// Estimation span of type-2 individuals (T when balanced).
    pub t2: usize,
    pub rho: f64,
    pub beta: f64,
    pub var_alpha: f64,
    pub var_gamma: f64,
    pub ar_coef: f64,
    pub var_nu: f64,
    pub seed: u64,
}

impl DgpConfig {
    pub fn balanced(kind: DgpKind, n: usize, t: usize) -> Self {
        Self {
            kind,
            pattern: Pattern::Balanced,
            n1: n,
            n2: 0,
            t1: t,
            t2: t,
            rho: 0.5,
            beta: 1.0,
            var_alpha: 1.0 / 16.0,
            var_gamma: 1.0 / 16.0,
            ar_coef: 0.5,
            var_nu: 0.5,
            seed: 0,
        }
    }

    pub fn unbalanced(
        kind: DgpKind,
        pattern: Pattern,
        n1: usize,
        n2: usize,
        t1: usize,
        t2: usize,
    ) -> Self {
        Self {
            pattern,
            n1,
            n2,
            t1,
            t2,
            ..Self::balanced(kind, 0, 0)
        }
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() == 0 || self.t1 == 0 || self.t2 == 0 {
            return Err(Error::Data("empty design".into()));
        }
        match self.pattern {
            Pattern::Balanced => {
                if self.t1 != self.t2 {
                    return Err(Error::Data("balanced designs need t1 == t2".into()));
                }
            }
            Pattern::Pattern1 | Pattern::Pattern2 => {
                if self.t1 >= self.t2 {
                    return Err(Error::Data("unbalanced patterns need t1 < t2".into()));
                }
            }
        }
        Ok(())
    }
}

/// Realized truth of one generated panel: the structural parameters plus the
/// finite-sample average partial effects computed from the true index over
/// the estimation cells. The drawn effects are kept for diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Truth {
    pub rho: f64,
    pub beta: f64,
    /// True APEs per regressor, ordered like (lagged outcome, exogenous x).
    pub ape: Vec<f64>,
    #[serde(skip)]
    pub alpha: Vec<f64>,
    #[serde(skip)]
    pub gamma: Vec<f64>,
}

/// Generate a panel and its truth record from the configured design using the
/// config's own seed.
pub fn generate(cfg: &DgpConfig) -> Result<(PanelData, Truth)> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    generate_with_rng(cfg, &mut rng)
}

/// Generate with an externally seeded stream (the Monte Carlo engine derives
/// one stream per replication).
pub fn generate_with_rng<R: Rng>(cfg: &DgpConfig, rng: &mut R) -> Result<(PanelData, Truth)> {
    cfg.validate()?;
    let n = cfg.n();
    let t_max = cfg.t2;
    let sd_alpha = cfg.var_alpha.sqrt();
    let sd_gamma = cfg.var_gamma.sqrt();
    let sd_nu = cfg.var_nu.sqrt();
    let normal = |rng: &mut R| -> f64 { rng.sample(StandardNormal) };

    let alpha: Vec<f64> = (0..n).map(|_| sd_alpha * normal(rng)).collect();
    let gamma: Vec<f64> = (0..=t_max).map(|_| sd_gamma * normal(rng)).collect();
    // missingness is random across individuals: which ids carry the short
    // span is itself a uniform draw (Fisher-Yates on the type labels)
    let type1: Vec<bool> = {
        let mut labels: Vec<bool> = (0..n).map(|i| i < cfg.n1).collect();
        if cfg.pattern != Pattern::Balanced {
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                labels.swap(i, j);
            }
        }
        labels
    };
    // random starts for type-1 individuals under pattern 2; the start period
    // itself holds the initial condition
    let starts: Vec<usize> = (0..n)
        .map(|i| {
            if cfg.pattern == Pattern::Pattern2 && type1[i] {
                rng.gen_range(0..=(cfg.t2 - cfg.t1))
            } else {
                0
            }
        })
        .collect();

    let probit = cfg.kind == DgpKind::DynamicProbit;
    let mut rows = Vec::new();
    let mut ape_lag = 0.0;
    let mut ape_x = 0.0;
    let mut cells = 0usize;
    let mut x_path = vec![0.0; t_max + 1];
    let mut y_path = vec![0.0; t_max + 1];

    for i in 0..n {
        let span = match cfg.pattern {
            Pattern::Balanced => cfg.t1,
            _ => {
                if type1[i] {
                    cfg.t1
                } else {
                    cfg.t2
                }
            }
        };
        let start = starts[i];

        x_path[0] = normal(rng);
        for t in 1..=t_max {
            x_path[t] = cfg.ar_coef * x_path[t - 1] + alpha[i] + gamma[t] + sd_nu * normal(rng);
        }
        let idx0 = cfg.beta * x_path[0] + alpha[i] + gamma[0];
        y_path[0] = if probit {
            f64::from(idx0 >= normal(rng))
        } else {
            idx0 + normal(rng)
        };
        for t in 1..=t_max {
            let idx = cfg.rho * y_path[t - 1] + cfg.beta * x_path[t] + alpha[i] + gamma[t];
            y_path[t] = if probit {
                f64::from(idx >= normal(rng))
            } else {
                idx + normal(rng)
            };
        }

        for t in start + 1..=start + span {
            rows.push(Row {
                indiv: crate::panel::Key::Int(i as i64),
                time: t as i64,
                y: y_path[t],
                x: vec![y_path[t - 1], x_path[t]],
            });
            if probit {
                let base = cfg.beta * x_path[t] + alpha[i] + gamma[t];
                ape_lag += norm_cdf(base + cfg.rho) - norm_cdf(base);
                ape_x += cfg.beta * norm_pdf(cfg.rho * y_path[t - 1] + base);
            }
            cells += 1;
        }
    }

    let ape = if probit {
        vec![ape_lag / cells as f64, ape_x / cells as f64]
    } else {
        vec![cfg.rho, cfg.beta]
    };

    let (panel, _) = build_panel(
        rows,
        vec!["y_lag".into(), "x".into()],
        vec![
            if probit {
                RegressorKind::Binary
            } else {
                RegressorKind::Continuous
            },
            RegressorKind::Continuous,
        ],
    )?;
    Ok((
        panel,
        Truth {
            rho: cfg.rho,
            beta: cfg.beta,
            ape,
            alpha,
            gamma,
        },
    ))
}

/// Realized true APEs over the cells of `panel` (which may be a pruned or
/// otherwise subsetted version of the generated sample), evaluated from the
/// true index. The panel must carry the generator's integer individual keys
/// and calendar periods.
pub fn true_apes_on(panel: &PanelData, truth: &Truth, kind: DgpKind) -> Vec<f64> {
    if kind == DgpKind::DynamicLinear {
        return vec![truth.rho, truth.beta];
    }
    let n = panel.n_obs();
    let imap = panel.factor(crate::panel::Factor::Indiv);
    let mut lag = 0.0;
    let mut x = 0.0;
    for k in 0..n {
        let i = match &panel.indiv_keys()[imap.group_of[k] as usize] {
            crate::panel::Key::Int(v) => *v as usize,
            other => panic!("generated panels use integer keys, got {other}"),
        };
        let t = panel.cal_time()[k] as usize;
        let base = truth.beta * panel.col(1)[k] + truth.alpha[i] + truth.gamma[t];
        lag += norm_cdf(base + truth.rho) - norm_cdf(base);
        x += truth.beta * norm_pdf(truth.rho * panel.col(0)[k] + base);
    }
    vec![lag / n as f64, x / n as f64]
}

/// Estimators the Monte Carlo engine knows how to run. The payload of the
/// analytical and linear-model variants is the bandwidth L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    Mle,
    Abc1(usize),
    Abc2(usize),
    Abc3(usize),
    Abc4(usize),
    Spj1,
    Spj2,
    Lpm(usize),
}

impl EstimatorKind {
    pub fn label(&self, kind: DgpKind) -> String {
        match (self, kind) {
            (EstimatorKind::Mle, DgpKind::DynamicLinear) => "LM".into(),
            (EstimatorKind::Mle, _) => "MLE".into(),
            (EstimatorKind::Abc1(l), _) => format!("ABC1 ({l})"),
            (EstimatorKind::Abc2(l), _) => format!("ABC2 ({l})"),
            (EstimatorKind::Abc3(l), _) => format!("ABC3 ({l})"),
            (EstimatorKind::Abc4(l), _) => format!("ABC4 ({l})"),
            (EstimatorKind::Spj1, _) => "SPJ1".into(),
            (EstimatorKind::Spj2, _) => "SPJ2".into(),
            (EstimatorKind::Lpm(0), DgpKind::DynamicLinear) => "LM".into(),
            (EstimatorKind::Lpm(l), DgpKind::DynamicLinear) => format!("BC ({l})"),
            (EstimatorKind::Lpm(l), _) => format!("LPM ({l})"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct McConfig {
    pub dgp: DgpConfig,
    pub estimators: Vec<EstimatorKind>,
    pub reps: usize,
    pub base_seed: u64,
    pub fit: FitConfig,
    pub keep_draws: bool,
}

impl McConfig {
    pub fn new(
        dgp: DgpConfig,
        estimators: Vec<EstimatorKind>,
        reps: usize,
        base_seed: u64,
    ) -> Self {
        Self {
            dgp,
            estimators,
            reps,
            base_seed,
            fit: FitConfig::default(),
            keep_draws: false,
        }
    }
}

/// One estimator's output within one replication.
#[derive(Debug, Clone, Serialize)]
pub struct EstRecord {
    pub coef: Vec<f64>,
    pub coef_se: Vec<f64>,
    pub ape: Vec<f64>,
    pub ape_se: Vec<f64>,
    pub wald: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepDraw {
    pub rep: usize,
    pub estimator: String,
    pub truth_ape: Vec<f64>,
    #[serde(flatten)]
    pub record: EstRecord,
}

/// Per-parameter summary statistics, in percent relative to the truth.
#[derive(Debug, Clone, Serialize)]
pub struct ParamStats {
    pub name: String,
    pub bias_pct: f64,
    pub sd_pct: f64,
    pub rmse_pct: f64,
    pub se_sd: f64,
    pub cp95: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimatorSummary {
    pub label: String,
    pub n_ok: usize,
    pub n_failed: usize,
    pub coef: Vec<ParamStats>,
    pub ape: Vec<ParamStats>,
    pub wald_size: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct McSummary {
    pub design: DgpConfig,
    pub reps: usize,
    pub base_seed: u64,
    pub generator: String,
    pub estimators: Vec<EstimatorSummary>,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<Vec<RepDraw>>,
}

impl McSummary {
    pub fn estimator(&self, label: &str) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.label == label)
    }
}

/// Wald statistic `(β̂ - β₀)' V⁻¹ (β̂ - β₀)` with rejection at the 5% level
/// of the chi-square with J degrees of freedom.
pub fn wald_test(beta_hat: &[f64], cov: &[f64], h0: &[f64]) -> Result<(f64, bool)> {
    let j = beta_hat.len();
    if j == 0 || j > CHI2_95.len() {
        return Err(Error::Data(format!(
            "wald test supports 1..=10 parameters, got {j}"
        )));
    }
    let d: Vec<f64> = beta_hat.iter().zip(h0).map(|(a, b)| a - b).collect();
    let sol = Cholesky::new(cov, j, 1e-14)?.solve(&d);
    let stat: f64 = sol.iter().zip(&d).map(|(s, di)| s * di).sum();
    Ok((stat, stat > CHI2_95[j - 1]))
}

/// Summary statistics of one scalar parameter across replications, relative
/// to the (possibly replication-specific) truth.
pub fn summarize(name: &str, estimates: &[f64], truths: &[f64], ses: &[f64]) -> ParamStats {
    let n = estimates.len() as f64;
    let theta_bar = truths.iter().sum::<f64>() / n;
    let d: Vec<f64> = estimates.iter().zip(truths).map(|(e, t)| e - t).collect();
    let mean_d = d.iter().sum::<f64>() / n;
    let var_d = d.iter().map(|x| (x - mean_d) * (x - mean_d)).sum::<f64>() / (n - 1.0).max(1.0);
    let mean_sq = d.iter().map(|x| x * x).sum::<f64>() / n;
    let mean_est = estimates.iter().sum::<f64>() / n;
    let var_est = estimates
        .iter()
        .map(|x| (x - mean_est) * (x - mean_est))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let mean_se = ses.iter().sum::<f64>() / n;
    let covered = d
        .iter()
        .zip(ses)
        .filter(|(di, se)| di.abs() <= Z_95 * **se)
        .count() as f64;
    ParamStats {
        name: name.into(),
        bias_pct: 100.0 * mean_d / theta_bar,
        sd_pct: 100.0 * var_d.sqrt() / theta_bar,
        rmse_pct: 100.0 * mean_sq.sqrt() / theta_bar,
        se_sd: mean_se / var_est.sqrt(),
        cp95: covered / n,
    }
}

struct RepOutcome {
    truth: Option<Truth>,
    /// Realized true APEs over the pruned sample the nonlinear estimators
    /// actually used; the linear-model rows keep the full-sample estimand.
    truth_pruned: Option<Vec<f64>>,
    records: Vec<std::result::Result<EstRecord, String>>,
}

fn se_from_cov(cov: &[f64], j: usize) -> Vec<f64> {
    (0..j).map(|i| cov[i * j + i].sqrt()).collect()
}

fn scaled(m: &[f64], s: f64) -> Vec<f64> {
    m.iter().map(|v| v * s).collect()
}

/// Everything the probit pipeline may need more than once per replication.
struct RepContext<'a> {
    cfg: &'a McConfig,
    fam: Family,
    /// Pruned panel the nonlinear estimators run on.
    panel: PanelData,
    /// Unpruned sample; the linear probability model is estimated here.
    panel_raw: PanelData,
    fit: FitResult,
    truth: Truth,
    h0: Vec<f64>,
    fit_winv: Vec<f64>,
    fit_ses: Vec<f64>,
    mle_pe: Option<(Vec<f64>, Vec<f64>)>, // (ape, ape_se)
    gauss: Option<FitResult>,
    spj_subs: [Option<Vec<bias::SubFit>>; 2],
}

impl<'a> RepContext<'a> {
    fn mle_ape(&mut self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.mle_pe.is_none() {
            let pe = ape::partial_effects(&self.fit.eta, &self.fit.beta, &self.panel, &self.fam)?;
            let d = ape::ape(&pe);
            let cov = ape::ape_cov_simplified(&pe, &self.fit, &self.panel, &self.cfg.fit, false)?;
            let se = se_from_cov(&cov, d.len());
            self.mle_pe = Some((d, se));
        }
        Ok(self.mle_pe.clone().unwrap())
    }

    fn gaussian_fit(&mut self) -> Result<FitResult> {
        if self.gauss.is_none() {
            self.gauss = Some(feglm::fit(
                &self.panel_raw,
                &Family::gaussian(),
                &self.cfg.fit,
            )?);
        }
        Ok(self.gauss.clone().unwrap())
    }

    fn subfits(&mut self, variant: SpjVariant) -> Result<&Vec<bias::SubFit>> {
        let slot = match variant {
            SpjVariant::Spj1 => 0,
            SpjVariant::Spj2 => 1,
        };
        if self.spj_subs[slot].is_none() {
            self.spj_subs[slot] = Some(bias::spj_subfits(
                &self.panel,
                &self.fam,
                &self.cfg.fit,
                variant,
            )?);
        }
        Ok(self.spj_subs[slot].as_ref().unwrap())
    }

    /// APEs corrected analytically at β̃, with SEs from the re-profiled state.
    fn corrected_apes(&self, state: &FitResult, l: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let pe = ape::partial_effects(&state.eta, &state.beta, &self.panel, &self.fam)?;
        let d = ape::ape_abc(state, &pe, &self.panel, &self.fam, l, &self.cfg.fit)?;
        let cov = ape::ape_cov_simplified(&pe, state, &self.panel, &self.cfg.fit, false)?;
        let se = se_from_cov(&cov, d.len());
        Ok((d, se))
    }

    fn run_abc(&mut self, est: EstimatorKind) -> Result<EstRecord> {
        let bc_cfg = |l: usize| BcConfig {
            bandwidth: l,
            fit: self.cfg.fit,
            ..Default::default()
        };
        let (bc, l) = match est {
            EstimatorKind::Abc1(l) => (
                bias::abc1(&self.fit, &self.panel, &self.fam, &bc_cfg(l))?,
                l,
            ),
            EstimatorKind::Abc2(l) => (
                bias::abc2(&self.fit, &self.panel, &self.fam, &bc_cfg(l))?,
                l,
            ),
            EstimatorKind::Abc3(l) => (
                bias::abc3(&self.fit, &self.panel, &self.fam, &bc_cfg(l))?,
                l,
            ),
            EstimatorKind::Abc4(l) => (
                bias::abc4(&self.fit, &self.panel, &self.fam, &bc_cfg(l))?,
                l,
            ),
            _ => unreachable!(),
        };
        let state = match bc.corrected_state {
            Some(s) => s,
            None => feglm::refit_state(
                &self.panel,
                &self.fam,
                &bc.beta_corrected,
                &self.fit.beta,
                &self.fit.eta,
                &self.cfg.fit,
            )?,
        };
        // ABC1 keeps the uncorrected Hessian for inference; the iterated and
        // score variants re-evaluate it at β̃
        let one_shot = matches!(est, EstimatorKind::Abc1(_));
        let (coef_se, wald_cov) = if one_shot {
            (self.fit_ses.clone(), self.fit_winv.clone())
        } else {
            (
                state.standard_errors()?,
                state.hessian_cholesky()?.inverse(),
            )
        };
        let (ape_vals, ape_se) = self.corrected_apes(&state, l)?;
        let (stat, _) = wald_test(&bc.beta_corrected, &wald_cov, &self.h0)?;
        Ok(EstRecord {
            coef: bc.beta_corrected,
            coef_se,
            ape: ape_vals,
            ape_se,
            wald: Some(stat),
        })
    }

    fn run_spj(&mut self, variant: SpjVariant) -> Result<EstRecord> {
        self.subfits(variant)?;
        let slot = match variant {
            SpjVariant::Spj1 => 0,
            SpjVariant::Spj2 => 1,
        };
        let subs = self.spj_subs[slot].as_ref().unwrap();
        let betas: Vec<Vec<f64>> = subs.iter().map(|s| s.fit.beta.clone()).collect();
        let coef = bias::jackknife_combine(&self.fit.beta, &betas, variant);
        let full_ape = {
            let pe = ape::partial_effects(&self.fit.eta, &self.fit.beta, &self.panel, &self.fam)?;
            ape::ape(&pe)
        };
        let apes = ape::ape_spj_from_subfits(&full_ape, subs, &self.fam, variant)?;
        // APE standard errors at the re-profiled jackknife-corrected state
        let state = feglm::refit_state(
            &self.panel,
            &self.fam,
            &coef,
            &self.fit.beta,
            &self.fit.eta,
            &self.cfg.fit,
        )?;
        let pe_c = ape::partial_effects(&state.eta, &state.beta, &self.panel, &self.fam)?;
        let cov = ape::ape_cov_simplified(&pe_c, &state, &self.panel, &self.cfg.fit, false)?;
        let ape_se = se_from_cov(&cov, coef.len());
        let (stat, _) = wald_test(&coef, &self.fit_winv, &self.h0)?;
        Ok(EstRecord {
            coef,
            coef_se: self.fit_ses.clone(),
            ape: apes,
            ape_se,
            wald: Some(stat),
        })
    }

    fn run(&mut self, est: EstimatorKind) -> Result<EstRecord> {
        match est {
            EstimatorKind::Mle => {
                let (d, dse) = self.mle_ape()?;
                let (stat, _) = wald_test(&self.fit.beta, &self.fit_winv, &self.h0)?;
                Ok(EstRecord {
                    coef: self.fit.beta.clone(),
                    coef_se: self.fit_ses.clone(),
                    ape: d,
                    ape_se: dse,
                    wald: Some(stat),
                })
            }
            EstimatorKind::Abc1(_)
            | EstimatorKind::Abc2(_)
            | EstimatorKind::Abc3(_)
            | EstimatorKind::Abc4(_) => self.run_abc(est),
            EstimatorKind::Spj1 => self.run_spj(SpjVariant::Spj1),
            EstimatorKind::Spj2 => self.run_spj(SpjVariant::Spj2),
            EstimatorKind::Lpm(l) => {
                let g = self.gaussian_fit()?;
                let r = lpm::lpm_from_fit(g, &self.panel_raw, l, &self.cfg.fit)?;
                Ok(EstRecord {
                    coef: r.beta_corrected.clone(),
                    coef_se: r.se.clone(),
                    ape: lpm::lpm_ape(&r),
                    ape_se: r.se,
                    wald: None,
                })
            }
        }
    }
}

/// The linear design: the Gaussian within fit plays the role of the MLE and
/// the bandwidth-indexed corrections are the dynamic-bias adjustments.
fn run_linear_rep(
    cfg: &McConfig,
    panel: &PanelData,
    truth: &Truth,
) -> Vec<std::result::Result<EstRecord, String>> {
    let run = || -> Result<(FitResult, Vec<f64>)> {
        let fit = feglm::fit(panel, &Family::gaussian(), &cfg.fit)?;
        let h0 = vec![truth.rho, truth.beta];
        Ok((fit, h0))
    };
    let (fit, h0) = match run() {
        Ok(v) => v,
        Err(e) => {
            return vec![Err(e.to_string()); cfg.estimators.len()];
        }
    };
    cfg.estimators
        .iter()
        .map(|est| {
            let go = || -> Result<EstRecord> {
                let l = match est {
                    EstimatorKind::Mle | EstimatorKind::Lpm(0) => 0,
                    EstimatorKind::Lpm(l) => *l,
                    EstimatorKind::Abc1(l) => *l,
                    other => {
                        return Err(Error::Data(format!(
                            "{other:?} is not defined for the linear design"
                        )))
                    }
                };
                let r = lpm::lpm_from_fit(fit.clone(), panel, l, &cfg.fit)?;
                // Wald covariance consistent with the σ̂²-scaled errors
                let winv = r.fit.hessian_cholesky()?.inverse();
                let sigma2 = r.se[0] * r.se[0] / winv[0];
                let cov = scaled(&winv, sigma2);
                let (stat, _) = wald_test(&r.beta_corrected, &cov, &h0)?;
                Ok(EstRecord {
                    coef: r.beta_corrected.clone(),
                    coef_se: r.se.clone(),
                    ape: r.beta_corrected,
                    ape_se: r.se,
                    wald: Some(stat),
                })
            };
            go().map_err(|e| e.to_string())
        })
        .collect()
}

fn run_rep(cfg: &McConfig, rep: usize) -> RepOutcome {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.base_seed);
    rng.set_stream(rep as u64 + 1);
    let generated = generate_with_rng(&cfg.dgp, &mut rng);
    let (panel_raw, truth) = match generated {
        Ok(v) => v,
        Err(e) => {
            return RepOutcome {
                truth: None,
                truth_pruned: None,
                records: vec![Err(e.to_string()); cfg.estimators.len()],
            }
        }
    };

    if cfg.dgp.kind == DgpKind::DynamicLinear {
        let records = run_linear_rep(cfg, &panel_raw, &truth);
        let tp = Some(truth.ape.clone());
        return RepOutcome {
            truth: Some(truth),
            truth_pruned: tp,
            records,
        };
    }

    let fam = Family::probit();
    let prepared = (|| -> Result<RepContext<'_>> {
        let (panel, mut fit_log) = crate::panel::drop_noninformative(&panel_raw)?;
        let panel_raw = panel_raw.clone();
        let fit = {
            let mut f = feglm::fit(&panel, &fam, &cfg.fit)?;
            std::mem::swap(&mut f.dropped, &mut fit_log);
            f
        };
        let fit_winv = fit.hessian_cholesky()?.inverse();
        let fit_ses = se_from_cov(&fit_winv, fit.n_reg());
        Ok(RepContext {
            cfg,
            fam,
            panel,
            panel_raw,
            h0: vec![truth.rho, truth.beta],
            truth: truth.clone(),
            fit,
            fit_winv,
            fit_ses,
            mle_pe: None,
            gauss: None,
            spj_subs: [None, None],
        })
    })();
    let mut ctx = match prepared {
        Ok(c) => c,
        Err(e) => {
            return RepOutcome {
                truth: Some(truth),
                truth_pruned: None,
                records: vec![Err(e.to_string()); cfg.estimators.len()],
            }
        }
    };
    // each estimator is measured against the estimand of the sample it was
    // computed on: the pruned panel for the nonlinear pipeline, the full
    // generated sample for the linear probability model
    let truth_pruned = true_apes_on(&ctx.panel, &ctx.truth, cfg.dgp.kind);
    let records = cfg
        .estimators
        .clone()
        .into_iter()
        .map(|est| ctx.run(est).map_err(|e| e.to_string()))
        .collect();
    RepOutcome {
        truth: Some(ctx.truth.clone()),
        truth_pruned: Some(truth_pruned),
        records,
    }
}

/// Run the full experiment. Replications are independent ChaCha streams and
/// the reduction is sequential in replication order, so the summary is
/// bit-identical under any thread count.
pub fn run_monte_carlo(cfg: &McConfig) -> McSummary {
    let outcomes: Vec<RepOutcome> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| run_rep(cfg, r))
        .collect();

    let names = ["y_lag", "x"];
    let mut estimators = Vec::with_capacity(cfg.estimators.len());
    let mut failures = Vec::new();
    let mut draws = if cfg.keep_draws {
        Some(Vec::new())
    } else {
        None
    };

    for (e_idx, est) in cfg.estimators.iter().enumerate() {
        let label = est.label(cfg.dgp.kind);
        let mut coef_est = vec![Vec::new(); 2];
        let mut coef_se = vec![Vec::new(); 2];
        let mut ape_est = vec![Vec::new(); 2];
        let mut ape_se = vec![Vec::new(); 2];
        let mut ape_truth = vec![Vec::new(); 2];
        let mut wald_stats = Vec::new();
        let mut n_failed = 0usize;
        for (rep, out) in outcomes.iter().enumerate() {
            let (Some(truth), Ok(rec)) = (&out.truth, &out.records[e_idx]) else {
                n_failed += 1;
                if let Err(msg) = &out.records[e_idx] {
                    if failures.len() < 50 {
                        failures.push(format!("rep {rep}, {label}: {msg}"));
                    }
                }
                continue;
            };
            let truth_ape = match est {
                EstimatorKind::Lpm(_) => &truth.ape,
                _ => out.truth_pruned.as_ref().unwrap_or(&truth.ape),
            };
            for j in 0..2 {
                coef_est[j].push(rec.coef[j]);
                coef_se[j].push(rec.coef_se[j]);
                ape_est[j].push(rec.ape[j]);
                ape_se[j].push(rec.ape_se[j]);
                ape_truth[j].push(truth_ape[j]);
            }
            if let Some(w) = rec.wald {
                wald_stats.push(w);
            }
            if let Some(d) = draws.as_mut() {
                d.push(RepDraw {
                    rep,
                    estimator: label.clone(),
                    truth_ape: truth_ape.clone(),
                    record: rec.clone(),
                });
            }
        }
        let n_ok = coef_est[0].len();
        let coef_truths = [vec![cfg.dgp.rho; n_ok], vec![cfg.dgp.beta; n_ok]];
        let coef_stats = (0..2)
            .map(|j| summarize(names[j], &coef_est[j], &coef_truths[j], &coef_se[j]))
            .collect();
        let ape_stats = (0..2)
            .map(|j| summarize(names[j], &ape_est[j], &ape_truth[j], &ape_se[j]))
            .collect();
        let wald_size = if wald_stats.is_empty() {
            None
        } else {
            let dof = 2;
            Some(
                wald_stats.iter().filter(|s| **s > CHI2_95[dof - 1]).count() as f64
                    / wald_stats.len() as f64,
            )
        };
        estimators.push(EstimatorSummary {
            label,
            n_ok,
            n_failed,
            coef: coef_stats,
            ape: ape_stats,
            wald_size,
        });
    }

    McSummary {
        design: cfg.dgp,
        reps: cfg.reps,
        base_seed: cfg.base_seed,
        generator: GENERATOR_ID.into(),
        estimators,
        failures,
        draws,
    }
}
