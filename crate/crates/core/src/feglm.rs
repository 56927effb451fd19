//! Fisher scoring for binary-choice (and Gaussian) models with two-way fixed
//! effects concentrated out.
//!
//! The linear predictor is the state variable; the fixed effects themselves
//! are never materialized. Each iteration computes working quantities from
//! `η`, centers the working residual and the regressors under the current
//! weights, solves a J×J weighted least-squares step, and updates
//!
//! ```text
//! η ← η + ν - Mν + MX (β' - β)
//! ```
//!
//! with step-halving whenever the log-likelihood would decrease. The offset
//! variant holds β fixed and re-profiles the fixed effects alone through the
//! projection `Pν = ν - Mν`.

use crate::centering::CenteringWorkspace;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::linalg::{sup_norm, Cholesky};
use crate::panel::{drop_noninformative, DropLog, PanelData};
use serde::{Deserialize, Serialize};

/// Relative pivot threshold for declaring the centered regressors collinear.
pub const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitConfig {
    /// Stop when the relative log-likelihood change falls below this.
    pub tol_dev: f64,
    /// Stop when the max-abs coefficient step falls below this.
    pub tol_step: f64,
    pub max_iter: usize,
    pub centering_tol: f64,
    pub centering_max_sweeps: usize,
    pub max_halvings: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            tol_dev: 1e-9,
            tol_step: 1e-8,
            max_iter: 100,
            centering_tol: crate::centering::DEFAULT_TOLERANCE,
            centering_max_sweeps: crate::centering::DEFAULT_MAX_SWEEPS,
            max_halvings: 20,
        }
    }
}

impl FitConfig {
    pub fn with_centering_tol(mut self, tol: f64) -> Self {
        self.centering_tol = tol;
        self
    }
}

/// Converged estimator state. All stored quantities are evaluated at the
/// final linear predictor, so the bias-correction layers can consume them
/// directly.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub beta: Vec<f64>,
    pub eta: Vec<f64>,
    pub loglik: f64,
    /// Working weights ω̂.
    pub weights: Vec<f64>,
    /// Working residuals ν̂.
    pub nu: Vec<f64>,
    /// Score in the linear predictor, ∂l̂.
    pub score_resid: Vec<f64>,
    /// Centered regressors MX, column-major.
    pub mx_x: Vec<Vec<f64>>,
    /// Centered working residual Mν̂.
    pub mx_nu: Vec<f64>,
    /// Concentrated Hessian W = Σ ω (MX)(MX)', row-major J×J.
    pub hessian: Vec<f64>,
    pub iterations: usize,
    pub dropped: DropLog,
}

impl FitResult {
    pub fn n_reg(&self) -> usize {
        self.beta.len()
    }

    pub fn hessian_cholesky(&self) -> Result<Cholesky> {
        Cholesky::new(&self.hessian, self.n_reg(), PIVOT_TOL)
    }

    /// Uncorrected standard errors: sqrt of the diagonal of W⁻¹.
    pub fn standard_errors(&self) -> Result<Vec<f64>> {
        let j = self.n_reg();
        let inv = self.hessian_cholesky()?.inverse();
        Ok((0..j).map(|i| inv[i * j + i].sqrt()).collect())
    }

    /// Concentrated score (MX)'Ω ν̂ at the stored state.
    pub fn score(&self) -> Vec<f64> {
        let j = self.n_reg();
        let n = self.eta.len();
        let mut g = vec![0.0; j];
        for k in 0..n {
            let wnu = self.weights[k] * self.nu[k];
            for (gj, col) in g.iter_mut().zip(&self.mx_x) {
                *gj += col[k] * wnu;
            }
        }
        g
    }
}

/// Recompute Σ ω (MX)(MX)' from a stored state.
pub fn concentrated_hessian(fr: &FitResult) -> Vec<f64> {
    hessian_from(&fr.weights, &fr.mx_x)
}

fn hessian_from(weights: &[f64], mx: &[Vec<f64>]) -> Vec<f64> {
    let j = mx.len();
    let mut h = vec![0.0; j * j];
    for k in 0..weights.len() {
        let w = weights[k];
        for a in 0..j {
            let wa = w * mx[a][k];
            for b in a..j {
                h[a * j + b] += wa * mx[b][k];
            }
        }
    }
    for a in 0..j {
        for b in 0..a {
            h[a * j + b] = h[b * j + a];
        }
    }
    h
}

fn total_loglik(fam: &Family, eta: &[f64], y: &[f64]) -> f64 {
    eta.iter().zip(y).map(|(&e, &yy)| fam.loglik(e, yy)).sum()
}

fn working_vectors(fam: &Family, eta: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = eta.len();
    let mut score = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut nu = vec![0.0; n];
    for k in 0..n {
        let wq = fam.working(eta[k], y[k])?;
        score[k] = wq.score;
        w[k] = wq.weight;
        nu[k] = wq.nu;
    }
    Ok((score, w, nu))
}

/// Starting linear predictor. A constant lies in the span of the fixed
/// effects, which keeps every subsequent iterate feasible for the original
/// parametrization.
fn init_eta(p: &PanelData, fam: &Family) -> Vec<f64> {
    let n = p.n_obs() as f64;
    let start = if fam.is_binary() {
        let m = p.outcome().iter().map(|y| (y + 0.5) / 2.0).sum::<f64>() / n;
        fam.link(m)
    } else {
        p.outcome().iter().sum::<f64>() / n
    };
    vec![start; p.n_obs()]
}

fn validate_outcome(p: &PanelData, fam: &Family) -> Result<()> {
    if fam.is_binary() && !p.is_binary_outcome() {
        return Err(Error::Data(format!(
            "family {} requires a 0/1 outcome",
            fam.label()
        )));
    }
    Ok(())
}

fn make_workspace(p: &PanelData, weights: Vec<f64>, cfg: &FitConfig) -> Result<CenteringWorkspace> {
    Ok(CenteringWorkspace::new(p, weights)?
        .with_tolerance(cfg.centering_tol, cfg.centering_max_sweeps))
}

/// Evaluate the full estimator state (working quantities, centered vectors,
/// Hessian, log-likelihood) at a given `(β, η)` pair.
fn state_at(
    p: &PanelData,
    fam: &Family,
    beta: Vec<f64>,
    eta: Vec<f64>,
    iterations: usize,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let y = p.outcome();
    let (score_resid, weights, nu) = working_vectors(fam, &eta, y)?;
    let ws = make_workspace(p, weights.clone(), cfg)?;
    let mx_nu = ws.center(&nu)?;
    let mx_x = ws.center_columns(p.columns())?;
    let hessian = hessian_from(&weights, &mx_x);
    let loglik = total_loglik(fam, &eta, y);
    Ok(FitResult {
        beta,
        eta,
        loglik,
        weights,
        nu,
        score_resid,
        mx_x,
        mx_nu,
        hessian,
        iterations,
        dropped: DropLog::default(),
    })
}

/// Maximize the concentrated log-likelihood over β.
///
/// The panel must already be pruned of non-informative groups (see
/// [`prune_and_fit`] for the full pipeline).
pub fn fit(p: &PanelData, fam: &Family, cfg: &FitConfig) -> Result<FitResult> {
    validate_outcome(p, fam)?;
    let n = p.n_obs();
    let j = p.n_reg();
    if j == 0 {
        return Err(Error::Data("at least one regressor is required".into()));
    }
    let y = p.outcome();

    let mut eta = init_eta(p, fam);
    let mut beta = vec![0.0; j];
    let mut loglik = total_loglik(fam, &eta, y);
    let mut iterations = 0;
    // the stopping rule must fire on two consecutive iterations: the second
    // pass is a polishing step that squares the remaining error, so the
    // returned state is much closer to the optimum than the trigger implies
    let mut trigger_count = 0;
    let mut converged = false;

    while iterations < cfg.max_iter {
        iterations += 1;
        let (_score, weights, nu) = working_vectors(fam, &eta, y)?;
        let ws = make_workspace(p, weights.clone(), cfg)?;
        let mnu = ws.center(&nu)?;
        let mx = ws.center_columns(p.columns())?;
        let hess = hessian_from(&weights, &mx);
        let mut rhs = vec![0.0; j];
        for k in 0..n {
            let wm = weights[k] * mnu[k];
            for (r, col) in rhs.iter_mut().zip(&mx) {
                *r += col[k] * wm;
            }
        }
        let step = Cholesky::new(&hess, j, PIVOT_TOL)?.solve(&rhs);

        // full Newton direction in η-space: ν - Mν + MX·step
        let mut deta = nu.clone();
        for k in 0..n {
            deta[k] -= mnu[k];
            for (col, s) in mx.iter().zip(&step) {
                deta[k] += col[k] * s;
            }
        }

        let mut scale = 1.0;
        let mut accepted = None;
        let noise = 1e-11 * (1.0 + loglik.abs());
        for _ in 0..=cfg.max_halvings {
            let eta_try: Vec<f64> = eta.iter().zip(&deta).map(|(e, d)| e + scale * d).collect();
            let ll_try = total_loglik(fam, &eta_try, y);
            if ll_try.is_finite() && ll_try >= loglik - noise {
                accepted = Some((eta_try, ll_try));
                break;
            }
            scale *= 0.5;
        }
        let Some((eta_new, ll_new)) = accepted else {
            // no ascent direction left: at numerical convergence this is a
            // stall at the optimum, otherwise a genuine failure
            if sup_norm(&step) < cfg.tol_step * 10.0 {
                converged = true;
                break;
            }
            return Err(Error::NoConvergence {
                what: "fisher-scoring step halving",
                limit: cfg.max_halvings,
            });
        };

        for (b, s) in beta.iter_mut().zip(&step) {
            *b += scale * s;
        }
        let dev_change = (ll_new - loglik).abs() / (0.1 + ll_new.abs());
        // the coefficient step alone can look converged while the implied
        // fixed effects are still moving; take the joint step size
        let step_sup = scale * sup_norm(&step).max(scale * sup_norm(&deta));
        eta = eta_new;
        loglik = ll_new;
        if dev_change < cfg.tol_dev || step_sup < cfg.tol_step {
            trigger_count += 1;
            if trigger_count >= 2 {
                converged = true;
                break;
            }
        } else {
            trigger_count = 0;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "fisher scoring",
            limit: cfg.max_iter,
        });
    }
    state_at(p, fam, beta, eta, iterations, cfg)
}

/// Prune non-informative groups (binary outcomes only), fit, and attach the
/// drop log. Returns the pruned panel alongside the fit, since every
/// downstream correction must run on the same sample.
pub fn prune_and_fit(
    p: &PanelData,
    fam: &Family,
    cfg: &FitConfig,
) -> Result<(PanelData, FitResult)> {
    if fam.is_binary() {
        let (pruned, log) = drop_noninformative(p)?;
        let mut fr = fit(&pruned, fam, cfg)?;
        fr.dropped = log;
        Ok((pruned, fr))
    } else {
        let fr = fit(p, fam, cfg)?;
        Ok((p.clone(), fr))
    }
}

/// Re-profile the fixed effects with β held fixed, starting from `eta_start`
/// (which must equal Xβ plus something in the fixed-effects span; pass `None`
/// to start at Xβ). Returns the converged linear predictor η̂(β).
pub fn offset_refit(
    p: &PanelData,
    fam: &Family,
    beta_fixed: &[f64],
    eta_start: Option<&[f64]>,
    cfg: &FitConfig,
) -> Result<Vec<f64>> {
    validate_outcome(p, fam)?;
    let n = p.n_obs();
    let y = p.outcome();
    let mut eta = match eta_start {
        Some(e) => e.to_vec(),
        None => {
            let mut e = vec![0.0; n];
            for (col, b) in p.columns().iter().zip(beta_fixed) {
                for k in 0..n {
                    e[k] += col[k] * b;
                }
            }
            e
        }
    };
    let mut loglik = total_loglik(fam, &eta, y);
    let mut trigger_count = 0;
    for _ in 0..cfg.max_iter {
        let (_score, weights, nu) = working_vectors(fam, &eta, y)?;
        let ws = make_workspace(p, weights, cfg)?;
        let mnu = ws.center(&nu)?;
        // P ν = ν - M ν lies in the span of the dummies
        let pnu: Vec<f64> = nu.iter().zip(&mnu).map(|(a, b)| a - b).collect();

        let mut scale = 1.0;
        let mut accepted = None;
        let noise = 1e-11 * (1.0 + loglik.abs());
        for _ in 0..=cfg.max_halvings {
            let eta_try: Vec<f64> = eta.iter().zip(&pnu).map(|(e, d)| e + scale * d).collect();
            let ll_try = total_loglik(fam, &eta_try, y);
            if ll_try.is_finite() && ll_try >= loglik - noise {
                accepted = Some((eta_try, ll_try));
                break;
            }
            scale *= 0.5;
        }
        let Some((eta_new, ll_new)) = accepted else {
            if sup_norm(&pnu) < cfg.tol_step * 10.0 {
                return Ok(eta);
            }
            return Err(Error::NoConvergence {
                what: "offset step halving",
                limit: cfg.max_halvings,
            });
        };

        let dev_change = (ll_new - loglik).abs() / (0.1 + ll_new.abs());
        let step_sup = scale * sup_norm(&pnu);
        eta = eta_new;
        loglik = ll_new;
        if dev_change < cfg.tol_dev || step_sup < cfg.tol_step {
            trigger_count += 1;
            if trigger_count >= 2 {
                return Ok(eta);
            }
        } else {
            trigger_count = 0;
        }
    }
    Err(Error::NoConvergence {
        what: "offset refit",
        limit: cfg.max_iter,
    })
}

/// Full estimator state at an externally supplied β (typically a
/// bias-corrected one): re-profiles the fixed effects from a warm start and
/// re-evaluates every hatted quantity there.
pub fn refit_state(
    p: &PanelData,
    fam: &Family,
    beta: &[f64],
    warm_beta: &[f64],
    warm_eta: &[f64],
    cfg: &FitConfig,
) -> Result<FitResult> {
    let n = p.n_obs();
    let mut eta0 = warm_eta.to_vec();
    for (col, (bn, bo)) in p.columns().iter().zip(beta.iter().zip(warm_beta)) {
        let db = bn - bo;
        if db != 0.0 {
            for k in 0..n {
                eta0[k] += col[k] * db;
            }
        }
    }
    let eta = offset_refit(p, fam, beta, Some(&eta0), cfg)?;
    state_at(p, fam, beta.to_vec(), eta, 0, cfg)
}
