//! Bias corrections for the structural parameters: four analytical variants
//! (plain, iterated, score-level, continuously-updated score-level) and two
//! split-panel jackknife strategies.
//!
//! The analytical terms follow the two-way decomposition
//!
//! ```text
//! B = -1/2 Σ_i [ Σ_t H ∂²F (MX) + 2 Σ_{l=1..L} T_i/(T_i-l) Σ_t ∂l_{i,t-l} ω (MX) ] / Σ_t ω
//! C = -1/2 Σ_t [ Σ_i H ∂²F (MX) ] / Σ_i ω
//! ```
//!
//! with the composite bias `W⁻¹(B + C)`. The spectral sums pair observations
//! whose calendar periods differ by exactly `l`; gaps in unbalanced panels are
//! skipped, and the finite-sample factor uses the individual's own span
//! `T_i`. The jackknife variants recombine half-panel (or quadrant) estimates
//! so that the leading 1/T and 1/N bias terms cancel.

use crate::error::{Error, Result};
use crate::family::Family;
use crate::feglm::{self, FitConfig, FitResult};
use crate::linalg::{sup_diff, sup_norm, Cholesky};
use crate::panel::{split_subpanel, Factor, Half, PanelData, SubpanelSelector};
use serde::{Deserialize, Serialize};

/// Analytical correction variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbcVariant {
    /// Correct the estimator once (ABC1).
    Estimator,
    /// Iterate the estimator-level correction to its fixed point (ABC2).
    Iterated,
    /// Solve the bias-adjusted score with terms frozen at the MLE (ABC3).
    Score,
    /// Solve the bias-adjusted score, updating the terms each step (ABC4).
    ScoreUpdated,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BcConfig {
    /// Spectral bandwidth L (number of lags in the serial-correlation term).
    pub bandwidth: usize,
    pub variant: AbcVariant,
    /// Convergence threshold on the max-abs β̃ update (ABC2) and on the
    /// Newton step of the score corrections.
    pub iterated_tol: f64,
    pub iterated_max: usize,
    /// Absolute sup-norm target for the adjusted score residual.
    pub score_tol: f64,
    pub score_max: usize,
    pub fit: FitConfig,
}

impl Default for BcConfig {
    fn default() -> Self {
        Self {
            bandwidth: 1,
            variant: AbcVariant::Estimator,
            iterated_tol: 1e-9,
            iterated_max: 50,
            score_tol: 1e-8,
            score_max: 100,
            fit: FitConfig::default(),
        }
    }
}

impl BcConfig {
    pub fn with_bandwidth(mut self, l: usize) -> Self {
        self.bandwidth = l;
        self
    }
}

/// A corrected estimate with its estimated composite bias.
#[derive(Debug, Clone)]
pub struct BcResult {
    pub beta_corrected: Vec<f64>,
    /// Estimated composite bias b̂ with β̃ = β̂ - b̂.
    pub bias_hat: Vec<f64>,
    pub label: String,
    /// Sub-panel estimates, jackknife variants only.
    pub subpanel_betas: Option<Vec<Vec<f64>>>,
    /// Re-profiled estimator state at β̃ (ABC2-4), used for standard errors
    /// and downstream partial-effect corrections.
    pub corrected_state: Option<FitResult>,
}

/// Per-observation `H ∂²F` at the stored linear predictor.
fn h_d2f(fr: &FitResult, fam: &Family) -> Result<Vec<f64>> {
    if !fam.is_binary() {
        return Ok(vec![0.0; fr.eta.len()]);
    }
    fr.eta
        .iter()
        .map(|&e| {
            let ev = fam.evaluate(e)?;
            Ok(ev.df / (ev.f * (1.0 - ev.f)) * ev.d2f)
        })
        .collect()
}

/// The leading bias terms B (individual) and C (time) at the state `fr`.
pub fn abc_terms(
    fr: &FitResult,
    p: &PanelData,
    fam: &Family,
    l: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let j = fr.n_reg();
    if l > 0 {
        let min_span = p.min_span();
        if min_span <= l {
            return Err(Error::BandwidthTooLarge { l, min_span });
        }
    }
    let hd2 = h_d2f(fr, fam)?;
    let cal = p.cal_time();

    let indiv = p.factor(Factor::Indiv);
    let mut b = vec![0.0; j];
    let mut num = vec![0.0; j];
    for g in 0..indiv.group_count {
        let obs = indiv.group(g); // ascending in time
        let t_i = obs.len();
        num.fill(0.0);
        let mut wsum = 0.0;
        for &k in obs {
            let k = k as usize;
            wsum += fr.weights[k];
            for (nj, col) in num.iter_mut().zip(&fr.mx_x) {
                *nj += hd2[k] * col[k];
            }
        }
        for lag in 1..=l {
            let fac = 2.0 * t_i as f64 / (t_i - lag) as f64;
            // pair (t-lag, t) within the individual; both pointers advance
            // monotonically over the sorted, duplicate-free times
            let mut a = 0usize;
            for &kb in obs {
                let kb = kb as usize;
                let target = cal[kb] - lag as i64;
                while a < t_i && cal[obs[a] as usize] < target {
                    a += 1;
                }
                if a < t_i && cal[obs[a] as usize] == target {
                    let ka = obs[a] as usize;
                    let s = fac * fr.score_resid[ka] * fr.weights[kb];
                    for (nj, col) in num.iter_mut().zip(&fr.mx_x) {
                        *nj += s * col[kb];
                    }
                }
            }
        }
        for (bj, nj) in b.iter_mut().zip(&num) {
            *bj -= 0.5 * nj / wsum;
        }
    }

    let time = p.factor(Factor::Time);
    let mut c = vec![0.0; j];
    for g in 0..time.group_count {
        let obs = time.group(g);
        num.fill(0.0);
        let mut wsum = 0.0;
        for &k in obs {
            let k = k as usize;
            wsum += fr.weights[k];
            for (nj, col) in num.iter_mut().zip(&fr.mx_x) {
                *nj += hd2[k] * col[k];
            }
        }
        for (cj, nj) in c.iter_mut().zip(&num) {
            *cj -= 0.5 * nj / wsum;
        }
    }
    Ok((b, c))
}

fn composite_bias(fr: &FitResult, b: &[f64], c: &[f64]) -> Result<Vec<f64>> {
    let bc: Vec<f64> = b.iter().zip(c).map(|(x, y)| x + y).collect();
    Ok(fr.hessian_cholesky()?.solve(&bc))
}

fn subtract(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// ABC1: one-shot analytical correction `β̃ = β̂ - W⁻¹(B + C)`.
pub fn abc1(fr: &FitResult, p: &PanelData, fam: &Family, cfg: &BcConfig) -> Result<BcResult> {
    let (b, c) = abc_terms(fr, p, fam, cfg.bandwidth)?;
    let bias = composite_bias(fr, &b, &c)?;
    Ok(BcResult {
        beta_corrected: subtract(&fr.beta, &bias),
        bias_hat: bias,
        label: format!("ABC1 ({})", cfg.bandwidth),
        subpanel_betas: None,
        corrected_state: None,
    })
}

/// ABC2: iterate the correction, re-profiling the fixed effects and
/// re-evaluating W, B, C at each candidate β̃; the uncorrected β̂ stays the
/// anchor of every update.
pub fn abc2(fr: &FitResult, p: &PanelData, fam: &Family, cfg: &BcConfig) -> Result<BcResult> {
    let mut beta_t = fr.beta.clone();
    let mut state: Option<FitResult> = None;
    for _ in 0..cfg.iterated_max {
        let s = state.as_ref().unwrap_or(fr);
        let (b, c) = abc_terms(s, p, fam, cfg.bandwidth)?;
        let bias = composite_bias(s, &b, &c)?;
        let beta_new = subtract(&fr.beta, &bias);
        let delta = sup_diff(&beta_new, &beta_t);
        let next = feglm::refit_state(p, fam, &beta_new, &s.beta, &s.eta, &cfg.fit)?;
        beta_t = beta_new;
        state = Some(next);
        if delta < cfg.iterated_tol {
            return Ok(BcResult {
                bias_hat: subtract(&fr.beta, &beta_t),
                beta_corrected: beta_t,
                label: format!("ABC2 ({})", cfg.bandwidth),
                subpanel_betas: None,
                corrected_state: state,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "iterated analytical correction",
        limit: cfg.iterated_max,
    })
}

/// ABC3/ABC4: root of the bias-adjusted concentrated score, solved by damped
/// Newton with W(β̃) as the Jacobian. ABC3 freezes B + C at the uncorrected
/// fit; ABC4 re-evaluates them at every candidate.
fn abc_score_root(
    fr: &FitResult,
    p: &PanelData,
    fam: &Family,
    cfg: &BcConfig,
    update_rhs: bool,
) -> Result<BcResult> {
    let rhs_at = |s: &FitResult| -> Result<Vec<f64>> {
        let (b, c) = abc_terms(s, p, fam, cfg.bandwidth)?;
        Ok(b.iter().zip(&c).map(|(x, y)| x + y).collect())
    };
    let rhs_fixed = rhs_at(fr)?;
    let mut beta = fr.beta.clone();
    let mut state: Option<FitResult> = None;
    for _ in 0..cfg.score_max {
        let s = state.as_ref().unwrap_or(fr);
        let rhs = if update_rhs {
            rhs_at(s)?
        } else {
            rhs_fixed.clone()
        };
        let resid = subtract(&s.score(), &rhs);
        let rsup = sup_norm(&resid);
        // dScore/dβ = -W, so the Newton update is β + W⁻¹(score - rhs)
        let step = Cholesky::new(&s.hessian, beta.len(), feglm::PIVOT_TOL)?.solve(&resid);
        if rsup < cfg.score_tol || sup_norm(&step) < cfg.iterated_tol {
            let final_state = match state {
                Some(st) => st,
                None => s.clone(),
            };
            return Ok(BcResult {
                bias_hat: subtract(&fr.beta, &beta),
                beta_corrected: beta,
                label: format!(
                    "{} ({})",
                    if update_rhs { "ABC4" } else { "ABC3" },
                    cfg.bandwidth
                ),
                subpanel_betas: None,
                corrected_state: Some(final_state),
            });
        }
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=20 {
            let beta_try: Vec<f64> = beta.iter().zip(&step).map(|(b, d)| b + scale * d).collect();
            let st = feglm::refit_state(p, fam, &beta_try, &s.beta, &s.eta, &cfg.fit)?;
            let rhs_try = if update_rhs {
                rhs_at(&st)?
            } else {
                rhs_fixed.clone()
            };
            let r_try = subtract(&st.score(), &rhs_try);
            if sup_norm(&r_try) < rsup {
                accepted = Some((beta_try, st));
                break;
            }
            scale *= 0.5;
        }
        let Some((beta_new, st_new)) = accepted else {
            return Err(Error::NoConvergence {
                what: "score-correction damping",
                limit: 20,
            });
        };
        beta = beta_new;
        state = Some(st_new);
    }
    Err(Error::NoConvergence {
        what: "score-corrected estimator",
        limit: cfg.score_max,
    })
}

pub fn abc3(fr: &FitResult, p: &PanelData, fam: &Family, cfg: &BcConfig) -> Result<BcResult> {
    abc_score_root(fr, p, fam, cfg, false)
}

pub fn abc4(fr: &FitResult, p: &PanelData, fam: &Family, cfg: &BcConfig) -> Result<BcResult> {
    abc_score_root(fr, p, fam, cfg, true)
}

/// Dispatch on the configured analytical variant.
pub fn abc(fr: &FitResult, p: &PanelData, fam: &Family, cfg: &BcConfig) -> Result<BcResult> {
    match cfg.variant {
        AbcVariant::Estimator => abc1(fr, p, fam, cfg),
        AbcVariant::Iterated => abc2(fr, p, fam, cfg),
        AbcVariant::Score => abc3(fr, p, fam, cfg),
        AbcVariant::ScoreUpdated => abc4(fr, p, fam, cfg),
    }
}

/// Jackknife splitting strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpjVariant {
    /// Half-panels along each factor separately.
    Spj1,
    /// The four quadrant sub-panels.
    Spj2,
}

/// One refitted sub-panel.
pub struct SubFit {
    pub label: &'static str,
    pub panel: PanelData,
    pub fit: FitResult,
}

fn selectors(variant: SpjVariant) -> Vec<(SubpanelSelector, &'static str)> {
    match variant {
        SpjVariant::Spj1 => vec![
            (SubpanelSelector::Indiv(Half::Low), "first individual half"),
            (
                SubpanelSelector::Indiv(Half::High),
                "second individual half",
            ),
            (SubpanelSelector::Time(Half::Low), "early time half"),
            (SubpanelSelector::Time(Half::High), "late time half"),
        ],
        SpjVariant::Spj2 => vec![
            (
                SubpanelSelector::Quadrant(Half::Low, Half::Low),
                "low/early quadrant",
            ),
            (
                SubpanelSelector::Quadrant(Half::Low, Half::High),
                "low/late quadrant",
            ),
            (
                SubpanelSelector::Quadrant(Half::High, Half::Low),
                "high/early quadrant",
            ),
            (
                SubpanelSelector::Quadrant(Half::High, Half::High),
                "high/late quadrant",
            ),
        ],
    }
}

/// Extract and fully re-estimate (prune → fit) every sub-panel of a variant.
pub fn spj_subfits(
    p: &PanelData,
    fam: &Family,
    fit_cfg: &FitConfig,
    variant: SpjVariant,
) -> Result<Vec<SubFit>> {
    selectors(variant)
        .into_iter()
        .map(|(sel, label)| {
            let sub = split_subpanel(p, sel).map_err(|e| Error::SubpanelFitFailed {
                which: label,
                source: Box::new(e),
            })?;
            let (pruned, fit) =
                feglm::prune_and_fit(&sub, fam, fit_cfg).map_err(|e| Error::SubpanelFitFailed {
                    which: label,
                    source: Box::new(e),
                })?;
            Ok(SubFit {
                label,
                panel: pruned,
                fit,
            })
        })
        .collect()
}

/// Jackknife recombination shared by coefficients and partial effects.
///
/// SPJ1 removes the estimated half-panel biases along both factors:
/// `θ̃ = 3θ̂ - θ̄_N - θ̄_T`. SPJ2 uses the quadrant average: `θ̃ = 2θ̂ - θ̄_NT`.
pub fn jackknife_combine(full: &[f64], subs: &[Vec<f64>], variant: SpjVariant) -> Vec<f64> {
    let j = full.len();
    match variant {
        SpjVariant::Spj1 => {
            assert_eq!(subs.len(), 4);
            (0..j)
                .map(|c| {
                    let theta_n = 0.5 * (subs[0][c] + subs[1][c]);
                    let theta_t = 0.5 * (subs[2][c] + subs[3][c]);
                    3.0 * full[c] - theta_n - theta_t
                })
                .collect()
        }
        SpjVariant::Spj2 => {
            assert_eq!(subs.len(), 4);
            (0..j)
                .map(|c| {
                    let theta_nt = subs.iter().map(|s| s[c]).sum::<f64>() / 4.0;
                    2.0 * full[c] - theta_nt
                })
                .collect()
        }
    }
}

fn spj_result(fr: &FitResult, subs: &[SubFit], variant: SpjVariant) -> BcResult {
    let betas: Vec<Vec<f64>> = subs.iter().map(|s| s.fit.beta.clone()).collect();
    let corrected = jackknife_combine(&fr.beta, &betas, variant);
    BcResult {
        bias_hat: subtract(&fr.beta, &corrected),
        beta_corrected: corrected,
        label: match variant {
            SpjVariant::Spj1 => "SPJ1".into(),
            SpjVariant::Spj2 => "SPJ2".into(),
        },
        subpanel_betas: Some(betas),
        corrected_state: None,
    }
}

/// SPJ1 given an existing full-sample fit on `p`.
pub fn spj1_from_fit(
    fr: &FitResult,
    p: &PanelData,
    fam: &Family,
    cfg: &BcConfig,
) -> Result<BcResult> {
    let subs = spj_subfits(p, fam, &cfg.fit, SpjVariant::Spj1)?;
    Ok(spj_result(fr, &subs, SpjVariant::Spj1))
}

pub fn spj2_from_fit(
    fr: &FitResult,
    p: &PanelData,
    fam: &Family,
    cfg: &BcConfig,
) -> Result<BcResult> {
    let subs = spj_subfits(p, fam, &cfg.fit, SpjVariant::Spj2)?;
    Ok(spj_result(fr, &subs, SpjVariant::Spj2))
}

/// SPJ1 from scratch: full pipeline on the panel plus the four half fits.
pub fn spj1(p: &PanelData, fam: &Family, cfg: &BcConfig) -> Result<BcResult> {
    let (pruned, fr) = feglm::prune_and_fit(p, fam, &cfg.fit)?;
    spj1_from_fit(&fr, &pruned, fam, cfg)
}

pub fn spj2(p: &PanelData, fam: &Family, cfg: &BcConfig) -> Result<BcResult> {
    let (pruned, fr) = feglm::prune_and_fit(p, fam, &cfg.fit)?;
    spj2_from_fit(&fr, &pruned, fam, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{build_panel, Key, RegressorKind, Row};
    use rand::{Rng, SeedableRng};

    fn square_panel(n: i64, seed: u64) -> Vec<Row> {
        // square, fully balanced, roles of i and t exchangeable in law; the
        // noise is wide enough that tiny samples stay away from separation
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for i in 0..n {
            for t in 0..n {
                let x = rng.gen_range(-1.0..1.0);
                let y = if 0.6 * x + rng.gen_range(-2.0..2.0) > 0.0 {
                    1.0
                } else {
                    0.0
                };
                rows.push(Row {
                    indiv: Key::Int(i),
                    time: t,
                    y,
                    x: vec![x],
                });
            }
        }
        rows
    }

    fn built(rows: Vec<Row>) -> PanelData {
        build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous])
            .unwrap()
            .0
    }

    #[test]
    fn l0_terms_swap_under_factor_exchange() {
        let rows = square_panel(7, 42);
        let transposed: Vec<Row> = rows
            .iter()
            .map(|r| Row {
                indiv: Key::Int(r.time),
                time: match &r.indiv {
                    Key::Int(v) => *v,
                    _ => unreachable!(),
                },
                y: r.y,
                x: r.x.clone(),
            })
            .collect();
        let cfg = FitConfig::default().with_centering_tol(1e-12);
        let (p1, f1) = feglm::prune_and_fit(&built(rows), &Family::logit(), &cfg).unwrap();
        let (p2, f2) = feglm::prune_and_fit(&built(transposed), &Family::logit(), &cfg).unwrap();
        let (b1, c1) = abc_terms(&f1, &p1, &Family::logit(), 0).unwrap();
        let (b2, c2) = abc_terms(&f2, &p2, &Family::logit(), 0).unwrap();
        assert!((b1[0] - c2[0]).abs() < 1e-7, "{} vs {}", b1[0], c2[0]);
        assert!((c1[0] - b2[0]).abs() < 1e-7, "{} vs {}", c1[0], b2[0]);
    }

    #[test]
    fn gaussian_terms_are_purely_spectral() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        let mut rows = Vec::new();
        for i in 0..10i64 {
            let mut ylag = rng.gen_range(-1.0..1.0);
            for t in 0..8i64 {
                let y = 0.4 * ylag + rng.gen_range(-1.0..1.0);
                rows.push(Row {
                    indiv: Key::Int(i),
                    time: t,
                    y,
                    x: vec![ylag],
                });
                ylag = y;
            }
        }
        let p = built(rows);
        let fr = feglm::fit(&p, &Family::gaussian(), &FitConfig::default()).unwrap();
        let (b0, c0) = abc_terms(&fr, &p, &Family::gaussian(), 0).unwrap();
        assert_eq!(b0[0], 0.0);
        assert_eq!(c0[0], 0.0);
        let (b1, c1) = abc_terms(&fr, &p, &Family::gaussian(), 1).unwrap();
        assert_eq!(c1[0], 0.0);
        assert!(b1[0] != 0.0);
    }

    #[test]
    fn bandwidth_must_be_below_the_shortest_span() {
        let rows = square_panel(8, 3);
        let (p, fr) =
            feglm::prune_and_fit(&built(rows), &Family::logit(), &FitConfig::default()).unwrap();
        let err = abc_terms(&fr, &p, &Family::logit(), p.min_span());
        assert!(matches!(err, Err(Error::BandwidthTooLarge { .. })));
    }

    #[test]
    fn zero_composite_term_leaves_beta_unchanged() {
        // gaussian with L=0: B = C = 0, so ABC1 must return β̂ exactly
        let rows = square_panel(5, 17)
            .into_iter()
            .map(|mut r| {
                r.y += r.x[0] * 0.5; // any continuous outcome works here
                r
            })
            .collect();
        let p = built(rows);
        let fr = feglm::fit(&p, &Family::gaussian(), &FitConfig::default()).unwrap();
        let cfg = BcConfig {
            bandwidth: 0,
            ..Default::default()
        };
        let out = abc1(&fr, &p, &Family::gaussian(), &cfg).unwrap();
        assert_eq!(out.beta_corrected, fr.beta);
        assert!(out.bias_hat.iter().all(|b| *b == 0.0));
    }

    #[test]
    fn abc2_first_iterate_is_abc1() {
        let rows = square_panel(8, 41);
        let cfg = BcConfig::default();
        let (p, fr) = feglm::prune_and_fit(&built(rows), &Family::probit(), &cfg.fit).unwrap();
        let one = abc1(&fr, &p, &Family::probit(), &cfg).unwrap();
        // an enormous tolerance stops the iteration after its first update
        let stopped = BcConfig {
            iterated_tol: 1e9,
            ..cfg
        };
        let two = abc2(&fr, &p, &Family::probit(), &stopped).unwrap();
        assert_eq!(one.beta_corrected, two.beta_corrected);
    }

    #[test]
    fn abc2_reaches_a_self_consistent_fixed_point() {
        let rows = square_panel(8, 5);
        let cfg = BcConfig {
            fit: FitConfig::default().with_centering_tol(1e-11),
            ..Default::default()
        };
        let (p, fr) = feglm::prune_and_fit(&built(rows), &Family::probit(), &cfg.fit).unwrap();
        let out = abc2(&fr, &p, &Family::probit(), &cfg).unwrap();
        // recompute the update at the returned point: it must not move
        let st = out.corrected_state.as_ref().unwrap();
        let (b, c) = abc_terms(st, &p, &Family::probit(), cfg.bandwidth).unwrap();
        let bias = composite_bias(st, &b, &c).unwrap();
        let again = subtract(&fr.beta, &bias);
        assert!(sup_diff(&again, &out.beta_corrected) < 10.0 * cfg.iterated_tol);
    }

    #[test]
    fn score_corrections_zero_the_adjusted_score() {
        let rows = square_panel(8, 23);
        let cfg = BcConfig {
            fit: FitConfig::default().with_centering_tol(1e-12),
            ..Default::default()
        };
        let (p, fr) = feglm::prune_and_fit(&built(rows), &Family::probit(), &cfg.fit).unwrap();
        for update in [false, true] {
            let out = abc_score_root(&fr, &p, &Family::probit(), &cfg, update).unwrap();
            let st = out.corrected_state.as_ref().unwrap();
            let (b, c) = abc_terms(st, &p, &Family::probit(), cfg.bandwidth).unwrap();
            let rhs: Vec<f64> = if update {
                b.iter().zip(&c).map(|(x, y)| x + y).collect()
            } else {
                let (b0, c0) = abc_terms(&fr, &p, &Family::probit(), cfg.bandwidth).unwrap();
                b0.iter().zip(&c0).map(|(x, y)| x + y).collect()
            };
            let resid = subtract(&st.score(), &rhs);
            assert!(sup_norm(&resid) < 1e-7, "residual {}", sup_norm(&resid));
        }
    }

    #[test]
    fn gaussian_l0_score_root_is_the_mle() {
        // right-hand side identically zero -> the root is the uncorrected β̂
        let rows = square_panel(5, 31)
            .into_iter()
            .map(|mut r| {
                r.y += 0.3 * r.x[0];
                r
            })
            .collect();
        let p = built(rows);
        let cfg = BcConfig {
            bandwidth: 0,
            fit: FitConfig::default().with_centering_tol(1e-12),
            ..Default::default()
        };
        let fr = feglm::fit(&p, &Family::gaussian(), &cfg.fit).unwrap();
        let out = abc3(&fr, &p, &Family::gaussian(), &cfg).unwrap();
        assert!(sup_diff(&out.beta_corrected, &fr.beta) < 1e-7);
    }

    #[test]
    fn stubbed_subpanel_estimates_give_zero_correction() {
        let full = vec![0.7, -0.2];
        let subs = vec![full.clone(), full.clone(), full.clone(), full.clone()];
        let c1 = jackknife_combine(&full, &subs, SpjVariant::Spj1);
        let c2 = jackknife_combine(&full, &subs, SpjVariant::Spj2);
        assert!(sup_diff(&c1, &full) < 1e-15);
        assert!(sup_diff(&c2, &full) < 1e-15);
    }

    #[test]
    fn spj_is_invariant_to_relabeling_within_halves() {
        let rows = square_panel(8, 77);
        // swap the keys of individuals 0 and 2 (both in the low half)
        let relabeled: Vec<Row> = rows
            .iter()
            .map(|r| {
                let id = match &r.indiv {
                    Key::Int(v) => *v,
                    _ => unreachable!(),
                };
                let new = match id {
                    0 => 2,
                    2 => 0,
                    other => other,
                };
                Row {
                    indiv: Key::Int(new),
                    time: r.time,
                    y: r.y,
                    x: r.x.clone(),
                }
            })
            .collect();
        let cfg = BcConfig::default();
        let a = spj1(&built(rows), &Family::logit(), &cfg).unwrap();
        let b = spj1(&built(relabeled), &Family::logit(), &cfg).unwrap();
        assert!(sup_diff(&a.beta_corrected, &b.beta_corrected) < 1e-6);
    }
}
