//! Two-way fixed-effects linear probability model with the dynamic-bias
//! (Nickell-type) correction, used as the comparison estimator for average
//! partial effects.
//!
//! The within fit and the correction share the Gaussian-identity code paths
//! of `feglm` and `bias`: with `∂²F ≡ 0` only the spectral term of the
//! individual bias component survives, which is exactly the dynamic-panel
//! correction.

use crate::bias::{abc1, BcConfig};
use crate::error::Result;
use crate::family::Family;
use crate::feglm::{self, FitConfig, FitResult};
use crate::panel::PanelData;

#[derive(Debug, Clone)]
pub struct LpmResult {
    pub beta: Vec<f64>,
    pub beta_corrected: Vec<f64>,
    /// Standard errors from σ̂² W⁻¹ with N + T - 1 + J degrees of freedom
    /// subtracted in σ̂².
    pub se: Vec<f64>,
    pub fitted: Vec<f64>,
    /// Share of fitted values outside [0, 1]; a diagnostic for why linear
    /// effects of binary regressors drift with T.
    pub out_of_unit_fraction: f64,
    pub fit: FitResult,
}

/// Correct and attach inference to an existing Gaussian within fit.
pub fn lpm_from_fit(fit: FitResult, p: &PanelData, l: usize, cfg: &FitConfig) -> Result<LpmResult> {
    let fam = Family::gaussian();
    let bc = abc1(
        &fit,
        p,
        &fam,
        &BcConfig {
            bandwidth: l,
            fit: *cfg,
            ..Default::default()
        },
    )?;

    let n = p.n_obs() as f64;
    let rss: f64 = p
        .outcome()
        .iter()
        .zip(&fit.eta)
        .map(|(y, e)| (y - e) * (y - e))
        .sum();
    let dof = n - (p.n_indiv() + p.n_time() - 1 + p.n_reg()) as f64;
    let sigma2 = rss / dof.max(1.0);
    let j = fit.n_reg();
    let winv = fit.hessian_cholesky()?.inverse();
    let se: Vec<f64> = (0..j).map(|i| (sigma2 * winv[i * j + i]).sqrt()).collect();

    let out_of_unit = fit.eta.iter().filter(|v| **v < 0.0 || **v > 1.0).count() as f64 / n;

    Ok(LpmResult {
        beta: fit.beta.clone(),
        beta_corrected: bc.beta_corrected,
        se,
        fitted: fit.eta.clone(),
        out_of_unit_fraction: out_of_unit,
        fit,
    })
}

/// Within OLS plus the spectral correction with bandwidth `l`.
pub fn lpm_fit(p: &PanelData, l: usize, cfg: &FitConfig) -> Result<LpmResult> {
    let fit = feglm::fit(p, &Family::gaussian(), cfg)?;
    lpm_from_fit(fit, p, l, cfg)
}

/// Under linearity the average partial effect of any regressor is its
/// corrected coefficient.
pub fn lpm_ape(r: &LpmResult) -> Vec<f64> {
    r.beta_corrected.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{build_panel, Key, RegressorKind, Row};
    use rand::{Rng, SeedableRng};

    fn static_panel(n: i64, t: i64, seed: u64) -> PanelData {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for i in 0..n {
            let a = rng.gen_range(-0.4..0.4);
            for tt in 0..t {
                let x = rng.gen_range(-1.0..1.0) + a;
                let y = if 0.8 * x + a + rng.gen_range(-1.2..1.2) > 0.0 {
                    1.0
                } else {
                    0.0
                };
                rows.push(Row {
                    indiv: Key::Int(i),
                    time: tt,
                    y,
                    x: vec![x],
                });
            }
        }
        build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous])
            .unwrap()
            .0
    }

    #[test]
    fn shares_the_gaussian_fit_and_correction_exactly() {
        let p = static_panel(12, 6, 4);
        let cfg = FitConfig::default();
        let direct = feglm::fit(&p, &Family::gaussian(), &cfg).unwrap();
        let r = lpm_fit(&p, 1, &cfg).unwrap();
        assert_eq!(r.beta, direct.beta);
        assert_eq!(r.fit.eta, direct.eta);
        // the correction is literally abc1 under the identity family
        let bc = abc1(
            &direct,
            &p,
            &Family::gaussian(),
            &BcConfig {
                bandwidth: 1,
                fit: cfg,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.beta_corrected, bc.beta_corrected);
    }

    #[test]
    fn zero_bandwidth_leaves_coefficients_unchanged() {
        let p = static_panel(10, 5, 8);
        let r = lpm_fit(&p, 0, &FitConfig::default()).unwrap();
        assert_eq!(r.beta, r.beta_corrected);
        assert_eq!(lpm_ape(&r), r.beta);
    }

    #[test]
    fn static_exogenous_correction_is_noise_level() {
        // with strictly exogenous x the spectral products have mean zero;
        // average the correction over replications to beat sampling noise
        let mut total = 0.0;
        let reps = 40;
        for seed in 0..reps {
            let p = static_panel(40, 6, 1000 + seed);
            let r = lpm_fit(&p, 1, &FitConfig::default()).unwrap();
            total += r.beta_corrected[0] - r.beta[0];
        }
        let mean_corr = total / reps as f64;
        assert!(mean_corr.abs() < 0.01, "mean correction {mean_corr}");
    }

    #[test]
    fn sigma2_uses_the_stated_degrees_of_freedom() {
        let p = static_panel(8, 5, 2);
        let r = lpm_fit(&p, 0, &FitConfig::default()).unwrap();
        let rss: f64 = p
            .outcome()
            .iter()
            .zip(&r.fitted)
            .map(|(y, e)| (y - e) * (y - e))
            .sum();
        let dof = p.n_obs() as f64 - (p.n_indiv() + p.n_time() - 1 + 1) as f64;
        let winv = r.fit.hessian_cholesky().unwrap().inverse();
        let expect = (rss / dof * winv[0]).sqrt();
        assert!((r.se[0] - expect).abs() < 1e-14);
    }

    #[test]
    fn out_of_unit_fraction_counts_fitted_values() {
        let p = static_panel(10, 5, 3);
        let r = lpm_fit(&p, 0, &FitConfig::default()).unwrap();
        let manual =
            r.fitted.iter().filter(|v| **v < 0.0 || **v > 1.0).count() as f64 / p.n_obs() as f64;
        assert_eq!(r.out_of_unit_fraction, manual);
    }
}
