//! Partial effects, their averages, the analytical APE bias correction, the
//! jackknife APE corrections, and both asymptotic covariance estimators.
//!
//! Continuous regressors contribute `Δ_j = β_j ∂F`; binary regressors the
//! contrast `F|_{x_j=1} - F|_{x_j=0}` built from counterfactual linear
//! predictors. All derivative fields are carried per observation because the
//! correction and covariance layers consume them pointwise.

use crate::bias::SpjVariant;
use crate::centering::CenteringWorkspace;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::feglm::{self, FitConfig, FitResult};
use crate::panel::{Factor, PanelData, RegressorKind};

/// Per-observation effects and derivatives evaluated at one estimator state.
#[derive(Debug, Clone)]
pub struct PartialEffects {
    /// Δ per regressor (column-major like the panel).
    pub delta: Vec<Vec<f64>>,
    /// ∂Δ/∂η per regressor.
    pub d_eta: Vec<Vec<f64>>,
    /// ∂²Δ/∂η² per regressor.
    pub d2_eta: Vec<Vec<f64>>,
    /// ∂Δ/∂β' per observation, row-major J×J blocks: entry
    /// `[k*J*J + j*J + c]` is ∂Δ_j/∂β_c at observation k.
    pub d_beta: Vec<f64>,
    pub kinds: Vec<RegressorKind>,
}

impl PartialEffects {
    pub fn n_reg(&self) -> usize {
        self.delta.len()
    }
    pub fn n_obs(&self) -> usize {
        self.delta.first().map_or(0, Vec::len)
    }
}

/// Evaluate partial effects and their η- and β-derivatives at `(eta, beta)`.
pub fn partial_effects(
    eta: &[f64],
    beta: &[f64],
    p: &PanelData,
    fam: &Family,
) -> Result<PartialEffects> {
    let n = eta.len();
    let j = beta.len();
    assert_eq!(p.n_reg(), j);
    let mut delta = vec![vec![0.0; n]; j];
    let mut d_eta = vec![vec![0.0; n]; j];
    let mut d2_eta = vec![vec![0.0; n]; j];
    let mut d_beta = vec![0.0; n * j * j];

    for k in 0..n {
        let base = fam.evaluate(eta[k])?;
        let block = &mut d_beta[k * j * j..(k + 1) * j * j];
        for r in 0..j {
            match p.kinds()[r] {
                RegressorKind::Continuous => {
                    delta[r][k] = beta[r] * base.df;
                    d_eta[r][k] = beta[r] * base.d2f;
                    d2_eta[r][k] = beta[r] * base.d3f;
                    for c in 0..j {
                        block[r * j + c] = beta[r] * base.d2f * p.col(c)[k];
                    }
                    block[r * j + r] += base.df;
                }
                RegressorKind::Binary => {
                    let x_r = p.col(r)[k];
                    let eta0 = eta[k] - beta[r] * x_r;
                    let eta1 = eta0 + beta[r];
                    let e1 = fam.evaluate(eta1)?;
                    let e0 = fam.evaluate(eta0)?;
                    delta[r][k] = e1.f - e0.f;
                    d_eta[r][k] = e1.df - e0.df;
                    d2_eta[r][k] = e1.d2f - e0.d2f;
                    for c in 0..j {
                        block[r * j + c] = (e1.df - e0.df) * p.col(c)[k];
                    }
                    // the own-coordinate moves only the x_j = 1 counterfactual
                    block[r * j + r] = e1.df;
                }
            }
        }
    }
    Ok(PartialEffects {
        delta,
        d_eta,
        d2_eta,
        d_beta,
        kinds: p.kinds().to_vec(),
    })
}

/// Average partial effects: the mean over observed cells.
pub fn ape(pe: &PartialEffects) -> Vec<f64> {
    let n = pe.n_obs() as f64;
    pe.delta
        .iter()
        .map(|col| col.iter().sum::<f64>() / n)
        .collect()
}

/// Plug-in APE of a fit.
pub fn plugin_ape(fr: &FitResult, p: &PanelData, fam: &Family) -> Result<Vec<f64>> {
    Ok(ape(&partial_effects(&fr.eta, &fr.beta, p, fam)?))
}

fn h_d2f_at(state: &FitResult, fam: &Family) -> Result<Vec<f64>> {
    if !fam.is_binary() {
        return Ok(vec![0.0; state.eta.len()]);
    }
    state
        .eta
        .iter()
        .map(|&e| {
            let ev = fam.evaluate(e)?;
            Ok(ev.df / (ev.f * (1.0 - ev.f)) * ev.d2f)
        })
        .collect()
}

/// Ψ = ∂_η Δ / ω per regressor, with its centered and projected versions.
/// One centering call per column yields both `MΨ` and `PΨ = Ψ - MΨ`.
type ColumnPair = (Vec<Vec<f64>>, Vec<Vec<f64>>);

fn psi_projections(
    state: &FitResult,
    pe: &PartialEffects,
    p: &PanelData,
    cfg: &FitConfig,
) -> Result<ColumnPair> {
    let ws = CenteringWorkspace::new(p, state.weights.clone())?
        .with_tolerance(cfg.centering_tol, cfg.centering_max_sweeps);
    let psi: Vec<Vec<f64>> = pe
        .d_eta
        .iter()
        .map(|col| col.iter().zip(&state.weights).map(|(d, w)| d / w).collect())
        .collect();
    let mpsi = ws.center_columns(&psi)?;
    let ppsi: Vec<Vec<f64>> = psi
        .iter()
        .zip(&mpsi)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    Ok((mpsi, ppsi))
}

/// Analytical APE bias correction at a bias-corrected state.
///
/// `state` must be the re-profiled estimator state at the corrected β̃ (see
/// [`feglm::refit_state`]) and `pe` the partial effects evaluated there.
/// Returns the corrected average effects `δ̃ = δ̌ - (B + C)/n`.
pub fn ape_abc(
    state: &FitResult,
    pe: &PartialEffects,
    p: &PanelData,
    fam: &Family,
    l: usize,
    cfg: &FitConfig,
) -> Result<Vec<f64>> {
    let j = pe.n_reg();
    let n = pe.n_obs();
    if l > 0 {
        let min_span = p.min_span();
        if min_span <= l {
            return Err(Error::BandwidthTooLarge { l, min_span });
        }
    }
    let hd2 = h_d2f_at(state, fam)?;
    let (mpsi, ppsi) = psi_projections(state, pe, p, cfg)?;
    let cal = p.cal_time();

    let indiv = p.factor(Factor::Indiv);
    let mut b = vec![0.0; j];
    let mut num = vec![0.0; j];
    for g in 0..indiv.group_count {
        let obs = indiv.group(g);
        let t_i = obs.len();
        num.fill(0.0);
        let mut wsum = 0.0;
        for &k in obs {
            let k = k as usize;
            wsum += state.weights[k];
            for jj in 0..j {
                num[jj] += -hd2[k] * ppsi[jj][k] + pe.d2_eta[jj][k];
            }
        }
        for lag in 1..=l {
            let fac = 2.0 * t_i as f64 / (t_i - lag) as f64;
            let mut a = 0usize;
            for &kb in obs {
                let kb = kb as usize;
                let target = cal[kb] - lag as i64;
                while a < t_i && cal[obs[a] as usize] < target {
                    a += 1;
                }
                if a < t_i && cal[obs[a] as usize] == target {
                    let ka = obs[a] as usize;
                    let s = fac * state.score_resid[ka] * state.weights[kb];
                    for jj in 0..j {
                        num[jj] += s * mpsi[jj][kb];
                    }
                }
            }
        }
        for (bj, nj) in b.iter_mut().zip(&num) {
            *bj += 0.5 * nj / wsum;
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
            wsum += state.weights[k];
            for jj in 0..j {
                num[jj] += -hd2[k] * ppsi[jj][k] + pe.d2_eta[jj][k];
            }
        }
        for (cj, nj) in c.iter_mut().zip(&num) {
            *cj += 0.5 * nj / wsum;
        }
    }

    let delta_check = ape(pe);
    Ok((0..j)
        .map(|jj| delta_check[jj] - (b[jj] + c[jj]) / n as f64)
        .collect())
}

/// Influence terms Γ per observation (column-major J rows).
fn gamma_terms(
    state: &FitResult,
    pe: &PartialEffects,
    p: &PanelData,
    cfg: &FitConfig,
) -> Result<Vec<Vec<f64>>> {
    let j = pe.n_reg();
    let n = pe.n_obs();
    let (_, ppsi) = psi_projections(state, pe, p, cfg)?;
    let winv = state.hessian_cholesky()?.inverse();

    // Σ_k [ ∂_β Δ_k - ∂_η Δ_k (PX)_k' ], a J×J matrix
    let mut dsum = vec![0.0; j * j];
    for k in 0..n {
        let block = &pe.d_beta[k * j * j..(k + 1) * j * j];
        for r in 0..j {
            for c in 0..j {
                let px_c = p.col(c)[k] - state.mx_x[c][k];
                dsum[r * j + c] += block[r * j + c] - pe.d_eta[r][k] * px_c;
            }
        }
    }
    // A = dsum' W⁻¹
    let mut a = vec![0.0; j * j];
    for r in 0..j {
        for c in 0..j {
            let mut s = 0.0;
            for m in 0..j {
                s += dsum[m * j + r] * winv[m * j + c];
            }
            a[r * j + c] = s;
        }
    }

    let mut gamma = vec![vec![0.0; n]; j];
    for k in 0..n {
        let wnu = state.weights[k] * state.nu[k];
        for r in 0..j {
            let mut s = 0.0;
            for c in 0..j {
                s += a[r * j + c] * state.mx_x[c][k];
            }
            gamma[r][k] = s * wnu - ppsi[r][k] * state.score_resid[k];
        }
    }
    Ok(gamma)
}

fn symmetrize(m: &mut [f64], j: usize) {
    for r in 0..j {
        for c in 0..r {
            let v = 0.5 * (m[r * j + c] + m[c * j + r]);
            m[r * j + c] = v;
            m[c * j + r] = v;
        }
    }
}

/// Shared machinery for both covariance estimators. `simplified` selects the
/// per-individual form that additionally includes cross-sectional products of
/// centered effects at common periods; `strictly_exogenous` drops the
/// cross term between effect variation and estimation noise.
fn ape_cov_impl(
    pe: &PartialEffects,
    state: &FitResult,
    p: &PanelData,
    cfg: &FitConfig,
    simplified: bool,
    strictly_exogenous: bool,
) -> Result<Vec<f64>> {
    let j = pe.n_reg();
    let n = pe.n_obs();
    let gamma = gamma_terms(state, pe, p, cfg)?;
    let delta_bar: Vec<Vec<f64>> = {
        let means = ape(pe);
        pe.delta
            .iter()
            .zip(&means)
            .map(|(col, m)| col.iter().map(|d| d - m).collect())
            .collect()
    };

    let mut v = vec![0.0; j * j];
    let indiv = p.factor(Factor::Indiv);

    if simplified {
        // Σ_i R_i R_i' with R_i the per-individual sum of centered effects
        for g in 0..indiv.group_count {
            let obs = indiv.group(g);
            let mut r_i = vec![0.0; j];
            for &k in obs {
                for (rj, col) in r_i.iter_mut().zip(&delta_bar) {
                    *rj += col[k as usize];
                }
            }
            for r in 0..j {
                for c in 0..j {
                    v[r * j + c] += r_i[r] * r_i[c];
                }
            }
        }
        // cross-sectional products at common periods: Σ_t [S_t S_t' - Σ_i δ̄δ̄']
        let time = p.factor(Factor::Time);
        for g in 0..time.group_count {
            let obs = time.group(g);
            let mut s_t = vec![0.0; j];
            for &k in obs {
                let k = k as usize;
                for (sj, col) in s_t.iter_mut().zip(&delta_bar) {
                    *sj += col[k];
                }
            }
            for r in 0..j {
                for c in 0..j {
                    v[r * j + c] += s_t[r] * s_t[c];
                }
            }
            for &k in obs {
                let k = k as usize;
                for r in 0..j {
                    for c in 0..j {
                        v[r * j + c] -= delta_bar[r][k] * delta_bar[c][k];
                    }
                }
            }
        }
    } else {
        // outer product of the total centered-effect sum (identically ~0)
        let total: Vec<f64> = delta_bar.iter().map(|col| col.iter().sum()).collect();
        for r in 0..j {
            for c in 0..j {
                v[r * j + c] += total[r] * total[c];
            }
        }
    }

    // Σ Γ Γ'
    for r in 0..j {
        for c in 0..j {
            let s: f64 = gamma[r].iter().zip(&gamma[c]).map(|(a, b)| a * b).sum();
            v[r * j + c] += s;
        }
    }

    // 2 Σ_i Σ_{s>t} δ̄_it Γ_is' via per-individual suffix sums, symmetrized
    if !strictly_exogenous {
        let mut cross = vec![0.0; j * j];
        let mut suffix = vec![0.0; j];
        for g in 0..indiv.group_count {
            let obs = indiv.group(g);
            suffix.fill(0.0);
            for &k in obs.iter().rev() {
                let k = k as usize;
                for r in 0..j {
                    for c in 0..j {
                        cross[r * j + c] += 2.0 * delta_bar[r][k] * suffix[c];
                    }
                }
                for (sj, col) in suffix.iter_mut().zip(&gamma) {
                    *sj += col[k];
                }
            }
        }
        symmetrize(&mut cross, j);
        for (vi, ci) in v.iter_mut().zip(&cross) {
            *vi += ci;
        }
    }

    let scale = (n as f64) * (n as f64);
    for vi in v.iter_mut() {
        *vi /= scale;
    }
    symmetrize(&mut v, j);
    Ok(v)
}

/// Simplified asymptotic covariance of the APEs (independent heterogeneity),
/// scaled so that standard errors are the square roots of the diagonal.
pub fn ape_cov_simplified(
    pe: &PartialEffects,
    state: &FitResult,
    p: &PanelData,
    cfg: &FitConfig,
    strictly_exogenous: bool,
) -> Result<Vec<f64>> {
    ape_cov_impl(pe, state, p, cfg, true, strictly_exogenous)
}

/// Full asymptotic covariance of the APEs.
pub fn ape_cov_full(
    pe: &PartialEffects,
    state: &FitResult,
    p: &PanelData,
    cfg: &FitConfig,
    strictly_exogenous: bool,
) -> Result<Vec<f64>> {
    ape_cov_impl(pe, state, p, cfg, false, strictly_exogenous)
}

/// Jackknife-corrected APEs from a full fit and its sub-panel fits.
pub fn ape_spj_from_subfits(
    full_ape: &[f64],
    subs: &[crate::bias::SubFit],
    fam: &Family,
    variant: SpjVariant,
) -> Result<Vec<f64>> {
    let sub_apes: Vec<Vec<f64>> = subs
        .iter()
        .map(|s| plugin_ape(&s.fit, &s.panel, fam))
        .collect::<Result<_>>()?;
    Ok(crate::bias::jackknife_combine(full_ape, &sub_apes, variant))
}

/// Jackknife APE correction from scratch: full pipeline plus sub-panel fits.
pub fn ape_spj(
    p: &PanelData,
    fam: &Family,
    cfg: &crate::bias::BcConfig,
    variant: SpjVariant,
) -> Result<Vec<f64>> {
    let (pruned, fr) = feglm::prune_and_fit(p, fam, &cfg.fit)?;
    let full = plugin_ape(&fr, &pruned, fam)?;
    let subs = crate::bias::spj_subfits(&pruned, fam, &cfg.fit, variant)?;
    ape_spj_from_subfits(&full, &subs, fam, variant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{build_panel, Key, Row};
    use rand::{Rng, SeedableRng};

    fn mixed_panel(n: i64, t: i64, seed: u64) -> PanelData {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for i in 0..n {
            for tt in 0..t {
                let x = rng.gen_range(-1.0..1.0);
                let d = if rng.gen_bool(0.5) { 1.0 } else { 0.0 };
                let y = if 0.7 * x + 0.5 * d + rng.gen_range(-1.5..1.5) > 0.0 {
                    1.0
                } else {
                    0.0
                };
                rows.push(Row {
                    indiv: Key::Int(i),
                    time: tt,
                    y,
                    x: vec![x, d],
                });
            }
        }
        build_panel(
            rows,
            vec!["x".into(), "d".into()],
            vec![RegressorKind::Continuous, RegressorKind::Binary],
        )
        .unwrap()
        .0
    }

    #[test]
    fn logit_continuous_effect_at_zero() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let rows: Vec<Row> = (0..4)
            .flat_map(|i| {
                let r = &mut rng;
                (0..3)
                    .map(|t| Row {
                        indiv: Key::Int(i),
                        time: t,
                        y: if r.gen_bool(0.5) { 1.0 } else { 0.0 },
                        x: vec![r.gen_range(-1.0..1.0)],
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let (p, _) = build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous]).unwrap();
        let eta = vec![0.0; p.n_obs()];
        let pe = partial_effects(&eta, &[1.0], &p, &Family::logit()).unwrap();
        for k in 0..p.n_obs() {
            assert!((pe.delta[0][k] - 0.25).abs() < 1e-14);
            assert!(pe.d_eta[0][k].abs() < 1e-14);
            assert!((pe.d2_eta[0][k] + 0.125).abs() < 1e-14);
        }
    }

    #[test]
    fn binary_effect_vanishes_at_zero_coefficient() {
        let p = mixed_panel(4, 3, 5);
        let eta: Vec<f64> = (0..p.n_obs()).map(|k| 0.1 * k as f64 - 0.5).collect();
        let pe = partial_effects(&eta, &[0.8, 0.0], &p, &Family::probit()).unwrap();
        assert!(pe.delta[1].iter().all(|d| d.abs() < 1e-15));
    }

    /// Central finite differences in η and β reproduce every derivative field.
    #[test]
    fn derivative_fields_match_finite_differences() {
        let p = mixed_panel(5, 4, 9);
        let fam = Family::probit();
        let beta = vec![0.7, -0.4];
        let eta: Vec<f64> = (0..p.n_obs()).map(|k| 0.07 * k as f64 - 0.9).collect();
        let pe = partial_effects(&eta, &beta, &p, &fam).unwrap();
        let h = 1e-5;
        let j = 2;

        // η-derivatives: shift the whole linear predictor
        let shift = |d: f64| -> Vec<f64> { eta.iter().map(|e| e + d).collect() };
        let pe_p = partial_effects(&shift(h), &beta, &p, &fam).unwrap();
        let pe_m = partial_effects(&shift(-h), &beta, &p, &fam).unwrap();
        for r in 0..j {
            for k in 0..p.n_obs() {
                let fd1 = (pe_p.delta[r][k] - pe_m.delta[r][k]) / (2.0 * h);
                assert!((pe.d_eta[r][k] - fd1).abs() < 1e-5 * (1.0 + fd1.abs()));
                let fd2 = (pe_p.delta[r][k] - 2.0 * pe.delta[r][k] + pe_m.delta[r][k]) / (h * h);
                assert!((pe.d2_eta[r][k] - fd2).abs() < 1e-3 * (1.0 + fd2.abs()));
            }
        }

        // β-derivatives: perturb β_c and move η along the c-th column
        for c in 0..j {
            let mut bp = beta.clone();
            bp[c] += h;
            let mut bm = beta.clone();
            bm[c] -= h;
            let etap: Vec<f64> = eta.iter().zip(p.col(c)).map(|(e, x)| e + h * x).collect();
            let etam: Vec<f64> = eta.iter().zip(p.col(c)).map(|(e, x)| e - h * x).collect();
            let pp = partial_effects(&etap, &bp, &p, &fam).unwrap();
            let pm = partial_effects(&etam, &bm, &p, &fam).unwrap();
            for r in 0..j {
                for k in 0..p.n_obs() {
                    let fd = (pp.delta[r][k] - pm.delta[r][k]) / (2.0 * h);
                    let got = pe.d_beta[k * j * j + r * j + c];
                    assert!(
                        (got - fd).abs() < 1e-5 * (1.0 + fd.abs()),
                        "dΔ_{r}/dβ_{c} at {k}: {got} vs {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn gaussian_continuous_ape_is_the_coefficient_and_needs_no_correction() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let rows: Vec<Row> = (0..6)
            .flat_map(|i| {
                let r = &mut rng;
                (0..5)
                    .map(|t| {
                        let x = r.gen_range(-1.0..1.0);
                        Row {
                            indiv: Key::Int(i),
                            time: t,
                            y: 0.6 * x + r.gen_range(-0.3..0.3),
                            x: vec![x],
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let (p, _) = build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous]).unwrap();
        let fam = Family::gaussian();
        let cfg = FitConfig::default();
        let fr = feglm::fit(&p, &fam, &cfg).unwrap();
        let pe = partial_effects(&fr.eta, &fr.beta, &p, &fam).unwrap();
        let d = ape(&pe);
        assert!((d[0] - fr.beta[0]).abs() < 1e-12);
        let corrected = ape_abc(&fr, &pe, &p, &fam, 1, &cfg).unwrap();
        assert!((corrected[0] - d[0]).abs() < 1e-12);
    }

    #[test]
    fn perfect_linear_fit_gives_zero_covariance() {
        // y exactly additive in x and the two effects: residuals vanish and
        // the continuous effect is constant, so both estimators return zero
        let mut rng = rand::rngs::StdRng::seed_from_u64(13);
        let alphas: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let gammas: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut rows = Vec::new();
        for i in 0..5i64 {
            for t in 0..4i64 {
                let x = rng.gen_range(-1.0..1.0);
                rows.push(Row {
                    indiv: Key::Int(i),
                    time: t,
                    y: 0.8 * x + alphas[i as usize] + gammas[t as usize],
                    x: vec![x],
                });
            }
        }
        let (p, _) = build_panel(rows, vec!["x".into()], vec![RegressorKind::Continuous]).unwrap();
        let fam = Family::gaussian();
        let cfg = FitConfig::default().with_centering_tol(1e-13);
        let fr = feglm::fit(&p, &fam, &cfg).unwrap();
        let pe = partial_effects(&fr.eta, &fr.beta, &p, &fam).unwrap();
        for cov in [
            ape_cov_simplified(&pe, &fr, &p, &cfg, false).unwrap(),
            ape_cov_full(&pe, &fr, &p, &cfg, false).unwrap(),
        ] {
            assert!(cov.iter().all(|v| v.abs() < 1e-12), "{cov:?}");
        }
    }

    #[test]
    fn covariances_are_symmetric_and_positive_on_the_diagonal() {
        let p = mixed_panel(10, 6, 21);
        let fam = Family::logit();
        let cfg = FitConfig::default();
        let (pruned, fr) = feglm::prune_and_fit(&p, &fam, &cfg).unwrap();
        let pe = partial_effects(&fr.eta, &fr.beta, &pruned, &fam).unwrap();
        let v = ape_cov_simplified(&pe, &fr, &pruned, &cfg, false).unwrap();
        assert!((v[1] - v[2]).abs() < 1e-14);
        assert!(v[0] > 0.0 && v[3] > 0.0);
        // the strictly exogenous toggle only removes the cross term
        let v_exo = ape_cov_simplified(&pe, &fr, &pruned, &cfg, true).unwrap();
        assert!(v_exo.iter().zip(&v).any(|(a, b)| a != b));
    }

    #[test]
    fn continuous_ape_shares_the_sign_of_the_coefficient() {
        for seed in [2u64, 8, 19] {
            let p = mixed_panel(8, 5, seed);
            let fam = Family::logit();
            let (pruned, fr) = feglm::prune_and_fit(&p, &fam, &FitConfig::default()).unwrap();
            let d = plugin_ape(&fr, &pruned, &fam).unwrap();
            assert!(d[0] * fr.beta[0] >= 0.0);
        }
    }

    #[test]
    fn stubbed_subpanel_apes_give_zero_correction() {
        let full = vec![0.25, -0.1];
        let subs = vec![full.clone(); 4];
        let out = crate::bias::jackknife_combine(&full, &subs, SpjVariant::Spj1);
        for (a, b) in out.iter().zip(&full) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
