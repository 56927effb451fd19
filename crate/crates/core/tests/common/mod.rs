//! Dense linear-algebra oracles for the concentrated estimator.
#![allow(dead_code)] // each test target uses its own subset of the oracles
//!
//! Everything here materializes the dummy matrix D and works through
//! pseudo-inverses, deliberately avoiding the alternating-projections and
//! concentration machinery under test.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::Rng;
use twofe::family::Family;
use twofe::panel::{build_panel, Factor, Key, PanelData, RegressorKind, Row};

/// Dummy design for both factors, one column per group.
pub fn dummy_matrix(p: &PanelData) -> DMatrix<f64> {
    let n = p.n_obs();
    let ni = p.n_indiv();
    let nt = p.n_time();
    let mut d = DMatrix::zeros(n, ni + nt);
    for k in 0..n {
        d[(k, p.factor(Factor::Indiv).group_of[k] as usize)] = 1.0;
        d[(k, ni + p.factor(Factor::Time).group_of[k] as usize)] = 1.0;
    }
    d
}

/// Dense weighted residual projection `M v = v - D (D'ΩD)⁺ D'Ω v`.
pub fn dense_center(p: &PanelData, weights: &[f64], v: &[f64]) -> Vec<f64> {
    let d = dummy_matrix(p);
    let omega = DMatrix::from_diagonal(&DVector::from_row_slice(weights));
    let dtd = d.transpose() * &omega * &d;
    let pinv = dtd.pseudo_inverse(1e-12).expect("svd");
    let vv = DVector::from_row_slice(v);
    let fitted = &d * (pinv * (d.transpose() * (&omega * &vv)));
    (&vv - fitted).iter().copied().collect()
}

fn total_loglik(fam: &Family, eta: &DVector<f64>, y: &[f64]) -> f64 {
    eta.iter().zip(y).map(|(&e, &yy)| fam.loglik(e, yy)).sum()
}

/// Full dummy-encoded Newton over (β, α, γ), pseudo-inverse handling the
/// collinear intercept direction. Returns `None` when the sample separates or
/// the iteration fails — callers skip such draws.
pub fn dense_fit(p: &PanelData, fam: &Family) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = p.n_obs();
    let j = p.n_reg();
    let d = dummy_matrix(p);
    let cols = j + d.ncols();
    let mut z = DMatrix::zeros(n, cols);
    for c in 0..j {
        for k in 0..n {
            z[(k, c)] = p.col(c)[k];
        }
    }
    z.view_mut((0, j), (n, d.ncols())).copy_from(&d);

    let y = p.outcome();
    let mut theta = DVector::zeros(cols);
    let mut eta = DVector::zeros(n);
    let mut ll = total_loglik(fam, &eta, y);
    for _ in 0..300 {
        let mut score = DVector::zeros(n);
        let mut w = DVector::zeros(n);
        for k in 0..n {
            let wq = fam.working(eta[k], y[k]).ok()?;
            score[k] = wq.score;
            w[k] = wq.weight;
        }
        let g = z.transpose() * &score;
        if g.amax() < 1e-10 {
            return Some((
                theta.iter().take(j).copied().collect(),
                eta.iter().copied().collect(),
            ));
        }
        let omega = DMatrix::from_diagonal(&w);
        let h = z.transpose() * &omega * &z;
        let step = h.pseudo_inverse(1e-12).ok()? * &g;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let theta_try = &theta + scale * &step;
            let eta_try = &z * &theta_try;
            let ll_try = total_loglik(fam, &eta_try, y);
            if ll_try.is_finite() && ll_try >= ll {
                theta = theta_try;
                eta = eta_try;
                ll = ll_try;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted || theta.iter().take(j).any(|b| b.abs() > 30.0) {
            return None;
        }
    }
    None
}

/// Dense Newton over the fixed effects only, with β held fixed.
pub fn dense_offset(p: &PanelData, fam: &Family, beta: &[f64]) -> Option<Vec<f64>> {
    let n = p.n_obs();
    let d = dummy_matrix(p);
    let y = p.outcome();
    let mut xb = DVector::zeros(n);
    for (c, b) in beta.iter().enumerate() {
        for k in 0..n {
            xb[k] += p.col(c)[k] * b;
        }
    }
    let mut phi = DVector::zeros(d.ncols());
    let mut eta = xb.clone();
    let mut ll = total_loglik(fam, &eta, y);
    for _ in 0..300 {
        let mut score = DVector::zeros(n);
        let mut w = DVector::zeros(n);
        for k in 0..n {
            let wq = fam.working(eta[k], y[k]).ok()?;
            score[k] = wq.score;
            w[k] = wq.weight;
        }
        let g = d.transpose() * &score;
        if g.amax() < 1e-10 {
            return Some(eta.iter().copied().collect());
        }
        let omega = DMatrix::from_diagonal(&w);
        let h = d.transpose() * &omega * &d;
        let step = h.pseudo_inverse(1e-12).ok()? * &g;
        let mut accepted = false;
        let mut scale = 1.0;
        for _ in 0..40 {
            let phi_try = &phi + scale * &step;
            let eta_try = &xb + &d * &phi_try;
            let ll_try = total_loglik(fam, &eta_try, y);
            if ll_try.is_finite() && ll_try >= ll {
                phi = phi_try;
                eta = eta_try;
                ll = ll_try;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

/// The (β,β) block of the dense full Hessian after partialling out the
/// fixed-effect block (Schur complement).
pub fn dense_concentrated_hessian(p: &PanelData, fam: &Family, eta: &[f64]) -> Vec<f64> {
    let n = p.n_obs();
    let j = p.n_reg();
    let d = dummy_matrix(p);
    let mut w = DVector::zeros(n);
    for k in 0..n {
        let wq = fam.working(eta[k], p.outcome()[k]).unwrap();
        w[k] = wq.weight;
    }
    let omega = DMatrix::from_diagonal(&w);
    let mut x = DMatrix::zeros(n, j);
    for c in 0..j {
        for k in 0..n {
            x[(k, c)] = p.col(c)[k];
        }
    }
    let hbb = x.transpose() * &omega * &x;
    let hbp = x.transpose() * &omega * &d;
    let hpp = d.transpose() * &omega * &d;
    let schur = &hbb - &hbp * hpp.pseudo_inverse(1e-12).unwrap() * hbp.transpose();
    let mut out = vec![0.0; j * j];
    for r in 0..j {
        for c in 0..j {
            out[r * j + c] = schur[(r, c)];
        }
    }
    out
}

/// Random informative tiny panel: N≤8, T≤6, J≤3, with a latent two-way
/// index. `gaps` randomly removes interior cells so lag pairing sees holes.
pub fn random_tiny_panel(rng: &mut StdRng, j: usize, gaps: bool) -> PanelData {
    loop {
        let n = rng.gen_range(4..=8);
        let t = rng.gen_range(3..=6);
        let beta: Vec<f64> = (0..j).map(|_| rng.gen_range(-0.6..0.6)).collect();
        let mut rows = Vec::new();
        for i in 0..n {
            let a: f64 = rng.gen_range(-0.3..0.3);
            for tt in 0..t {
                if gaps && rng.gen_bool(0.15) {
                    continue;
                }
                let g: f64 = rng.gen_range(-0.3..0.3);
                let x: Vec<f64> = (0..j).map(|_| rng.gen_range(-1.0..1.0) + 0.3 * a).collect();
                let idx: f64 = beta.iter().zip(&x).map(|(b, xx)| b * xx).sum::<f64>() + a + g;
                let y = if idx + rng.gen_range(-2.0..2.0) > 0.0 {
                    1.0
                } else {
                    0.0
                };
                rows.push(Row {
                    indiv: Key::Int(i),
                    time: tt,
                    y,
                    x,
                });
            }
        }
        let names = (0..j).map(|c| format!("x{c}")).collect();
        let kinds = vec![RegressorKind::Continuous; j];
        match build_panel(rows, names, kinds) {
            Ok((p, _)) if p.n_indiv() >= 2 && p.n_time() >= 2 => return p,
            _ => continue,
        }
    }
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
