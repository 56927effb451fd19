//! Weighted within transformation for the two-way error component via the
//! method of alternating projections (von Neumann / Halperin).
//!
//! A sweep subtracts weighted group means for the individual factor and then
//! for the time factor; sweeps repeat until the iterate stops moving. The
//! limit approximates `M v`, the residual projection that removes both fixed
//! effects under the working weights, using only scalar group reductions —
//! the projection matrix is never formed.

use crate::error::{Error, Result};
use crate::panel::{Factor, PanelData};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_SWEEPS: usize = 100_000;

/// Precomputed group structure and weight sums shared by every centering call
/// within one Fisher-scoring iteration (the same weights serve the working
/// residual and all regressor columns).
#[derive(Debug, Clone)]
pub struct CenteringWorkspace {
    group_of: [Vec<u32>; 2],
    wsum: [Vec<f64>; 2],
    weights: Vec<f64>,
    /// Relative sup-norm threshold on the per-sweep iterate change.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl CenteringWorkspace {
    pub fn new(panel: &PanelData, weights: Vec<f64>) -> Result<Self> {
        let indiv = panel.factor(Factor::Indiv);
        let time = panel.factor(Factor::Time);
        Self::from_groups(
            indiv.group_of.clone(),
            indiv.group_count,
            time.group_of.clone(),
            time.group_count,
            weights,
        )
    }

    /// Build from raw per-observation group indices (dense in `0..count`).
    pub fn from_groups(
        indiv_of: Vec<u32>,
        n_indiv: usize,
        time_of: Vec<u32>,
        n_time: usize,
        weights: Vec<f64>,
    ) -> Result<Self> {
        assert_eq!(indiv_of.len(), weights.len());
        assert_eq!(time_of.len(), weights.len());
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Data(
                "centering weights must be finite and non-negative".into(),
            ));
        }
        let group_of = [indiv_of, time_of];
        let counts = [n_indiv, n_time];
        let mut wsum = [vec![0.0; n_indiv], vec![0.0; n_time]];
        for f in 0..2 {
            for (k, &g) in group_of[f].iter().enumerate() {
                wsum[f][g as usize] += weights[k];
            }
            for (g, &s) in wsum[f].iter().enumerate() {
                if s <= 0.0 {
                    return Err(Error::ZeroGroupWeight {
                        factor: if f == 0 { "individual" } else { "time" },
                        group: g,
                    });
                }
            }
            let _ = counts;
        }
        Ok(Self {
            group_of,
            wsum,
            weights,
            tolerance: DEFAULT_TOLERANCE,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64, max_sweeps: usize) -> Self {
        self.tolerance = tolerance;
        self.max_sweeps = max_sweeps;
        self
    }

    pub fn n_obs(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn factor_index(factor: Factor) -> usize {
        match factor {
            Factor::Indiv => 0,
            Factor::Time => 1,
        }
    }

    /// Subtract the weighted group mean of one factor:
    /// `v_it - Σ_g ω v / Σ_g ω` over the observation's group.
    pub fn center_factor(&self, v: &[f64], factor: Factor) -> Vec<f64> {
        let mut out = v.to_vec();
        let mut means = vec![0.0; self.wsum[Self::factor_index(factor)].len()];
        self.subtract_means(&mut out, Self::factor_index(factor), &mut means);
        out
    }

    /// One factor projection in place; `means` is scratch of group length and
    /// holds the subtracted group means on return.
    fn subtract_means(&self, v: &mut [f64], f: usize, means: &mut [f64]) {
        means.fill(0.0);
        let groups = &self.group_of[f];
        for (k, &g) in groups.iter().enumerate() {
            means[g as usize] += self.weights[k] * v[k];
        }
        for (m, s) in means.iter_mut().zip(&self.wsum[f]) {
            *m /= *s;
        }
        for (k, &g) in groups.iter().enumerate() {
            v[k] -= means[g as usize];
        }
    }

    /// Alternating projections in place. Returns the number of sweeps.
    pub fn center_in_place(&self, v: &mut [f64]) -> Result<usize> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data(
                "centering input contains non-finite values".into(),
            ));
        }
        let sup0 = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let threshold = self.tolerance * (1.0 + sup0);
        let mut m1 = vec![0.0; self.wsum[0].len()];
        let mut m2 = vec![0.0; self.wsum[1].len()];
        for sweep in 1..=self.max_sweeps {
            self.subtract_means(v, 0, &mut m1);
            self.subtract_means(v, 1, &mut m2);
            // exact iterate change of the full sweep
            let mut delta = 0.0f64;
            for (k, (&gi, &gt)) in self.group_of[0].iter().zip(&self.group_of[1]).enumerate() {
                let _ = k;
                delta = delta.max((m1[gi as usize] + m2[gt as usize]).abs());
            }
            if delta < threshold {
                return Ok(sweep);
            }
        }
        Err(Error::NoConvergence {
            what: "alternating-projections centering",
            limit: self.max_sweeps,
        })
    }

    /// `M v` — the two-way weighted within transformation of `v`.
    pub fn center(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = v.to_vec();
        self.center_in_place(&mut out)?;
        Ok(out)
    }

    /// Columnwise centering; columns are independent.
    pub fn center_columns(&self, cols: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        cols.iter().map(|c| self.center(c)).collect()
    }
}
