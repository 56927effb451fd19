//! Binary-choice distribution functions and their first three derivatives in
//! the linear predictor, plus the identity/Gaussian family for the linear
//! model.
//!
//! Everything downstream (Fisher scoring, bias terms, partial effects) is
//! driven by the four values `(F, ∂F, ∂²F, ∂³F)` at a given linear predictor
//! and by the working quantities derived from them:
//!
//! ```text
//! H = ∂F / (F (1 - F))      ω = H ∂F      ∂l = H (y - F)      ν = (y - F) / ∂F
//! ```

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SQRT_2PI: f64 = 2.5066282746310002;

/// Standard normal density φ(x).
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal CDF Φ(x), accurate to full double precision via erfc.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile Φ⁻¹(p).
///
/// Rational approximation (Wichura's algorithm) polished with one Newton step
/// against [`norm_cdf`], which pins the absolute error near machine epsilon.
pub fn norm_ppf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "norm_ppf requires p in (0,1), got {p}");
    let q = p - 0.5;
    let x = if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        q * (((((((2.509_080_928_730_123e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            / (((((((5.226_495_278_852_546e3 * r + 2.872_908_573_572_194_3e4) * r
                + 3.930_789_580_009_271e4)
                * r
                + 2.121_379_430_158_659_7e4)
                * r
                + 5.394_196_021_424_751e3)
                * r
                + 6.871_870_074_920_579e2)
                * r
                + 4.231_333_070_160_091e1)
                * r
                + 1.0)
    } else {
        let mut r = if q < 0.0 { p } else { 1.0 - p };
        r = (-r.ln()).sqrt();
        let z = if r <= 5.0 {
            let r = r - 1.6;
            (((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
                + 2.417_807_251_774_506e-1)
                * r
                + 1.270_458_252_452_368_4)
                * r
                + 3.647_848_324_763_204_5)
                * r
                + 5.769_497_221_460_691)
                * r
                + 4.630_337_846_156_546)
                * r
                + 1.423_437_110_749_683_5)
                / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                    + 1.519_866_656_361_645_7e-2)
                    * r
                    + 1.481_039_764_274_800_8e-1)
                    * r
                    + 6.897_673_349_851e-1)
                    * r
                    + 1.676_384_830_183_803_8)
                    * r
                    + 2.053_191_626_637_759)
                    * r
                    + 1.0)
        } else {
            let r = r - 5.0;
            (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
                + 1.242_660_947_388_078_4e-3)
                * r
                + 2.653_218_952_657_612_4e-2)
                * r
                + 2.965_605_718_285_048_7e-1)
                * r
                + 1.784_826_539_917_291_3)
                * r
                + 5.463_784_911_164_114)
                * r
                + 6.657_904_643_501_103)
                / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                    + 1.846_318_317_510_054_8e-5)
                    * r
                    + 7.868_691_311_456_133e-4)
                    * r
                    + 1.487_536_129_085_061_5e-2)
                    * r
                    + 1.369_298_809_227_358e-1)
                    * r
                    + 5.998_322_065_558_88e-1)
                    * r
                    + 1.0)
        };
        if q < 0.0 {
            -z
        } else {
            z
        }
    };
    // Newton polish: x <- x - (Φ(x) - p)/φ(x)
    let pdf = norm_pdf(x);
    if pdf > 1e-300 {
        x - (norm_cdf(x) - p) / pdf
    } else {
        x
    }
}

/// Which distribution drives the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Logit,
    Probit,
    Cloglog,
    /// Identity link with Gaussian errors; turns the estimator into the
    /// two-way within OLS used by the linear probability model.
    GaussianIdentity,
}

/// The four distribution values at a linear predictor.
#[derive(Debug, Clone, Copy)]
pub struct FamilyEval {
    /// F(η), clamped into `[eps, 1-eps]` for binary kinds.
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
    pub d3f: f64,
}

/// Per-observation working quantities for one Fisher-scoring step.
#[derive(Debug, Clone, Copy)]
pub struct Working {
    /// Score in the linear predictor, `∂l = H (y - F)`.
    pub score: f64,
    /// Working weight `ω = H ∂F`.
    pub weight: f64,
    pub h: f64,
    /// Working residual `ν = (y - F) / ∂F`.
    pub nu: f64,
}

/// A binary-choice (or Gaussian-identity) family with its probability clamp.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Family {
    pub kind: FamilyKind,
    /// Probability floor applied to F before it enters any ratio. Keeps the
    /// probit H finite in the tails without materially moving the optimum.
    pub clamp_eps: f64,
}

impl Family {
    pub fn new(kind: FamilyKind) -> Self {
        Self {
            kind,
            clamp_eps: 1e-10,
        }
    }

    pub fn logit() -> Self {
        Self::new(FamilyKind::Logit)
    }
    pub fn probit() -> Self {
        Self::new(FamilyKind::Probit)
    }
    pub fn cloglog() -> Self {
        Self::new(FamilyKind::Cloglog)
    }
    pub fn gaussian() -> Self {
        Self::new(FamilyKind::GaussianIdentity)
    }

    pub fn is_binary(&self) -> bool {
        !matches!(self.kind, FamilyKind::GaussianIdentity)
    }

    /// F and its first three derivatives at `eta`.
    pub fn evaluate(&self, eta: f64) -> Result<FamilyEval> {
        if !eta.is_finite() {
            return Err(Error::NonFiniteEta);
        }
        let eps = self.clamp_eps;
        let ev = match self.kind {
            FamilyKind::Logit => {
                let f = if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                };
                let df = f * (1.0 - f);
                let d2f = df * (1.0 - 2.0 * f);
                let d3f = df * ((1.0 - 2.0 * f).powi(2) - 2.0 * df);
                FamilyEval {
                    f: f.clamp(eps, 1.0 - eps),
                    df,
                    d2f,
                    d3f,
                }
            }
            FamilyKind::Probit => {
                let f = norm_cdf(eta);
                let df = norm_pdf(eta);
                FamilyEval {
                    f: f.clamp(eps, 1.0 - eps),
                    df,
                    d2f: -eta * df,
                    d3f: (eta * eta - 1.0) * df,
                }
            }
            FamilyKind::Cloglog => {
                let u = eta.exp();
                let f = -(-u).exp_m1(); // 1 - exp(-exp(eta))
                let df = (eta - u).exp();
                let d2f = df * (1.0 - u);
                let d3f = df * (1.0 - 3.0 * u + u * u);
                FamilyEval {
                    f: f.clamp(eps, 1.0 - eps),
                    df,
                    d2f,
                    d3f,
                }
            }
            FamilyKind::GaussianIdentity => FamilyEval {
                f: eta,
                df: 1.0,
                d2f: 0.0,
                d3f: 0.0,
            },
        };
        Ok(ev)
    }

    /// Score, weight, H, and working residual at `(eta, y)`.
    pub fn working(&self, eta: f64, y: f64) -> Result<Working> {
        if let FamilyKind::GaussianIdentity = self.kind {
            let r = y - eta;
            return Ok(Working {
                score: r,
                weight: 1.0,
                h: 1.0,
                nu: r,
            });
        }
        let ev = self.evaluate(eta)?;
        let h = ev.df / (ev.f * (1.0 - ev.f));
        let weight = h * ev.df;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::DegenerateWeight { eta });
        }
        Ok(Working {
            score: h * (y - ev.f),
            weight,
            h,
            nu: (y - ev.f) / ev.df,
        })
    }

    /// Log-likelihood contribution of one observation. For the Gaussian
    /// identity family this is the least-squares kernel `-(y-η)²/2`, which is
    /// monotone-equivalent for step control and convergence checks.
    pub fn loglik(&self, eta: f64, y: f64) -> f64 {
        match self.kind {
            FamilyKind::GaussianIdentity => {
                let r = y - eta;
                -0.5 * r * r
            }
            _ => {
                let eps = self.clamp_eps;
                let f = match self.kind {
                    FamilyKind::Logit => {
                        if eta >= 0.0 {
                            1.0 / (1.0 + (-eta).exp())
                        } else {
                            let e = eta.exp();
                            e / (1.0 + e)
                        }
                    }
                    FamilyKind::Probit => norm_cdf(eta),
                    FamilyKind::Cloglog => -(-eta.exp()).exp_m1(),
                    FamilyKind::GaussianIdentity => unreachable!(),
                }
                .clamp(eps, 1.0 - eps);
                if y > 0.5 {
                    f.ln()
                } else {
                    (1.0 - f).ln()
                }
            }
        }
    }

    /// Inverse link F⁻¹(p), used to initialize the linear predictor.
    pub fn link(&self, p: f64) -> f64 {
        match self.kind {
            FamilyKind::Logit => (p / (1.0 - p)).ln(),
            FamilyKind::Probit => norm_ppf(p),
            FamilyKind::Cloglog => (-(1.0 - p).ln()).ln(),
            FamilyKind::GaussianIdentity => p,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            FamilyKind::Logit => "logit",
            FamilyKind::Probit => "probit",
            FamilyKind::Cloglog => "cloglog",
            FamilyKind::GaussianIdentity => "gaussian-identity",
        }
    }
}
