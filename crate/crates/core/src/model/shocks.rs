use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::numerics::{logistic_cdf, softplus};

/// Idiosyncratic work-disutility draws for the two spouses.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShockDraw {
    pub husband: f64,
    pub wife: f64,
}

impl ShockDraw {
    pub fn new(husband: f64, wife: f64) -> Result<Self> {
        if !husband.is_finite() || !wife.is_finite() {
            return Err(Error::param("shocks", "disutility draws must be finite"));
        }
        Ok(ShockDraw { husband, wife })
    }

    pub fn zero() -> Self {
        ShockDraw::default()
    }
}

/// Distribution `F` of the work disutility. All members have mean zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Disutility {
    Logistic {
        scale: f64,
    },
    Normal {
        sd: f64,
    },
    /// Point mass at zero.
    Degenerate,
}

impl Default for Disutility {
    fn default() -> Self {
        Disutility::Logistic { scale: 1.0 }
    }
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

impl Disutility {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Disutility::Logistic { scale: s } | Disutility::Normal { sd: s } => {
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::param(
                        "disutility",
                        format!("scale must be > 0, got {s}"),
                    ));
                }
                Ok(())
            }
            Disutility::Degenerate => Ok(()),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Disutility::Degenerate)
    }

    pub fn scale(&self) -> f64 {
        match *self {
            Disutility::Logistic { scale } => scale,
            Disutility::Normal { sd } => sd,
            Disutility::Degenerate => 0.0,
        }
    }

    /// `P(eps <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Disutility::Logistic { scale } => logistic_cdf(x / scale),
            Disutility::Normal { sd } => 0.5 * erfc(-x / (sd * SQRT_2)),
            Disutility::Degenerate => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Disutility::Logistic { scale } => {
                let f = logistic_cdf(x / scale);
                f * (1.0 - f) / scale
            }
            Disutility::Normal { sd } => {
                let z = x / sd;
                INV_SQRT_2PI * (-0.5 * z * z).exp() / sd
            }
            Disutility::Degenerate => 0.0,
        }
    }

    /// Partial expectation `E[max(x - eps, 0)] = ∫_{-∞}^{x} F`.
    pub fn partial_expectation(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return f64::INFINITY;
        }
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        match *self {
            Disutility::Logistic { scale } => scale * softplus(x / scale),
            Disutility::Normal { sd } => {
                let z = x / sd;
                x * 0.5 * erfc(-z / SQRT_2) + sd * INV_SQRT_2PI * (-0.5 * z * z).exp()
            }
            Disutility::Degenerate => x.max(0.0),
        }
    }

    /// `∫_{-∞}^{k} e dF(e)`; zero at both infinities.
    pub(crate) fn lower_first_moment(&self, k: f64) -> f64 {
        if k.is_infinite() {
            return 0.0;
        }
        k * self.cdf(k) - self.partial_expectation(k)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Disutility::Logistic { scale } => scale * (u / (1.0 - u)).ln(),
            Disutility::Normal { sd } => {
                // one Newton step polishes the library inverse
                let x = sd * standard_normal().inverse_cdf(u);
                let dens = self.pdf(x);
                if dens > 0.0 {
                    x - (self.cdf(x) - u) / dens
                } else {
                    x
                }
            }
            Disutility::Degenerate => 0.0,
        }
    }

    /// Window outside of which the density is negligible (< 1e-20 of the peak).
    pub(crate) fn support_window(&self) -> f64 {
        match *self {
            Disutility::Logistic { scale } => 48.0 * scale,
            Disutility::Normal { sd } => 10.0 * sd,
            Disutility::Degenerate => 0.0,
        }
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Draws spouse shock pairs, optionally correlated through a Gaussian copula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockSampler {
    pub distribution: Disutility,
    #[serde(default)]
    pub correlation: f64,
}

impl ShockSampler {
    pub fn new(distribution: Disutility, correlation: f64) -> Result<Self> {
        distribution.validate()?;
        if !(-1.0 < correlation && correlation < 1.0) {
            return Err(Error::param(
                "correlation",
                format!("must lie in (-1, 1), got {correlation}"),
            ));
        }
        Ok(ShockSampler {
            distribution,
            correlation,
        })
    }

    pub fn independent(distribution: Disutility) -> Self {
        ShockSampler {
            distribution,
            correlation: 0.0,
        }
    }

    /// Maps two independent uniforms to a shock pair. Used directly by the
    /// simulators so that factual and counterfactual arms share uniforms.
    pub fn from_uniforms(&self, u_husband: f64, u_wife: f64) -> ShockDraw {
        let u_h = clamp_open(u_husband);
        let mut u_w = clamp_open(u_wife);
        if self.correlation != 0.0 {
            let n = standard_normal();
            let z_h = n.inverse_cdf(u_h);
            let z_w = n.inverse_cdf(u_w);
            let rho = self.correlation;
            u_w = clamp_open(n.cdf(rho * z_h + (1.0 - rho * rho).sqrt() * z_w));
        }
        ShockDraw {
            husband: self.distribution.quantile(u_h),
            wife: self.distribution.quantile(u_w),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ShockDraw {
        let u_h: f64 = rng.random();
        let u_w: f64 = rng.random();
        self.from_uniforms(u_h, u_w)
    }
}

fn clamp_open(u: f64) -> f64 {
    u.clamp(1e-16, 1.0 - 1e-16)
}
