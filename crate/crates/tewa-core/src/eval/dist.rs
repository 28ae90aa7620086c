//! The distribution library: nine continuous families with validated
//! parameters and closed-form or special-function CDFs.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_lr;

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Uniform,
    Normal,
    Exponential,
    Gamma,
    Weibull,
    Lognormal,
    InverseGaussian,
    GeneralizedExtremeValue,
    Beta,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Normal => "normal",
            Family::Exponential => "exponential",
            Family::Gamma => "gamma",
            Family::Weibull => "weibull",
            Family::Lognormal => "lognormal",
            Family::InverseGaussian => "inverse_gaussian",
            Family::GeneralizedExtremeValue => "generalized_extreme_value",
            Family::Beta => "beta",
        }
    }
}

/// Every family the fitter knows, in library (tie-break) order.
pub const FAMILY_LIBRARY: [Family; 9] = [
    Family::Uniform,
    Family::Normal,
    Family::Exponential,
    Family::Gamma,
    Family::Weibull,
    Family::Lognormal,
    Family::InverseGaussian,
    Family::GeneralizedExtremeValue,
    Family::Beta,
];

/// A fully specified hypothesis distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Uniform { min: f64, max: f64 },
    Normal { mean: f64, std_dev: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Weibull { shape: f64, scale: f64 },
    Lognormal { location: f64, scale: f64 },
    InverseGaussian { mean: f64, shape: f64 },
    GeneralizedExtremeValue { location: f64, scale: f64, shape: f64 },
    Beta { alpha: f64, beta: f64 },
}

/// Standard normal CDF, accurate in both tails.
pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `ln(Phi(-z))` for large positive `z`, where `erfc` underflows.
fn ln_std_normal_sf(z: f64) -> f64 {
    if z < 10.0 {
        (0.5 * erfc(z / std::f64::consts::SQRT_2)).ln()
    } else {
        let z2 = z * z;
        -0.5 * z2 - z.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln_1p()
    }
}

impl DistributionSpec {
    pub fn family(&self) -> Family {
        match self {
            DistributionSpec::Uniform { .. } => Family::Uniform,
            DistributionSpec::Normal { .. } => Family::Normal,
            DistributionSpec::Exponential { .. } => Family::Exponential,
            DistributionSpec::Gamma { .. } => Family::Gamma,
            DistributionSpec::Weibull { .. } => Family::Weibull,
            DistributionSpec::Lognormal { .. } => Family::Lognormal,
            DistributionSpec::InverseGaussian { .. } => Family::InverseGaussian,
            DistributionSpec::GeneralizedExtremeValue { .. } => {
                Family::GeneralizedExtremeValue
            }
            DistributionSpec::Beta { .. } => Family::Beta,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |msg: String| Err(EvalError::InvalidParameters(msg));
        let positive = |name: &str, v: f64| -> Result<(), EvalError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(EvalError::InvalidParameters(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        match *self {
            DistributionSpec::Uniform { min, max } => {
                if !(min.is_finite() && max.is_finite() && min < max) {
                    return bad(format!("uniform needs min < max, got [{min}, {max}]"));
                }
            }
            DistributionSpec::Normal { mean, std_dev } => {
                if !mean.is_finite() {
                    return bad(format!("normal mean must be finite, got {mean}"));
                }
                positive("normal std_dev", std_dev)?;
            }
            DistributionSpec::Exponential { rate } => positive("exponential rate", rate)?,
            DistributionSpec::Gamma { shape, scale } => {
                positive("gamma shape", shape)?;
                positive("gamma scale", scale)?;
            }
            DistributionSpec::Weibull { shape, scale } => {
                positive("weibull shape", shape)?;
                positive("weibull scale", scale)?;
            }
            DistributionSpec::Lognormal { location, scale } => {
                if !location.is_finite() {
                    return bad(format!("lognormal location must be finite, got {location}"));
                }
                positive("lognormal scale", scale)?;
            }
            DistributionSpec::InverseGaussian { mean, shape } => {
                positive("inverse gaussian mean", mean)?;
                positive("inverse gaussian shape", shape)?;
            }
            DistributionSpec::GeneralizedExtremeValue {
                location,
                scale,
                shape,
            } => {
                if !location.is_finite() || !shape.is_finite() {
                    return bad("gev location and shape must be finite".to_string());
                }
                positive("gev scale", scale)?;
            }
            DistributionSpec::Beta { alpha, beta } => {
                positive("beta alpha", alpha)?;
                positive("beta beta", beta)?;
            }
        }
        Ok(())
    }

    /// Cumulative distribution function at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::Uniform { min, max } => ((x - min) / (max - min)).clamp(0.0, 1.0),
            DistributionSpec::Normal { mean, std_dev } => std_normal_cdf((x - mean) / std_dev),
            DistributionSpec::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            DistributionSpec::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_lr(shape, x / scale)
                }
            }
            DistributionSpec::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
            DistributionSpec::Lognormal { location, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - location) / scale)
                }
            }
            DistributionSpec::InverseGaussian { mean, shape } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let s = (shape / x).sqrt();
                let u1 = s * (x / mean - 1.0);
                let u2 = s * (x / mean + 1.0);
                let second = (2.0 * shape / mean + ln_std_normal_sf(u2)).exp();
                (std_normal_cdf(u1) + second).clamp(0.0, 1.0)
            }
            DistributionSpec::GeneralizedExtremeValue {
                location,
                scale,
                shape,
            } => {
                let z = (x - location) / scale;
                if shape.abs() < 1e-12 {
                    (-(-z).exp()).exp()
                } else {
                    let t = 1.0 + shape * z;
                    if t <= 0.0 {
                        // outside the support: below it for shape > 0,
                        // above it for shape < 0
                        if shape > 0.0 {
                            0.0
                        } else {
                            1.0
                        }
                    } else {
                        (-t.powf(-1.0 / shape)).exp()
                    }
                }
            }
            DistributionSpec::Beta { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    beta_reg(alpha, beta, x)
                }
            }
        }
    }
}
