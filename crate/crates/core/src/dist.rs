//! Jump-size, poundage and trial-delay distributions.
//!
//! Exponential distributions are parameterised by their MEAN: `exp:10` has
//! mean 10 and rate 0.1. Every size and delay distribution in the model is
//! written this way, so `Expo(10)` trial delays return after about ten time
//! units on average.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// A supported one-dimensional distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistSpec {
    Exponential { mean: f64 },
    Uniform { lo: f64, hi: f64 },
    Point { value: f64 },
}

/// Bound on `sup_m m * f(m)`, the Lipschitz constant of the truncated mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeBound {
    pub value: f64,
    /// `false` for point masses, where `value` is the jump magnitude of the
    /// step-shaped truncated mean rather than a density supremum.
    pub from_density: bool,
}

impl DistSpec {
    pub fn exponential(mean: f64) -> Result<Self> {
        Self::Exponential { mean }.validated()
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::Uniform { lo, hi }.validated()
    }

    pub fn point(value: f64) -> Result<Self> {
        Self::Point { value }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DistSpec::Exponential { mean } if !(mean.is_finite() && mean > 0.0) => Err(
                Error::InvalidDistribution(format!("exponential mean must be > 0, got {mean}")),
            ),
            DistSpec::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => Err(
                Error::InvalidDistribution(format!("uniform needs lo < hi, got [{lo}, {hi}]")),
            ),
            DistSpec::Point { value } if !(value.is_finite() && value >= 0.0) => Err(
                Error::InvalidDistribution(format!("point value must be >= 0, got {value}")),
            ),
            _ => Ok(()),
        }
    }

    /// Smallest point of the support.
    pub fn support_min(&self) -> f64 {
        match *self {
            DistSpec::Exponential { .. } => 0.0,
            DistSpec::Uniform { lo, .. } => lo,
            DistSpec::Point { value } => value,
        }
    }

    /// Largest point of the support (may be infinite).
    pub fn support_max(&self) -> f64 {
        match *self {
            DistSpec::Exponential { .. } => f64::INFINITY,
            DistSpec::Uniform { hi, .. } => hi,
            DistSpec::Point { value } => value,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistSpec::Exponential { mean } => mean,
            DistSpec::Uniform { lo, hi } => 0.5 * (lo + hi),
            DistSpec::Point { value } => value,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            DistSpec::Exponential { mean } => 2.0 * mean * mean,
            DistSpec::Uniform { lo, hi } => (lo * lo + lo * hi + hi * hi) / 3.0,
            DistSpec::Point { value } => value * value,
        }
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.second_moment() - m * m).max(0.0)
    }

    /// Density, or `None` for a point mass.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        match *self {
            DistSpec::Exponential { mean } => {
                Some(if x < 0.0 { 0.0 } else { (-x / mean).exp() / mean })
            }
            DistSpec::Uniform { lo, hi } => {
                Some(if x < lo || x > hi { 0.0 } else { 1.0 / (hi - lo) })
            }
            DistSpec::Point { .. } => None,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistSpec::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            DistSpec::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            DistSpec::Point { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `∫_0^t F(v) dv` for `t >= 0`.
    pub fn integrated_cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            DistSpec::Exponential { mean } => t + mean * (-t / mean).exp_m1(),
            DistSpec::Uniform { lo, hi } => {
                // the support may start below 0; integrate from max(lo, 0)
                let w = hi - lo;
                let prim = |x: f64| -> f64 {
                    if x <= lo {
                        0.0
                    } else if x < hi {
                        (x - lo) * (x - lo) / (2.0 * w)
                    } else {
                        0.5 * w + (x - hi)
                    }
                };
                prim(t) - prim(0.0)
            }
            DistSpec::Point { value } => (t - value).max(0.0),
        }
    }

    /// Truncated mean `H(m) = ∫_0^m x f(x) dx`.
    ///
    /// For a point mass at `c` this is `c * 1{c <= m}`.
    pub fn truncated_mean(&self, m: f64) -> f64 {
        if m <= 0.0 {
            return 0.0;
        }
        match *self {
            DistSpec::Exponential { mean } => {
                let x = m / mean;
                (-mean * (-x).exp_m1() - m * (-x).exp()).max(0.0)
            }
            DistSpec::Uniform { lo, hi } => {
                let lo0 = lo.max(0.0);
                let top = m.min(hi);
                if top <= lo0 {
                    0.0
                } else {
                    (top * top - lo0 * lo0) / (2.0 * (hi - lo))
                }
            }
            DistSpec::Point { value } => {
                if value <= m {
                    value
                } else {
                    0.0
                }
            }
        }
    }

    /// Lipschitz bound of [`truncated_mean`](Self::truncated_mean):
    /// `L = sup_{m >= 0} m f(m)`.
    pub fn lipschitz_bound(&self) -> Result<SlopeBound> {
        let value = match *self {
            // m e^{-m/θ}/θ peaks at m = θ
            DistSpec::Exponential { .. } => (-1.0f64).exp(),
            DistSpec::Uniform { lo, hi } => {
                if hi <= 0.0 {
                    0.0
                } else {
                    hi / (hi - lo)
                }
            }
            DistSpec::Point { value } => {
                return Ok(SlopeBound {
                    value,
                    from_density: false,
                })
            }
        };
        if !value.is_finite() {
            return Err(Error::UnboundedSlope(self.to_string()));
        }
        Ok(SlopeBound {
            value,
            from_density: true,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistSpec::Exponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                e * mean
            }
            DistSpec::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            DistSpec::Point { value } => value,
        }
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistSpec::Exponential { mean } => write!(f, "exp:{mean}"),
            DistSpec::Uniform { lo, hi } => write!(f, "unif:{lo}:{hi}"),
            DistSpec::Point { value } => write!(f, "point:{value}"),
        }
    }
}

impl FromStr for DistSpec {
    type Err = Error;

    /// Parses `exp:<mean>`, `unif:<lo>:<hi>` or `point:<value>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidDistribution(format!("`{s}`: {msg}"));
        let num = |part: &str| -> Result<f64> {
            part.parse::<f64>()
                .map_err(|_| bad(&format!("`{part}` is not a number")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["exp", mean] => DistSpec::exponential(num(mean)?),
            ["unif", lo, hi] => DistSpec::uniform(num(lo)?, num(hi)?),
            ["point", value] => DistSpec::point(num(value)?),
            _ => Err(bad("expected exp:<mean>, unif:<lo>:<hi> or point:<value>")),
        }
    }
}
