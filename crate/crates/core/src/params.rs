//! Model parameters and the derived constants `d*`, `b*`, `p*`.

use crate::dist::DistSpec;
use crate::error::{Error, Result};

/// Rates, distributions and initial capital of a bail-fund balance process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Initial capital `M₀`.
    pub m0: f64,
    /// Donation arrival rate.
    pub lambda_d: f64,
    /// Bail-request arrival rate.
    pub lambda_b: f64,
    /// Donation sizes.
    pub dist_d: DistSpec,
    /// Bail request sizes.
    pub dist_b: DistSpec,
    /// Poundage fraction lost per posted bail; support in `[0, 1]`.
    pub dist_p: DistSpec,
    /// Trial delay between posting and return.
    pub dist_s: DistSpec,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.m0.is_finite() && self.m0 >= 0.0) {
            return bad(format!("m0 must be finite and >= 0, got {}", self.m0));
        }
        for (name, rate) in [("lambda_d", self.lambda_d), ("lambda_b", self.lambda_b)] {
            if !(rate.is_finite() && rate > 0.0) {
                return bad(format!("{name} must be > 0, got {rate}"));
            }
        }
        for (name, d) in [
            ("dist_d", &self.dist_d),
            ("dist_b", &self.dist_b),
            ("dist_p", &self.dist_p),
            ("dist_s", &self.dist_s),
        ] {
            d.validate()?;
            if d.support_min() < 0.0 {
                return bad(format!("{name} must have nonnegative support, got {d}"));
            }
        }
        if self.dist_p.support_max() > 1.0 {
            return bad(format!("dist_p support must lie in [0, 1], got {}", self.dist_p));
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Mean donation size `d*`.
    pub fn d_star(&self) -> f64 {
        self.dist_d.mean()
    }

    /// Mean bail size `b*`.
    pub fn b_star(&self) -> f64 {
        self.dist_b.mean()
    }

    /// Mean poundage `p*`.
    pub fn p_star(&self) -> f64 {
        self.dist_p.mean()
    }

    /// Mean trial delay.
    pub fn s_star(&self) -> f64 {
        self.dist_s.mean()
    }

    /// `M₀=10, λ_d=λ_b=1, d~Expo(1), b~Expo(1), p~Unif[0,1], s~Expo(10)`.
    pub fn example1() -> Self {
        ModelParams {
            m0: 10.0,
            lambda_d: 1.0,
            lambda_b: 1.0,
            dist_d: DistSpec::Exponential { mean: 1.0 },
            dist_b: DistSpec::Exponential { mean: 1.0 },
            dist_p: DistSpec::Uniform { lo: 0.0, hi: 1.0 },
            dist_s: DistSpec::Exponential { mean: 10.0 },
        }
    }

    /// Infinite-acceptance second example: bail sizes `Expo(50)`.
    pub fn example2_infinite() -> Self {
        ModelParams {
            dist_b: DistSpec::Exponential { mean: 50.0 },
            ..Self::example1()
        }
    }

    /// Blocking second example: bail sizes `Expo(10)`.
    pub fn example2_blocking() -> Self {
        ModelParams {
            dist_b: DistSpec::Exponential { mean: 10.0 },
            ..Self::example1()
        }
    }

    /// Named presets, as accepted by the CLI `--preset` flag.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "example1" => Some(Self::example1()),
            "example2-inf" => Some(Self::example2_infinite()),
            "example2-block" => Some(Self::example2_blocking()),
            _ => None,
        }
    }

    /// Stable provenance token for fluid curves and reports (FNV-1a of the
    /// parameter text).
    pub fn provenance(&self) -> String {
        let text = format!(
            "{}|{}|{}|{}|{}|{}|{}",
            self.m0, self.lambda_d, self.lambda_b, self.dist_d, self.dist_b, self.dist_p, self.dist_s
        );
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in text.bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::example1()
    }
}

/// η-scaling: arrival rates multiplied by `eta`, jump sizes divided by it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingSpec {
    pub eta: f64,
}

impl ScalingSpec {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParams(format!("eta must be > 0, got {eta}")));
        }
        Ok(ScalingSpec { eta })
    }

    pub fn unit() -> Self {
        ScalingSpec { eta: 1.0 }
    }
}

impl Default for ScalingSpec {
    fn default() -> Self {
        Self::unit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in ["example1", "example2-inf", "example2-block"] {
            ModelParams::preset(name).unwrap().validate().unwrap();
        }
        assert!(ModelParams::preset("nope").is_none());
        let p = ModelParams::example1();
        assert_eq!((p.d_star(), p.b_star(), p.p_star(), p.s_star()), (1.0, 1.0, 0.5, 10.0));
    }

    #[test]
    fn poundage_outside_unit_interval_rejected() {
        let p = ModelParams {
            dist_p: DistSpec::Uniform { lo: 0.0, hi: 1.5 },
            ..ModelParams::example1()
        };
        assert!(p.validate().is_err());
        let p = ModelParams {
            dist_p: DistSpec::Exponential { mean: 0.5 },
            ..ModelParams::example1()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn rates_and_capital_checked() {
        let mut p = ModelParams::example1();
        p.lambda_b = 0.0;
        assert!(p.validate().is_err());
        let mut p = ModelParams::example1();
        p.m0 = -1.0;
        assert!(p.validate().is_err());
        assert!(ScalingSpec::new(0.0).is_err());
        assert!(ScalingSpec::new(0.5).is_ok());
    }

    #[test]
    fn provenance_is_stable_and_distinguishes() {
        let a = ModelParams::example1();
        assert_eq!(a.provenance(), a.provenance());
        assert_ne!(a.provenance(), ModelParams::example2_blocking().provenance());
    }
}
