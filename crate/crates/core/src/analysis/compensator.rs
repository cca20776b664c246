//! Centered processes: realised component minus its compensator, along
//! simulated blocking paths.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::numfmt::g17;
use crate::params::{ModelParams, ScalingSpec};
use crate::path::EventKind;
use crate::simulate::{simulate, ModelKind, SimulationResult};
use crate::stream::generate_stream;

use super::{mean_and_sd, replicate_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompensatorComponent {
    /// `(1/η) Σ d_i − λ_d d* t`.
    Donation,
    /// `(1/η) Σ b_j 1{accepted} − λ_b ∫₀ᵗ H(M(u)) du`.
    Bail,
    /// `(1/η) Σ (1−p_j) b_j 1{accepted} 1{t > a_j+s_j} − (1−p*) λ_b ∫₀ᵗ H(M(u)) F_s(t−u) du`.
    Return,
}

impl CompensatorComponent {
    pub fn name(self) -> &'static str {
        match self {
            CompensatorComponent::Donation => "donation",
            CompensatorComponent::Bail => "bail",
            CompensatorComponent::Return => "return",
        }
    }
}

impl std::str::FromStr for CompensatorComponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "donation" => Ok(CompensatorComponent::Donation),
            "bail" => Ok(CompensatorComponent::Bail),
            "return" => Ok(CompensatorComponent::Return),
            _ => Err(Error::InvalidArgument(format!(
                "unknown component `{s}` (expected donation, bail or return)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointStat {
    pub t: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub std_error: f64,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompensatorDiagnostic {
    pub component: CompensatorComponent,
    pub eta: f64,
    pub checkpoints: Vec<CheckpointStat>,
}

impl CompensatorDiagnostic {
    /// `t,mean,stderr,reps`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mean,stderr,reps\n");
        for c in &self.checkpoints {
            let _ = writeln!(out, "{},{},{},{}", g17(c.t), g17(c.mean), g17(c.std_error), c.replications);
        }
        out
    }

    /// `|mean| ≤ k · stderr` at every checkpoint with positive spread.
    pub fn within_band(&self, k: f64) -> bool {
        self.checkpoints
            .iter()
            .all(|c| c.mean.abs() <= k * c.std_error || (c.std_error == 0.0 && c.mean == 0.0))
    }
}

/// Centered value of `component` at time `t` along one simulated path.
///
/// Compensator integrals are exact on the piecewise-constant path.
pub fn centered_value(
    component: CompensatorComponent,
    params: &ModelParams,
    result: &SimulationResult,
    t: f64,
) -> f64 {
    let realised = |kind: EventKind| -> f64 {
        result
            .events
            .iter()
            .take_while(|e| e.time <= t)
            .filter(|e| e.kind == kind)
            .map(|e| e.amount)
            .sum()
    };
    let h = |m: f64| params.dist_b.truncated_mean(m);
    let segments = result.path.segments().filter(|(a, _, _)| *a < t).map(|(a, b, v)| (a, b.min(t), v));
    match component {
        CompensatorComponent::Donation => {
            realised(EventKind::Donation) - params.lambda_d * params.d_star() * t
        }
        CompensatorComponent::Bail => {
            let integral: f64 = segments.map(|(a, b, v)| h(v) * (b - a)).sum();
            realised(EventKind::BailAccepted) - params.lambda_b * integral
        }
        CompensatorComponent::Return => {
            let g = |x: f64| params.dist_s.integrated_cdf(x);
            // ∫_a^b F_s(t − u) du = G(t − a) − G(t − b)
            let integral: f64 = segments.map(|(a, b, v)| h(v) * (g(t - a) - g(t - b))).sum();
            realised(EventKind::ReturnCredit)
                - (1.0 - params.p_star()) * params.lambda_b * integral
        }
    }
}

/// Replicates the blocking model at scale `eta` and reports the centered
/// component's mean and standard error at each checkpoint.
pub fn compensator_diagnostic(
    component: CompensatorComponent,
    params: &ModelParams,
    eta: f64,
    reps: usize,
    checkpoints: &[f64],
    seed0: u64,
    exec: Execution,
) -> Result<CompensatorDiagnostic> {
    if reps < 2 {
        return Err(Error::InvalidArgument("reps must be >= 2".into()));
    }
    if checkpoints.iter().any(|&t| !(t >= 0.0 && t.is_finite())) || checkpoints.is_empty() {
        return Err(Error::InvalidArgument("checkpoints must be finite and >= 0".into()));
    }
    params.validate()?;
    let scaling = ScalingSpec::new(eta)?;
    let horizon = checkpoints.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let rows: Vec<Result<Vec<f64>>> = map_indexed(exec, reps, |rep| {
        let stream = generate_stream(params, scaling, replicate_seed(seed0, rep), horizon)?;
        let result = simulate(ModelKind::BlockingReturns, params, &stream);
        Ok(checkpoints
            .iter()
            .map(|&t| centered_value(component, params, &result, t))
            .collect())
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let stats = checkpoints
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let column: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            let (mean, sd) = mean_and_sd(&column);
            CheckpointStat {
                t,
                mean,
                std_dev: sd,
                std_error: sd / (reps as f64).sqrt(),
                replications: reps,
            }
        })
        .collect();
    Ok(CompensatorDiagnostic {
        component,
        eta,
        checkpoints: stats,
    })
}
