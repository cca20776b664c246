use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::fluid::expected_value_inf;
use crate::numfmt::g17;
use crate::params::{ModelParams, ScalingSpec};
use crate::simulate::{simulate, ModelKind};
use crate::stream::generate_stream;

use super::{mean_and_sd, replicate_seed};

#[derive(Debug, Clone)]
pub struct MomentsConfig {
    pub reps: usize,
    pub grid: Vec<f64>,
    pub eta: f64,
    pub seed0: u64,
    pub exec: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRow {
    pub t: f64,
    pub sample_mean: f64,
    pub sample_std: f64,
    /// Theoretical mean, only known in closed form for `inf`.
    pub theory_mean: Option<f64>,
}

impl MomentRow {
    pub fn std_error(&self, reps: usize) -> f64 {
        self.sample_std / (reps as f64).sqrt()
    }
}

/// Pointwise sample mean and standard deviation over replicates.
pub fn mean_variance_study(
    kind: ModelKind,
    params: &ModelParams,
    cfg: &MomentsConfig,
) -> Result<Vec<MomentRow>> {
    if cfg.reps < 2 {
        return Err(Error::InvalidArgument("reps must be >= 2".into()));
    }
    if cfg.grid.is_empty() || cfg.grid.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("grid must be nonempty with finite times >= 0".into()));
    }
    params.validate()?;
    let scaling = ScalingSpec::new(cfg.eta)?;
    let horizon = cfg.grid.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let samples: Vec<Result<Vec<f64>>> = map_indexed(cfg.exec, cfg.reps, |rep| {
        let stream = generate_stream(params, scaling, replicate_seed(cfg.seed0, rep), horizon)?;
        Ok(simulate(kind, params, &stream).path.sample(&cfg.grid))
    });
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(cfg
        .grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let column: Vec<f64> = samples.iter().map(|s| s[k]).collect();
            let (sample_mean, sample_std) = mean_and_sd(&column);
            MomentRow {
                t,
                sample_mean,
                sample_std,
                theory_mean: (kind == ModelKind::InfReturns).then(|| expected_value_inf(params, t)),
            }
        })
        .collect())
}

/// `t,mean,std,theory` (`theory` empty when unknown).
pub fn moments_csv(rows: &[MomentRow]) -> String {
    let mut out = String::from("t,mean,std,theory\n");
    for r in rows {
        let theory = r.theory_mean.map(g17).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", g17(r.t), g17(r.sample_mean), g17(r.sample_std), theory);
    }
    out
}
