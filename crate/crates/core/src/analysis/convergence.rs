use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::fluid::{blocking_fluid, inf_fluid_at, skorokhod_fluid, FluidCurve, FluidModel};
use crate::numfmt::g17;
use crate::params::{ModelParams, ScalingSpec};
use crate::path::CadlagPath;
use crate::simulate::{simulate, ModelKind};
use crate::stream::generate_stream;

use super::{quantile_sorted, replicate_seed};

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub etas: Vec<f64>,
    pub reps: usize,
    pub t_end: f64,
    pub seed0: u64,
    /// Grid step of the reference fluid curve.
    pub fluid_dt: f64,
    pub exec: Execution,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            etas: vec![1.0, 4.0, 16.0, 64.0, 256.0],
            reps: 200,
            t_end: 100.0,
            seed0: 1,
            fluid_dt: 0.01,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaSummary {
    pub eta: f64,
    pub replications: usize,
    pub sup_errors: Vec<f64>,
    pub median: f64,
    pub q90: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub model: ModelKind,
    pub fluid_model: FluidModel,
    pub fluid_provenance: String,
    pub per_eta: Vec<EtaSummary>,
}

impl ConvergenceReport {
    pub fn medians(&self) -> Vec<f64> {
        self.per_eta.iter().map(|e| e.median).collect()
    }

    /// `eta,rep,sup_error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eta,rep,sup_error\n");
        for e in &self.per_eta {
            for (rep, err) in e.sup_errors.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", g17(e.eta), rep, g17(*err));
            }
        }
        out
    }
}

/// `sup_t |path(t) − f(t)|` evaluated at both sides of every jump of `path`,
/// at `t0`, `t_end`, and at every node in `grid`.
pub fn sup_distance_to_curve<F: Fn(f64) -> f64>(path: &CadlagPath, grid: &[f64], f: F) -> f64 {
    let mut worst = (path.value(path.t0()) - f(path.t0())).abs();
    worst = worst.max((path.final_value() - f(path.t_end())).abs());
    for &t in path.times() {
        let ft = f(t);
        worst = worst
            .max((path.left_limit(t) - ft).abs())
            .max((path.value(t) - ft).abs());
    }
    for &t in grid {
        let ft = f(t);
        worst = worst
            .max((path.value(t) - ft).abs())
            .max((path.left_limit(t) - ft).abs());
    }
    worst
}

enum Reference {
    Exact,
    Curve(FluidCurve),
}

pub fn convergence_study(
    kind: ModelKind,
    params: &ModelParams,
    cfg: &ConvergenceConfig,
) -> Result<ConvergenceReport> {
    if cfg.reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    if cfg.etas.is_empty() || cfg.etas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("etas must be nonempty and strictly increasing".into()));
    }
    params.validate()?;
    let (fluid_model, reference, grid) = match kind {
        ModelKind::InfReturns => {
            let n = (cfg.t_end / cfg.fluid_dt).round() as usize;
            let grid = (0..=n).map(|k| k as f64 * cfg.t_end / n as f64).collect();
            (FluidModel::Infinite, Reference::Exact, grid)
        }
        ModelKind::SkorokhodReturns => {
            let (curve, _) = skorokhod_fluid(params, cfg.t_end, cfg.fluid_dt)?;
            let grid = curve.times();
            (FluidModel::Skorokhod, Reference::Curve(curve), grid)
        }
        ModelKind::BlockingReturns => {
            let curve = blocking_fluid(params, cfg.t_end, cfg.fluid_dt)?;
            let grid = curve.times();
            (FluidModel::Blocking, Reference::Curve(curve), grid)
        }
        other => return Err(Error::UnsupportedKind(other.name().into())),
    };
    let fluid_value = |t: f64| match &reference {
        Reference::Exact => inf_fluid_at(params, t),
        Reference::Curve(c) => c.value_at(t),
    };

    let mut per_eta = Vec::with_capacity(cfg.etas.len());
    for &eta in &cfg.etas {
        let scaling = ScalingSpec::new(eta)?;
        let errors: Vec<Result<f64>> = map_indexed(cfg.exec, cfg.reps, |rep| {
            let stream = generate_stream(params, scaling, replicate_seed(cfg.seed0, rep), cfg.t_end)?;
            let result = simulate(kind, params, &stream);
            Ok(sup_distance_to_curve(&result.path, &grid, fluid_value))
        });
        let sup_errors = errors.into_iter().collect::<Result<Vec<f64>>>()?;
        let mut sorted = sup_errors.clone();
        sorted.sort_by(f64::total_cmp);
        per_eta.push(EtaSummary {
            eta,
            replications: cfg.reps,
            median: quantile_sorted(&sorted, 0.5),
            q90: quantile_sorted(&sorted, 0.9),
            sup_errors,
        });
    }

    Ok(ConvergenceReport {
        model: kind,
        fluid_model,
        fluid_provenance: params.provenance(),
        per_eta,
    })
}
