//! Monte Carlo harnesses over seeded replications.

mod compensator;
mod convergence;
mod moments;
mod ordering;

pub use compensator::{
    centered_value, compensator_diagnostic, CheckpointStat, CompensatorComponent,
    CompensatorDiagnostic,
};
pub use convergence::{
    convergence_study, sup_distance_to_curve, ConvergenceConfig, ConvergenceReport, EtaSummary,
};
pub use moments::{mean_variance_study, moments_csv, MomentRow, MomentsConfig};
pub use ordering::{
    check_ordering, monotone_witness, ordering_study, OrderingFamily, OrderingReport, Violation,
    EQUALITY_TOL, ORDERING_TOL,
};

/// Seed of replicate `rep` in a study started at `seed0`.
pub fn replicate_seed(seed0: u64, rep: usize) -> u64 {
    seed0.wrapping_add(rep as u64)
}

pub(crate) fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_helpers() {
        let (m, s) = mean_and_sd(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(quantile_sorted(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile_sorted(&[7.0], 0.9), 7.0);
        assert_eq!(mean_and_sd(&[3.0, 3.0]).1, 0.0);
    }
}
