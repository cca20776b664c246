//! Deterministic fluid limits.
//!
//! * infinite acceptance: closed form
//!   `m(t) = M₀ + d*λ_d t − b*λ_b t + (1−p*) b*λ_b ∫₀ᵗ F_s(v) dv`
//! * Skorokhod limit: the grid reflection of the above
//! * blocking: the Volterra equation
//!   `m(t) = M₀ + λ_d d* t − λ_b ∫₀ᵗ H(m(u)) du + (1−p*) λ_b ∫₀ᵗ H(m(u)) F_s(t−u) du`,
//!   stepped explicitly on a uniform grid with the full history convolution.

use std::fmt;

use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluidModel {
    Infinite,
    Skorokhod,
    Blocking,
}

impl FluidModel {
    pub fn name(self) -> &'static str {
        match self {
            FluidModel::Infinite => "inf",
            FluidModel::Skorokhod => "skorokhod",
            FluidModel::Blocking => "block",
        }
    }
}

/// A trajectory on the uniform grid `t_k = k·dt`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidCurve {
    pub model: FluidModel,
    pub dt: f64,
    pub values: Vec<f64>,
    /// Provenance token of the parameters that produced the curve.
    pub params_hash: String,
}

impl FluidCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| self.time(k)).collect()
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.values.len().saturating_sub(1))
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("nonempty curve")
    }

    /// Linear interpolation, clamped to the grid.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.values.len() - 1;
        if t <= 0.0 {
            return self.values[0];
        }
        let x = t / self.dt;
        let k = x.floor() as usize;
        if k >= n {
            return self.values[n];
        }
        let w = x - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (k, v) in self.values.iter().enumerate() {
            out.push_str(&crate::numfmt::g17(self.time(k)));
            out.push(',');
            out.push_str(&crate::numfmt::g17(*v));
            out.push('\n');
        }
        out
    }
}

fn grid(t_end: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("T must be > 0, got {t_end}")));
    }
    if !(dt > 0.0 && dt <= t_end) {
        return Err(Error::InvalidArgument(format!("dt must lie in (0, T], got {dt}")));
    }
    let n = (t_end / dt).round().max(1.0) as usize;
    Ok((n, t_end / n as f64))
}

/// Closed-form infinite-acceptance fluid value at `t`.
pub fn inf_fluid_at(params: &ModelParams, t: f64) -> f64 {
    let (d, b, p) = (params.d_star(), params.b_star(), params.p_star());
    params.m0 + (d * params.lambda_d - b * params.lambda_b) * t
        + (1.0 - p) * b * params.lambda_b * params.dist_s.integrated_cdf(t)
}

pub fn inf_fluid(params: &ModelParams, t_end: f64, dt: f64) -> Result<FluidCurve> {
    let (n, dt) = grid(t_end, dt)?;
    Ok(FluidCurve {
        model: FluidModel::Infinite,
        dt,
        values: (0..=n).map(|k| inf_fluid_at(params, k as f64 * dt)).collect(),
        params_hash: params.provenance(),
    })
}

/// `E[M^{∞,R^∞}(t)] = M₀ + λ_d t d* − λ_b t b* + λ_b b*(1−p*) ∫₀ᵗ F_s(t−u) du`.
///
/// The substitution `v = t − u` turns the integral into `∫₀ᵗ F_s(v) dv`, so
/// this coincides with [`inf_fluid_at`].
pub fn expected_value_inf(params: &ModelParams, t: f64) -> f64 {
    let (d, b, p) = (params.d_star(), params.b_star(), params.p_star());
    let conv = params.dist_s.integrated_cdf(t);
    params.m0 + params.lambda_d * t * d - params.lambda_b * t * b
        + params.lambda_b * b * (1.0 - p) * conv
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyCase {
    Balanced,
    DivergesPlus,
    DivergesMinus,
}

impl SteadyCase {
    pub fn label(self) -> &'static str {
        match self {
            SteadyCase::Balanced => "balanced",
            SteadyCase::DivergesPlus => "plus",
            SteadyCase::DivergesMinus => "minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateVerdict {
    pub case: SteadyCase,
    /// `d*λ_d − p* b* λ_b`, the long-run slope of the infinite fluid limit.
    pub drift: f64,
    /// Root of `H(m) = λ_d d* / (p* λ_b)`, present iff the target is below `b*`.
    pub blocking_fixed_point: Option<f64>,
    /// In the balanced case, the level the infinite fluid limit settles at:
    /// `M₀ − (1−p*) b* λ_b E[s]`.
    pub balanced_limit: Option<f64>,
}

impl fmt::Display for SteadyStateVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fp = self
            .blocking_fixed_point
            .map_or_else(|| "none".to_string(), crate::numfmt::g17);
        write!(
            f,
            "case={} drift={} fixed_point={}",
            self.case.label(),
            crate::numfmt::g17(self.drift),
            fp
        )
    }
}

pub fn steady_state_classify(params: &ModelParams) -> SteadyStateVerdict {
    let (d, b, p) = (params.d_star(), params.b_star(), params.p_star());
    let drift = d * params.lambda_d - p * b * params.lambda_b;
    let case = if drift > 0.0 {
        SteadyCase::DivergesPlus
    } else if drift < 0.0 {
        SteadyCase::DivergesMinus
    } else {
        SteadyCase::Balanced
    };
    let balanced_limit = (case == SteadyCase::Balanced)
        .then(|| params.m0 - (1.0 - p) * b * params.lambda_b * params.s_star());
    SteadyStateVerdict {
        case,
        drift,
        blocking_fixed_point: blocking_fixed_point(params),
        balanced_limit,
    }
}

/// Solves `H(m) = λ_d d* / (p* λ_b)` by bisection.
///
/// For a point mass the truncated mean is a step and the returned value is
/// the generalised inverse `inf{m : H(m) ≥ target}`.
pub fn blocking_fixed_point(params: &ModelParams) -> Option<f64> {
    let denom = params.p_star() * params.lambda_b;
    if denom <= 0.0 {
        return None;
    }
    let target = params.lambda_d * params.d_star() / denom;
    let b = &params.dist_b;
    if target >= b.mean() {
        return None;
    }
    if target <= 0.0 {
        return Some(0.0);
    }
    let mut hi = b.mean().max(1.0);
    while b.truncated_mean(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if b.truncated_mean(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Which case of the Skorokhod limit the parameters fall into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkorokhodRegime {
    /// `d*λ_d ≥ b*λ_b`: the fluid never decreases, reflection is the identity.
    NeverNegative,
    /// `d*λ_d + (1−p*)b*λ_b F_s(z) ≤ b*λ_b` on the window: monotone decrease,
    /// shift equals `min{0, m(t)}`.
    MonotoneDeficit,
    /// `b*λ_b − (1−p*)b*λ_b ≤ d*λ_d ≤ b*λ_b`: general running infimum.
    ReturnDependent,
}

pub fn skorokhod_regime(params: &ModelParams, t_end: f64) -> SkorokhodRegime {
    let (d, b, p) = (params.d_star(), params.b_star(), params.p_star());
    let inflow = d * params.lambda_d;
    let outflow = b * params.lambda_b;
    let ret = (1.0 - p) * outflow;
    if inflow >= outflow {
        SkorokhodRegime::NeverNegative
    } else if [0.0, t_end]
        .iter()
        .all(|&z| inflow + ret * params.dist_s.cdf(z) <= outflow)
    {
        SkorokhodRegime::MonotoneDeficit
    } else {
        SkorokhodRegime::ReturnDependent
    }
}

/// Reflected infinite fluid limit, plus the regime it falls in.
pub fn skorokhod_fluid(
    params: &ModelParams,
    t_end: f64,
    dt: f64,
) -> Result<(FluidCurve, SkorokhodRegime)> {
    let base = inf_fluid(params, t_end, dt)?;
    let mut low = 0.0f64;
    let values = base
        .values
        .iter()
        .map(|&m| {
            low = low.min(m);
            m - low
        })
        .collect();
    Ok((
        FluidCurve {
            model: FluidModel::Skorokhod,
            values,
            ..base
        },
        skorokhod_regime(params, t_end),
    ))
}

/// Closed-case formula of the Skorokhod limit for the detected regime,
/// evaluated on the same grid as [`skorokhod_fluid`].
pub fn skorokhod_case_formula(params: &ModelParams, t_end: f64, dt: f64) -> Result<Vec<f64>> {
    let base = inf_fluid(params, t_end, dt)?;
    let regime = skorokhod_regime(params, t_end);
    let mut low = 0.0f64;
    Ok(base
        .values
        .iter()
        .map(|&m| match regime {
            SkorokhodRegime::NeverNegative => m,
            SkorokhodRegime::MonotoneDeficit => m - m.min(0.0),
            SkorokhodRegime::ReturnDependent => {
                low = low.min(m);
                m - low
            }
        })
        .collect())
}

/// Largest step allowed by the stability guard `λ_b·L·dt < 0.5`.
pub fn max_stable_dt(params: &ModelParams) -> Result<f64> {
    let l = params.dist_b.lipschitz_bound()?.value;
    Ok(if l > 0.0 {
        0.5 / (params.lambda_b * l)
    } else {
        f64::INFINITY
    })
}

/// Blocking fluid limit on `[0, T]`.
///
/// The history integrals are trapezoidal sums over the grid; the unknown
/// endpoint value `H(m_{n+1})` is replaced by `H(m_n)`. O(n²) work.
pub fn blocking_fluid(params: &ModelParams, t_end: f64, dt: f64) -> Result<FluidCurve> {
    blocking_fluid_from(params, params.m0, t_end, dt)
}

/// As [`blocking_fluid`] but starting from `m_init` instead of `M₀`.
pub fn blocking_fluid_from(
    params: &ModelParams,
    m_init: f64,
    t_end: f64,
    dt: f64,
) -> Result<FluidCurve> {
    let (n, dt) = grid(t_end, dt)?;
    let l = params.dist_b.lipschitz_bound()?.value;
    let product = params.lambda_b * l * dt;
    if product >= 0.5 {
        return Err(Error::StepTooLarge { product });
    }

    let h = |m: f64| params.dist_b.truncated_mean(m);
    let inflow = params.lambda_d * params.d_star();
    let lb = params.lambda_b;
    let ret = (1.0 - params.p_star()) * lb;
    let kernel: Vec<f64> = (0..=n).map(|k| params.dist_s.cdf(k as f64 * dt)).collect();

    let mut values = Vec::with_capacity(n + 1);
    let mut hist = Vec::with_capacity(n + 1);
    values.push(m_init);
    hist.push(h(m_init));
    // Σ_{k=1}^{n} H_k, i.e. the interior trapezoid nodes
    let mut interior = 0.0;

    for step in 0..n {
        let next = step + 1;
        let t = next as f64 * dt;
        // lagged endpoint: H(m_{n+1}) ≈ H(m_n)
        let h_pred = hist[step];

        let outflow = dt * (0.5 * hist[0] + interior + 0.5 * h_pred);

        // Σ_{k=1}^{step} H_k F_s(t_next − t_k)
        let conv_interior = convolve(&hist[1..=step], &kernel[1..next]);
        let returned =
            dt * (0.5 * hist[0] * kernel[next] + conv_interior + 0.5 * h_pred * kernel[0]);

        let m = m_init + inflow * t - lb * outflow + ret * returned;
        values.push(m);
        hist.push(h(m));
        interior += hist[next];
    }

    Ok(FluidCurve {
        model: FluidModel::Blocking,
        dt,
        values,
        params_hash: params.provenance(),
    })
}

// Σ_i h[i] * w[len-1-i]
fn convolve(h: &[f64], w: &[f64]) -> f64 {
    debug_assert_eq!(h.len(), w.len());
    let mut acc = [0.0f64; 4];
    let hc = h.chunks_exact(4);
    let wc = w.rchunks_exact(4);
    let tail: f64 = hc
        .remainder()
        .iter()
        .zip(wc.remainder().iter().rev())
        .map(|(a, b)| a * b)
        .sum();
    for (hs, ws) in hc.zip(wc) {
        for (a, (x, y)) in acc.iter_mut().zip(hs.iter().zip(ws.iter().rev())) {
            *a += x * y;
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Right-hand side of the blocking fluid dynamics at grid node `k`:
/// `λ_d d* − λ_b H(m(t)) + (1−p*)λ_b [H(m(t)) F_s(0) + ∫₀ᵗ H(m(u)) f_s(t−u) du]`.
pub fn blocking_rhs(params: &ModelParams, curve: &FluidCurve, k: usize) -> Result<f64> {
    let s = &params.dist_s;
    if s.pdf(0.0).is_none() {
        return Err(Error::InvalidArgument(
            "trial delay has no density; derivative form undefined".into(),
        ));
    }
    let dt = curve.dt;
    let hk = |i: usize| params.dist_b.truncated_mean(curve.values[i]);
    let f = |x: f64| s.pdf(x).expect("checked");
    let mut conv = 0.0;
    if k > 0 {
        conv += 0.5 * (hk(0) * f(k as f64 * dt) + hk(k) * f(0.0));
        for i in 1..k {
            conv += hk(i) * f((k - i) as f64 * dt);
        }
        conv *= dt;
    }
    let lb = params.lambda_b;
    Ok(params.lambda_d * params.d_star() - lb * hk(k)
        + (1.0 - params.p_star()) * lb * (hk(k) * s.cdf(0.0) + conv))
}

/// Max over interior nodes of `|central difference − rhs|`, sampled every
/// `stride` nodes.
pub fn blocking_ode_residual(params: &ModelParams, curve: &FluidCurve, stride: usize) -> Result<f64> {
    let n = curve.values.len();
    let mut worst = 0.0f64;
    let mut k = 1;
    while k + 1 < n {
        let slope = (curve.values[k + 1] - curve.values[k - 1]) / (2.0 * curve.dt);
        worst = worst.max((slope - blocking_rhs(params, curve, k)?).abs());
        k += stride.max(1);
    }
    Ok(worst)
}

/// Sup distance between the solution at `dt` and at `dt/2` on the coarse grid.
pub fn refinement_discrepancy(params: &ModelParams, t_end: f64, dt: f64) -> Result<f64> {
    let coarse = blocking_fluid(params, t_end, dt)?;
    let fine = blocking_fluid(params, t_end, 0.5 * coarse.dt)?;
    Ok(coarse
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| (v - fine.values[2 * k]).abs())
        .fold(0.0, f64::max))
}
