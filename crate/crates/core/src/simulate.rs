//! Exact event-driven simulation of the eight balance-process variants.
//!
//! Every variant consumes the same [`EventStream`], so results across kinds
//! are pathwise comparable. Events are merged in time order; at identical
//! timestamps returns are applied first, then donations, then bail requests.
//!
//! A return for request `j` enters the balance through the indicator
//! `{t > a_j + s_j}`: it is credited at the first representable time after
//! the maturity `a_j + s_j`, so the balance at the maturity instant (and any
//! request arriving exactly then) does not see it yet. Returns whose
//! maturity is not before the horizon are reported as pending.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::path::{CadlagPath, EventKind, PathEvent};
use crate::stream::EventStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Infinite acceptance with returns, `M^{∞,R^∞}`.
    InfReturns,
    /// Blocking with returns, `M^{B,R}`.
    BlockingReturns,
    /// Partial fulfilment returning what was actually paid, `M^{P,R^P}`.
    PartialReturns,
    /// Partial fulfilment returning the full requested amount, `M^{P*,R^∞}`.
    SkorokhodReturns,
    InfNr,
    BlockingNr,
    SkorokhodNr,
    PartialNr,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::InfReturns,
        ModelKind::BlockingReturns,
        ModelKind::PartialReturns,
        ModelKind::SkorokhodReturns,
        ModelKind::InfNr,
        ModelKind::BlockingNr,
        ModelKind::SkorokhodNr,
        ModelKind::PartialNr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::InfReturns => "inf",
            ModelKind::BlockingReturns => "block",
            ModelKind::PartialReturns => "partial",
            ModelKind::SkorokhodReturns => "skorokhod",
            ModelKind::InfNr => "inf-nr",
            ModelKind::BlockingNr => "block-nr",
            ModelKind::SkorokhodNr => "skorokhod-nr",
            ModelKind::PartialNr => "partial-nr",
        }
    }

    pub fn has_returns(self) -> bool {
        matches!(
            self,
            ModelKind::InfReturns
                | ModelKind::BlockingReturns
                | ModelKind::PartialReturns
                | ModelKind::SkorokhodReturns
        )
    }

    fn policy(self) -> Policy {
        match self {
            ModelKind::InfReturns | ModelKind::InfNr => Policy::Infinite,
            ModelKind::BlockingReturns | ModelKind::BlockingNr => Policy::Blocking,
            ModelKind::PartialReturns | ModelKind::PartialNr | ModelKind::SkorokhodNr => {
                Policy::Partial
            }
            ModelKind::SkorokhodReturns => Policy::PartialFullReturn,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model `{s}`")))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Policy {
    Infinite,
    Blocking,
    Partial,
    PartialFullReturn,
}

/// Multiplier applied to the full request size in the `skorokhod` variant's
/// returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReturnFactor {
    /// `(1 − p_j) b_j`, the return term of the infinite-acceptance input.
    #[default]
    OneMinusP,
    /// `p_j b_j`, the literal alternative. Breaks the reflection identity.
    P,
}

impl FromStr for ReturnFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-minus-p" => Ok(ReturnFactor::OneMinusP),
            "p" => Ok(ReturnFactor::P),
            _ => Err(Error::InvalidArgument(format!(
                "unknown return factor `{s}` (expected one-minus-p or p)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimOptions {
    pub skorokhod_return_factor: ReturnFactor,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Totals {
    pub donated: f64,
    pub paid_out: f64,
    pub returned: f64,
    pub blocked_count: u64,
    /// Sum over partially served requests of `request − paid`.
    pub partial_shortfall: f64,
    /// Returns scheduled to mature at or after the horizon.
    pub pending_returns: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub kind: ModelKind,
    pub path: CadlagPath,
    pub events: Vec<PathEvent>,
    pub totals: Totals,
}

impl SimulationResult {
    /// `path(t_end) − (m0 + donated − paid_out + returned)`.
    pub fn accounting_residual(&self, m0: f64) -> f64 {
        let t = &self.totals;
        self.path.final_value() - (m0 + t.donated - t.paid_out + t.returned)
    }

    /// Cumulative credited returns at time `t`.
    pub fn returned_by(&self, t: f64) -> f64 {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::ReturnCredit && e.time <= t)
            .map(|e| e.amount)
            .sum()
    }
}

struct PendingReturn {
    time: f64,
    id: u64,
    amount: f64,
}

impl PartialEq for PendingReturn {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for PendingReturn {}

impl PartialOrd for PendingReturn {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PendingReturn {
    // reversed: BinaryHeap is a max-heap and we pop the earliest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Credit time for a return maturing at `maturity`.
pub fn credit_time(maturity: f64) -> f64 {
    maturity.next_up()
}

pub fn simulate(kind: ModelKind, params: &ModelParams, stream: &EventStream) -> SimulationResult {
    simulate_with(kind, params, stream, &SimOptions::default())
}

pub fn simulate_with(
    kind: ModelKind,
    params: &ModelParams,
    stream: &EventStream,
    opts: &SimOptions,
) -> SimulationResult {
    let policy = kind.policy();
    let with_returns = kind.has_returns();
    let scale = 1.0 / stream.eta;
    let horizon = stream.horizon;

    let mut path = CadlagPath::new(0.0, horizon, params.m0).expect("valid window");
    let mut events = Vec::with_capacity(2 * (stream.donations.len() + stream.requests.len()));
    let mut totals = Totals::default();
    let mut balance = params.m0;
    let mut pending: BinaryHeap<PendingReturn> = BinaryHeap::new();

    let (mut i, mut j) = (0usize, 0usize);
    loop {
        let td = stream.donations.get(i).map_or(f64::INFINITY, |d| d.time);
        let tb = stream.requests.get(j).map_or(f64::INFINITY, |r| r.time);
        let tr = pending.peek().map_or(f64::INFINITY, |r| r.time);
        if td.is_infinite() && tb.is_infinite() && tr.is_infinite() {
            break;
        }

        if tr <= td && tr <= tb {
            let r = pending.pop().expect("peeked");
            balance += r.amount;
            totals.returned += r.amount;
            events.push(PathEvent {
                time: r.time,
                kind: EventKind::ReturnCredit,
                amount: r.amount,
                request_id: r.id,
            });
            path.push(r.time, balance).expect("ordered event");
        } else if td <= tb {
            let d = stream.donations[i];
            i += 1;
            let amount = d.size * scale;
            balance += amount;
            totals.donated += amount;
            events.push(PathEvent {
                time: d.time,
                kind: EventKind::Donation,
                amount,
                request_id: i as u64,
            });
            path.push(d.time, balance).expect("ordered event");
        } else {
            let req = stream.requests[j];
            j += 1;
            let need = req.size * scale;
            let (paid, kind_tag, returnable) = match policy {
                Policy::Infinite => (need, EventKind::BailAccepted, (1.0 - req.poundage) * need),
                // acceptance compares the balance with the unscaled size b_j
                Policy::Blocking if balance >= req.size => {
                    (need, EventKind::BailAccepted, (1.0 - req.poundage) * need)
                }
                Policy::Blocking => (0.0, EventKind::BailBlocked, 0.0),
                Policy::Partial | Policy::PartialFullReturn => {
                    let paid = need.min(balance.max(0.0));
                    let tag = if paid < need {
                        EventKind::BailPartial
                    } else {
                        EventKind::BailAccepted
                    };
                    let ret = if policy == Policy::Partial {
                        (1.0 - req.poundage) * paid
                    } else {
                        match opts.skorokhod_return_factor {
                            ReturnFactor::OneMinusP => (1.0 - req.poundage) * need,
                            ReturnFactor::P => req.poundage * need,
                        }
                    };
                    (paid, tag, ret)
                }
            };

            if kind_tag == EventKind::BailBlocked {
                totals.blocked_count += 1;
                events.push(PathEvent {
                    time: req.time,
                    kind: kind_tag,
                    amount: need,
                    request_id: req.id,
                });
                continue;
            }
            if kind_tag == EventKind::BailPartial {
                totals.partial_shortfall += need - paid;
            }
            balance -= paid;
            totals.paid_out += paid;
            events.push(PathEvent {
                time: req.time,
                kind: kind_tag,
                amount: paid,
                request_id: req.id,
            });
            path.push(req.time, balance).expect("ordered event");

            if with_returns && returnable > 0.0 {
                let maturity = req.time + req.delay;
                if maturity < horizon {
                    pending.push(PendingReturn {
                        time: credit_time(maturity),
                        id: req.id,
                        amount: returnable,
                    });
                } else {
                    totals.pending_returns += returnable;
                }
            }
        }
    }

    SimulationResult {
        kind,
        path,
        events,
        totals,
    }
}

/// Runs several kinds on one stream; results come back in input order.
pub fn simulate_coupled(
    kinds: &[ModelKind],
    params: &ModelParams,
    stream: &EventStream,
) -> Vec<SimulationResult> {
    kinds.iter().map(|&k| simulate(k, params, stream)).collect()
}

/// Result of comparing the reflected infinite-acceptance path with the
/// direct partial-fulfilment recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    /// `φ[inf-nr]` vs `skorokhod-nr`.
    pub no_returns_deviation: f64,
    /// `φ[inf]` vs `skorokhod`.
    pub with_returns_deviation: f64,
    pub tolerance: f64,
}

impl EquivalenceReport {
    pub fn max_deviation(&self) -> f64 {
        self.no_returns_deviation.max(self.with_returns_deviation)
    }

    pub fn passed(&self) -> bool {
        self.max_deviation() <= self.tolerance
    }
}

pub fn skorokhod_equivalence_check(params: &ModelParams, stream: &EventStream) -> EquivalenceReport {
    skorokhod_equivalence_check_with(params, stream, &SimOptions::default())
}

pub fn skorokhod_equivalence_check_with(
    params: &ModelParams,
    stream: &EventStream,
    opts: &SimOptions,
) -> EquivalenceReport {
    let dev = |input: ModelKind, direct: ModelKind| {
        let reflected = simulate_with(input, params, stream, opts).path.skorokhod_map();
        let recursion = simulate_with(direct, params, stream, opts).path;
        reflected
            .max_relative_deviation(&recursion)
            .expect("same window")
    };
    EquivalenceReport {
        no_returns_deviation: dev(ModelKind::InfNr, ModelKind::SkorokhodNr),
        with_returns_deviation: dev(ModelKind::InfReturns, ModelKind::SkorokhodReturns),
        tolerance: crate::path::PATH_IDENTITY_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistSpec;
    use crate::params::ScalingSpec;
    use crate::stream::generate_stream;

    fn counterexample() -> (ModelParams, EventStream) {
        let params = ModelParams {
            m0: 0.0,
            ..ModelParams::example1()
        };
        (params, EventStream::returns_counterexample())
    }

    fn at_integers(r: &SimulationResult) -> Vec<f64> {
        (0..7).map(|k| r.path.value(f64::from(k))).collect()
    }

    #[test]
    fn counterexample_rows() {
        let (params, stream) = counterexample();
        let inf = simulate(ModelKind::InfReturns, &params, &stream);
        assert_eq!(at_integers(&inf), vec![5.0, -1.0, -1.0, -5.0, 1.0, 1.0, 5.0]);
        let skrk = simulate(ModelKind::SkorokhodReturns, &params, &stream);
        assert_eq!(at_integers(&skrk), vec![5.0, 0.0, 0.0, 0.0, 6.0, 6.0, 10.0]);
        let block = simulate(ModelKind::BlockingReturns, &params, &stream);
        assert_eq!(at_integers(&block), vec![5.0, 5.0, 5.0, 1.0, 1.0, 1.0, 5.0]);
        assert_eq!(block.totals.blocked_count, 1);
        let partial = simulate(ModelKind::PartialReturns, &params, &stream);
        // pays 5 of 6 at t=1, nothing at t=3, gets 5 back after t=3
        assert_eq!(at_integers(&partial), vec![5.0, 0.0, 0.0, 0.0, 5.0, 5.0, 5.0]);
        assert_eq!(partial.totals.partial_shortfall, 1.0 + 4.0);
    }

    #[test]
    fn returns_wait_for_strict_maturity() {
        let (params, stream) = counterexample();
        let inf = simulate(ModelKind::InfReturns, &params, &stream);
        assert_eq!(inf.path.value(3.0), -5.0);
        assert_eq!(inf.path.value(3.0f64.next_up()), 1.0);
        assert_eq!(inf.returned_by(3.0), 0.0);
        assert_eq!(inf.returned_by(4.0), 6.0);
    }

    #[test]
    fn pending_returns_past_horizon() {
        let (params, mut stream) = counterexample();
        stream.horizon = 5.0;
        let inf = simulate(ModelKind::InfReturns, &params, &stream);
        assert_eq!(inf.totals.returned, 6.0);
        assert_eq!(inf.totals.pending_returns, 4.0);
        assert_eq!(inf.accounting_residual(params.m0), 0.0);
    }

    #[test]
    fn empty_stream_gives_constant_paths() {
        let params = ModelParams::example1();
        let stream = EventStream::empty(10.0);
        for r in simulate_coupled(&ModelKind::ALL, &params, &stream) {
            assert!(r.path.is_empty());
            assert_eq!(r.path.value(10.0), params.m0);
        }
        let eq = skorokhod_equivalence_check(&params, &stream);
        assert!(eq.passed());
        assert_eq!(eq.max_deviation(), 0.0);
    }

    #[test]
    fn coupled_equals_individual() {
        let params = ModelParams::example2_blocking();
        let stream = generate_stream(&params, ScalingSpec::unit(), 11, 60.0).unwrap();
        let all = simulate_coupled(&ModelKind::ALL, &params, &stream);
        for (r, k) in all.iter().zip(ModelKind::ALL) {
            assert_eq!(r.kind, k);
            assert_eq!(*r, simulate(k, &params, &stream));
        }
    }

    #[test]
    fn accounting_and_nonnegativity() {
        let params = ModelParams::example2_blocking();
        for seed in 0..1000 {
            let stream = generate_stream(&params, ScalingSpec::unit(), seed, 30.0).unwrap();
            for r in simulate_coupled(&ModelKind::ALL, &params, &stream) {
                assert!(r.accounting_residual(params.m0).abs() <= 1e-9, "{}", r.kind);
                if !matches!(r.kind, ModelKind::InfReturns | ModelKind::InfNr) {
                    assert!(r.path.values().iter().all(|&v| v >= 0.0), "{} seed {seed}", r.kind);
                }
            }
        }
    }

    #[test]
    fn return_amounts_follow_what_was_paid() {
        let params = ModelParams::example2_blocking();
        let stream = generate_stream(&params, ScalingSpec::unit(), 4, 200.0).unwrap();
        for kind in [ModelKind::BlockingReturns, ModelKind::PartialReturns, ModelKind::SkorokhodReturns] {
            let r = simulate(kind, &params, &stream);
            for ev in r.events.iter().filter(|e| e.kind == EventKind::ReturnCredit) {
                let req = stream.requests[(ev.request_id - 1) as usize];
                let expected = if kind == ModelKind::SkorokhodReturns {
                    (1.0 - req.poundage) * req.size
                } else {
                    let paid = r
                        .events
                        .iter()
                        .find(|e| {
                            e.request_id == ev.request_id
                                && matches!(e.kind, EventKind::BailAccepted | EventKind::BailPartial)
                        })
                        .unwrap()
                        .amount;
                    (1.0 - req.poundage) * paid
                };
                assert_eq!(ev.amount, expected);
                assert!(ev.time > req.time + req.delay);
            }
        }
    }

    #[test]
    fn skorokhod_returns_dominate_partial_returns() {
        let params = ModelParams::example2_blocking();
        for seed in 0..50 {
            let stream = generate_stream(&params, ScalingSpec::unit(), seed, 100.0).unwrap();
            let skrk = simulate(ModelKind::SkorokhodReturns, &params, &stream);
            let part = simulate(ModelKind::PartialReturns, &params, &stream);
            for t in CadlagPath::union_times(&[&skrk.path, &part.path]) {
                assert!(skrk.returned_by(t) >= part.returned_by(t) - 1e-12);
            }
        }
    }

    #[test]
    fn equivalence_on_counterexample_is_exact() {
        let (params, stream) = counterexample();
        let eq = skorokhod_equivalence_check(&params, &stream);
        assert_eq!(eq.no_returns_deviation, 0.0);
        assert_eq!(eq.with_returns_deviation, 0.0);
    }

    #[test]
    fn equivalence_on_random_streams() {
        let params = ModelParams::example2_blocking();
        for seed in 0..100 {
            let stream = generate_stream(&params, ScalingSpec::unit(), seed, 100.0).unwrap();
            let eq = skorokhod_equivalence_check(&params, &stream);
            assert!(eq.passed(), "seed {seed}: {eq:?}");
        }
    }

    #[test]
    fn literal_p_factor_breaks_equivalence() {
        let params = ModelParams::example2_blocking();
        let opts = SimOptions {
            skorokhod_return_factor: ReturnFactor::P,
        };
        let stream = generate_stream(&params, ScalingSpec::unit(), 2, 100.0).unwrap();
        let eq = skorokhod_equivalence_check_with(&params, &stream, &opts);
        assert!(eq.no_returns_deviation <= eq.tolerance);
        assert!(eq.with_returns_deviation > 1e-3);
    }

    #[test]
    fn eta_scales_amounts() {
        let params = ModelParams {
            dist_d: DistSpec::Point { value: 2.0 },
            ..ModelParams::example1()
        };
        let stream = generate_stream(&params, ScalingSpec::new(10.0).unwrap(), 1, 5.0).unwrap();
        let r = simulate(ModelKind::InfNr, &params, &stream);
        let first = r.events.iter().find(|e| e.kind == EventKind::Donation).unwrap();
        assert_eq!(first.amount, 0.2);
    }

    #[test]
    fn deterministic_results() {
        let params = ModelParams::example1();
        let s1 = generate_stream(&params, ScalingSpec::new(2.0).unwrap(), 8, 40.0).unwrap();
        let s2 = generate_stream(&params, ScalingSpec::new(2.0).unwrap(), 8, 40.0).unwrap();
        for k in ModelKind::ALL {
            assert_eq!(simulate(k, &params, &s1), simulate(k, &params, &s2));
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
        }
        assert!("bogus".parse::<ModelKind>().is_err());
    }
}
