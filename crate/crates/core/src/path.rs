//! Right-continuous piecewise-constant trajectories and the Skorokhod
//! reflection map.
//!
//! A [`CadlagPath`] holds a start value and an ordered list of breakpoints
//! `(time, value_after)`. It is evaluated right-continuously:
//! `value(t)` is the value after the last breakpoint at or before `t`, or the
//! start value when there is none. All operations here are exact on this
//! representation; nothing is resampled onto a grid.

use std::fmt::Write as _;
use std::io;

use crate::error::{Error, Result};
use crate::numfmt::g17;

/// Relative tolerance (with the same absolute floor) for path identity.
pub const PATH_IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CadlagPath {
    t0: f64,
    t_end: f64,
    start_value: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

/// What happened at a breakpoint of a simulated balance path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Donation,
    BailAccepted,
    /// Nothing was paid; `amount` records the requested size.
    BailBlocked,
    /// Paid `min(request, balance)`; `amount` is what was paid.
    BailPartial,
    ReturnCredit,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Donation => "donation",
            EventKind::BailAccepted => "bail_accepted",
            EventKind::BailBlocked => "bail_blocked",
            EventKind::BailPartial => "bail_partial",
            EventKind::ReturnCredit => "return_credit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEvent {
    pub time: f64,
    pub kind: EventKind,
    pub amount: f64,
    pub request_id: u64,
}

impl CadlagPath {
    pub fn new(t0: f64, t_end: f64, start_value: f64) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite() && t0 <= t_end) {
            return Err(Error::InvalidPath(format!("bad window [{t0}, {t_end}]")));
        }
        if !start_value.is_finite() {
            return Err(Error::InvalidPath("start value must be finite".into()));
        }
        Ok(CadlagPath {
            t0,
            t_end,
            start_value,
            times: Vec::new(),
            values: Vec::new(),
        })
    }

    pub fn constant(t0: f64, t_end: f64, value: f64) -> Result<Self> {
        Self::new(t0, t_end, value)
    }

    pub fn from_breakpoints(
        t0: f64,
        t_end: f64,
        start_value: f64,
        breakpoints: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<Self> {
        let mut p = Self::new(t0, t_end, start_value)?;
        for (t, v) in breakpoints {
            p.push(t, v)?;
        }
        Ok(p)
    }

    /// Step path taking `values[k]` on `[times[k], times[k+1])`; the first
    /// time is the left endpoint.
    pub fn steps(times: &[f64], values: &[f64], t_end: f64) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidPath("times and values must be nonempty and aligned".into()));
        }
        Self::from_breakpoints(
            times[0],
            t_end,
            values[0],
            times[1..].iter().copied().zip(values[1..].iter().copied()),
        )
    }

    /// Appends a breakpoint. A breakpoint at the same time as the last one
    /// overwrites its value.
    pub fn push(&mut self, time: f64, value: f64) -> Result<()> {
        if !(time >= self.t0 && time <= self.t_end) {
            return Err(Error::InvalidPath(format!(
                "breakpoint {time} outside [{}, {}]",
                self.t0, self.t_end
            )));
        }
        if !value.is_finite() {
            return Err(Error::InvalidPath(format!("non-finite value at t={time}")));
        }
        match self.times.last() {
            Some(&last) if time < last => Err(Error::InvalidPath(format!(
                "breakpoint {time} precedes {last}"
            ))),
            Some(&last) if time == last => {
                *self.values.last_mut().expect("aligned") = value;
                Ok(())
            }
            _ => {
                self.times.push(time);
                self.values.push(value);
                Ok(())
            }
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Value held before the first breakpoint.
    pub fn start_value(&self) -> f64 {
        self.start_value
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Right-continuous evaluation.
    pub fn value(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&s| s <= t);
        if idx == 0 {
            self.start_value
        } else {
            self.values[idx - 1]
        }
    }

    /// Left limit `value(t-)`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&s| s < t);
        if idx == 0 {
            self.start_value
        } else {
            self.values[idx - 1]
        }
    }

    pub fn final_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.start_value)
    }

    pub fn sample(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.value(t)).collect()
    }

    /// Constant pieces `(start, end, value)` covering `[t0, t_end]`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let starts = std::iter::once(self.t0).chain(self.times.iter().copied());
        let vals = std::iter::once(self.start_value).chain(self.values.iter().copied());
        let ends = self.times.iter().copied().chain(std::iter::once(self.t_end));
        starts
            .zip(ends)
            .zip(vals)
            .map(|((a, b), v)| (a, b, v))
            .filter(|(a, b, _)| b > a)
    }

    /// Minimum over all values the path takes on `[t0, t_end]`.
    pub fn min_value(&self) -> f64 {
        self.attained_values().fold(f64::INFINITY, f64::min)
    }

    fn attained_values(&self) -> impl Iterator<Item = f64> + '_ {
        let start = if self.times.first() == Some(&self.t0) {
            None
        } else {
            Some(self.start_value)
        };
        start.into_iter().chain(self.values.iter().copied())
    }

    /// The Skorokhod shift `t ↦ inf_{s≤t} {0, p(s)}`.
    ///
    /// Nonincreasing, nonpositive, and only steps at breakpoints where `p`
    /// reaches a new minimum below zero.
    pub fn running_infimum(&self) -> CadlagPath {
        let start_value = self.start_value.min(0.0);
        let mut out = CadlagPath {
            t0: self.t0,
            t_end: self.t_end,
            start_value,
            times: Vec::new(),
            values: Vec::new(),
        };
        let mut low = self.initial_low();
        let mut current = start_value;
        for (t, v) in self.breakpoints() {
            low = low.min(v);
            if low != current {
                current = low;
                out.times.push(t);
                out.values.push(low);
            }
        }
        out
    }

    // the start value is not attained when a breakpoint sits at t0
    fn initial_low(&self) -> f64 {
        if self.times.first() == Some(&self.t0) {
            0.0
        } else {
            self.start_value.min(0.0)
        }
    }

    /// Skorokhod reflection `φ[p](t) = p(t) − inf_{s≤t} {0, p(s)}`.
    ///
    /// Keeps every breakpoint time of `p` and introduces none.
    pub fn skorokhod_map(&self) -> CadlagPath {
        let start_value = self.start_value - self.start_value.min(0.0);
        let mut low = self.initial_low();
        let mut values = Vec::with_capacity(self.values.len());
        for &v in &self.values {
            if v < low {
                low = v;
            }
            values.push(v - low);
        }
        CadlagPath {
            t0: self.t0,
            t_end: self.t_end,
            start_value,
            times: self.times.clone(),
            values,
        }
    }

    fn check_window(&self, other: &CadlagPath) -> Result<()> {
        if self.t0 != other.t0 || self.t_end != other.t_end {
            return Err(Error::DomainMismatch {
                a0: self.t0,
                a1: self.t_end,
                b0: other.t0,
                b1: other.t_end,
            });
        }
        Ok(())
    }

    /// `t0` plus every breakpoint time of either path, sorted and deduplicated.
    pub fn union_times(paths: &[&CadlagPath]) -> Vec<f64> {
        let mut ts: Vec<f64> = paths
            .iter()
            .flat_map(|p| std::iter::once(p.t0).chain(p.times.iter().copied()))
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// Exact `sup_{t0≤t≤t_end} |a(t) − b(t)|`.
    pub fn sup_norm_distance(&self, other: &CadlagPath) -> Result<f64> {
        self.check_window(other)?;
        Ok(Self::union_times(&[self, other])
            .into_iter()
            .map(|t| (self.value(t) - other.value(t)).abs())
            .fold(0.0, f64::max))
    }

    /// `max_t |a(t) − b(t)| / max(1, |a(t)|, |b(t)|)`, i.e. the smallest tolerance
    /// under which the paths are identical with relative tolerance and equal
    /// absolute floor.
    pub fn max_relative_deviation(&self, other: &CadlagPath) -> Result<f64> {
        self.check_window(other)?;
        Ok(Self::union_times(&[self, other])
            .into_iter()
            .map(|t| {
                let (a, b) = (self.value(t), other.value(t));
                (a - b).abs() / a.abs().max(b.abs()).max(1.0)
            })
            .fold(0.0, f64::max))
    }

    pub fn identical_to(&self, other: &CadlagPath) -> Result<bool> {
        Ok(self.max_relative_deviation(other)? <= PATH_IDENTITY_TOL)
    }

    /// CSV with header `t,value`: a row at `t0` holding the start value, one
    /// row per breakpoint, and a closing row at `t_end`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.times.len() + 3));
        out.push_str("t,value\n");
        let _ = writeln!(out, "{},{}", g17(self.t0), g17(self.start_value));
        for (t, v) in self.breakpoints() {
            let _ = writeln!(out, "{},{}", g17(t), g17(v));
        }
        let _ = writeln!(out, "{},{}", g17(self.t_end), g17(self.final_value()));
        out
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    /// Inverse of [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if i == 0 {
                if line != "t,value" {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("expected header `t,value`, got `{line}`"),
                    });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("`{s}` is not a number"),
                })
            };
            let (t, v) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected two columns".into(),
            })?;
            rows.push((parse(t)?, parse(v)?));
        }
        if rows.len() < 2 {
            return Err(Error::Parse {
                line: rows.len() + 1,
                msg: "need a start row and an end row".into(),
            });
        }
        let (t0, start) = rows[0];
        let (t_end, _) = rows[rows.len() - 1];
        Self::from_breakpoints(t0, t_end, start, rows[1..rows.len() - 1].iter().copied())
    }
}
