//! Realised random primitives shared by every coupled model.
//!
//! Each primitive sequence comes from its own ChaCha substream of the run
//! seed. Marks are keyed by request index: request `j` gets the same
//! `(b_j, p_j, s_j)` whatever `eta` or horizon is used, and interarrival
//! times are unit exponentials divided by the scaled rate, so changing `eta`
//! rescales arrival times without touching the marks.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::numfmt::g17;
use crate::params::{ModelParams, ScalingSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Donation {
    pub time: f64,
    /// Unscaled size `d_i`.
    pub size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BailRequest {
    pub id: u64,
    /// Arrival time `a_j`.
    pub time: f64,
    /// Unscaled size `b_j`.
    pub size: f64,
    /// Poundage fraction `p_j`.
    pub poundage: f64,
    /// Trial delay `s_j`; the return matures at `a_j + s_j`.
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    pub donations: Vec<Donation>,
    pub requests: Vec<BailRequest>,
    pub horizon: f64,
    pub seed: u64,
    pub eta: f64,
    /// Initial capital requested by a scenario file (`m0,<value>` line).
    pub initial_capital: Option<f64>,
}

#[repr(u64)]
#[derive(Clone, Copy)]
enum Substream {
    DonationGaps = 0,
    DonationSizes = 1,
    RequestGaps = 2,
    RequestSizes = 3,
    Poundage = 4,
    Delays = 5,
}

fn substream(seed: u64, which: Substream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

fn arrival_times(seed: u64, which: Substream, rate: f64, horizon: f64) -> Vec<f64> {
    let mut rng = substream(seed, which);
    let mut times = Vec::with_capacity((rate * horizon * 1.1) as usize + 8);
    let mut t = 0.0;
    loop {
        let gap: f64 = Exp1.sample(&mut rng);
        t += gap / rate;
        if t >= horizon {
            break;
        }
        times.push(t);
    }
    times
}

/// Draws donation and bail-request primitives on `[0, horizon)` with rates
/// `λ·η`. Sizes are stored unscaled.
pub fn generate_stream(
    params: &ModelParams,
    scaling: ScalingSpec,
    seed: u64,
    horizon: f64,
) -> Result<EventStream> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    let eta = scaling.eta;
    let d_times = arrival_times(seed, Substream::DonationGaps, params.lambda_d * eta, horizon);
    let mut d_rng = substream(seed, Substream::DonationSizes);
    let donations = d_times
        .into_iter()
        .map(|time| Donation {
            time,
            size: params.dist_d.sample(&mut d_rng),
        })
        .collect();

    let b_times = arrival_times(seed, Substream::RequestGaps, params.lambda_b * eta, horizon);
    let mut b_rng = substream(seed, Substream::RequestSizes);
    let mut p_rng = substream(seed, Substream::Poundage);
    let mut s_rng = substream(seed, Substream::Delays);
    let requests = b_times
        .into_iter()
        .enumerate()
        .map(|(j, time)| BailRequest {
            id: j as u64 + 1,
            time,
            size: params.dist_b.sample(&mut b_rng),
            poundage: params.dist_p.sample(&mut p_rng),
            delay: params.dist_s.sample(&mut s_rng),
        })
        .collect();

    Ok(EventStream {
        donations,
        requests,
        horizon,
        seed,
        eta,
        initial_capital: None,
    })
}

impl EventStream {
    pub fn empty(horizon: f64) -> Self {
        EventStream {
            donations: Vec::new(),
            requests: Vec::new(),
            horizon,
            seed: 0,
            eta: 1.0,
            initial_capital: None,
        }
    }

    /// Parses the scenario grammar: one event per line,
    /// `<time>,d,<size>` or `<time>,b,<size>[,<poundage>,<trial_delay>]`.
    /// Blank lines and lines starting with `#` are ignored. A bail line
    /// without poundage and delay never returns. A line `m0,<value>` records
    /// the initial capital the scenario assumes.
    pub fn from_scenario(text: &str, horizon: f64) -> Result<Self> {
        let mut stream = EventStream::empty(horizon);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let num = |k: usize| -> Result<f64> {
                fields[k]
                    .parse::<f64>()
                    .map_err(|_| err(format!("`{}` is not a number", fields[k])))
            };
            if fields[0] == "m0" {
                let v = match fields.as_slice() {
                    [_, v] => v.parse::<f64>().ok().filter(|v| v.is_finite() && *v >= 0.0),
                    _ => None,
                };
                stream.initial_capital = Some(v.ok_or_else(|| err("expected `m0,<value>` with value >= 0".into()))?);
                continue;
            }
            if fields.len() < 3 {
                return Err(err("expected `<time>,<d|b>,<size>`".into()));
            }
            let time = num(0)?;
            let size = num(2)?;
            if !(time >= 0.0 && time.is_finite()) {
                return Err(err(format!("time must be >= 0, got {time}")));
            }
            if !(size >= 0.0 && size.is_finite()) {
                return Err(err(format!("size must be >= 0, got {size}")));
            }
            match (fields[1], fields.len()) {
                ("d", 3) => stream.donations.push(Donation { time, size }),
                ("b", 3) | ("b", 5) => {
                    let (poundage, delay) = if fields.len() == 5 {
                        (num(3)?, num(4)?)
                    } else {
                        (0.0, f64::INFINITY)
                    };
                    if !(0.0..=1.0).contains(&poundage) {
                        return Err(err(format!("poundage must lie in [0, 1], got {poundage}")));
                    }
                    if delay.is_nan() || delay < 0.0 {
                        return Err(err(format!("trial delay must be >= 0, got {delay}")));
                    }
                    let id = stream.requests.len() as u64 + 1;
                    stream.requests.push(BailRequest {
                        id,
                        time,
                        size,
                        poundage,
                        delay,
                    });
                }
                ("d", _) | ("b", _) => return Err(err("wrong number of fields".into())),
                (other, _) => return Err(err(format!("unknown event kind `{other}`"))),
            }
        }
        let sorted = |ts: &mut dyn Iterator<Item = f64>| {
            let v: Vec<f64> = ts.collect();
            v.windows(2).all(|w| w[0] <= w[1])
        };
        if !sorted(&mut stream.donations.iter().map(|d| d.time))
            || !sorted(&mut stream.requests.iter().map(|r| r.time))
        {
            return Err(Error::Parse {
                line: 0,
                msg: "event times must be nondecreasing within each kind".into(),
            });
        }
        if let Some(t) = stream
            .donations
            .iter()
            .map(|d| d.time)
            .chain(stream.requests.iter().map(|r| r.time))
            .find(|&t| t > horizon)
        {
            return Err(Error::Parse {
                line: 0,
                msg: format!("event at {t} lies beyond the horizon {horizon}"),
            });
        }
        Ok(stream)
    }

    /// Writes the stream in the scenario grammar, events in time order
    /// (donations before requests at equal times).
    pub fn to_scenario(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# seed={} eta={} horizon={}", self.seed, g17(self.eta), g17(self.horizon));
        if let Some(m0) = self.initial_capital {
            let _ = writeln!(out, "m0,{}", g17(m0));
        }
        let mut d = self.donations.iter().peekable();
        let mut b = self.requests.iter().peekable();
        loop {
            let take_d = match (d.peek(), b.peek()) {
                (Some(x), Some(y)) => x.time <= y.time,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            if take_d {
                let x = d.next().expect("peeked");
                let _ = writeln!(out, "{},d,{}", g17(x.time), g17(x.size));
            } else {
                let y = b.next().expect("peeked");
                if y.delay.is_infinite() && y.poundage == 0.0 {
                    let _ = writeln!(out, "{},b,{}", g17(y.time), g17(y.size));
                } else {
                    let _ = writeln!(
                        out,
                        "{},b,{},{},{}",
                        g17(y.time),
                        g17(y.size),
                        g17(y.poundage),
                        g17(y.delay)
                    );
                }
            }
        }
        out
    }

    /// The stream behind the returns counterexample: `d₁=5` at 0, `b₁=6` at 1,
    /// `b₂=4` at 3, trial delays 2, no poundage, zero initial capital.
    pub fn returns_counterexample() -> Self {
        EventStream {
            donations: vec![Donation { time: 0.0, size: 5.0 }],
            requests: vec![
                BailRequest { id: 1, time: 1.0, size: 6.0, poundage: 0.0, delay: 2.0 },
                BailRequest { id: 2, time: 3.0, size: 4.0, poundage: 0.0, delay: 2.0 },
            ],
            horizon: 6.0,
            seed: 0,
            eta: 1.0,
            initial_capital: Some(0.0),
        }
    }
}
