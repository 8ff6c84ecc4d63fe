use serde::Serialize;

use super::plan::GroupPlan;
use super::{find_group_period, plan_intra_then_inter, Schedule};
use crate::error::{Error, Result};
use crate::model::{BandwidthProfile, DiffusionModel, StreamConfig};

/// Timing tolerance when comparing event boundaries.
const TIME_EPS: f64 = 1e-9;
/// Relative tolerance on rates, sizes and loads.
const RATE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Event references a chunk or peer outside the system.
    Malformed { index: usize, reason: String },
    /// Events are not sorted by start time.
    Unsorted { index: usize },
    /// Source copy at the wrong time, or too many of them.
    Injection { chunk: usize, reason: String },
    /// A sender did not hold a complete copy when the transfer started.
    NotHeld { index: usize, chunk: usize, sender: usize, start: f64 },
    /// `rate · (end - start)` is not one chunk.
    Size { index: usize, amount: f64 },
    /// Transfer faster than its senders allow.
    Rate { index: usize, rate: f64, limit: f64 },
    /// More simultaneous connections than the model allows.
    Connections { peer: usize, time: f64, count: usize, limit: usize },
    /// Aggregate upload above capacity.
    Overload { peer: usize, time: f64, load: f64, capacity: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    /// No violation of any kind.
    pub valid: bool,
    /// Every chunk of the horizon reached every peer.
    pub complete: bool,
    /// Time from creation until the last peer holds the chunk, per chunk.
    pub chunk_delays: Vec<Option<f64>>,
    /// Largest delay over delivered chunks (0 for an empty horizon).
    pub max_delay: f64,
    pub violations: Vec<Violation>,
    /// Copies delivered to a peer that already held the chunk.
    pub redundant: usize,
}

/// Replays `schedule` and checks it against the model's capacity rules.
pub fn verify_schedule(
    profile: &BandwidthProfile,
    stream: &StreamConfig,
    model: DiffusionModel,
    schedule: &Schedule,
) -> SimulationResult {
    let model = model.normalized();
    let n = profile.len();
    let horizon = schedule.horizon;
    let mut violations = Vec::new();
    let mut hold = vec![f64::INFINITY; horizon * n];
    let mut injections = vec![0usize; horizon];
    let mut redundant = 0;
    let mut usable = vec![true; schedule.events.len()];

    for (i, e) in schedule.events.iter().enumerate() {
        if i > 0 && e.start < schedule.events[i - 1].start {
            violations.push(Violation::Unsorted { index: i });
        }
        let bad = if e.chunk >= horizon {
            Some(format!("chunk {} outside horizon {horizon}", e.chunk))
        } else if e.receiver >= n {
            Some(format!("receiver {} outside 0..{n}", e.receiver))
        } else if let Some(p) = e.senders.iter().find(|&p| p >= n) {
            Some(format!("sender {p} outside 0..{n}"))
        } else if e.senders.iter().any(|p| p == e.receiver) {
            Some("receiver is also a sender".into())
        } else if !e.start.is_finite() || !e.end.is_finite() {
            Some("non-finite time".into())
        } else if !e.is_injection() && e.end <= e.start {
            Some("transfer does not end after it starts".into())
        } else {
            None
        };
        if let Some(reason) = bad {
            violations.push(Violation::Malformed { index: i, reason });
            usable[i] = false;
            continue;
        }
        let slot = &mut hold[e.chunk * n + e.receiver];
        if slot.is_finite() {
            redundant += 1;
        }
        *slot = slot.min(e.end);
        if e.is_injection() {
            injections[e.chunk] += 1;
            let t = stream.creation_time(e.chunk);
            if (e.start - t).abs() > TIME_EPS * t.max(1.0) || e.end != e.start {
                violations.push(Violation::Injection {
                    chunk: e.chunk,
                    reason: format!("copy to peer {} at {} instead of {t}", e.receiver, e.start),
                });
            }
        }
    }
    for (chunk, &count) in injections.iter().enumerate() {
        if count > stream.n0() {
            violations.push(Violation::Injection {
                chunk,
                reason: format!("{count} source copies, at most {} allowed", stream.n0()),
            });
        }
    }

    for (i, e) in schedule.events.iter().enumerate() {
        if !usable[i] || e.is_injection() {
            continue;
        }
        for p in e.senders.iter() {
            if hold[e.chunk * n + p] > e.start + TIME_EPS * e.start.abs().max(1.0) {
                violations.push(Violation::NotHeld {
                    index: i,
                    chunk: e.chunk,
                    sender: p,
                    start: e.start,
                });
            }
        }
        let rate = e.rate.unwrap_or(f64::NAN);
        let amount = rate * (e.end - e.start);
        if !((amount - 1.0).abs() <= RATE_EPS) {
            violations.push(Violation::Size { index: i, amount });
        }
        let limit = match model.parallelism() {
            None => e.senders.iter().map(|p| profile.upload(p)).sum::<f64>(),
            Some(c) => {
                if e.senders.len() != 1 {
                    violations.push(Violation::Malformed {
                        index: i,
                        reason: format!("{model} transfers have exactly one sender"),
                    });
                    usable[i] = false;
                    continue;
                }
                profile.upload(e.senders.get(0)) / c as f64
            }
        };
        if !(rate <= limit * (1.0 + RATE_EPS)) {
            violations.push(Violation::Rate { index: i, rate, limit });
            usable[i] = false;
        }
    }

    capacity_sweep(profile, model, schedule, &usable, &mut violations);

    let mut chunk_delays = Vec::with_capacity(horizon);
    for chunk in 0..horizon {
        let last = hold[chunk * n..(chunk + 1) * n]
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        chunk_delays.push(last.is_finite().then(|| last - stream.creation_time(chunk)));
    }
    let max_delay = chunk_delays.iter().flatten().fold(0.0, |a: f64, &b| a.max(b));
    SimulationResult {
        valid: violations.is_empty(),
        complete: chunk_delays.iter().all(Option::is_some),
        chunk_delays,
        max_delay,
        violations,
        redundant,
    }
}

/// Sweeps transfer boundaries in time order and tracks each peer's
/// connection count and the share of its capacity in use.
fn capacity_sweep(
    profile: &BandwidthProfile,
    model: DiffusionModel,
    schedule: &Schedule,
    usable: &[bool],
    violations: &mut Vec<Violation>,
) {
    let n = profile.len();
    // (time, is_start, event index); ends sort before starts at equal times.
    let mut marks = Vec::new();
    for (i, e) in schedule.events.iter().enumerate() {
        if usable[i] && !e.is_injection() {
            marks.push((e.start + TIME_EPS, true, i));
            marks.push((e.end - TIME_EPS, false, i));
        }
    }
    marks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut count = vec![0usize; n];
    let mut load = vec![0.0f64; n];
    let mut flagged = vec![false; n];
    for (time, is_start, i) in marks {
        let e = &schedule.events[i];
        let rate = e.rate.unwrap_or(0.0);
        let pooled: f64 = match model.parallelism() {
            None => e.senders.iter().map(|p| profile.upload(p)).sum(),
            Some(_) => 0.0,
        };
        for p in e.senders.iter() {
            let share = match model.parallelism() {
                None => rate / pooled,
                Some(c) => 1.0 / c as f64,
            };
            if !is_start {
                count[p] -= 1;
                load[p] -= share;
                continue;
            }
            count[p] += 1;
            load[p] += share;
            if flagged[p] {
                continue;
            }
            if let Some(c) = model.parallelism() {
                if count[p] > c {
                    flagged[p] = true;
                    violations.push(Violation::Connections {
                        peer: p,
                        time,
                        count: count[p],
                        limit: c,
                    });
                }
            } else if load[p] > 1.0 + RATE_EPS {
                flagged[p] = true;
                violations.push(Violation::Overload {
                    peer: p,
                    time,
                    load: load[p] * profile.upload(p),
                    capacity: profile.upload(p),
                });
            }
        }
    }
}

/// Plan, schedule and replay of a stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamMeasurement {
    pub plan: GroupPlan,
    pub horizon: usize,
    pub result: SimulationResult,
}

impl StreamMeasurement {
    /// Largest observed chunk delay.
    pub fn delay(&self) -> f64 {
        self.result.max_delay
    }
}

/// Runs the group-rotation schedule over `horizon` chunks (default `3E`)
/// and replays it.
pub fn measured_stream_delay(
    profile: &BandwidthProfile,
    stream: &StreamConfig,
    model: DiffusionModel,
    horizon: Option<usize>,
) -> Result<StreamMeasurement> {
    let plan = find_group_period(profile, stream, model)?.ok_or_else(|| {
        Error::Infeasible(format!(
            "no group period satisfies both conditions for {} at s = {}",
            model.normalized(),
            stream.rate()
        ))
    })?;
    let horizon = horizon.unwrap_or(3 * plan.period);
    let schedule = plan_intra_then_inter(profile, stream, model, &plan, horizon)?;
    let result = verify_schedule(profile, stream, model, &schedule);
    Ok(StreamMeasurement {
        plan,
        horizon,
        result,
    })
}
