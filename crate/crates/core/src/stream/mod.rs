//! Continuous streams: feasibility, delay bounds and the group-rotation
//! schedule, with a replay checker for arbitrary schedules.
//!
//! Chunk `i` is created at `i/s`. A schedule lists every source injection and
//! every peer-to-peer transfer; [`verify_schedule`] replays it against the
//! capacity rules of a diffusion model.

mod feasibility;
mod plan;
mod schedule;
mod verify;

use std::io::{BufRead, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use feasibility::{
    adversarial_lower_bound, feasibility_check, responsibility_delay_bound, stream_delay_floor,
    AdversarialBound, CapacityWitness, Feasibility, StreamFloor,
};
pub use plan::{check_period, find_group_period, GroupPlan, PeriodCheck, PlanDiagnostics};
pub use schedule::plan_intra_then_inter;
pub use verify::{
    measured_stream_delay, verify_schedule, SimulationResult, StreamMeasurement, Violation,
};

/// Peers uploading in one transfer.
///
/// Pooled transfers inside a group involve arithmetic progressions of peers,
/// which are kept implicit; both forms serialize as a plain list.
#[derive(Debug, Clone)]
pub enum Senders {
    List(Vec<usize>),
    Stride { first: usize, step: usize, count: usize },
}

impl Senders {
    pub fn none() -> Self {
        Self::List(Vec::new())
    }

    pub fn one(peer: usize) -> Self {
        Self::List(vec![peer])
    }

    pub fn len(&self) -> usize {
        match self {
            Self::List(v) => v.len(),
            Self::Stride { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, k: usize) -> usize {
        match self {
            Self::List(v) => v[k],
            Self::Stride { first, step, .. } => first + k * step,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).map(move |k| self.get(k))
    }
}

impl PartialEq for Senders {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().eq(other.iter())
    }
}

impl Serialize for Senders {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for Senders {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Vec::<usize>::deserialize(deserializer).map(Self::List)
    }
}

/// One delivery of a complete copy of `chunk` to `receiver`.
///
/// Source injections have no senders, no rate and `start == end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferEvent {
    pub chunk: usize,
    pub senders: Senders,
    pub receiver: usize,
    pub start: f64,
    pub end: f64,
    /// Aggregate rate in chunks per second.
    pub rate: Option<f64>,
}

impl TransferEvent {
    pub fn injection(chunk: usize, receiver: usize, time: f64) -> Self {
        Self {
            chunk,
            senders: Senders::none(),
            receiver,
            start: time,
            end: time,
            rate: None,
        }
    }

    pub fn is_injection(&self) -> bool {
        self.senders.is_empty()
    }
}

/// Events for chunks `0..horizon`, sorted by start time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub horizon: usize,
    pub events: Vec<TransferEvent>,
}

impl Schedule {
    pub fn empty(horizon: usize) -> Self {
        Self {
            horizon,
            events: Vec::new(),
        }
    }

    pub fn transfers(&self) -> impl Iterator<Item = &TransferEvent> {
        self.events.iter().filter(|e| !e.is_injection())
    }

    pub fn injections(&self) -> impl Iterator<Item = &TransferEvent> {
        self.events.iter().filter(|e| e.is_injection())
    }

    /// One JSON object per line.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads events written by [`Schedule::write_json_lines`]. The horizon is
    /// one past the largest chunk unless given.
    pub fn read_json_lines<R: BufRead>(input: R, horizon: Option<usize>) -> Result<Self> {
        let mut events = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let event: TransferEvent = serde_json::from_str(&line)
                .map_err(|e| Error::Parse(format!("schedule line {}: {e}", i + 1)))?;
            events.push(event);
        }
        let horizon =
            horizon.unwrap_or_else(|| events.iter().map(|e| e.chunk + 1).max().unwrap_or(0));
        Ok(Self { horizon, events })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stride_senders_behave_like_lists() {
        let s = Senders::Stride {
            first: 2,
            step: 3,
            count: 3,
        };
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![2, 5, 8]);
        assert_eq!(s, Senders::List(vec![2, 5, 8]));
        assert_eq!(serde_json::to_string(&s).unwrap(), "[2,5,8]");
        assert!(Senders::none().is_empty());
    }

    #[test]
    fn json_lines_round_trip() {
        let schedule = Schedule {
            horizon: 1,
            events: vec![
                TransferEvent::injection(0, 0, 0.0),
                TransferEvent {
                    chunk: 0,
                    senders: Senders::one(0),
                    receiver: 1,
                    start: 0.0,
                    end: 0.5,
                    rate: Some(2.0),
                },
            ],
        };
        let mut buf = Vec::new();
        schedule.write_json_lines(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().next().unwrap().contains("\"rate\":null"));
        let back = Schedule::read_json_lines(&buf[..], None).unwrap();
        assert_eq!(back, schedule);
        assert!(Schedule::read_json_lines(&b"{oops}\n"[..], None).is_err());
    }
}
