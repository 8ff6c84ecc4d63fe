//! Brute-force minimal single-chunk delay on tiny instances.
//!
//! The search knows nothing about greedy orderings. It enumerates every
//! placement of the initial copies and, at every completion instant, every
//! way the free connections of capable peers can pick a receiver among peers
//! still missing the chunk. A receiver may be targeted by several transfers
//! at once; it becomes capable at the earliest completion.
//!
//! Restricting to schedules where a free connection never idles while some
//! peer misses the chunk loses nothing: a later transfer to `Y` can always be
//! started as soon as the connection frees up, since `Y` was missing the chunk
//! then too.
//!
//! Interchangeable receivers (same capacity, same in-flight transfers
//! targeting them) are explored once, and revisited states are pruned.

use std::collections::HashSet;

use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{domain, Result};
use crate::model::DiffusionModel;

/// Largest `N` and `n` the search accepts.
pub const MAX_PEERS: usize = 6;
pub const MAX_PARALLELISM: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct InFlight {
    finish: Rational64,
    sender: u8,
    receiver: u8,
}

/// Search node: capable set, in-flight transfers and elapsed time.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScheduleSearchNode {
    time: Rational64,
    capable: u16,
    in_flight: Vec<InFlight>,
}

struct Search<'a> {
    uploads: &'a [Rational64],
    parallelism: usize,
    target: u32,
    best: Option<Rational64>,
    seen: HashSet<ScheduleSearchNode>,
}

/// Exact minimal time for `n` copies under the one-to-one or one-to-c model.
///
/// `uploads` must be sorted non-increasingly with a positive first entry;
/// copies past `N` go to zero-capacity dummy peers.
pub fn exhaustive_min_delay(
    uploads: &[Rational64],
    n0: usize,
    n: usize,
    model: DiffusionModel,
) -> Result<Rational64> {
    let parallelism = match model {
        DiffusionModel::OneToOne => 1,
        DiffusionModel::OneToSome(c) if (1..=MAX_PARALLELISM).contains(&c) => c,
        other => {
            return Err(domain(format!(
                "oracle supports (1/1) and (1/c) with c <= {MAX_PARALLELISM}, got {other}"
            )))
        }
    };
    if uploads.is_empty() || uploads.len() > MAX_PEERS || n > MAX_PEERS {
        return Err(domain(format!(
            "oracle instance too large: N = {}, n = {n} (limit {MAX_PEERS})",
            uploads.len()
        )));
    }
    if n0 == 0 {
        return Err(domain("n0 must be at least 1"));
    }
    if uploads.iter().any(|u| *u < Rational64::zero())
        || uploads.windows(2).any(|w| w[0] < w[1])
        || uploads[0].is_zero()
    {
        return Err(domain("uploads must be non-negative, sorted and not all zero"));
    }
    if n <= n0 {
        return Ok(Rational64::zero());
    }

    let mut peers = uploads.to_vec();
    peers.resize(uploads.len().max(n), Rational64::zero());
    let mut search = Search {
        uploads: &peers,
        parallelism,
        target: n as u32,
        best: None,
        seen: HashSet::new(),
    };
    for start in initial_placements(&peers, n0.min(peers.len())) {
        search.explore(ScheduleSearchNode {
            time: Rational64::zero(),
            capable: start,
            in_flight: Vec::new(),
        });
    }
    search
        .best
        .ok_or_else(|| domain("no schedule reaches the requested number of copies"))
}

/// Every way to hand out the initial copies, up to peers of equal capacity.
fn initial_placements(uploads: &[Rational64], n0: usize) -> Vec<u16> {
    let m = uploads.len();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for mask in 0u16..(1 << m) {
        if mask.count_ones() as usize != n0 {
            continue;
        }
        let mut key: Vec<Rational64> = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| uploads[i])
            .collect();
        key.sort();
        if seen.insert(key) {
            out.push(mask);
        }
    }
    out
}

impl Search<'_> {
    fn explore(&mut self, node: ScheduleSearchNode) {
        if node.capable.count_ones() >= self.target {
            if self.best.is_none_or(|b| node.time < b) {
                self.best = Some(node.time);
            }
            return;
        }
        if self.best.is_some_and(|b| node.time >= b) {
            return;
        }
        if !self.seen.insert(node.clone()) {
            return;
        }
        let slots = self.free_slots(&node);
        let mut in_flight = node.in_flight.clone();
        self.assign(&node, &slots, 0, &mut in_flight);
    }

    fn free_slots(&self, node: &ScheduleSearchNode) -> Vec<u8> {
        let mut slots = Vec::new();
        for p in 0..self.uploads.len() {
            if node.capable & (1 << p) == 0 || self.uploads[p].is_zero() {
                continue;
            }
            let busy = node.in_flight.iter().filter(|t| t.sender as usize == p).count();
            slots.extend(std::iter::repeat_n(p as u8, self.parallelism - busy));
        }
        slots
    }

    fn assign(
        &mut self,
        node: &ScheduleSearchNode,
        slots: &[u8],
        idx: usize,
        in_flight: &mut Vec<InFlight>,
    ) {
        if idx == slots.len() {
            self.advance(node, in_flight.clone());
            return;
        }
        let sender = slots[idx];
        let duration =
            Rational64::from_integer(self.parallelism as i64) / self.uploads[sender as usize];
        let finish = node.time + duration;
        let mut signatures: Vec<(Rational64, Vec<Rational64>)> = Vec::new();
        let mut any = false;
        for q in 0..self.uploads.len() {
            if node.capable & (1 << q) != 0 {
                continue;
            }
            any = true;
            let mut targeting: Vec<Rational64> = in_flight
                .iter()
                .filter(|t| t.receiver as usize == q)
                .map(|t| t.finish)
                .collect();
            targeting.sort();
            let sig = (self.uploads[q], targeting);
            if signatures.contains(&sig) {
                continue;
            }
            signatures.push(sig);
            in_flight.push(InFlight {
                finish,
                sender,
                receiver: q as u8,
            });
            self.assign(node, slots, idx + 1, in_flight);
            in_flight.pop();
        }
        if !any {
            self.assign(node, slots, idx + 1, in_flight);
        }
    }

    fn advance(&mut self, node: &ScheduleSearchNode, mut in_flight: Vec<InFlight>) {
        let Some(next) = in_flight.iter().map(|t| t.finish).min() else {
            return;
        };
        let mut capable = node.capable;
        in_flight.retain(|t| {
            if t.finish == next {
                capable |= 1 << t.receiver;
                false
            } else {
                true
            }
        });
        in_flight.sort();
        self.explore(ScheduleSearchNode {
            time: next,
            capable,
            in_flight,
        });
    }
}

/// Convenience for tests: a rational from `numer/denom`.
pub fn ratio(numer: i64, denom: i64) -> Rational64 {
    Rational64::new(numer, denom)
}
