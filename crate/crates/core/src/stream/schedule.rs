//! Intra-then-inter diffusion.
//!
//! The group in charge of a chunk first fills itself with the optimal
//! single-chunk schedule, then serves every other peer. A peer stops serving
//! chunk `i` when it starts uploading chunk `i + E`, which happens `E/s`
//! after its intra start for chunk `i`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::plan::{groups_for, GroupPlan};
use super::{Schedule, Senders, TransferEvent};
use crate::error::{domain, Result};
use crate::model::{BandwidthProfile, DiffusionModel, StreamConfig};
use crate::single_chunk::greedy::{greedy_copies, many_to_one};

/// Intra-diffusion of one chunk inside one group, times relative to injection.
struct Template {
    /// Local indices of the peers that get a source copy.
    seeded: usize,
    transfers: Vec<LocalTransfer>,
    /// Time each local peer starts uploading (its capable time).
    capable: Vec<f64>,
    /// For every local peer, when each of its connections becomes free.
    free: Vec<Vec<f64>>,
    /// Time the last intra copy completes.
    length: f64,
}

struct LocalTransfer {
    /// Local sender range `lo..hi` (one element outside the pooled model).
    senders: (usize, usize),
    receiver: usize,
    start: f64,
    end: f64,
    rate: f64,
}

fn build_template(uploads: &[f64], n0: usize, model: DiffusionModel) -> Result<Template> {
    let size = uploads.len();
    let seeded = n0.min(size);
    let mut capable = vec![0.0; size];
    let mut transfers = Vec::new();
    let mut free;
    match model.parallelism() {
        None => {
            let delays = many_to_one(uploads, seeded, size).ok_or_else(stalled)?;
            let active = uploads.iter().take_while(|u| **u > 0.0).count();
            let mut pooled = 0.0;
            for r in 0..size {
                if r >= seeded {
                    capable[r] = delays[r];
                    transfers.push(LocalTransfer {
                        senders: (0, r.min(active)),
                        receiver: r,
                        start: delays[r - 1],
                        end: delays[r],
                        rate: pooled,
                    });
                }
                pooled += uploads[r];
            }
            let length = delays.last().copied().unwrap_or(0.0);
            free = vec![vec![length]; size];
            Ok(Template {
                seeded,
                transfers,
                capable,
                free,
                length,
            })
        }
        Some(c) => {
            let events = greedy_copies(uploads, seeded, c, size);
            if events.len() < size {
                return Err(stalled());
            }
            let mut sent = vec![0usize; size];
            for e in &events {
                capable[e.receiver] = e.time;
                if let Some(p) = e.sender {
                    let duration = c as f64 / uploads[p];
                    transfers.push(LocalTransfer {
                        senders: (p, p + 1),
                        receiver: e.receiver,
                        start: e.time - duration,
                        end: e.time,
                        rate: uploads[p] / c as f64,
                    });
                    sent[p] += 1;
                }
            }
            free = Vec::with_capacity(size);
            for p in 0..size {
                let slots = if uploads[p] > 0.0 {
                    let per = c as f64 / uploads[p];
                    (0..c)
                        .map(|k| {
                            let used = sent[p] / c + usize::from(k < sent[p] % c);
                            capable[p] + used as f64 * per
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                free.push(slots);
            }
            let length = events.last().map_or(0.0, |e| e.time);
            Ok(Template {
                seeded,
                transfers,
                capable,
                free,
                length,
            })
        }
    }
}

fn stalled() -> crate::error::Error {
    domain("a group cannot diffuse a chunk internally")
}

/// A connection available for inter-diffusion.
#[derive(Debug, Clone, Copy)]
struct Slot {
    finish: f64,
    free: f64,
    deadline: f64,
    peer: usize,
    duration: f64,
}

impl PartialEq for Slot {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Slot {}

impl PartialOrd for Slot {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Slot {
    // Min-heap on finish time, then peer index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .finish
            .total_cmp(&self.finish)
            .then_with(|| other.peer.cmp(&self.peer))
    }
}

/// Deadline slack absorbing rounding in accumulated times.
const SLACK: f64 = 1e-9;

/// Builds the intra-then-inter schedule for chunks `0..horizon`.
pub fn plan_intra_then_inter(
    profile: &BandwidthProfile,
    stream: &StreamConfig,
    model: DiffusionModel,
    plan: &GroupPlan,
    horizon: usize,
) -> Result<Schedule> {
    let model = model.normalized();
    let n = profile.len();
    let e = plan.period;
    if plan.peers != n
        || plan.model != model
        || plan.stream != *stream
        || e == 0
        || e > n
        || plan.groups != groups_for(n, e)
    {
        return Err(domain("group plan was built for a different system"));
    }
    let s = stream.rate();
    let period_time = e as f64 / s;
    let templates: Vec<Template> = plan
        .groups
        .iter()
        .map(|g| build_template(&profile.subset(g), stream.n0(), model))
        .collect::<Result<_>>()?;

    let mut events = Vec::new();
    let mut holder = vec![false; n];
    for chunk in 0..horizon {
        let g = plan.group_of_chunk(chunk);
        let group = &plan.groups[g];
        let tpl = &templates[g];
        let t = stream.creation_time(chunk);
        holder.iter_mut().for_each(|h| *h = false);

        for &p in &group[..tpl.seeded] {
            events.push(TransferEvent::injection(chunk, p, t));
            holder[p] = true;
        }
        for p in extra_targets(&plan.groups, g, stream.n0() - tpl.seeded) {
            events.push(TransferEvent::injection(chunk, p, t));
            holder[p] = true;
        }
        for lt in &tpl.transfers {
            let senders = Senders::Stride {
                first: group[lt.senders.0],
                step: e,
                count: lt.senders.1 - lt.senders.0,
            };
            events.push(TransferEvent {
                chunk,
                senders,
                receiver: group[lt.receiver],
                start: t + lt.start,
                end: t + lt.end,
                rate: Some(lt.rate),
            });
            holder[group[lt.receiver]] = true;
        }

        let mut receivers = (0..n).filter(|&p| !holder[p]);
        let deadline = |local: usize| t + period_time + tpl.capable[local];
        match model.parallelism() {
            None => pooled_inter(
                profile, chunk, group, e, tpl, t, deadline, &mut receivers, &mut events,
            ),
            Some(c) => {
                let mut heap = BinaryHeap::new();
                for (local, &p) in group.iter().enumerate() {
                    let u = profile.upload(p);
                    for &free in &tpl.free[local] {
                        let duration = c as f64 / u;
                        heap.push(Slot {
                            finish: t + free + duration,
                            free: t + free,
                            deadline: deadline(local),
                            peer: p,
                            duration,
                        });
                    }
                }
                'serve: while let Some(slot) = heap.pop() {
                    if slot.finish > slot.deadline + SLACK {
                        // Not enough time left: the connection idles until its next intra duty.
                        continue;
                    }
                    let Some(r) = receivers.next() else { break 'serve };
                    events.push(TransferEvent {
                        chunk,
                        senders: Senders::one(slot.peer),
                        receiver: r,
                        start: slot.free,
                        end: slot.finish,
                        rate: Some(profile.upload(slot.peer) / c as f64),
                    });
                    heap.push(Slot {
                        free: slot.finish,
                        finish: slot.finish + slot.duration,
                        ..slot
                    });
                }
            }
        }
    }
    events.sort_by(|a, b| {
        a.start
            .total_cmp(&b.start)
            .then(a.chunk.cmp(&b.chunk))
            .then(a.receiver.cmp(&b.receiver))
    });
    Ok(Schedule { horizon, events })
}

/// Peers receiving the source copies a small group cannot absorb: the best
/// peers of the following groups, taken in round-robin order.
fn extra_targets(groups: &[Vec<usize>], g: usize, extra: usize) -> Vec<usize> {
    let e = groups.len();
    let mut out = Vec::with_capacity(extra);
    let mut depth = 0;
    while out.len() < extra {
        let before = out.len();
        for k in 1..e {
            if out.len() == extra {
                break;
            }
            if let Some(&p) = groups[(g + k) % e].get(depth) {
                out.push(p);
            }
        }
        if out.len() == before {
            break;
        }
        depth += 1;
    }
    out
}

/// Pooled inter-diffusion: every group peer still before its deadline uploads
/// to the same receiver. A transfer that would cross the earliest deadline is
/// not started; that peer leaves the pool instead.
#[allow(clippy::too_many_arguments)]
fn pooled_inter(
    profile: &BandwidthProfile,
    chunk: usize,
    group: &[usize],
    e: usize,
    tpl: &Template,
    t: f64,
    deadline: impl Fn(usize) -> f64,
    receivers: &mut impl Iterator<Item = usize>,
    events: &mut Vec<TransferEvent>,
) {
    let uploads = profile.subset(group);
    let active_end = uploads.iter().take_while(|u| **u > 0.0).count();
    let mut prefix = vec![0.0; uploads.len() + 1];
    for (k, u) in uploads.iter().enumerate() {
        prefix[k + 1] = prefix[k] + u;
    }
    // Deadlines grow with the local index, so the pool is always a suffix.
    let mut lo = 0;
    let mut now = t + tpl.length;
    let mut pending = receivers.next();
    while let Some(r) = pending {
        while lo < active_end && deadline(lo) <= now + SLACK {
            lo += 1;
        }
        if lo == active_end {
            return;
        }
        let rate = prefix[active_end] - prefix[lo];
        let end = now + 1.0 / rate;
        if end > deadline(lo) + SLACK {
            lo += 1;
            continue;
        }
        events.push(TransferEvent {
            chunk,
            senders: Senders::Stride {
                first: group[lo],
                step: e,
                count: active_end - lo,
            },
            receiver: r,
            start: now,
            end,
            rate: Some(rate),
        });
        now = end;
        pending = receivers.next();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::find_group_period;

    #[test]
    fn template_one_to_one() {
        let tpl = build_template(&[2.0, 1.0, 1.0], 1, DiffusionModel::OneToOne).unwrap();
        assert_eq!(tpl.seeded, 1);
        assert_eq!(tpl.capable, vec![0.0, 0.5, 1.0]);
        assert_eq!(tpl.length, 1.0);
        assert_eq!(tpl.free[0], vec![1.0]);
        assert_eq!(tpl.free[1], vec![0.5]);
        assert_eq!(tpl.transfers.len(), 2);
    }

    #[test]
    fn template_parallel_slots() {
        let tpl = build_template(&[2.0, 1.0, 1.0], 1, DiffusionModel::OneToSome(2)).unwrap();
        // Peer 0 runs both connections over [0, 1].
        assert_eq!(tpl.free[0], vec![1.0, 1.0]);
        assert_eq!(tpl.free[1], vec![1.0, 1.0]);
        assert_eq!(tpl.length, 1.0);
    }

    #[test]
    fn template_pooled() {
        let tpl = build_template(&[1.0, 1.0, 1.0, 0.0], 1, DiffusionModel::ManyToOne).unwrap();
        assert_eq!(tpl.capable, vec![0.0, 1.0, 1.5, 1.5 + 1.0 / 3.0]);
        let last = tpl.transfers.last().unwrap();
        assert_eq!(last.senders, (0, 3));
        assert_eq!(last.rate, 3.0);
        assert_eq!(tpl.free[3], vec![tpl.length]);
    }

    #[test]
    fn extra_copies_round_robin() {
        let groups = groups_for(7, 3);
        assert_eq!(extra_targets(&groups, 2, 3), vec![0, 1, 3]);
        assert_eq!(extra_targets(&groups, 0, 0), Vec::<usize>::new());
        assert_eq!(extra_targets(&groups, 0, 99).len(), 4);
    }

    #[test]
    fn empty_horizon() {
        let p = BandwidthProfile::homogeneous(1.0, 4).unwrap();
        let s = StreamConfig::new(0.5, 1).unwrap();
        let plan = find_group_period(&p, &s, DiffusionModel::ManyToOne).unwrap().unwrap();
        let sched = plan_intra_then_inter(&p, &s, DiffusionModel::ManyToOne, &plan, 0).unwrap();
        assert!(sched.events.is_empty());
    }

    #[test]
    fn mismatched_plan_rejected() {
        let p = BandwidthProfile::homogeneous(1.0, 4).unwrap();
        let s = StreamConfig::new(0.5, 1).unwrap();
        let plan = find_group_period(&p, &s, DiffusionModel::ManyToOne).unwrap().unwrap();
        let other = BandwidthProfile::homogeneous(1.0, 5).unwrap();
        assert!(plan_intra_then_inter(&other, &s, DiffusionModel::ManyToOne, &plan, 2).is_err());
        assert!(plan_intra_then_inter(&p, &s, DiffusionModel::OneToOne, &plan, 2).is_err());
    }
}
