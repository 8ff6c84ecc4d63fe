use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{BandwidthProfile, DiffusionModel, StreamConfig};
use crate::single_chunk::greedy::subsystem_delay;
use crate::single_chunk::delay_curve;
use crate::TOLERANCE;

/// Outcome of testing one period `E`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodCheck {
    pub period: usize,
    /// `ū`.
    pub provisioning_lhs: f64,
    /// `s + E U_{E-1}/N` for the pooled model, `s(1 + c/E) + E U_{E-1}/N` otherwise.
    pub provisioning_rhs: f64,
    pub provisioning_ok: bool,
    /// Single-chunk delay of every group; empty when provisioning fails.
    pub group_delays: Vec<f64>,
    /// `E/s`.
    pub threshold: f64,
    pub non_overlap_ok: bool,
}

impl PeriodCheck {
    pub fn qualifies(&self) -> bool {
        self.provisioning_ok && self.non_overlap_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanDiagnostics {
    /// Delay of the slowest-indexed group (peers `E-1, 2E-1, ...` 0-based).
    pub subsystem_delay: f64,
    pub group_delays: Vec<f64>,
    pub threshold: f64,
    pub provisioning_lhs: f64,
    pub provisioning_rhs: f64,
    /// Single-chunk delay `D(N)` of the whole system under the model.
    pub full_delay: f64,
    /// `D(N) + E/s`, reported alongside the proven bound.
    pub alternative_bound: f64,
}

/// Group rotation with period `E`.
///
/// Peer `p` (0-based) belongs to group `p mod E`; chunk `i` is handled by
/// group `(i + E - 1) mod E`, so chunk 0 starts with the group of the
/// slowest-indexed peers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupPlan {
    pub period: usize,
    pub groups: Vec<Vec<usize>>,
    /// `2E/s`.
    pub delay_bound: f64,
    pub model: DiffusionModel,
    pub stream: StreamConfig,
    pub peers: usize,
    pub diagnostics: PlanDiagnostics,
}

impl GroupPlan {
    pub fn group_of_chunk(&self, chunk: usize) -> usize {
        (chunk + self.period - 1) % self.period
    }
}

pub(crate) fn groups_for(peers: usize, period: usize) -> Vec<Vec<usize>> {
    (0..period)
        .map(|g| (g..peers).step_by(period).collect())
        .collect()
}

fn provisioning_rhs(
    profile: &BandwidthProfile,
    stream: &StreamConfig,
    model: DiffusionModel,
    period: usize,
) -> f64 {
    let e = period as f64;
    let s = stream.rate();
    let head = e * profile.cumulative_clamped(period - 1) / profile.len() as f64;
    match model.parallelism() {
        None => s + head,
        Some(c) => s * (1.0 + c as f64 / e) + head,
    }
}

/// Tests both conditions for period `E`, every group included.
pub fn check_period(
    profile: &BandwidthProfile,
    stream: &StreamConfig,
    model: DiffusionModel,
    period: usize,
) -> Result<PeriodCheck> {
    model.validate()?;
    let model = model.normalized();
    if period == 0 || period > profile.len() {
        return Err(domain(format!(
            "period {period} outside 1..={}",
            profile.len()
        )));
    }
    let lhs = profile.mean();
    let rhs = provisioning_rhs(profile, stream, model, period);
    let provisioning_ok = lhs >= rhs - TOLERANCE * rhs.abs().max(1.0);
    let threshold = period as f64 / stream.rate();
    let mut group_delays = Vec::new();
    let mut non_overlap_ok = false;
    if provisioning_ok {
        // The slowest-indexed group is the binding one in practice; test it first.
        let groups = groups_for(profile.len(), period);
        let order = std::iter::once(period - 1).chain(0..period - 1);
        let mut delays = vec![f64::NAN; period];
        non_overlap_ok = true;
        for g in order {
            let uploads = profile.subset(&groups[g]);
            let d = subsystem_delay(&uploads, model.parallelism(), stream.n0(), uploads.len());
            delays[g] = d;
            if d > threshold + TOLERANCE * threshold.max(1.0) {
                non_overlap_ok = false;
                break;
            }
        }
        if non_overlap_ok {
            group_delays = delays;
        }
    }
    Ok(PeriodCheck {
        period,
        provisioning_lhs: lhs,
        provisioning_rhs: rhs,
        provisioning_ok,
        group_delays,
        threshold,
        non_overlap_ok,
    })
}

/// Smallest period `E` in `1..=N` that satisfies both conditions, if any.
pub fn find_group_period(
    profile: &BandwidthProfile,
    stream: &StreamConfig,
    model: DiffusionModel,
) -> Result<Option<GroupPlan>> {
    model.validate()?;
    let model = model.normalized();
    if profile.mean() < stream.rate() - TOLERANCE {
        return Ok(None);
    }
    for period in 1..=profile.len() {
        let check = check_period(profile, stream, model, period)?;
        if !check.provisioning_ok && model == DiffusionModel::ManyToOne {
            // The pooled right-hand side only grows with E.
            break;
        }
        if check.qualifies() {
            return build_plan(profile, stream, model, check).map(Some);
        }
    }
    Ok(None)
}

fn build_plan(
    profile: &BandwidthProfile,
    stream: &StreamConfig,
    model: DiffusionModel,
    check: PeriodCheck,
) -> Result<GroupPlan> {
    let period = check.period;
    let full_delay = delay_curve(profile, model, stream.n0(), profile.len())?.last();
    Ok(GroupPlan {
        period,
        groups: groups_for(profile.len(), period),
        delay_bound: 2.0 * check.threshold,
        model,
        stream: *stream,
        peers: profile.len(),
        diagnostics: PlanDiagnostics {
            subsystem_delay: check.group_delays[period - 1],
            group_delays: check.group_delays,
            threshold: check.threshold,
            provisioning_lhs: check.provisioning_lhs,
            provisioning_rhs: check.provisioning_rhs,
            full_delay,
            alternative_bound: full_delay + check.threshold,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hom(n: usize) -> BandwidthProfile {
        BandwidthProfile::homogeneous(1.0, n).unwrap()
    }

    #[test]
    fn groups_partition_by_residue() {
        let g = groups_for(7, 3);
        assert_eq!(g, vec![vec![0, 3, 6], vec![1, 4], vec![2, 5]]);
        let mut all: Vec<usize> = g.concat();
        all.sort();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn small_homogeneous_period_two_qualifies() {
        let s = StreamConfig::new(0.5, 1).unwrap();
        let c = check_period(&hom(4), &s, DiffusionModel::ManyToOne, 2).unwrap();
        assert!(c.qualifies());
        assert_eq!(c.group_delays, vec![1.0, 1.0]);
        assert!((c.provisioning_rhs - 1.0).abs() < 1e-12);
        assert_eq!(2.0 * c.threshold, 8.0);
    }

    #[test]
    fn smallest_period_is_returned() {
        let s = StreamConfig::new(0.5, 1).unwrap();
        let plan = find_group_period(&hom(4), &s, DiffusionModel::ManyToOne)
            .unwrap()
            .unwrap();
        // D_m(4) = 1 + 1/2 + 1/3 <= 2, so a single group already works.
        assert_eq!(plan.period, 1);
        assert_eq!(plan.delay_bound, 4.0);
        assert_eq!(plan.groups, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn large_homogeneous_period() {
        let s = StreamConfig::new(0.5, 5).unwrap();
        let p = hom(10_000);
        let c = check_period(&p, &s, DiffusionModel::ManyToOne, 4).unwrap();
        assert!(c.qualifies());
        let harmonic: f64 = (5..2500).map(|k| 1.0 / k as f64).sum();
        assert!((c.group_delays[3] - harmonic).abs() < 1e-9);
        assert!((c.group_delays[3] - (2500f64 / 5.0).ln()).abs() < 0.2);
        let plan = find_group_period(&p, &s, DiffusionModel::ManyToOne)
            .unwrap()
            .unwrap();
        assert_eq!(plan.period, 4);
        assert_eq!(plan.delay_bound, 16.0);
        assert!(plan.diagnostics.subsystem_delay <= 8.0);
    }

    #[test]
    fn underprovisioned_has_no_plan() {
        let s = StreamConfig::new(2.0, 1).unwrap();
        for model in [DiffusionModel::ManyToOne, DiffusionModel::OneToSome(3)] {
            assert!(find_group_period(&hom(50), &s, model).unwrap().is_none());
        }
    }

    #[test]
    fn chunk_to_group_rotation() {
        let s = StreamConfig::new(0.5, 1).unwrap();
        let plan = find_group_period(&hom(8), &s, DiffusionModel::OneToOne)
            .unwrap()
            .unwrap();
        assert_eq!(plan.period, 2);
        assert_eq!(plan.group_of_chunk(0), 1);
        assert_eq!(plan.group_of_chunk(1), 0);
        assert_eq!(plan.group_of_chunk(2), 1);
    }
}
