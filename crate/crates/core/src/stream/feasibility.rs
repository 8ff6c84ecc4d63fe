use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::{generate_adversarial, BandwidthProfile, StreamConfig};
use crate::TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// `n0 + U_N/s - N`; non-negative iff the stream is sustainable.
    pub slack: f64,
}

/// Bandwidth conservation test `n0 + U_N/s >= N`.
pub fn feasibility_check(profile: &BandwidthProfile, stream: &StreamConfig) -> Feasibility {
    let slack = stream.n0() as f64 + profile.total() / stream.rate() - profile.len() as f64;
    Feasibility {
        feasible: slack >= -TOLERANCE,
        slack,
    }
}

/// Delay guaranteed by the responsibility scheduler, `2(N-1)/u_n` with `u_n`
/// the smallest positive capacity.
pub fn responsibility_delay_bound(profile: &BandwidthProfile, stream: &StreamConfig) -> Result<f64> {
    let f = feasibility_check(profile, stream);
    if !f.feasible {
        return Err(Error::Infeasible(format!(
            "n0 + U_N/s - N = {} < 0, no lossless bounded-delay schedule exists",
            f.slack
        )));
    }
    let (_, u_min) = profile.min_positive();
    Ok(2.0 * (profile.len() - 1) as f64 / u_min)
}

/// Capacity argument that forces slow peers to relay.
///
/// Over a long stream the source provides `n0·s` copies per second and the
/// helpers `helper_capacity`; when their sum stays below the `N·s` demand, some
/// peer outside the helpers must upload a chunk at some point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityWitness {
    pub source_capacity: f64,
    pub helper_capacity: f64,
    pub demand: f64,
    /// `source_capacity + helper_capacity < demand`.
    pub insufficient: bool,
}

impl CapacityWitness {
    fn new(source_capacity: f64, helper_capacity: f64, demand: f64) -> Self {
        Self {
            source_capacity,
            helper_capacity,
            demand,
            insufficient: source_capacity + helper_capacity < demand - TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdversarialBound {
    /// `(N-1)/(s(n0+V+1))`, the transfer time of any slow peer.
    pub forced_delay: f64,
    /// Source plus the fast peer against the `N·s` demand.
    pub witness: CapacityWitness,
}

/// Delay floor of the adversarial system built by [`generate_adversarial`].
pub fn adversarial_lower_bound(
    peers: usize,
    n0: usize,
    excess: f64,
    rate: f64,
) -> Result<AdversarialBound> {
    // Validates the same preconditions as the construction.
    generate_adversarial(peers, n0, excess, rate)?;
    let fast = (peers - n0 - 1) as f64 * rate;
    Ok(AdversarialBound {
        forced_delay: (peers - 1) as f64 / (rate * (n0 as f64 + excess + 1.0)),
        witness: CapacityWitness::new(n0 as f64 * rate, fast, peers as f64 * rate),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StreamFloor {
    /// 0-based index `k` of the best peer that must upload at some point:
    /// the source and peers `0..k` cannot carry the stream alone.
    pub forced_peer: Option<usize>,
    /// `1/u_k`, a lower bound on the stream delay (0 when no peer is forced).
    pub floor: f64,
    pub witness: CapacityWitness,
}

/// Smallest-capacity argument generalised to any feasible profile.
///
/// Some peer of index `>= k` has to relay, where `k` is the first index with
/// `n0·s + U_{k+1} >= N·s`; relaying one chunk costs it at least `1/u_k`.
pub fn stream_delay_floor(profile: &BandwidthProfile, stream: &StreamConfig) -> Result<StreamFloor> {
    let f = feasibility_check(profile, stream);
    if !f.feasible {
        return Err(Error::Infeasible(format!("slack {} < 0", f.slack)));
    }
    let s = stream.rate();
    let demand = profile.len() as f64 * s;
    let source = stream.n0().min(profile.len()) as f64 * s;
    let sums = profile.prefix_sums();
    let needed = (0..=profile.len()).find(|&k| source + sums[k] >= demand - TOLERANCE);
    match needed {
        Some(0) => Ok(StreamFloor {
            forced_peer: None,
            floor: 0.0,
            witness: CapacityWitness::new(source, 0.0, demand),
        }),
        Some(k) => {
            let forced = k - 1;
            let u = profile.upload(forced);
            if u <= 0.0 {
                return Err(domain("forced peer has no capacity"));
            }
            Ok(StreamFloor {
                forced_peer: Some(forced),
                floor: 1.0 / u,
                witness: CapacityWitness::new(source, sums[forced], demand),
            })
        }
        None => Err(Error::Infeasible("capacity never reaches demand".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(u: &[f64]) -> BandwidthProfile {
        BandwidthProfile::new(u.to_vec()).unwrap()
    }

    #[test]
    fn feasibility_examples() {
        let s1 = StreamConfig::new(1.0, 1).unwrap();
        let f = feasibility_check(&p(&[0.75, 0.25]), &s1);
        assert!(f.feasible);
        assert!(f.slack.abs() < 1e-12);
        let h = feasibility_check(&BandwidthProfile::homogeneous(1.0, 10).unwrap(), &s1);
        assert!(h.feasible);
        assert!((h.slack - 1.0).abs() < 1e-12);
        let bad = feasibility_check(&p(&[0.5, 0.0, 0.0, 0.0]), &s1);
        assert!(!bad.feasible);
        assert!((bad.slack + 2.5).abs() < 1e-12);
    }

    #[test]
    fn responsibility_bound_examples() {
        let s1 = StreamConfig::new(1.0, 1).unwrap();
        let adv = generate_adversarial(10, 1, 0.0, 1.0).unwrap();
        assert!((responsibility_delay_bound(&adv, &s1).unwrap() - 81.0).abs() < 1e-9);
        assert_eq!(responsibility_delay_bound(&p(&[1.0, 1.0]), &s1).unwrap(), 2.0);
        let h = BandwidthProfile::homogeneous(1.0, 10_000).unwrap();
        assert_eq!(responsibility_delay_bound(&h, &s1).unwrap(), 19_998.0);
        assert!(matches!(
            responsibility_delay_bound(&p(&[0.5, 0.0, 0.0, 0.0]), &s1),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn adversarial_examples() {
        let b = adversarial_lower_bound(10, 1, 0.0, 1.0).unwrap();
        assert!((b.forced_delay - 4.5).abs() < 1e-12);
        assert!(b.witness.insufficient);
        assert!(adversarial_lower_bound(2, 1, 0.0, 1.0).is_err());
        let big = adversarial_lower_bound(10, 1, 1e12, 1.0).unwrap();
        assert!(big.forced_delay < 1e-10);
    }

    #[test]
    fn two_peer_floor() {
        let s1 = StreamConfig::new(1.0, 1).unwrap();
        let f = stream_delay_floor(&p(&[0.75, 0.25]), &s1).unwrap();
        assert_eq!(f.forced_peer, Some(1));
        assert_eq!(f.floor, 4.0);
        assert!(f.witness.insufficient);
    }

    #[test]
    fn floor_matches_adversarial_formula() {
        let s1 = StreamConfig::new(1.0, 1).unwrap();
        for n in [10, 100, 1000] {
            let prof = generate_adversarial(n, 1, 0.0, 1.0).unwrap();
            let floor = stream_delay_floor(&prof, &s1).unwrap();
            let bound = adversarial_lower_bound(n, 1, 0.0, 1.0).unwrap();
            // All slow peers share one capacity, so any forced one gives the same floor.
            assert!(floor.forced_peer.unwrap() >= 1);
            assert!((floor.floor - bound.forced_delay).abs() < 1e-9 * bound.forced_delay);
        }
    }

    #[test]
    fn no_forced_peer_when_source_suffices() {
        let s = StreamConfig::new(1.0, 3).unwrap();
        let f = stream_delay_floor(&p(&[1.0, 1.0, 1.0]), &s).unwrap();
        assert_eq!(f.forced_peer, None);
        assert_eq!(f.floor, 0.0);
    }
}
