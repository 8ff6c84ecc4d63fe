//! System description: peers and their upload capacities, collaboration
//! models and injection parameters.
//!
//! Peers are indexed from 0 in decreasing order of upload capacity, so peer 0
//! is the best uploader. Capacities are expressed in chunks per second.

mod adversarial;
mod classes;
pub mod families;
mod file;
mod scalar;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use adversarial::generate_adversarial;
pub use classes::{expand_classes, ClassPopulation, ClassSize, ClassSpec, PeerClass, Preset};
pub use file::{ClassEntry, ProfileFile};
pub use scalar::Scalar;

/// Upload capacities of the `N` peers, sorted non-increasingly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandwidthProfile {
    uploads: Vec<f64>,
}

impl BandwidthProfile {
    /// Builds a profile from capacities that must already be sorted.
    pub fn new(uploads: Vec<f64>) -> Result<Self> {
        if uploads.is_empty() {
            return Err(Error::InvalidProfile("profile has no peers".into()));
        }
        if let Some(u) = uploads.iter().find(|u| !u.is_finite() || **u < 0.0) {
            return Err(Error::InvalidProfile(format!(
                "upload capacity {u} is not a finite non-negative number"
            )));
        }
        if let Some(w) = uploads.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::InvalidProfile(format!(
                "uploads are not non-increasing at peer {}: {} < {}",
                w + 1,
                uploads[w],
                uploads[w + 1]
            )));
        }
        if uploads[0] <= 0.0 {
            return Err(Error::InvalidProfile(
                "system has no upload capacity (u_1 = 0)".into(),
            ));
        }
        Ok(Self { uploads })
    }

    /// Builds a profile from capacities in any order.
    pub fn from_unsorted(mut uploads: Vec<f64>) -> Result<Self> {
        if uploads.iter().any(|u| u.is_nan()) {
            return Err(Error::InvalidProfile("upload capacity is NaN".into()));
        }
        uploads.sort_by(|a, b| b.total_cmp(a));
        Self::new(uploads)
    }

    pub fn homogeneous(upload: f64, peers: usize) -> Result<Self> {
        Self::new(vec![upload; peers])
    }

    pub fn uploads(&self) -> &[f64] {
        &self.uploads
    }

    /// Number of peers `N`.
    pub fn len(&self) -> usize {
        self.uploads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uploads.is_empty()
    }

    /// Capacity of the peer at 0-based index `peer`.
    pub fn upload(&self, peer: usize) -> f64 {
        self.uploads[peer]
    }

    /// `U_k`, the cumulative capacity of the `k` best peers, for `1 <= k <= N`.
    pub fn cumulative_bandwidth(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.len() {
            return Err(domain(format!(
                "cumulative bandwidth index {k} outside 1..={}",
                self.len()
            )));
        }
        Ok(self.uploads[..k].iter().sum())
    }

    /// `U_k` where peers beyond `N` count as zero-capacity dummies and `U_0 = 0`.
    pub fn cumulative_clamped(&self, k: usize) -> f64 {
        self.uploads[..k.min(self.len())].iter().sum()
    }

    /// Prefix sums `[U_0, U_1, ..., U_N]`.
    pub fn prefix_sums(&self) -> Vec<f64> {
        let mut sums = Vec::with_capacity(self.len() + 1);
        let mut acc = 0.0;
        sums.push(acc);
        for u in &self.uploads {
            acc += u;
            sums.push(acc);
        }
        sums
    }

    pub fn total(&self) -> f64 {
        self.uploads.iter().sum()
    }

    /// Average capacity `ū = U_N / N`.
    pub fn mean(&self) -> f64 {
        self.total() / self.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.uploads[0]
    }

    /// Smallest strictly positive capacity, with its 0-based index.
    pub fn min_positive(&self) -> (usize, f64) {
        let idx = self
            .uploads
            .iter()
            .rposition(|u| *u > 0.0)
            .expect("validated profile has a positive capacity");
        (idx, self.uploads[idx])
    }

    /// Sub-profile made of the given peers, kept in the given order.
    pub(crate) fn subset(&self, peers: &[usize]) -> Vec<f64> {
        peers.iter().map(|&p| self.uploads[p]).collect()
    }
}

/// Degree of collaboration allowed while diffusing one chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionModel {
    /// `(∞/1)`: any set of capable peers may pool their capacity on one receiver.
    ManyToOne,
    /// `(1/1)`: one sender per transfer, taking `1/u` seconds.
    OneToOne,
    /// `(1/c)`: each sender runs `c` parallel connections, each taking `c/u` seconds.
    OneToSome(usize),
}

impl DiffusionModel {
    pub fn one_to_some(c: usize) -> Result<Self> {
        if c == 0 {
            return Err(domain("parallelism c must be at least 1"));
        }
        Ok(Self::OneToSome(c))
    }

    /// Number of parallel connections per sender, `None` for the pooled model.
    pub fn parallelism(&self) -> Option<usize> {
        match self {
            Self::ManyToOne => None,
            Self::OneToOne => Some(1),
            Self::OneToSome(c) => Some(*c),
        }
    }

    /// Canonical form: `(1/1)` and `(1/c)` with `c = 1` collapse to [`Self::OneToOne`].
    pub fn normalized(self) -> Self {
        match self {
            Self::OneToSome(1) => Self::OneToOne,
            other => other,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            Self::OneToSome(0) => Err(domain("parallelism c must be at least 1")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DiffusionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ManyToOne => write!(f, "(inf/1)"),
            Self::OneToOne => write!(f, "(1/1)"),
            Self::OneToSome(c) => write!(f, "(1/{c})"),
        }
    }
}

/// Number of copies `n0` the source hands out when a chunk is created.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionConfig {
    n0: usize,
}

impl InjectionConfig {
    pub fn new(n0: usize) -> Result<Self> {
        if n0 == 0 {
            return Err(domain("n0 must be at least 1"));
        }
        Ok(Self { n0 })
    }

    pub fn n0(&self) -> usize {
        self.n0
    }
}

/// Stream parameters: chunk creation rate `s` and injection redundancy `n0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    rate: f64,
    injection: InjectionConfig,
}

impl StreamConfig {
    pub fn new(rate: f64, n0: usize) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(domain(format!("stream rate must be positive, got {rate}")));
        }
        Ok(Self {
            rate,
            injection: InjectionConfig::new(n0)?,
        })
    }

    /// Chunk creation rate `s`, in chunks per second.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn n0(&self) -> usize {
        self.injection.n0()
    }

    /// Creation time of chunk `chunk` (chunk 0 is created at time 0).
    pub fn creation_time(&self, chunk: usize) -> f64 {
        chunk as f64 / self.rate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_bandwidth_sums_best_peers() {
        let p = BandwidthProfile::new(vec![2.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.cumulative_bandwidth(2).unwrap(), 3.0);
        assert_eq!(p.cumulative_bandwidth(1).unwrap(), 2.0);
        let h = BandwidthProfile::homogeneous(1.0, 7).unwrap();
        assert_eq!(h.cumulative_bandwidth(7).unwrap(), 7.0);
    }

    #[test]
    fn cumulative_bandwidth_rejects_out_of_range() {
        let p = BandwidthProfile::new(vec![2.0, 1.0, 1.0]).unwrap();
        assert!(matches!(p.cumulative_bandwidth(0), Err(Error::Domain(_))));
        assert!(matches!(p.cumulative_bandwidth(4), Err(Error::Domain(_))));
        assert_eq!(p.cumulative_clamped(10), 4.0);
        assert_eq!(p.cumulative_clamped(0), 0.0);
    }

    #[test]
    fn profile_validation() {
        assert!(BandwidthProfile::new(vec![]).is_err());
        assert!(BandwidthProfile::new(vec![1.0, 2.0]).is_err());
        assert!(BandwidthProfile::new(vec![0.0, 0.0]).is_err());
        assert!(BandwidthProfile::new(vec![1.0, -1.0]).is_err());
        assert!(BandwidthProfile::new(vec![f64::INFINITY]).is_err());
        let p = BandwidthProfile::from_unsorted(vec![0.5, 3.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.uploads(), &[3.0, 1.0, 0.5, 0.0]);
        assert_eq!(p.min_positive(), (2, 0.5));
    }

    #[test]
    fn one_to_some_one_normalizes_to_one_to_one() {
        assert_eq!(DiffusionModel::OneToSome(1).normalized(), DiffusionModel::OneToOne);
        assert_eq!(DiffusionModel::OneToSome(1).parallelism(), Some(1));
        assert!(DiffusionModel::one_to_some(0).is_err());
    }

    #[test]
    fn stream_config_rejects_bad_rate() {
        assert!(StreamConfig::new(0.0, 1).is_err());
        assert!(StreamConfig::new(f64::NAN, 1).is_err());
        assert!(StreamConfig::new(1.0, 0).is_err());
        assert_eq!(StreamConfig::new(0.5, 2).unwrap().creation_time(3), 6.0);
    }
}
