//! Minimal delay for diffusing a single chunk.
//!
//! `D(n)` is the earliest time at which `n` complete copies exist when the
//! source hands `n0` copies to the best peers at time 0. Copies beyond `N`
//! go to zero-capacity dummy peers.

pub mod approx;
mod bounds;
pub mod greedy;

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{BandwidthProfile, DiffusionModel};

pub use approx::{
    approx_classes_dm, approx_dominant_class, approx_free_riders, approx_homogeneous_dm,
    ClassApprox, FreeRiderApprox, HomogeneousApprox,
};
pub use bounds::{evaluate_bounds, BoundRecord, BoundReport};

/// `D(n)` for `n = 1..=n_max` under one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayCurve {
    pub model: DiffusionModel,
    pub n0: usize,
    delays: Vec<f64>,
}

impl DelayCurve {
    /// Delay for `n` copies, `1 <= n <= n_max`.
    pub fn delay(&self, n: usize) -> f64 {
        assert!(n >= 1 && n <= self.delays.len(), "n = {n} outside curve range");
        self.delays[n - 1]
    }

    pub fn n_max(&self) -> usize {
        self.delays.len()
    }

    pub fn last(&self) -> f64 {
        *self.delays.last().expect("curves are never empty")
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    /// `(n, D(n))` pairs.
    pub fn points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.delays.iter().enumerate().map(|(i, d)| (i + 1, *d))
    }

    /// CSV with header `n,delay_seconds`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,delay_seconds\n");
        for (n, d) in self.points() {
            let _ = writeln!(out, "{n},{d}");
        }
        out
    }
}

fn check_args(n0: usize, n_max: usize) -> Result<()> {
    if n0 == 0 {
        return Err(domain("n0 must be at least 1"));
    }
    if n_max == 0 {
        return Err(domain("n_max must be at least 1"));
    }
    Ok(())
}

/// `D_m(n) = Σ_{k=n0}^{n-1} 1/U_k`.
pub fn delay_many_to_one(profile: &BandwidthProfile, n0: usize, n_max: usize) -> Result<DelayCurve> {
    check_args(n0, n_max)?;
    let delays = greedy::many_to_one(profile.uploads(), n0, n_max)
        .expect("a valid profile has u_1 > 0");
    Ok(DelayCurve {
        model: DiffusionModel::ManyToOne,
        n0,
        delays,
    })
}

/// `D_1(n)` by greedy finish-time diffusion.
pub fn delay_one_to_one(profile: &BandwidthProfile, n0: usize, n_max: usize) -> Result<DelayCurve> {
    let mut curve = delay_one_to_c(profile, n0, 1, n_max)?;
    curve.model = DiffusionModel::OneToOne;
    Ok(curve)
}

/// `D_c(n)`: as [`delay_one_to_one`] with `c` parallel connections of `c/u` seconds each.
pub fn delay_one_to_c(
    profile: &BandwidthProfile,
    n0: usize,
    c: usize,
    n_max: usize,
) -> Result<DelayCurve> {
    check_args(n0, n_max)?;
    if c == 0 {
        return Err(domain("parallelism c must be at least 1"));
    }
    let events = greedy::greedy_copies(profile.uploads(), n0, c, n_max);
    debug_assert_eq!(events.len(), n_max);
    Ok(DelayCurve {
        model: DiffusionModel::OneToSome(c),
        n0,
        delays: events.into_iter().map(|e| e.time).collect(),
    })
}

pub fn delay_curve(
    profile: &BandwidthProfile,
    model: DiffusionModel,
    n0: usize,
    n_max: usize,
) -> Result<DelayCurve> {
    match model {
        DiffusionModel::ManyToOne => delay_many_to_one(profile, n0, n_max),
        DiffusionModel::OneToOne => delay_one_to_one(profile, n0, n_max),
        DiffusionModel::OneToSome(c) => delay_one_to_c(profile, n0, c, n_max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(u: &[f64]) -> BandwidthProfile {
        BandwidthProfile::new(u.to_vec()).unwrap()
    }

    #[test]
    fn many_to_one_examples() {
        let d = delay_many_to_one(&p(&[2.0, 1.0, 1.0]), 1, 3).unwrap();
        assert_eq!(d.delay(1), 0.0);
        assert_eq!(d.delay(2), 0.5);
        assert!((d.delay(3) - 0.8333333333333334).abs() < 1e-12);
        let h = delay_many_to_one(&BandwidthProfile::homogeneous(1.0, 10_000).unwrap(), 5, 10_000)
            .unwrap();
        assert!((h.last() - 7.70).abs() < 0.005);
        assert_eq!(h.delay(5), 0.0);
    }

    #[test]
    fn one_to_one_examples() {
        let h = BandwidthProfile::homogeneous(1.0, 8).unwrap();
        assert_eq!(delay_one_to_one(&h, 1, 8).unwrap().delay(8), 3.0);
        let w = delay_one_to_one(&p(&[1.6, 0.8, 0.8, 0.8]), 2, 4).unwrap();
        assert_eq!(w.delay(4), 1.25);
        assert_eq!(delay_one_to_one(&p(&[2.0, 1.0, 1.0]), 1, 3).unwrap().delay(3), 1.0);
    }

    #[test]
    fn one_to_c_examples() {
        let prof = p(&[2.0, 1.0, 1.0]);
        assert_eq!(delay_one_to_c(&prof, 1, 2, 3).unwrap().delay(3), 1.0);
        let one = delay_one_to_one(&prof, 1, 6).unwrap();
        let c1 = delay_one_to_c(&prof, 1, 1, 6).unwrap();
        assert_eq!(one.delays(), c1.delays());
        let h0 = BandwidthProfile::homogeneous(1.0, 10_000).unwrap();
        assert_eq!(delay_one_to_c(&h0, 5, 4, 10_000).unwrap().last(), 20.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let prof = p(&[1.0]);
        assert!(delay_many_to_one(&prof, 0, 3).is_err());
        assert!(delay_one_to_one(&prof, 1, 0).is_err());
        assert!(delay_one_to_c(&prof, 1, 0, 3).is_err());
    }

    #[test]
    fn dummy_peers_past_n() {
        // A single peer of capacity 1 serves dummies one per second.
        let d = delay_one_to_one(&p(&[1.0]), 1, 4).unwrap();
        assert_eq!(d.delays(), &[0.0, 1.0, 2.0, 3.0]);
        let m = delay_many_to_one(&p(&[1.0]), 1, 4).unwrap();
        assert_eq!(m.delays(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn csv_layout() {
        let d = delay_many_to_one(&p(&[2.0, 1.0, 1.0]), 1, 2).unwrap();
        assert_eq!(d.to_csv(), "n,delay_seconds\n1,0\n2,0.5\n");
    }
}
