use serde::Serialize;

use super::{delay_many_to_one, delay_one_to_c, delay_one_to_one};
use crate::error::{domain, Result};
use crate::model::BandwidthProfile;
use crate::TOLERANCE;

/// Every delay and bound right-hand side at one `n`.
///
/// `D^u` denotes the same delay in a homogeneous system of `N` peers at
/// capacity `u`. Flags are `None` where the inequality does not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRecord {
    pub n: usize,
    pub d_m: f64,
    pub d_1: f64,
    pub d_c: f64,
    pub d_m_hom_max: f64,
    pub d_m_hom_mean: f64,
    pub d_1_hom_mean: f64,
    pub d_c_hom_mean: f64,

    /// `(1/ū)(ln((n-1)/n0) + 1/n0)`, for `n0 < n <= N`.
    pub gain_dm_rhs: Option<f64>,
    /// `n0/U_{n0} + D_m/ln 2` (conjectured bound on `D_1`).
    pub conj_one_rhs: f64,
    /// `n0/U_{n0} + 2 D_m` (proven bound on `D_1`).
    pub loose_one_rhs: f64,
    /// `c n0/U_{n0} + c/ln(1+c) D_m` (conjectured bound on `D_c`).
    pub conj_c_rhs: f64,
    /// `c n0/U_{n0} + (c+1) D_m` (proven bound on `D_c`).
    pub loose_c_rhs: f64,
    /// `1/ū + D_1^ū`.
    pub gain_d1_rhs: f64,
    /// `c n0/U_{n0} + log_c(n/n0)`, only for `c >= 2`.
    pub gain_dc_mid: Option<f64>,
    /// `c/ū + D_c^ū`.
    pub gain_dc_rhs: f64,

    /// `D_m <= D_1 <= D_c`.
    pub containment: bool,
    /// `D_m^{u_max} <= D_m <= D_m^ū`.
    pub sandwich: bool,
    pub gain_dm: Option<bool>,
    pub loose_one: bool,
    pub loose_c: bool,
    pub conj_one: bool,
    pub conj_c: bool,
    pub gain_d1: bool,
    /// Evaluated as written; never asserted.
    pub gain_dc: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n0: usize,
    pub c: usize,
    pub peers: usize,
    pub mean_upload: f64,
    pub max_upload: f64,
    pub records: Vec<BoundRecord>,
}

/// A failed inequality: the `n` where it failed and its name.
pub type Violation = (usize, &'static str);

impl BoundReport {
    /// Failures of inequalities that are theorems: containment, the
    /// homogeneous sandwich, the average-capacity gain and both loose bounds.
    pub fn proven_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for r in &self.records {
            let checks = [
                ("containment", Some(r.containment)),
                ("sandwich", Some(r.sandwich)),
                ("gain_dm", r.gain_dm),
                ("loose_one", Some(r.loose_one)),
                ("loose_c", Some(r.loose_c)),
            ];
            out.extend(
                checks
                    .into_iter()
                    .filter(|(_, ok)| *ok == Some(false))
                    .map(|(name, _)| (r.n, name)),
            );
        }
        out
    }

    /// Failures of the conjectured bounds and of the gain derived from them.
    pub fn conjecture_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for r in &self.records {
            let checks = [
                ("conj_one", r.conj_one),
                ("conj_c", r.conj_c),
                ("gain_d1", r.gain_d1),
            ];
            out.extend(
                checks
                    .into_iter()
                    .filter(|(_, ok)| !ok)
                    .map(|(name, _)| (r.n, name)),
            );
        }
        out
    }

    pub fn record(&self, n: usize) -> &BoundRecord {
        &self.records[n - 1]
    }
}

fn le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + TOLERANCE * rhs.abs().max(1.0)
}

/// Strict inequalities are accepted up to the same tolerance.
fn lt(lhs: f64, rhs: f64) -> bool {
    lhs < rhs + TOLERANCE * rhs.abs().max(1.0)
}

/// Evaluates every single-chunk bound at `n = 1..=n_max`, using
/// parallelism `c` for the one-to-c bounds.
pub fn evaluate_bounds(
    profile: &BandwidthProfile,
    n0: usize,
    c: usize,
    n_max: usize,
) -> Result<BoundReport> {
    if c == 0 {
        return Err(domain("parallelism c must be at least 1"));
    }
    let peers = profile.len();
    let mean = profile.mean();
    let max = profile.max();
    let hom_max = BandwidthProfile::homogeneous(max, peers)?;
    let hom_mean = BandwidthProfile::homogeneous(mean, peers)?;

    let d_m = delay_many_to_one(profile, n0, n_max)?;
    let d_1 = delay_one_to_one(profile, n0, n_max)?;
    let d_c = delay_one_to_c(profile, n0, c, n_max)?;
    let d_m_max = delay_many_to_one(&hom_max, n0, n_max)?;
    let d_m_mean = delay_many_to_one(&hom_mean, n0, n_max)?;
    let d_1_mean = delay_one_to_one(&hom_mean, n0, n_max)?;
    let d_c_mean = delay_one_to_c(&hom_mean, n0, c, n_max)?;

    let cf = c as f64;
    let head = n0 as f64 / profile.cumulative_clamped(n0);
    let records = (1..=n_max)
        .map(|n| {
            let dm = d_m.delay(n);
            let d1 = d_1.delay(n);
            let dc = d_c.delay(n);
            let gain_dm_rhs = (n > n0 && n <= peers).then(|| {
                (((n - 1) as f64 / n0 as f64).ln() + 1.0 / n0 as f64) / mean
            });
            let conj_one_rhs = head + dm / std::f64::consts::LN_2;
            let loose_one_rhs = head + 2.0 * dm;
            let conj_c_rhs = cf * head + cf / (1.0 + cf).ln() * dm;
            let loose_c_rhs = cf * head + (cf + 1.0) * dm;
            let gain_d1_rhs = 1.0 / mean + d_1_mean.delay(n);
            let gain_dc_mid =
                (c >= 2).then(|| cf * head + (n as f64 / n0 as f64).ln() / cf.ln());
            let gain_dc_rhs = cf / mean + d_c_mean.delay(n);
            BoundRecord {
                n,
                d_m: dm,
                d_1: d1,
                d_c: dc,
                d_m_hom_max: d_m_max.delay(n),
                d_m_hom_mean: d_m_mean.delay(n),
                d_1_hom_mean: d_1_mean.delay(n),
                d_c_hom_mean: d_c_mean.delay(n),
                gain_dm_rhs,
                conj_one_rhs,
                loose_one_rhs,
                conj_c_rhs,
                loose_c_rhs,
                gain_d1_rhs,
                gain_dc_mid,
                gain_dc_rhs,
                containment: le(dm, d1) && le(d1, dc),
                sandwich: le(d_m_max.delay(n), dm) && le(dm, d_m_mean.delay(n)),
                gain_dm: gain_dm_rhs.map(|rhs| lt(dm, rhs)),
                loose_one: le(dm, d1) && lt(d1, loose_one_rhs),
                loose_c: le(dm, dc) && lt(dc, loose_c_rhs),
                conj_one: le(dm, d1) && lt(d1, conj_one_rhs),
                conj_c: le(dm, dc) && lt(dc, conj_c_rhs),
                gain_d1: lt(d1, gain_d1_rhs),
                gain_dc: gain_dc_mid.map(|mid| lt(dc, mid) && lt(mid, gain_dc_rhs)),
            }
        })
        .collect();

    Ok(BoundReport {
        n0,
        c,
        peers,
        mean_upload: mean,
        max_upload: max,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_conjecture_margin() {
        let h = BandwidthProfile::homogeneous(1.0, 8).unwrap();
        let report = evaluate_bounds(&h, 1, 2, 8).unwrap();
        let r = report.record(8);
        assert_eq!(r.d_1, 3.0);
        let h7: f64 = (1..=7).map(|k| 1.0 / k as f64).sum();
        assert!((r.d_m - h7).abs() < 1e-12);
        assert!((r.conj_one_rhs - (1.0 + h7 / 2f64.ln())).abs() < 1e-12);
        assert!((r.conj_one_rhs - 4.741).abs() < 1e-3);
        assert!(r.conj_one);
        assert!(report.proven_violations().is_empty());
        assert!(report.conjecture_violations().is_empty());
    }

    #[test]
    fn everything_holds_at_n0() {
        let p = BandwidthProfile::new(vec![3.0, 1.0, 0.5, 0.0]).unwrap();
        let report = evaluate_bounds(&p, 2, 3, 6).unwrap();
        let r = report.record(2);
        assert_eq!((r.d_m, r.d_1, r.d_c), (0.0, 0.0, 0.0));
        assert!(r.loose_one && r.loose_c && r.conj_one && r.conj_c && r.gain_d1);
        assert_eq!(r.gain_dm, None);
        assert!(report.proven_violations().is_empty());
    }

    #[test]
    fn worked_example_gain_of_heterogeneity() {
        let p = BandwidthProfile::new(vec![1.6, 0.8, 0.8, 0.8]).unwrap();
        let r = evaluate_bounds(&p, 2, 1, 4).unwrap().record(4).clone();
        assert_eq!(r.d_1, 1.25);
        assert_eq!(r.d_1_hom_mean, 1.0);
        assert!(r.d_1 > r.d_1_hom_mean);
        assert!((r.gain_d1_rhs - 2.0).abs() < 1e-12);
        assert!(r.gain_d1);
    }

    #[test]
    fn gain_dc_is_not_defined_for_c_one() {
        let p = BandwidthProfile::new(vec![2.0, 1.0]).unwrap();
        let report = evaluate_bounds(&p, 1, 1, 2).unwrap();
        assert!(report.records.iter().all(|r| r.gain_dc.is_none()));
        assert!(evaluate_bounds(&p, 1, 0, 2).is_err());
    }
}
