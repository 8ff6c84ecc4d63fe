//! Closed-form approximations of the many-to-one delay.
//!
//! Every value here is an approximation and is labelled as such; bound checks
//! always use the exact curves.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::ClassPopulation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomogeneousApprox {
    /// Exact harmonic form `(1/u) Σ_{k=n0}^{n-1} 1/k`.
    pub harmonic: f64,
    /// `ln(n/n0)/u`, the large-`n` approximation.
    pub log: f64,
}

/// Many-to-one delay of a homogeneous system of capacity `u`, for `n <= N`.
pub fn approx_homogeneous_dm(upload: f64, n0: usize, n: usize) -> Result<HomogeneousApprox> {
    if !(upload > 0.0 && upload.is_finite()) {
        return Err(domain(format!("homogeneous capacity must be positive, got {upload}")));
    }
    if n0 == 0 || n < n0 {
        return Err(domain(format!("need n >= n0 >= 1 (n = {n}, n0 = {n0})")));
    }
    let harmonic: f64 = (n0..n).map(|k| 1.0 / k as f64).sum::<f64>() / upload;
    Ok(HomogeneousApprox {
        harmonic,
        log: (n as f64 / n0 as f64).ln() / upload,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassApprox {
    /// Approximate delay to fill the first class, `ln(n_1/n0)/u_1`.
    pub first_class: f64,
    /// Approximate time `D_{i-1 -> i}` to fill class `i` once all better
    /// classes hold the chunk, for `i = 2..=l`.
    pub transitions: Vec<f64>,
    pub total: f64,
}

fn check_classes(classes: &[ClassPopulation], n0: usize) -> Result<()> {
    let first = classes.first().ok_or_else(|| domain("no classes given"))?;
    if n0 == 0 {
        return Err(domain("n0 must be at least 1"));
    }
    if n0 > first.count {
        return Err(domain(format!(
            "class approximation needs n0 <= n_1 (n0 = {n0}, n_1 = {})",
            first.count
        )));
    }
    if !(first.upload > 0.0) {
        return Err(domain("first class has no upload capacity"));
    }
    if classes.iter().any(|c| c.count == 0) {
        return Err(domain("class populations must be positive"));
    }
    Ok(())
}

/// Class-chain approximation
/// `D_m(N) ≈ ln(n_1/n0)/u_1 + Σ_{i>=2} ln(1 + n_i u_i / Σ_{j<i} n_j u_j) / u_i`.
///
/// A zero-capacity class contributes its limit `n_i / Σ_{j<i} n_j u_j`.
pub fn approx_classes_dm(classes: &[ClassPopulation], n0: usize) -> Result<ClassApprox> {
    check_classes(classes, n0)?;
    let first = classes[0];
    let first_class = (first.count as f64 / n0 as f64).ln() / first.upload;
    let mut capacity = first.count as f64 * first.upload;
    let mut transitions = Vec::with_capacity(classes.len() - 1);
    for c in &classes[1..] {
        let added = c.count as f64 * c.upload;
        let t = if c.upload > 0.0 {
            (added / capacity).ln_1p() / c.upload
        } else {
            c.count as f64 / capacity
        };
        transitions.push(t);
        capacity += added;
    }
    let total = first_class + transitions.iter().sum::<f64>();
    Ok(ClassApprox {
        first_class,
        transitions,
        total,
    })
}

/// Simplification for a dominant first class:
/// `D_m(N) ≈ ln(n_1/n0)/u_1 + Σ_{i>=2} n_i / Σ_{j<i} n_j u_j`.
pub fn approx_dominant_class(classes: &[ClassPopulation], n0: usize) -> Result<ClassApprox> {
    check_classes(classes, n0)?;
    let first = classes[0];
    let first_class = (first.count as f64 / n0 as f64).ln() / first.upload;
    let mut capacity = first.count as f64 * first.upload;
    let mut transitions = Vec::with_capacity(classes.len() - 1);
    for c in &classes[1..] {
        transitions.push(c.count as f64 / capacity);
        capacity += c.count as f64 * c.upload;
    }
    let total = first_class + transitions.iter().sum::<f64>();
    Ok(ClassApprox {
        first_class,
        transitions,
        total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeRiderApprox {
    /// `ln(min(n, n_1)/n0)/u + max(n - n_1, 0)/(N u)`, as printed.
    pub value: f64,
    /// Same expression with `n_1 u` as the linear-term denominator, which is
    /// what the dominant-class form gives for a free-rider second class.
    pub dominant_class_variant: f64,
    /// Set when the two denominators differ for this input.
    pub denominator_mismatch: bool,
}

/// Two-class approximation with a contributing class of `n_1` peers at
/// capacity `u` and `N - n_1` free-riders.
pub fn approx_free_riders(
    n1: usize,
    upload: f64,
    peers: usize,
    n0: usize,
    n: usize,
) -> Result<FreeRiderApprox> {
    if !(upload > 0.0 && upload.is_finite()) {
        return Err(domain(format!("capacity must be positive, got {upload}")));
    }
    if n0 == 0 || n1 < n0 || n1 > peers || n < n0 {
        return Err(domain(format!(
            "need 1 <= n0 <= n_1 <= N and n >= n0 (n0 = {n0}, n_1 = {n1}, N = {peers}, n = {n})"
        )));
    }
    let log_part = (n.min(n1) as f64 / n0 as f64).ln() / upload;
    let excess = n.saturating_sub(n1) as f64;
    let value = log_part + excess / (peers as f64 * upload);
    let dominant_class_variant = log_part + excess / (n1 as f64 * upload);
    Ok(FreeRiderApprox {
        value,
        dominant_class_variant,
        denominator_mismatch: excess > 0.0 && n1 != peers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;

    fn pops(p: Preset) -> Vec<ClassPopulation> {
        p.spec().populations(Some(10_000)).unwrap()
    }

    #[test]
    fn homogeneous_forms() {
        let a = approx_homogeneous_dm(1.0, 1, 1).unwrap();
        assert_eq!(a.harmonic, 0.0);
        assert_eq!(a.log, 0.0);
        let b = approx_homogeneous_dm(2.0, 1, 2).unwrap();
        assert_eq!(b.harmonic, 0.5);
        assert!((b.log - 2f64.ln() / 2.0).abs() < 1e-15);
        assert!(approx_homogeneous_dm(0.0, 1, 2).is_err());
        assert!(approx_homogeneous_dm(1.0, 3, 2).is_err());
    }

    #[test]
    fn homogeneous_harmonic_at_table_size() {
        // H_9999 - H_4 by summing in the opposite order.
        let oracle: f64 = (5..10_000).rev().map(|k| 1.0 / k as f64).sum();
        let a = approx_homogeneous_dm(1.0, 5, 10_000).unwrap();
        assert!((a.harmonic - oracle).abs() < 1e-12);
        assert!((a.harmonic - 7.704).abs() < 5e-4);
    }

    #[test]
    fn single_class_reduces_to_log() {
        let classes = [ClassPopulation { count: 40, upload: 2.0 }];
        let a = approx_classes_dm(&classes, 5).unwrap();
        assert!(a.transitions.is_empty());
        assert!((a.total - (8f64).ln() / 2.0).abs() < 1e-15);
        let d = approx_dominant_class(&classes, 5).unwrap();
        assert_eq!(d.total, a.total);
    }

    #[test]
    fn class_approximation_on_presets() {
        let h1 = approx_classes_dm(&pops(Preset::H1), 5).unwrap();
        assert!((h1.total - 3.72).abs() / 3.72 < 0.02, "{}", h1.total);
        let h2 = approx_classes_dm(&pops(Preset::H2), 5).unwrap();
        // Hand evaluation of the chain at the preset populations.
        let expect = (600f64).ln() / 2.92
            + (1168.0f64 / 8760.0).ln_1p() / 0.292
            + (87.6f64 / 9928.0).ln_1p() / 0.0292;
        assert!((h2.total - expect).abs() < 1e-9);
        assert_eq!(h2.transitions.len(), 2);
    }

    #[test]
    fn dominant_class_terms() {
        let classes = [
            ClassPopulation { count: 1_000_000, upload: 1.0 },
            ClassPopulation { count: 10, upload: 1.0 },
        ];
        let d = approx_dominant_class(&classes, 1).unwrap();
        assert!((d.transitions[0] - 10.0 / 1e6).abs() < 1e-18);
        let h1 = pops(Preset::H1);
        let full = approx_classes_dm(&h1, 5).unwrap().total;
        let dom = approx_dominant_class(&h1, 5).unwrap().total;
        assert!((dom - full).abs() / full < 0.5);
    }

    #[test]
    fn class_hypothesis_checked() {
        let classes = [ClassPopulation { count: 3, upload: 2.0 }];
        assert!(approx_classes_dm(&classes, 4).is_err());
        assert!(approx_dominant_class(&[], 1).is_err());
    }

    #[test]
    fn free_riders() {
        let a = approx_free_riders(50, 1.0, 100, 5, 40).unwrap();
        assert!((a.value - 8f64.ln()).abs() < 1e-15);
        assert!(!a.denominator_mismatch);
        let n = 10_000;
        let b = approx_free_riders(n / 2, 1.0, n, 1, n).unwrap();
        assert!((b.value - ((n as f64 / 2.0).ln() + 0.5)).abs() < 1e-12);
        assert!((b.dominant_class_variant - ((n as f64 / 2.0).ln() + 1.0)).abs() < 1e-12);
        assert!(b.denominator_mismatch);
        assert_eq!(approx_free_riders(10, 1.0, 20, 3, 3).unwrap().value, 0.0);
    }
}
