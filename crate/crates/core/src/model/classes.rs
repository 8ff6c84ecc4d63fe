use serde::{Deserialize, Serialize};

use super::BandwidthProfile;
use crate::error::{domain, Error, Result};

/// Size of a bandwidth class: an absolute peer count or a share of `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSize {
    Count(usize),
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeerClass {
    pub size: ClassSize,
    pub upload: f64,
}

/// A class resolved to a concrete population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassPopulation {
    pub count: usize,
    pub upload: f64,
}

/// Peers grouped in classes of common capacity, best class first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    classes: Vec<PeerClass>,
}

impl ClassSpec {
    pub fn new(classes: Vec<PeerClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(domain("class spec has no classes"));
        }
        for c in &classes {
            if !(c.upload.is_finite() && c.upload >= 0.0) {
                return Err(domain(format!("class upload {} is invalid", c.upload)));
            }
        }
        if let Some(i) = classes.windows(2).position(|w| w[0].upload <= w[1].upload) {
            return Err(domain(format!(
                "class uploads must be strictly decreasing (class {} has {}, class {} has {})",
                i + 1,
                classes[i].upload,
                i + 2,
                classes[i + 1].upload
            )));
        }
        if classes[0].upload <= 0.0 {
            return Err(domain("best class has no upload capacity"));
        }
        let fractions = classes
            .iter()
            .filter(|c| matches!(c.size, ClassSize::Fraction(_)))
            .count();
        if fractions != 0 && fractions != classes.len() {
            return Err(domain("class sizes mix counts and fractions"));
        }
        let mut total = 0.0;
        for c in &classes {
            match c.size {
                ClassSize::Count(0) => return Err(domain("class size must be positive")),
                ClassSize::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                    return Err(domain(format!("class fraction {f} outside (0, 1]")))
                }
                ClassSize::Fraction(f) => total += f,
                ClassSize::Count(_) => {}
            }
        }
        if fractions != 0 && (total - 1.0).abs() > 1e-9 {
            return Err(domain(format!("class fractions sum to {total}, not 1")));
        }
        Ok(Self { classes })
    }

    /// Builds a spec from `(fraction, upload)` pairs.
    pub fn from_fractions(classes: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            classes
                .iter()
                .map(|&(f, upload)| PeerClass {
                    size: ClassSize::Fraction(f),
                    upload,
                })
                .collect(),
        )
    }

    /// Builds a spec from `(count, upload)` pairs.
    pub fn from_counts(classes: &[(usize, f64)]) -> Result<Self> {
        Self::new(
            classes
                .iter()
                .map(|&(n, upload)| PeerClass {
                    size: ClassSize::Count(n),
                    upload,
                })
                .collect(),
        )
    }

    pub fn classes(&self) -> &[PeerClass] {
        &self.classes
    }

    pub fn uses_fractions(&self) -> bool {
        matches!(self.classes[0].size, ClassSize::Fraction(_))
    }

    /// Resolves the classes to integer populations.
    ///
    /// Fractions are apportioned to exactly `total` peers with the largest
    /// remainder rule; ties go to the higher-capacity class. For count specs
    /// `total`, when given, must equal the sum of counts.
    pub fn populations(&self, total: Option<usize>) -> Result<Vec<ClassPopulation>> {
        if !self.uses_fractions() {
            let counts: Vec<usize> = self
                .classes
                .iter()
                .map(|c| match c.size {
                    ClassSize::Count(n) => n,
                    ClassSize::Fraction(_) => unreachable!(),
                })
                .collect();
            let sum: usize = counts.iter().sum();
            if let Some(n) = total {
                if n != sum {
                    return Err(domain(format!(
                        "class counts sum to {sum} but N = {n} was requested"
                    )));
                }
            }
            return Ok(self.zip(&counts));
        }

        let n = total.ok_or_else(|| domain("fractional class sizes need a total N"))?;
        if n < self.classes.len() {
            return Err(domain(format!(
                "N = {n} is smaller than the number of classes ({})",
                self.classes.len()
            )));
        }
        let quotas: Vec<f64> = self
            .classes
            .iter()
            .map(|c| match c.size {
                ClassSize::Fraction(f) => f * n as f64,
                ClassSize::Count(_) => unreachable!(),
            })
            .collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| (q + 1e-9).floor() as usize).collect();
        let assigned: usize = counts.iter().sum();
        if assigned > n {
            return Err(domain("rounding class fractions overshoots N"));
        }
        let mut order: Vec<usize> = (0..counts.len()).collect();
        // Stable sort keeps the higher-capacity class first among equal remainders.
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - counts[a] as f64;
            let rb = quotas[b] - counts[b] as f64;
            rb.total_cmp(&ra)
        });
        let missing = n - assigned;
        if missing > order.len() {
            return Err(domain("rounding class fractions cannot reach N"));
        }
        for &i in order.iter().take(missing) {
            counts[i] += 1;
        }
        if let Some(i) = counts.iter().position(|&c| c == 0) {
            return Err(domain(format!("class {} rounds to zero peers at N = {n}", i + 1)));
        }
        Ok(self.zip(&counts))
    }

    fn zip(&self, counts: &[usize]) -> Vec<ClassPopulation> {
        self.classes
            .iter()
            .zip(counts)
            .map(|(c, &count)| ClassPopulation {
                count,
                upload: c.upload,
            })
            .collect()
    }
}

/// Expands a class spec into a sorted profile of `total` peers (see
/// [`ClassSpec::populations`] for the rounding rule).
pub fn expand_classes(spec: &ClassSpec, total: Option<usize>) -> Result<BandwidthProfile> {
    let pops = spec.populations(total)?;
    let uploads = pops
        .iter()
        .flat_map(|p| std::iter::repeat_n(p.upload, p.count))
        .collect();
    BandwidthProfile::new(uploads).map_err(|e| match e {
        Error::InvalidProfile(m) => domain(m),
        other => other,
    })
}

/// The three reference distributions, all with average capacity close to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Homogeneous, every peer uploads 1 chunk/s.
    H0,
    /// Three equal classes with a capacity range of 10.
    H1,
    /// Three classes (30/40/30 %) with a capacity range of 100.
    H2,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::H0, Preset::H1, Preset::H2];

    pub fn spec(&self) -> ClassSpec {
        let classes: &[(f64, f64)] = match self {
            Preset::H0 => &[(1.0, 1.0)],
            // "33%" each: read as a third of the population per class.
            Preset::H1 => &[(1.0 / 3.0, 2.22), (1.0 / 3.0, 0.56), (1.0 / 3.0, 0.222)],
            Preset::H2 => &[(0.3, 2.92), (0.4, 0.292), (0.3, 0.0292)],
        };
        ClassSpec::from_fractions(classes).expect("preset specs are valid")
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::H0 => "H0",
            Preset::H1 => "H1",
            Preset::H2 => "H2",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "H0" => Some(Preset::H0),
            "H1" => Some(Preset::H1),
            "H2" => Some(Preset::H2),
            _ => None,
        }
    }

    pub fn profile(&self, peers: usize) -> Result<BandwidthProfile> {
        expand_classes(&self.spec(), Some(peers))
    }
}
