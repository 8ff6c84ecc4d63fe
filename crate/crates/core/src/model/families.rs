//! Random profile families used by the property suites and `gen --family`.

use rand::Rng;
use rand_distr::{Distribution, Exp, Pareto};
use serde::{Deserialize, Serialize};

use super::BandwidthProfile;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Homogeneous,
    Uniform,
    Exponential,
    /// Pareto with shape in `[1.1, 3)`.
    PowerLaw,
    TwoClass,
    /// A contributing class and a zero-capacity class.
    FreeRiders,
    /// Two to four classes with random shares and capacities.
    Classes,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Homogeneous,
        Family::Uniform,
        Family::Exponential,
        Family::PowerLaw,
        Family::TwoClass,
        Family::FreeRiders,
        Family::Classes,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Homogeneous => "homogeneous",
            Family::Uniform => "uniform",
            Family::Exponential => "exponential",
            Family::PowerLaw => "power-law",
            Family::TwoClass => "two-class",
            Family::FreeRiders => "free-riders",
            Family::Classes => "classes",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, peers: usize) -> Result<BandwidthProfile> {
        if peers == 0 {
            return Err(domain("a profile needs at least one peer"));
        }
        let mut uploads: Vec<f64> = match self {
            Family::Homogeneous => vec![rng.random_range(0.1..4.0); peers],
            Family::Uniform => (0..peers).map(|_| rng.random_range(0.0..2.0)).collect(),
            Family::Exponential => {
                let exp = Exp::new(1.0).expect("positive rate");
                (0..peers).map(|_| exp.sample(rng)).collect()
            }
            Family::PowerLaw => {
                let shape = rng.random_range(1.1..3.0);
                let pareto = Pareto::new(0.2, shape).expect("positive parameters");
                (0..peers).map(|_| pareto.sample(rng)).collect()
            }
            Family::TwoClass => {
                let fast = rng.random_range(1.0..10.0);
                let slow = fast * rng.random_range(0.01..1.0);
                let n_fast = rng.random_range(1..=peers);
                (0..peers)
                    .map(|i| if i < n_fast { fast } else { slow })
                    .collect()
            }
            Family::FreeRiders => {
                let u = rng.random_range(0.5..3.0);
                let n_fast = rng.random_range(1..=peers);
                (0..peers).map(|i| if i < n_fast { u } else { 0.0 }).collect()
            }
            Family::Classes => {
                let classes = rng.random_range(2..=4usize);
                let caps: Vec<f64> = (0..classes).map(|_| rng.random_range(0.0..5.0)).collect();
                (0..peers)
                    .map(|_| caps[rng.random_range(0..classes)])
                    .collect()
            }
        };
        if uploads.iter().all(|u| *u <= 0.0) {
            uploads[0] = 1.0;
        }
        BandwidthProfile::from_unsorted(uploads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn families_produce_valid_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for family in Family::ALL {
            for n in [1, 2, 17, 200] {
                let p = family.sample(&mut rng, n).unwrap();
                assert_eq!(p.len(), n);
                assert!(p.max() > 0.0);
            }
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let a = Family::PowerLaw.sample(&mut ChaCha8Rng::seed_from_u64(3), 50).unwrap();
        let b = Family::PowerLaw.sample(&mut ChaCha8Rng::seed_from_u64(3), 50).unwrap();
        assert_eq!(a, b);
        assert_eq!(Family::parse("free-riders"), Some(Family::FreeRiders));
    }
}
