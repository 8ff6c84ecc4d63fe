use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{expand_classes, BandwidthProfile, ClassSize, ClassSpec, PeerClass};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    /// Peer count, or a share of `N` in `(0, 1]` when `N` is given.
    pub size: f64,
    pub upload: f64,
}

/// On-disk profile description.
///
/// Either `{"uploads": [...]}` (any order) or
/// `{"classes": [{"size": .., "upload": ..}, ..], "N": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileFile {
    Explicit {
        uploads: Vec<f64>,
    },
    Classes {
        classes: Vec<ClassEntry>,
        #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
}

impl ProfileFile {
    pub fn explicit(profile: &BandwidthProfile) -> Self {
        ProfileFile::Explicit {
            uploads: profile.uploads().to_vec(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidProfile(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Class sizes are read as fractions when `N` is present and every size is
    /// at most 1; otherwise they must be whole peer counts.
    pub fn class_spec(&self) -> Result<Option<ClassSpec>> {
        let ProfileFile::Classes { classes, n } = self else {
            return Ok(None);
        };
        let fractional = n.is_some() && classes.iter().all(|c| c.size <= 1.0);
        let mut out = Vec::with_capacity(classes.len());
        for c in classes {
            let size = if fractional {
                ClassSize::Fraction(c.size)
            } else if c.size >= 1.0 && c.size.fract() == 0.0 {
                ClassSize::Count(c.size as usize)
            } else {
                return Err(Error::InvalidProfile(format!(
                    "class size {} is neither a peer count nor a fraction with N given",
                    c.size
                )));
            };
            out.push(PeerClass {
                size,
                upload: c.upload,
            });
        }
        ClassSpec::new(out)
            .map(Some)
            .map_err(|e| Error::InvalidProfile(e.to_string()))
    }

    pub fn to_profile(&self) -> Result<BandwidthProfile> {
        match self {
            ProfileFile::Explicit { uploads } => BandwidthProfile::from_unsorted(uploads.clone()),
            ProfileFile::Classes { n, .. } => {
                let spec = self.class_spec()?.expect("class variant");
                expand_classes(&spec, *n).map_err(|e| Error::InvalidProfile(e.to_string()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_lists_are_sorted() {
        let f = ProfileFile::from_json(r#"{"uploads":[0.5, 2, 1]}"#).unwrap();
        assert_eq!(f.to_profile().unwrap().uploads(), &[2.0, 1.0, 0.5]);
    }

    #[test]
    fn fractional_classes() {
        let f = ProfileFile::from_json(
            r#"{"classes":[{"size":0.3,"upload":2.92},{"size":0.4,"upload":0.292},{"size":0.3,"upload":0.0292}],"N":100}"#,
        )
        .unwrap();
        let p = f.to_profile().unwrap();
        assert_eq!(p.len(), 100);
        assert_eq!(p.upload(29), 2.92);
        assert_eq!(p.upload(30), 0.292);
    }

    #[test]
    fn counted_classes() {
        let f = ProfileFile::from_json(
            r#"{"classes":[{"size":1,"upload":1.6},{"size":3,"upload":0.8}]}"#,
        )
        .unwrap();
        assert_eq!(f.to_profile().unwrap().uploads(), &[1.6, 0.8, 0.8, 0.8]);
    }

    #[test]
    fn malformed_profiles_are_rejected() {
        assert!(ProfileFile::from_json(r#"{"peers":[1]}"#).is_err());
        assert!(ProfileFile::from_json(r#"{"uploads":[0, 0]}"#)
            .unwrap()
            .to_profile()
            .is_err());
        let f = ProfileFile::from_json(r#"{"classes":[{"size":1.5,"upload":1}]}"#).unwrap();
        assert!(matches!(f.to_profile(), Err(Error::InvalidProfile(_))));
    }
}
