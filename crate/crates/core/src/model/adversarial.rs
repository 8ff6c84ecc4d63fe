use super::BandwidthProfile;
use crate::error::{domain, Result};

/// Feasible over-provisioned system whose stream delay grows linearly in `N`.
///
/// One peer uploads `(N - n0 - 1)s`; the `N - 1` others share the remaining
/// `(n0 + V + 1)s`. The source and the fast peer together fall short of the
/// `N·s` needed, so slow peers must relay some chunks.
pub fn generate_adversarial(
    peers: usize,
    n0: usize,
    excess: f64,
    rate: f64,
) -> Result<BandwidthProfile> {
    if n0 == 0 {
        return Err(domain("n0 must be at least 1"));
    }
    if peers <= n0 + 1 {
        return Err(domain(format!(
            "adversarial construction needs N > n0 + 1 (N = {peers}, n0 = {n0})"
        )));
    }
    if !(excess.is_finite() && excess >= 0.0) {
        return Err(domain(format!("excess bandwidth V must be >= 0, got {excess}")));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(domain(format!("stream rate must be positive, got {rate}")));
    }
    let fast = (peers - n0 - 1) as f64 * rate;
    let slow = (n0 as f64 + excess + 1.0) * rate / (peers - 1) as f64;
    let mut uploads = Vec::with_capacity(peers);
    uploads.push(fast);
    uploads.extend(std::iter::repeat_n(slow, peers - 1));
    BandwidthProfile::from_unsorted(uploads)
}
