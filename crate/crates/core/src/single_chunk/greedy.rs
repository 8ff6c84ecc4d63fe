//! Exact single-chunk delays, generic over the numeric type.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::Scalar;

/// One new copy produced by the greedy diffusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopyEvent<T> {
    /// Time at which the copy is complete.
    pub time: T,
    /// Uploading peer, `None` for the copies handed out by the source.
    pub sender: Option<usize>,
    /// Receiving peer; copy `i` always goes to peer `i` (peers past `N` are dummies).
    pub receiver: usize,
}

/// Next completion a sender can offer.
#[derive(Debug, Clone, Copy)]
struct Pending<T> {
    time: T,
    sender: Option<usize>,
    batch: usize,
    left: usize,
}

impl<T: Scalar> PartialEq for Pending<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Pending<T> {}

impl<T: Scalar> PartialOrd for Pending<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Pending<T> {
    // Reversed so that BinaryHeap pops the earliest time, then the lowest sender.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .partial_cmp(&self.time)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.sender.cmp(&self.sender))
    }
}

/// Greedy finish-time diffusion for the one-to-c model (`parallelism = 1` is
/// one-to-one).
///
/// Every capable peer with positive capacity keeps its `c` connections busy
/// back to back; each batch of `c` copies completes `c/u` seconds after the
/// previous one. The earliest pending completion always goes to the best peer
/// that does not hold the chunk yet. Ties resolve by ascending sender index.
///
/// Returns at most `n_max` events; fewer only when every capable peer has zero
/// capacity (possible for arbitrary sub-systems, never for a valid profile).
pub fn greedy_copies<T: Scalar>(
    uploads: &[T],
    n0: usize,
    parallelism: usize,
    n_max: usize,
) -> Vec<CopyEvent<T>> {
    assert!(parallelism >= 1, "parallelism must be positive");
    let c = T::from_count(parallelism);
    let mut heap: BinaryHeap<Pending<T>> = (0..n0)
        .map(|_| Pending {
            time: T::zero(),
            sender: None,
            batch: 0,
            left: 1,
        })
        .collect();
    let mut capable_at = vec![T::zero(); uploads.len()];
    let mut events = Vec::with_capacity(n_max);

    for receiver in 0..n_max {
        let Some(top) = heap.pop() else { break };
        events.push(CopyEvent {
            time: top.time,
            sender: top.sender,
            receiver,
        });
        if let Some(p) = top.sender {
            if top.left > 1 {
                heap.push(Pending {
                    left: top.left - 1,
                    ..top
                });
            } else {
                let batch = top.batch + 1;
                heap.push(Pending {
                    time: capable_at[p] + T::from_count(batch) * c / uploads[p],
                    sender: Some(p),
                    batch,
                    left: parallelism,
                });
            }
        }
        if receiver < uploads.len() && uploads[receiver] > T::zero() {
            capable_at[receiver] = top.time;
            heap.push(Pending {
                time: top.time + c / uploads[receiver],
                sender: Some(receiver),
                batch: 1,
                left: parallelism,
            });
        }
    }
    events
}

/// Many-to-one delays `D_m(n) = Σ_{k=n0}^{n-1} 1/U_k` for `n = 1..=n_max`,
/// with `U_k = U_N` beyond `N`. `None` if a zero cumulative capacity is hit.
pub fn many_to_one<T: Scalar>(uploads: &[T], n0: usize, n_max: usize) -> Option<Vec<T>> {
    let mut delays = Vec::with_capacity(n_max);
    let mut cumulative = T::zero();
    let mut acc = T::zero();
    for n in 1..=n_max {
        delays.push(acc);
        // Extend U to U_n for the next term.
        if n <= uploads.len() {
            cumulative = cumulative + uploads[n - 1];
        }
        if n >= n0 && n < n_max {
            if cumulative == T::zero() {
                return None;
            }
            acc = acc + T::one() / cumulative;
        }
    }
    Some(delays)
}

/// Time for `n` copies to exist in the sub-system `uploads` (sorted,
/// non-increasing) under the given parallelism (`None` = many-to-one).
/// Infinite when the sub-system cannot make progress.
pub(crate) fn subsystem_delay(uploads: &[f64], parallelism: Option<usize>, n0: usize, n: usize) -> f64 {
    if n == 0 || n <= n0 {
        return 0.0;
    }
    match parallelism {
        None => many_to_one(uploads, n0, n)
            .map(|d| d[n - 1])
            .unwrap_or(f64::INFINITY),
        Some(c) => {
            let events = greedy_copies(uploads, n0, c, n);
            if events.len() < n {
                f64::INFINITY
            } else {
                events[n - 1].time
            }
        }
    }
}
