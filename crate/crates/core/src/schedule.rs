//! Phase/step decomposition of the bitonic sorting network.
//!
//! For `n = 2^k` keys the network has `k` phases. Phase `p` sorts every
//! aligned block of `2^p` keys, alternating ascending and descending blocks,
//! and does so in `p` steps whose strides halve from `2^(p-1)` down to 1.
//! The last phase spans the whole array, so the final order is ascending.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported `k`; `2^k` must fit in `usize`.
pub const MAX_LOG2: u32 = usize::BITS - 1;

/// One step of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepSpec {
    /// Phase index in `1..=k`.
    pub phase: u32,
    /// Step index in `1..=phase`; steps run from `phase` down to 1.
    pub step: u32,
    /// Distance between the two keys of every compare-exchange, `2^(step-1)`.
    pub stride: usize,
    /// `2^phase`; the bit of an index at this position selects descending order.
    pub merge_span: usize,
}

impl StepSpec {
    pub fn new(phase: u32, step: u32) -> Result<Self> {
        if phase == 0 || phase > MAX_LOG2 || step == 0 || step > phase {
            return Err(Error::InvalidSize(format!(
                "step {step} of phase {phase} is not part of a bitonic network"
            )));
        }
        Ok(StepSpec {
            phase,
            step,
            stride: 1usize << (step - 1),
            merge_span: 1usize << phase,
        })
    }

    /// Direction of the compare-exchange whose lower index is `i`.
    #[inline]
    pub fn ascending_at(&self, i: usize) -> bool {
        i & self.merge_span == 0
    }
}

/// The full, materialized network for `n = 2^k` keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    k: u32,
    steps: Vec<StepSpec>,
}

impl Schedule {
    /// `log2` of the array length.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Array length the schedule sorts.
    pub fn len(&self) -> usize {
        1usize << self.k
    }

    /// A schedule always covers at least two keys.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn steps(&self) -> &[StepSpec] {
        &self.steps
    }

    /// Steps of phase `p`, in execution order.
    pub fn phase(&self, p: u32) -> &[StepSpec] {
        if p == 0 || p > self.k {
            return &[];
        }
        // phases 1..p-1 contribute (p-1)p/2 steps
        let start = ((p - 1) * p / 2) as usize;
        &self.steps[start..start + p as usize]
    }
}

fn check_log2(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidSize("k must be at least 1".into()));
    }
    if k > MAX_LOG2 {
        return Err(Error::InvalidSize(format!(
            "2^{k} elements do not fit the index type (max k = {MAX_LOG2})"
        )));
    }
    Ok(())
}

/// Builds the schedule for `2^k` keys: phases `1..=k`, each running steps
/// `p, p-1, ..., 1`.
pub fn generate_schedule(k: u32) -> Result<Schedule> {
    check_log2(k)?;
    let mut steps = Vec::with_capacity((k * (k + 1) / 2) as usize);
    for phase in 1..=k {
        for step in (1..=phase).rev() {
            steps.push(StepSpec::new(phase, step)?);
        }
    }
    Ok(Schedule { k, steps })
}

/// `log2(n)` for a power of two `n >= 2`.
pub fn log2_exact(n: usize) -> Result<u32> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidSize(format!(
            "length {n} is not a power of two >= 2"
        )));
    }
    Ok(n.trailing_zeros())
}

/// Compare-exchange triples `(i, j, ascending)` of one step over `n` keys.
#[derive(Debug, Clone)]
pub struct StepPairs {
    spec: StepSpec,
    next: usize,
    n: usize,
}

impl Iterator for StepPairs {
    type Item = (usize, usize, bool);

    fn next(&mut self) -> Option<Self::Item> {
        let mut i = self.next;
        if i & self.spec.stride != 0 {
            i += self.spec.stride;
        }
        if i >= self.n {
            return None;
        }
        self.next = i + 1;
        Some((i, i + self.spec.stride, self.spec.ascending_at(i)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        // lower indices below `next` already emitted
        let lower = self.next.min(self.n);
        let done = (lower >> self.spec.step) * self.spec.stride
            + (lower & (2 * self.spec.stride - 1)).min(self.spec.stride);
        let left = self.n / 2 - done;
        (left, Some(left))
    }
}

impl ExactSizeIterator for StepPairs {}

/// Enumerates the `n/2` compare-exchanges of `spec` in increasing order of
/// the lower index. `i` runs over indices with the stride bit clear and is
/// paired with `i + stride`.
pub fn step_pairs(spec: StepSpec, n: usize) -> Result<StepPairs> {
    let k = log2_exact(n)?;
    if spec.phase > k || spec.step > spec.phase || spec.stride != 1 << (spec.step - 1) {
        return Err(Error::InvalidSize(format!(
            "{spec:?} does not belong to a network over {n} keys"
        )));
    }
    Ok(StepPairs { spec, next: 0, n })
}

/// Closed-form `(rounds, compare_exchanges)` for `2^k` keys:
/// `k(k+1)/2` rounds and `2^k * k(k+1)/4` compare-exchanges.
pub fn predicted_counts(k: u32) -> Result<(u64, u64)> {
    check_log2(k)?;
    let k64 = u64::from(k);
    let rounds = k64 * (k64 + 1) / 2;
    // n/2 compare-exchanges per round
    let half = 1u64 << (k - 1);
    let cx = half.checked_mul(rounds).ok_or_else(|| {
        Error::InvalidSize(format!("compare-exchange count for k = {k} overflows u64"))
    })?;
    Ok((rounds, cx))
}
