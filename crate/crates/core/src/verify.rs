//! Correctness oracles: the CPU quicksort baseline, 0-1 principle checks of
//! the network, and output validation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::schedule::{generate_schedule, step_pairs};
use crate::Key;

/// Slices at or below this length are finished with insertion sort.
const INSERTION_CUTOFF: usize = 16;

/// Largest `k` checked exhaustively by [`check_zero_one`]; `2^(2^4)` inputs.
pub const EXHAUSTIVE_MAX_K: u32 = 4;
/// Largest `k` whose binary vectors fit a `u64` mask.
pub const ZERO_ONE_MAX_K: u32 = 6;
const SAMPLES: u64 = 1 << 16;
const SAMPLE_SEED: u64 = 0x0b17_0a1c;

/// Sorts ascending in place: median-of-three quicksort with an insertion
/// sort cutoff and a heapsort fallback once recursion depth exceeds
/// `2 * log2(n)`.
pub fn reference_quicksort(data: &mut [Key]) {
    let depth = 2 * data.len().max(1).ilog2();
    quicksort(data, depth);
}

fn quicksort(mut v: &mut [Key], mut depth: u32) {
    loop {
        let len = v.len();
        if len <= INSERTION_CUTOFF {
            insertion_sort(v);
            return;
        }
        if depth == 0 {
            heapsort(v);
            return;
        }
        depth -= 1;

        let (mid, last) = (len / 2, len - 1);
        if v[mid] < v[0] {
            v.swap(mid, 0);
        }
        if v[last] < v[0] {
            v.swap(last, 0);
        }
        if v[last] < v[mid] {
            v.swap(last, mid);
        }
        v.swap(0, mid);
        let pivot = v[0];

        let i = partition(&mut v[1..], |x| x < pivot);
        if i == 0 {
            // nothing below the pivot: peel off the run of keys equal to it
            let eq = partition(&mut v[1..], |x| x <= pivot);
            v = &mut v[eq + 1..];
            continue;
        }
        // keys below the pivot occupy 1..=i; the pivot moves to i
        v.swap(0, i);

        let (left, rest) = v.split_at_mut(i);
        let right = &mut rest[1..];
        if left.len() < right.len() {
            quicksort(left, depth);
            v = right;
        } else {
            quicksort(right, depth);
            v = left;
        }
    }
}

/// Branchless Lomuto partition: moves keys satisfying `below` to the front
/// and returns how many there are.
#[inline]
fn partition(v: &mut [Key], below: impl Fn(Key) -> bool) -> usize {
    let mut lt = 0;
    for i in 0..v.len() {
        let take = below(v[i]);
        v.swap(lt, i);
        lt += take as usize;
    }
    lt
}

fn insertion_sort(v: &mut [Key]) {
    for i in 1..v.len() {
        let x = v[i];
        let mut j = i;
        while j > 0 && v[j - 1] > x {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = x;
    }
}

fn heapsort(v: &mut [Key]) {
    fn sift_down(v: &mut [Key], mut root: usize, end: usize) {
        loop {
            let mut child = 2 * root + 1;
            if child >= end {
                return;
            }
            if child + 1 < end && v[child] < v[child + 1] {
                child += 1;
            }
            if v[root] >= v[child] {
                return;
            }
            v.swap(root, child);
            root = child;
        }
    }
    let len = v.len();
    for root in (0..len / 2).rev() {
        sift_down(v, root, len);
    }
    for end in (1..len).rev() {
        v.swap(0, end);
        sift_down(v, 0, end);
    }
}

/// Compare-exchange list of the full network for `2^k` keys.
fn network(k: u32) -> Vec<(usize, usize, bool)> {
    let schedule = generate_schedule(k).expect("k validated by caller");
    let n = schedule.len();
    schedule
        .steps()
        .iter()
        .flat_map(|&s| step_pairs(s, n).expect("step from own schedule"))
        .collect()
}

// Bit i of `bits` is key i; ascending order puts zeros first.
fn sorts_binary(net: &[(usize, usize, bool)], n: usize, mut bits: u64) -> bool {
    let ones = bits.count_ones();
    for &(i, j, asc) in net {
        let (a, b) = ((bits >> i) & 1, (bits >> j) & 1);
        if a != b && ((a == 1) == asc) {
            bits ^= (1 << i) | (1 << j);
        }
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let expected = if ones == 0 {
        0
    } else {
        full & !((1u64 << (n as u32 - ones)) - 1)
    };
    bits == expected
}

/// 0-1 principle check of the network for `2^k` keys. Exhaustive for
/// `k <= 4`; for `k = 5, 6` a fixed-seed sample of 65536 binary inputs.
/// Returns false for `k` outside `1..=6`.
pub fn check_zero_one(k: u32) -> bool {
    if k == 0 || k > ZERO_ONE_MAX_K {
        return false;
    }
    let n = 1usize << k;
    let net = network(k);
    if k <= EXHAUSTIVE_MAX_K {
        (0..1u64 << n).all(|bits| sorts_binary(&net, n, bits))
    } else {
        check_zero_one_sampled(k, SAMPLES, SAMPLE_SEED)
    }
}

/// Randomized 0-1 check with `samples` uniformly drawn binary vectors.
pub fn check_zero_one_sampled(k: u32, samples: u64, seed: u64) -> bool {
    if k == 0 || k > ZERO_ONE_MAX_K {
        return false;
    }
    let n = 1usize << k;
    let net = network(k);
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).all(|_| sorts_binary(&net, n, rng.gen::<u64>() & mask))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub sorted_ok: bool,
    pub permutation_ok: bool,
    /// First `i` with `output[i] > output[i + 1]`.
    pub first_violation_index: Option<usize>,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.sorted_ok && self.permutation_ok
    }
}

/// Checks that `output` is non-decreasing and holds the same multiset as
/// `input`.
pub fn validate(output: &[Key], input: &[Key]) -> VerificationReport {
    let first_violation_index = output.windows(2).position(|w| w[0] > w[1]);
    let permutation_ok = output.len() == input.len() && {
        let mut a = output.to_vec();
        let mut b = input.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    };
    VerificationReport {
        sorted_ok: first_violation_index.is_none(),
        permutation_ok,
        first_violation_index,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qs(mut v: Vec<Key>) -> Vec<Key> {
        reference_quicksort(&mut v);
        v
    }

    #[test]
    fn quicksort_examples() {
        assert_eq!(
            qs(vec![1, 5, 9, 10, 12, 8, 7, 2]),
            vec![1, 2, 5, 7, 8, 9, 10, 12]
        );
        assert_eq!(qs(vec![]), Vec::<Key>::new());
        assert_eq!(qs(vec![42; 1000]), vec![42; 1000]);
    }

    #[test]
    fn quicksort_adversarial_shapes() {
        let n = 5000;
        let shapes: Vec<Vec<Key>> = vec![
            (0..n).collect(),
            (0..n).rev().collect(),
            (0..n).map(|i| i % 3).collect(),
            (0..n).map(|i| if i % 2 == 0 { i } else { n - i }).collect(),
            (0..n)
                .map(|i| [Key::MIN, Key::MAX, 0][i as usize % 3])
                .collect(),
        ];
        for v in shapes {
            let mut expected = v.clone();
            expected.sort();
            assert_eq!(qs(v), expected);
        }
    }

    #[test]
    fn heapsort_fallback_sorts() {
        let mut v: Vec<Key> = (0..300).map(|i| (i * 7919) % 301 - 150).collect();
        let mut expected = v.clone();
        expected.sort();
        quicksort(&mut v, 0);
        assert_eq!(v, expected);
    }

    #[test]
    fn zero_one_small_networks() {
        for k in 1..=4 {
            assert!(check_zero_one(k), "k={k}");
        }
        assert!(check_zero_one(5));
        assert!(!check_zero_one(0));
    }

    #[test]
    fn zero_one_detects_broken_network() {
        // drop the last comparator of the k=3 network
        let mut net = network(3);
        net.pop();
        assert!(!(0..256u64).all(|bits| sorts_binary(&net, 8, bits)));
    }

    #[test]
    fn validate_examples() {
        assert_eq!(
            validate(&[1, 2, 3], &[3, 1, 2]),
            VerificationReport {
                sorted_ok: true,
                permutation_ok: true,
                first_violation_index: None
            }
        );
        assert_eq!(
            validate(&[1, 3, 2], &[3, 1, 2]),
            VerificationReport {
                sorted_ok: false,
                permutation_ok: true,
                first_violation_index: Some(1)
            }
        );
        assert_eq!(
            validate(&[1, 2, 4], &[3, 1, 2]),
            VerificationReport {
                sorted_ok: true,
                permutation_ok: false,
                first_violation_index: None
            }
        );
    }

    proptest! {
        #[test]
        fn quicksort_agrees_with_std(v in prop::collection::vec(any::<i32>(), 0..600)) {
            let mut expected = v.clone();
            expected.sort();
            prop_assert_eq!(qs(v), expected);
        }

        #[test]
        fn violation_index_points_at_descent(v in prop::collection::vec(-5i32..5, 0..40)) {
            let r = validate(&v, &v);
            prop_assert!(r.permutation_ok);
            match r.first_violation_index {
                Some(i) => prop_assert!(!r.sorted_ok && v[i] > v[i + 1]),
                None => prop_assert!(r.sorted_ok),
            }
        }
    }
}
