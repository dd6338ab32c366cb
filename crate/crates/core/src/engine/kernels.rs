// Per-work-item bodies and the sequential step loop shared by the shared-block
// kernel and the plain sequential sort.

use crate::error::Result;
use crate::schedule::{generate_schedule, log2_exact};
use crate::Key;

/// Orders `(a, b)` ascending or descending. Equal keys are left alone.
#[inline(always)]
pub fn compare_exchange(a: &mut Key, b: &mut Key, ascending: bool) {
    let (lo, hi) = if *a <= *b { (*a, *b) } else { (*b, *a) };
    if ascending {
        *a = lo;
        *b = hi;
    } else {
        *a = hi;
        *b = lo;
    }
}

/// Compare-exchanges `lo[t]` with `hi[t]` for every `t`.
#[inline]
pub(crate) fn exchange_halves(lo: &mut [Key], hi: &mut [Key], ascending: bool) -> u64 {
    debug_assert_eq!(lo.len(), hi.len());
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        compare_exchange(a, b, ascending);
    }
    lo.len() as u64
}

/// Runs two steps (strides `2d`, `d`) over four quarter slices of a `4d`
/// group. Returns the number of work items (4-key groups) processed.
#[inline]
pub(crate) fn paired_quarters(
    q0: &mut [Key],
    q1: &mut [Key],
    q2: &mut [Key],
    q3: &mut [Key],
    ascending: bool,
) -> u64 {
    let items = q0.len();
    for (((a, b), c), d) in q0
        .iter_mut()
        .zip(q1.iter_mut())
        .zip(q2.iter_mut())
        .zip(q3.iter_mut())
    {
        let mut r = [*a, *b, *c, *d];
        paired_registers(&mut r, ascending);
        [*a, *b, *c, *d] = r;
    }
    items as u64
}

#[inline(always)]
fn paired_registers(r: &mut [Key; 4], ascending: bool) {
    let [a, b, c, d] = r;
    // stride 2d
    compare_exchange(a, c, ascending);
    compare_exchange(b, d, ascending);
    // stride d
    compare_exchange(a, b, ascending);
    compare_exchange(c, d, ascending);
}

/// One register-paired work item: loads `data[i0 + t*d]` for `t = 0..4`,
/// applies the stride-`2d` step then the stride-`d` step in locals, and
/// stores the four keys back.
///
/// `i0` must have the bits for `d` and `2d` clear, so the four addresses are
/// `i0, i0+d, i0+2d, i0+3d` and all lie in one merge block.
pub fn register_paired_kernel(i0: usize, d: usize, ascending: bool, data: &mut [Key]) {
    debug_assert!(d.is_power_of_two());
    debug_assert_eq!(i0 & (3 * d), 0);
    let idx = [i0, i0 + d, i0 + 2 * d, i0 + 3 * d];
    let mut r = idx.map(|i| data[i]);
    paired_registers(&mut r, ascending);
    for (i, v) in idx.into_iter().zip(r) {
        data[i] = v;
    }
}

/// Runs one step of stride `stride` over `buf`, whose first key sits at
/// global index `base`. Returns the number of compare-exchanges.
pub(crate) fn local_step(buf: &mut [Key], base: usize, stride: usize, merge_span: usize) -> u64 {
    let mut done = 0;
    for (ci, group) in buf.chunks_mut(2 * stride).enumerate() {
        let ascending = (base + ci * 2 * stride) & merge_span == 0;
        let (lo, hi) = group.split_at_mut(stride);
        done += exchange_halves(lo, hi, ascending);
    }
    done
}

/// Plain single-threaded bitonic sort over the whole network; no planning
/// and no counters. `data.len()` must be a power of two `>= 2`.
pub fn sort_sequential(data: &mut [Key]) -> Result<()> {
    let k = log2_exact(data.len())?;
    for step in generate_schedule(k)?.steps() {
        local_step(data, 0, step.stride, step.merge_span);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{step_pairs, StepSpec};
    use proptest::prelude::*;

    #[test]
    fn compare_exchange_directions() {
        let (mut a, mut b) = (5, -3);
        compare_exchange(&mut a, &mut b, true);
        assert_eq!((a, b), (-3, 5));
        compare_exchange(&mut a, &mut b, false);
        assert_eq!((a, b), (5, -3));
    }

    #[test]
    fn reverse_quad_sorts() {
        for d in [1usize, 2, 4] {
            let mut data = vec![0; 4 * d];
            for (t, v) in [4, 3, 2, 1].into_iter().enumerate() {
                data[t * d] = v;
            }
            register_paired_kernel(0, d, true, &mut data);
            let got: Vec<Key> = (0..4).map(|t| data[t * d]).collect();
            assert_eq!(got, vec![1, 2, 3, 4]);
        }
    }

    #[test]
    fn phase3_even_addresses() {
        // phase 3 of n = 8, steps 3 and 2: work item i0 = 0 owns [0,2,4,6]
        let mut data = vec![7, 0, 5, 0, 3, 0, 1, 0];
        register_paired_kernel(0, 2, true, &mut data);
        assert_eq!(data, vec![1, 0, 3, 0, 5, 0, 7, 0]);
    }

    #[test]
    fn sequential_sort_bitonic_sequence_input() {
        let mut data = vec![1, 5, 9, 10, 12, 8, 7, 2];
        sort_sequential(&mut data).unwrap();
        assert_eq!(data, vec![1, 2, 5, 7, 8, 9, 10, 12]);
        assert!(sort_sequential(&mut [1, 2, 3]).is_err());
    }

    fn unfused(data: &mut [Key], phase: u32, step: u32) {
        let n = data.len();
        for s in [step, step - 1] {
            for (i, j, asc) in step_pairs(StepSpec::new(phase, s).unwrap(), n).unwrap() {
                let (x, y) = (data[i], data[j]);
                if (asc && x > y) || (!asc && x < y) {
                    data.swap(i, j);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn paired_kernel_matches_two_unfused_steps(
            seed in prop::collection::vec(any::<i32>(), 16),
            phase in 2u32..=4,
            step_off in 0u32..3,
        ) {
            let step = (phase - step_off.min(phase - 2)).max(2);
            let spec = StepSpec::new(phase, step - 1).unwrap();
            let d = spec.stride;
            let mut fused = seed.clone();
            for i0 in (0..16usize).filter(|i| i & (3 * d) == 0) {
                register_paired_kernel(i0, d, spec.ascending_at(i0), &mut fused);
            }
            let mut reference = seed;
            unfused(&mut reference, phase, step);
            prop_assert_eq!(fused, reference);
        }
    }
}
