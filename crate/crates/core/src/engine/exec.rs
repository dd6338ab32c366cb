use crate::engine::kernels::{exchange_halves, local_step, paired_quarters};
use crate::engine::par::{self, GRAIN};
use crate::engine::{Counters, Launch, LaunchKind, LaunchPlan};
use crate::error::{Error, Result};
use crate::Key;

/// Runs launch plans over key arrays.
///
/// With the `parallel` feature the engine owns a rayon pool of `workers`
/// threads; launches run one after the other and each launch's work items
/// are spread over the pool. Without the feature `workers` is recorded but
/// everything runs on the calling thread.
pub struct Engine {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: rayon::ThreadPool,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("workers", &self.workers)
            .finish()
    }
}

impl Engine {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        #[cfg(feature = "parallel")]
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("bitonic-worker-{i}"))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Engine {
            workers,
            #[cfg(feature = "parallel")]
            pool,
        })
    }

    /// Engine sized to the machine's available parallelism.
    pub fn with_available_parallelism() -> Result<Self> {
        Engine::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Sorts `data` in place by running every launch of `plan`, with a full
    /// barrier between launches. Returns counters tallied from the work items
    /// actually executed.
    pub fn execute(&self, plan: &LaunchPlan, data: &mut [Key]) -> Result<Counters> {
        if data.len() != plan.len() {
            return Err(Error::InvalidSize(format!(
                "plan sorts {} keys but the array holds {}",
                plan.len(),
                data.len()
            )));
        }
        #[cfg(feature = "parallel")]
        let counters = self.pool.install(|| run_plan(plan, data));
        #[cfg(not(feature = "parallel"))]
        let counters = run_plan(plan, data);
        Ok(counters)
    }
}

fn run_plan(plan: &LaunchPlan, data: &mut [Key]) -> Counters {
    plan.launches.iter().map(|l| run_launch(l, data)).sum()
}

fn run_launch(launch: &Launch, data: &mut [Key]) -> Counters {
    let n = data.len() as u64;
    match launch.kind {
        LaunchKind::GlobalStep => {
            let pairs = global_step(data, launch.steps[0].stride, launch.steps[0].merge_span);
            Counters {
                kernel_launches: 1,
                global_reads: 2 * pairs,
                global_writes: 2 * pairs,
                compare_exchanges: pairs,
            }
        }
        LaunchKind::RegisterPairedStep => {
            let d = launch.steps[1].stride;
            let items = paired_step(data, d, launch.steps[0].merge_span);
            Counters {
                kernel_launches: 1,
                global_reads: 4 * items,
                global_writes: 4 * items,
                compare_exchanges: 4 * items,
            }
        }
        LaunchKind::SharedFusedBlock => {
            let cap = launch.block_capacity;
            let steps = &launch.steps;
            let cx = par::chunks_with_scratch(data, cap, |bi, block, buf| {
                buf.clear();
                buf.extend_from_slice(block);
                let done: u64 = steps
                    .iter()
                    .map(|s| local_step(buf, bi * cap, s.stride, s.merge_span))
                    .sum();
                block.copy_from_slice(buf);
                done
            });
            Counters {
                kernel_launches: 1,
                global_reads: n,
                global_writes: n,
                compare_exchanges: cx,
            }
        }
    }
}

// Groups of 2*stride keys share a direction because merge_span >= 2*stride.
fn global_step(data: &mut [Key], stride: usize, merge_span: usize) -> u64 {
    let span = 2 * stride;
    if span > GRAIN {
        data.chunks_mut(span)
            .enumerate()
            .map(|(ci, group)| {
                let ascending = (ci * span) & merge_span == 0;
                let (lo, hi) = group.split_at_mut(stride);
                par::zip2(lo, hi, GRAIN / 2, |a, b| exchange_halves(a, b, ascending))
            })
            .sum()
    } else {
        par::chunks(data, GRAIN, |gi, chunk| {
            local_step(chunk, gi * GRAIN, stride, merge_span)
        })
    }
}

fn paired_step(data: &mut [Key], d: usize, merge_span: usize) -> u64 {
    let span = 4 * d;
    let quad = |base: usize, group: &mut [Key], grain: Option<usize>| -> u64 {
        let ascending = base & merge_span == 0;
        let (lo, hi) = group.split_at_mut(2 * d);
        let (q0, q1) = lo.split_at_mut(d);
        let (q2, q3) = hi.split_at_mut(d);
        match grain {
            Some(g) => par::zip4([q0, q1, q2, q3], g, |a, b, c, e| {
                paired_quarters(a, b, c, e, ascending)
            }),
            None => paired_quarters(q0, q1, q2, q3, ascending),
        }
    };
    if span > GRAIN {
        data.chunks_mut(span)
            .enumerate()
            .map(|(ci, group)| quad(ci * span, group, Some(GRAIN / 4)))
            .sum()
    } else {
        par::chunks(data, GRAIN, |gi, chunk| {
            chunk
                .chunks_mut(span)
                .enumerate()
                .map(|(ci, group)| quad(gi * GRAIN + ci * span, group, None))
                .sum()
        })
    }
}

/// Checks that no index is touched by two work items of the same launch
/// sub-step, by enumerating each launch's work items the way the executor
/// partitions them.
pub fn audit_disjoint(plan: &LaunchPlan) -> Result<()> {
    let n = plan.len();
    let mut owner = vec![usize::MAX; n];
    for (li, launch) in plan.launches.iter().enumerate() {
        let items: Vec<Vec<usize>> = match launch.kind {
            LaunchKind::GlobalStep => {
                let s = launch.steps[0].stride;
                (0..n)
                    .filter(|i| i & s == 0)
                    .map(|i| vec![i, i + s])
                    .collect()
            }
            LaunchKind::RegisterPairedStep => {
                let d = launch.steps[1].stride;
                (0..n)
                    .filter(|i| i & (3 * d) == 0)
                    .map(|i| vec![i, i + d, i + 2 * d, i + 3 * d])
                    .collect()
            }
            LaunchKind::SharedFusedBlock => {
                let cap = launch.block_capacity;
                if let Some(s) = launch.steps.iter().find(|s| 2 * s.stride > cap) {
                    return Err(Error::Config(format!(
                        "launch {li}: stride {} escapes a {cap}-key block",
                        s.stride
                    )));
                }
                (0..n / cap)
                    .map(|b| (b * cap..(b + 1) * cap).collect())
                    .collect()
            }
        };
        owner.fill(usize::MAX);
        for (w, item) in items.iter().enumerate() {
            for &i in item {
                if i >= n {
                    return Err(Error::Config(format!(
                        "launch {li}: index {i} out of range"
                    )));
                }
                if owner[i] != usize::MAX {
                    return Err(Error::Config(format!(
                        "launch {li}: index {i} shared by work items {} and {w}",
                        owner[i]
                    )));
                }
                owner[i] = w;
            }
        }
        if owner.contains(&usize::MAX) {
            return Err(Error::Config(format!("launch {li} leaves keys untouched")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{account, build_plan, dry_run, Strategy};
    use crate::schedule::generate_schedule;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> Vec<Key> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen()).collect()
    }

    #[test]
    fn bitonic_sequence_input_all_strategies() {
        let engine = Engine::new(2).unwrap();
        let s = generate_schedule(3).unwrap();
        for strategy in Strategy::ALL {
            for cap in [2, 4, 8] {
                let plan = build_plan(&s, strategy, cap).unwrap();
                let mut data = vec![1, 5, 9, 10, 12, 8, 7, 2];
                engine.execute(&plan, &mut data).unwrap();
                assert_eq!(data, vec![1, 2, 5, 7, 8, 9, 10, 12]);
            }
        }
    }

    #[test]
    fn sorted_input_is_fixed_point() {
        let engine = Engine::new(1).unwrap();
        for k in [1, 5, 15] {
            let s = generate_schedule(k).unwrap();
            let plan = build_plan(&s, Strategy::Fused, 2).unwrap();
            let sorted: Vec<Key> = (0..1 << k).map(|i| i as Key - 100).collect();
            let mut data = sorted.clone();
            engine.execute(&plan, &mut data).unwrap();
            assert_eq!(data, sorted);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let plan = build_plan(&generate_schedule(3).unwrap(), Strategy::Baseline, 2).unwrap();
        let mut data = vec![0; 16];
        assert!(matches!(
            Engine::new(1).unwrap().execute(&plan, &mut data),
            Err(Error::InvalidSize(_))
        ));
        assert!(Engine::new(0).is_err());
    }

    #[test]
    fn measured_counters_match_accounting() {
        let engine = Engine::new(3).unwrap();
        // 17 exercises the span > GRAIN branches
        for k in [1, 2, 4, 9, 17] {
            let s = generate_schedule(k).unwrap();
            for b in [1, k.min(4), k.min(10)] {
                for strategy in Strategy::ALL {
                    let plan = build_plan(&s, strategy, 1 << b).unwrap();
                    let mut data = random(1 << k, u64::from(k * 100 + b));
                    let measured = engine.execute(&plan, &mut data).unwrap();
                    assert_eq!(measured, dry_run(&plan), "k={k} b={b} {strategy}");
                    let per_launch: Counters =
                        plan.launches.iter().map(|l| account(l, 1 << k)).sum();
                    assert_eq!(measured, per_launch);
                    assert!(data.windows(2).all(|w| w[0] <= w[1]));
                }
            }
        }
    }

    #[test]
    fn large_strides_match_sequential_sort() {
        let engine = Engine::new(4).unwrap();
        let k = 17;
        let s = generate_schedule(k).unwrap();
        let input = random(1 << k, 7);
        let mut expected = input.clone();
        expected.sort_unstable();
        for strategy in Strategy::ALL {
            let plan = build_plan(&s, strategy, 1 << 10).unwrap();
            let mut data = input.clone();
            engine.execute(&plan, &mut data).unwrap();
            assert_eq!(data, expected, "{strategy}");
        }
    }

    #[test]
    fn plans_are_disjoint() {
        for k in 1..=8 {
            let s = generate_schedule(k).unwrap();
            for b in 1..=k {
                for strategy in Strategy::ALL {
                    audit_disjoint(&build_plan(&s, strategy, 1 << b).unwrap()).unwrap();
                }
            }
        }
    }

    #[test]
    fn audit_catches_escaping_stride() {
        let mut plan = build_plan(&generate_schedule(3).unwrap(), Strategy::Shared, 8).unwrap();
        plan.launches[2].block_capacity = 2;
        assert!(audit_disjoint(&plan).is_err());
    }
}
