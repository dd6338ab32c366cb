//! Launch planning and instrumented execution of a bitonic [`Schedule`].
//!
//! A [`LaunchPlan`] groups the schedule's steps into barrier-separated
//! launches. Three strategies are supported:
//!
//! - [`Strategy::Baseline`]: one global launch per step.
//! - [`Strategy::Shared`]: the trailing steps of each phase whose stride fits
//!   inside a block of `block_capacity` keys run as one launch that loads the
//!   block once, runs all those steps locally, and stores it once.
//! - [`Strategy::Fused`]: `Shared`, plus consecutive global steps of one phase
//!   (strides `2d`, `d`) run as a single launch in which every work item owns
//!   four keys.
//!
//! Counters follow a fixed accounting model: every launch reads and writes
//! each key of the global array exactly once, whatever it covers. Only the
//! number of launches and of compare-exchanges changes with the strategy.

mod exec;
mod kernels;
mod par;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::schedule::{log2_exact, Schedule, StepSpec};

pub use exec::{audit_disjoint, Engine};
pub use kernels::{compare_exchange, register_paired_kernel, sort_sequential};

/// Default block capacity: a 512-thread block owning two keys per thread.
pub const DEFAULT_BLOCK_CAPACITY: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Baseline,
    Shared,
    Fused,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Baseline, Strategy::Shared, Strategy::Fused];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Baseline => "baseline",
            Strategy::Shared => "shared",
            Strategy::Fused => "fused",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" | "basic" => Ok(Strategy::Baseline),
            "shared" | "semi" => Ok(Strategy::Shared),
            "fused" | "optimized" => Ok(Strategy::Fused),
            other => Err(Error::Config(format!("unknown strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LaunchKind {
    /// One step, one compare-exchange per work item, straight on global memory.
    GlobalStep,
    /// A suffix of a phase executed block by block in a local buffer.
    SharedFusedBlock,
    /// Two consecutive steps (strides `2d`, `d`), four keys per work item.
    RegisterPairedStep,
}

/// One barrier-delimited launch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Launch {
    pub kind: LaunchKind,
    pub steps: Vec<StepSpec>,
    /// Keys per block; only meaningful for [`LaunchKind::SharedFusedBlock`].
    pub block_capacity: usize,
}

impl Launch {
    fn global(step: StepSpec) -> Self {
        Launch {
            kind: LaunchKind::GlobalStep,
            steps: vec![step],
            block_capacity: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaunchPlan {
    pub strategy: Strategy,
    pub launches: Vec<Launch>,
    pub block_capacity: usize,
    /// `log2` of the array length the plan sorts.
    pub k: u32,
}

impl LaunchPlan {
    pub fn len(&self) -> usize {
        1usize << self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Steps in execution order, flattened across launches.
    pub fn steps(&self) -> impl Iterator<Item = &StepSpec> + '_ {
        self.launches.iter().flat_map(|l| l.steps.iter())
    }
}

/// Execution counters. All fields are functions of the plan alone.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counters {
    pub kernel_launches: u64,
    pub global_reads: u64,
    pub global_writes: u64,
    pub compare_exchanges: u64,
}

impl Counters {
    /// Global element reads plus writes.
    pub fn global_traffic(&self) -> u64 {
        self.global_reads + self.global_writes
    }
}

impl Add for Counters {
    type Output = Counters;

    fn add(self, rhs: Counters) -> Counters {
        Counters {
            kernel_launches: self.kernel_launches + rhs.kernel_launches,
            global_reads: self.global_reads + rhs.global_reads,
            global_writes: self.global_writes + rhs.global_writes,
            compare_exchanges: self.compare_exchanges + rhs.compare_exchanges,
        }
    }
}

impl AddAssign for Counters {
    fn add_assign(&mut self, rhs: Counters) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for Counters {
    fn sum<I: Iterator<Item = Counters>>(iter: I) -> Counters {
        iter.fold(Counters::default(), Add::add)
    }
}

fn check_capacity(block_capacity: usize, n: usize) -> Result<u32> {
    if block_capacity < 2 || !block_capacity.is_power_of_two() {
        return Err(Error::Config(format!(
            "block capacity {block_capacity} must be a power of two >= 2"
        )));
    }
    if block_capacity > n {
        return Err(Error::Config(format!(
            "block capacity {block_capacity} exceeds array length {n}"
        )));
    }
    Ok(block_capacity.trailing_zeros())
}

/// Groups the steps of `schedule` into launches for `strategy`.
///
/// `block_capacity` is validated for every strategy, including `Baseline`
/// which does not use it.
pub fn build_plan(
    schedule: &Schedule,
    strategy: Strategy,
    block_capacity: usize,
) -> Result<LaunchPlan> {
    let k = schedule.k();
    let b = check_capacity(block_capacity, schedule.len())?;

    let mut launches = Vec::new();
    for p in 1..=k {
        let steps = schedule.phase(p);
        if strategy == Strategy::Baseline {
            launches.extend(steps.iter().copied().map(Launch::global));
            continue;
        }
        // steps run p, p-1, ..., 1; those with step index <= b fit one block
        let n_global = p.saturating_sub(b) as usize;
        let (global, local) = steps.split_at(n_global);
        match strategy {
            Strategy::Shared => launches.extend(global.iter().copied().map(Launch::global)),
            Strategy::Fused => {
                for pair in global.chunks(2) {
                    if let [hi, lo] = pair {
                        debug_assert_eq!(hi.stride, 2 * lo.stride);
                        launches.push(Launch {
                            kind: LaunchKind::RegisterPairedStep,
                            steps: vec![*hi, *lo],
                            block_capacity: 0,
                        });
                    } else {
                        launches.push(Launch::global(pair[0]));
                    }
                }
            }
            Strategy::Baseline => unreachable!(),
        }
        launches.push(Launch {
            kind: LaunchKind::SharedFusedBlock,
            steps: local.to_vec(),
            block_capacity,
        });
    }

    Ok(LaunchPlan {
        strategy,
        launches,
        block_capacity,
        k,
    })
}

/// Closed-form launch count for `2^k` keys and blocks of `2^b` keys.
pub fn predicted_launches(k: u32, strategy: Strategy, b: u32) -> u64 {
    let (k, b) = (u64::from(k), u64::from(b));
    match strategy {
        Strategy::Baseline => k * (k + 1) / 2,
        Strategy::Shared => (1..=k).map(|p| p.saturating_sub(b) + 1).sum(),
        Strategy::Fused => (1..=k).map(|p| p.saturating_sub(b).div_ceil(2) + 1).sum(),
    }
}

/// Counter delta charged for one launch over `n` keys.
pub fn account(launch: &Launch, n: usize) -> Counters {
    let n = n as u64;
    let compare_exchanges = match launch.kind {
        LaunchKind::GlobalStep => n / 2,
        LaunchKind::SharedFusedBlock => n / 2 * launch.steps.len() as u64,
        LaunchKind::RegisterPairedStep => n,
    };
    Counters {
        kernel_launches: 1,
        global_reads: n,
        global_writes: n,
        compare_exchanges,
    }
}

/// Counters a plan will produce, without touching any data.
pub fn dry_run(plan: &LaunchPlan) -> Counters {
    let n = plan.len();
    plan.launches.iter().map(|l| account(l, n)).sum()
}

/// Plans and sorts `data` in place with a fresh single-use engine.
pub fn execute(plan: &LaunchPlan, data: &mut [crate::Key], workers: usize) -> Result<Counters> {
    Engine::new(workers)?.execute(plan, data)
}

/// Convenience: schedule, plan and execute for `data.len()` keys.
pub fn sort_with(
    engine: &Engine,
    data: &mut [crate::Key],
    strategy: Strategy,
    block_capacity: usize,
) -> Result<Counters> {
    let k = log2_exact(data.len())?;
    let schedule = crate::schedule::generate_schedule(k)?;
    let plan = build_plan(&schedule, strategy, block_capacity)?;
    engine.execute(&plan, data)
}
