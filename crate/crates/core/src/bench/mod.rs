//! Size-sweep benchmark harness.
//!
//! For every requested size a fresh pseudorandom input is generated, every
//! selected strategy sorts a copy of it, the output is validated and only
//! then is the timing kept. Reported time is the minimum over repetitions.
//! Timing covers plan construction and execution; input generation, padding
//! and validation happen outside the timed region.

mod report;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{
    build_plan, dry_run, sort_sequential, Counters, Engine, Strategy, DEFAULT_BLOCK_CAPACITY,
};
use crate::error::{Error, Result};
use crate::schedule::{generate_schedule, log2_exact};
use crate::verify::{check_zero_one, reference_quicksort, validate, VerificationReport};
use crate::Key;

pub use report::{emit_report, CsvRow, OutputFormat, CSV_HEADER};

/// Elapsed times below this are flagged unreliable and never used in ratios.
pub const MIN_RELIABLE_ELAPSED: Duration = Duration::from_micros(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BenchStrategy {
    CpuQuicksort,
    CpuBitonicSequential,
    Engine(Strategy),
}

impl BenchStrategy {
    pub const ALL: [BenchStrategy; 5] = [
        BenchStrategy::CpuQuicksort,
        BenchStrategy::CpuBitonicSequential,
        BenchStrategy::Engine(Strategy::Baseline),
        BenchStrategy::Engine(Strategy::Shared),
        BenchStrategy::Engine(Strategy::Fused),
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchStrategy::CpuQuicksort => "cpu-quicksort",
            BenchStrategy::CpuBitonicSequential => "cpu-bitonic-sequential",
            BenchStrategy::Engine(s) => s.name(),
        }
    }

    /// Parses a comma-separated list; `all` selects every strategy.
    pub fn parse_list(s: &str) -> Result<Vec<BenchStrategy>> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if item.eq_ignore_ascii_case("all") {
                out.extend(BenchStrategy::ALL);
            } else {
                out.push(item.parse()?);
            }
        }
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(Error::Config("no strategies selected".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for BenchStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cpu-quicksort" | "quicksort" => Ok(BenchStrategy::CpuQuicksort),
            "cpu-bitonic-sequential" | "bitonic-seq" => Ok(BenchStrategy::CpuBitonicSequential),
            other => other.parse().map(BenchStrategy::Engine),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub strategies: Vec<BenchStrategy>,
    pub block_capacity: usize,
    pub workers: usize,
    pub seed: u64,
    pub repetitions: usize,
    pub output_format: OutputFormat,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: (17..=24).map(|k| 1usize << k).collect(),
            strategies: BenchStrategy::ALL.to_vec(),
            block_capacity: DEFAULT_BLOCK_CAPACITY,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            seed: 0x5eed,
            repetitions: 5,
            output_format: OutputFormat::Table,
        }
    }
}

impl BenchConfig {
    pub fn check(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::Config("no sizes given".into()));
        }
        if let Some(&s) = self.sizes.iter().find(|&&s| s < 2) {
            return Err(Error::Config(format!("size {s} is below 2")));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("no strategies selected".into()));
        }
        if self.block_capacity < 2 || !self.block_capacity.is_power_of_two() {
            return Err(Error::Config(format!(
                "block capacity {} must be a power of two >= 2",
                self.block_capacity
            )));
        }
        Ok(())
    }
}

/// Parses a size list such as `2^17..2^24`, `1024,4096` or `2^10,3000`.
/// A range steps by doubling from its lower bound.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    fn one(t: &str) -> Result<usize> {
        let t = t.trim();
        let bad = || Error::Config(format!("cannot parse size '{t}'"));
        if let Some((base, exp)) = t.split_once('^') {
            let base: usize = base.trim().parse().map_err(|_| bad())?;
            let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
            return base.checked_pow(exp).ok_or_else(bad);
        }
        let (digits, mult) = match t.chars().last() {
            Some('K' | 'k') => (&t[..t.len() - 1], 1 << 10),
            Some('M' | 'm') => (&t[..t.len() - 1], 1 << 20),
            _ => (t, 1),
        };
        digits
            .trim()
            .parse::<usize>()
            .ok()
            .and_then(|v| v.checked_mul(mult))
            .ok_or_else(bad)
    }

    let mut sizes = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let (mut lo, hi) = (one(lo)?, one(hi)?);
            if lo == 0 || lo > hi {
                return Err(Error::Config(format!("empty size range '{item}'")));
            }
            while lo <= hi {
                sizes.push(lo);
                lo = match lo.checked_mul(2) {
                    Some(v) => v,
                    None => break,
                };
            }
        } else {
            sizes.push(one(item)?);
        }
    }
    if sizes.is_empty() {
        return Err(Error::Config("no sizes given".into()));
    }
    Ok(sizes)
}

/// `size` pseudorandom keys covering the full `i32` range.
///
/// The generator is ChaCha8 seeded through `SeedableRng::seed_from_u64`,
/// which is fixed across platforms and releases of `rand_chacha` 0.3.
pub fn generate_input(size: usize, seed: u64) -> Result<Vec<Key>> {
    if size == 0 {
        return Err(Error::InvalidSize("input size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..size).map(|_| rng.gen::<Key>()).collect())
}

/// Pads with `Key::MAX` up to the next power of two (at least 2). Returns the
/// padded keys and the original length; the padding sorts to the tail.
pub fn pad_to_pow2(data: &[Key]) -> (Vec<Key>, usize) {
    let target = data.len().next_power_of_two().max(2);
    let mut padded = Vec::with_capacity(target);
    padded.extend_from_slice(data);
    padded.resize(target, Key::MAX);
    (padded, data.len())
}

/// Pads, sorts with the engine and truncates. `block_capacity` is clamped to
/// the padded length.
pub fn sort_any_length(
    engine: &Engine,
    data: &[Key],
    strategy: Strategy,
    block_capacity: usize,
) -> Result<(Vec<Key>, Counters)> {
    let (mut padded, len) = pad_to_pow2(data);
    let cap = block_capacity.min(padded.len());
    let plan = build_plan(
        &generate_schedule(log2_exact(padded.len())?)?,
        strategy,
        cap,
    )?;
    let counters = engine.execute(&plan, &mut padded)?;
    padded.truncate(len);
    Ok((padded, counters))
}

/// Hex SHA-256 prefix of the little-endian key bytes.
pub fn input_digest(data: &[Key]) -> String {
    let mut h = Sha256::new();
    for k in data {
        h.update(k.to_le_bytes());
    }
    h.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// One measured cell of a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// Minimum over repetitions.
    pub elapsed_ms: f64,
    pub reliable: bool,
    pub verification: VerificationReport,
    /// Engine strategies only.
    pub counters: Option<Counters>,
    /// Quicksort time over this cell's time; bitonic cells only.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub size: usize,
    pub padded_size: usize,
    pub input_digest: String,
    pub quicksort: Option<Cell>,
    pub bitonic_sequential: Option<Cell>,
    pub basic: Option<Cell>,
    pub semi: Option<Cell>,
    pub optimized: Option<Cell>,
    /// Quicksort time over the fastest of basic/semi/optimized.
    pub ratio: Option<f64>,
}

impl BenchRecord {
    pub fn cell(&self, strategy: BenchStrategy) -> Option<&Cell> {
        match strategy {
            BenchStrategy::CpuQuicksort => self.quicksort.as_ref(),
            BenchStrategy::CpuBitonicSequential => self.bitonic_sequential.as_ref(),
            BenchStrategy::Engine(Strategy::Baseline) => self.basic.as_ref(),
            BenchStrategy::Engine(Strategy::Shared) => self.semi.as_ref(),
            BenchStrategy::Engine(Strategy::Fused) => self.optimized.as_ref(),
        }
    }

    fn cell_mut(&mut self, strategy: BenchStrategy) -> &mut Option<Cell> {
        match strategy {
            BenchStrategy::CpuQuicksort => &mut self.quicksort,
            BenchStrategy::CpuBitonicSequential => &mut self.bitonic_sequential,
            BenchStrategy::Engine(Strategy::Baseline) => &mut self.basic,
            BenchStrategy::Engine(Strategy::Shared) => &mut self.semi,
            BenchStrategy::Engine(Strategy::Fused) => &mut self.optimized,
        }
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

// One timed sort; returns elapsed, truncated output and counters.
fn sort_once(
    strategy: BenchStrategy,
    engine: &Engine,
    input: &[Key],
    block_capacity: usize,
) -> Result<(Duration, Vec<Key>, Option<Counters>)> {
    match strategy {
        BenchStrategy::CpuQuicksort => {
            let mut v = input.to_vec();
            let t = Instant::now();
            reference_quicksort(&mut v);
            Ok((t.elapsed(), v, None))
        }
        BenchStrategy::CpuBitonicSequential => {
            let (mut v, len) = pad_to_pow2(input);
            let t = Instant::now();
            sort_sequential(&mut v)?;
            let el = t.elapsed();
            v.truncate(len);
            Ok((el, v, None))
        }
        BenchStrategy::Engine(s) => {
            let (mut v, len) = pad_to_pow2(input);
            let cap = block_capacity.min(v.len());
            let t = Instant::now();
            let schedule = generate_schedule(log2_exact(v.len())?)?;
            let plan = build_plan(&schedule, s, cap)?;
            let counters = engine.execute(&plan, &mut v)?;
            let el = t.elapsed();
            v.truncate(len);
            Ok((el, v, Some(counters)))
        }
    }
}

/// Runs the sweep. Fails on the first validation failure, naming the size,
/// strategy and first out-of-order index.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    config.check()?;
    let engine = Engine::new(config.workers)?;
    let mut strategies = config.strategies.clone();
    strategies.sort();
    strategies.dedup();
    let mut sizes = config.sizes.clone();
    sizes.sort_unstable();

    let mut records = Vec::with_capacity(sizes.len());
    for &size in &sizes {
        let input = generate_input(size, config.seed)?;
        let mut record = BenchRecord {
            size,
            padded_size: size.next_power_of_two(),
            input_digest: input_digest(&input),
            quicksort: None,
            bitonic_sequential: None,
            basic: None,
            semi: None,
            optimized: None,
            ratio: None,
        };
        for &strategy in &strategies {
            let mut best = Duration::MAX;
            let mut cell_counters = None;
            let mut verification = None;
            for _ in 0..config.repetitions {
                let (elapsed, output, counters) =
                    sort_once(strategy, &engine, &input, config.block_capacity)?;
                let report = validate(&output, &input);
                if !report.ok() {
                    return Err(Error::Validation {
                        size,
                        strategy: strategy.to_string(),
                        detail: match report.first_violation_index {
                            Some(i) => format!("out of order at index {i}"),
                            None => "output is not a permutation of the input".into(),
                        },
                    });
                }
                if cell_counters.is_some() && cell_counters != counters {
                    return Err(Error::Validation {
                        size,
                        strategy: strategy.to_string(),
                        detail: "counters changed between repetitions".into(),
                    });
                }
                cell_counters = counters;
                verification = Some(report);
                best = best.min(elapsed);
            }
            *record.cell_mut(strategy) = Some(Cell {
                elapsed_ms: ms(best),
                reliable: best >= MIN_RELIABLE_ELAPSED,
                verification: verification.expect("repetitions >= 1"),
                counters: cell_counters,
                ratio: None,
            });
        }
        fill_ratios(&mut record);
        records.push(record);
    }
    Ok(records)
}

fn fill_ratios(record: &mut BenchRecord) {
    let qs = match &record.quicksort {
        Some(c) if c.reliable => c.elapsed_ms,
        _ => return,
    };
    for cell in [
        &mut record.bitonic_sequential,
        &mut record.basic,
        &mut record.semi,
        &mut record.optimized,
    ]
    .into_iter()
    .flatten()
    {
        if cell.reliable {
            cell.ratio = Some(qs / cell.elapsed_ms);
        }
    }
    record.ratio = [&record.basic, &record.semi, &record.optimized]
        .into_iter()
        .flatten()
        .filter(|c| c.reliable)
        .map(|c| c.elapsed_ms)
        .min_by(f64::total_cmp)
        .map(|fastest| qs / fastest);
}

/// Counters the engine must report for `record`, from the closed forms.
pub fn expected_counters(
    padded_size: usize,
    strategy: Strategy,
    block_capacity: usize,
) -> Result<Counters> {
    let schedule = generate_schedule(log2_exact(padded_size)?)?;
    Ok(dry_run(&build_plan(
        &schedule,
        strategy,
        block_capacity.min(padded_size),
    )?))
}

/// Outcome of one correctness check run by [`run_verification`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Correctness suite without timing: 0-1 principle for `k = 1..=6`, every
/// permutation of eight keys under each engine strategy, and the configured
/// sizes plus a spread of odd lengths against the reference quicksort.
pub fn run_verification(config: &BenchConfig) -> Result<Vec<CheckOutcome>> {
    use itertools::Itertools;

    config.check()?;
    let engine = Engine::new(config.workers)?;
    let mut out = Vec::new();

    for k in 1..=crate::verify::ZERO_ONE_MAX_K {
        let passed = check_zero_one(k);
        let how = if k <= crate::verify::EXHAUSTIVE_MAX_K {
            "exhaustive"
        } else {
            "sampled"
        };
        out.push(CheckOutcome {
            name: format!("zero-one k={k}"),
            passed,
            detail: format!("{how} over n={}", 1 << k),
        });
    }

    for strategy in Strategy::ALL {
        for cap in [2, 4, 8] {
            let plan = build_plan(&generate_schedule(3)?, strategy, cap)?;
            let mut failures = 0usize;
            let mut total = 0usize;
            for perm in (1..=8).permutations(8) {
                let mut v: Vec<Key> = perm;
                engine.execute(&plan, &mut v)?;
                total += 1;
                if v != [1, 2, 3, 4, 5, 6, 7, 8] {
                    failures += 1;
                }
            }
            out.push(CheckOutcome {
                name: format!("permutations n=8 {strategy} cap={cap}"),
                passed: failures == 0,
                detail: format!("{failures} of {total} permutations unsorted"),
            });
        }
    }

    let mut lengths = config.sizes.clone();
    lengths.extend([1, 3, 5, 17, 100, 1000, 1023, 1025, 4097]);
    for (i, &len) in lengths.iter().enumerate() {
        let input = generate_input(len, config.seed.wrapping_add(i as u64))?;
        let mut expected = input.clone();
        reference_quicksort(&mut expected);
        let mut bad = Vec::new();
        for strategy in Strategy::ALL {
            let (got, _) = sort_any_length(&engine, &input, strategy, config.block_capacity)?;
            if got != expected {
                bad.push(strategy.name());
            }
        }
        let (mut seq, l) = pad_to_pow2(&input);
        sort_sequential(&mut seq)?;
        seq.truncate(l);
        if seq != expected {
            bad.push("cpu-bitonic-sequential");
        }
        out.push(CheckOutcome {
            name: format!("oracle length={len}"),
            passed: bad.is_empty(),
            detail: if bad.is_empty() {
                "matches reference quicksort".into()
            } else {
                format!("mismatch: {}", bad.join(", "))
            },
        });
    }
    Ok(out)
}
