//! Monte-Carlo null pools, p-values and the min-p calibration.
//!
//! Under independence every statistic depends on the sample only through the
//! rank permutation, so a null replicate is drawn as identity ranks for `x`
//! and a uniformly random permutation for `y`. Replicate `m` uses the random
//! stream `(seed, [NULL_POOL, m])`, which makes the pool independent of how
//! the work is scheduled.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ranks::{compute_ranks, RankedSample, Sample, TiePolicy};
use crate::rng;
use crate::stats::{compute_statistics, min_p, StatConfig, Statistic, TestStatistics};

pub const MIN_POOL_SIZE: usize = 100;

/// Pool size used by the command line unless overridden.
pub const DEFAULT_MC: usize = 10_000;

/// How null replicates are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullSampler {
    /// Identity ranks for `x`, a uniform random permutation for `y`.
    #[default]
    Permutation,
    /// `n` independent uniform pairs on `(0,1)^2`, then ranked.
    Uniform,
}

impl NullSampler {
    pub fn name(self) -> &'static str {
        match self {
            Self::Permutation => "permutation",
            Self::Uniform => "uniform",
        }
    }
}

/// Draws the `index`-th null replicate of size `n`.
pub fn null_replicate(n: usize, seed: u64, index: u64, sampler: NullSampler) -> Result<RankedSample> {
    let mut rng = rng::stream(seed, &[rng::tag::NULL_POOL, index]);
    match sampler {
        NullSampler::Permutation => {
            let mut s: Vec<usize> = (1..=n).collect();
            s.shuffle(&mut rng);
            RankedSample::from_ranks((1..=n).collect(), s)
        }
        NullSampler::Uniform => {
            let (x, y): (Vec<f64>, Vec<f64>) = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).unzip();
            compute_ranks(&Sample::new(x, y)?, TiePolicy::Error)
        }
    }
}

/// Everything that determines a pool's contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolMeta {
    pub n: usize,
    pub mc: usize,
    pub seed: u64,
    pub config: StatConfig,
    pub sampler: NullSampler,
    pub generator: String,
}

impl PoolMeta {
    pub fn new(n: usize, mc: usize, seed: u64, config: StatConfig, sampler: NullSampler) -> Self {
        Self { n, mc, seed, config, sampler, generator: rng::GENERATOR_ID.to_string() }
    }

    /// Cache file name keyed by `(n, mc, seed)` and a digest of the rest.
    pub fn cache_file_name(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.config.canonical());
        hasher.update(self.sampler.name());
        hasher.update(&self.generator);
        let digest: String = hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect();
        format!("pool-n{}-mc{}-seed{}-{digest}.csv", self.n, self.mc, self.seed)
    }

    fn header_line(&self) -> String {
        format!(
            "# qdep-null-pool v1 n={} mc={} seed={} r={} epsilon={} kappa={} s={} sampler={} generator={}",
            self.n,
            self.mc,
            self.seed,
            self.config.r,
            self.config.epsilon,
            self.config.kappa,
            self.config.s,
            self.sampler.name(),
            self.generator
        )
    }

    fn parse_header(line: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
        let body = line.strip_prefix("# qdep-null-pool v1 ").ok_or_else(|| bad("not a pool file"))?;
        let mut fields = std::collections::HashMap::new();
        for tok in body.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| bad("malformed header field"))?;
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(&format!("missing {k}")));
        let num = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(&format!("bad {k}"))) };
        let real = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(&format!("bad {k}"))) };
        let sampler = match get("sampler")? {
            "permutation" => NullSampler::Permutation,
            "uniform" => NullSampler::Uniform,
            _ => return Err(bad("bad sampler")),
        };
        Ok(Self {
            n: num("n")? as usize,
            mc: num("mc")? as usize,
            seed: num("seed")?,
            config: StatConfig {
                r: num("r")? as u32,
                epsilon: real("epsilon")?,
                kappa: real("kappa")?,
                s: num("s")? as usize,
            },
            sampler,
            generator: get("generator")?.to_string(),
        })
    }
}

/// p-value and min-p calibration for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinPCalibration {
    /// p-value of the integral statistic with the configured `r`.
    pub p_l: f64,
    /// p-value of the HHG statistic.
    pub p_hhg: f64,
    /// `min(p_l, p_hhg)`.
    pub m: f64,
    /// Calibrated p-value of `m` against the pool's own min-p values.
    pub p_value: f64,
}

/// Sorted Monte-Carlo null values of every statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct NullPool {
    meta: PoolMeta,
    replicates: Vec<TestStatistics>,
    sorted: [Vec<f64>; 5],
    sorted_min_p: Vec<f64>,
}

/// Fraction of `pool` strictly above `observed`; `pool` must be sorted.
fn exceed_fraction(observed: f64, pool: &[f64]) -> f64 {
    let not_above = pool.partition_point(|&v| v <= observed);
    (pool.len() - not_above) as f64 / pool.len() as f64
}

/// `(1/MC) #{i : observed < pool_i}` for a sorted pool.
pub fn p_value(observed: f64, pool: &[f64]) -> Result<f64> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    Ok(exceed_fraction(observed, pool))
}

impl NullPool {
    /// Builds a pool on the current rayon thread pool.
    pub fn build(
        n: usize,
        mc: usize,
        seed: u64,
        config: StatConfig,
        sampler: NullSampler,
    ) -> Result<Self> {
        if mc < MIN_POOL_SIZE {
            return Err(Error::InvalidPoolSize(mc));
        }
        if n < 3 {
            return Err(Error::SampleTooSmall { n, min: 3 });
        }
        config.validate()?;
        let replicates = (0..mc as u64)
            .into_par_iter()
            .map(|m| compute_statistics(&null_replicate(n, seed, m, sampler)?, &config))
            .collect::<Result<Vec<_>>>()?;
        Self::from_replicates(PoolMeta::new(n, mc, seed, config, sampler), replicates)
    }

    /// Assembles a pool from per-replicate statistics, in replicate order.
    pub fn from_replicates(meta: PoolMeta, replicates: Vec<TestStatistics>) -> Result<Self> {
        if replicates.is_empty() {
            return Err(Error::EmptyPool);
        }
        if replicates.len() != meta.mc {
            return Err(Error::MismatchedPool(format!(
                "expected {} replicates, got {}",
                meta.mc,
                replicates.len()
            )));
        }
        let sorted = Statistic::ALL.map(|stat| {
            let mut v: Vec<f64> = replicates.iter().map(|r| r.get(stat)).collect();
            v.sort_by(f64::total_cmp);
            v
        });
        let (l_idx, h_idx) = (index_of(Statistic::LR6), index_of(Statistic::Hhg));
        let mut sorted_min_p: Vec<f64> = replicates
            .iter()
            .map(|r| {
                exceed_fraction(r.l_r6, &sorted[l_idx]).min(exceed_fraction(r.hhg, &sorted[h_idx]))
            })
            .collect();
        sorted_min_p.sort_by(f64::total_cmp);
        Ok(Self { meta, replicates, sorted, sorted_min_p })
    }

    pub fn meta(&self) -> &PoolMeta {
        &self.meta
    }

    pub fn mc(&self) -> usize {
        self.meta.mc
    }

    pub fn replicates(&self) -> &[TestStatistics] {
        &self.replicates
    }

    /// Null values of `stat`, ascending.
    pub fn sorted(&self, stat: Statistic) -> &[f64] {
        &self.sorted[index_of(stat)]
    }

    /// Within-pool min-p values `M_j`, ascending.
    pub fn sorted_min_p(&self) -> &[f64] {
        &self.sorted_min_p
    }

    pub fn p_value(&self, stat: Statistic, observed: f64) -> f64 {
        exceed_fraction(observed, self.sorted(stat))
    }

    /// p-values of all five statistics.
    pub fn p_values(&self, observed: &TestStatistics) -> TestStatistics {
        TestStatistics::from_fn(|stat| self.p_value(stat, observed.get(stat)))
    }

    /// Ingredient p-values, their minimum `m`, and
    /// `(1/MC) #{j : M_j <= m}` where `M_j` are the replicates' own min-p
    /// values computed against the full pool.
    pub fn calibrate_min_p(&self, observed_l: f64, observed_h: f64) -> MinPCalibration {
        let p_l = self.p_value(Statistic::LR6, observed_l);
        let p_hhg = self.p_value(Statistic::Hhg, observed_h);
        let m = p_l.min(p_hhg);
        let at_most = self.sorted_min_p.partition_point(|&v| v <= m);
        MinPCalibration { p_l, p_hhg, m, p_value: at_most as f64 / self.mc() as f64 }
    }

    /// Errors unless the pool was built for sample size `n` and `config`.
    pub fn check_compatible(&self, n: usize, config: &StatConfig) -> Result<()> {
        if self.meta.n != n {
            return Err(Error::MismatchedPool(format!(
                "pool built for n = {}, sample has n = {n}",
                self.meta.n
            )));
        }
        if self.meta.config != *config {
            return Err(Error::MismatchedPool(format!(
                "pool built for {:?}, requested {:?}",
                self.meta.config, config
            )));
        }
        Ok(())
    }

    /// Writes the cache format: a metadata header line, a column header, then
    /// one row per replicate in replicate order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.meta.header_line())?;
        writeln!(out, "{}", Statistic::ALL.map(Statistic::name).join(","))?;
        for r in &self.replicates {
            writeln!(out, "{},{},{},{},{}", r.l_r2, r.l_r6, r.d_s0, r.d_s4, r.hhg)?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let mut next = || lines.next().transpose();
        let header = next()?.ok_or(Error::Parse { line: 1, msg: "empty pool file".into() })?;
        let meta = PoolMeta::parse_header(&header)?;
        let columns = next()?.unwrap_or_default();
        if columns != Statistic::ALL.map(Statistic::name).join(",") {
            return Err(Error::Parse { line: 2, msg: format!("unexpected columns '{columns}'") });
        }
        let mut replicates = Vec::with_capacity(meta.mc);
        let mut line_no = 2;
        while let Some(line) = next()? {
            line_no += 1;
            let values: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
            if values.len() != 5 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 5 fields, found {}", values.len()),
                });
            }
            replicates.push(TestStatistics {
                l_r2: values[0],
                l_r6: values[1],
                d_s0: values[2],
                d_s4: values[3],
                hhg: values[4],
            });
        }
        Self::from_replicates(meta, replicates)
    }
}

fn index_of(stat: Statistic) -> usize {
    Statistic::ALL.iter().position(|&s| s == stat).expect("statistic listed in ALL")
}

/// Builds a permutation-null pool.
pub fn build_null_pool(n: usize, mc: usize, seed: u64, config: StatConfig) -> Result<NullPool> {
    NullPool::build(n, mc, seed, config, NullSampler::Permutation)
}

/// Loads the pool from `cache_dir` when a matching file exists, otherwise
/// builds it and (if a directory is given) stores it there.
pub fn load_or_build_pool(
    cache_dir: Option<&Path>,
    n: usize,
    mc: usize,
    seed: u64,
    config: StatConfig,
) -> Result<NullPool> {
    let meta = PoolMeta::new(n, mc, seed, config, NullSampler::Permutation);
    let path: Option<PathBuf> = cache_dir.map(|d| d.join(meta.cache_file_name()));
    if let Some(path) = path.as_deref().filter(|p| p.is_file()) {
        if let Ok(pool) = fs::File::open(path).map_err(Error::from).and_then(NullPool::read_csv) {
            if pool.meta == meta {
                return Ok(pool);
            }
        }
    }
    let pool = build_null_pool(n, mc, seed, config)?;
    if let (Some(dir), Some(path)) = (cache_dir, path) {
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        pool.write_csv(std::io::BufWriter::new(fs::File::create(&tmp)?))?;
        fs::rename(&tmp, &path)?;
    }
    Ok(pool)
}

/// Statistics, p-values and min-p calibration for one observed sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub meta: ReportMeta,
    pub statistics: TestStatistics,
    pub p_values: TestStatistics,
    pub min_p: MinPCalibration,
}

/// Everything needed to rerun the computation behind a [`TestReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub n: usize,
    pub mc: usize,
    pub seed: u64,
    pub config: StatConfig,
    pub tie_policy: String,
    pub tie_seed: Option<u64>,
    pub null_sampler: NullSampler,
    pub generator: String,
    pub version: String,
}

/// Runs all tests on `ranked` against `pool`.
pub fn run_test(ranked: &RankedSample, pool: &NullPool, tie_policy: TiePolicy) -> Result<TestReport> {
    let config = pool.meta.config;
    pool.check_compatible(ranked.n(), &config)?;
    let statistics = compute_statistics(ranked, &config)?;
    let p_values = pool.p_values(&statistics);
    let min_p_cal = pool.calibrate_min_p(statistics.l_r6, statistics.hhg);
    debug_assert_eq!(min_p_cal.m, min_p(min_p_cal.p_l, min_p_cal.p_hhg).unwrap_or(f64::NAN));
    let (tie_policy, tie_seed) = match tie_policy {
        TiePolicy::Error => ("error".to_string(), None),
        TiePolicy::RandomBreak(seed) => ("random-break".to_string(), Some(seed)),
    };
    Ok(TestReport {
        meta: ReportMeta {
            n: ranked.n(),
            mc: pool.mc(),
            seed: pool.meta.seed,
            config,
            tie_policy,
            tie_seed,
            null_sampler: pool.meta.sampler,
            generator: pool.meta.generator.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        statistics,
        p_values,
        min_p: min_p_cal,
    })
}
