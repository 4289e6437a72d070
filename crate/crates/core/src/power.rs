//! Empirical power of every test under the simulation models.
//!
//! A single null pool is shared by all models. Repetition `rep` of a model
//! draws its sample from the stream `(seed, [POWER, model code, rep])`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{build_null_pool, NullPool};
use crate::error::{Error, Result};
use crate::models::{sample_with_rng, ModelSpec};
use crate::ranks::{compute_ranks, TiePolicy};
use crate::rng::{self, DEFAULT_SEED};
use crate::stats::{compute_statistics, StatConfig, Statistic};

/// Column names of a power table: the five statistics, then min-p.
pub const COLUMNS: [&str; 6] = ["l_r2", "l_r6", "d_s0", "d_s4", "hhg", "min_p"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerStudyConfig {
    pub models: Vec<ModelSpec>,
    pub n: usize,
    pub alpha: f64,
    pub reps: usize,
    pub pool_mc: usize,
    pub seed: u64,
    pub stat_config: StatConfig,
}

impl Default for PowerStudyConfig {
    fn default() -> Self {
        Self {
            models: ModelSpec::STUDY.to_vec(),
            n: 100,
            alpha: 0.05,
            reps: 1000,
            pool_mc: 2000,
            seed: DEFAULT_SEED,
            stat_config: StatConfig::default(),
        }
    }
}

impl PowerStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.reps < 100 {
            return Err(Error::InvalidParameter(format!("reps must be >= 100, got {}", self.reps)));
        }
        if self.pool_mc < 500 {
            return Err(Error::InvalidParameter(format!(
                "pool size must be >= 500, got {}",
                self.pool_mc
            )));
        }
        if self.n < 3 {
            return Err(Error::SampleTooSmall { n: self.n, min: 3 });
        }
        for m in &self.models {
            m.validate()?;
        }
        self.stat_config.validate()
    }
}

/// Rejection fraction with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCell {
    pub rejections: usize,
    pub power: f64,
    pub se: f64,
}

impl PowerCell {
    pub fn new(rejections: usize, reps: usize) -> Self {
        let p = rejections as f64 / reps as f64;
        Self { rejections, power: p, se: (p * (1.0 - p) / reps as f64).sqrt() }
    }
}

/// One model's powers, cells in [`COLUMNS`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub model: ModelSpec,
    pub cells: [PowerCell; 6],
}

impl PowerRow {
    pub fn cell(&self, column: &str) -> Option<&PowerCell> {
        COLUMNS.iter().position(|&c| c == column).map(|k| &self.cells[k])
    }

    pub fn csv_line(&self) -> String {
        let cells: Vec<String> =
            self.cells.iter().map(|c| format!("{:.4}±{:.4}", c.power, c.se)).collect();
        format!("{},{}", self.model.id(), cells.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMeta {
    pub config: PowerStudyConfig,
    /// One null pool serves every model.
    pub shared_pool: bool,
    pub generator: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub meta: PowerMeta,
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    pub fn csv_header() -> String {
        format!("model,{}", COLUMNS.join(","))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::csv_header())?;
        for row in &self.rows {
            writeln!(out, "{}", row.csv_line())?;
        }
        Ok(())
    }

    pub fn row(&self, model_id: &str) -> Option<&PowerRow> {
        self.rows.iter().find(|r| r.model.id() == model_id)
    }
}

/// Rejection flags of one repetition, in [`COLUMNS`] order.
fn one_rep(config: &PowerStudyConfig, pool: &NullPool, model: &ModelSpec, rep: u64) -> Result<[bool; 6]> {
    let mut rng = rng::stream(config.seed, &[rng::tag::POWER, model.code(), rep]);
    let sample = sample_with_rng(model, config.n, &mut rng)?;
    let ranked = compute_ranks(&sample, TiePolicy::Error)?;
    let stats = compute_statistics(&ranked, &config.stat_config)?;
    let mut out = [false; 6];
    for (k, stat) in Statistic::ALL.into_iter().enumerate() {
        out[k] = pool.p_value(stat, stats.get(stat)) <= config.alpha;
    }
    out[5] = pool.calibrate_min_p(stats.l_r6, stats.hhg).p_value <= config.alpha;
    Ok(out)
}

/// Powers of one model against a prepared pool.
pub fn model_power(config: &PowerStudyConfig, pool: &NullPool, model: &ModelSpec) -> Result<PowerRow> {
    let flags = (0..config.reps as u64)
        .into_par_iter()
        .map(|rep| one_rep(config, pool, model, rep))
        .collect::<Result<Vec<_>>>()?;
    let cells = std::array::from_fn(|k| {
        PowerCell::new(flags.iter().filter(|f| f[k]).count(), config.reps)
    });
    Ok(PowerRow { model: *model, cells })
}

/// Runs the study against `pool`, calling `progress` after each model.
pub fn run_power_study_with_pool(
    config: &PowerStudyConfig,
    pool: &NullPool,
    mut progress: impl FnMut(&PowerRow),
) -> Result<PowerTable> {
    config.validate()?;
    pool.check_compatible(config.n, &config.stat_config)?;
    if pool.mc() != config.pool_mc {
        return Err(Error::MismatchedPool(format!(
            "pool has {} replicates, config asks for {}",
            pool.mc(),
            config.pool_mc
        )));
    }
    let mut rows = Vec::with_capacity(config.models.len());
    for model in &config.models {
        let row = model_power(config, pool, model)?;
        progress(&row);
        rows.push(row);
    }
    Ok(PowerTable {
        meta: PowerMeta {
            config: config.clone(),
            shared_pool: true,
            generator: rng::GENERATOR_ID.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        rows,
    })
}

/// Builds the shared pool from `config.seed` and runs the study.
pub fn run_power_study(config: &PowerStudyConfig, progress: impl FnMut(&PowerRow)) -> Result<PowerTable> {
    config.validate()?;
    let pool = build_null_pool(config.n, config.pool_mc, config.seed, config.stat_config)?;
    run_power_study_with_pool(config, &pool, progress)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(models: Vec<ModelSpec>) -> PowerStudyConfig {
        PowerStudyConfig { models, n: 20, reps: 200, pool_mc: 500, seed: 17, ..Default::default() }
    }

    #[test]
    fn config_validation() {
        assert!(PowerStudyConfig::default().validate().is_ok());
        assert!(PowerStudyConfig { alpha: 1.0, ..Default::default() }.validate().is_err());
        assert!(PowerStudyConfig { reps: 99, ..Default::default() }.validate().is_err());
        assert!(PowerStudyConfig { pool_mc: 499, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn standard_error_formula() {
        let c = PowerCell::new(25, 100);
        assert_eq!(c.power, 0.25);
        assert!((c.se - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(PowerCell::new(0, 100).se, 0.0);
    }

    #[test]
    fn null_model_holds_size() {
        let config = PowerStudyConfig { reps: 400, pool_mc: 2000, ..small(vec![ModelSpec::Null]) };
        let table = run_power_study(&config, |_| {}).unwrap();
        let alpha = config.alpha;
        // the pool's own quantile error adds to the binomial error of the reps
        let var = alpha * (1.0 - alpha);
        let se = (var / config.reps as f64 + var / config.pool_mc as f64).sqrt();
        for (name, cell) in COLUMNS.iter().zip(&table.rows[0].cells) {
            assert!((cell.power - alpha).abs() <= 3.0 * se, "{name}: {}", cell.power);
        }
    }

    #[test]
    fn deterministic_and_progress_per_model() {
        let config = small(vec![ModelSpec::Sr1, ModelSpec::BM7]);
        let mut seen = Vec::new();
        let a = run_power_study(&config, |row| seen.push(row.model.id())).unwrap();
        assert_eq!(seen, vec!["sr1", "bm7"]);
        let b = run_power_study(&config, |_| {}).unwrap();
        assert_eq!(a, b);

        let json = serde_json::to_string(&a).unwrap();
        let back: PowerTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);

        let mut csv = Vec::new();
        a.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "model,l_r2,l_r6,d_s0,d_s4,hhg,min_p");
        assert!(lines[1].starts_with("sr1,"));
        assert_eq!(lines[1].matches('±').count(), 6);
    }

    #[test]
    fn mismatched_pool_is_rejected() {
        let config = small(vec![ModelSpec::Null]);
        let pool = build_null_pool(21, 500, 1, config.stat_config).unwrap();
        assert!(matches!(
            run_power_study_with_pool(&config, &pool, |_| {}),
            Err(Error::MismatchedPool(_))
        ));
    }
}
