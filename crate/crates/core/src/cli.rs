//! Command-line front end.
//!
//! Exit codes: 0 success (whatever the test outcome), 2 usage error,
//! 3 data error, 4 internal error.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::calibration::{load_or_build_pool, run_test, TestReport, DEFAULT_MC};
use crate::copula_grid::{q_grid, smooth_q_grid, QGrid};
use crate::error::{Error, Result};
use crate::models::{self, ModelSpec};
use crate::power::{run_power_study_with_pool, PowerStudyConfig, PowerTable};
use crate::ranks::{compute_ranks, RankedSample, Sample, TiePolicy};
use crate::rng::DEFAULT_SEED;
use crate::stats::StatConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Environment variable naming the null-pool cache directory.
pub const POOL_CACHE_ENV: &str = "QDEP_POOL_CACHE";

#[derive(Debug, Parser)]
#[command(name = "qdep", version, about = "Quantile dependence estimation and independence tests")]
pub struct Cli {
    /// Worker threads (default: all available cores). Never changes results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test independence of two columns and print a JSON report.
    Test(TestArgs),
    /// Export the estimated grid, unsmoothed and smoothed.
    Heatmap(HeatmapArgs),
    /// Draw a sample from a simulation model as `x,y` CSV.
    Simulate(SimulateArgs),
    /// Empirical power of every test under a list of models.
    Power(PowerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieMode {
    Error,
    RandomBreak,
}

#[derive(Debug, Clone, Args)]
pub struct StatArgs {
    /// Exponent of the second integral statistic.
    #[arg(long, default_value_t = 6)]
    pub r: u32,
    /// Corner trimming of the integral statistics.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Margin of the supremum statistics.
    #[arg(long, default_value_t = 0.025)]
    pub kappa: f64,
    /// Smoothing radius of the second supremum statistic.
    #[arg(long = "smooth", default_value_t = 4)]
    pub s: usize,
}

impl StatArgs {
    pub fn config(&self) -> StatConfig {
        StatConfig { r: self.r, epsilon: self.epsilon, kappa: self.kappa, s: self.s }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Two-column CSV (header optional).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = TieMode::Error)]
    pub tie_policy: TieMode,
    /// Seed for tie breaking (defaults to --seed).
    #[arg(long)]
    pub tie_seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub stats: StatArgs,
    /// Null pool size.
    #[arg(long, default_value_t = DEFAULT_MC)]
    pub mc: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Directory for cached null pools.
    #[arg(long, env = POOL_CACHE_ENV)]
    pub pool_cache: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HeatmapArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Smoothing radius of the second grid.
    #[arg(long = "smooth", default_value_t = 4)]
    pub s: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output prefix; writes `<prefix>-s0.csv` and `<prefix>-s<s>.csv`.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Also write 8-bit PGM images next to the CSV files.
    #[arg(long)]
    pub pgm: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Model id (sr1..sr5, hr1, hr2, re1..re4, bm1..bm11, null).
    pub model: String,
    #[arg(long, short)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PowerArgs {
    /// Comma-separated model ids (default: all 22 study models).
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    #[arg(long, short, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 2000)]
    pub pool_mc: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub stats: StatArgs,
    #[arg(long, env = POOL_CACHE_ENV)]
    pub pool_cache: Option<PathBuf>,
    /// CSV table, rewritten after every model.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// JSON table with full metadata.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_)
        | Error::UnknownModel(_)
        | Error::SmoothingRadiusTooLarge { .. }
        | Error::InvalidPoolSize(_)
        | Error::DegenerateRegion(_)
        | Error::DomainError(_) => EXIT_USAGE,
        Error::FileNotFound(_)
        | Error::Parse { .. }
        | Error::TiesPresent { .. }
        | Error::SampleTooSmall { .. }
        | Error::SampleTooLarge { .. }
        | Error::NonFiniteValue { .. }
        | Error::LengthMismatch { .. } => EXIT_DATA,
        Error::EmptyPool | Error::MismatchedPool(_) | Error::Io(_) | Error::Json(_) => EXIT_INTERNAL,
    }
}

/// Parses two-column CSV. A first line that is not numeric is a header.
pub fn parse_sample_csv<R: Read>(input: R) -> Result<Sample> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut seen_first = false;
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let parsed = (fields[0].parse::<f64>(), fields[1].parse::<f64>());
        let first = !seen_first;
        seen_first = true;
        match parsed {
            (Ok(a), Ok(b)) => {
                x.push(a);
                y.push(b);
            }
            _ if first => {}
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-numeric value in '{line}'"),
                })
            }
        }
    }
    if x.len() < 3 {
        return Err(Error::SampleTooSmall { n: x.len(), min: 3 });
    }
    Sample::new(x, y)
}

pub fn read_sample_csv(path: &Path) -> Result<Sample> {
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    parse_sample_csv(file)
}

fn tie_policy(args: &InputArgs, seed: u64) -> TiePolicy {
    match args.tie_policy {
        TieMode::Error => TiePolicy::Error,
        TieMode::RandomBreak => TiePolicy::RandomBreak(args.tie_seed.unwrap_or(seed)),
    }
}

fn load_ranked(args: &InputArgs, seed: u64) -> Result<(RankedSample, TiePolicy)> {
    let policy = tie_policy(args, seed);
    let sample = read_sample_csv(&args.input)?;
    Ok((compute_ranks(&sample, policy)?, policy))
}

pub fn cmd_test(args: &TestArgs) -> Result<TestReport> {
    let config = args.stats.config();
    config.validate()?;
    let (ranked, policy) = load_ranked(&args.input, args.seed)?;
    let pool = load_or_build_pool(args.pool_cache.as_deref(), ranked.n(), args.mc, args.seed, config)?;
    run_test(&ranked, &pool, policy)
}

/// PGM grey level of a scaled value `z`, symmetric around 127.5 and
/// saturating at `|z| = 6`.
pub fn pgm_level(z: f64) -> u8 {
    (127.5 + 21.25 * z).round().clamp(0.0, 255.0) as u8
}

/// Binary PGM of `sqrt(n) q`: column `i` left to right, row `j` bottom to top.
pub fn write_pgm<W: Write>(grid: &QGrid, mut out: W) -> std::io::Result<()> {
    let side = grid.n() + 1;
    let root_n = (grid.n() as f64).sqrt();
    write!(out, "P5\n{side} {side}\n255\n")?;
    let mut pixels = Vec::with_capacity(side * side);
    for j in (0..side).rev() {
        for i in 0..side {
            pixels.push(pgm_level(root_n * grid.get(i, j)));
        }
    }
    out.write_all(&pixels)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

/// Writes the grids for `s = 0` and `s`; returns the files written.
pub fn cmd_heatmap(args: &HeatmapArgs) -> Result<Vec<PathBuf>> {
    let (ranked, _) = load_ranked(&args.input, args.seed)?;
    let raw = q_grid(&ranked);
    let smooth = smooth_q_grid(&raw, args.s)?;
    let mut written = Vec::new();
    for grid in [&raw, &smooth] {
        let csv = with_suffix(&args.output, &format!("-s{}.csv", grid.s()));
        let mut out = BufWriter::new(fs::File::create(&csv)?);
        grid.write_csv(&mut out, true)?;
        out.flush()?;
        written.push(csv);
        if args.pgm {
            let pgm = with_suffix(&args.output, &format!("-s{}.pgm", grid.s()));
            let mut out = BufWriter::new(fs::File::create(&pgm)?);
            write_pgm(grid, &mut out)?;
            out.flush()?;
            written.push(pgm);
        }
        if args.s == 0 {
            break;
        }
    }
    Ok(written)
}

pub fn cmd_simulate<W: Write>(args: &SimulateArgs, mut out: W) -> Result<()> {
    let model: ModelSpec = args.model.parse()?;
    let sample = models::sample(&model, args.n, args.seed)?;
    writeln!(out, "x,y")?;
    for (x, y) in sample.x().iter().zip(sample.y()) {
        writeln!(out, "{x},{y}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn power_config(args: &PowerArgs) -> Result<PowerStudyConfig> {
    let models = if args.models.is_empty() {
        ModelSpec::STUDY.to_vec()
    } else {
        args.models.iter().map(|m| m.parse()).collect::<Result<Vec<_>>>()?
    };
    let config = PowerStudyConfig {
        models,
        n: args.n,
        alpha: args.alpha,
        reps: args.reps,
        pool_mc: args.pool_mc,
        seed: args.seed,
        stat_config: args.stats.config(),
    };
    config.validate()?;
    Ok(config)
}

/// Runs the study, reporting progress on `log`. The CSV file is rewritten
/// after each model so an interrupted run keeps its completed rows.
pub fn cmd_power(args: &PowerArgs, log: &mut (dyn Write + Send)) -> Result<PowerTable> {
    let config = power_config(args)?;
    let pool = load_or_build_pool(
        args.pool_cache.as_deref(),
        config.n,
        config.pool_mc,
        config.seed,
        config.stat_config,
    )?;
    let _ = writeln!(log, "null pool ready: n = {}, mc = {}", config.n, config.pool_mc);
    let mut csv = match &args.csv {
        Some(path) => {
            let mut f = fs::File::create(path)?;
            writeln!(f, "{}", PowerTable::csv_header())?;
            f.flush()?;
            Some(f)
        }
        None => None,
    };
    let total = config.models.len();
    let mut done = 0;
    let mut io_err = None;
    let table = run_power_study_with_pool(&config, &pool, |row| {
        done += 1;
        let _ = writeln!(log, "[{done}/{total}] {}", row.csv_line());
        if let Some(f) = csv.as_mut() {
            if let Err(e) = writeln!(f, "{}", row.csv_line()).and_then(|_| f.flush()) {
                io_err.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    if let Some(path) = &args.json {
        let mut out = BufWriter::new(fs::File::create(path)?);
        serde_json::to_writer_pretty(&mut out, &table)?;
        writeln!(out)?;
        out.flush()?;
    }
    Ok(table)
}

fn dispatch(cli: &Cli, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<()> {
    match &cli.command {
        Command::Test(args) => {
            let report = cmd_test(args)?;
            let json = serde_json::to_string_pretty(&report)?;
            match &args.output {
                Some(path) => fs::write(path, json + "\n")?,
                None => writeln!(stdout, "{json}")?,
            }
        }
        Command::Heatmap(args) => {
            for path in cmd_heatmap(args)? {
                writeln!(stderr, "wrote {}", path.display())?;
            }
        }
        Command::Simulate(args) => match &args.output {
            Some(path) => cmd_simulate(args, BufWriter::new(fs::File::create(path)?))?,
            None => cmd_simulate(args, &mut *stdout)?,
        },
        Command::Power(args) => {
            let table = cmd_power(args, stderr)?;
            if args.csv.is_none() && args.json.is_none() {
                table.write_csv(&mut *stdout)?;
            }
        }
    }
    Ok(())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.workers {
        Some(0) => Err(Error::InvalidParameter("--workers must be at least 1".into())),
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, stdout, stderr)),
            Err(e) => Err(Error::InvalidParameter(format!("cannot start {w} workers: {e}"))),
        },
        None => dispatch(&cli, stdout, stderr),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
