//! Test statistics built on the estimated quantile dependence function,
//! plus the rank-based HHG statistic.

use serde::{Deserialize, Serialize};

use crate::copula_grid::{q_grid, smooth_q_grid, QGrid};
use crate::error::{Error, Result};
use crate::ranks::{grid_coord, RankedSample};

/// Parameters of the statistic family.
///
/// `r` is the exponent of the second integral statistic (the first always
/// uses `r = 2`) and `s` the smoothing radius of the second supremum
/// statistic (the first is unsmoothed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatConfig {
    pub r: u32,
    pub epsilon: f64,
    pub kappa: f64,
    pub s: usize,
}

impl Default for StatConfig {
    fn default() -> Self {
        Self { r: 6, epsilon: 0.01, kappa: 0.025, s: 4 }
    }
}

impl StatConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r < 1 {
            return Err(Error::InvalidParameter(format!("r must be >= 1, got {}", self.r)));
        }
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in [0, 0.5), got {}",
                self.epsilon
            )));
        }
        if !(self.kappa > 0.0 && self.kappa < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "kappa must lie in (0, 0.5), got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    /// Canonical text form, used to key pool caches. Floats are written by
    /// their bit patterns.
    pub fn canonical(&self) -> String {
        format!(
            "r={};epsilon={:016x};kappa={:016x};s={}",
            self.r,
            self.epsilon.to_bits(),
            self.kappa.to_bits(),
            self.s
        )
    }
}

/// The five statistics reported for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestStatistics {
    /// Integral statistic with `r = 2`.
    pub l_r2: f64,
    /// Integral statistic with the configured `r` (6 by default).
    pub l_r6: f64,
    /// Supremum statistic of the unsmoothed estimate.
    pub d_s0: f64,
    /// Supremum statistic with the configured smoothing radius (4 by default).
    pub d_s4: f64,
    /// Rank HHG statistic.
    pub hhg: f64,
}

/// Names one of the five statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    LR2,
    LR6,
    DS0,
    DS4,
    Hhg,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [Self::LR2, Self::LR6, Self::DS0, Self::DS4, Self::Hhg];

    pub fn name(self) -> &'static str {
        match self {
            Self::LR2 => "l_r2",
            Self::LR6 => "l_r6",
            Self::DS0 => "d_s0",
            Self::DS4 => "d_s4",
            Self::Hhg => "hhg",
        }
    }
}

impl TestStatistics {
    pub fn get(&self, stat: Statistic) -> f64 {
        match stat {
            Statistic::LR2 => self.l_r2,
            Statistic::LR6 => self.l_r6,
            Statistic::DS0 => self.d_s0,
            Statistic::DS4 => self.d_s4,
            Statistic::Hhg => self.hhg,
        }
    }

    pub fn from_fn(mut f: impl FnMut(Statistic) -> f64) -> Self {
        Self {
            l_r2: f(Statistic::LR2),
            l_r6: f(Statistic::LR6),
            d_s0: f(Statistic::DS0),
            d_s4: f(Statistic::DS4),
            hhg: f(Statistic::Hhg),
        }
    }
}

/// `(u, v)` lies in one of the four closed `epsilon`-corner squares.
#[inline]
fn in_corner(u: f64, v: f64, epsilon: f64) -> bool {
    let edge = |t: f64| t <= epsilon || t >= 1.0 - epsilon;
    edge(u) && edge(v)
}

/// Standardized `L_r` norm of `Q*_n` over the trimmed region `A(epsilon)`,
/// approximated by the Riemann sum over grid points lying in the region:
/// `sqrt(n) * ((n+1)^-2 * sum |Q*|^r)^(1/r)`.
pub fn l_statistic(grid: &QGrid, r: u32, epsilon: f64) -> Result<f64> {
    if grid.s() != 0 {
        return Err(Error::DomainError("integral statistic needs the unsmoothed grid".into()));
    }
    if r < 1 {
        return Err(Error::DomainError(format!("r must be >= 1, got {r}")));
    }
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::DomainError(format!("epsilon = {epsilon} outside [0, 0.5)")));
    }
    let n = grid.n();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..=n {
        let u = grid_coord(i, n);
        for j in 0..=n {
            if !in_corner(u, grid_coord(j, n), epsilon) {
                sum += grid.get(i, j).abs().powi(r as i32);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::DegenerateRegion("A(epsilon)"));
    }
    let cells = ((n + 1) * (n + 1)) as f64;
    Ok((n as f64).sqrt() * (sum / cells).powf(1.0 / f64::from(r)))
}

/// `max sqrt(n) |Q*_{n,s}|` over grid points in `[kappa, 1 - kappa]^2`.
pub fn d_statistic(grid: &QGrid, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 0.5) {
        return Err(Error::DomainError(format!("kappa = {kappa} outside (0, 0.5)")));
    }
    let n = grid.n();
    let inside: Vec<usize> = (0..=n)
        .filter(|&i| {
            let u = grid_coord(i, n);
            u >= kappa && u <= 1.0 - kappa
        })
        .collect();
    if inside.is_empty() {
        return Err(Error::DegenerateRegion("[kappa, 1-kappa]^2"));
    }
    let mut best = 0.0f64;
    for &i in &inside {
        for &j in &inside {
            best = best.max(grid.get(i, j).abs());
        }
    }
    Ok((n as f64).sqrt() * best)
}

struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(len: usize) -> Self {
        Self { tree: vec![0; len + 1] }
    }

    fn clear(&mut self) {
        self.tree.iter_mut().for_each(|t| *t = 0);
    }

    fn add(&mut self, key: usize) {
        let mut k = key + 1;
        while k < self.tree.len() {
            self.tree[k] += 1;
            k += k & k.wrapping_neg();
        }
    }

    /// Number of inserted keys `<= key`.
    fn prefix(&self, key: usize) -> u32 {
        let mut k = key + 1;
        let mut acc = 0;
        while k > 0 {
            acc += self.tree[k];
            k -= k & k.wrapping_neg();
        }
        acc
    }
}

/// Pearson chi-square of the 2x2 table with cell `a11`, row margin `row1`,
/// column margin `col1` and total `m`; zero when a margin vanishes.
#[inline]
pub(crate) fn chi_square_2x2(a11: i64, row1: i64, col1: i64, m: i64) -> f64 {
    let row2 = m - row1;
    let col2 = m - col1;
    if row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0 {
        return 0.0;
    }
    let a12 = row1 - a11;
    let a21 = col1 - a11;
    let a22 = m - row1 - col1 + a11;
    let cross = (a12 * a21 - a11 * a22) as f64;
    m as f64 * cross * cross / ((row1 * row2) as f64 * (col1 * col2) as f64)
}

/// Rank HHG statistic: the sum over ordered pairs `(i, j)` of the Pearson
/// chi-square of the table that splits the other `n - 2` points by
/// `|r_i - r_k| <= |r_i - r_j|` and `|s_i - s_k| <= |s_i - s_j|`.
///
/// For fixed `i` the points are swept in order of rank distance and a
/// Fenwick tree over `|s_i - s_k|` gives the joint counts, so the total cost
/// is `O(n^2 log n)`.
pub fn hhg_statistic(ranked: &RankedSample) -> Result<f64> {
    let n = ranked.n();
    if n < 3 {
        return Err(Error::SampleTooSmall { n, min: 3 });
    }
    let (r, s) = (ranked.r(), ranked.s());
    let mut by_rank = vec![0usize; n + 1];
    for (k, &rk) in r.iter().enumerate() {
        by_rank[rk] = k;
    }
    // how many ranks in 1..=n lie within distance d of c
    let within = |c: usize, d: usize| ((c + d).min(n) - c.saturating_sub(d).max(1) + 1) as i64;
    let m = n as i64 - 2;

    let mut tree = Fenwick::new(n);
    let mut total = 0.0;
    for i in 0..n {
        tree.clear();
        let (ri, si) = (r[i], s[i]);
        for d in 0..(ri.max(n + 1 - ri)) {
            let below = (d > 0 && ri > d).then(|| by_rank[ri - d]);
            let above = (d > 0 && ri + d <= n).then(|| by_rank[ri + d]);
            let bucket = if d == 0 { [Some(i), None] } else { [below, above] };
            for &k in bucket.iter().flatten() {
                tree.add(s[k].abs_diff(si));
            }
            let row1 = within(ri, d) - 2;
            for &j in bucket.iter().flatten() {
                if j == i {
                    continue;
                }
                let dy = s[j].abs_diff(si);
                // i and j themselves always fall in the (<=, <=) cell
                let a11 = i64::from(tree.prefix(dy)) - 2;
                total += chi_square_2x2(a11, row1, within(si, dy) - 2, m);
            }
        }
    }
    Ok(total)
}

/// The smaller of two p-values.
pub fn min_p(p1: f64, p2: f64) -> Result<f64> {
    for p in [p1, p2] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::DomainError(format!("p-value {p} outside [0, 1]")));
        }
    }
    Ok(p1.min(p2))
}

/// All five statistics for one ranked sample.
pub fn compute_statistics(ranked: &RankedSample, config: &StatConfig) -> Result<TestStatistics> {
    config.validate()?;
    let q = q_grid(ranked);
    let smoothed = smooth_q_grid(&q, config.s)?;
    Ok(TestStatistics {
        l_r2: l_statistic(&q, 2, config.epsilon)?,
        l_r6: l_statistic(&q, config.r, config.epsilon)?,
        d_s0: d_statistic(&q, config.kappa)?,
        d_s4: d_statistic(&smoothed, config.kappa)?,
        hhg: hhg_statistic(ranked)?,
    })
}
