//! Ranks, reversed ranks and the evaluation grid.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

/// Largest sample size for which the exact integer numerators fit in `i64`.
pub const MAX_N: usize = 1_000_000;

/// A paired bivariate sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { x: x.len(), y: y.len() });
        }
        if x.len() < 2 {
            return Err(Error::SampleTooSmall { n: x.len(), min: 2 });
        }
        for (column, values) in [('x', &x), ('y', &y)] {
            if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue { column, row });
            }
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

/// What to do with tied observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    #[default]
    Error,
    /// Break ties by a uniform shuffle inside each tied group, seeded.
    RandomBreak(u64),
}

/// Ranks `r`, `s` (1-based permutations of `1..=n`) and their reversals
/// `r' = n + 1 - r`, `s' = n + 1 - s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedSample {
    r: Vec<usize>,
    s: Vec<usize>,
    r_prime: Vec<usize>,
    s_prime: Vec<usize>,
}

fn check_permutation(ranks: &[usize], column: char) -> Result<()> {
    let n = ranks.len();
    let mut seen = vec![false; n + 1];
    for &r in ranks {
        if r == 0 || r > n || std::mem::replace(&mut seen[r], true) {
            return Err(Error::InvalidParameter(format!(
                "ranks of {column} are not a permutation of 1..={n}"
            )));
        }
    }
    Ok(())
}

impl RankedSample {
    /// Builds a ranked sample from two rank permutations.
    pub fn from_ranks(r: Vec<usize>, s: Vec<usize>) -> Result<Self> {
        if r.len() != s.len() {
            return Err(Error::LengthMismatch { x: r.len(), y: s.len() });
        }
        let n = r.len();
        if n == 0 {
            return Err(Error::SampleTooSmall { n, min: 1 });
        }
        if n > MAX_N {
            return Err(Error::SampleTooLarge { n, max: MAX_N });
        }
        check_permutation(&r, 'x')?;
        check_permutation(&s, 'y')?;
        let r_prime = r.iter().map(|&v| n + 1 - v).collect();
        let s_prime = s.iter().map(|&v| n + 1 - v).collect();
        Ok(Self { r, s, r_prime, s_prime })
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn r(&self) -> &[usize] {
        &self.r
    }

    pub fn s(&self) -> &[usize] {
        &self.s
    }

    pub fn r_prime(&self) -> &[usize] {
        &self.r_prime
    }

    pub fn s_prime(&self) -> &[usize] {
        &self.s_prime
    }

    /// Ranks of `(-x, y)`.
    pub fn reverse_x(&self) -> Self {
        Self {
            r: self.r_prime.clone(),
            s: self.s.clone(),
            r_prime: self.r.clone(),
            s_prime: self.s_prime.clone(),
        }
    }

    /// Ranks of `(x, -y)`.
    pub fn reverse_y(&self) -> Self {
        Self {
            r: self.r.clone(),
            s: self.s_prime.clone(),
            r_prime: self.r_prime.clone(),
            s_prime: self.s.clone(),
        }
    }
}

fn rank_column(values: &[f64], column: char, rng: Option<&mut rng::StreamRng>) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut rng = rng;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        if end - start > 1 {
            match rng.as_deref_mut() {
                // Sort the group by index first so the shuffle does not
                // depend on the sort's handling of equal keys.
                Some(rng) => {
                    order[start..end].sort_unstable();
                    order[start..end].shuffle(rng);
                }
                None => {
                    return Err(Error::TiesPresent { column, value: values[order[start]] });
                }
            }
        }
        start = end;
    }

    let mut ranks = vec![0; values.len()];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    Ok(ranks)
}

/// Ranks both coordinates of `sample`.
pub fn compute_ranks(sample: &Sample, tie_policy: TiePolicy) -> Result<RankedSample> {
    let (r, s) = match tie_policy {
        TiePolicy::Error => (
            rank_column(sample.x(), 'x', None)?,
            rank_column(sample.y(), 'y', None)?,
        ),
        TiePolicy::RandomBreak(seed) => {
            let mut rx = rng::stream(seed, &[rng::tag::TIES, 0]);
            let mut ry = rng::stream(seed, &[rng::tag::TIES, 1]);
            (
                rank_column(sample.x(), 'x', Some(&mut rx))?,
                rank_column(sample.y(), 'y', Some(&mut ry))?,
            )
        }
    };
    RankedSample::from_ranks(r, s)
}

/// Grid coordinate `(i + 0.5) / (n + 1)`.
#[inline]
pub fn grid_coord(i: usize, n: usize) -> f64 {
    (i as f64 + 0.5) / (n as f64 + 1.0)
}

/// A point of the `(n+1) x (n+1)` evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub i: usize,
    pub j: usize,
    pub u: f64,
    pub v: f64,
}

/// All grid points in row-major order (`i` outer, `j` inner).
pub fn grid_points(n: usize) -> Vec<GridPoint> {
    (0..=n)
        .flat_map(|i| {
            (0..=n).map(move |j| GridPoint { i, j, u: grid_coord(i, n), v: grid_coord(j, n) })
        })
        .collect()
}
