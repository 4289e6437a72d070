//! Empirical copula on the `(n+1) x (n+1)` grid and the symmetrized
//! estimator of the quantile dependence function.
//!
//! Grid index `i` corresponds to `u_i = (i + 0.5) / (n + 1)`. Writing
//! `a_i = 2i + 1` we have `u_i = a_i / (2(n+1))`, so every quadrant numerator
//! multiplied by `D = 4 n (n+1)^2` is an integer. Numerators are kept in that
//! scaled integer form and only converted to `f64` when the weight is applied;
//! the finite-sample identities between them can then be checked exactly.

use std::io::Write;

use crate::error::{Error, Result};
use crate::ranks::{grid_coord, RankedSample};

/// Which pair of rank vectors feeds the empirical copula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankPairing {
    /// `(R, S)`
    RS,
    /// `(R, S')`
    RSPrime,
    /// `(R', S')`
    RPrimeSPrime,
    /// `(R', S)`
    RPrimeS,
}

impl RankPairing {
    fn columns<'a>(&self, ranked: &'a RankedSample) -> (&'a [usize], &'a [usize]) {
        match self {
            Self::RS => (ranked.r(), ranked.s()),
            Self::RSPrime => (ranked.r(), ranked.s_prime()),
            Self::RPrimeSPrime => (ranked.r_prime(), ranked.s_prime()),
            Self::RPrimeS => (ranked.r_prime(), ranked.s()),
        }
    }
}

/// Empirical copula counts: `count(i, j) = #{k : a_k <= i, b_k <= j}`, which
/// is `n * C_n(u_i, v_j)` for the chosen rank pairing `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopulaGrid {
    n: usize,
    counts: Vec<u32>,
}

impl CopulaGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * (self.n + 1) + j]
    }

    /// `C_n(u_i, v_j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        f64::from(self.count(i, j)) / self.n as f64
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

/// Empirical copula on the grid by the column recursion: with the pairs
/// sorted by first coordinate, row `i` equals row `i-1` plus one for every
/// `j >= S_[i]`. Work is `O(n^2)`.
pub fn empirical_copula_recursive(ranked: &RankedSample, pairing: RankPairing) -> CopulaGrid {
    let n = ranked.n();
    let side = n + 1;
    let (first, second) = pairing.columns(ranked);

    // sorted_second[k - 1] = S_[k]
    let mut sorted_second = vec![0usize; n];
    for (&a, &b) in first.iter().zip(second) {
        sorted_second[a - 1] = b;
    }

    let mut counts = vec![0u32; side * side];
    for i in 1..=n {
        let (prev, cur) = counts[(i - 1) * side..(i + 1) * side].split_at_mut(side);
        cur.copy_from_slice(prev);
        for c in &mut cur[sorted_second[i - 1]..] {
            *c += 1;
        }
    }
    CopulaGrid { n, counts }
}

#[inline]
fn odd(i: usize) -> i64 {
    2 * i as i64 + 1
}

/// `4 (n+1)^2`, the factor turning a count `/ n` into the common denominator.
#[inline]
fn count_scale(n: usize) -> i64 {
    let m = n as i64 + 1;
    4 * m * m
}

/// The four quadrant numerators `N^(1..4)_n` on the grid, each scaled by
/// [`QuadrantNumerators::denominator`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadrantNumerators {
    n: usize,
    scaled: [Vec<i64>; 4],
}

impl QuadrantNumerators {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `D = 4 n (n+1)^2`.
    pub fn denominator(&self) -> i64 {
        self.n as i64 * count_scale(self.n)
    }

    /// `D * N^(k)_n(u_i, v_j)` for `k` in `1..=4`.
    #[inline]
    pub fn scaled(&self, k: usize, i: usize, j: usize) -> i64 {
        self.scaled[k - 1][i * (self.n + 1) + j]
    }

    /// `N^(k)_n(u_i, v_j)` for `k` in `1..=4`.
    pub fn value(&self, k: usize, i: usize, j: usize) -> f64 {
        self.scaled(k, i, j) as f64 / self.denominator() as f64
    }
}

/// Computes all four numerators, one recursive copula pass each:
///
/// * `N^(1)(u,v) =  N^(1)(u, v; R, S)`
/// * `N^(2)(u,v) = -N^(1)(u, 1-v; R, S')`
/// * `N^(3)(u,v) =  N^(1)(1-u, 1-v; R', S')`
/// * `N^(4)(u,v) = -N^(1)(1-u, v; R', S)`
///
/// On the grid `1 - u_i = u_{n-i}`.
pub fn quadrant_numerators(ranked: &RankedSample) -> QuadrantNumerators {
    let n = ranked.n();
    let side = n + 1;
    let scale = count_scale(n);
    let nn = n as i64;

    let c_rs = empirical_copula_recursive(ranked, RankPairing::RS);
    let c_rsp = empirical_copula_recursive(ranked, RankPairing::RSPrime);
    let c_rpsp = empirical_copula_recursive(ranked, RankPairing::RPrimeSPrime);
    let c_rps = empirical_copula_recursive(ranked, RankPairing::RPrimeS);

    // scaled N^(1)(u_i, v_j) for a given copula table
    let n1 = |c: &CopulaGrid, i: usize, j: usize| {
        scale * i64::from(c.count(i, j)) - nn * odd(i) * odd(j)
    };

    let mut scaled: [Vec<i64>; 4] = std::array::from_fn(|_| Vec::with_capacity(side * side));
    for i in 0..=n {
        for j in 0..=n {
            scaled[0].push(n1(&c_rs, i, j));
            scaled[1].push(-n1(&c_rsp, i, n - j));
            scaled[2].push(n1(&c_rpsp, n - i, n - j));
            scaled[3].push(-n1(&c_rps, n - i, j));
        }
    }
    QuadrantNumerators { n, scaled }
}

/// `u_i <= 1/2`, i.e. `2i + 1 <= n + 1`.
#[inline]
fn lower_half(i: usize, n: usize) -> bool {
    2 * i <= n
}

#[inline]
fn quadrant_of(i: usize, j: usize, n: usize) -> usize {
    match (lower_half(i, n), lower_half(j, n)) {
        (true, true) => 1,
        (true, false) => 2,
        (false, false) => 3,
        (false, true) => 4,
    }
}

/// `D * N*_n` on the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetrizedNumerator {
    n: usize,
    scaled: Vec<i64>,
}

impl SymmetrizedNumerator {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn scaled(&self, i: usize, j: usize) -> i64 {
        self.scaled[i * (self.n + 1) + j]
    }

    pub fn denominator(&self) -> i64 {
        self.n as i64 * count_scale(self.n)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.scaled(i, j) as f64 / self.denominator() as f64
    }
}

/// Pieces `N*_n` together from the quadrant numerators: `N^(1)` on
/// `u <= 1/2, v <= 1/2`, `N^(2)` on `u <= 1/2, v > 1/2`, `N^(3)` on
/// `u > 1/2, v > 1/2` and `N^(4)` on `u > 1/2, v <= 1/2`.
pub fn symmetrized_numerator(quads: &QuadrantNumerators) -> SymmetrizedNumerator {
    let n = quads.n;
    let mut scaled = Vec::with_capacity((n + 1) * (n + 1));
    for i in 0..=n {
        for j in 0..=n {
            scaled.push(quads.scaled(quadrant_of(i, j, n), i, j));
        }
    }
    SymmetrizedNumerator { n, scaled }
}

/// `b_i = (2i+1)(2n+1-2i)`, so that `u_i (1 - u_i) = b_i / (4 (n+1)^2)`.
fn variance_factors(n: usize) -> Vec<f64> {
    (0..=n).map(|i| (odd(i) * odd(n - i)) as f64).collect()
}

/// `Q = w N*` from a scaled numerator: `scaled / (n sqrt(b_i b_j))`.
#[inline]
fn weighted(scaled: i64, n: usize, bi: f64, bj: f64) -> f64 {
    scaled as f64 / (n as f64 * (bi * bj).sqrt())
}

/// The weight `w(u,v) = 1 / sqrt(u v (1-u) (1-v))`.
pub fn weight(u: f64, v: f64) -> f64 {
    1.0 / (u * v * (1.0 - u) * (1.0 - v)).sqrt()
}

/// Values of `Q*_{n,s}` on the grid (`s = 0` is the unsmoothed `Q*_n`).
#[derive(Debug, Clone, PartialEq)]
pub struct QGrid {
    n: usize,
    s: usize,
    values: Vec<f64>,
}

impl QGrid {
    /// Wraps precomputed row-major values.
    pub fn new(n: usize, s: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::SampleTooSmall { n, min: 1 });
        }
        if values.len() != (n + 1) * (n + 1) {
            return Err(Error::InvalidParameter(format!(
                "grid for n = {n} needs {} values, got {}",
                (n + 1) * (n + 1),
                values.len()
            )));
        }
        Ok(Self { n, s, values })
    }

    pub fn from_numerator(numerator: &SymmetrizedNumerator) -> Self {
        let n = numerator.n;
        let b = variance_factors(n);
        let mut values = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                values.push(weighted(numerator.scaled(i, j), n, b[i], b[j]));
            }
        }
        Self { n, s: 0, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.n + 1) + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Writes the grid as CSV with header `i,j,u,v,q` (plus `z = sqrt(n) q`
    /// when `include_z`), row-major.
    pub fn write_csv<W: Write>(&self, mut out: W, include_z: bool) -> std::io::Result<()> {
        let root_n = (self.n as f64).sqrt();
        writeln!(out, "{}", if include_z { "i,j,u,v,q,z" } else { "i,j,u,v,q" })?;
        for i in 0..=self.n {
            let u = grid_coord(i, self.n);
            for j in 0..=self.n {
                let v = grid_coord(j, self.n);
                let q = self.get(i, j);
                if include_z {
                    writeln!(out, "{i},{j},{u},{v},{q},{}", root_n * q)?;
                } else {
                    writeln!(out, "{i},{j},{u},{v},{q}")?;
                }
            }
        }
        Ok(())
    }
}

/// `Q*_n` on the grid.
pub fn q_grid(ranked: &RankedSample) -> QGrid {
    QGrid::from_numerator(&symmetrized_numerator(&quadrant_numerators(ranked)))
}

fn check_radius(s: usize, n: usize) -> Result<()> {
    if 2 * s + 1 > n + 1 {
        return Err(Error::SmoothingRadiusTooLarge { s, n });
    }
    Ok(())
}

/// Box average of an unsmoothed grid over the `(2s+1) x (2s+1)` window
/// around each cell. Indices beyond the grid are clamped to the nearest edge
/// cell; the divisor is always `(2s+1)^2`.
pub fn smooth_q_grid(grid: &QGrid, s: usize) -> Result<QGrid> {
    if grid.s != 0 {
        return Err(Error::DomainError(format!(
            "smoothing expects an unsmoothed grid, got radius {}",
            grid.s
        )));
    }
    let n = grid.n;
    check_radius(s, n)?;
    if s == 0 {
        return Ok(grid.clone());
    }
    let side = n + 1;
    let clamp = |k: isize| k.clamp(0, n as isize) as usize;

    let mut rows = vec![0.0; side * side];
    for i in 0..side {
        for j in 0..side {
            let mut acc = 0.0;
            for l in j as isize - s as isize..=(j + s) as isize {
                acc += grid.values[i * side + clamp(l)];
            }
            rows[i * side + j] = acc;
        }
    }

    let divisor = ((2 * s + 1) * (2 * s + 1)) as f64;
    let mut values = vec![0.0; side * side];
    for i in 0..side {
        for j in 0..side {
            let mut acc = 0.0;
            for k in i as isize - s as isize..=(i + s) as isize {
                acc += rows[clamp(k) * side + j];
            }
            values[i * side + j] = acc / divisor;
        }
    }
    Ok(QGrid { n, s, values })
}

/// `Q*_{n,s}(u_i, v_j)` at a single grid point without building the grid.
///
/// Counts `#{R <= k, S <= l}` for the cells of the window only and derives
/// the other quadrant counts from margins, so the cost is `O(n + s^2)`.
/// This route is independent of the four-pass grid construction.
pub fn q_star_point(ranked: &RankedSample, i: usize, j: usize, s: usize) -> Result<f64> {
    let n = ranked.n();
    if i > n || j > n {
        return Err(Error::DomainError(format!("grid index ({i}, {j}) outside 0..={n}")));
    }
    check_radius(s, n)?;

    let (kmin, kmax) = (i.saturating_sub(s), (i + s).min(n));
    let (lmin, lmax) = (j.saturating_sub(s), (j + s).min(n));
    let (h, w) = (kmax - kmin + 1, lmax - lmin + 1);

    let mut counts = vec![0i64; h * w];
    for (&r, &sv) in ranked.r().iter().zip(ranked.s()) {
        if r <= kmax && sv <= lmax {
            counts[r.saturating_sub(kmin) * w + sv.saturating_sub(lmin)] += 1;
        }
    }
    for a in 0..h {
        for b in 0..w {
            let mut c = counts[a * w + b];
            if a > 0 {
                c += counts[(a - 1) * w + b];
            }
            if b > 0 {
                c += counts[a * w + b - 1];
            }
            if a > 0 && b > 0 {
                c -= counts[(a - 1) * w + b - 1];
            }
            counts[a * w + b] = c;
        }
    }

    let scale = count_scale(n);
    let nn = n as i64;
    let b = |k: usize| (odd(k) * odd(n - k)) as f64;
    let cell = |k: usize, l: usize| -> f64 {
        let c = counts[(k - kmin) * w + (l - lmin)];
        let (kk, ll) = (k as i64, l as i64);
        let scaled = match quadrant_of(k, l, n) {
            1 => scale * c - nn * odd(k) * odd(l),
            2 => nn * odd(k) * odd(n - l) - scale * (kk - c),
            3 => scale * (nn - kk - ll + c) - nn * odd(n - k) * odd(n - l),
            _ => nn * odd(n - k) * odd(l) - scale * (ll - c),
        };
        weighted(scaled, n, b(k), b(l))
    };

    if s == 0 {
        return Ok(cell(i, j));
    }
    let clamp = |k: isize| k.clamp(0, n as isize) as usize;
    let mut acc = 0.0;
    for k in i as isize - s as isize..=(i + s) as isize {
        for l in j as isize - s as isize..=(j + s) as isize {
            acc += cell(clamp(k), clamp(l));
        }
    }
    Ok(acc / ((2 * s + 1) * (2 * s + 1)) as f64)
}

fn check_open_unit(name: &str, t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("{name} = {t} is outside (0, 1)")))
    }
}

/// Fréchet–Hoeffding bounds on `q`: `(w (max(u+v-1, 0) - uv), w (min(u,v) - uv))`.
pub fn frechet_bounds(u: f64, v: f64) -> Result<(f64, f64)> {
    check_open_unit("u", u)?;
    check_open_unit("v", v)?;
    let w = weight(u, v);
    Ok((w * ((u + v - 1.0).max(0.0) - u * v), w * (u.min(v) - u * v)))
}
