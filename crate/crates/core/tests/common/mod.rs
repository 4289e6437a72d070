//! Helpers shared by the integration tests: independent brute-force
//! oracles and a few distribution functions.
#![allow(dead_code)]

use qdep::ranks::{grid_coord, RankedSample};
use qdep::rng::{self, StreamRng};
use rand::seq::SliceRandom;

pub fn rng(seed: u64) -> StreamRng {
    rng::stream(seed, &[0x7465_7374])
}

pub fn random_ranked(n: usize, rng: &mut StreamRng) -> RankedSample {
    let mut r: Vec<usize> = (1..=n).collect();
    let mut s: Vec<usize> = (1..=n).collect();
    r.shuffle(rng);
    s.shuffle(rng);
    RankedSample::from_ranks(r, s).unwrap()
}

/// `#{k : a_k <= i + 0.5, b_k <= j + 0.5}` by direct counting.
pub fn brute_count(a: &[usize], b: &[usize], i: usize, j: usize) -> u32 {
    a.iter().zip(b).filter(|&(&ak, &bk)| ak <= i && bk <= j).count() as u32
}

/// `Q*_n` on the full grid straight from the four-quadrant definition,
/// using floating point throughout.
pub fn brute_q_star(ranked: &RankedSample) -> Vec<f64> {
    let n = ranked.n();
    let nf = n as f64;
    let c = |a: &[usize], b: &[usize], u: f64, v: f64| {
        let (lim_u, lim_v) = (u * (nf + 1.0), v * (nf + 1.0));
        a.iter().zip(b).filter(|&(&ak, &bk)| (ak as f64) <= lim_u && (bk as f64) <= lim_v).count()
            as f64
            / nf
    };
    let (r, s, rp, sp) = (ranked.r(), ranked.s(), ranked.r_prime(), ranked.s_prime());
    let mut out = Vec::with_capacity((n + 1) * (n + 1));
    for i in 0..=n {
        let u = grid_coord(i, n);
        for j in 0..=n {
            let v = grid_coord(j, n);
            let num = match (u <= 0.5, v <= 0.5) {
                (true, true) => c(r, s, u, v) - u * v,
                (true, false) => -(c(r, sp, u, 1.0 - v) - u * (1.0 - v)),
                (false, false) => c(rp, sp, 1.0 - u, 1.0 - v) - (1.0 - u) * (1.0 - v),
                (false, true) => -(c(rp, s, 1.0 - u, v) - (1.0 - u) * v),
            };
            out.push(num / (u * v * (1.0 - u) * (1.0 - v)).sqrt());
        }
    }
    out
}

/// Complementary error function, relative error below 1.2e-7.
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398
                                + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov distance between the empirical law of `xs` and `cdf`.
pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).max((k + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Kendall's tau for continuous data in `O(n log n)` (inversion count).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ys: Vec<f64> = idx.iter().map(|&k| y[k]).collect();
    let mut buf = vec![0.0; ys.len()];
    let inversions = merge_count(&mut ys, &mut buf);
    let n = x.len() as f64;
    let pairs = n * (n - 1.0) / 2.0;
    (pairs - 2.0 * inversions as f64) / pairs
}

fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    let k2 = k + mid - i;
    buf[k2..n].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

/// Index of the grid coordinate nearest to `t`.
pub fn nearest_index(t: f64, n: usize) -> usize {
    (0..=n)
        .min_by(|&a, &b| (grid_coord(a, n) - t).abs().total_cmp(&(grid_coord(b, n) - t).abs()))
        .unwrap()
}
