//! One-dimensional stretching for `f(x) = mu x (1 - x)`: two disjoint
//! intervals `I0, I1` inside a target `J` with `f^n(I_i) ⊇ J`.

use serde::{Deserialize, Serialize};

use crate::certificate::SCHEMA_VERSION;

/// Grid spacing of candidate targets `J = [a, b]` is `1 / TARGET_GRID`.
const TARGET_GRID: usize = 100;
const BRANCH_GRID: usize = 4096;
/// Smallest gap accepted between `I0` and `I1`. Near a turning point `c`
/// the computed `f^n` is flat over `|x - c| ~ sqrt(eps)`, so smaller gaps can
/// be rounding artifacts.
const MIN_GAP: f64 = 1e-6;
const SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SapCertificate {
    pub iterate: u32,
    pub target: [f64; 2],
    pub i0: [f64; 2],
    pub i1: [f64; 2],
    /// Points sampled in `I0 ∪ I1` while re-checking the claim.
    pub samples: usize,
    /// `f^n` is monotone on both intervals at the samples and their
    /// endpoints map to opposite sides of the target.
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticReport {
    pub schema_version: u32,
    pub mu: f64,
    pub first_iterate: Option<SapCertificate>,
    pub second_iterate: Option<SapCertificate>,
}

fn iterate(mu: f64, n: u32, x: f64) -> f64 {
    (0..n).fold(x, |v, _| mu * v * (1.0 - v))
}

/// Maximal monotone pieces of `f^n` on `[0, 1]`.
fn branches(mu: f64, n: u32) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = (0..=BRANCH_GRID)
        .map(|i| i as f64 / BRANCH_GRID as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| iterate(mu, n, x)).collect();
    let mut cuts = vec![0.0];
    for i in 1..BRANCH_GRID {
        let (d0, d1) = (ys[i] - ys[i - 1], ys[i + 1] - ys[i]);
        if d0 * d1 < 0.0 {
            // golden-section on [x_{i-1}, x_{i+1}] for the turning point
            let sign = if d0 > 0.0 { -1.0 } else { 1.0 };
            let g = |x: f64| sign * iterate(mu, n, x);
            let (mut a, mut b) = (xs[i - 1], xs[i + 1]);
            let r = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let (c, d) = (b - r * (b - a), a + r * (b - a));
                if g(c) < g(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            cuts.push(0.5 * (a + b));
        }
    }
    cuts.push(1.0);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Final bracket `(a, b)` with `pred(a)` and not `pred(b)`, given the same at
/// `lo` and `hi` on a monotone piece.
fn bracket(lo: f64, hi: f64, pred: impl Fn(f64) -> bool) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if pred(m) {
            a = m;
        } else {
            b = m;
        }
    }
    (a, b)
}

/// Subinterval of the monotone piece `[l, r] ∩ [a, b]` mapped across `[a, b]`.
fn covering_piece(mu: f64, n: u32, (l, r): (f64, f64), (a, b): (f64, f64)) -> Option<[f64; 2]> {
    let (l, r) = (l.max(a), r.min(b));
    if l >= r {
        return None;
    }
    let (fl, fr) = (iterate(mu, n, l), iterate(mu, n, r));
    let f = |x: f64| iterate(mu, n, x);
    if fl <= a && fr >= b {
        let u = bracket(l, r, |x| f(x) <= a).0;
        let v = bracket(u, r, |x| f(x) < b).1;
        (f(u) <= a && f(v) >= b).then_some([u, v])
    } else if fl >= b && fr <= a {
        let u = bracket(l, r, |x| f(x) >= b).0;
        let v = bracket(u, r, |x| f(x) > a).1;
        (f(u) >= b && f(v) <= a).then_some([u, v])
    } else {
        None
    }
}

fn verify(mu: f64, n: u32, target: [f64; 2], i0: [f64; 2], i1: [f64; 2]) -> (bool, usize) {
    let f = |x: f64| iterate(mu, n, x);
    let mut ok = i0[1] + MIN_GAP <= i1[0] && target[0] <= i0[0] && i1[1] <= target[1];
    let per = SAMPLES / 2;
    for iv in [i0, i1] {
        let (fa, fb) = (f(iv[0]), f(iv[1]));
        let crosses = (fa <= target[0] && fb >= target[1]) || (fa >= target[1] && fb <= target[0]);
        ok &= crosses;
        let inc = fb > fa;
        let mut prev = fa;
        for k in 1..=per {
            let x = iv[0] + (iv[1] - iv[0]) * k as f64 / per as f64;
            let y = f(x);
            ok &= if inc { y >= prev } else { y <= prev };
            prev = y;
        }
    }
    (ok, 2 * per)
}

fn search(mu: f64, n: u32) -> Option<SapCertificate> {
    let pieces = branches(mu, n);
    let mut targets: Vec<(usize, usize)> = (0..=TARGET_GRID)
        .flat_map(|i| (i + 1..=TARGET_GRID).map(move |j| (i, j)))
        .collect();
    // widest first, then leftmost
    targets.sort_by_key(|&(i, j)| (TARGET_GRID - (j - i), i));
    for (i, j) in targets {
        let (a, b) = (i as f64 / TARGET_GRID as f64, j as f64 / TARGET_GRID as f64);
        let found: Vec<[f64; 2]> = pieces
            .iter()
            .filter_map(|&pc| covering_piece(mu, n, pc, (a, b)))
            .collect();
        for x in 0..found.len() {
            for y in x + 1..found.len() {
                let (i0, i1) = if found[x][0] < found[y][0] {
                    (found[x], found[y])
                } else {
                    (found[y], found[x])
                };
                if i0[1] + MIN_GAP <= i1[0] {
                    let (verified, samples) = verify(mu, n, [a, b], i0, i1);
                    return Some(SapCertificate {
                        iterate: n,
                        target: [a, b],
                        i0,
                        i1,
                        samples,
                        verified,
                    });
                }
            }
        }
    }
    None
}

/// Brute-force search for stretching certificates of the first and second
/// iterate of the logistic map. Targets range over a grid of subintervals of
/// `[0, 1]`, widest first.
pub fn logistic_sap_demo(mu: f64) -> LogisticReport {
    let valid = mu.is_finite() && mu > 0.0;
    LogisticReport {
        schema_version: SCHEMA_VERSION,
        mu,
        first_iterate: valid.then(|| search(mu, 1)).flatten(),
        second_iterate: valid.then(|| search(mu, 2)).flatten(),
    }
}
