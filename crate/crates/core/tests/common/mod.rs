#![allow(dead_code)]

use nnpca::SymMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with entries uniform in `[lo, hi]`.
pub fn uniform_sym(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> SymMatrix {
    SymMatrix::from_upper(n, |_, _| rng.random_range(lo..=hi)).unwrap()
}

/// Max of `<X, W>` over `X = [[a, c], [c, 1-a]]`, `0 <= c <= sqrt(a(1-a))`,
/// scanned on a grid in `a` and in `c / sqrt(a(1-a))`.
pub fn grid_sdp_2x2(w: &SymMatrix) -> f64 {
    let (w11, w12, w22) = (w.get(0, 0), w.get(0, 1), w.get(1, 1));
    let na = 20_000;
    let ts: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let mut best = f64::NEG_INFINITY;
    for i in 0..=na {
        let a = i as f64 / na as f64;
        let cmax = (a * (1.0 - a)).sqrt();
        for &t in &ts {
            let c = t * cmax;
            best = best.max(w11 * a + w22 * (1.0 - a) + 2.0 * w12 * c);
        }
    }
    best
}

fn octant_point(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn qf3(w: &SymMatrix, x: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += x[i] * w.get(i, j) * x[j];
        }
    }
    s
}

/// `max xᵀWx` over unit `x >= 0` in `R³`: a coarse angle grid followed by
/// successively finer grids around the incumbent.
pub fn lambda_plus_grid_3(w: &SymMatrix) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    let m = 300;
    let h = half / m as f64;
    let (mut bt, mut bp, mut best) = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..=m {
        for j in 0..=m {
            let (t, p) = (i as f64 * h, j as f64 * h);
            let v = qf3(w, &octant_point(t, p));
            if v > best {
                (bt, bp, best) = (t, p, v);
            }
        }
    }
    let mut radius = 2.0 * h;
    for _ in 0..8 {
        let (ct, cp) = (bt, bp);
        for i in -20..=20 {
            for j in -20..=20 {
                let t = (ct + radius * i as f64 / 20.0).clamp(0.0, half);
                let p = (cp + radius * j as f64 / 20.0).clamp(0.0, half);
                let v = qf3(w, &octant_point(t, p));
                if v > best {
                    (bt, bp, best) = (t, p, v);
                }
            }
        }
        radius /= 5.0;
    }
    best
}

/// Real roots of the characteristic polynomial of a symmetric `n <= 4`
/// matrix, found by bisection on sign changes of `det(W - tI)` over a grid.
pub fn charpoly_roots(w: &SymMatrix) -> Vec<f64> {
    let n = w.n();
    let bound = 1.0 + (0..n).map(|i| (0..n).map(|j| w.get(i, j).abs()).sum::<f64>()).fold(0.0, f64::max);
    let det = |t: f64| {
        let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| w.get(i, j) - if i == j { t } else { 0.0 }).collect()).collect();
        det_in_place(&mut a)
    };
    let steps = 200_000;
    let mut roots = Vec::new();
    let mut prev_t = -bound;
    let mut prev = det(prev_t);
    for k in 1..=steps {
        let t = -bound + 2.0 * bound * k as f64 / steps as f64;
        let cur = det(t);
        if cur == 0.0 {
            roots.push(t);
        } else if prev != 0.0 && prev.signum() != cur.signum() {
            let (mut lo, mut hi) = (prev_t, t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if det(mid).signum() == det(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_t = t;
        prev = cur;
    }
    roots
}

fn det_in_place(a: &mut [Vec<f64>]) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}
