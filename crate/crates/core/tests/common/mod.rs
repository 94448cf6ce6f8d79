//! Independent reference computations used only by the tests.
#![allow(dead_code)]

use dbp::linalg::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix<f64> {
    let data = (0..rows * cols).map(|_| r.gen_range(-1.0..1.0)).collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

pub fn random_vec(r: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| r.gen_range(-scale..scale)).collect()
}

/// Minimizes a convex function of one variable on `[lo, hi]` by golden
/// section search.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..300 {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = f(b);
        }
    }
    // the objective is exactly flat at its kink only; prefer an exact zero
    let mid = 0.5 * (lo + hi);
    if lo <= 0.0 && 0.0 <= hi && f(0.0) <= f(mid) {
        0.0
    } else {
        mid
    }
}

/// Solves a square system by Gaussian elimination with partial pivoting;
/// `None` when singular to working precision.
pub fn gauss_solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    Some(x)
}

pub fn node_objective(x: &[f64], v: &[f64], c: f64) -> f64 {
    x.iter()
        .zip(v)
        .map(|(&xi, &vi)| xi.abs() + vi * xi + c * xi * xi)
        .sum()
}

/// Minimizes `‖x‖₁ + vᵀx + c‖x‖²` subject to `A x = b` by enumerating sign
/// patterns: for each pattern the problem is an equality-constrained
/// quadratic program solved through its KKT system; candidates whose signs
/// disagree with the pattern are discarded. Exponential in `n`.
pub fn kkt_enumeration(a: &DenseMatrix<f64>, b: &[f64], v: &[f64], c: f64) -> (Vec<f64>, f64) {
    let (m, n) = (a.rows(), a.cols());
    let mut best: Option<(Vec<f64>, f64)> = None;
    let patterns = 3usize.pow(n as u32);
    for code in 0..patterns {
        let mut signs = vec![0i8; n];
        let mut rest = code;
        for s in signs.iter_mut() {
            *s = (rest % 3) as i8 - 1;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| signs[i] != 0).collect();
        let k = free.len();
        // unknowns: x_F (k), μ (m); rows: 2c x_F - A_Fᵀμ = -(s + v)_F ; A_F x_F = b
        let size = k + m;
        let mut sys = vec![vec![0.0; size]; size];
        let mut rhs = vec![0.0; size];
        for (r, &i) in free.iter().enumerate() {
            sys[r][r] = 2.0 * c;
            for q in 0..m {
                sys[r][k + q] = -a[(q, i)];
            }
            rhs[r] = -(f64::from(signs[i]) + v[i]);
        }
        for q in 0..m {
            for (r, &i) in free.iter().enumerate() {
                sys[k + q][r] = a[(q, i)];
            }
            rhs[k + q] = b[q];
        }
        let Some(sol) = gauss_solve(sys, rhs) else {
            continue;
        };
        let mut x = vec![0.0; n];
        for (r, &i) in free.iter().enumerate() {
            x[i] = sol[r];
        }
        if free.iter().any(|&i| x[i] * f64::from(signs[i]) < -1e-12) {
            continue;
        }
        let ax = a.mul_vec(&x);
        if ax.iter().zip(b).any(|(p, q)| (p - q).abs() > 1e-9) {
            continue;
        }
        let f = node_objective(&x, v, c);
        if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
            best = Some((x, f));
        }
    }
    best.expect("feasible problem")
}

/// Projection onto `{A x = b}` from the KKT system `[I Aᵀ; A 0]`.
pub fn kkt_projection(a: &DenseMatrix<f64>, b: &[f64], p: &[f64]) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let size = n + m;
    let mut sys = vec![vec![0.0; size]; size];
    let mut rhs = vec![0.0; size];
    for i in 0..n {
        sys[i][i] = 1.0;
        for q in 0..m {
            sys[i][n + q] = a[(q, i)];
            sys[n + q][i] = a[(q, i)];
        }
        rhs[i] = p[i];
    }
    rhs[n..].copy_from_slice(b);
    gauss_solve(sys, rhs).expect("full row rank")[..n].to_vec()
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: &DenseMatrix<f64>) -> Vec<f64> {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Transitive closure of the adjacency relation (Floyd–Warshall).
pub fn reachability(nodes: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; nodes]; nodes];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(i, j) in edges {
        r[i][j] = true;
        r[j][i] = true;
    }
    for k in 0..nodes {
        for i in 0..nodes {
            if r[i][k] {
                for j in 0..nodes {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Central-difference gradient with step `h`.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut z = x.to_vec();
    (0..x.len())
        .map(|i| {
            z[i] = x[i] + h;
            let up = f(&z);
            z[i] = x[i] - h;
            let down = f(&z);
            z[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let s: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / s.max(1e-300)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
