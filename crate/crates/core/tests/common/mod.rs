//! Independent oracles shared by the integration tests. None of these call
//! into the library code they check.

#![allow(dead_code)]

use unionbounds::random::XorShift64Star;
use unionbounds::{LinearProgram, MomentSummary, Sense};

/// Solves the square system `m x = rhs` by Gaussian elimination with partial
/// pivoting. Columns without a usable pivot get `x = 0`; returns `None` when
/// the system is inconsistent.
pub fn gauss_solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let n = rhs.len();
    let cols = if n == 0 { 0 } else { m[0].len() };
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == n {
            break;
        }
        let best = (row..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[best][col].abs() <= tol {
            continue;
        }
        m.swap(row, best);
        rhs.swap(row, best);
        for r in 0..n {
            if r != row {
                let f = m[r][col] / m[row][col];
                if f != 0.0 {
                    for c in col..cols {
                        m[r][c] -= f * m[row][c];
                    }
                    rhs[r] -= f * rhs[row];
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    if rhs[row..].iter().any(|v| v.abs() > tol.sqrt()) {
        return None;
    }
    let mut x = vec![0.0; cols];
    for (r, &c) in pivot_cols.iter().enumerate() {
        x[c] = rhs[r] / m[r][c];
    }
    Some(x)
}

/// `alpha^T B^+ alpha` for a Gram matrix `B` with `alpha` in its range: any
/// solution of `B x = alpha` gives the same `alpha^T x`.
pub fn gk_by_elimination(b: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let x = gauss_solve(b.to_vec(), alpha.to_vec(), 1e-12).expect("alpha lies in range(B)");
    alpha.iter().zip(&x).map(|(a, v)| a * v).sum()
}

/// Brute-force optimum of a bounded LP by enumerating all vertices: every
/// choice of `V` linearly independent tight constraints among equalities,
/// `>=` rows and `x_j = 0`. Returns `None` when no vertex is feasible.
pub fn vertex_enumeration(lp: &LinearProgram, tol: f64) -> Option<f64> {
    let v = lp.n_vars();
    let mut candidates: Vec<(Vec<f64>, f64)> = lp.eq_constraints().to_vec();
    candidates.extend(lp.ge_constraints().iter().cloned());
    for j in 0..v {
        let mut e = vec![0.0; v];
        e[j] = 1.0;
        candidates.push((e, 0.0));
    }
    let mut best: Option<f64> = None;
    for subset in combinations(candidates.len(), v) {
        let rows: Vec<Vec<f64>> = subset.iter().map(|&s| candidates[s].0.clone()).collect();
        let rhs: Vec<f64> = subset.iter().map(|&s| candidates[s].1).collect();
        if rank(&rows, 1e-10) < v {
            continue;
        }
        let Some(x) = gauss_solve(rows, rhs, 1e-12) else {
            continue;
        };
        if lp.max_violation(&x) > tol {
            continue;
        }
        let val = lp.objective_value(&x);
        best = Some(match (best, lp.sense()) {
            (None, _) => val,
            (Some(b), Sense::Minimize) => b.min(val),
            (Some(b), Sense::Maximize) => b.max(val),
        });
    }
    best
}

fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())) else {
            break;
        };
        if m[p][c].abs() <= tol {
            continue;
        }
        m.swap(r, p);
        for i in r + 1..m.len() {
            let f = m[i][c] / m[r][c];
            for k in c..cols {
                m[i][k] -= f * m[r][k];
            }
        }
        r += 1;
    }
    r
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum of `sum_k a(k) / k` subject to `sum a(k) = alpha`,
/// `sum k a(k) = gamma`, `a >= 0`, `k = 1..=cap`, by checking every vertex.
/// Vertices are supported on one degree or on a pair of degrees.
pub fn two_moment_enumeration(alpha: f64, gamma: f64, cap: usize) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let q = gamma / alpha;
    let mut best = f64::INFINITY;
    for k in 1..=cap {
        let kf = k as f64;
        if (q - kf).abs() <= 1e-12 {
            best = best.min(alpha / kf);
        }
        for j in 1..k {
            let jf = j as f64;
            if jf <= q && q <= kf {
                let aj = alpha * (kf - q) / (kf - jf);
                let ak = alpha * (q - jf) / (kf - jf);
                best = best.min(aj / jf + ak / kf);
            }
        }
    }
    best
}

/// A summary with `alpha_i` in `(0, 1 / N]` and ratios `gamma_i / alpha_i`
/// drawn uniformly from `[1, N]`, with some ratios snapped to integers.
pub fn random_summary(rng: &mut XorShift64Star, n: usize) -> MomentSummary {
    let nf = n as f64;
    let alpha: Vec<f64> = (0..n).map(|_| rng.next_f64_open() / nf).collect();
    let gamma = alpha
        .iter()
        .map(|&a| {
            let mut q = 1.0 + (nf - 1.0) * rng.next_f64();
            if rng.range(0, 4) == 0 {
                q = q.round();
            }
            q * a
        })
        .collect();
    MomentSummary::new(alpha, gamma).expect("drawn inside the valid region")
}
