//! Closed-form lower bounds on the union probability.
//!
//! Most bounds here reduce to one kernel: the minimum of `sum_k a(k) / k` over
//! nonnegative `a(1..=cap)` with `sum_k a(k) = alpha` and `sum_k k a(k) = gamma`.
//! The minimum sits on the two degrees bracketing `q = gamma / alpha`:
//!
//! ```text
//! [1/r - (q - r) / ((1 + r) r)] * alpha,   r = floor(q)
//! ```
//!
//! Applied per event this is the KAT bound; applied to the aggregate moments
//! `S1 = sum alpha_i`, `S2 = sum gamma_i` it is the Dawson-Sankoff bound. The
//! sharper YAT bound forces a common top-degree mass `delta` on every event and
//! evaluates the kernel on the remaining moments, with [`chi`] in place of the
//! floor so the top degree is never reused.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::system::{DegreeDecomposition, FiniteProbabilitySystem, MomentSummary};

/// Values within this distance of an integer are treated as that integer.
pub const SNAP_TOL: f64 = 1e-9;

/// Masses at or below this are treated as zero.
pub const ZERO_MASS: f64 = 1e-12;

/// Relative eigenvalue cutoff for the pseudo-inverse in [`gk_bound`].
pub const GK_EIGEN_CUTOFF: f64 = 1e-10;

fn snapped(x: f64) -> Option<usize> {
    let r = x.round();
    ((x - r).abs() <= SNAP_TOL && r >= 0.0).then_some(r as usize)
}

fn snapped_floor(x: f64) -> usize {
    snapped(x).unwrap_or_else(|| x.floor() as usize)
}

/// `n - 1` when `x` is an integer `n >= 2`, otherwise `floor(x)`.
pub fn chi(x: f64) -> Result<usize> {
    if !(x >= 1.0 - SNAP_TOL) {
        return Err(Error::Domain(format!("chi is defined for x >= 1, got {x}")));
    }
    Ok(match snapped(x) {
        Some(n) if n >= 2 => n - 1,
        Some(n) => n,
        None => x.floor() as usize,
    })
}

/// Moments `(alpha, gamma)` of a mass spread over degrees `1..=cap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoMomentInput {
    alpha: f64,
    gamma: f64,
    cap: usize,
}

impl TwoMomentInput {
    pub fn new(alpha: f64, gamma: f64, cap: usize) -> Result<Self> {
        if cap == 0 {
            return Err(Error::Domain("cap must be positive".into()));
        }
        if !(alpha >= 0.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!("alpha = {alpha} must be >= 0")));
        }
        if alpha > 0.0 {
            let q = gamma / alpha;
            if q < 1.0 - SNAP_TOL || q > cap as f64 + SNAP_TOL {
                return Err(Error::Domain(format!(
                    "gamma / alpha = {q} outside [1, {cap}]"
                )));
            }
        } else if gamma.abs() > ZERO_MASS {
            return Err(Error::Domain("gamma must vanish with alpha".into()));
        }
        Ok(Self { alpha, gamma, cap })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn ratio(&self) -> f64 {
        (self.gamma / self.alpha).clamp(1.0, self.cap as f64)
    }
}

/// Kernel value with the lower support degree `low` and ratio `q`.
fn kernel(alpha: f64, q: f64, low: usize) -> f64 {
    let r = low as f64;
    (1.0 / r - (q - r) / ((1.0 + r) * r)) * alpha
}

/// Minimum of `sum_k a(k) / k` over the two-moment polytope.
pub fn two_moment_min(input: &TwoMomentInput) -> f64 {
    if input.alpha <= ZERO_MASS {
        return 0.0;
    }
    let q = input.ratio();
    kernel(input.alpha, q, snapped_floor(q))
}

/// [`two_moment_min`] with [`chi`] choosing the lower support degree. Agrees
/// with the floor version everywhere; at an integer ratio `n` both give `alpha / n`.
pub fn two_moment_min_chi(input: &TwoMomentInput) -> f64 {
    if input.alpha <= ZERO_MASS {
        return 0.0;
    }
    let q = input.ratio();
    kernel(input.alpha, q, chi(q).expect("ratio is at least 1"))
}

/// The vertex attaining [`two_moment_min`]: mass on `floor(q)` and `floor(q) + 1`,
/// or all of it on `q` when the ratio is an integer. Index `k - 1` holds degree `k`.
pub fn two_moment_argmin(input: &TwoMomentInput) -> Vec<f64> {
    let mut a = vec![0.0; input.cap];
    if input.alpha <= ZERO_MASS {
        return a;
    }
    let q = input.ratio();
    match snapped(q) {
        Some(n) => a[n - 1] = input.alpha,
        None => {
            let r = q.floor() as usize;
            let frac = q - r as f64;
            a[r - 1] = input.alpha * (1.0 - frac);
            a[r] = input.alpha * frac;
        }
    }
    a
}

fn event_input(s: &MomentSummary, i: usize) -> TwoMomentInput {
    TwoMomentInput {
        alpha: s.alpha()[i].max(0.0),
        gamma: s.gamma()[i],
        cap: s.n_events(),
    }
}

/// `sum_i two_moment_min(alpha_i, gamma_i)`.
pub fn kat_bound(s: &MomentSummary) -> f64 {
    (0..s.n_events())
        .map(|i| two_moment_min(&event_input(s, i)))
        .sum()
}

/// The unique optimal point of the per-event LP behind [`kat_bound`].
pub fn kat_decomposition(s: &MomentSummary) -> DegreeDecomposition {
    let rows = (0..s.n_events())
        .map(|i| two_moment_argmin(&event_input(s, i)))
        .collect();
    DegreeDecomposition::new(rows).expect("argmin rows are nonnegative")
}

/// `max(0, max_i [gamma_i - (N - 1) alpha_i])`: the least top-degree mass any
/// realizing system must carry.
pub fn delta(s: &MomentSummary) -> f64 {
    let n1 = (s.n_events() - 1) as f64;
    s.alpha()
        .iter()
        .zip(s.gamma())
        .map(|(a, g)| g - n1 * a)
        .fold(0.0, f64::max)
}

/// Interval of top-degree masses `x` for which the shifted moments
/// `(alpha - x, gamma - N x)` stay on degrees `1..N`.
pub fn top_mass_interval(alpha: f64, gamma: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let lo = (gamma - (nf - 1.0) * alpha).max(0.0);
    let hi = if n == 1 { alpha } else { (gamma - alpha) / (nf - 1.0) };
    (lo, hi)
}

fn check_existence(s: &MomentSummary, d: f64) -> Result<()> {
    let n = s.n_events();
    for i in 0..n {
        let (_, hi) = top_mass_interval(s.alpha()[i], s.gamma()[i], n);
        if d > hi + SNAP_TOL {
            return Err(Error::Infeasible(format!(
                "common top-degree mass {d} exceeds beta_{} / (N - 1) = {hi}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Minimum contribution of one event when every event carries mass `x` at
/// degree `N`: the kernel on `(alpha - x, gamma - N x)` over degrees `1..N-1`
/// plus `x / N`.
pub fn per_event_value(x: f64, alpha: f64, gamma: f64, n: usize) -> Result<f64> {
    let (lo, hi) = top_mass_interval(alpha, gamma, n);
    if !(x >= lo - SNAP_TOL && x <= hi + SNAP_TOL) {
        return Err(Error::Domain(format!(
            "top-degree mass {x} outside feasible interval [{lo}, {hi}]"
        )));
    }
    let nf = n as f64;
    let rest_alpha = alpha - x;
    if rest_alpha <= ZERO_MASS {
        return Ok(x / nf);
    }
    let top = n.saturating_sub(1).max(1) as f64;
    let q = ((gamma - nf * x) / rest_alpha).clamp(1.0, top);
    let k = chi(q)?;
    Ok(kernel(rest_alpha, q, k) + x / nf)
}

/// Slope of [`per_event_value`] in `x`, away from integer-ratio breakpoints:
/// `(N - k)(N - k - 1) / (N k (k + 1))` with `k = chi(ratio)`.
pub fn per_event_slope(x: f64, alpha: f64, gamma: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    let rest_alpha = alpha - x;
    if rest_alpha <= ZERO_MASS {
        return Err(Error::Domain("no mass below the top degree".into()));
    }
    let q = ((gamma - nf * x) / rest_alpha).clamp(1.0, n.saturating_sub(1).max(1) as f64);
    Ok(slope_at(chi(q)?, n))
}

fn slope_at(k: usize, n: usize) -> f64 {
    let (k, n) = (k as f64, n as f64);
    (n - k) * (n - k - 1.0) / (n * k * (k + 1.0))
}

/// The YAT bound: `sum_i per_event_value(delta, alpha_i, gamma_i)`.
pub fn yat_bound(s: &MomentSummary) -> Result<f64> {
    let n = s.n_events();
    let d = delta(s);
    check_existence(s, d)?;
    (0..n)
        .map(|i| {
            let (lo, hi) = top_mass_interval(s.alpha()[i], s.gamma()[i], n);
            per_event_value(d.clamp(lo, hi.max(lo)), s.alpha()[i], s.gamma()[i], n)
        })
        .sum()
}

/// Lower bound on `yat_bound - kat_bound` from the slope of each event term at zero.
pub fn gap_lower_bound(s: &MomentSummary) -> Result<f64> {
    let n = s.n_events();
    let d = delta(s);
    check_existence(s, d)?;
    let mut weight = 0.0;
    for i in 0..n {
        let input = event_input(s, i);
        if input.alpha <= ZERO_MASS {
            continue;
        }
        let k = chi(input.ratio())? as f64;
        let nf = n as f64;
        weight += (nf - k) * (nf - k - 1.0) / (k * (k + 1.0));
    }
    Ok(weight * d / n as f64)
}

pub fn kat_plus_gap_bound(s: &MomentSummary) -> Result<f64> {
    Ok(kat_bound(s) + gap_lower_bound(s)?)
}

/// Dawson-Sankoff: the kernel applied to `S1 = sum alpha_i`, `S2 = sum gamma_i`.
pub fn ds_bound(s: &MomentSummary) -> f64 {
    let s1: f64 = s.alpha().iter().sum();
    let s2: f64 = s.gamma().iter().sum();
    if s1 <= ZERO_MASS {
        return 0.0;
    }
    two_moment_min(&TwoMomentInput {
        alpha: s1,
        gamma: s2,
        cap: s.n_events(),
    })
}

/// de Caen: `sum_i alpha_i^2 / gamma_i`.
pub fn de_caen_bound(s: &MomentSummary) -> f64 {
    s.alpha()
        .iter()
        .zip(s.gamma())
        .filter(|(a, _)| **a > ZERO_MASS)
        .map(|(a, g)| a * a / g)
        .sum()
}

/// Gallot-Kounias: `alpha^T B^+ alpha` where `B_ij = P(A_i ∩ A_j)`.
pub fn gk_bound(pairwise: &[Vec<f64>], alpha: &[f64]) -> Result<f64> {
    let n = alpha.len();
    if pairwise.len() != n || pairwise.iter().any(|row| row.len() != n) {
        return Err(Error::Domain(format!("pairwise matrix must be {n} x {n}")));
    }
    for i in 0..n {
        if (pairwise[i][i] - alpha[i]).abs() > SNAP_TOL {
            return Err(Error::Domain(format!(
                "diagonal entry {} is {} but alpha is {}",
                i + 1,
                pairwise[i][i],
                alpha[i]
            )));
        }
        for j in 0..i {
            if (pairwise[i][j] - pairwise[j][i]).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "pairwise matrix is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let b = DMatrix::from_fn(n, n, |i, j| pairwise[i][j]);
    let eig = SymmetricEigen::new(b);
    let max_eig = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -GK_EIGEN_CUTOFF * max_eig.max(1.0) {
        return Err(Error::Domain(format!(
            "pairwise matrix is not positive semidefinite (eigenvalue {min_eig})"
        )));
    }
    let cutoff = GK_EIGEN_CUTOFF * max_eig;
    let mut total = 0.0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= cutoff || lambda <= 0.0 {
            continue;
        }
        let proj: f64 = eig
            .eigenvectors
            .column(k)
            .iter()
            .zip(alpha)
            .map(|(v, a)| v * a)
            .sum();
        total += proj * proj / lambda;
    }
    Ok(total)
}

pub fn gk_bound_for_system(sys: &FiniteProbabilitySystem) -> Result<f64> {
    let b = sys.pairwise_matrix()?;
    let alpha: Vec<f64> = (0..b.len()).map(|i| b[i][i]).collect();
    gk_bound(&b, &alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{system_v, system_vi, system_vii, system_viii};

    fn input(a: f64, g: f64, cap: usize) -> TwoMomentInput {
        TwoMomentInput::new(a, g, cap).unwrap()
    }

    // Enumerates every pair of support degrees; the minimum over feasible
    // pairs is the LP optimum of the two-moment problem.
    fn brute_two_moment(alpha: f64, gamma: f64, cap: usize) -> f64 {
        let q = gamma / alpha;
        let mut best = f64::INFINITY;
        for k1 in 1..=cap {
            if (q - k1 as f64).abs() < 1e-12 {
                best = best.min(alpha / k1 as f64);
            }
            for k2 in k1 + 1..=cap {
                let (f1, f2) = (k1 as f64, k2 as f64);
                let a1 = (f2 * alpha - gamma) / (f2 - f1);
                let a2 = (gamma - f1 * alpha) / (f2 - f1);
                if a1 >= -1e-15 && a2 >= -1e-15 {
                    best = best.min(a1 / f1 + a2 / f2);
                }
            }
        }
        best
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi(3.0).unwrap(), 2);
        assert_eq!(chi(2.5).unwrap(), 2);
        assert_eq!(chi(1.0).unwrap(), 1);
        assert_eq!(chi(2.0 + 1e-11).unwrap(), 1);
        assert_eq!(chi(3.0 - 1e-11).unwrap(), 2);
        assert!(chi(0.5).is_err());
        assert!(chi(f64::NAN).is_err());
    }

    #[test]
    fn two_moment_examples() {
        let v = two_moment_min(&input(0.1, 0.21, 3));
        assert!((v - brute_two_moment(0.1, 0.21, 3)).abs() < 1e-15);
        assert!((v - 0.048_333_333_333_333_33).abs() < 1e-12);
        assert!((two_moment_min(&input(0.5, 0.74, 3)) - 0.38).abs() < 1e-12);
        assert!((two_moment_min(&input(0.3, 0.3, 3)) - 0.3).abs() < 1e-15);
        assert_eq!(two_moment_min(&input(0.0, 0.0, 3)), 0.0);
    }

    #[test]
    fn two_moment_input_rejects_bad_ratios() {
        assert!(TwoMomentInput::new(0.1, 0.05, 3).is_err());
        assert!(TwoMomentInput::new(0.1, 0.31, 3).is_err());
        assert!(TwoMomentInput::new(-0.1, 0.1, 3).is_err());
        assert!(TwoMomentInput::new(0.1, 0.1, 0).is_err());
        assert!(TwoMomentInput::new(0.1, 0.3 + 1e-12, 3).is_ok());
    }

    #[test]
    fn chi_and_floor_agree_at_integer_ratios() {
        for n in 1..=8 {
            for cap in n..=8 {
                let inp = input(0.2, 0.2 * n as f64, cap);
                let a = two_moment_min(&inp);
                let b = two_moment_min_chi(&inp);
                assert!((a - b).abs() < 1e-15);
                assert!((a - 0.2 / n as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn reference_values() {
        let cases = [
            (system_v(), 0.3833, 0.3900, 0.3800, 0.3495, 0.3813, 0.0067),
            (system_vi(), 0.2769, 0.3205, 0.2706, 0.2720, 0.2972, 0.0206),
            (system_vii(), 0.4434, 0.4562, 0.3989, 0.4186, 0.4750, 0.0128),
            (system_viii(), 0.5412, 0.5464, 0.5395, 0.5352, 0.5390, 0.0051),
        ];
        for (sys, kat, yat, ds, dc, gk, gap) in cases {
            let s = sys.moment_summary().unwrap();
            assert!((kat_bound(&s) - kat).abs() < 5e-5);
            assert!((yat_bound(&s).unwrap() - yat).abs() < 5e-5);
            assert!((ds_bound(&s) - ds).abs() < 5e-5);
            assert!((de_caen_bound(&s) - dc).abs() < 5e-5);
            assert!((gk_bound_for_system(&sys).unwrap() - gk).abs() < 5e-5);
            assert!((gap_lower_bound(&s).unwrap() - gap).abs() < 5e-5);
        }
    }

    #[test]
    fn system_v_delta_and_per_event_value() {
        let s = system_v().moment_summary().unwrap();
        assert!((delta(&s) - 0.01).abs() < 1e-12);
        let f = per_event_value(0.01, 0.1, 0.21, 3).unwrap();
        assert!((f - (0.045 + 0.01 / 3.0)).abs() < 1e-12);
        let total: f64 = (0..3)
            .map(|i| per_event_value(0.01, s.alpha()[i], s.gamma()[i], 3).unwrap())
            .sum();
        assert!((total - 0.39).abs() < 1e-12);
    }

    #[test]
    fn per_event_value_edges() {
        // Zero shift at a non-integer ratio is the KAT term.
        let f0 = per_event_value(0.0, 0.2, 0.265, 3).unwrap();
        assert!((f0 - two_moment_min(&input(0.2, 0.265, 3))).abs() < 1e-15);
        // All mass on the top degree.
        let f = per_event_value(0.1, 0.1, 0.3, 3).unwrap();
        assert!((f - 0.1 / 3.0).abs() < 1e-15);
        // Outside the interval.
        assert!(per_event_value(0.2, 0.2, 0.265, 3).is_err());
        assert!(per_event_value(0.0, 0.1, 0.25, 3).is_err());
    }

    #[test]
    fn sum_kat_and_disjoint_cases() {
        let s = MomentSummary::new(vec![0.1, 0.2, 0.3], vec![0.1, 0.2, 0.3]).unwrap();
        assert!((kat_bound(&s) - 0.6).abs() < 1e-15);
        assert!((yat_bound(&s).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(gap_lower_bound(&s).unwrap(), 0.0);
        assert!((kat_plus_gap_bound(&s).unwrap() - 0.6).abs() < 1e-15);
        assert!((de_caen_bound(&s) - 0.6).abs() < 1e-15);
        let b = vec![
            vec![0.1, 0.0, 0.0],
            vec![0.0, 0.2, 0.0],
            vec![0.0, 0.0, 0.3],
        ];
        assert!((gk_bound(&b, &[0.1, 0.2, 0.3]).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn single_event_bounds() {
        let s = MomentSummary::new(vec![0.3], vec![0.3]).unwrap();
        assert!((ds_bound(&s) - 0.3).abs() < 1e-15);
        assert!((kat_bound(&s) - 0.3).abs() < 1e-15);
        assert!((yat_bound(&s).unwrap() - 0.3).abs() < 1e-15);
        assert!((de_caen_bound(&s) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_alpha_events_contribute_nothing() {
        let s = MomentSummary::new(vec![0.0, 0.2], vec![0.0, 0.2]).unwrap();
        assert!((kat_bound(&s) - 0.2).abs() < 1e-15);
        assert!((de_caen_bound(&s) - 0.2).abs() < 1e-15);
        assert!((yat_bound(&s).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn yat_rejects_unrealizable_summary() {
        // Event 1 needs top-degree mass 0.1 but event 2 has no pairwise mass.
        let s = MomentSummary::new(vec![0.1, 0.3], vec![0.2, 0.3]).unwrap();
        assert!(matches!(yat_bound(&s), Err(Error::Infeasible(_))));
        assert!(gap_lower_bound(&s).is_err());
    }

    #[test]
    fn yat_at_single_feasible_point() {
        // delta equals every beta_i / (N - 1): the interval is a single point.
        let s = MomentSummary::new(vec![0.2, 0.2], vec![0.4, 0.4]).unwrap();
        assert!((yat_bound(&s).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn gk_rejects_asymmetric_input() {
        let b = vec![vec![0.1, 0.05], vec![0.04, 0.2]];
        assert!(gk_bound(&b, &[0.1, 0.2]).is_err());
        let b = vec![vec![0.1, 0.0], vec![0.0, 0.2]];
        assert!(gk_bound(&b, &[0.2, 0.2]).is_err());
    }

    #[test]
    fn gk_handles_rank_deficient_matrix() {
        // Two identical events: B is singular, B^+ still gives P(A) = 0.3.
        let b = vec![vec![0.3, 0.3], vec![0.3, 0.3]];
        assert!((gk_bound(&b, &[0.3, 0.3]).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn kat_decomposition_for_system_v() {
        let s = system_v().moment_summary().unwrap();
        let a = kat_decomposition(&s);
        let expected = [[0.0, 0.09, 0.01], [0.135, 0.065, 0.0], [0.135, 0.065, 0.0]];
        for i in 0..3 {
            for k in 0..3 {
                assert!((a.rows()[i][k] - expected[i][k]).abs() < 1e-12);
            }
        }
        assert!((a.union_value() - kat_bound(&s)).abs() < 1e-15);
    }
}
