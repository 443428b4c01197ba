//! LP formulations of union bounds over the degree decomposition `a_i(k)`.
//!
//! Every program minimizes (or maximizes) `sum_i sum_k a_i(k) / k` under some
//! subset of:
//!
//! * moment rows: `sum_k a_i(k) = alpha_i`, `sum_k k a_i(k) = gamma_i`;
//! * coupling rows: `sum_i a_i(k) >= k a_j(k)` for every `j, k`, which any
//!   decomposition coming from real events satisfies.
//!
//! Variable layout. The full layout stores `a_i(k)` at `i * N + (k - 1)`. The
//! reduced layout used by [`LpBounds::optimal_lower`] stores `a_i(k)` for
//! `k < N` at `i * (N - 1) + (k - 1)` and a single shared top-degree variable
//! last, at `N * (N - 1)`; the degree-`N` coupling rows force
//! `a_1(N) = ... = a_N(N)`, so the shared variable replaces them.

use crate::error::{Error, Result};
use crate::simplex::{solve_with, LinearProgram, LpSolution, Sense, SolverOptions};
use crate::system::{DegreeDecomposition, MomentSummary};

#[derive(Debug, Clone, PartialEq)]
pub struct LpBoundResult {
    pub value: f64,
    pub decomposition: DegreeDecomposition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaOnlyBounds {
    pub lower: f64,
    pub upper: f64,
}

/// What an infeasible program means for the caller.
#[derive(Clone, Copy)]
enum OnInfeasible {
    Summary,
    Realizability,
}

fn full_index(n: usize, i: usize, k: usize) -> usize {
    i * n + (k - 1)
}

fn reduced_index(n: usize, i: usize, k: usize) -> usize {
    if k == n {
        n * (n - 1)
    } else {
        i * (n - 1) + (k - 1)
    }
}

/// Which top-degree handling a program over the decomposition uses.
#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Full,
    Reduced,
}

impl Layout {
    fn n_vars(self, n: usize) -> usize {
        match self {
            Layout::Full => n * n,
            Layout::Reduced => n * n - n + 1,
        }
    }

    fn index(self, n: usize, i: usize, k: usize) -> usize {
        match self {
            Layout::Full => full_index(n, i, k),
            Layout::Reduced => reduced_index(n, i, k),
        }
    }

    /// Objective `sum_i sum_k a_i(k) / k` in this layout.
    fn union_objective(self, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.n_vars(n)];
        for i in 0..n {
            for k in 1..=n {
                c[self.index(n, i, k)] += 1.0 / k as f64;
            }
        }
        c
    }

    fn decomposition(self, n: usize, point: &[f64]) -> DegreeDecomposition {
        let rows = (0..n)
            .map(|i| {
                (1..=n)
                    .map(|k| point[self.index(n, i, k)].max(0.0))
                    .collect()
            })
            .collect();
        DegreeDecomposition::new(rows).expect("clamped LP point is a valid decomposition")
    }
}

struct Builder {
    n: usize,
    layout: Layout,
    lp: LinearProgram,
}

impl Builder {
    fn new(n: usize, layout: Layout, sense: Sense) -> Self {
        let lp = LinearProgram::new(layout.union_objective(n), sense);
        Self { n, layout, lp }
    }

    fn zero_row(&self) -> Vec<f64> {
        vec![0.0; self.layout.n_vars(self.n)]
    }

    fn mass_rows(&mut self, alpha: &[f64]) {
        for (i, &a) in alpha.iter().enumerate() {
            let mut row = self.zero_row();
            for k in 1..=self.n {
                row[self.layout.index(self.n, i, k)] += 1.0;
            }
            self.lp.add_eq(row, a);
        }
    }

    fn first_moment_rows(&mut self, gamma: &[f64]) {
        for (i, &g) in gamma.iter().enumerate() {
            let mut row = self.zero_row();
            for k in 1..=self.n {
                row[self.layout.index(self.n, i, k)] += k as f64;
            }
            self.lp.add_eq(row, g);
        }
    }

    /// `sum_i a_i(k) >= k a_j(k)` for every `j` and every `k` in `degrees`.
    fn coupling_rows(&mut self, degrees: impl IntoIterator<Item = usize>) {
        for k in degrees {
            for j in 0..self.n {
                let mut row = self.zero_row();
                for i in 0..self.n {
                    row[self.layout.index(self.n, i, k)] += 1.0;
                }
                row[self.layout.index(self.n, j, k)] -= k as f64;
                self.lp.add_ge(row, 0.0);
            }
        }
    }

    /// `sum_i sum_k a_i(k) / k <= 1`.
    fn union_cap(&mut self) {
        let row = self.layout.union_objective(self.n);
        self.lp.add_le(row, 1.0);
    }
}

/// LP bound solver carrying simplex tolerances.
#[derive(Debug, Clone, Copy, Default)]
pub struct LpBounds {
    pub options: SolverOptions,
}

impl LpBounds {
    pub fn new(options: SolverOptions) -> Self {
        Self { options }
    }

    fn run(&self, b: Builder, on_infeasible: OnInfeasible, what: &str) -> Result<LpBoundResult> {
        match solve_with(&b.lp, &self.options)? {
            LpSolution::Optimal { value, point } => Ok(LpBoundResult {
                value,
                decomposition: b.layout.decomposition(b.n, &point),
            }),
            LpSolution::Infeasible => Err(match on_infeasible {
                OnInfeasible::Summary => Error::Infeasible(format!("{what} has no feasible point")),
                OnInfeasible::Realizability => Error::NotRealizable,
            }),
            LpSolution::Unbounded => Err(Error::Unbounded),
        }
    }

    fn moments(&self, s: &MomentSummary, layout: Layout, sense: Sense) -> Builder {
        let mut b = Builder::new(s.n_events(), layout, sense);
        b.mass_rows(s.alpha());
        b.first_moment_rows(s.gamma());
        b
    }

    /// Per-event moment rows only; its optimum equals [`crate::analytic::kat_bound`].
    pub fn kat(&self, s: &MomentSummary) -> Result<LpBoundResult> {
        let b = self.moments(s, Layout::Full, Sense::Minimize);
        self.run(b, OnInfeasible::Summary, "KAT LP")
    }

    /// The optimal lower bound, on the reduced `N^2 - N + 1` variable layout.
    pub fn optimal_lower(&self, s: &MomentSummary) -> Result<LpBoundResult> {
        let n = s.n_events();
        let mut b = self.moments(s, Layout::Reduced, Sense::Minimize);
        b.coupling_rows(1..n);
        self.run(b, OnInfeasible::Realizability, "optimal lower LP")
    }

    /// The optimal lower bound on the full `N^2` layout with every coupling row.
    /// Kept as a cross-check for the reduced program.
    pub fn optimal_lower_unreduced(&self, s: &MomentSummary) -> Result<LpBoundResult> {
        let n = s.n_events();
        let mut b = self.moments(s, Layout::Full, Sense::Minimize);
        b.coupling_rows(1..=n);
        self.run(b, OnInfeasible::Realizability, "optimal lower LP")
    }

    /// The optimal upper bound: maximize under the same rows plus the union cap.
    pub fn optimal_upper(&self, s: &MomentSummary) -> Result<LpBoundResult> {
        let n = s.n_events();
        let mut b = self.moments(s, Layout::Reduced, Sense::Maximize);
        b.coupling_rows(1..n);
        b.union_cap();
        self.run(b, OnInfeasible::Realizability, "optimal upper LP")
    }

    /// Moment rows plus only the top-degree coupling; its optimum equals
    /// [`crate::analytic::yat_bound`].
    pub fn top_degree_relaxed(&self, s: &MomentSummary) -> Result<LpBoundResult> {
        let b = self.moments(s, Layout::Reduced, Sense::Minimize);
        self.run(b, OnInfeasible::Summary, "top-degree relaxed LP")
    }

    /// Aggregate program over `a(k)` with `sum a(k) = S1`, `sum k a(k) = S2`.
    /// The optimum is spread evenly, `a_j(k) = a(k) / N`, into a full decomposition.
    pub fn ds(&self, s: &MomentSummary) -> Result<LpBoundResult> {
        let n = s.n_events();
        let s1: f64 = s.alpha().iter().sum();
        let s2: f64 = s.gamma().iter().sum();
        let mut lp = LinearProgram::minimize((1..=n).map(|k| 1.0 / k as f64).collect());
        lp.add_eq(vec![1.0; n], s1);
        lp.add_eq((1..=n).map(|k| k as f64).collect(), s2);
        match solve_with(&lp, &self.options)? {
            LpSolution::Optimal { value, point } => {
                let row: Vec<f64> = point.iter().map(|v| v.max(0.0) / n as f64).collect();
                Ok(LpBoundResult {
                    value,
                    decomposition: DegreeDecomposition::new(vec![row; n])?,
                })
            }
            LpSolution::Infeasible => Err(Error::Infeasible(format!(
                "S2 / S1 = {} outside [1, {n}]",
                s2 / s1
            ))),
            LpSolution::Unbounded => Err(Error::Unbounded),
        }
    }

    /// Optimal bounds from `alpha` alone, solved as LPs with the coupling rows
    /// and the union cap.
    pub fn alpha_only(&self, alpha: &[f64], sense: Sense) -> Result<LpBoundResult> {
        let n = alpha.len();
        if n == 0 {
            return Err(Error::Domain("no events".into()));
        }
        let mut b = Builder::new(n, Layout::Full, sense);
        b.mass_rows(alpha);
        b.coupling_rows(1..=n);
        b.union_cap();
        self.run(b, OnInfeasible::Summary, "alpha-only LP")
    }
}

pub fn kat_lp(s: &MomentSummary) -> Result<LpBoundResult> {
    LpBounds::default().kat(s)
}

pub fn optimal_lower_lp(s: &MomentSummary) -> Result<LpBoundResult> {
    LpBounds::default().optimal_lower(s)
}

pub fn optimal_lower_lp_unreduced(s: &MomentSummary) -> Result<LpBoundResult> {
    LpBounds::default().optimal_lower_unreduced(s)
}

pub fn optimal_upper_lp(s: &MomentSummary) -> Result<LpBoundResult> {
    LpBounds::default().optimal_upper(s)
}

pub fn top_degree_relaxed_lp(s: &MomentSummary) -> Result<LpBoundResult> {
    LpBounds::default().top_degree_relaxed(s)
}

pub fn ds_lp(s: &MomentSummary) -> Result<LpBoundResult> {
    LpBounds::default().ds(s)
}

/// `(max_i alpha_i, min(sum_i alpha_i, 1))`, the optimal bounds given only `alpha`.
pub fn alpha_only_bounds(alpha: &[f64]) -> Result<AlphaOnlyBounds> {
    if alpha.is_empty() {
        return Err(Error::Domain("no events".into()));
    }
    if let Some(a) = alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::Domain(format!("alpha = {a} outside [0, 1]")));
    }
    Ok(AlphaOnlyBounds {
        lower: alpha.iter().copied().fold(0.0, f64::max),
        upper: alpha.iter().sum::<f64>().min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::reference::{system_v, system_vi, system_vii, system_viii};

    fn summary(sys: &crate::system::FiniteProbabilitySystem) -> MomentSummary {
        sys.moment_summary().unwrap()
    }

    #[test]
    fn kat_lp_recovers_system_v_point() {
        let r = kat_lp(&summary(&system_v())).unwrap();
        assert!((r.value - 0.383_333_333_333_333_3).abs() < 1e-9);
        let expected = [[0.0, 0.09, 0.01], [0.135, 0.065, 0.0], [0.135, 0.065, 0.0]];
        for i in 0..3 {
            for k in 0..3 {
                assert!((r.decomposition.rows()[i][k] - expected[i][k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn kat_lp_for_disjoint_events() {
        let s = MomentSummary::new(vec![0.1, 0.2], vec![0.1, 0.2]).unwrap();
        let r = kat_lp(&s).unwrap();
        assert!((r.value - 0.3).abs() < 1e-12);
        assert_eq!(r.decomposition.rows(), &[vec![0.1, 0.0], vec![0.2, 0.0]]);
    }

    #[test]
    fn reference_lp_values() {
        let cases = [
            (system_v(), 0.3833, 0.3900, 0.3800),
            (system_vi(), 0.2769, 0.3252, 0.2706),
            (system_vii(), 0.4434, 0.5090, 0.3989),
            (system_viii(), 0.5412, 0.5513, 0.5395),
        ];
        for (sys, kat, opt, ds) in cases {
            let s = summary(&sys);
            assert!((kat_lp(&s).unwrap().value - kat).abs() < 5e-5);
            assert!((optimal_lower_lp(&s).unwrap().value - opt).abs() < 5e-5);
            assert!((ds_lp(&s).unwrap().value - ds).abs() < 5e-5);
        }
    }

    #[test]
    fn reduction_matches_unreduced_program() {
        for sys in [system_v(), system_vi(), system_vii(), system_viii()] {
            let s = summary(&sys);
            let a = optimal_lower_lp(&s).unwrap().value;
            let b = optimal_lower_lp_unreduced(&s).unwrap().value;
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn single_event_programs() {
        let s = MomentSummary::new(vec![0.3], vec![0.3]).unwrap();
        assert!((optimal_lower_lp(&s).unwrap().value - 0.3).abs() < 1e-12);
        assert!((optimal_upper_lp(&s).unwrap().value - 0.3).abs() < 1e-12);
        assert!((ds_lp(&s).unwrap().value - 0.3).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_brackets_system_v() {
        let sys = system_v();
        let up = optimal_upper_lp(&summary(&sys)).unwrap();
        let exact = sys.exact_union_probability().unwrap();
        assert!(up.value >= exact - 1e-9 && up.value <= 1.0 + 1e-9);
        assert!(up.decomposition.max_coupling_violation() <= 1e-9);
    }

    #[test]
    fn upper_bound_below_alpha_only_upper() {
        let s = MomentSummary::new(vec![0.3, 0.4, 0.5], vec![0.5, 0.6, 0.7]).unwrap();
        let up = optimal_upper_lp(&s).unwrap().value;
        let ao = alpha_only_bounds(s.alpha()).unwrap();
        assert!(up <= ao.upper + 1e-9);
        assert!((ao.upper - 1.0).abs() < 1e-15);
        // All mass at degree one would put the union at 1.2.
        let s = MomentSummary::new(vec![0.3, 0.4, 0.5], vec![0.3, 0.4, 0.5]).unwrap();
        assert!(matches!(optimal_upper_lp(&s), Err(Error::NotRealizable)));
    }

    #[test]
    fn alpha_only_examples() {
        let b = alpha_only_bounds(&[0.1, 0.2, 0.2]).unwrap();
        assert!((b.lower - 0.2).abs() < 1e-15 && (b.upper - 0.5).abs() < 1e-15);
        let b = alpha_only_bounds(&[0.6, 0.6]).unwrap();
        assert_eq!((b.lower, b.upper), (0.6, 1.0));
        let b = alpha_only_bounds(&[0.3]).unwrap();
        assert_eq!((b.lower, b.upper), (0.3, 0.3));
        assert!(alpha_only_bounds(&[]).is_err());
        assert!(alpha_only_bounds(&[1.2]).is_err());
    }

    #[test]
    fn alpha_only_lp_matches_closed_form() {
        let solver = LpBounds::default();
        for alpha in [vec![0.1, 0.2, 0.2], vec![0.6, 0.6], vec![0.3], vec![0.05, 0.4, 0.3, 0.2]] {
            let b = alpha_only_bounds(&alpha).unwrap();
            let lo = solver.alpha_only(&alpha, Sense::Minimize).unwrap().value;
            let hi = solver.alpha_only(&alpha, Sense::Maximize).unwrap().value;
            assert!((lo - b.lower).abs() < 1e-9, "{alpha:?}: {lo} vs {}", b.lower);
            assert!((hi - b.upper).abs() < 1e-9, "{alpha:?}: {hi} vs {}", b.upper);
        }
    }

    #[test]
    fn top_degree_relaxed_matches_yat() {
        for sys in [system_v(), system_vi(), system_vii(), system_viii()] {
            let s = summary(&sys);
            let lp = top_degree_relaxed_lp(&s).unwrap().value;
            assert!((lp - analytic::yat_bound(&s).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn ds_lp_expands_evenly() {
        let s = summary(&system_v());
        let r = ds_lp(&s).unwrap();
        assert!((r.decomposition.union_value() - r.value).abs() < 1e-12);
        assert!(r.decomposition.max_coupling_violation() <= 1e-12);
    }

    #[test]
    fn unrealizable_summary_is_reported() {
        let s = MomentSummary::new(vec![0.1, 0.3], vec![0.2, 0.3]).unwrap();
        assert_eq!(optimal_lower_lp(&s).unwrap_err(), Error::NotRealizable);
        assert!(matches!(top_degree_relaxed_lp(&s), Err(Error::Infeasible(_))));
        // The KAT program ignores coupling and stays feasible.
        assert!(kat_lp(&s).is_ok());
    }

    #[test]
    fn layouts_index_every_variable_once() {
        for n in 1..=6 {
            let mut seen = vec![0; n * n - n + 1];
            for i in 0..n {
                for k in 1..=n {
                    seen[reduced_index(n, i, k)] += 1;
                }
            }
            assert!(seen[..n * (n - 1)].iter().all(|&c| c == 1));
            assert_eq!(seen[n * (n - 1)], n);
        }
    }
}
