//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Problems here are small (a few dozen variables), so the whole tableau is
//! kept as dense rows and updated by Gauss-Jordan pivots. Bland's rule picks
//! the lowest-index improving column and breaks ratio-test ties by the
//! lowest-index basic variable, which guarantees termination on the
//! degenerate instances that show up when probabilities are round numbers.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `optimize c·x` subject to equality rows, `row·x >= rhs` rows and `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    sense: Sense,
    eq_constraints: Vec<(Vec<f64>, f64)>,
    ge_constraints: Vec<(Vec<f64>, f64)>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, sense: Sense) -> Self {
        Self {
            objective,
            sense,
            eq_constraints: Vec::new(),
            ge_constraints: Vec::new(),
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::new(objective, Sense::Minimize)
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::new(objective, Sense::Maximize)
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_constraints.push((row, rhs));
        self
    }

    /// Adds `row·x >= rhs`.
    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.ge_constraints.push((row, rhs));
        self
    }

    /// Adds `row·x <= rhs`, stored as `-row·x >= -rhs`.
    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        let neg = row.into_iter().map(|v| -v).collect();
        self.ge_constraints.push((neg, -rhs));
        self
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn eq_constraints(&self) -> &[(Vec<f64>, f64)] {
        &self.eq_constraints
    }

    pub fn ge_constraints(&self) -> &[(Vec<f64>, f64)] {
        &self.ge_constraints
    }

    fn check_shape(&self) -> Result<()> {
        let v = self.n_vars();
        if v == 0 {
            return Err(Error::Domain("linear program has no variables".into()));
        }
        let rows = self.eq_constraints.iter().chain(&self.ge_constraints);
        for (idx, (row, rhs)) in rows.enumerate() {
            if row.len() != v {
                return Err(Error::Domain(format!(
                    "constraint {idx} has {} coefficients, expected {v}",
                    row.len()
                )));
            }
            if !rhs.is_finite() || row.iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain(format!("constraint {idx} is not finite")));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("objective is not finite".into()));
        }
        Ok(())
    }

    /// Largest constraint violation of `x`, counting equality residuals,
    /// `>=` shortfalls and negative coordinates.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq = self
            .eq_constraints
            .iter()
            .map(|(row, rhs)| (dot(row) - rhs).abs());
        let ge = self
            .ge_constraints
            .iter()
            .map(|(row, rhs)| rhs - dot(row));
        let neg = x.iter().map(|v| -v);
        eq.chain(ge).chain(neg).fold(0.0, f64::max)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { value: f64, point: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn status(&self) -> LpStatus {
        match self {
            LpSolution::Optimal { .. } => LpStatus::Optimal,
            LpSolution::Infeasible => LpStatus::Infeasible,
            LpSolution::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            LpSolution::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&[f64]> {
        match self {
            LpSolution::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Smallest magnitude accepted as a pivot element, and the reduced-cost
    /// threshold for optimality.
    pub pivot_tol: f64,
    /// Phase-one residual above which the problem is declared infeasible.
    pub feasibility_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            pivot_tol: 1e-10,
            feasibility_tol: 1e-9,
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    solve_with(lp, &SolverOptions::default())
}

pub fn solve_with(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution> {
    lp.check_shape()?;
    Ok(Tableau::build(lp).run(lp, opts))
}

struct Tableau {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_vars: usize,
    /// First artificial column; everything at or past it is artificial.
    first_artificial: usize,
    width: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n_vars = lp.n_vars();
        let n_slack = lp.ge_constraints.len();
        let first_artificial = n_vars + n_slack;

        // (coefficients over structural + slack columns, rhs, basic slack if any)
        let mut pending: Vec<(Vec<f64>, f64, Option<usize>)> = Vec::new();
        for (row, rhs) in &lp.eq_constraints {
            let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
            let mut r: Vec<f64> = row.iter().map(|v| sign * v).collect();
            r.resize(first_artificial, 0.0);
            pending.push((r, sign * rhs, None));
        }
        for (t, (row, rhs)) in lp.ge_constraints.iter().enumerate() {
            let slack = n_vars + t;
            if *rhs <= 0.0 {
                // -row·x + s = -rhs >= 0 with the slack basic.
                let mut r: Vec<f64> = row.iter().map(|v| -v).collect();
                r.resize(first_artificial, 0.0);
                r[slack] = 1.0;
                pending.push((r, -rhs + 0.0, Some(slack)));
            } else {
                let mut r = row.clone();
                r.resize(first_artificial, 0.0);
                r[slack] = -1.0;
                pending.push((r, *rhs, None));
            }
        }

        let n_artificial = pending.iter().filter(|p| p.2.is_none()).count();
        let width = first_artificial + n_artificial;
        let mut rows = Vec::with_capacity(pending.len());
        let mut basis = Vec::with_capacity(pending.len());
        let mut next_art = first_artificial;
        for (mut r, rhs, basic) in pending {
            r.resize(width, 0.0);
            let b = match basic {
                Some(s) => s,
                None => {
                    r[next_art] = 1.0;
                    next_art += 1;
                    next_art - 1
                }
            };
            r.push(rhs);
            rows.push(r);
            basis.push(b);
        }
        Self {
            rows,
            basis,
            n_vars,
            first_artificial,
            width,
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, obj: &mut [f64], r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row for `cost` (indexed by column) under the current basis.
    /// The last entry holds minus the current objective value.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut obj: Vec<f64> = cost.to_vec();
        obj.resize(self.width + 1, 0.0);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost.get(b).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (v, rv) in obj.iter_mut().zip(row) {
                    *v -= cb * rv;
                }
            }
        }
        obj
    }

    fn iterate(&mut self, obj: &mut [f64], allowed: usize, opts: &SolverOptions) -> Outcome {
        loop {
            let Some(enter) = (0..allowed).find(|&j| obj[j] < -opts.pivot_tol) else {
                return Outcome::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][enter];
                if a <= opts.pivot_tol {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12
                            || ((ratio - br).abs() <= 1e-12 && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Outcome::Unbounded;
            };
            self.pivot(obj, r, enter);
        }
    }

    fn run(mut self, lp: &LinearProgram, opts: &SolverOptions) -> LpSolution {
        // Phase one: minimize the sum of artificials.
        if self.width > self.first_artificial {
            let mut cost = vec![0.0; self.width];
            cost[self.first_artificial..].fill(1.0);
            let mut obj = self.reduced_costs(&cost);
            // Bounded below by zero, so this cannot be unbounded.
            let _ = self.iterate(&mut obj, self.width, opts);
            let residual = -obj[self.width];
            if residual > opts.feasibility_tol {
                return LpSolution::Infeasible;
            }
            self.drive_out_artificials(&mut obj, opts);
        }

        // Phase two.
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let cost: Vec<f64> = lp.objective.iter().map(|c| sign * c).collect();
        let mut obj = self.reduced_costs(&cost);
        if let Outcome::Unbounded = self.iterate(&mut obj, self.first_artificial, opts) {
            return LpSolution::Unbounded;
        }

        let mut point = vec![0.0; self.n_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_vars {
                let v = self.rhs(i);
                point[b] = if v < 0.0 && v > -opts.feasibility_tol { 0.0 } else { v };
            }
        }
        let value = lp.objective_value(&point);
        LpSolution::Optimal { value, point }
    }

    fn drive_out_artificials(&mut self, obj: &mut [f64], opts: &SolverOptions) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.first_artificial {
                i += 1;
                continue;
            }
            let col = (0..self.first_artificial).find(|&j| self.rows[i][j].abs() > opts.pivot_tol);
            match col {
                Some(j) => {
                    self.pivot(obj, i, j);
                    i += 1;
                }
                None => {
                    // Redundant equality.
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}
