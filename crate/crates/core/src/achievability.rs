//! Witness systems realizing a degree decomposition.
//!
//! For each degree `k` the events' masses `a_1(k), ..., a_N(k)` are laid end to
//! end, scaled so they wrap exactly `k` times around a circle whose perimeter
//! is `sum_i a_i(k) / k`. When no single `a_j(k)` exceeds the perimeter, every
//! point of the circle is covered by exactly `k` distinct events, so cutting
//! the circle at the wrapped segment ends gives at most `N` arcs, each an
//! outcome of degree `k` with probability equal to its length.
//!
//! Positions are fractions of a full turn in `[0, 1)`, not radians.

use crate::error::{Error, Result};
use crate::system::{DegreeDecomposition, FiniteProbabilitySystem};

/// Breakpoints closer than this are merged.
pub const TIE_TOL: f64 = 1e-12;

/// Slack on the construction preconditions and on every realization check.
pub const REALIZATION_TOL: f64 = 1e-9;

/// The arcs of one degree-`k` circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleLayout {
    pub degree: usize,
    pub perimeter: f64,
    /// Sorted arc start positions in `[0, 1)`; the first is always 0.
    pub breakpoints: Vec<f64>,
    /// Arc probabilities (fractional length times the perimeter).
    pub arc_lengths: Vec<f64>,
    /// 0-based indices of the `degree` events covering each arc.
    pub arc_memberships: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConstructOptions {
    /// Drop zero-probability outcomes produced by coincident breakpoints.
    pub prune_zero: bool,
}

/// Caps masses at the common level `c` with `sum_j min(a_j, c) = k c`, which
/// makes every segment fit on the circle. Only used to absorb round-off in
/// inputs that already pass the coupling check.
fn water_fill(column: &[f64], k: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = column.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut rest: f64 = sorted.iter().sum();
    // The largest entries get capped at the level; earlier failures guarantee
    // the level sits below every capped entry, so only the lower test matters.
    let mut level = 0.0;
    for m in 0..k.min(sorted.len()) {
        let c = rest.max(0.0) / (k - m) as f64;
        level = c;
        if sorted[m] <= c {
            break;
        }
        rest = sorted[m + 1..].iter().sum();
    }
    column.iter().map(|a| a.min(level)).collect()
}

/// Lays out the degree-`k` circle for masses `column[j] = a_j(k)`.
/// Returns `None` when the column carries no mass.
pub fn circle_layout(column: &[f64], k: usize) -> Result<Option<CircleLayout>> {
    let n = column.len();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("degree {k} outside 1..={n}")));
    }
    if column.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return Err(Error::Domain("masses must be finite and nonnegative".into()));
    }
    let raw_total: f64 = column.iter().sum();
    if raw_total == 0.0 {
        return Ok(None);
    }
    let raw_perimeter = raw_total / k as f64;
    let masses = if column.iter().any(|&a| a > raw_perimeter) {
        water_fill(column, k)
    } else {
        column.to_vec()
    };
    let total: f64 = masses.iter().sum();
    if total == 0.0 {
        return Ok(None);
    }
    let perimeter = total / k as f64;

    // Segment j covers [ends[j], ends[j + 1]) unwrapped; ends[n] == k.
    let mut ends = Vec::with_capacity(n + 1);
    ends.push(0.0);
    let mut cum = 0.0;
    for &a in &masses {
        cum += a;
        ends.push(k as f64 * (cum / total));
    }

    let mut breakpoints: Vec<f64> = ends[1..]
        .iter()
        .map(|&c| {
            let f = c - c.floor();
            if f >= 1.0 - TIE_TOL {
                0.0
            } else {
                f
            }
        })
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    for j in 1..breakpoints.len() {
        if breakpoints[j] - breakpoints[j - 1] <= TIE_TOL {
            breakpoints[j] = breakpoints[j - 1];
        }
    }

    let fractional: Vec<f64> = (0..n)
        .map(|j| {
            let next = breakpoints.get(j + 1).copied().unwrap_or(1.0);
            next - breakpoints[j]
        })
        .collect();

    let covering = |point: f64| -> Vec<usize> {
        (0..n)
            .filter(|&j| {
                let (start, end) = (ends[j], ends[j + 1]);
                if end <= start {
                    return false;
                }
                let mut u = point + start.floor();
                if u < start {
                    u += 1.0;
                }
                u < end
            })
            .collect()
    };

    // Zero-length arcs take the membership of the next positive arc,
    // i.e. of the half-open interval starting at their breakpoint.
    let mut arc_memberships = vec![Vec::new(); n];
    for j in 0..n {
        let source = (0..n)
            .map(|step| (j + step) % n)
            .find(|&t| fractional[t] > 0.0)
            .expect("a circle with positive perimeter has a positive arc");
        arc_memberships[j] = covering(breakpoints[source] + fractional[source] / 2.0);
        if arc_memberships[j].len() != k {
            return Err(Error::NotConstructible(format!(
                "arc {} of circle {k} is covered by {} events",
                j + 1,
                arc_memberships[j].len()
            )));
        }
    }

    Ok(Some(CircleLayout {
        degree: k,
        perimeter,
        arc_lengths: fractional.iter().map(|f| f * perimeter).collect(),
        breakpoints,
        arc_memberships,
    }))
}

/// Circles for every degree that carries mass.
pub fn circle_layouts(a: &DegreeDecomposition) -> Result<Vec<CircleLayout>> {
    let n = a.n_events();
    let mut out = Vec::new();
    for k in 1..=n {
        let column: Vec<f64> = a.rows().iter().map(|row| row[k - 1]).collect();
        if let Some(layout) = circle_layout(&column, k)? {
            out.push(layout);
        }
    }
    Ok(out)
}

/// Checks that `a` satisfies the coupling rows and the union cap.
pub fn check_constructible(a: &DegreeDecomposition) -> Result<()> {
    let violation = a.max_coupling_violation();
    if violation > REALIZATION_TOL {
        return Err(Error::NotConstructible(format!(
            "coupling constraint sum_i a_i(k) >= k a_j(k) violated by {violation:.3e}"
        )));
    }
    let union = a.union_value();
    if union > 1.0 + REALIZATION_TOL {
        return Err(Error::NotConstructible(format!(
            "union value {union} exceeds 1"
        )));
    }
    Ok(())
}

/// Builds a system whose degree decomposition is `a`.
pub fn construct_system(
    a: &DegreeDecomposition,
    opts: ConstructOptions,
) -> Result<FiniteProbabilitySystem> {
    check_constructible(a)?;
    let n = a.n_events();
    let mut probs = Vec::new();
    let mut membership = Vec::new();
    for layout in circle_layouts(a)? {
        for (p, members) in layout.arc_lengths.iter().zip(&layout.arc_memberships) {
            if opts.prune_zero && *p == 0.0 {
                continue;
            }
            let mut row = vec![false; n];
            for &e in members {
                row[e] = true;
            }
            probs.push(*p);
            membership.push(row);
        }
    }
    // Absorb a total within the tolerance above 1.
    let total: f64 = probs.iter().sum();
    if total > 1.0 {
        for p in &mut probs {
            *p /= total;
        }
    }
    Ok(FiniteProbabilitySystem::new(n, probs, membership))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationReport {
    pub checks: Vec<Check>,
}

impl RealizationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for RealizationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<14} {}  residual {:.3e}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.residual
            )?;
        }
        Ok(())
    }
}

/// Compares `sys` against the decomposition `a`: validity, degree
/// decomposition, row moments and union probability, each to [`REALIZATION_TOL`].
pub fn verify_realization(a: &DegreeDecomposition, sys: &FiniteProbabilitySystem) -> RealizationReport {
    let mut checks = Vec::new();
    let mut push = |name, residual: f64| {
        checks.push(Check {
            name,
            passed: residual <= REALIZATION_TOL,
            residual,
        })
    };

    let valid = sys.validate().is_empty() && sys.n_events() == a.n_events();
    push("valid", if valid { 0.0 } else { f64::INFINITY });
    if !valid {
        push("decomposition", f64::INFINITY);
        push("moments", f64::INFINITY);
        push("union", f64::INFINITY);
        return RealizationReport { checks };
    }

    let realized = sys.degree_decomposition().expect("validated");
    push("decomposition", realized.max_abs_diff(a));

    let summary = sys.moment_summary();
    let moments = match summary {
        Ok(s) => a
            .row_moments()
            .iter()
            .enumerate()
            .map(|(i, (m0, m1))| (s.alpha()[i] - m0).abs().max((s.gamma()[i] - m1).abs()))
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    push("moments", moments);

    let union = sys.exact_union_probability().expect("validated");
    push("union", (union - a.union_value()).abs());
    RealizationReport { checks }
}
