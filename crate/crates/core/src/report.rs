//! Every bound for one system or summary, gathered in one place.

use serde::Serialize;

use crate::analytic;
use crate::error::Result;
use crate::lp_bounds::{alpha_only_bounds, LpBounds};
use crate::system::{FiniteProbabilitySystem, MomentSummary};

/// Bound values in report order. `gk` needs the full pairwise matrix, so it is
/// absent for summary-only input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bounds {
    pub ds: f64,
    pub de_caen: f64,
    pub kat: f64,
    pub gk: Option<f64>,
    pub yat: f64,
    pub kat_plus_gap: f64,
    pub opt_lower: f64,
    pub opt_upper: f64,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
}

impl Bounds {
    /// `(name, value)` pairs in report order, skipping absent values.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![("ds", self.ds), ("de_caen", self.de_caen), ("kat", self.kat)];
        if let Some(gk) = self.gk {
            out.push(("gk", gk));
        }
        out.extend([
            ("yat", self.yat),
            ("kat_plus_gap", self.kat_plus_gap),
            ("opt_lower", self.opt_lower),
            ("opt_upper", self.opt_upper),
            ("alpha_lower", self.alpha_lower),
            ("alpha_upper", self.alpha_upper),
        ]);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gap {
    pub yat_minus_kat: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub system_id: String,
    pub exact_union: Option<f64>,
    pub bounds: Bounds,
    pub gap: Gap,
}

impl BoundReport {
    pub fn for_system(id: &str, sys: &FiniteProbabilitySystem, solver: &LpBounds) -> Result<Self> {
        let summary = sys.moment_summary()?;
        let mut report = Self::for_summary(id, &summary, solver)?;
        report.exact_union = Some(sys.exact_union_probability()?);
        report.bounds.gk = Some(analytic::gk_bound_for_system(sys)?);
        Ok(report)
    }

    pub fn for_summary(id: &str, s: &MomentSummary, solver: &LpBounds) -> Result<Self> {
        let kat = analytic::kat_bound(s);
        let yat = analytic::yat_bound(s)?;
        let gap_lb = analytic::gap_lower_bound(s)?;
        let alpha_only = alpha_only_bounds(s.alpha())?;
        Ok(Self {
            system_id: id.to_string(),
            exact_union: None,
            bounds: Bounds {
                ds: analytic::ds_bound(s),
                de_caen: analytic::de_caen_bound(s),
                kat,
                gk: None,
                yat,
                kat_plus_gap: kat + gap_lb,
                opt_lower: solver.optimal_lower(s)?.value,
                opt_upper: solver.optimal_upper(s)?.value,
                alpha_lower: alpha_only.lower,
                alpha_upper: alpha_only.upper,
            },
            gap: Gap {
                yat_minus_kat: yat - kat,
                lower_bound: gap_lb,
            },
        })
    }

    /// Broken report invariants: values outside `[0, 1]` or a violated
    /// ordering among the lower bounds and the exact union.
    pub fn invariant_violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in self.bounds.entries() {
            if !(v >= -tol && v <= 1.0 + tol) {
                out.push(format!("{name} = {v} outside [0, 1]"));
            }
        }
        let b = &self.bounds;
        let mut chain = vec![
            ("ds", b.ds),
            ("kat", b.kat),
            ("kat_plus_gap", b.kat_plus_gap),
            ("yat", b.yat),
            ("opt_lower", b.opt_lower),
        ];
        if let Some(exact) = self.exact_union {
            chain.push(("exact", exact));
        }
        chain.push(("opt_upper", b.opt_upper));
        for pair in chain.windows(2) {
            let ((na, va), (nb, vb)) = (pair[0], pair[1]);
            if va > vb + tol {
                out.push(format!("{na} = {va} exceeds {nb} = {vb}"));
            }
        }
        if b.alpha_lower > b.opt_lower + tol {
            out.push(format!("alpha_lower = {} exceeds opt_lower = {}", b.alpha_lower, b.opt_lower));
        }
        if b.opt_upper > b.alpha_upper + tol {
            out.push(format!("opt_upper = {} exceeds alpha_upper = {}", b.opt_upper, b.alpha_upper));
        }
        out
    }
}
