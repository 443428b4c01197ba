//! Finite probability systems and the partial information extracted from them.
//!
//! A [`FiniteProbabilitySystem`] lists elementary outcomes with their
//! probabilities and which events each outcome belongs to. Mass not listed is
//! an implicit outcome outside every event, so the listed probabilities only
//! need to sum to at most one.
//!
//! Everything else in the crate works from two derived objects:
//!
//! * [`MomentSummary`]: per event, `alpha_i = P(A_i)` and
//!   `gamma_i = sum_j P(A_i ∩ A_j)` (the `j = i` term included).
//! * [`DegreeDecomposition`]: `a_i(k)`, the mass of `A_i` carried by outcomes
//!   that lie in exactly `k` events.
//!
//! The exact union probability is `sum_i sum_k a_i(k) / k`, and each row of the
//! decomposition reproduces the summary through `sum_k a_i(k) = alpha_i` and
//! `sum_k k a_i(k) = gamma_i`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the total listed mass.
pub const MASS_TOL: f64 = 1e-12;

/// Slack allowed on the moment summary inequalities `alpha <= gamma <= N alpha`.
pub const SUMMARY_TOL: f64 = 1e-9;

/// An invariant violation found by [`FiniteProbabilitySystem::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoEvents,
    NonFiniteProbability { outcome: usize },
    NegativeProbability { outcome: usize, p: f64 },
    MassExceedsOne { total: f64 },
    ShapeMismatch { outcome: usize, columns: usize },
    CountMismatch { probs: usize, rows: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoEvents => write!(f, "system must have at least one event"),
            Violation::NonFiniteProbability { outcome } => {
                write!(f, "non-finite probability at outcome {outcome}")
            }
            Violation::NegativeProbability { outcome, p } => {
                write!(f, "negative probability {p} at outcome {outcome}")
            }
            Violation::MassExceedsOne { total } => write!(f, "total mass exceeds 1 ({total})"),
            Violation::ShapeMismatch { outcome, columns } => write!(
                f,
                "membership shape mismatch: outcome {outcome} has {columns} columns"
            ),
            Violation::CountMismatch { probs, rows } => write!(
                f,
                "membership shape mismatch: {probs} probabilities but {rows} membership rows"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProbabilitySystem {
    outcome_probs: Vec<f64>,
    membership: Vec<Vec<bool>>,
    n_events: usize,
}

impl FiniteProbabilitySystem {
    /// Builds a system without checking it. Call [`validate`](Self::validate)
    /// to list invariant violations; every derived quantity validates first.
    pub fn new(n_events: usize, outcome_probs: Vec<f64>, membership: Vec<Vec<bool>>) -> Self {
        Self {
            outcome_probs,
            membership,
            n_events,
        }
    }

    /// Builds a system from `(p, events)` pairs with 1-based event indices.
    pub fn from_outcomes<I, E>(n_events: usize, outcomes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, E)>,
        E: AsRef<[usize]>,
    {
        let mut probs = Vec::new();
        let mut membership = Vec::new();
        for (m, (p, events)) in outcomes.into_iter().enumerate() {
            let mut row = vec![false; n_events];
            for &e in events.as_ref() {
                if e == 0 || e > n_events {
                    return Err(Error::Parse(format!(
                        "outcome {m}: event index {e} outside 1..={n_events}"
                    )));
                }
                if row[e - 1] {
                    return Err(Error::Parse(format!("outcome {m}: event {e} listed twice")));
                }
                row[e - 1] = true;
            }
            probs.push(p);
            membership.push(row);
        }
        Ok(Self::new(n_events, probs, membership))
    }

    pub fn n_events(&self) -> usize {
        self.n_events
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcome_probs.len()
    }

    pub fn outcome_probs(&self) -> &[f64] {
        &self.outcome_probs
    }

    pub fn membership(&self) -> &[Vec<bool>] {
        &self.membership
    }

    /// Number of events containing outcome `m`.
    pub fn degree(&self, m: usize) -> usize {
        self.membership[m].iter().filter(|&&b| b).count()
    }

    pub fn total_mass(&self) -> f64 {
        self.outcome_probs.iter().sum()
    }

    /// Returns every invariant violation. An empty list means the system is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.n_events == 0 {
            out.push(Violation::NoEvents);
        }
        if self.outcome_probs.len() != self.membership.len() {
            out.push(Violation::CountMismatch {
                probs: self.outcome_probs.len(),
                rows: self.membership.len(),
            });
        }
        for (m, row) in self.membership.iter().enumerate() {
            if row.len() != self.n_events {
                out.push(Violation::ShapeMismatch {
                    outcome: m,
                    columns: row.len(),
                });
            }
        }
        for (m, &p) in self.outcome_probs.iter().enumerate() {
            if !p.is_finite() {
                out.push(Violation::NonFiniteProbability { outcome: m });
            } else if p < 0.0 {
                out.push(Violation::NegativeProbability { outcome: m, p });
            }
        }
        let total = self.total_mass();
        if total.is_finite() && total > 1.0 + MASS_TOL {
            out.push(Violation::MassExceedsOne { total });
        }
        out
    }

    fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSystem(violations))
        }
    }

    fn outcomes(&self) -> impl Iterator<Item = (f64, &[bool])> {
        self.outcome_probs
            .iter()
            .copied()
            .zip(self.membership.iter().map(Vec::as_slice))
    }

    /// `P(A_1 ∪ ... ∪ A_N)`: the mass of outcomes lying in at least one event.
    pub fn exact_union_probability(&self) -> Result<f64> {
        self.ensure_valid()?;
        Ok(self
            .outcomes()
            .filter(|(_, row)| row.iter().any(|&b| b))
            .map(|(p, _)| p)
            .sum())
    }

    /// The `N x N` matrix of `P(A_i ∩ A_j)`; its diagonal is `alpha`.
    pub fn pairwise_matrix(&self) -> Result<Vec<Vec<f64>>> {
        self.ensure_valid()?;
        let n = self.n_events;
        let mut b = vec![vec![0.0; n]; n];
        for (p, row) in self.outcomes() {
            let members: Vec<usize> = (0..n).filter(|&i| row[i]).collect();
            for &i in &members {
                for &j in &members {
                    b[i][j] += p;
                }
            }
        }
        Ok(b)
    }

    pub fn moment_summary(&self) -> Result<MomentSummary> {
        self.ensure_valid()?;
        let n = self.n_events;
        let mut alpha = vec![0.0; n];
        let mut gamma = vec![0.0; n];
        for (p, row) in self.outcomes() {
            let deg = row.iter().filter(|&&b| b).count() as f64;
            for i in (0..n).filter(|&i| row[i]) {
                alpha[i] += p;
                gamma[i] += deg * p;
            }
        }
        MomentSummary::new(alpha, gamma)
    }

    pub fn degree_decomposition(&self) -> Result<DegreeDecomposition> {
        self.ensure_valid()?;
        let n = self.n_events;
        let mut a = vec![vec![0.0; n]; n];
        for (p, row) in self.outcomes() {
            let deg = row.iter().filter(|&&b| b).count();
            if deg == 0 {
                continue;
            }
            for i in (0..n).filter(|&i| row[i]) {
                a[i][deg - 1] += p;
            }
        }
        DegreeDecomposition::new(a)
    }

    pub fn to_file(&self) -> SystemFile {
        SystemFile {
            n_events: self.n_events,
            outcomes: self
                .outcomes()
                .map(|(p, row)| OutcomeEntry {
                    p,
                    events: (0..row.len()).filter(|&i| row[i]).map(|i| i + 1).collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SystemFile = serde_json::from_str(text)?;
        Self::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("system serializes")
    }
}

/// On-disk system format. Event indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n_events: usize,
    pub outcomes: Vec<OutcomeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeEntry {
    pub p: f64,
    pub events: Vec<usize>,
}

impl TryFrom<SystemFile> for FiniteProbabilitySystem {
    type Error = Error;

    fn try_from(file: SystemFile) -> Result<Self> {
        FiniteProbabilitySystem::from_outcomes(
            file.n_events,
            file.outcomes.into_iter().map(|o| (o.p, o.events)),
        )
    }
}

/// Per-event first and second moments: `alpha_i`, `beta_i` and `gamma_i = alpha_i + beta_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
}

impl MomentSummary {
    /// Checks `0 <= alpha_i <= 1` and `alpha_i <= gamma_i <= N alpha_i`, the
    /// conditions every realizing system satisfies.
    pub fn new(alpha: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        let n = alpha.len();
        if n == 0 {
            return Err(Error::InvalidSummary("no events".into()));
        }
        if gamma.len() != n {
            return Err(Error::InvalidSummary(format!(
                "alpha has {n} entries but gamma has {}",
                gamma.len()
            )));
        }
        for (i, (&a, &g)) in alpha.iter().zip(&gamma).enumerate() {
            if !a.is_finite() || !g.is_finite() {
                return Err(Error::InvalidSummary(format!("non-finite entry for event {}", i + 1)));
            }
            if a < -MASS_TOL || a > 1.0 + MASS_TOL {
                return Err(Error::InvalidSummary(format!(
                    "alpha_{} = {a} outside [0, 1]",
                    i + 1
                )));
            }
            if g < a - SUMMARY_TOL || g > n as f64 * a + SUMMARY_TOL {
                return Err(Error::InvalidSummary(format!(
                    "gamma_{} = {g} outside [alpha, N alpha] = [{a}, {}]",
                    i + 1,
                    n as f64 * a
                )));
            }
        }
        let beta = alpha.iter().zip(&gamma).map(|(a, g)| g - a).collect();
        Ok(Self { alpha, beta, gamma })
    }

    /// Builds a summary from `alpha` and the pairwise sums `beta`.
    pub fn from_alpha_beta(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let gamma = alpha.iter().zip(&beta).map(|(a, b)| a + b).collect();
        Self::new(alpha, gamma)
    }

    pub fn n_events(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SummaryFile = serde_json::from_str(text)?;
        Self::new(file.alpha, file.gamma)
    }

    pub fn to_file(&self) -> SummaryFile {
        SummaryFile {
            alpha: self.alpha.clone(),
            gamma: self.gamma.clone(),
        }
    }
}

/// On-disk summary format: `{"alpha": [...], "gamma": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryFile {
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// Negative entries down to this value are treated as round-off and clamped.
pub const DECOMPOSITION_CLAMP: f64 = 1e-12;

/// The `N x N` matrix `a_i(k)`. Rows are events (0-based); column `k - 1`
/// holds degree `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDecomposition {
    a: Vec<Vec<f64>>,
}

impl DegreeDecomposition {
    pub fn new(mut a: Vec<Vec<f64>>) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::Domain("decomposition has no events".into()));
        }
        for (i, row) in a.iter_mut().enumerate() {
            if row.len() != n {
                return Err(Error::Domain(format!(
                    "decomposition row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            for (k, v) in row.iter_mut().enumerate() {
                if !v.is_finite() || *v < -DECOMPOSITION_CLAMP {
                    return Err(Error::Domain(format!(
                        "a_{}({}) = {v} is negative or non-finite",
                        i + 1,
                        k + 1
                    )));
                }
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        Ok(Self { a })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            a: vec![vec![0.0; n]; n],
        }
    }

    pub fn n_events(&self) -> usize {
        self.a.len()
    }

    /// Mass of event `event` (0-based) at degree `degree` (1-based).
    pub fn get(&self, event: usize, degree: usize) -> f64 {
        self.a[event][degree - 1]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.a
    }

    /// `sum_i a_i(k)` for degree `k` (1-based).
    pub fn degree_total(&self, degree: usize) -> f64 {
        self.a.iter().map(|row| row[degree - 1]).sum()
    }

    /// `sum_i sum_k a_i(k) / k`, the union probability of any system with this decomposition.
    pub fn union_value(&self) -> f64 {
        self.a
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(k, v)| v / (k + 1) as f64)
                    .sum::<f64>()
            })
            .sum()
    }

    /// `(sum_k a_i(k), sum_k k a_i(k))` for each event.
    pub fn row_moments(&self) -> Vec<(f64, f64)> {
        self.a
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0.0, 0.0), |(m0, m1), (k, v)| (m0 + v, m1 + (k + 1) as f64 * v))
            })
            .collect()
    }

    /// The summary the rows encode. Fails when the rows violate summary invariants.
    pub fn moment_summary(&self) -> Result<MomentSummary> {
        let (alpha, gamma) = self.row_moments().into_iter().unzip();
        MomentSummary::new(alpha, gamma)
    }

    /// Largest violation of `sum_i a_i(k) >= k a_j(k)` over all `j, k`;
    /// zero or negative when every coupling constraint holds.
    pub fn max_coupling_violation(&self) -> f64 {
        let n = self.n_events();
        (1..=n)
            .flat_map(|k| {
                let total = self.degree_total(k);
                self.a
                    .iter()
                    .map(move |row| k as f64 * row[k - 1] - total)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_diff(&self, other: &DegreeDecomposition) -> f64 {
        if self.n_events() != other.n_events() {
            return f64::INFINITY;
        }
        self.a
            .iter()
            .flatten()
            .zip(other.a.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DecompositionFile = serde_json::from_str(text)?;
        if file.a.len() != file.n_events {
            return Err(Error::Parse(format!(
                "n_events = {} but {} rows given",
                file.n_events,
                file.a.len()
            )));
        }
        Self::new(file.a)
    }

    pub fn to_file(&self) -> DecompositionFile {
        DecompositionFile {
            n_events: self.n_events(),
            a: self.a.clone(),
        }
    }
}

/// On-disk decomposition format: `{"n_events": N, "a": [[a_1(1), ..., a_1(N)], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionFile {
    pub n_events: usize,
    pub a: Vec<Vec<f64>>,
}
