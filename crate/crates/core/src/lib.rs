//! Bounds on the probability of a finite union of events from partial
//! information: the individual probabilities `P(A_i)` and the row sums
//! `sum_{j != i} P(A_i ∩ A_j)` of the pairwise intersection matrix.
//!
//! * [`system`]: finite probability systems, moment summaries and degree
//!   decompositions; the ground truth every bound is checked against.
//! * [`simplex`]: a small dense two-phase simplex solver.
//! * [`analytic`]: closed-form bounds (Dawson-Sankoff, de Caen, KAT, YAT,
//!   Gallot-Kounias and the KAT-to-YAT gap bound).
//! * [`lp_bounds`]: the optimal lower and upper bounds and the LP forms of the
//!   closed-form bounds.
//! * [`achievability`]: witness systems that attain a given decomposition.
//! * [`report`], [`tables`], [`random`], [`reference`]: plumbing for the CLI.

pub mod achievability;
pub mod analytic;
pub mod error;
pub mod lp_bounds;
pub mod random;
pub mod reference;
pub mod report;
pub mod simplex;
pub mod system;
pub mod tables;

pub use achievability::{construct_system, verify_realization, CircleLayout, ConstructOptions, RealizationReport};
pub use error::{Error, Result};
pub use lp_bounds::{LpBoundResult, LpBounds};
pub use report::BoundReport;
pub use simplex::{LinearProgram, LpSolution, LpStatus, Sense, SolverOptions};
pub use system::{DegreeDecomposition, FiniteProbabilitySystem, MomentSummary};
