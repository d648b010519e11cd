//! Condition numbers and preconditioning for homogeneous linear inequality systems.
//!
//! For a full-rank `A ∈ ℝ^{m×n}` (`m ≤ n`, nonzero columns) the crate studies the pair
//!
//! ```text
//! (primal)  A x = 0,  x ≥ 0,  x ≠ 0
//! (dual)    Aᵀ y ≥ 0,  y ≠ 0
//! ```
//!
//! and three ways of measuring how close `A` is to the ill-posed set where both
//! systems are feasible:
//!
//! - the Goffin–Cucker–Cheung number `C_GCC`, the reciprocal distance from the origin
//!   to the boundary of the hull of the normalized columns ([`condition::gcc`]);
//! - the Grassmann number `C_Gr`, the reciprocal projection distance from the row
//!   space to the ill-posed subspaces ([`condition::grassmann_cond`]);
//! - Renegar's `C_R` for the (1,2) and (2,2) operator norms, bracketed by intervals
//!   ([`condition::renegar_intervals`]).
//!
//! Two preconditioners, column normalization and row balancing, and their two
//! compositions live in [`precondition`]. Every preconditioning produces a
//! [`precondition::TransformRecord`] certifying `Â = P·A·S`, which maps solutions
//! of the preconditioned systems back to the original ones.
//!
//! Brute-force cross-checks are in [`oracles`], the worked example families and
//! random sweeps in [`experiments`]. The `ineqcond` binary wraps all of it.

pub mod cli;
pub mod condition;
pub mod error;
pub mod experiments;
pub mod model;
pub mod oracles;
pub mod precondition;
pub mod rng;

pub use condition::{
    classify_feasibility, gcc, grassmann_cond, grassmann_distance, renegar_intervals,
    theorem2_check, ConditionReport, GrassmannValue, Interval,
};
pub use error::{Error, Result};
pub use model::{FeasibilityStatus, FeasibilityTag, ProblemInstance, Subspace, Tolerances};
pub use precondition::{precondition, Order, TransformRecord};
