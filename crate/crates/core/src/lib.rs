//! Radial solutions of the clamped fourth-order MEMS model
//!
//! ```text
//! Δ²u = λ / (1 − u)^p   in the unit ball B ⊂ ℝⁿ,   u = ∂u/∂n = 0 on ∂B
//! ```
//!
//! The crate provides the closed-form constants of the problem, a radial
//! finite-difference discretization with a banded clamped solver, the
//! minimal-solution branch (monotone iteration, Newton refinement, amplitude
//! continuation through the fold), the stability eigenvalue `μ₁`, discrete
//! Hardy-Rellich gap checks, and the sub-solution certificates that decide
//! whether the extremal solution is singular.
//!
//! ```no_run
//! use mems_extremal::{constants::ProblemParams, branch::{continue_branch, SolverConfig}};
//!
//! let params = ProblemParams::new(3, 2.0).unwrap();
//! let grid: Vec<f64> = (1..=60).map(|i| i as f64 / 100.0).collect();
//! let diagram = continue_branch(&params, &grid, &SolverConfig::default()).unwrap();
//! println!("lambda* >= {}", diagram.lambda_star_lower);
//! ```

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod banded;
pub mod branch;
pub mod certificate;
pub mod clamped;
pub mod constants;
pub mod error;
pub mod galerkin;
pub mod mesh;
pub mod operators;
pub mod report;
pub mod stability;

pub use error::{Error, PicardFailure, Result};
