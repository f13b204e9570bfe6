//! Spatial branch-and-bound for small mixed integer nonlinear programs, with
//! conflict analysis built on Farkas proofs of infeasible node LPs.
//!
//! The pieces, bottom up:
//!
//! * [`model`]: instances, expressions and the JSON format
//! * [`simplex`]: bounded primal simplex that returns a dual ray on infeasibility
//! * [`relaxation`]: gradient cuts, McCormick underestimators, the cut pool
//! * [`propagation`]: activity-based bound propagation with a reason trail
//! * [`conflict`]: proof construction, global relaxation, lifting, conflict graphs
//! * [`nlpcert`]: Lagrangian infeasibility certificates for convex subproblems
//! * [`solver`]: the branch-and-bound driver
//! * [`harness`]: corpus generation and benchmark reports

#![allow(clippy::needless_range_loop)]

pub mod conflict;
pub mod harness;
pub mod model;
pub mod nlpcert;
pub mod propagation;
pub mod relaxation;
pub mod simplex;
pub mod solver;

pub use model::{Expr, Instance};
pub use solver::{solve, ConflictMode, Settings, SolveResult, SolveStatus};
