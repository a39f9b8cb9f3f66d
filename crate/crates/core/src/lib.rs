//! Exact integer linear programming as a differentiable layer.
//!
//! The crate is organised bottom-up:
//!
//! - [`ilp`]: branch-and-bound over a bounded dual simplex, plus a brute-force
//!   enumeration oracle and an LP-only entry point.
//! - [`constraints`]: learnable hyperplane parametrization `(a, r, o)` and its
//!   conversion to and from `(A, b)`.
//! - [`comboptnet`]: the backward pass that turns an incoming solution
//!   gradient into gradients for cost, constraint matrix and bias.
//! - [`nn`]: a small dense MLP with manual reverse mode, Adam, losses and the
//!   affine maps between integer boxes and the normalized frame.
//! - [`datasets`]: generators and JSON-lines storage for the random
//!   constraints, weighted set cover and knapsack tasks.
//! - [`harness`]: training loops, baselines, metrics, ablation grids and
//!   result files.
//!
//! Batch work (solving many instances, evaluating a test split) goes through
//! [`par`], which uses rayon when the `parallel` feature is enabled and a
//! plain sequential loop otherwise.

pub mod comboptnet;
pub mod constraints;
pub mod datasets;
pub mod error;
pub mod harness;
pub mod ilp;
pub mod nn;
pub mod par;

pub use error::{Error, Result};
