//! Robust empirical risk minimization with feedforward ReLU networks on
//! weakly dependent time series.
//!
//! The crate is organised around the pieces of a simulation study:
//!
//! - [`mlp`]: network parameters laid out as a flat parameter vector, forward
//!   evaluation, backpropagation and projection onto sparsity/norm constrained
//!   classes.
//! - [`losses`]: L1, Huber and squared losses with their subgradients.
//! - [`dgp`]: nonlinear autoregressive data generation with heavy-tailed
//!   innovations.
//! - [`trainer`]: minibatch Adam with early stopping on the empirical risk.
//! - [`theory`]: closed-form rates, architecture schedules and excess-risk
//!   bounds for strongly mixing and weakly dependent processes.
//! - [`harness`]: Monte Carlo replications, excess risk and prediction error
//!   metrics, boxplot summaries.
//!
//! Replications run on rayon's pool when the `parallel` feature is enabled
//! (the default); without it everything runs sequentially with identical
//! results.

pub mod dgp;
pub mod error;
pub mod harness;
pub mod losses;
pub mod mlp;
pub mod par;
pub mod seed;
pub mod theory;
pub mod trainer;

pub use error::{Error, Result};

/// Version tag written as the first line of every CSV file.
pub const CSV_VERSION_LINE: &str = "# robust-wdep-dnn v1";
