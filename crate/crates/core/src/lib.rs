//! Busy-period losses in `A/B/1/n` loss queues.
//!
//! The crate simulates busy periods of the single-server FIFO loss queue,
//! computes the branching-process bounds on the expected number of losses,
//! served customers and busy-period length, simulates the comparison
//! processes, and checks stochastic-order claims against simulated samples.

pub mod analytics;
pub mod branching;
pub mod distributions;
pub mod error;
pub mod exec;
pub mod harness;
pub mod ordering;
pub mod quadrature;
pub mod queue_sim;
pub mod streams;

pub use analytics::{bounds_for, solve_phi, tau_pmf, BoundSet, Buffer, SystemModel};
pub use distributions::{DistributionSpec, ReliabilityClass};
pub use error::{Error, Result};
pub use exec::Execution;
