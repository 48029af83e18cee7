//! Equilibrium analysis and finite-N simulation of the `π(p, T1, T2)`
//! dispatching policy: each job is sent to one primary server and, with
//! probability `p`, to `d − 1` additional secondary servers. A server drops
//! a replica whose queueing delay would exceed the discard threshold for its
//! role (`T1` for primaries, `T2` for secondaries).
//!
//! The [`model`] module holds the parameterization and the self-consistent
//! equilibrium constants of the single-queue (cavity) workload law,
//! [`analytic`] evaluates loss probability and conditional mean response time
//! from that law, and [`simulate`] runs the exact N-server system.

pub mod analytic;
pub mod error;
mod expo;
pub mod model;
pub mod quad;
pub mod simulate;
pub mod threshold;

pub use analytic::{
    improvement_over_random, loss_probability, mean_response_time, response_tail,
    tau_idle_replication, tau_no_discard, ResponseMetrics, ServiceLaw, WorkloadLaw,
};
pub use error::{Error, Result};
pub use model::{
    effective_rate, solve_constants, stability, EffectiveRate, EquilibriumConstants, PolicyParams,
    StabilityClass, StabilityKind,
};

pub use simulate::{convergence_study, run, ConvergenceRow, SimConfig, SimSettings, SimStats};
pub use threshold::Threshold;
