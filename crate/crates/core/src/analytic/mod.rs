//! Equilibrium workload law of the cavity queue and the performance metrics
//! derived from it under the asymptotic-independence approximation.

mod closed_form;
mod kernel;
mod law;
mod response;

pub use closed_form::{
    cross_check, f0_identical_thresholds, f0_idle_replication, f0_no_loss, f0_no_loss_normalized,
    k_closed_form, ClosedForm, Diagnostic,
};
pub use kernel::{k_kernel, k_kernel_checked, k_kernel_quadrature, KernelEval};
pub use law::{workload_cdf, workload_mgf, Segment, WorkloadLaw};
pub use response::{
    analyze, improvement_over_random, loss_probability, mean_response_time, response_tail,
    tau_idle_replication, tau_idle_replication_sum, tau_no_discard, ResponseMetrics,
};

use serde::{Deserialize, Serialize};

/// Service-time distribution of a replica.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServiceLaw {
    Exponential { mu: f64 },
}

impl ServiceLaw {
    pub fn exponential(mu: f64) -> Self {
        ServiceLaw::Exponential { mu }
    }

    /// `Ḡ(x) = P(X > x)`, equal to 1 for `x ≤ 0`.
    pub fn tail(&self, x: f64) -> f64 {
        match *self {
            ServiceLaw::Exponential { mu } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-mu * x).exp()
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ServiceLaw::Exponential { mu } => 1.0 / mu,
        }
    }

    /// Rate of the exponential tail, if the law is exponential.
    pub fn exponential_rate(&self) -> Option<f64> {
        match *self {
            ServiceLaw::Exponential { mu } => Some(mu),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_tail() {
        let g = ServiceLaw::exponential(2.0);
        assert_eq!(g.tail(-1.0), 1.0);
        assert_eq!(g.tail(0.0), 1.0);
        assert!((g.tail(0.5) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.mean(), 0.5);
    }
}
