use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ensure_stable, PolicyParams};
use crate::quad;
use crate::threshold::Threshold;

use super::closed_form::f0_idle_replication;
use super::kernel::{k_general_exponential, k_kernel_quadrature};
use super::{ServiceLaw, WorkloadLaw};

/// Absolute tolerance of the response-time integral.
pub const TAU_ABS_TOL: f64 = 1e-10;
/// `H̄` is integrated until it drops below this level.
pub const TAIL_CUTOFF: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseMetrics {
    /// Conditional mean response time of admitted jobs.
    pub tau: f64,
    pub p_loss: f64,
    /// Estimated absolute error of `tau`.
    pub quadrature_error: f64,
}

/// `P_L = F̄(T1)·(p·F̄(T2)^{d−1} + 1 − p)`: a job is lost when its primary
/// and (if created) all of its secondaries are discarded.
pub fn loss_probability(law: &WorkloadLaw) -> f64 {
    let p = law.params();
    let c = law.constants();
    if p.t1.is_infinite() {
        return 0.0;
    }
    c.fbar_t1 * (p.p * c.fbar_t2.powi(p.d as i32 - 1) + (1.0 - p.p))
}

fn kernel(law: &WorkloadLaw, service: &ServiceLaw, x: f64, t: Threshold) -> f64 {
    match service.exponential_rate() {
        Some(rate) => k_general_exponential(law, rate, x, t),
        None => k_kernel_quadrature(law, service, x, t, 1e-12),
    }
}

/// `H̄(x) = P(R > x, job admitted)`:
///
/// `p[(F̄(T1) + k(x,T1))(F̄(T2) + k(x,T2))^{d−1} − F̄(T1)F̄(T2)^{d−1}] + (1 − p)k(x,T1)`.
pub fn response_tail(law: &WorkloadLaw, service: &ServiceLaw, x: f64) -> f64 {
    let p = law.params();
    let c = law.constants();
    let k1 = kernel(law, service, x, p.t1);
    let k2 = if p.t2 == p.t1 {
        k1
    } else {
        kernel(law, service, x, p.t2)
    };
    let secondaries = p.d as i32 - 1;
    let replicated = (c.fbar_t1 + k1) * (c.fbar_t2 + k2).powi(secondaries)
        - c.fbar_t1 * c.fbar_t2.powi(secondaries);
    (p.p * replicated + (1.0 - p.p) * k1).max(0.0)
}

/// `τ = (1/(1 − P_L))·∫_0^∞ H̄(x) dx`.
///
/// The integral is split at the thresholds and truncated where `H̄` falls
/// below [`TAIL_CUTOFF`]; `H̄` is non-increasing, so the truncation point is
/// found by doubling.
pub fn mean_response_time(law: &WorkloadLaw, service: &ServiceLaw) -> Result<ResponseMetrics> {
    let p_loss = loss_probability(law);
    if p_loss > 1.0 - 1e-12 {
        return Err(Error::DegenerateLoss(p_loss));
    }
    let params = law.params();
    let tail = |x: f64| response_tail(law, service, x);

    let mut knots = vec![0.0];
    for t in [params.t2, params.t1] {
        if let Some(v) = t.as_finite() {
            if v > *knots.last().unwrap() {
                knots.push(v);
            }
        }
    }
    let base = *knots.last().unwrap();
    let mut step = service.mean();
    let mut x_max = base + step;
    let mut doublings = 0;
    while tail(x_max) > TAIL_CUTOFF && doublings < 64 {
        step *= 2.0;
        x_max = base + step;
        doublings += 1;
    }
    knots.push(x_max);

    let integral = quad::integrate_pieces(&tail, &knots, TAU_ABS_TOL);
    let admitted = 1.0 - p_loss;
    Ok(ResponseMetrics {
        tau: integral.value / admitted,
        p_loss,
        quadrature_error: integral.error / admitted,
    })
}

/// Solves the law and evaluates the metrics for exponential service of rate
/// `params.mu`.
pub fn analyze(params: &PolicyParams) -> Result<(WorkloadLaw, ResponseMetrics)> {
    let law = WorkloadLaw::new(params)?;
    let metrics = mean_response_time(&law, &ServiceLaw::exponential(params.mu))?;
    Ok((law, metrics))
}

/// `τ = p/((μ − λ̄)d) + (1 − p)/(μ − λ̄)` for `π(p, ∞, ∞)`.
pub fn tau_no_discard(params: &PolicyParams) -> Result<f64> {
    if params.t1.is_finite() || params.t2.is_finite() {
        return Err(Error::InvalidParams(
            "tau_no_discard requires t1 = t2 = inf".into(),
        ));
    }
    ensure_stable(params)?;
    let slack = params.mu - params.lambda_bar();
    Ok(params.p / (slack * params.d as f64) + (1.0 - params.p) / slack)
}

fn check_idle_replication(params: &PolicyParams) -> Result<()> {
    if params.p != 1.0 || params.t1.is_finite() || params.t2 != Threshold::Finite(0.0) {
        return Err(Error::InvalidParams(
            "idle replication requires p = 1, t1 = inf, t2 = 0".into(),
        ));
    }
    ensure_stable(params)
}

/// Mean response time under `π(1, ∞, 0)` as the binomial sum
///
/// `Σ_{n=0}^{d−1} C(d−1, n) F̄(0)^{d−1−n} F(0)^{n+1}
///   [dμλ/((μ−λ)(μ(n+1)−λ)λ) − λ(d−1)/(λμ(n+1))]`
///
/// with `F(0) = (μ − λ)/(μ + λ(d − 1))`, evaluated term by term as written.
pub fn tau_idle_replication_sum(params: &PolicyParams) -> Result<f64> {
    check_idle_replication(params)?;
    let (lambda, mu) = (params.lambda, params.mu);
    let d = params.d;
    let df = d as f64;
    let f0 = f0_idle_replication(lambda, mu, d);
    let fbar0 = 1.0 - f0;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for n in 0..d {
        let nf = n as f64;
        let bracket = df * mu * lambda / ((mu - lambda) * (mu * (nf + 1.0) - lambda) * lambda)
            - lambda * (df - 1.0) / (lambda * mu * (nf + 1.0));
        sum += binom * fbar0.powi((d - 1 - n) as i32) * f0.powi(n as i32 + 1) * bracket;
        binom = binom * (df - 1.0 - nf) / (nf + 1.0);
    }
    Ok(sum)
}

/// Mean response time under `π(1, ∞, 0)`, by integrating the general
/// response tail.
pub fn tau_idle_replication(params: &PolicyParams) -> Result<f64> {
    check_idle_replication(params)?;
    Ok(analyze(params)?.1.tau)
}

/// Percentage improvement of `tau` over random routing (an M/M/1 queue per
/// server): `100·(τ_rand − τ)/τ_rand` with `τ_rand = 1/(μ − λ)`.
pub fn improvement_over_random(lambda: f64, mu: f64, tau: f64) -> f64 {
    let tau_random = 1.0 / (mu - lambda);
    100.0 * (tau_random - tau) / tau_random
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64, d: usize, p: f64, t1: f64, t2: f64) -> PolicyParams {
        PolicyParams::new(lambda, 1.0, d, p, t1, t2).unwrap()
    }

    #[test]
    fn loss_probability_special_cases() {
        let l = WorkloadLaw::new(&params(0.5, 3, 1.0, f64::INFINITY, 1.0)).unwrap();
        assert_eq!(loss_probability(&l), 0.0);
        let l = WorkloadLaw::new(&params(0.5, 3, 0.0, 2.0, 1.0)).unwrap();
        assert_eq!(loss_probability(&l), l.constants().fbar_t1);
    }

    #[test]
    fn tail_at_zero_is_admission_probability() {
        let g = ServiceLaw::exponential(1.0);
        for pp in [
            params(0.3, 3, 1.0, 5.0, 5.0),
            params(0.6, 4, 0.4, 2.0, 0.5),
            params(1.5, 2, 1.0, 1.0, 1.0),
        ] {
            let l = WorkloadLaw::new(&pp).unwrap();
            let h0 = response_tail(&l, &g, 0.0);
            assert!((h0 - (1.0 - loss_probability(&l))).abs() < 1e-13, "{pp:?}");
        }
    }

    #[test]
    fn replicated_no_discard_tail_is_kernel_power() {
        let g = ServiceLaw::exponential(1.0);
        let l = WorkloadLaw::new(&params(0.1, 3, 1.0, f64::INFINITY, f64::INFINITY)).unwrap();
        for x in [0.2f64, 1.0, 4.0] {
            let k: f64 = (-0.7 * x).exp();
            assert!((response_tail(&l, &g, x) - k.powi(3)).abs() < 1e-14);
        }
    }

    #[test]
    fn random_routing_is_mm1() {
        let p = params(0.11, 1, 0.0, f64::INFINITY, f64::INFINITY);
        let (_, m) = analyze(&p).unwrap();
        assert!((m.tau - 1.0 / 0.89).abs() < 1e-10);
        assert!((m.tau - 1.12359550561798).abs() < 1e-10);
        assert_eq!(m.p_loss, 0.0);
    }

    #[test]
    fn fast_paths() {
        let p = params(0.01, 3, 1.0, f64::INFINITY, f64::INFINITY);
        assert!((tau_no_discard(&p).unwrap() - 0.343642611683849).abs() < 1e-12);
        let p = params(0.5, 3, 0.0, f64::INFINITY, f64::INFINITY);
        assert!((tau_no_discard(&p).unwrap() - 2.0).abs() < 1e-15);
        let p = params(0.1, 2, 1.0, f64::INFINITY, f64::INFINITY);
        let tau = tau_no_discard(&p).unwrap();
        assert!((tau - 0.625).abs() < 1e-15);
        assert!((improvement_over_random(0.1, 1.0, tau) - 43.75).abs() < 1e-10);
        assert!(matches!(
            tau_no_discard(&params(0.4, 3, 1.0, f64::INFINITY, f64::INFINITY)),
            Err(Error::UnstableSystem(_))
        ));
        assert!(tau_no_discard(&params(0.1, 3, 1.0, 5.0, 5.0)).is_err());
    }

    #[test]
    fn idle_replication_single_replica_is_mm1() {
        let p = params(0.4, 1, 1.0, f64::INFINITY, 0.0);
        assert!((tau_idle_replication_sum(&p).unwrap() - 1.0 / 0.6).abs() < 1e-13);
        assert!((tau_idle_replication(&p).unwrap() - 1.0 / 0.6).abs() < 1e-9);
    }

    #[test]
    fn idle_replication_sum_matches_integral() {
        for &(lambda, d) in &[(0.2, 3), (0.21, 3), (0.6, 6), (0.9, 12)] {
            let p = params(lambda, d, 1.0, f64::INFINITY, 0.0);
            let sum = tau_idle_replication_sum(&p).unwrap();
            let integral = tau_idle_replication(&p).unwrap();
            assert!(
                (sum - integral).abs() < 1e-6 * sum,
                "λ={lambda} d={d}: {sum} vs {integral}"
            );
        }
    }

    #[test]
    fn all_lost_is_degenerate() {
        // Hand-built law with F̄(T1) = 1.
        let p = params(0.5, 1, 0.0, 1.0, 1.0);
        let c = crate::model::EquilibriumConstants {
            f0: 0.0,
            fbar_t1: 1.0,
            fbar_t2: 1.0,
        };
        let l = WorkloadLaw::from_constants(&p, c);
        assert!(matches!(
            mean_response_time(&l, &ServiceLaw::exponential(1.0)),
            Err(Error::DegenerateLoss(_))
        ));
    }
}
