//! Policy parameterization, stability and the equilibrium constants of the
//! cavity-queue workload law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expo::{decay_integral, RATE_EPS};
use crate::threshold::Threshold;

/// Full parameterization of a `π(p, T1, T2)` system.
///
/// `lambda` is the per-server arrival rate; the system as a whole sees
/// Poisson arrivals of rate `lambda · n_servers`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyParams {
    pub lambda: f64,
    pub mu: f64,
    pub n_servers: usize,
    pub d: usize,
    pub p: f64,
    pub t1: Threshold,
    pub t2: Threshold,
}

impl PolicyParams {
    /// Validated constructor; `n_servers` defaults to `d`.
    pub fn new(
        lambda: f64,
        mu: f64,
        d: usize,
        p: f64,
        t1: impl Into<Threshold>,
        t2: impl Into<Threshold>,
    ) -> Result<Self> {
        let params = PolicyParams {
            lambda,
            mu,
            n_servers: d,
            d,
            p,
            t1: t1.into(),
            t2: t2.into(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_servers(mut self, n_servers: usize) -> Result<Self> {
        self.n_servers = n_servers;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return bad(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            ));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return bad(format!("mu must be positive and finite, got {}", self.mu));
        }
        if self.d < 1 {
            return bad("d must be at least 1".into());
        }
        if self.n_servers < self.d {
            return bad(format!(
                "n_servers ({}) must be at least d ({})",
                self.n_servers, self.d
            ));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p must lie in [0, 1], got {}", self.p));
        }
        for (name, t) in [("t1", self.t1), ("t2", self.t2)] {
            if let Threshold::Finite(v) = t {
                if v.is_nan() || v < 0.0 {
                    return bad(format!("{name} must be non-negative, got {v}"));
                }
            }
        }
        if self.t2 > self.t1 {
            return bad(format!("t2 ({}) must not exceed t1 ({})", self.t2, self.t1));
        }
        Ok(())
    }

    pub fn lambda_bar(&self) -> f64 {
        effective_rate(self).lambda_bar
    }
}

/// Potential replica arrival rate seen by a single queue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRate {
    pub lambda_bar: f64,
}

/// `λ̄ = λ(1 − p) + pλd`: every job sends one primary, and with probability
/// `p` another `d − 1` secondaries, uniformly over the servers.
pub fn effective_rate(params: &PolicyParams) -> EffectiveRate {
    let lambda = params.lambda;
    let p = params.p;
    EffectiveRate {
        lambda_bar: lambda * (1.0 - p) + p * lambda * params.d as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityKind {
    /// Finite primary threshold bounds every workload.
    AlwaysStable,
    /// `T1 = ∞`, `T2 < ∞`: only primaries are admitted above `T2`.
    LambdaBelowMu,
    /// `T1 = T2 = ∞`: every replica is admitted.
    LambdaBarBelowMu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityClass {
    pub kind: StabilityKind,
    pub stable: bool,
}

pub fn stability(params: &PolicyParams) -> StabilityClass {
    let (kind, stable) = match (params.t1, params.t2) {
        (Threshold::Finite(_), _) => (StabilityKind::AlwaysStable, true),
        (Threshold::Infinite, Threshold::Finite(_)) => {
            (StabilityKind::LambdaBelowMu, params.lambda < params.mu)
        }
        (Threshold::Infinite, Threshold::Infinite) => (
            StabilityKind::LambdaBarBelowMu,
            params.lambda_bar() < params.mu,
        ),
    };
    StabilityClass { kind, stable }
}

pub(crate) fn ensure_stable(params: &PolicyParams) -> Result<()> {
    params.validate()?;
    let class = stability(params);
    if class.stable {
        return Ok(());
    }
    Err(Error::UnstableSystem(match class.kind {
        StabilityKind::AlwaysStable => unreachable!(),
        StabilityKind::LambdaBelowMu => {
            format!(
                "lambda = {} must be below mu = {}",
                params.lambda, params.mu
            )
        }
        StabilityKind::LambdaBarBelowMu => format!(
            "lambda_bar = {} must be below mu = {}",
            params.lambda_bar(),
            params.mu
        ),
    }))
}

/// The triple `(F(0), F̄(T1), F̄(T2))` that closes the cavity-queue law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumConstants {
    pub f0: f64,
    pub fbar_t1: f64,
    pub fbar_t2: f64,
}

impl EquilibriumConstants {
    /// Residual of the work-conservation relation
    /// `F(0) = 1 − λ̄/μ + ((λ̄ − λ)/μ)·F̄(T2) + (λ/μ)·F̄(T1)`.
    pub fn work_balance_residual(&self, params: &PolicyParams) -> f64 {
        let (lambda, mu, lambda_bar) = (params.lambda, params.mu, params.lambda_bar());
        let rhs = 1.0 - lambda_bar / mu
            + (lambda_bar - lambda) / mu * self.fbar_t2
            + lambda / mu * self.fbar_t1;
        self.f0 - rhs
    }
}

/// Solves for the equilibrium constants.
///
/// The workload density is continuous at every positive level, which at `T2`
/// and `T1` ties all three constants to `F(0)`. Normalizing then gives
/// `1/F(0)` as a sum of positive terms, summed in log space so heavy
/// overload neither cancels nor overflows.
pub fn solve_constants(params: &PolicyParams) -> Result<EquilibriumConstants> {
    ensure_stable(params)?;
    let lambda = params.lambda;
    let mu = params.mu;
    let lambda_bar = params.lambda_bar();

    let constants = match (params.t1, params.t2) {
        (Threshold::Infinite, Threshold::Infinite) => EquilibriumConstants {
            f0: 1.0 - lambda_bar / mu,
            fbar_t1: 0.0,
            fbar_t2: 0.0,
        },
        (t1, Threshold::Finite(t2)) => {
            let ln_lb = lambda_bar.ln();
            // mass of (0, T2] per unit F(0)
            let ln_low = ln_lb + ln_decay_integral(mu - lambda_bar, t2);
            // log density just above T2, per unit F(0)
            let ln_edge = ln_lb - (mu - lambda_bar) * t2;
            // masses of (T2, T1] and (T1, ∞) per unit F(0)
            let (ln_mid, ln_top) = match t1 {
                Threshold::Finite(t1) => (
                    ln_edge + ln_decay_integral(mu - lambda, t1 - t2),
                    ln_edge - (mu - lambda) * (t1 - t2) - mu.ln(),
                ),
                Threshold::Infinite => (ln_edge - (mu - lambda).ln(), f64::NEG_INFINITY),
            };
            let ln_f0 = -log_sum_exp(&[0.0, ln_low, ln_mid, ln_top]);
            EquilibriumConstants {
                f0: ln_f0.exp(),
                fbar_t1: (ln_f0 + ln_top).exp(),
                fbar_t2: (ln_f0 + log_sum_exp(&[ln_mid, ln_top])).exp(),
            }
        }
        (Threshold::Finite(_), Threshold::Infinite) => unreachable!("validated t2 <= t1"),
    };

    check_constants(params, constants)
}

/// `ln ∫_0^len e^{-rate·s} ds`, finite even where the integral overflows.
fn ln_decay_integral(rate: f64, len: f64) -> f64 {
    if rate >= 0.0 {
        decay_integral(rate, len).ln()
    } else {
        -rate * len + decay_integral(-rate, len).ln()
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn check_constants(
    params: &PolicyParams,
    mut c: EquilibriumConstants,
) -> Result<EquilibriumConstants> {
    const SLACK: f64 = 1e-9;
    let in_unit = |v: f64| v.is_finite() && (-SLACK..=1.0 + SLACK).contains(&v);
    if !(in_unit(c.f0) && in_unit(c.fbar_t1) && in_unit(c.fbar_t2)) || c.fbar_t1 > c.fbar_t2 + SLACK
    {
        return Err(Error::SingularSystem(format!(
            "constants out of range for {params:?}: {c:?}"
        )));
    }
    c.f0 = c.f0.clamp(0.0, 1.0);
    c.fbar_t1 = c.fbar_t1.clamp(0.0, 1.0);
    c.fbar_t2 = c.fbar_t2.clamp(c.fbar_t1, 1.0);
    Ok(c)
}

/// True when `a` and `b` are close enough that the closed forms switch to
/// their limiting expressions.
pub(crate) fn rates_coincide(a: f64, b: f64) -> bool {
    (a - b).abs() < RATE_EPS
}
