use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expo::{decay_first_moment, decay_integral};
use crate::model::{solve_constants, EquilibriumConstants, PolicyParams};
use crate::threshold::Threshold;

/// One piece of the continuous part of the workload law: density
/// `coef · e^{−rate·(w − start)}` on `(start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub coef: f64,
    pub rate: f64,
}

impl Segment {
    /// Mass on `(start, min(w, end)]`.
    fn mass_below(&self, w: f64) -> f64 {
        if w <= self.start {
            return 0.0;
        }
        self.coef * decay_integral(self.rate, w.min(self.end) - self.start)
    }

    /// Mass on `(max(w, start), end]`.
    fn mass_above(&self, w: f64) -> f64 {
        let from = w.max(self.start);
        if from >= self.end {
            return 0.0;
        }
        let offset = from - self.start;
        self.coef * (-self.rate * offset).exp() * decay_integral(self.rate, self.end - from)
    }

    fn density(&self, w: f64) -> f64 {
        if w > self.start && w <= self.end {
            self.coef * (-self.rate * (w - self.start)).exp()
        } else {
            0.0
        }
    }
}

/// Stationary workload law of the cavity queue with exponential service:
/// an atom `F(0)` at zero plus a piecewise-exponential density with knots
/// at the thresholds.
///
/// Below `T2` every replica class is admitted (rate `λ̄`), between `T2` and
/// `T1` only primaries (rate `λ`), and above `T1` nothing. Once the
/// equilibrium constants are consistent the density is
///
/// ```text
/// f(w) = F(0)·λ̄·e^{−(μ−λ̄)w}                         0 < w ≤ T2
///      = ((μ−λ)F̄(T2) + λF̄(T1))·e^{−(μ−λ)(w−T2)}     T2 < w ≤ T1
///      = μ·F̄(T1)·e^{−μ(w−T1)}                         w > T1
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadLaw {
    params: PolicyParams,
    constants: EquilibriumConstants,
    segments: Vec<Segment>,
}

impl WorkloadLaw {
    /// Solves the equilibrium constants and builds the law.
    pub fn new(params: &PolicyParams) -> Result<Self> {
        let constants = solve_constants(params)?;
        Ok(Self::from_constants(params, constants))
    }

    pub fn from_constants(params: &PolicyParams, constants: EquilibriumConstants) -> Self {
        let lambda = params.lambda;
        let mu = params.mu;
        let lambda_bar = params.lambda_bar();
        let EquilibriumConstants {
            f0,
            fbar_t1,
            fbar_t2,
        } = constants;
        let t1 = params.t1.to_f64();
        let t2 = params.t2.to_f64();

        let mut segments = Vec::with_capacity(3);
        if t2 > 0.0 {
            segments.push(Segment {
                start: 0.0,
                end: t2,
                coef: f0 * lambda_bar,
                rate: mu - lambda_bar,
            });
        }
        // Density just above T2. Continuity with the lower segment avoids the
        // cancellation in the equivalent (μ−λ)F̄(T2) + λF̄(T1) when F(0) is usable.
        let from_f0 = f0 * lambda_bar * (-(mu - lambda_bar) * t2).exp();
        let mid_coef = if f0 > 0.0 && from_f0.is_finite() {
            from_f0
        } else {
            (mu - lambda) * fbar_t2 + lambda * fbar_t1
        };
        if params.t2.is_finite() && t1 > t2 {
            segments.push(Segment {
                start: t2,
                end: t1,
                coef: mid_coef,
                rate: mu - lambda,
            });
        }
        if params.t1.is_finite() {
            segments.push(Segment {
                start: t1,
                end: f64::INFINITY,
                coef: mu * fbar_t1,
                rate: mu,
            });
        }

        WorkloadLaw {
            params: *params,
            constants,
            segments,
        }
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn constants(&self) -> &EquilibriumConstants {
        &self.constants
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn f0(&self) -> f64 {
        self.constants.f0
    }

    /// `F(w) = P(W ≤ w)`.
    pub fn cdf(&self, w: f64) -> f64 {
        if w < 0.0 {
            return 0.0;
        }
        if w == f64::INFINITY {
            return 1.0;
        }
        let v = self.constants.f0 + self.segments.iter().map(|s| s.mass_below(w)).sum::<f64>();
        v.clamp(0.0, 1.0)
    }

    /// `F̄(w) = P(W > w)`, summed from the tail so small values keep their
    /// relative precision.
    pub fn tail(&self, w: f64) -> f64 {
        if w < 0.0 {
            return 1.0;
        }
        let v: f64 = self.segments.iter().map(|s| s.mass_above(w)).sum();
        v.clamp(0.0, 1.0)
    }

    pub fn tail_at(&self, t: Threshold) -> f64 {
        match t {
            Threshold::Finite(v) => self.tail(v),
            Threshold::Infinite => 0.0,
        }
    }

    pub fn cdf_at(&self, t: Threshold) -> f64 {
        match t {
            Threshold::Finite(v) => self.cdf(v),
            Threshold::Infinite => 1.0,
        }
    }

    /// Density of the continuous part (the atom at zero excluded).
    pub fn density(&self, w: f64) -> f64 {
        self.segments.iter().map(|s| s.density(w)).sum()
    }

    /// Total mass of the law; equals one up to rounding when the constants
    /// are consistent.
    pub fn total_mass(&self) -> f64 {
        self.constants.f0 + self.segments.iter().map(|s| s.mass_above(0.0)).sum::<f64>()
    }

    /// `E[W·1{W ≤ t}]`.
    pub fn partial_mean(&self, t: Threshold) -> f64 {
        let upper = t.to_f64();
        self.segments
            .iter()
            .filter(|s| upper > s.start)
            .map(|s| {
                let len = upper.min(s.end) - s.start;
                s.coef * (s.start * decay_integral(s.rate, len) + decay_first_moment(s.rate, len))
            })
            .sum()
    }

    /// `E[W]`.
    pub fn mean(&self) -> f64 {
        self.partial_mean(Threshold::Infinite)
    }

    /// Infimum of the `θ` for which `E[e^{−θW}]` is finite.
    pub fn mgf_lower_bound(&self) -> f64 {
        let p = &self.params;
        match (p.t1, p.t2) {
            (Threshold::Finite(_), _) => -p.mu,
            (Threshold::Infinite, Threshold::Finite(_)) => -(p.mu - p.lambda),
            (Threshold::Infinite, Threshold::Infinite) => -(p.mu - p.lambda_bar()),
        }
    }

    /// `Φ_W(θ) = E[e^{−θW}]` in the closed form
    ///
    /// ```text
    /// F(0)(1 + λ̄/(θ+μ−λ̄))
    ///   + ((μ−λ)F̄(T2) + λF̄(T1))·e^{−θT2}·[1/(θ+μ−λ) − 1/(θ+μ−λ̄)]
    ///   − μF̄(T1)·e^{−θT1}·[1/(θ+μ−λ) − 1/(θ+μ)]
    /// ```
    ///
    /// The poles at `θ = λ̄ − μ` and `θ = λ − μ` inside the domain are
    /// removable; near them the terms are regrouped into bounded integrals.
    pub fn mgf(&self, theta: f64) -> Result<f64> {
        let lower = self.mgf_lower_bound();
        if !theta.is_finite() || theta <= lower {
            return Err(Error::OutOfDomain(format!(
                "theta = {theta} must exceed {lower}"
            )));
        }
        const POLE_EPS: f64 = 1e-7;
        let p = &self.params;
        let (lambda, mu, lambda_bar) = (p.lambda, p.mu, p.lambda_bar());
        let EquilibriumConstants {
            f0,
            fbar_t1,
            fbar_t2,
        } = self.constants;
        let c_mid = (mu - lambda) * fbar_t2 + lambda * fbar_t1;
        let r_bar = theta + mu - lambda_bar;
        let r_mid = theta + mu - lambda;

        let Some(t2) = p.t2.as_finite() else {
            // T1 = T2 = ∞
            return Ok(f0 * (1.0 + lambda_bar / r_bar));
        };
        let e2 = (-theta * t2).exp();

        // F(0)(1 + λ̄/r̄) − c_mid·e^{−θT2}/r̄
        let low = if r_bar.abs() < POLE_EPS {
            f0 + f0 * lambda_bar * decay_integral(r_bar, t2)
        } else {
            f0 * (1.0 + lambda_bar / r_bar) - c_mid * e2 / r_bar
        };

        let high = match p.t1 {
            Threshold::Infinite => c_mid * e2 / r_mid,
            Threshold::Finite(t1) => {
                let e1 = (-theta * t1).exp();
                // c_mid·e^{−θT2}/r_mid − μF̄(T1)·e^{−θT1}/r_mid
                let mid = if r_mid.abs() < POLE_EPS {
                    c_mid * e2 * decay_integral(r_mid, t1 - t2)
                } else {
                    c_mid * e2 / r_mid - mu * fbar_t1 * e1 / r_mid
                };
                mid + mu * fbar_t1 * e1 / (theta + mu)
            }
        };
        Ok(low + high)
    }
}

/// `F(w)` of the cavity-queue workload law.
pub fn workload_cdf(law: &WorkloadLaw, w: f64) -> f64 {
    law.cdf(w)
}

/// `Φ_W(θ) = E[e^{−θW}]` of the cavity-queue workload law.
pub fn workload_mgf(law: &WorkloadLaw, theta: f64) -> Result<f64> {
    law.mgf(theta)
}
