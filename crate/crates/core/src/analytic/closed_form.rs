//! Closed-form special cases for exponential service. These are kept apart
//! from the general solver and serve as independent cross-checks of it.

use std::fmt;

use serde::Serialize;

use crate::expo::decay_integral;
use crate::model::rates_coincide;
use crate::threshold::Threshold;

use super::kernel::k_general_exponential;
use super::WorkloadLaw;

/// Relative disagreement above which a closed form is reported.
pub const DISAGREEMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClosedForm {
    /// `π(p, T, T)`: `F(0)` and `k(x, T)`.
    IdenticalThresholds,
    /// `π(p, ∞, T2)`: `F(0)` from the explicit workload law.
    NoLossWorkload,
    /// `π(p, ∞, T2)`: `F(0)` from the normalization of the law, and the
    /// kernels `k(x, T2)`, `k(x, ∞)`.
    NoLossKernel,
    /// `π(p, ∞, ∞)`: `k(x, ∞) = e^{−(μ−λ̄)x}`.
    NoDiscard,
    /// `π(1, ∞, 0)`.
    IdleReplication,
}

/// A closed form that disagrees with the general path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub closed_form: ClosedForm,
    pub quantity: String,
    pub closed_value: f64,
    pub general_value: f64,
}

impl Diagnostic {
    pub fn relative_gap(&self) -> f64 {
        relative_gap(self.closed_value, self.general_value)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} {}: closed form {:.12e} vs general {:.12e} (relative gap {:.3e})",
            self.closed_form,
            self.quantity,
            self.closed_value,
            self.general_value,
            self.relative_gap()
        )
    }
}

pub(crate) fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `F(0)` under `π(p, T, T)`:
/// `(1 − λ̄/μ) / (1 − (λ̄/μ)² e^{−(μ−λ̄)T})`, or `1/(λ̄T + 2)` when `μ = λ̄`.
pub fn f0_identical_thresholds(lambda_bar: f64, mu: f64, t: f64) -> f64 {
    if rates_coincide(mu, lambda_bar) {
        return 1.0 / (lambda_bar * t + 2.0);
    }
    let rho = lambda_bar / mu;
    (1.0 - rho) / (1.0 - rho * rho * (-(mu - lambda_bar) * t).exp())
}

/// `F(0)` under `π(p, ∞, T2)` from the explicit workload law:
/// `(1 − ρ)(1 − ρ̄) / ((1 − ρ) + ρ̄(ρ − ρ̄)e^{−(μ−λ̄)T2})`.
pub fn f0_no_loss(lambda: f64, lambda_bar: f64, mu: f64, t2: f64) -> f64 {
    let rho = lambda / mu;
    let rho_bar = lambda_bar / mu;
    (1.0 - rho) * (1.0 - rho_bar)
        / ((1.0 - rho) + rho_bar * (rho - rho_bar) * (-(mu - lambda_bar) * t2).exp())
}

/// `F(0)` under `π(p, ∞, T2)` from normalizing the law:
/// `[λ̄((1 − e^{−(μ−λ̄)T2})/(μ−λ̄) + e^{−(μ−λ̄)T2}/(μ−λ)) + 1]^{−1}`.
///
/// Unlike [`f0_no_loss`] this form stays finite at `μ = λ̄`.
pub fn f0_no_loss_normalized(lambda: f64, lambda_bar: f64, mu: f64, t2: f64) -> f64 {
    let r = mu - lambda_bar;
    1.0 / (lambda_bar * (decay_integral(r, t2) + (-r * t2).exp() / (mu - lambda)) + 1.0)
}

/// `F(0) = (μ − λ)/(μ + λ(d − 1))` under `π(1, ∞, 0)`.
pub fn f0_idle_replication(lambda: f64, mu: f64, d: usize) -> f64 {
    (mu - lambda) / (mu + lambda * (d as f64 - 1.0))
}

/// Closed-form `k(x, t)` where one is known for the policy, evaluated with
/// the law's own `F(0)`. `None` if no closed form covers `(policy, t)`.
pub fn k_closed_form(law: &WorkloadLaw, x: f64, t: Threshold) -> Option<(ClosedForm, f64)> {
    let p = law.params();
    let (lambda, mu, lambda_bar) = (p.lambda, p.mu, p.lambda_bar());
    let f0 = law.f0();
    let r = mu - lambda_bar;

    // Below T: F(0)(μ/(μ−λ̄)e^{−(μ−λ̄)x} − λ̄/(μ−λ̄)e^{−(μ−λ̄)T}), written so
    // the limit μ = λ̄ is finite. Above T: F(0)e^{−μx}e^{λ̄T}.
    let k_below_threshold = |t: f64| -> f64 {
        if x >= t {
            f0 * (-mu * x + lambda_bar * t).exp()
        } else {
            let ex = (-r * x).exp();
            f0 * (ex + lambda_bar * ex * decay_integral(r, t - x))
        }
    };

    match (p.t1, p.t2, t) {
        (Threshold::Infinite, Threshold::Infinite, Threshold::Infinite) => {
            Some((ClosedForm::NoDiscard, (-r * x).exp()))
        }
        (Threshold::Finite(t1), Threshold::Finite(t2), Threshold::Finite(tt))
            if t1 == t2 && tt == t1 =>
        {
            Some((ClosedForm::IdenticalThresholds, k_below_threshold(tt)))
        }
        (Threshold::Infinite, Threshold::Finite(t2), Threshold::Finite(tt)) if tt == t2 => {
            Some((ClosedForm::NoLossKernel, k_below_threshold(t2)))
        }
        (Threshold::Infinite, Threshold::Finite(t2), Threshold::Infinite) => {
            let k2 = k_below_threshold(t2);
            let extra = if x >= t2 {
                let decayed = (-(mu - lambda) * x).exp();
                f0 * lambda_bar
                    * ((lambda_bar - lambda) * t2).exp()
                    * ((decayed - (-mu * x + lambda * t2).exp()) / lambda + decayed / (mu - lambda))
            } else {
                // Printed with e^{+(μ−λ̄)T2}; the general path gives
                // F̄(T2) = λ̄F(0)e^{−(μ−λ̄)T2}/(μ−λ) and a diagnostic is raised.
                lambda_bar / (mu - lambda) * f0 * ((mu - lambda_bar) * t2).exp()
            };
            Some((ClosedForm::NoLossKernel, k2 + extra))
        }
        _ => None,
    }
}

/// Compares every closed form applicable to `law` against the general
/// solver and kernel, returning those that disagree by more than
/// [`DISAGREEMENT_TOL`] (relative).
pub fn cross_check(law: &WorkloadLaw) -> Vec<Diagnostic> {
    let p = *law.params();
    let mut out = Vec::new();
    let mut compare = |form: ClosedForm, quantity: String, closed: f64, general: f64| {
        if relative_gap(closed, general) > DISAGREEMENT_TOL {
            out.push(Diagnostic {
                closed_form: form,
                quantity,
                closed_value: closed,
                general_value: general,
            });
        }
    };

    let (lambda, mu, lambda_bar) = (p.lambda, p.mu, p.lambda_bar());
    let f0 = law.f0();
    match (p.t1, p.t2) {
        (Threshold::Finite(t1), Threshold::Finite(t2)) if t1 == t2 => {
            compare(
                ClosedForm::IdenticalThresholds,
                "F(0)".into(),
                f0_identical_thresholds(lambda_bar, mu, t1),
                f0,
            );
        }
        (Threshold::Infinite, Threshold::Finite(t2)) => {
            if !rates_coincide(mu, lambda_bar) {
                compare(
                    ClosedForm::NoLossWorkload,
                    "F(0)".into(),
                    f0_no_loss(lambda, lambda_bar, mu, t2),
                    f0,
                );
            }
            compare(
                ClosedForm::NoLossKernel,
                "F(0)".into(),
                f0_no_loss_normalized(lambda, lambda_bar, mu, t2),
                f0,
            );
            if p.p == 1.0 && t2 == 0.0 {
                compare(
                    ClosedForm::IdleReplication,
                    "F(0)".into(),
                    f0_idle_replication(lambda, mu, p.d),
                    f0,
                );
            }
        }
        _ => {}
    }

    let mut knots = vec![0.0];
    knots.extend(p.t2.as_finite());
    knots.extend(p.t1.as_finite());
    let top = knots.iter().cloned().fold(0.0, f64::max) + 4.0 / mu;
    let grid: Vec<f64> = (0..=40).map(|i| top * i as f64 / 40.0).collect();
    for t in [p.t2, p.t1] {
        for &x in &grid {
            if let Some((form, closed)) = k_closed_form(law, x, t) {
                let general = k_general_exponential(law, mu, x, t);
                if relative_gap(closed, general) > DISAGREEMENT_TOL {
                    compare(form, format!("k({x}, {t})"), closed, general);
                    break;
                }
            }
        }
        if p.t1 == p.t2 {
            break;
        }
    }
    out
}
