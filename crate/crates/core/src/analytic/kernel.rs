use serde::Serialize;

use crate::expo::decay_integral;
use crate::quad;
use crate::threshold::Threshold;

use super::closed_form::{k_closed_form, relative_gap, ClosedForm, Diagnostic, DISAGREEMENT_TOL};
use super::{ServiceLaw, WorkloadLaw};

/// Result of [`k_kernel_checked`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelEval {
    pub value: f64,
    /// Closed form that covered this evaluation, if any.
    pub closed_form: Option<ClosedForm>,
    /// Set when the closed form disagreed with the general path; `value`
    /// is then the general-path value.
    pub diagnostic: Option<Diagnostic>,
}

/// `k(x, t) = E[Ḡ(x − W)·1{W ≤ t}]`.
pub fn k_kernel(law: &WorkloadLaw, service: &ServiceLaw, x: f64, t: Threshold) -> f64 {
    k_kernel_checked(law, service, x, t).value
}

/// Evaluates `k(x, t)` through the closed form when one applies, checked
/// against the general Stieltjes integral.
pub fn k_kernel_checked(
    law: &WorkloadLaw,
    service: &ServiceLaw,
    x: f64,
    t: Threshold,
) -> KernelEval {
    let Some(rate) = service.exponential_rate() else {
        return KernelEval {
            value: k_kernel_quadrature(law, service, x, t, 1e-10),
            closed_form: None,
            diagnostic: None,
        };
    };
    let general = k_general_exponential(law, rate, x, t);
    let closed = (rate == law.params().mu)
        .then(|| k_closed_form(law, x, t))
        .flatten();
    match closed {
        None => KernelEval {
            value: general,
            closed_form: None,
            diagnostic: None,
        },
        Some((form, value)) if relative_gap(value, general) <= DISAGREEMENT_TOL => KernelEval {
            value,
            closed_form: Some(form),
            diagnostic: None,
        },
        Some((form, value)) => {
            let diagnostic = Diagnostic {
                closed_form: form,
                quantity: format!("k({x}, {t})"),
                closed_value: value,
                general_value: general,
            };
            log::warn!("closed form disagrees with general kernel: {diagnostic}");
            KernelEval {
                value: general,
                closed_form: Some(form),
                diagnostic: Some(diagnostic),
            }
        }
    }
}

/// General kernel for exponential service of rate `rate`, integrating the
/// service tail against the atom and each exponential piece analytically:
///
/// `k(x, t) = P(x < W ≤ t) + e^{−rate·x}·E[e^{rate·W}·1{W ≤ min(x, t)}]`.
pub(crate) fn k_general_exponential(law: &WorkloadLaw, rate: f64, x: f64, t: Threshold) -> f64 {
    if x <= 0.0 {
        return law.cdf_at(t);
    }
    let upper = t.to_f64();
    let above_x = if x < upper {
        law.tail(x) - law.tail_at(t)
    } else {
        0.0
    };
    let cutoff = x.min(upper);
    let mut below = law.f0() * (-rate * x).exp();
    for s in law.segments() {
        let len = cutoff.min(s.end) - s.start;
        if len <= 0.0 {
            continue;
        }
        // coef·∫_0^len e^{−rate(x − start − u)} e^{−s.rate·u} du
        let growth = rate - s.rate;
        let piece = if growth > 0.0 {
            (-rate * (x - s.start - len) - s.rate * len).exp() * decay_integral(growth, len)
        } else {
            (-rate * (x - s.start)).exp() * decay_integral(-growth, len)
        };
        below += s.coef * piece;
    }
    (above_x.max(0.0) + below).max(0.0)
}

/// The same kernel by numerical quadrature of `Ḡ(x − w)` against the
/// density, for any service law.
pub fn k_kernel_quadrature(
    law: &WorkloadLaw,
    service: &ServiceLaw,
    x: f64,
    t: Threshold,
    abs_tol: f64,
) -> f64 {
    let upper = t.to_f64();
    let mut total = law.f0() * service.tail(x);
    let segments = law.segments();
    let per_piece = abs_tol / (segments.len().max(1) as f64 * 2.0);
    for s in segments {
        let mut end = s.end.min(upper);
        if end <= s.start {
            continue;
        }
        if end.is_infinite() {
            // The density decays like e^{−rate·w}; beyond 60 e-folds it is
            // negligible at any tolerance used here.
            end = s.start + 60.0 / s.rate + x.max(0.0);
        }
        let f = |w: f64| service.tail(x - w) * s.coef * (-s.rate * (w - s.start)).exp();
        let mut knots = vec![s.start];
        if x > s.start && x < end {
            knots.push(x);
        }
        knots.push(end);
        total += quad::integrate_pieces(&f, &knots, per_piece).value;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PolicyParams;

    fn law(lambda: f64, d: usize, p: f64, t1: f64, t2: f64) -> WorkloadLaw {
        WorkloadLaw::new(&PolicyParams::new(lambda, 1.0, d, p, t1, t2).unwrap()).unwrap()
    }

    #[test]
    fn kernel_at_zero_is_cdf() {
        let g = ServiceLaw::exponential(1.0);
        let l = law(0.3, 3, 0.6, 4.0, 1.0);
        for t in [
            Threshold::Finite(1.0),
            Threshold::Finite(4.0),
            Threshold::Infinite,
        ] {
            assert!((k_kernel(&l, &g, 0.0, t) - l.cdf_at(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn no_discard_kernel() {
        let g = ServiceLaw::exponential(1.0);
        let l = law(0.1, 3, 1.0, f64::INFINITY, f64::INFINITY);
        for &x in &[0.0, 0.5, 3.0, 20.0] {
            let eval = k_kernel_checked(&l, &g, x, Threshold::Infinite);
            assert_eq!(eval.closed_form, Some(ClosedForm::NoDiscard));
            assert!(eval.diagnostic.is_none());
            assert!((eval.value - (-0.7 * x).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn identical_thresholds_above_t() {
        // x = 6 ≥ T = 5: F(0)e^{−6}e^{0.9·5}
        let g = ServiceLaw::exponential(1.0);
        let l = law(0.3, 3, 1.0, 5.0, 5.0);
        let expected = l.f0() * (-1.5f64).exp();
        let eval = k_kernel_checked(&l, &g, 6.0, Threshold::Finite(5.0));
        assert_eq!(eval.closed_form, Some(ClosedForm::IdenticalThresholds));
        assert!(eval.diagnostic.is_none());
        assert!((eval.value - expected).abs() < 1e-14);
        assert!((eval.value - 0.043858).abs() < 1e-5);
        let numeric = k_kernel_quadrature(&l, &g, 6.0, Threshold::Finite(5.0), 1e-12);
        assert!((numeric - expected).abs() < 1e-10);
    }

    #[test]
    fn exact_and_quadrature_paths_agree() {
        let g = ServiceLaw::exponential(1.0);
        for l in [
            law(0.3, 3, 0.5, 4.0, 1.0),
            law(2.0, 3, 1.0, 1.5, 1.5),
            law(0.51, 3, 1.0, f64::INFINITY, 2.0),
            law(0.2, 3, 1.0, f64::INFINITY, 0.0),
        ] {
            let p = *l.params();
            for t in [p.t2, p.t1] {
                for &x in &[0.0, 0.3, 1.0, 1.5, 2.5, 4.5, 9.0] {
                    let exact = k_general_exponential(&l, 1.0, x, t);
                    let numeric = k_kernel_quadrature(&l, &g, x, t, 1e-12);
                    assert!(
                        (exact - numeric).abs() < 1e-9,
                        "{p:?} t={t} x={x}: {exact} vs {numeric}"
                    );
                }
            }
        }
    }
}
