//! Adaptive integration on finite intervals.
//!
//! Each panel is integrated with the double-exponential rule; panels whose
//! error estimate exceeds their share of the tolerance are bisected.

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: u32,
}

impl std::ops::Add for Integral {
    type Output = Integral;

    fn add(self, rhs: Integral) -> Integral {
        Integral {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

const MAX_DEPTH: u32 = 30;

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Integral {
    assert!(
        a.is_finite() && b.is_finite(),
        "integration bounds must be finite"
    );
    if b <= a {
        return Integral::default();
    }
    adapt(f, a, b, abs_tol, 0)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Integral {
    let out = quadrature::integrate(f, a, b, tol);
    let here = Integral {
        value: out.integral,
        error: out.error_estimate,
        evaluations: out.num_function_evaluations,
    };
    if here.error <= tol || depth >= MAX_DEPTH {
        return here;
    }
    let mid = 0.5 * (a + b);
    let left = adapt(f, a, mid, 0.5 * tol, depth + 1);
    let right = adapt(f, mid, b, 0.5 * tol, depth + 1);
    let mut split = left + right;
    split.evaluations += here.evaluations;
    split
}

/// Integrates over `[knots[0], knots[last]]`, splitting at every interior
/// knot so that kinks in `f` fall on panel boundaries. The tolerance is
/// shared in proportion to the number of pieces.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, knots: &[f64], abs_tol: f64) -> Integral {
    let pieces: Vec<(f64, f64)> = knots
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(a, b)| b > a)
        .collect();
    if pieces.is_empty() {
        return Integral::default();
    }
    let tol = abs_tol / pieces.len() as f64;
    pieces
        .into_iter()
        .map(|(a, b)| integrate(f, a, b, tol))
        .fold(Integral::default(), |acc, x| acc + x)
}
