/// z-quantile of the two-sided 95% normal interval.
pub const Z_95: f64 = 1.959963984540054;

/// Mean and standard error of per-replication estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// `NaN` with fewer than two replications.
    pub std_error: f64,
}

impl Summary {
    pub fn half_width(&self) -> f64 {
        Z_95 * self.std_error
    }
}

/// Summarizes values in the order given; the result does not depend on
/// which thread produced which value.
pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            mean: f64::NAN,
            std_error: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Summary {
            mean,
            std_error: f64::NAN,
        };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Summary {
        mean,
        std_error: (var / n as f64).sqrt(),
    }
}

/// Kolmogorov–Smirnov distance between a sample and a CDF that may have
/// atoms: `sup |F_n(w) − F(w)|` checked on both sides of every sample point.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        let below = i as f64 / n;
        let at = j as f64 / n;
        // Just left of x, the true CDF is at most F(x) and at least F at the
        // previous sample; comparing `below` against F(x) minus the atom is
        // not possible without the left limit, so use F(x⁻) ≤ F(x).
        d = d.max((at - f).abs()).max(below - f);
        i = j;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_constant_values() {
        let s = summarize(&[2.0, 2.0, 2.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std_error, 0.0);
        assert!(summarize(&[1.0]).std_error.is_nan());
    }

    #[test]
    fn summary_matches_hand_computation() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ks_of_uniform_grid() {
        let samples: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0));
        assert!(d <= 0.0005 + 1e-12, "{d}");
    }
}
