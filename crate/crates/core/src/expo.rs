//! Exponential integrals with removable singularities at rate zero.

/// Below this magnitude a rate is treated through its series expansion.
pub(crate) const RATE_EPS: f64 = 1e-9;

/// `∫_0^len e^{-rate·s} ds = (1 − e^{−rate·len}) / rate`, with `len` allowed
/// to be infinite when `rate > 0`.
pub(crate) fn decay_integral(rate: f64, len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    if len.is_infinite() {
        debug_assert!(rate > 0.0);
        return 1.0 / rate;
    }
    if rate.abs() < RATE_EPS {
        let x = rate * len;
        return len * (1.0 - x / 2.0 + x * x / 6.0);
    }
    -(-rate * len).exp_m1() / rate
}

/// `∫_0^len s·e^{-rate·s} ds`.
pub(crate) fn decay_first_moment(rate: f64, len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    if len.is_infinite() {
        debug_assert!(rate > 0.0);
        return 1.0 / (rate * rate);
    }
    if rate.abs() < RATE_EPS {
        let x = rate * len;
        return len * len * (0.5 - x / 3.0 + x * x / 8.0);
    }
    // (1 − e^{−rL}(1 + rL)) / r²
    let x = rate * len;
    (-(-x).exp_m1() - x * (-x).exp()) / (rate * rate)
}
