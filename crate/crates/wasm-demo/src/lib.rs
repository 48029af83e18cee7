//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Thresholds are plain numbers; pass `Infinity` for "never discard".
//! Results come back as flat `Float64Array`s so the page can plot them
//! without a serialization layer.

// Flat numeric signatures keep the JS side free of glue objects.
#![allow(clippy::too_many_arguments)]

use redundancy_core::analytic::analyze;
use redundancy_core::{run, PolicyParams, SimConfig, WorkloadLaw};
use wasm_bindgen::prelude::*;

fn params(
    lambda: f64,
    mu: f64,
    n_servers: usize,
    d: usize,
    p: f64,
    t1: f64,
    t2: f64,
) -> Result<PolicyParams, String> {
    PolicyParams::new(lambda, mu, d, p, t1, t2)
        .and_then(|pp| pp.with_servers(n_servers.max(d)))
        .map_err(|e| e.to_string())
}

/// `[w_0, F(w_0), w_1, F(w_1), …]` on `points` evenly spaced levels in
/// `[0, w_max]`, followed by the atom `F(0)` and the mean workload.
pub fn workload_curve_values(
    lambda: f64,
    mu: f64,
    d: usize,
    p: f64,
    t1: f64,
    t2: f64,
    w_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let pp = params(lambda, mu, d, d, p, t1, t2)?;
    let law = WorkloadLaw::new(&pp).map_err(|e| e.to_string())?;
    let points = points.max(2);
    let mut out = Vec::with_capacity(2 * points + 2);
    for i in 0..points {
        let w = w_max * i as f64 / (points - 1) as f64;
        out.push(w);
        out.push(law.cdf(w));
    }
    out.push(law.f0());
    out.push(law.mean());
    Ok(out)
}

/// `[λ, τ, P_L]` triples across `points` arrival rates in
/// `[lambda_min, lambda_max]`. Unstable or degenerate points carry `NaN`.
pub fn metrics_curve_values(
    mu: f64,
    d: usize,
    p: f64,
    t1: f64,
    t2: f64,
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if !(lambda_min > 0.0 && lambda_max >= lambda_min) {
        return Err(format!("bad rate range [{lambda_min}, {lambda_max}]"));
    }
    let points = points.max(2);
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let lambda = lambda_min + (lambda_max - lambda_min) * i as f64 / (points - 1) as f64;
        let pp = params(lambda, mu, d, d, p, t1, t2)?;
        let (tau, p_loss) = match analyze(&pp) {
            Ok((_, m)) => (m.tau, m.p_loss),
            Err(e) if e.is_domain_error() => (f64::NAN, f64::NAN),
            Err(e) => return Err(e.to_string()),
        };
        out.extend([lambda, tau, p_loss]);
    }
    Ok(out)
}

/// `[τ̂, τ̂ CI, P̂_L, P̂_L CI, τ, P_L]` from a small simulation of `n_servers`
/// servers; the analytic pair is `NaN` when the model is unstable.
pub fn simulate_values(
    lambda: f64,
    mu: f64,
    n_servers: usize,
    d: usize,
    p: f64,
    t1: f64,
    t2: f64,
    n_arrivals: u64,
    n_replications: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let pp = params(lambda, mu, n_servers, d, p, t1, t2)?;
    let stats =
        run(&SimConfig::new(pp, n_arrivals, n_replications, seed)).map_err(|e| e.to_string())?;
    let (tau, p_loss) = analyze(&pp)
        .map(|(_, m)| (m.tau, m.p_loss))
        .unwrap_or((f64::NAN, f64::NAN));
    Ok(vec![
        stats.tau_hat,
        stats.tau_ci_halfwidth,
        stats.p_loss_hat,
        stats.p_loss_ci_halfwidth,
        tau,
        p_loss,
    ])
}

#[wasm_bindgen]
pub fn workload_curve(
    lambda: f64,
    mu: f64,
    d: usize,
    p: f64,
    t1: f64,
    t2: f64,
    w_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    workload_curve_values(lambda, mu, d, p, t1, t2, w_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn metrics_curve(
    mu: f64,
    d: usize,
    p: f64,
    t1: f64,
    t2: f64,
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    metrics_curve_values(mu, d, p, t1, t2, lambda_min, lambda_max, points)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate(
    lambda: f64,
    mu: f64,
    n_servers: usize,
    d: usize,
    p: f64,
    t1: f64,
    t2: f64,
    n_arrivals: u32,
    n_replications: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    simulate_values(
        lambda,
        mu,
        n_servers,
        d,
        p,
        t1,
        t2,
        n_arrivals as u64,
        n_replications,
        seed as u64,
    )
    .map_err(|e| JsError::new(&e))
}
