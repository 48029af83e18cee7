use rayon::prelude::*;
use redundancy_core::analytic::analyze;
use redundancy_core::{
    convergence_study, improvement_over_random, run, PolicyParams, ResponseMetrics, SimStats,
    Threshold, WorkloadLaw,
};

use crate::config::{ExperimentConfig, Output};
use crate::error::CliResult;
use crate::output::{format_number as num, Table};

pub const ANALYTIC_HEADER: [&str; 13] = [
    "lambda",
    "mu",
    "d",
    "p",
    "t1",
    "t2",
    "lambda_bar",
    "f0",
    "fbar_t1",
    "fbar_t2",
    "p_loss",
    "tau",
    "quadrature_error",
];

pub const SIMULATE_HEADER: [&str; 19] = [
    "lambda",
    "mu",
    "n_servers",
    "d",
    "p",
    "t1",
    "t2",
    "n_arrivals",
    "n_replications",
    "seed",
    "tau_sim",
    "tau_ci",
    "p_loss_sim",
    "p_loss_ci",
    "n_admitted",
    "n_lost",
    "tau_analytic",
    "p_loss_analytic",
    "gap",
];

pub const VALIDATE_HEADER: [&str; 5] = ["n", "tau_sim", "tau_ci", "tau_analytic", "gap"];

fn threshold(t: Threshold) -> String {
    match t {
        Threshold::Finite(v) => num(v),
        Threshold::Infinite => "inf".into(),
    }
}

fn checked(params: &PolicyParams) -> CliResult<()> {
    params.validate()?;
    Ok(())
}

pub fn analytic_row(params: &PolicyParams, law: &WorkloadLaw, m: &ResponseMetrics) -> Vec<String> {
    let c = law.constants();
    vec![
        num(params.lambda),
        num(params.mu),
        params.d.to_string(),
        num(params.p),
        threshold(params.t1),
        threshold(params.t2),
        num(params.lambda_bar()),
        num(c.f0),
        num(c.fbar_t1),
        num(c.fbar_t2),
        num(m.p_loss),
        num(m.tau),
        num(m.quadrature_error),
    ]
}

/// One row with the equilibrium constants and metrics of `config.base`.
pub fn cmd_analytic(config: &ExperimentConfig) -> CliResult<Table> {
    checked(&config.base)?;
    let (law, m) = analyze(&config.base)?;
    for diag in redundancy_core::analytic::cross_check(&law) {
        log::warn!("{diag}");
    }
    let mut table = Table::new(ANALYTIC_HEADER);
    table.push(analytic_row(&config.base, &law, &m));
    Ok(table)
}

/// Simulates `config.base` and pairs the estimates with the analytic
/// values when those exist. The analytic columns are empty for unstable
/// parameters, since the finite system can still be simulated.
pub fn cmd_simulate(config: &ExperimentConfig, seed: Option<u64>) -> CliResult<Table> {
    checked(&config.base)?;
    let settings = config.sim_settings(seed);
    let sim = settings.clone().with_params(config.base);
    let stats = run(&sim)?;
    let analytic = analyze(&config.base).ok().map(|(_, m)| m);
    let p = &config.base;
    let mut row = vec![
        num(p.lambda),
        num(p.mu),
        p.n_servers.to_string(),
        p.d.to_string(),
        num(p.p),
        threshold(p.t1),
        threshold(p.t2),
        settings.n_arrivals.to_string(),
        settings.n_replications.to_string(),
        settings.seed.to_string(),
        num(stats.tau_hat),
        num(stats.tau_ci_halfwidth),
        num(stats.p_loss_hat),
        num(stats.p_loss_ci_halfwidth),
        stats.n_admitted.to_string(),
        stats.n_lost.to_string(),
    ];
    match analytic {
        Some(m) => row.extend([
            num(m.tau),
            num(m.p_loss),
            num((stats.tau_hat - m.tau).abs() / m.tau),
        ]),
        None => row.extend([String::new(), String::new(), String::new()]),
    }
    let mut table = Table::new(SIMULATE_HEADER);
    table.push(row);
    Ok(table)
}

struct PointResult {
    analytic: Option<ResponseMetrics>,
    sim: Option<SimStats>,
}

fn evaluate_point(
    params: &PolicyParams,
    outputs: &[Output],
    config: &ExperimentConfig,
    seed: Option<u64>,
) -> CliResult<PointResult> {
    checked(params)?;
    let analytic = if outputs.iter().any(|o| o.needs_analysis()) {
        Some(analyze(params)?.1)
    } else {
        None
    };
    let sim = if outputs.iter().any(|o| o.needs_simulation()) {
        Some(run(&config.sim_settings(seed).with_params(*params))?)
    } else {
        None
    };
    Ok(PointResult { analytic, sim })
}

fn output_cell(out: Output, params: &PolicyParams, r: &PointResult) -> String {
    let a = r.analytic.as_ref();
    let s = r.sim.as_ref();
    let v = match out {
        Output::Tau | Output::TauAnalytic => a.map(|m| m.tau),
        Output::PLoss => a.map(|m| m.p_loss),
        Output::TauSim => s.map(|s| s.tau_hat),
        Output::TauSimCi => s.map(|s| s.tau_ci_halfwidth),
        Output::PLossSim => s.map(|s| s.p_loss_hat),
        Output::PLossSimCi => s.map(|s| s.p_loss_ci_halfwidth),
        Output::Gap => a.zip(s).map(|(m, s)| (s.tau_hat - m.tau).abs() / m.tau),
        Output::Improvement => a.map(|m| improvement_over_random(params.lambda, params.mu, m.tau)),
    };
    v.map(num).unwrap_or_default()
}

/// Evaluates every axis point (in parallel) and writes rows in axis order.
/// Per-point failures go to the `error` column. Fails only if every point
/// failed, returning the first point's error.
pub fn cmd_sweep(config: &ExperimentConfig, seed: Option<u64>) -> CliResult<Table> {
    let (axis, values) = config.validate_sweep()?;
    let outputs = &config.outputs;
    let results: Vec<(PolicyParams, CliResult<PointResult>)> = values
        .par_iter()
        .map(|&v| {
            let params = axis.apply(&config.base, v);
            (params, evaluate_point(&params, outputs, config, seed))
        })
        .collect();

    let mut header = vec![axis.name().to_string()];
    header.extend(outputs.iter().map(|o| o.name().to_string()));
    header.push("error".into());
    let mut table = Table::new(header);
    for (&value, (params, result)) in values.iter().zip(&results) {
        let mut row = vec![threshold(value)];
        match result {
            Ok(r) => {
                row.extend(outputs.iter().map(|&o| output_cell(o, params, r)));
                row.push(String::new());
            }
            Err(e) => {
                row.extend(outputs.iter().map(|_| String::new()));
                row.push(e.to_string());
            }
        }
        table.push(row);
    }

    if results.iter().all(|(_, r)| r.is_err()) {
        let (_, first) = results.into_iter().next().expect("values are non-empty");
        return Err(first.err().expect("all points failed"));
    }
    Ok(table)
}

/// Finite-N simulations across `n_grid` against the analytic value.
pub fn cmd_validate(config: &ExperimentConfig, seed: Option<u64>) -> CliResult<Table> {
    let grid = config.validate_grid()?;
    let params = config.base;
    checked(&params)?;
    let sim = config.sim_settings(seed).with_params(params);
    let rows = convergence_study(&params, grid, &sim)?;
    let mut table = Table::new(VALIDATE_HEADER);
    for r in rows {
        table.push(vec![
            r.n.to_string(),
            num(r.tau_sim),
            num(r.tau_ci),
            num(r.tau_analytic),
            num(r.gap),
        ]);
    }
    Ok(table)
}
