//! Discrete-event simulation of the exact N-server system.
//!
//! Jobs arrive as a Poisson process of rate `Nλ`. Each job picks a primary
//! server uniformly and, with probability `p`, `d − 1` distinct secondary
//! servers uniformly among the rest. A replica is admitted iff the workload
//! it finds is at most its threshold; admitted replicas add an independent
//! service time to their server's FCFS workload. The job's response time is
//! the earliest completion among its admitted replicas.
//!
//! Only the servers touched by an arrival are updated (lazy decay), so one
//! arrival costs `O(d)`.

mod server;
mod stats;

pub use server::{JobOutcome, ServerPool, ServerState};
pub use stats::{ks_statistic, summarize, Summary, Z_95};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::analytic::analyze;
use crate::error::{Error, Result};
use crate::model::PolicyParams;

/// Run-length and sampling settings, independent of the policy parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub n_arrivals: u64,
    pub warmup_fraction: f64,
    pub n_replications: usize,
    pub seed: u64,
    /// Record the tagged server's workload at every `sample_stride`-th
    /// post-warmup arrival.
    pub sample_stride: u64,
    /// Maximum number of workload samples kept per replication.
    pub reservoir_capacity: usize,
    /// Points `x` at which `P(R > x | admitted)` is estimated.
    pub tail_points: Vec<f64>,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            n_arrivals: 100_000,
            warmup_fraction: 0.1,
            n_replications: 20,
            seed: 0,
            sample_stride: 1,
            reservoir_capacity: 10_000,
            tail_points: Vec::new(),
        }
    }
}

impl SimSettings {
    pub fn with_params(self, params: PolicyParams) -> SimConfig {
        SimConfig {
            params,
            settings: self,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: PolicyParams,
    #[serde(flatten)]
    pub settings: SimSettings,
}

impl SimConfig {
    pub fn new(params: PolicyParams, n_arrivals: u64, n_replications: usize, seed: u64) -> Self {
        SimSettings {
            n_arrivals,
            n_replications,
            seed,
            ..SimSettings::default()
        }
        .with_params(params)
    }

    pub fn validate(&self) -> Result<()> {
        self.params
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let s = &self.settings;
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if s.n_arrivals < 1000 {
            return bad(format!(
                "n_arrivals must be at least 1000, got {}",
                s.n_arrivals
            ));
        }
        if !(0.0..=0.5).contains(&s.warmup_fraction) {
            return bad(format!(
                "warmup_fraction must lie in [0, 0.5], got {}",
                s.warmup_fraction
            ));
        }
        if s.n_replications < 1 {
            return bad("n_replications must be at least 1".into());
        }
        if s.sample_stride < 1 {
            return bad("sample_stride must be at least 1".into());
        }
        if s.tail_points.iter().any(|x| !x.is_finite()) {
            return bad("tail_points must be finite".into());
        }
        Ok(())
    }

    fn warmup_jobs(&self) -> u64 {
        (self.settings.n_arrivals as f64 * self.settings.warmup_fraction).floor() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub x: f64,
    pub estimate: f64,
    pub ci_halfwidth: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationSummary {
    pub tau: f64,
    pub p_loss: f64,
    pub n_admitted: u64,
    pub n_lost: u64,
}

/// Estimates across replications. Point estimates are means of the
/// per-replication estimates; intervals are 95% normal intervals on those.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub tau_hat: f64,
    pub tau_ci_halfwidth: f64,
    pub tau_std_error: f64,
    pub p_loss_hat: f64,
    pub p_loss_ci_halfwidth: f64,
    pub p_loss_std_error: f64,
    pub n_admitted: u64,
    pub n_lost: u64,
    pub n_post_warmup: u64,
    /// Workload found at arrival instants by the tagged server 0.
    pub workload_samples: Vec<f64>,
    pub response_tail: Vec<TailEstimate>,
    pub replications: Vec<ReplicationSummary>,
}

#[derive(Debug, Clone, Default)]
struct ReplicationOutcome {
    n_post_warmup: u64,
    n_admitted: u64,
    n_lost: u64,
    response_sum: f64,
    tail_counts: Vec<u64>,
    samples: Vec<f64>,
}

/// Streams for replication `r`: the main stream is seeded with `seed + r`,
/// the reservoir sampler uses stream 1 of the same key.
fn replication_rngs(seed: u64, replication: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let key = seed.wrapping_add(replication);
    let main = ChaCha8Rng::seed_from_u64(key);
    let mut reservoir = ChaCha8Rng::seed_from_u64(key);
    reservoir.set_stream(1);
    (main, reservoir)
}

fn run_replication(config: &SimConfig, replication: u64) -> ReplicationOutcome {
    let params = &config.params;
    let settings = &config.settings;
    let n = params.n_servers;
    let (mut rng, mut reservoir_rng) = replication_rngs(settings.seed, replication);
    let interarrival = Exp::new(n as f64 * params.lambda).expect("validated rate");
    let service = Exp::new(params.mu).expect("validated rate");
    let warmup = config.warmup_jobs();
    let replicates = params.d > 1 && params.p > 0.0;

    let mut pool = ServerPool::new(n);
    let mut secondaries: Vec<usize> = Vec::with_capacity(params.d.saturating_sub(1));
    let mut out = ReplicationOutcome {
        tail_counts: vec![0; settings.tail_points.len()],
        ..Default::default()
    };
    let mut seen_samples: u64 = 0;
    let mut now = 0.0;

    for job in 0..settings.n_arrivals {
        now += interarrival.sample(&mut rng);
        let primary = rng.random_range(0..n);
        secondaries.clear();
        let replicate = replicates && (params.p >= 1.0 || rng.random::<f64>() < params.p);
        if replicate {
            for k in index::sample(&mut rng, n - 1, params.d - 1) {
                secondaries.push(if k >= primary { k + 1 } else { k });
            }
        }

        let post = job >= warmup;
        if post && (job - warmup).is_multiple_of(settings.sample_stride) {
            let w = pool.workload_at(0, now);
            seen_samples += 1;
            if out.samples.len() < settings.reservoir_capacity {
                out.samples.push(w);
            } else {
                let slot = reservoir_rng.random_range(0..seen_samples);
                if (slot as usize) < settings.reservoir_capacity {
                    out.samples[slot as usize] = w;
                }
            }
        }

        let outcome = pool.dispatch(now, primary, &secondaries, params.t1, params.t2, || {
            service.sample(&mut rng)
        });
        if !post {
            continue;
        }
        out.n_post_warmup += 1;
        match outcome {
            JobOutcome::Served(r) => {
                out.n_admitted += 1;
                out.response_sum += r;
                for (count, &x) in out.tail_counts.iter_mut().zip(&settings.tail_points) {
                    if r > x {
                        *count += 1;
                    }
                }
            }
            JobOutcome::Lost => out.n_lost += 1,
        }
    }
    out
}

fn run_replications(config: &SimConfig) -> Vec<ReplicationOutcome> {
    let count = config.settings.n_replications as u64;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count)
            .into_par_iter()
            .map(|r| run_replication(config, r))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(|r| run_replication(config, r)).collect()
    }
}

/// Simulates `n_replications` independent runs of `n_arrivals` jobs each.
pub fn run(config: &SimConfig) -> Result<SimStats> {
    config.validate()?;
    let outcomes = run_replications(config);

    let per_rep: Vec<ReplicationSummary> = outcomes
        .iter()
        .map(|o| ReplicationSummary {
            tau: if o.n_admitted > 0 {
                o.response_sum / o.n_admitted as f64
            } else {
                f64::NAN
            },
            p_loss: o.n_lost as f64 / o.n_post_warmup as f64,
            n_admitted: o.n_admitted,
            n_lost: o.n_lost,
        })
        .collect();

    let taus: Vec<f64> = per_rep
        .iter()
        .map(|r| r.tau)
        .filter(|t| !t.is_nan())
        .collect();
    let losses: Vec<f64> = per_rep.iter().map(|r| r.p_loss).collect();
    let tau = summarize(&taus);
    let loss = summarize(&losses);

    let response_tail = config
        .settings
        .tail_points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let fractions: Vec<f64> = outcomes
                .iter()
                .filter(|o| o.n_admitted > 0)
                .map(|o| o.tail_counts[i] as f64 / o.n_admitted as f64)
                .collect();
            let s = summarize(&fractions);
            TailEstimate {
                x,
                estimate: s.mean,
                ci_halfwidth: s.half_width(),
                std_error: s.std_error,
            }
        })
        .collect();

    Ok(SimStats {
        tau_hat: tau.mean,
        tau_ci_halfwidth: tau.half_width(),
        tau_std_error: tau.std_error,
        p_loss_hat: loss.mean,
        p_loss_ci_halfwidth: loss.half_width(),
        p_loss_std_error: loss.std_error,
        n_admitted: outcomes.iter().map(|o| o.n_admitted).sum(),
        n_lost: outcomes.iter().map(|o| o.n_lost).sum(),
        n_post_warmup: outcomes.iter().map(|o| o.n_post_warmup).sum(),
        workload_samples: outcomes
            .iter()
            .flat_map(|o| o.samples.iter().copied())
            .collect(),
        response_tail,
        replications: per_rep,
    })
}

/// One row of a finite-N versus asymptotic comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub tau_sim: f64,
    pub tau_ci: f64,
    pub tau_analytic: f64,
    /// `|τ̂ − τ| / τ`.
    pub gap: f64,
    pub p_loss_sim: f64,
    pub p_loss_ci: f64,
    pub p_loss_analytic: f64,
}

/// Runs the simulator at each server count in `n_grid` and pairs the
/// estimates with the analytic values of the cavity-queue approximation.
pub fn convergence_study(
    params: &PolicyParams,
    n_grid: &[usize],
    config: &SimConfig,
) -> Result<Vec<ConvergenceRow>> {
    if let Some(&n) = n_grid.iter().find(|&&n| n < params.d) {
        return Err(Error::InvalidConfig(format!(
            "server count {n} is below d = {}",
            params.d
        )));
    }
    let (_, analytic) = analyze(params)?;
    n_grid
        .iter()
        .map(|&n| {
            let mut cfg = config.clone();
            cfg.params = PolicyParams {
                n_servers: n,
                ..*params
            };
            let stats = run(&cfg)?;
            Ok(ConvergenceRow {
                n,
                tau_sim: stats.tau_hat,
                tau_ci: stats.tau_ci_halfwidth,
                tau_analytic: analytic.tau,
                gap: (stats.tau_hat - analytic.tau).abs() / analytic.tau,
                p_loss_sim: stats.p_loss_hat,
                p_loss_ci: stats.p_loss_ci_halfwidth,
                p_loss_analytic: analytic.p_loss,
            })
        })
        .collect()
}
