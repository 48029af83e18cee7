use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use redundancy_core::analytic::analyze;
use redundancy_core::simulate::{ks_statistic, JobOutcome, ServerPool};
use redundancy_core::{run, PolicyParams, SimConfig, Threshold, WorkloadLaw};

const INF: f64 = f64::INFINITY;

struct Arrival {
    gap: f64,
    servers: Vec<usize>,
    services: Vec<f64>,
}

fn trace(n_servers: usize, d: usize, len: usize, seed: u64) -> Vec<Arrival> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = Exp::new(n_servers as f64 * 0.7).unwrap();
    let service = Exp::new(1.0).unwrap();
    (0..len)
        .map(|_| {
            let copies = if rng.random::<bool>() { d } else { 1 };
            let servers = index::sample(&mut rng, n_servers, copies).into_vec();
            Arrival {
                gap: gap.sample(&mut rng),
                services: (0..copies).map(|_| service.sample(&mut rng)).collect(),
                servers,
            }
        })
        .collect()
}

/// Reference that drains every queue in fixed small time steps between
/// arrivals rather than only on contact.
fn eager(trace: &[Arrival], n: usize, t1: f64, t2: f64) -> Vec<Option<f64>> {
    const STEPS: usize = 64;
    let mut w = vec![0.0f64; n];
    trace
        .iter()
        .map(|a| {
            let dt = a.gap / STEPS as f64;
            for _ in 0..STEPS {
                for x in w.iter_mut() {
                    *x = (*x - dt).max(0.0);
                }
            }
            let seen: Vec<f64> = a.servers.iter().map(|&j| w[j]).collect();
            let mut best: Option<f64> = None;
            let mut next_service = a.services.iter();
            for (i, (&j, &wj)) in a.servers.iter().zip(&seen).enumerate() {
                let t = if i == 0 { t1 } else { t2 };
                if wj <= t {
                    let x = *next_service.next().unwrap();
                    w[j] = wj + x;
                    best = Some(best.map_or(wj + x, |b: f64| b.min(wj + x)));
                }
            }
            best
        })
        .collect()
}

#[test]
fn lazy_decay_matches_eager_reference() {
    let n = 3;
    let (t1, t2) = (2.0, 0.5);
    let arrivals = trace(n, 2, 1000, 5);
    let reference = eager(&arrivals, n, t1, t2);
    let mut pool = ServerPool::new(n);
    let mut now = 0.0;
    let mut admitted = 0;
    for (a, expected) in arrivals.iter().zip(&reference) {
        now += a.gap;
        let mut services = a.services.iter().copied();
        let got = pool.dispatch(
            now,
            a.servers[0],
            &a.servers[1..],
            Threshold::finite(t1),
            Threshold::finite(t2),
            || services.next().unwrap(),
        );
        match (got, expected) {
            (JobOutcome::Served(r), Some(e)) => {
                admitted += 1;
                assert!((r - e).abs() < 1e-9, "{r} vs {e}");
            }
            (JobOutcome::Lost, None) => {}
            other => panic!("outcomes differ: {other:?}"),
        }
        for j in 0..n {
            assert!(pool.workload_at(j, now) >= 0.0);
        }
    }
    assert!(admitted > 500 && admitted < 1000);
}

#[test]
fn random_routing_workload_is_mm1() {
    let lambda = 0.5;
    let params = PolicyParams::new(lambda, 1.0, 1, 0.0, INF, INF)
        .unwrap()
        .with_servers(1)
        .unwrap();
    let mut config = SimConfig::new(params, 11_111_112, 1, 17);
    config.settings.sample_stride = 100;
    config.settings.reservoir_capacity = 100_000;
    let stats = run(&config).unwrap();
    let samples = &stats.workload_samples;
    assert_eq!(samples.len(), 100_000);
    let law = WorkloadLaw::new(&params).unwrap();
    assert!((law.f0() - (1.0 - lambda)).abs() < 1e-12);
    let d = ks_statistic(samples, |w| law.cdf(w));
    let critical = 1.628 / (samples.len() as f64).sqrt();
    assert!(d < critical, "KS {d} >= {critical}");
    assert!((stats.tau_hat - 2.0).abs() < 0.05, "{}", stats.tau_hat);
}

#[test]
fn identical_seed_gives_identical_stats() {
    let params = PolicyParams::new(0.4, 1.0, 3, 0.6, 2.0, 1.0)
        .unwrap()
        .with_servers(12)
        .unwrap();
    let mut config = SimConfig::new(params, 30_000, 6, 123);
    config.settings.tail_points = vec![0.5, 1.0, 3.0];
    let a = run(&config).unwrap();
    let b = run(&config).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    assert_eq!(a.tau_hat.to_bits(), b.tau_hat.to_bits());
}

#[test]
fn accounting_balances() {
    for (t1, t2) in [(0.5, 0.2), (INF, 0.0), (1.0, 1.0)] {
        let params = PolicyParams::new(0.9, 1.0, 2, 0.5, t1, t2)
            .unwrap()
            .with_servers(7)
            .unwrap();
        let stats = run(&SimConfig::new(params, 10_000, 3, 4)).unwrap();
        assert_eq!(stats.n_admitted + stats.n_lost, stats.n_post_warmup);
        let per_rep: u64 = stats
            .replications
            .iter()
            .map(|r| r.n_admitted + r.n_lost)
            .sum();
        assert_eq!(per_rep, stats.n_post_warmup);
        assert!((0.0..=1.0).contains(&stats.p_loss_hat));
    }
}

#[test]
fn loss_probability_matches_analysis_at_scale() {
    // Heavier loss carries an O(1/N) finite-size bias, so it needs more servers.
    for (lambda, t, n, arrivals) in [(0.16, 5.0, 100, 100_000), (0.3, 1.0, 3000, 400_000)] {
        let params = PolicyParams::new(lambda, 1.0, 3, 1.0, t, t)
            .unwrap()
            .with_servers(n)
            .unwrap();
        let (_, m) = analyze(&params).unwrap();
        let stats = run(&SimConfig::new(params, arrivals, 20, 31)).unwrap();
        let gap = (stats.p_loss_hat - m.p_loss).abs();
        assert!(
            gap <= 3.0 * stats.p_loss_std_error,
            "λ={lambda} T={t}: {} ± {} vs {}",
            stats.p_loss_hat,
            stats.p_loss_std_error,
            m.p_loss
        );
    }
}

#[test]
fn response_tail_estimates_are_consistent() {
    let params = PolicyParams::new(0.3, 1.0, 2, 1.0, INF, INF)
        .unwrap()
        .with_servers(50)
        .unwrap();
    let mut config = SimConfig::new(params, 50_000, 8, 2);
    config.settings.tail_points = vec![0.0, 0.5, 2.0];
    let stats = run(&config).unwrap();
    let est: Vec<f64> = stats.response_tail.iter().map(|t| t.estimate).collect();
    assert_eq!(est[0], 1.0);
    assert!(est[1] > est[2] && est[2] > 0.0);
}

#[test]
fn loss_bias_shrinks_with_servers() {
    let at = |n: usize| {
        let params = PolicyParams::new(0.3, 1.0, 3, 1.0, 1.0, 1.0)
            .unwrap()
            .with_servers(n)
            .unwrap();
        run(&SimConfig::new(params, 100_000, 10, 8))
            .unwrap()
            .p_loss_hat
    };
    let params = PolicyParams::new(0.3, 1.0, 3, 1.0, 1.0, 1.0).unwrap();
    let (_, m) = analyze(&params).unwrap();
    let gaps: Vec<f64> = [10, 30, 300]
        .iter()
        .map(|&n| (at(n) - m.p_loss).abs())
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}
