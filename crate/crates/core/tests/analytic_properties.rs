use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use redundancy_core::analytic::{
    analyze, cross_check, f0_identical_thresholds, f0_no_loss, f0_no_loss_normalized, k_kernel,
    k_kernel_quadrature, mean_response_time, response_tail, tau_no_discard, ServiceLaw,
    WorkloadLaw,
};
use redundancy_core::quad::{integrate, integrate_pieces};
use redundancy_core::{PolicyParams, Threshold};

const INF: f64 = f64::INFINITY;

fn params(lambda: f64, d: usize, p: f64, t1: f64, t2: f64) -> PolicyParams {
    PolicyParams::new(lambda, 1.0, d, p, t1, t2).unwrap()
}

fn knots(law: &WorkloadLaw, upper: f64) -> Vec<f64> {
    let mut k = vec![0.0];
    for t in [law.params().t2, law.params().t1] {
        if let Some(t) = t.as_finite() {
            if t > 0.0 && t < upper && !k.contains(&t) {
                k.push(t);
            }
        }
    }
    k.push(upper);
    k
}

/// Twenty stable parameter sets drawn from a fixed seed, covering all three
/// threshold regimes.
fn random_params() -> Vec<PolicyParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::new();
    while out.len() < 20 {
        let d = rng.random_range(1..=5);
        let p = rng.random_range(0.0..=1.0);
        let lambda = rng.random_range(0.05..0.95);
        let t1 = rng.random_range(0.2..6.0);
        let t2 = rng.random_range(0.0..t1);
        let (t1, t2) = match out.len() % 3 {
            0 => (t1, t2),
            1 => (INF, t2),
            _ => (INF, INF),
        };
        if let Ok(pp) = PolicyParams::new(lambda, 1.0, d, p, t1, t2) {
            if pp.lambda_bar() < 0.95 || t1.is_finite() || t2.is_finite() {
                out.push(pp);
            }
        }
    }
    out
}

#[test]
fn mgf_matches_quadrature_of_law() {
    for pp in random_params() {
        let law = WorkloadLaw::new(&pp).unwrap();
        for theta in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let f = |w: f64| (-theta * w).exp() * law.density(w);
            let upper = 60.0 / theta.min(law.mgf_lower_bound().abs().max(0.05)) + 10.0;
            let q = integrate_pieces(&f, &knots(&law, upper), 1e-12).value;
            let numeric = law.f0() + q;
            let closed = law.mgf(theta).unwrap();
            assert!(
                (numeric - closed).abs() < 1e-8,
                "{pp:?} theta={theta}: {numeric} vs {closed}"
            );
        }
    }
}

#[test]
fn kernel_integral_identity() {
    let service = ServiceLaw::exponential(1.0);
    for pp in random_params() {
        let law = WorkloadLaw::new(&pp).unwrap();
        for t in [pp.t1, pp.t2] {
            let upper = t.as_finite().unwrap_or(0.0) + 400.0;
            let k = |x: f64| k_kernel(&law, &service, x, t);
            let lhs = integrate_pieces(&k, &knots(&law, upper), 1e-11).value;
            let w_upper = t.as_finite().unwrap_or(upper);
            let partial =
                integrate_pieces(&|w: f64| w * law.density(w), &knots(&law, w_upper), 1e-12);
            let rhs = law.cdf_at(t) / pp.mu + partial.value;
            assert!((lhs - rhs).abs() < 1e-8, "{pp:?} T={t}: {lhs} vs {rhs}");
            assert!((partial.value - law.partial_mean(t)).abs() < 1e-9);
        }
    }
}

#[test]
fn kernel_paths_agree() {
    let service = ServiceLaw::exponential(1.0);
    for pp in random_params().into_iter().take(8) {
        let law = WorkloadLaw::new(&pp).unwrap();
        for x in [0.0, 0.3, 1.0, 2.5, 7.0] {
            for t in [pp.t1, pp.t2] {
                let exact = k_kernel(&law, &service, x, t);
                let numeric = k_kernel_quadrature(&law, &service, x, t, 1e-13);
                assert!((exact - numeric).abs() < 1e-9, "{pp:?} x={x} T={t}");
            }
        }
    }
}

#[test]
fn solver_matches_closed_form_constants() {
    for lambda in [0.1, 0.3, 0.5, 0.8, 1.2, 2.0] {
        for d in [1, 2, 3, 5] {
            for p in [0.0, 0.4, 1.0] {
                for t in [0.0, 0.5, 1.0, 2.0, 5.0, 50.0] {
                    let pp = params(lambda, d, p, t, t);
                    let law = WorkloadLaw::new(&pp).unwrap();
                    let closed = f0_identical_thresholds(pp.lambda_bar(), pp.mu, t);
                    assert!(
                        (law.f0() - closed).abs() < 1e-9 * closed.max(1e-300),
                        "{pp:?}: {} vs {closed}",
                        law.f0()
                    );
                    if lambda < 1.0 {
                        let pp = params(lambda, d, p, INF, t);
                        let law = WorkloadLaw::new(&pp).unwrap();
                        let normalized = f0_no_loss_normalized(lambda, pp.lambda_bar(), 1.0, t);
                        assert!((law.f0() - normalized).abs() < 1e-9, "{pp:?}");
                        if (pp.lambda_bar() - 1.0).abs() > 1e-6 {
                            let explicit = f0_no_loss(lambda, pp.lambda_bar(), 1.0, t);
                            assert!((law.f0() - explicit).abs() < 1e-9, "{pp:?}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn large_threshold_approaches_no_discard() {
    for lambda in [0.05, 0.11, 0.2, 0.25] {
        let inf = params(lambda, 3, 1.0, INF, INF);
        let big = params(lambda, 3, 1.0, 60.0, 60.0);
        let exact = tau_no_discard(&inf).unwrap();
        let (_, m) = analyze(&big).unwrap();
        assert!(
            (m.tau - exact).abs() / exact < 1e-6,
            "{lambda}: {} vs {exact}",
            m.tau
        );
        let (_, general) = analyze(&inf).unwrap();
        assert!((general.tau - exact).abs() / exact < 1e-9);
    }
}

#[test]
fn monotone_in_threshold() {
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..=16 {
        let t = 0.25 * i as f64;
        let (_, m) = analyze(&params(0.3, 3, 1.0, t, t)).unwrap();
        if let Some((tau, pl)) = prev {
            assert!(m.tau >= tau - 1e-12, "tau decreased at T={t}");
            assert!(m.p_loss <= pl + 1e-15, "P_L increased at T={t}");
        }
        prev = Some((m.tau, m.p_loss));
    }
}

#[test]
fn response_tail_is_a_survival_function() {
    let service = ServiceLaw::exponential(1.0);
    for pp in random_params() {
        let law = WorkloadLaw::new(&pp).unwrap();
        let p_loss = redundancy_core::loss_probability(&law);
        let at_zero = response_tail(&law, &service, 0.0);
        assert!(at_zero <= 1.0 - p_loss + 1e-12, "{pp:?}");
        assert!((at_zero - (1.0 - p_loss)).abs() < 1e-9, "{pp:?}");
        let mut prev = at_zero;
        for i in 1..200 {
            let h = response_tail(&law, &service, 0.05 * i as f64);
            assert!(h <= prev + 1e-13, "{pp:?} at x={}", 0.05 * i as f64);
            prev = h;
        }
    }
}

#[test]
fn mm1_reduction() {
    for i in 1..=9 {
        let lambda = 0.1 * i as f64;
        let exact = 1.0 / (1.0 - lambda);
        for (d, t2) in [(1, INF), (3, INF), (3, 0.7)] {
            let pp = params(lambda, d, 0.0, INF, t2);
            let (_, m) = analyze(&pp).unwrap();
            assert!(
                (m.tau - exact).abs() < 1e-10,
                "{pp:?}: {} vs {exact}",
                m.tau
            );
            assert_eq!(m.p_loss, 0.0);
        }
    }
}

#[test]
fn general_path_is_free_of_closed_form_disagreement_except_known_branch() {
    // The only expected diagnostic is the no-loss k(x, ∞) branch below T2.
    for pp in random_params() {
        let law = WorkloadLaw::new(&pp).unwrap();
        for diag in cross_check(&law) {
            assert!(
                diag.quantity.contains("k(") && pp.t1.is_infinite() && pp.t2.is_finite(),
                "{pp:?}: {diag}"
            );
        }
    }
}

/// Independent oracle: simulate one queue fed by potential primary arrivals
/// (rate λ, threshold T1) and potential secondary arrivals (rate pλ(d−1),
/// threshold T2), and compare the empirical workload law with `F`.
#[test]
fn workload_law_matches_single_queue_monte_carlo() {
    let cases = [
        params(0.3, 3, 1.0, 5.0, 5.0),
        params(0.5, 3, 1.0, 1.0, 0.4),
        params(0.6, 2, 0.5, INF, 1.0),
        params(1.5, 2, 1.0, 2.0, 2.0),
    ];
    for pp in cases {
        let law = WorkloadLaw::new(&pp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let rate = pp.lambda_bar();
        let gap = Exp::new(rate).unwrap();
        let service = Exp::new(pp.mu).unwrap();
        let primary_share = pp.lambda / rate;
        let grid = [0.0, 0.5, 1.0, 2.0, 4.0];
        let mut below = [0u64; 5];
        let n = 2_000_000u64;
        let warmup = 50_000u64;
        let mut w: f64 = 0.0;
        for i in 0..n + warmup {
            w = (w - gap.sample(&mut rng)).max(0.0);
            if i >= warmup {
                for (c, &g) in below.iter_mut().zip(&grid) {
                    if w <= g {
                        *c += 1;
                    }
                }
            }
            let t = if rng.random::<f64>() < primary_share {
                pp.t1
            } else {
                pp.t2
            };
            if t.admits(w) {
                w += service.sample(&mut rng);
            }
        }
        for (c, &g) in below.iter().zip(&grid) {
            let emp = *c as f64 / n as f64;
            let f = law.cdf(g);
            assert!((emp - f).abs() < 5e-3, "{pp:?} F({g}): {emp} vs {f}");
        }
    }
}

#[test]
fn identical_threshold_cdf_value() {
    // π(1,5,5), λ = 0.3, d = 3: F(2) = F(0)(10 − 9e^{−0.2}).
    let law = WorkloadLaw::new(&params(0.3, 3, 1.0, 5.0, 5.0)).unwrap();
    let expected = law.f0() * (10.0 - 9.0 * (-0.2f64).exp());
    assert!((law.cdf(2.0) - expected).abs() < 1e-12);
    assert!((law.cdf(2.0) - 0.5172736).abs() < 1e-6, "{}", law.cdf(2.0));
}

#[test]
fn integrate_matches_tau_definition() {
    let service = ServiceLaw::exponential(1.0);
    let pp = params(0.4, 3, 0.7, 3.0, 1.0);
    let law = WorkloadLaw::new(&pp).unwrap();
    let m = mean_response_time(&law, &service).unwrap();
    let h = |x: f64| response_tail(&law, &service, x);
    let num = integrate(&h, 0.0, 1.0, 1e-12).value
        + integrate(&h, 1.0, 3.0, 1e-12).value
        + integrate(&h, 3.0, 80.0, 1e-12).value;
    assert!((num / (1.0 - m.p_loss) - m.tau).abs() < 1e-9);
    assert!(m.tau.is_finite() && Threshold::finite(3.0).admits(3.0));
}
