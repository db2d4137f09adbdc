use ewpo_core::inference::{
    critical_values, jackknife_ci, simulate_functional_draws, simulate_prop1_ratio, simulate_prop2_null,
    BrownianSimConfig, JackknifeConfig,
};
use ewpo_core::montecarlo::{generate, DgpSpec, UDist, XDist};
use ewpo_core::stats::{quantile_sorted, sorted_copy, Moments};
use ewpo_core::EstimatorConfig;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = DgpSpec {
        beta0: 1.0,
        beta1: 0.5,
        x_dist: XDist::Normal { mean: 0.0, variance: 5.0 },
        u_dist: UDist::standard_normal(),
        rho: 0.0,
        n: 200,
        seed: 3,
    };
    let s = generate(&spec).unwrap();
    let jk = JackknifeConfig { d: 100, reps: 500, alpha: 0.05, seed: 9 };
    let a = in_pool(1, || jackknife_ci(&s, &EstimatorConfig::default(), &jk).unwrap());
    let b = in_pool(3, || jackknife_ci(&s, &EstimatorConfig::default(), &jk).unwrap());
    assert_eq!(a, b);
    let cfg = BrownianSimConfig::new(300, 2000, 5);
    assert_eq!(in_pool(1, || simulate_prop2_null(&cfg).unwrap()), in_pool(4, || simulate_prop2_null(&cfg).unwrap()));
}

#[test]
fn jackknife_interval_brackets_estimate() {
    let spec = DgpSpec {
        beta0: 1.0,
        beta1: 0.5,
        x_dist: XDist::Uniform { a: -10.0, b: 10.0 },
        u_dist: UDist::standard_normal(),
        rho: 0.0,
        n: 300,
        seed: 4,
    };
    let s = generate(&spec).unwrap();
    let jk = JackknifeConfig::for_n(300, 1);
    assert_eq!(jk.d, 150);
    let ci = jackknife_ci(&s, &EstimatorConfig::default(), &JackknifeConfig { reps: 1000, ..jk }).unwrap();
    assert_eq!(ci.replicates.len(), 1000);
    assert!(ci.lower < ci.estimate && ci.estimate < ci.upper);
    let wider = jackknife_ci(&s, &EstimatorConfig::default(), &JackknifeConfig { reps: 1000, alpha: 0.01, ..jk }).unwrap();
    assert!(wider.lower <= ci.lower && wider.upper >= ci.upper);
}

#[test]
fn brownian_moments() {
    let draws = simulate_functional_draws(&BrownianSimConfig::new(1000, 40_000, 21)).unwrap();
    let col = |f: fn(&ewpo_core::inference::BrownianFunctionals) -> f64| -> Vec<f64> { draws.iter().map(f).collect() };
    let b1 = col(|f| f.b1);
    let ib = col(|f| f.int_b);
    let denom = col(|f| f.b1 - 2.0 * f.int_b);
    assert!((Moments::of(&b1).unwrap().variance - 1.0).abs() < 0.05);
    assert!((Moments::of(&ib).unwrap().variance - 1.0 / 3.0).abs() < 0.05 / 3.0);
    let n = b1.len() as f64;
    let cov = b1.iter().zip(&ib).map(|(a, b)| a * b).sum::<f64>() / n
        - (b1.iter().sum::<f64>() / n) * (ib.iter().sum::<f64>() / n);
    assert!((cov - 0.5).abs() < 0.025);
    assert!((Moments::of(&denom).unwrap().variance - 1.0 / 3.0).abs() < 0.05 / 3.0);
}

#[test]
fn ratio_is_cauchy_like() {
    let draws = sorted_copy(&simulate_prop1_ratio(&BrownianSimConfig::new(200, 40_000, 8)).unwrap());
    assert!(quantile_sorted(&draws, 0.5).abs() < 0.04);
    assert!((quantile_sorted(&draws, 0.25) + 1.0).abs() < 0.08);
    assert!((quantile_sorted(&draws, 0.75) - 1.0).abs() < 0.08);
}

#[test]
fn prop2_intervals_nest() {
    let draws = simulate_prop2_null(&BrownianSimConfig::new(200, 5000, 2)).unwrap();
    let t = critical_values(&draws, &[0.01, 0.05, 0.10]).unwrap();
    for w in t.rows.windows(2) {
        assert!(w[0].lower <= w[1].lower && w[0].upper >= w[1].upper);
    }
    assert!(t.rows.iter().all(|r| r.lower < 0.0 && r.upper > 0.0));
}
