//! Algebraic identities of the pairwise estimators, checked on random samples.
//!
//! Estimators run on the streaming kernel unless stated, so that closed forms
//! inside the library do not make the checks circular.

use ewpo_core::kernel::{Kernel, Method};
use ewpo_core::pairs::{enumerate_pairs, PairKind, PairScheme};
use ewpo_core::{estimate_slope, pairwise_slope, pair_weight, EstimatorConfig, Sample, WeightKind};
use proptest::prelude::*;

fn streaming(scheme: PairScheme, weight: WeightKind, method: Method) -> EstimatorConfig {
    EstimatorConfig::new(scheme, weight, method).with_kernel(Kernel::Streaming)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Independent least-squares slope with intercept (two-pass centered moments).
fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn distinct(x: &[f64]) -> bool {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    s.windows(2).all(|w| w[0] != w[1])
}

prop_compose! {
    fn sample_strategy(min: usize, max: usize)(n in min..=max)
        (x in prop::collection::vec(-50.0f64..50.0, n), y in prop::collection::vec(-50.0f64..50.0, n))
        -> (Vec<f64>, Vec<f64>) {
        (x, y)
    }
}

prop_compose! {
    /// Integer-valued x from a small range, so ties are common.
    fn tied_strategy()(n in 3usize..60)
        (x in prop::collection::vec(-4i32..5, n), y in prop::collection::vec(-10.0f64..10.0, n))
        -> (Vec<f64>, Vec<f64>) {
        (x.into_iter().map(f64::from).collect(), y)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn telescoping(xy in sample_strategy(2, 120), sorted in any::<bool>()) {
        let (x, y) = xy;
        prop_assume!(distinct(&x));
        let s = Sample::new(x.clone(), y.clone()).unwrap();
        let cfg = streaming(PairScheme::new(PairKind::Adjacent, sorted), WeightKind::DeltaX, Method::WeightedAverage);
        let b = estimate_slope(&s, &cfg).unwrap();
        let order = ewpo_core::pairs::arrangement(&x, sorted);
        let (first, last) = (order[0], order[x.len() - 1]);
        let expected = (y[last] - y[first]) / (x[last] - x[first]);
        prop_assert!(rel_close(b, expected, 1e-12), "{} vs {}", b, expected);
    }

    #[test]
    fn sorted_signed_equals_absolute(xy in sample_strategy(2, 120), full in any::<bool>(), loss in any::<bool>()) {
        let (x, y) = xy;
        let s = Sample::new(x, y).unwrap();
        let kind = if full { PairKind::FullPairwise } else { PairKind::Adjacent };
        let method = if loss { Method::QuadraticLoss } else { Method::WeightedAverage };
        let scheme = PairScheme::new(kind, true);
        let a = estimate_slope(&s, &streaming(scheme, WeightKind::DeltaX, method)).unwrap();
        let b = estimate_slope(&s, &streaming(scheme, WeightKind::AbsDeltaX, method)).unwrap();
        prop_assert!(rel_close(a, b, 1e-12));
    }

    #[test]
    fn full_pairwise_loss_is_ols(xy in sample_strategy(3, 200), sorted in any::<bool>()) {
        let (x, y) = xy;
        let s = Sample::new(x.clone(), y.clone()).unwrap();
        let ols = ols_slope(&x, &y);
        for weight in [WeightKind::DeltaX, WeightKind::AbsDeltaX] {
            let scheme = PairScheme::new(PairKind::FullPairwise, sorted);
            let streamed = estimate_slope(&s, &streaming(scheme, weight, Method::QuadraticLoss)).unwrap();
            prop_assert!(rel_close(streamed, ols, 1e-10), "{} vs {}", streamed, ols);
            let closed = estimate_slope(&s, &EstimatorConfig::new(scheme, weight, Method::QuadraticLoss)).unwrap();
            prop_assert!(rel_close(closed, ols, 1e-10));
        }
    }

    #[test]
    fn adjacent_loss_is_first_difference_ols(xy in sample_strategy(2, 150), sorted in any::<bool>()) {
        let (x, y) = xy;
        prop_assume!(distinct(&x));
        let s = Sample::new(x.clone(), y.clone()).unwrap();
        let order = ewpo_core::pairs::arrangement(&x, sorted);
        let dx: Vec<f64> = order.windows(2).map(|w| x[w[1]] - x[w[0]]).collect();
        let dy: Vec<f64> = order.windows(2).map(|w| y[w[1]] - y[w[0]]).collect();
        let fd = dx.iter().zip(&dy).map(|(a, b)| a * b).sum::<f64>() / dx.iter().map(|a| a * a).sum::<f64>();
        for weight in [WeightKind::DeltaX, WeightKind::AbsDeltaX] {
            let b = estimate_slope(&s, &streaming(PairScheme::new(PairKind::Adjacent, sorted), weight, Method::QuadraticLoss)).unwrap();
            prop_assert!(rel_close(b, fd, 1e-10), "{} vs {}", b, fd);
        }
    }

    #[test]
    fn sqrt_loss_is_abs_average(xy in sample_strategy(2, 150), sorted in any::<bool>()) {
        let (x, y) = xy;
        let s = Sample::new(x, y).unwrap();
        let scheme = PairScheme::new(PairKind::FullPairwise, sorted);
        let a = estimate_slope(&s, &streaming(scheme, WeightKind::SqrtAbsDeltaX, Method::QuadraticLoss)).unwrap();
        let b = estimate_slope(&s, &streaming(scheme, WeightKind::AbsDeltaX, Method::WeightedAverage)).unwrap();
        prop_assert!(rel_close(a, b, 1e-12), "{} vs {}", a, b);
    }

    #[test]
    fn loss_ignores_weight_sign(xy in sample_strategy(2, 100), full in any::<bool>(), sorted in any::<bool>()) {
        let (x, y) = xy;
        let s = Sample::new(x, y).unwrap();
        let kind = if full { PairKind::FullPairwise } else { PairKind::Adjacent };
        for kernel in [Kernel::Auto, Kernel::Streaming] {
            let scheme = PairScheme::new(kind, sorted);
            let a = estimate_slope(&s, &EstimatorConfig::new(scheme, WeightKind::DeltaX, Method::QuadraticLoss).with_kernel(kernel));
            let b = estimate_slope(&s, &EstimatorConfig::new(scheme, WeightKind::AbsDeltaX, Method::QuadraticLoss).with_kernel(kernel));
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
            }
        }
    }

    #[test]
    fn affine_equivariance_in_y(xy in sample_strategy(2, 80), a in -10.0f64..10.0, b in -5.0f64..5.0,
                                full in any::<bool>(), sorted in any::<bool>()) {
        let (x, y) = xy;
        prop_assume!(b.abs() > 1e-3);
        let s = Sample::new(x.clone(), y.clone()).unwrap();
        let t = Sample::new(x, y.iter().map(|v| a + b * v).collect()).unwrap();
        let kind = if full { PairKind::FullPairwise } else { PairKind::Adjacent };
        for weight in [WeightKind::DeltaX, WeightKind::AbsDeltaX] {
            let cfg = streaming(PairScheme::new(kind, sorted), weight, Method::WeightedAverage);
            if let (Ok(b0), Ok(b1)) = (estimate_slope(&s, &cfg), estimate_slope(&t, &cfg)) {
                prop_assert!((b1 - b * b0).abs() <= 1e-9 * (1.0 + b0.abs()) * b.abs().max(1.0), "{} vs {}", b1, b * b0);
            }
        }
    }

    #[test]
    fn sort_direction_does_not_matter(xy in sample_strategy(2, 100), full in any::<bool>()) {
        let (x, y) = xy;
        let s = Sample::new(x.clone(), y.clone()).unwrap();
        let mut order = ewpo_core::pairs::arrangement(&x, true);
        order.reverse();
        let desc = s.select(&order).unwrap();
        let kind = if full { PairKind::FullPairwise } else { PairKind::Adjacent };
        for weight in WeightKind::ALL {
            for method in [Method::WeightedAverage, Method::QuadraticLoss] {
                let asc = estimate_slope(&s, &streaming(PairScheme::new(kind, true), weight, method));
                let dsc = estimate_slope(&desc, &streaming(PairScheme::new(kind, false), weight, method));
                match (asc, dsc) {
                    (Ok(a), Ok(d)) => prop_assert!(rel_close(a, d, 1e-11), "{:?} {}: {} vs {}", weight, method.name(), a, d),
                    (a, d) => prop_assert_eq!(a.is_err(), d.is_err()),
                }
            }
        }
    }

    #[test]
    fn pair_order_does_not_matter(xy in sample_strategy(2, 60), sorted in any::<bool>()) {
        // The reverse of the canonical order is the row order of the textbook difference matrix.
        let (x, y) = xy;
        let s = Sample::new(x.clone(), y).unwrap();
        let scheme = PairScheme::new(PairKind::FullPairwise, sorted);
        let pairs = enumerate_pairs(scheme, &x).unwrap().pairs;
        let (mut num, mut den) = (0.0, 0.0);
        for p in pairs.iter().rev() {
            if let Ok(b) = pairwise_slope(&s, *p) {
                let w = pair_weight(WeightKind::AbsDeltaX, &s, *p);
                num += w * b;
                den += w;
            }
        }
        let est = estimate_slope(&s, &streaming(scheme, WeightKind::AbsDeltaX, Method::WeightedAverage)).unwrap();
        prop_assert!(rel_close(est, num / den, 1e-11));
    }

    #[test]
    fn closed_forms_match_streaming_with_ties(xy in tied_strategy(), sorted in any::<bool>()) {
        let (x, y) = xy;
        prop_assume!(x.iter().any(|v| *v != x[0]));
        let s = Sample::new(x, y).unwrap();
        let scheme = PairScheme::new(PairKind::FullPairwise, sorted);
        for weight in WeightKind::ALL {
            for method in [Method::WeightedAverage, Method::QuadraticLoss] {
                let auto = ewpo_core::estimators::estimate_slope_detailed(&s, &EstimatorConfig::new(scheme, weight, method));
                let slow = ewpo_core::estimators::estimate_slope_detailed(&s, &streaming(scheme, weight, method));
                match (auto, slow) {
                    (Ok(a), Ok(b)) => {
                        prop_assert!((a.beta1_hat - b.beta1_hat).abs() <= 1e-10 * (1.0 + b.beta1_hat.abs()));
                        prop_assert_eq!(a.dropped_pairs, b.dropped_pairs);
                        prop_assert_eq!(a.used_pairs, b.used_pairs);
                    }
                    (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
                }
            }
        }
    }

    #[test]
    fn weights_signs(xy in sample_strategy(2, 40)) {
        let (x, y) = xy;
        let s = Sample::new(x.clone(), y).unwrap();
        for p in enumerate_pairs(PairScheme::full(), &x).unwrap().pairs {
            prop_assert!(pair_weight(WeightKind::AbsDeltaX, &s, p) >= 0.0);
            prop_assert!(pair_weight(WeightKind::Euclidean, &s, p) >= 0.0);
            prop_assert!(pair_weight(WeightKind::SqrtAbsDeltaX, &s, p) >= 0.0);
        }
    }
}

#[test]
fn weight_example_orientation() {
    let s = Sample::new(vec![1.0, 0.0, 3.0], vec![0.0, 0.0, 0.0]).unwrap();
    let p = ewpo_core::PairIndex::new(1, 0);
    assert_eq!(pair_weight(WeightKind::DeltaX, &s, p), -1.0);
    assert_eq!(pair_weight(WeightKind::AbsDeltaX, &s, p), 1.0);
    let e = Sample::new(vec![0.0, 3.0], vec![0.0, 4.0]).unwrap();
    assert_eq!(pair_weight(WeightKind::Euclidean, &e, p), 5.0);
}
