use inertial_core::lyapunov::{coefficients, limits};
use inertial_core::objectives::{builtin_corpus, ill_conditioned_quadratic, power};
use inertial_core::objectives::{check_gradient, check_lipschitz};
use inertial_core::rates::{fit_power_law, predict, Quantity};
use inertial_core::solver::{admissibility_bound, run, InertialParams, StopRule};
use proptest::prelude::*;

fn admissible() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.1f64..20.0, 0.01f64..0.99, 0.01f64..0.99, 0.1f64..100.0)
        .prop_map(|(alpha, beta, frac, l)| (alpha, beta, frac * admissibility_bound(beta, l), l))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficient_identities_hold(
        (alpha, beta, s, l) in admissible(),
        n in 1usize..1_000_000,
    ) {
        let p = InertialParams::new(alpha, beta, s).unwrap();
        let cs = coefficients(n, &p, l);
        let next = coefficients(n + 1, &p, l);
        prop_assert_eq!(cs.delta, cs.a_prev - cs.c_prev);
        let rebuilt = cs.b + cs.delta - cs.c;
        // rounding scale of a four-term sum
        let scale = cs.b.abs() + cs.a_prev.abs() + cs.c_prev.abs() + cs.c.abs();
        prop_assert!((cs.big_delta - rebuilt).abs() <= 4.0 * f64::EPSILON * scale);
        // C_n is the C_{n-1} formula one index later
        prop_assert_eq!(cs.c, next.c_prev);
    }

    #[test]
    fn limits_are_positive_when_admissible((alpha, beta, s, l) in admissible()) {
        let lim = limits(&InertialParams::new(alpha, beta, s).unwrap(), l);
        for v in [lim.a, lim.b, lim.c, lim.delta, lim.big_delta] {
            prop_assert!(v > 0.0, "{:?}", lim);
        }
    }

    #[test]
    fn runs_are_bitwise_deterministic(
        (alpha, beta, frac) in (0.5f64..10.0, 0.05f64..0.95, 0.05f64..0.95),
        x0 in proptest::collection::vec(-1.0f64..1.0, 10),
    ) {
        let obj = ill_conditioned_quadratic(10, 100.0).unwrap();
        let p = InertialParams::with_step_fraction(alpha, beta, frac, obj.lipschitz).unwrap();
        let stop = StopRule { max_iter: 500, ..StopRule::default() };
        let a = run(&obj, &p, &x0, &stop).unwrap();
        let b = run(&obj, &p, &x0, &stop).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn critical_point_is_a_fixed_point(
        (alpha, beta, frac) in (0.5f64..10.0, 0.05f64..0.95, 0.05f64..0.95),
    ) {
        let obj = ill_conditioned_quadratic(10, 100.0).unwrap();
        let p = InertialParams::with_step_fraction(alpha, beta, frac, obj.lipschitz).unwrap();
        let stop = StopRule { grad_tol: f64::NEG_INFINITY, max_iter: 50, ..StopRule::default() };
        let t = run(&obj, &p, &[0.0; 10], &stop).unwrap();
        for r in &t.records {
            prop_assert!(r.x.iter().all(|&v| v == 0.0));
            prop_assert_eq!(r.gap, 0.0);
        }
    }

    #[test]
    fn exact_power_law_is_recovered(
        exponent in -5.0f64..5.0,
        scale in 1e-3f64..1e3,
        start in 1.0f64..100.0,
    ) {
        let xs: Vec<f64> = (0..50).map(|k| start * 1.1f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| scale * x.powf(exponent)).collect();
        let (slope, intercept, r2) = fit_power_law(&xs, &ys).unwrap();
        prop_assert!((slope - exponent).abs() <= 1e-9);
        prop_assert!((intercept - scale.ln()).abs() <= 1e-8);
        prop_assert!(r2 > 1.0 - 1e-9);
    }

    #[test]
    fn predicted_exponents_depend_only_on_theta(theta in 0.51f64..0.99) {
        let pred = predict(theta, None).unwrap();
        prop_assert!((pred.exponent_for(Quantity::ValueGapY) - 1.0 / (2.0 * theta - 1.0)).abs() < 1e-12);
        prop_assert!(
            (pred.exponent_for(Quantity::IterateDist) - (1.0 - theta) / (2.0 * theta - 1.0)).abs() < 1e-12
        );
    }

    #[test]
    fn quartic_exponent_ratio(x in 1e-6f64..=0.1) {
        let obj = power(4, 1).unwrap();
        let ratio = |theta: f64, x: f64| obj.value(&[x]).abs().powf(theta) / obj.gradient(&[x])[0].abs();
        prop_assert!(ratio(0.75, x) <= 0.25 * (1.0 + 1e-12));
        // below the true exponent the ratio grows like x^-0.6
        prop_assert!(ratio(0.6, x / 10.0) > 3.9 * ratio(0.6, x));
    }
}

#[test]
fn corpus_gradients_match_finite_differences() {
    for obj in builtin_corpus() {
        let points = obj.reference_box.sample(100, 7);
        let check = check_gradient(&obj, &points).unwrap();
        assert!(check.passes(1e-6, 1e-6), "{}: {:?}", obj.id, check.worst_point);
    }
}

#[test]
fn corpus_lipschitz_constants_hold_on_sampled_pairs() {
    for obj in builtin_corpus() {
        let check = check_lipschitz(&obj, 10_000, 11, 1e-10);
        assert_eq!(check.violations, 0, "{}: ratio {}", obj.id, check.max_ratio);
    }
}
