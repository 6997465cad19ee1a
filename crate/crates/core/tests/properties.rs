use proptest::prelude::*;

use oppmac::model::{sample_deployment, Duplex, SystemParams};
use oppmac::opportunity::{empty_ball_radius, opportunistic_probability};
use oppmac::optimizer::{solve_optimal_p, RhsVariant};
use oppmac::schemes::{build_scheme, AccessScheme, SchemeConfig, SchemeContext, DEFAULT_SCHEMES};
use oppmac::simulator::{replicate, run_observed, ReplicationSetup, SimulationControls, SlotOutcome};

fn params() -> impl Strategy<Value = SystemParams> {
    (-4.0f64..-1.0, prop_oneof![Just(4.0), 2.5f64..6.0], 0.5f64..10.0, 1.0f64..4.0, -12.0f64..-2.0).prop_map(
        |(log_lambda, alpha, theta, d, log_beta)| {
            SystemParams::new(10f64.powf(log_lambda), alpha, theta, d, 10f64.powf(log_beta), Duplex::Full).unwrap()
        },
    )
}

fn interference() -> impl Strategy<Value = f64> {
    (-6.0f64..2.0).prop_map(|e| 10f64.powf(e))
}

/// `f(x) >= f(x * up)` up to rounding.
fn non_increasing(a: f64, b: f64) -> bool {
    b <= a + 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn radius_shrinks_with_interference_and_grows_with_density(p in params(), i in interference(), up in 1.01f64..3.0) {
        let r = empty_ball_radius(i, &p).unwrap();
        prop_assert!(empty_ball_radius(i * up, &p).unwrap() < r);
        prop_assert!(empty_ball_radius(i, &p.with_lambda(p.lambda * up)).unwrap() > r);
    }

    #[test]
    fn op_is_bounded_and_non_increasing(p in params(), i in interference(), up in 1.01f64..3.0, fd in any::<bool>()) {
        let op = |p: &SystemParams, i: f64| opportunistic_probability(i, p, fd).unwrap();
        let base = op(&p, i);
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(non_increasing(base, op(&p, i * up)));
        prop_assert!(non_increasing(base, op(&p.with_theta(p.theta * up), i)));
        prop_assert!(non_increasing(base, op(&p.with_d(p.d * up), i)));
        prop_assert!(non_increasing(base, op(&p.with_lambda(p.lambda * up), i)));
        prop_assert!(non_increasing(base, op(&p.with_beta((p.beta * up).min(1.0)), i)));
    }

    #[test]
    fn optimal_probability_falls_with_interference(p in params(), i in interference(), up in 1.01f64..3.0) {
        let variant = if p.alpha == 4.0 { RhsVariant::Arccot } else { RhsVariant::Quadrature };
        let solve = |p: &SystemParams, i: f64| solve_optimal_p(i, p, variant, 1e-12).unwrap();
        let base = solve(&p, i);
        prop_assert!(base.p_star > 0.0 && base.p_star <= 1.0);
        prop_assert!(base.clamped || base.residual <= 1e-12);
        prop_assert!(solve(&p, i * up).p_star <= base.p_star + 1e-9);
        prop_assert!(solve(&p.with_theta(p.theta * up), i).p_star <= base.p_star + 1e-9);
        prop_assert!(solve(&p.with_beta(p.beta / up), i).p_star >= base.p_star - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulated_outcomes_are_consistent(seed in any::<u64>(), which in 0usize..4, half in any::<bool>()) {
        let duplex = if half { Duplex::Half } else { Duplex::Full };
        let p = SystemParams::new(0.004, 4.0, 2.0, 3.0, 1e-11, duplex).unwrap();
        let dep = sample_deployment(&p, 80.0, seed).unwrap();
        let ctx = SchemeContext::new(p);
        let scheme = build_scheme(DEFAULT_SCHEMES[which], &SchemeConfig::default()).unwrap();
        let controls = SimulationControls { slots: 12, warmup: 2, ..Default::default() };
        let mut attempts = vec![0u64; dep.len()];
        let mut observe = |_slot: u64, outcomes: &[SlotOutcome]| {
            for (k, o) in outcomes.iter().enumerate() {
                assert!(!o.success || o.attempted);
                assert!((0.0..=1.0).contains(&o.p_used));
                assert!(o.measured_interference >= 0.0);
                if o.attempted {
                    attempts[k] += 1;
                }
            }
        };
        let summary = run_observed(&dep, scheme.as_ref(), &ctx, &controls, seed, Some(&mut observe)).unwrap();
        for (k, &t) in summary.link_throughput.iter().enumerate() {
            prop_assert!((0.0..=1.0).contains(&t));
            if !summary.eligible[k] {
                prop_assert_eq!(attempts[k], 0);
                prop_assert_eq!(t, 0.0);
            }
        }
    }
}

#[test]
fn throughput_is_insensitive_to_window_size() {
    let p = SystemParams::new(0.002, 4.0, 2.0, 3.0, 1e-11, Duplex::Full).unwrap();
    let schemes: Vec<Box<dyn AccessScheme>> =
        ["max-tx", "random-tx"].iter().map(|s| build_scheme(s, &SchemeConfig::default()).unwrap()).collect();
    let controls = SimulationControls { slots: 60, warmup: 10, ..Default::default() };
    let run = |side: f64| {
        let setup = ReplicationSetup::new(SchemeContext::new(p), controls, side);
        replicate(&setup, &schemes, 12, 4).unwrap()
    };
    let small = run(160.0);
    let large = run(320.0);
    for (a, b) in small.iter().zip(&large) {
        let (a_lo, a_hi) = a.mean_interval();
        let (b_lo, b_hi) = b.mean_interval();
        assert!(a_lo <= b_hi && b_lo <= a_hi, "{}: [{a_lo}, {a_hi}] vs [{b_lo}, {b_hi}]", a.scheme);
    }
}
