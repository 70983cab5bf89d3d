use proptest::prelude::*;

use gpground::shooting::solve_lambda;
use gpground::ShootConfig64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ground_states_satisfy_invariants(d in 5u32..=13, log_b in -1.0f64..=4.0) {
        let b = 10f64.powf(log_b);
        let gs = solve_lambda(d, b, &ShootConfig64::default()).unwrap();
        prop_assert!(gs.invariant_violations().is_empty(), "d = {}, b = {}: {:?}", d, b, gs.invariant_violations());
        prop_assert!(gs.lambda > f64::from(d) - 4.0 && gs.lambda < f64::from(d));
        prop_assert!(gs.functionals.pohozaev_residual < 1e-5);
        prop_assert!(gs.functionals.bound1_slack > 0.0);
        prop_assert!(gs.tail_c > 0.0);
    }

    #[test]
    fn lambda_decreases_for_small_amplitudes(d in 5u32..=13, log_b in -2.0f64..=-0.5) {
        let cfg = ShootConfig64::default();
        let b = 10f64.powf(log_b);
        let lo = solve_lambda(d, b, &cfg).unwrap().lambda;
        let hi = solve_lambda(d, 1.5 * b, &cfg).unwrap().lambda;
        prop_assert!(hi < lo);
    }
}
