use gpground::curve::{
    find_bn, fit_monotone, fit_snaking, log_grid, sign_changes, sweep_curve, CurvePoint, RootScan,
};
use gpground::models::exponents;
use gpground::shooting::{solve_lambda, solve_lambda_inf};
use gpground::ShootConfig64;

const RESOLUTION: f64 = 1e-10;

fn cfg() -> ShootConfig64 {
    ShootConfig64::default()
}

fn lambda_inf(d: u32) -> f64 {
    solve_lambda_inf(d, &cfg()).unwrap().lambda_inf
}

fn sweep(d: u32, lo: f64, hi: f64, per_decade: usize) -> Vec<CurvePoint<f64>> {
    let s = sweep_curve(d, &log_grid(lo, hi, per_decade).unwrap(), &cfg()).unwrap();
    assert!(s.failures.is_empty(), "{:?}", s.failures);
    s.points
}

#[test]
fn d5_curve_starts_near_d_then_oscillates_about_lambda_inf() {
    let li = lambda_inf(5);
    let pts = sweep(5, 0.1, 1e6, 20);
    assert!(pts.iter().all(|p| p.violations == 0));
    assert!(pts[0].lambda > 4.99 && pts[0].lambda < 5.0);
    assert!(pts.iter().any(|p| p.lambda < li));
    assert!(sign_changes(&pts, li, RESOLUTION) >= 6);
}

#[test]
fn d13_curve_decreases_monotonically() {
    let li = lambda_inf(13);
    let pts = sweep(13, 0.1, 1e4, 20);
    for w in pts.windows(2) {
        assert!(
            w[1].lambda <= w[0].lambda + RESOLUTION,
            "{:?}",
            (w[0].b, w[1].b)
        );
    }
    assert!((pts.last().unwrap().lambda - li).abs() < RESOLUTION);
}

#[test]
fn small_amplitude_limit_is_d() {
    for d in [5u32, 8, 13] {
        let gs = solve_lambda(d, 1e-3, &cfg()).unwrap();
        assert!((f64::from(d) - gs.lambda) < 1e-5, "d = {d}: {}", gs.lambda);
    }
}

#[test]
fn snaking_fit_is_tight_and_stable() {
    let li = lambda_inf(5);
    let pack = exponents::<f64>(5).unwrap();
    let pts = sweep(5, 100.0, 1e6, 25);
    let fit = fit_snaking(&pts, li, &pack, 100.0, RESOLUTION).unwrap();
    assert!(fit.rms_rel_residual < 0.05, "{fit:?}");
    let doubled = fit_snaking(&pts, li, &pack, 200.0, RESOLUTION).unwrap();
    assert!((doubled.a_inf / fit.a_inf - 1.0).abs() < 0.02);
    assert!(fit.delta_inf >= 0.0 && fit.delta_inf < std::f64::consts::TAU);
    assert!(fit_snaking(&pts, li, &exponents::<f64>(13).unwrap(), 100.0, RESOLUTION).is_err());
}

#[test]
fn fitted_zeros_predict_roots_and_sign_alternates() {
    let li = lambda_inf(5);
    let pack = exponents::<f64>(5).unwrap();
    let rs = find_bn(5, li, &pack, &RootScan::new(1.0, 1e5), &cfg()).unwrap();
    assert_eq!(rs.roots.len(), 7);
    assert!(rs.flagged.is_empty() && rs.failures.is_empty());
    let fit = fit_snaking(&rs.scan, li, &pack, 100.0, RESOLUTION).unwrap();
    let zeros = fit.zeros(&pack, 100.0, 1e5);
    let in_window: Vec<f64> = rs.roots.iter().copied().filter(|&b| b >= 100.0).collect();
    assert_eq!(zeros.len(), in_window.len());
    for (z, b) in zeros.iter().zip(&in_window) {
        assert!((z / b - 1.0).abs() < 0.05, "zero {z} vs root {b}");
    }
    // g keeps one sign between consecutive roots and flips across each.
    let sign_between = |lo: f64, hi: f64| {
        let b = (lo * hi).sqrt();
        solve_lambda(5, b, &cfg()).unwrap().lambda > li
    };
    let signs: Vec<bool> = rs
        .roots
        .windows(2)
        .map(|w| sign_between(w[0], w[1]))
        .collect();
    assert!(signs.windows(2).all(|s| s[0] != s[1]));
}

#[test]
fn roots_are_stable_under_tighter_integration() {
    let li = lambda_inf(5);
    let pack = exponents::<f64>(5).unwrap();
    let scan = RootScan::new(1.0, 200.0);
    let base = find_bn(5, li, &pack, &scan, &cfg()).unwrap();
    let mut tight = cfg();
    tight.control.rel_tol /= 2.0;
    tight.control.abs_tol /= 2.0;
    let li_tight = solve_lambda_inf(5, &tight).unwrap().lambda_inf;
    let again = find_bn(5, li_tight, &pack, &scan, &tight).unwrap();
    assert_eq!(base.roots.len(), 3);
    for (a, b) in base.roots.iter().zip(&again.roots) {
        assert!((a / b - 1.0).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn monotone_exponents_match_kappa_plus() {
    for (d, rel) in [(13u32, 0.1 / 4.0), (17, 0.03)] {
        let li = lambda_inf(d);
        let pack = exponents::<f64>(d).unwrap();
        let pts = sweep(d, 1.0, 1e4, 20);
        assert_eq!(sign_changes(&pts, li, RESOLUTION), 0);
        let fit = fit_monotone(&pts, li, &pack, 100.0, RESOLUTION).unwrap();
        assert!(
            (fit.fitted_exponent / pack.kappa_plus - 1.0).abs() < rel,
            "d = {d}: {} vs {}",
            fit.fitted_exponent,
            pack.kappa_plus
        );
        assert!(fit.b_inf > 0.0);
    }
}

#[test]
fn sweep_output_does_not_depend_on_thread_count() {
    let grid = log_grid(0.5, 5e3, 6).unwrap();
    let run = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap();
        pool.install(|| sweep_curve(7, &grid, &cfg()).unwrap())
    };
    assert_eq!(run(1), run(3));
}
