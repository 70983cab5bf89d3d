//! Sweeps of `λ(b)`, asymptotic fits of `λ(b) - λ∞`, the roots `b_n`, and
//! the rate at which `Ψ_b` approaches `Θ`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::ExponentPack;
use crate::scalar::{from_usize, lit, to_f64, Real};
use crate::shooting::{compute_psi_b, solve_lambda_warm, solve_theta, GroundState, ShootConfig};

/// One solved point of the solution curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint<T> {
    pub b: T,
    pub lambda: T,
    pub bracket_width: T,
    pub tail_c: T,
    pub mass: T,
    pub energy: T,
    pub pohozaev_residual: T,
    /// Number of violated ground-state invariants.
    pub violations: usize,
}

impl<T: Real> CurvePoint<T> {
    fn from_state(gs: &GroundState<T>) -> Self {
        Self {
            b: gs.b,
            lambda: gs.lambda,
            bracket_width: gs.eigen.bracket_width,
            tail_c: gs.tail_c,
            mass: gs.functionals.mass,
            energy: gs.functionals.energy,
            pohozaev_residual: gs.functionals.pohozaev_residual,
            violations: gs.invariant_violations().len(),
        }
    }
}

/// Result of a sweep: solved points in grid order and per-point failures.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep<T> {
    pub d: u32,
    pub points: Vec<CurvePoint<T>>,
    pub failures: Vec<(T, String)>,
}

type PointResult<T> = std::result::Result<CurvePoint<T>, (T, String)>;

/// Points per chunk of consecutive amplitudes solved with warm starts.
const CHUNK: usize = 16;

/// Solves `λ(b)` on every grid point in parallel.
///
/// Consecutive points within a chunk reuse the previous `λ` as a bracket
/// guess; the bisection result does not depend on the guess, so the output
/// is the same for any thread count.
pub fn sweep_curve<T: Real>(d: u32, grid: &[T], cfg: &ShootConfig<T>) -> Result<Sweep<T>> {
    cfg.validate()?;
    if grid.iter().any(|b| !(*b > T::zero()) || !b.is_finite()) {
        return Err(Error::Parameter(
            "sweep amplitudes must be positive and finite".into(),
        ));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter(
            "sweep grid must be strictly increasing".into(),
        ));
    }
    let chunks: Vec<Vec<PointResult<T>>> = grid
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut prev: Vec<T> = Vec::new();
            chunk
                .iter()
                .map(|&b| {
                    let guess = warm_guess(&prev);
                    match solve_lambda_warm(d, b, cfg, guess) {
                        Ok(gs) => {
                            prev.push(gs.lambda);
                            Ok(CurvePoint::from_state(&gs))
                        }
                        Err(e) => Err((b, e.to_string())),
                    }
                })
                .collect()
        })
        .collect();
    let mut points = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for r in chunks.into_iter().flatten() {
        match r {
            Ok(p) => points.push(p),
            Err(f) => failures.push(f),
        }
    }
    Ok(Sweep {
        d,
        points,
        failures,
    })
}

/// `λ_prev ± 10 |Δλ|` from the last two solved points.
fn warm_guess<T: Real>(prev: &[T]) -> Option<(T, T)> {
    match prev {
        [.., a, b] => {
            let w = ((*b - *a).abs() * lit(10.0)).max(lit(1e-9));
            Some((*b - w, *b + w))
        }
        _ => None,
    }
}

/// Log-spaced grid on `[b_min, b_max]` with `per_decade` points per decade.
pub fn log_grid<T: Real>(b_min: T, b_max: T, per_decade: usize) -> Result<Vec<T>> {
    if !(b_min > T::zero()) || !(b_max > b_min) || per_decade == 0 {
        return Err(Error::Parameter("log grid needs 0 < b_min < b_max".into()));
    }
    let (l0, l1) = (b_min.log10(), b_max.log10());
    let n = ((l1 - l0) * from_usize(per_decade))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    Ok((0..=n)
        .map(|i| {
            T::from_f64(10.0)
                .unwrap()
                .powf(l0 + (l1 - l0) * from_usize(i) / from_usize(n))
        })
        .collect())
}

/// Default sweep grid: 200 points per decade above `b = 1` when `λ(b)` snakes,
/// 50 per decade elsewhere.
pub fn default_grid<T: Real>(pack: &ExponentPack<T>, b_min: T, b_max: T) -> Result<Vec<T>> {
    let one = T::one();
    if !pack.oscillatory || b_max <= one {
        return log_grid(b_min, b_max, 50);
    }
    if b_min >= one {
        return log_grid(b_min, b_max, 200);
    }
    let mut g = log_grid(b_min, one, 50)?;
    g.pop();
    g.extend(log_grid(one, b_max, 200)?);
    Ok(g)
}

/// `λ(b) - λ∞ = A∞ b^{-β} sin(α ln b + δ∞)` with `α`, `β` fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnakingFit<T> {
    pub a_inf: T,
    /// In `[0, 2π)`.
    pub delta_inf: T,
    /// RMS of the residual over RMS of the data.
    pub rms_rel_residual: T,
    pub n_points: usize,
}

impl<T: Real> SnakingFit<T> {
    /// Model value of `λ(b) - λ∞`.
    pub fn eval(&self, pack: &ExponentPack<T>, b: T) -> T {
        self.a_inf * b.powf(-pack.beta) * (pack.alpha * b.ln() + self.delta_inf).sin()
    }

    /// Zeros of the fitted law in `[lo, hi]`.
    pub fn zeros(&self, pack: &ExponentPack<T>, lo: T, hi: T) -> Vec<T> {
        let pi = T::PI();
        let first = ((pack.alpha * lo.ln() + self.delta_inf) / pi).ceil();
        let mut out = Vec::new();
        let mut k = first;
        loop {
            let b = ((k * pi - self.delta_inf) / pack.alpha).exp();
            if b > hi {
                break;
            }
            out.push(b);
            k = k + T::one();
        }
        out
    }
}

pub const MIN_FIT_POINTS: usize = 8;

/// Linear least squares for the snaking law over points with `b >= b_min_fit`
/// up to the last point with `|λ(b) - λ∞| >= floor`.
pub fn fit_snaking<T: Real>(
    points: &[CurvePoint<T>],
    lambda_inf: T,
    pack: &ExponentPack<T>,
    b_min_fit: T,
    floor: T,
) -> Result<SnakingFit<T>> {
    if !pack.oscillatory {
        return Err(Error::Fit(
            "snaking law needs complex exponents (5 <= d <= 12)".into(),
        ));
    }
    let b_max_fit = points
        .iter()
        .filter(|p| (p.lambda - lambda_inf).abs() >= floor)
        .map(|p| p.b)
        .fold(T::neg_infinity(), T::max);
    let rows: Vec<(T, T, T)> = points
        .iter()
        .filter(|p| p.b >= b_min_fit && p.b <= b_max_fit)
        .map(|p| {
            let w = p.b.powf(-pack.beta);
            let (s, c) = (pack.alpha * p.b.ln()).sin_cos();
            (w * s, w * c, p.lambda - lambda_inf)
        })
        .collect();
    if rows.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} resolved points above b = {b_min_fit}, need {MIN_FIT_POINTS}",
            rows.len()
        )));
    }
    // Columns scaled by b^{β} so every amplitude counts equally.
    let scaled: Vec<[T; 3]> = rows
        .iter()
        .map(|&(x, y, g)| {
            let n = (x * x + y * y).sqrt();
            [x / n, y / n, g / n]
        })
        .collect();
    let [p, q] = lstsq2(&scaled)?;
    let (ss_res, ss_tot) = scaled.iter().fold((T::zero(), T::zero()), |(a, b), r| {
        let e = r[2] - p * r[0] - q * r[1];
        (a + e * e, b + r[2] * r[2])
    });
    let tau = T::PI() + T::PI();
    let mut delta = q.atan2(p);
    if delta < T::zero() {
        delta = delta + tau;
    }
    Ok(SnakingFit {
        a_inf: (p * p + q * q).sqrt(),
        delta_inf: delta,
        rms_rel_residual: (ss_res / ss_tot).sqrt(),
        n_points: rows.len(),
    })
}

/// `|λ(b) - λ∞| ≈ B∞ b^{κ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotoneFit<T> {
    /// Signed amplitude at the fixed exponent `κ₊`.
    pub b_inf: T,
    /// Free slope of the log-log regression.
    pub fitted_exponent: T,
    /// RMS of the log residual of the free fit.
    pub rms_rel_residual: T,
    pub n_points: usize,
}

/// Log-log regression over points with `b >= b_min_fit` and
/// `|λ(b) - λ∞| >= floor`.
pub fn fit_monotone<T: Real>(
    points: &[CurvePoint<T>],
    lambda_inf: T,
    pack: &ExponentPack<T>,
    b_min_fit: T,
    floor: T,
) -> Result<MonotoneFit<T>> {
    if pack.oscillatory {
        return Err(Error::Fit(
            "monotone law needs real exponents (d >= 13)".into(),
        ));
    }
    let used: Vec<(T, T)> = points
        .iter()
        .filter(|p| p.b >= b_min_fit && (p.lambda - lambda_inf).abs() >= floor)
        .map(|p| (p.b, p.lambda - lambda_inf))
        .collect();
    if used.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} usable points, need {MIN_FIT_POINTS}",
            used.len()
        )));
    }
    let sign = used[0].1.signum();
    if used.iter().any(|u| u.1.signum() != sign) {
        return Err(Error::Fit("lambda(b) - lambda_inf changes sign".into()));
    }
    let xy: Vec<(T, T)> = used.iter().map(|&(b, g)| (b.ln(), g.abs().ln())).collect();
    let (slope, icept) = linear_fit(&xy)?;
    let n: T = from_usize(xy.len());
    let rms = (xy
        .iter()
        .fold(T::zero(), |s, &(x, y)| s + (y - icept - slope * x).powi(2))
        / n)
        .sqrt();
    let ln_b = xy
        .iter()
        .fold(T::zero(), |s, &(x, y)| s + y - pack.kappa_plus * x)
        / n;
    Ok(MonotoneFit {
        b_inf: sign * ln_b.exp(),
        fitted_exponent: slope,
        rms_rel_residual: rms,
        n_points: xy.len(),
    })
}

/// Sign changes of `λ(b) - λ∞` along the points, skipping values below `floor`.
pub fn sign_changes<T: Real>(points: &[CurvePoint<T>], lambda_inf: T, floor: T) -> usize {
    let mut last: Option<bool> = None;
    let mut count = 0;
    for p in points {
        let g = p.lambda - lambda_inf;
        if g.abs() < floor {
            continue;
        }
        let pos = g > T::zero();
        if last.is_some_and(|l| l != pos) {
            count += 1;
        }
        last = Some(pos);
    }
    count
}

/// Roots of `λ(b) = λ∞` in increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSequence<T> {
    pub roots: Vec<T>,
    /// `b_{n+1} / b_n`.
    pub ratios: Vec<T>,
    /// Ratios more than 25% away from `e^{π/α}`, as `(n, ratio)`.
    pub flagged: Vec<(usize, T)>,
    /// Amplitudes whose solve failed during the scan or refinement.
    pub failures: Vec<(T, String)>,
    /// Points of the scan grid.
    pub scan: Vec<CurvePoint<T>>,
}

/// Settings of [`find_bn`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootScan<T> {
    pub b_min: T,
    pub b_max: T,
    /// Grid points per factor `e^{π/α}`.
    pub points_per_period: usize,
    /// Relative width at which the bisection in `b` stops.
    pub rel_tol: T,
    /// Sign changes with both `|λ - λ∞|` below this are not refined.
    pub resolution: T,
}

impl<T: Real> RootScan<T> {
    pub fn new(b_min: T, b_max: T) -> Self {
        Self {
            b_min,
            b_max,
            points_per_period: 12,
            rel_tol: lit(1e-7),
            resolution: lit(1e-10),
        }
    }
}

/// Sign-change scan of `λ(b) - λ∞` on a log grid, then bisection in `ln b`.
pub fn find_bn<T: Real>(
    d: u32,
    lambda_inf: T,
    pack: &ExponentPack<T>,
    scan: &RootScan<T>,
    cfg: &ShootConfig<T>,
) -> Result<RootSequence<T>> {
    let Some(period) = pack.root_ratio() else {
        return Err(Error::Fit(
            "no snaking roots for real exponents (d >= 13)".into(),
        ));
    };
    if scan.points_per_period < 2 || !(scan.rel_tol > T::zero()) {
        return Err(Error::Parameter(
            "root scan needs >= 2 points per period and rel_tol > 0".into(),
        ));
    }
    let step = period.ln() / from_usize(scan.points_per_period);
    let n = ((scan.b_max / scan.b_min).ln() / step)
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let grid: Vec<T> = (0..=n)
        .map(|i| scan.b_min * (step * from_usize(i)).exp())
        .collect();
    let sweep = sweep_curve(d, &grid, cfg)?;
    let mut failures = sweep.failures.clone();
    let brackets: Vec<(CurvePoint<T>, CurvePoint<T>)> = sweep
        .points
        .windows(2)
        .filter(|w| {
            let (a, b) = (w[0].lambda - lambda_inf, w[1].lambda - lambda_inf);
            a != T::zero()
                && b != T::zero()
                && (a > T::zero()) != (b > T::zero())
                && a.abs().max(b.abs()) >= scan.resolution
        })
        .map(|w| (w[0], w[1]))
        .collect();
    let refined: Vec<std::result::Result<T, (T, String)>> = brackets
        .par_iter()
        .map(|&(lo, hi)| refine_root(d, lambda_inf, lo, hi, scan.rel_tol, cfg))
        .collect();
    let mut roots = Vec::new();
    for r in refined {
        match r {
            Ok(b) => roots.push(b),
            Err(f) => failures.push(f),
        }
    }
    let ratios: Vec<T> = roots.windows(2).map(|w| w[1] / w[0]).collect();
    let flagged = ratios
        .iter()
        .enumerate()
        .filter(|(_, r)| ((**r / period) - T::one()).abs() > lit(0.25))
        .map(|(i, r)| (i + 1, *r))
        .collect();
    Ok(RootSequence {
        roots,
        ratios,
        flagged,
        failures,
        scan: sweep.points,
    })
}

fn refine_root<T: Real>(
    d: u32,
    lambda_inf: T,
    lo: CurvePoint<T>,
    hi: CurvePoint<T>,
    rel_tol: T,
    cfg: &ShootConfig<T>,
) -> std::result::Result<T, (T, String)> {
    let (mut x0, mut x1) = (lo.b.ln(), hi.b.ln());
    let (mut g0, mut g1) = (lo.lambda - lambda_inf, hi.lambda - lambda_inf);
    let half: T = lit(0.5);
    while x1 - x0 > rel_tol {
        let xm = (x0 + x1) * half;
        let b = xm.exp();
        let (gl, gh) = (g0.min(g1), g0.max(g1));
        let guess = Some((lambda_inf + gl, lambda_inf + gh));
        let gs = solve_lambda_warm(d, b, cfg, guess).map_err(|e| (b, e.to_string()))?;
        let gm = gs.lambda - lambda_inf;
        if gm == T::zero() {
            return Ok(b);
        }
        if (gm > T::zero()) == (g0 > T::zero()) {
            x0 = xm;
            g0 = gm;
        } else {
            x1 = xm;
            g1 = gm;
        }
    }
    // Linear interpolation in ln b inside the final bracket.
    let x = x0 - g0 * (x1 - x0) / (g1 - g0);
    Ok(x.exp())
}

/// Distance of `Ψ_b(· - ln b)` from `Θ` and its power law in `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRate<T> {
    /// `(b, sup_{s ∈ [s0, 0]} |Ψ_b(s - ln b) - Θ(s)|)`.
    pub sups: Vec<(T, T)>,
    /// Log-log slope over the sups above the round-off floor.
    pub slope: T,
}

const ROUNDOFF_FLOOR: f64 = 1e-13;
const SUP_GRID: usize = 200;

/// Fits `sup |Ψ_b(· - ln b) - Θ| ∝ b^{slope}` over `b_list`.
pub fn convergence_rate_check<T: Real>(
    d: u32,
    lambda: T,
    b_list: &[T],
    cfg: &ShootConfig<T>,
) -> Result<ConvergenceRate<T>> {
    let (lo, hi) = b_list
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if !(hi / lo >= lit(100.0)) {
        return Err(Error::Parameter(
            "amplitudes must span at least two decades".into(),
        ));
    }
    let theta = solve_theta(d, cfg)?;
    let s0 = cfg.s0;
    let sups = b_list
        .par_iter()
        .map(|&b| {
            let psi = compute_psi_b(d, b, lambda, cfg)?;
            let mut sup = T::zero();
            for i in 0..SUP_GRID {
                let s = s0 - s0 * from_usize(i) / from_usize(SUP_GRID - 1);
                let diff = (psi.eval(s)?[0] - theta.eval(s)?[0]).abs();
                sup = sup.max(diff);
            }
            Ok((b, sup))
        })
        .collect::<Result<Vec<(T, T)>>>()?;
    let xy: Vec<(T, T)> = sups
        .iter()
        .filter(|s| s.1 >= lit(ROUNDOFF_FLOOR))
        .map(|&(b, s)| (b.ln(), s.ln()))
        .collect();
    if xy.len() < 2 {
        return Err(Error::Fit(format!(
            "{} differences above the round-off floor {ROUNDOFF_FLOOR:e}",
            xy.len()
        )));
    }
    let (slope, _) = linear_fit(&xy)?;
    Ok(ConvergenceRate { sups, slope })
}

/// Ordinary least squares line `y = slope x + icept`.
fn linear_fit<T: Real>(xy: &[(T, T)]) -> Result<(T, T)> {
    let n: T = from_usize(xy.len());
    let (sx, sy) = xy
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = xy.iter().fold((T::zero(), T::zero()), |(a, b), &(x, y)| {
        (a + (x - mx) * (x - mx), b + (x - mx) * (y - my))
    });
    if !(sxx > T::zero()) {
        return Err(Error::Fit("regression needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Two-column least squares `[x, y, rhs]` by normal equations.
fn lstsq2<T: Real>(rows: &[[T; 3]]) -> Result<[T; 2]> {
    let z = T::zero();
    let (a11, a12, a22, b1, b2) = rows.iter().fold((z, z, z, z, z), |acc, r| {
        (
            acc.0 + r[0] * r[0],
            acc.1 + r[0] * r[1],
            acc.2 + r[1] * r[1],
            acc.3 + r[0] * r[2],
            acc.4 + r[1] * r[2],
        )
    });
    let det = a11 * a22 - a12 * a12;
    if !(det.abs() > T::epsilon() * a11 * a22) {
        return Err(Error::Fit(format!(
            "singular normal equations (det {})",
            to_f64(det)
        )));
    }
    Ok([(b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::exponents;

    fn synthetic(f: impl Fn(f64) -> f64, bs: &[f64]) -> Vec<CurvePoint<f64>> {
        bs.iter()
            .map(|&b| CurvePoint {
                b,
                lambda: 4.0 + f(b),
                bracket_width: 0.0,
                tail_c: 1.0,
                mass: 1.0,
                energy: 1.0,
                pohozaev_residual: 0.0,
                violations: 0,
            })
            .collect()
    }

    #[test]
    fn snaking_fit_recovers_exact_law() {
        let pack = exponents::<f64>(5).unwrap();
        let (a, dl) = (0.7, 5.9);
        let bs = log_grid(100.0, 1e6, 30).unwrap();
        let pts = synthetic(
            |b| a * b.powf(-pack.beta) * (pack.alpha * b.ln() + dl).sin(),
            &bs,
        );
        let fit = fit_snaking(&pts, 4.0, &pack, 100.0, 0.0).unwrap();
        assert!((fit.a_inf - a).abs() < 1e-10 && (fit.delta_inf - dl).abs() < 1e-10);
        assert!(fit.rms_rel_residual < 1e-10);
        for z in fit.zeros(&pack, 100.0, 1e6) {
            assert!(fit.eval(&pack, z).abs() < 1e-12);
        }
        assert!(fit_snaking(&pts[..5], 4.0, &pack, 1.0, 0.0).is_err());
        // Values below the floor past the last resolved point are left out.
        let mut noisy = pts.clone();
        noisy.extend(synthetic(|_| -5e-12, &[2e6, 4e6, 8e6]));
        let cut = fit_snaking(&noisy, 4.0, &pack, 100.0, 1e-10).unwrap();
        assert_eq!(cut.n_points, fit.n_points);
    }

    #[test]
    fn monotone_fit_recovers_exponent() {
        let pack = exponents::<f64>(13).unwrap();
        let bs = log_grid(1.0, 30.0, 20).unwrap();
        let pts = synthetic(|b| 3.0 * b.powf(-4.0), &bs);
        let fit = fit_monotone(&pts, 4.0, &pack, 1.0, 0.0).unwrap();
        assert!((fit.fitted_exponent + 4.0).abs() < 1e-8);
        assert!((fit.b_inf - 3.0).abs() < 1e-7);
        let osc = synthetic(|b| (b.ln() * 3.0).sin() * 1e-3, &bs);
        assert!(fit_monotone(&osc, 4.0, &pack, 1.0, 0.0).is_err());
    }

    #[test]
    fn sign_change_count_skips_unresolved_values() {
        let bs: Vec<f64> = (1..=6).map(|i| i as f64).collect();
        let vals = [1e-3, -1e-3, 1e-15, -1e-15, 1e-3, -1e-3];
        let pts = synthetic(|b| vals[b as usize - 1], &bs);
        assert_eq!(sign_changes(&pts, 4.0, 1e-12), 3);
        assert_eq!(sign_changes(&pts, 4.0, 0.0), 5);
    }

    #[test]
    fn grids() {
        let g: Vec<f64> = log_grid(1.0, 100.0, 10).unwrap();
        assert_eq!(g.len(), 21);
        assert!((g[20] - 100.0).abs() < 1e-9);
        let pack = exponents::<f64>(5).unwrap();
        let dg = default_grid(&pack, 0.1, 10.0).unwrap();
        assert!(dg.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(dg.len(), 50 + 201);
        assert!(log_grid(0.0, 1.0, 10).is_err());
    }

    #[test]
    fn sweep_is_ordered_and_warm_starts_match_cold() {
        let cfg = ShootConfig::default();
        let grid = log_grid(0.5, 20.0, 8).unwrap();
        let sweep = sweep_curve(6, &grid, &cfg).unwrap();
        assert!(sweep.failures.is_empty());
        assert_eq!(sweep.points.len(), grid.len());
        for (p, &b) in sweep.points.iter().zip(&grid) {
            assert_eq!(p.b, b);
            assert_eq!(p.violations, 0);
        }
        let cold = crate::shooting::solve_lambda(6, grid[5], &cfg).unwrap();
        assert_eq!(cold.lambda, sweep.points[5].lambda);
        assert!(sweep_curve(6, &[2.0, 1.0], &cfg).is_err());
    }
}
