//! Non-degeneracy integrals of the limiting solution.
//!
//! `Ψ₂ = ∂Ψ_C/∂C` at `C = C∞`, where `Ψ_C` is the solution with tail
//! `C r g(r)`. It is a central difference of two backward solutions seeded on
//! the tail law, continued below the point where the pair leaves the linear
//! regime by the variational equation along `Ψ∞`.

use crate::error::{Error, Result};
use crate::integrator::{Direction, EventSpec, Integrator, OdeSystem, StepControl, Trajectory};
use crate::models::{exponents, init_singular, tail_shape, ModelParams, TailLaw};
use crate::scalar::{from_usize, lit, Real};

use super::{check_status, ShootConfig, SingularGroundState};

/// Lower end of the integration in `t = ln r`.
const T_LOW: f64 = -12.0;
/// The central-difference pair is used while `|Ψ_{C+h} - Ψ_{C-h}|` stays below
/// this multiple of `sqrt(d-3)`.
const JOIN_GAP: f64 = 1e-3;
/// Seed radius beyond `sqrt(λ)`.
const SEED_OFFSET: f64 = 3.0;
/// Relative step in `C` of the coarse difference.
const H_REL: f64 = 1e-4;
const PLATEAU_SPAN: f64 = 2.0;
/// Absolute tolerance floor: near `sqrt(d-3)` the right-hand side cancels to
/// round-off of the `O(1)` state.
const ABS_TOL_FLOOR: f64 = 1e-14;
const PLATEAU_SPREAD: f64 = 1e-4;

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Coefficient of `e^{κ₋t}` in `Ψ₂` as `t → -∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModalCoefficient<T> {
    /// Complex exponents (`d <= 12`): no separate `κ₋` mode.
    NotApplicable,
    /// No plateau within the relative spread limit.
    Indeterminate {
        spread: T,
    },
    Value {
        value: T,
        err: T,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Nondegeneracy<T> {
    pub d: u32,
    /// `∫ e^{(d-2)t} Ψ∞ Ψ₂ dt`.
    pub a1: T,
    /// Step-refinement plus tolerance-refinement estimate.
    pub a1_err: T,
    pub a3: ModalCoefficient<T>,
    /// `a1` at `h`, `h/2` and `h/4`.
    pub a1_by_step: [(T, T); 3],
    /// Where the difference pair hands over to the variational equation.
    pub t_join: T,
}

impl<T: Real> Nondegeneracy<T> {
    /// `|a1| > factor * a1_err` and, when a modal value exists, the same for it.
    pub fn clearly_nonzero(&self, factor: T) -> bool {
        let a1_ok = self.a1.abs() > factor * self.a1_err;
        match self.a3 {
            ModalCoefficient::NotApplicable => a1_ok,
            ModalCoefficient::Indeterminate { .. } => false,
            ModalCoefficient::Value { value, err } => a1_ok && value.abs() > factor * err,
        }
    }
}

struct Run<T> {
    a1: T,
    modal: Option<(T, T)>,
    t_join: T,
}

/// Evaluates `a1` and, for `d >= 13`, the `κ₋` coefficient of `Ψ₂`.
pub fn verify_nondegeneracy<T: Real>(
    sg: &SingularGroundState<T>,
    cfg: &ShootConfig<T>,
) -> Result<Nondegeneracy<T>> {
    cfg.validate()?;
    if !(sg.c_inf > T::zero()) {
        return Err(Error::Parameter(format!(
            "tail constant {} must be positive",
            sg.c_inf
        )));
    }
    let p = ModelParams::singular(sg.d, sg.lambda_inf)?;
    let pack = exponents::<T>(sg.d)?;
    let h: T = sg.c_inf * lit(H_REL);
    let half: T = lit(0.5);
    let fine = cfg.control.scale_tolerance(lit(0.1));

    let coarse = run(&p, sg.c_inf, h, None, cfg.control)?;
    let t_join = coarse.t_join;
    let mid = run(&p, sg.c_inf, h * half, Some(t_join), cfg.control)?;
    let quarter = run(&p, sg.c_inf, h * half * half, Some(t_join), cfg.control)?;
    let tight = run(&p, sg.c_inf, h * half, Some(t_join), fine)?;

    let a1_err = (coarse.a1 - mid.a1).abs() + (tight.a1 - mid.a1).abs();
    let a3 = if pack.oscillatory {
        ModalCoefficient::NotApplicable
    } else {
        match (coarse.modal, mid.modal, tight.modal) {
            (Some((c, sc)), Some((m, sm)), Some((t, st)))
                if sc.max(sm).max(st) <= lit(PLATEAU_SPREAD) =>
            {
                ModalCoefficient::Value {
                    value: m,
                    err: (c - m).abs() + (t - m).abs() + sm * m.abs(),
                }
            }
            (_, m, _) => ModalCoefficient::Indeterminate {
                spread: m.map_or(T::infinity(), |x| x.1),
            },
        }
    };
    Ok(Nondegeneracy {
        d: sg.d,
        a1: mid.a1,
        a1_err,
        a3,
        a1_by_step: [
            (h, coarse.a1),
            (h * half, mid.a1),
            (h * half * half, quarter.a1),
        ],
        t_join,
    })
}

fn gauss<T: Real>(a: T, b: T, mut visit: impl FnMut(T, T) -> Result<()>) -> Result<()> {
    let half: T = lit(0.5);
    let (m, r) = ((a + b) * half, (b - a) * half);
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        visit(m + r * lit(*x), r * lit(w))?;
    }
    Ok(())
}

/// Integral of `g` over the span of `traj` on its own steps.
fn integrate_steps<T: Real, const N: usize>(
    traj: &Trajectory<T, N>,
    g: impl Fn(T, &[T; N]) -> T,
) -> Result<T> {
    let times = traj.times();
    let mut sum = T::zero();
    for i in 0..times.len() - 1 {
        let (a, b) = (times[i + 1].min(times[i]), times[i + 1].max(times[i]));
        gauss(a, b, |t, w| {
            sum = sum + w * g(t, &traj.interpolate(t)?);
            Ok(())
        })?;
    }
    Ok(sum)
}

fn run<T: Real>(
    p: &ModelParams<T>,
    c: T,
    h: T,
    join: Option<T>,
    control: StepControl<T>,
) -> Result<Run<T>> {
    let d = p.d;
    let sys = p.singular_emden();
    let integrator = Integrator::new(StepControl {
        abs_tol: control.abs_tol.max(lit(ABS_TOL_FLOOR)),
        ..control
    });
    let t_low: T = lit(T_LOW);
    let weight = |t: T| (p.dm(2) * t).exp();
    let ctx = |what: &str| format!("{what} d = {d}, lambda = {}", p.lambda);

    // Backward pair from the tail law.
    let r_seed = p.lambda.sqrt() + lit(SEED_OFFSET);
    let t_seed = r_seed.ln();
    let (g, gp) = tail_shape(d, p.lambda, r_seed, TailLaw::Kummer);
    let (v, dv) = (r_seed * g, r_seed * g + r_seed * r_seed * gp);
    let y0 = [(c + h) * v, (c + h) * dv, (c - h) * v, (c - h) * dv];
    let pair = move |t: T, y: &[T; 4]| {
        let a = sys.rhs(t, &[y[0], y[1]]);
        let b = sys.rhs(t, &[y[2], y[3]]);
        [a[0], a[1], b[0], b[1]]
    };
    let gap: T = p.dm(3).sqrt() * lit(JOIN_GAP);
    let (pair_end, events) = match join {
        Some(t) => (t, Vec::new()),
        None => (
            t_low,
            vec![EventSpec::new(
                move |_, y: &[T; 4]| (y[0] - y[2]).abs() - gap,
                Direction::Rising,
            )],
        ),
    };
    let out = integrator.integrate(&pair, t_seed, y0, pair_end, &events)?;
    check_status(&out, || ctx("difference pair"))?;
    let t_join = out.trajectory.t_end();
    let two_h = h + h;
    let mut a1 = integrate_steps(&out.trajectory, |t, y| {
        weight(t) * (y[0] + y[2]) * lit(0.5) * (y[0] - y[2]) / two_h
    })?;

    // Tail beyond the seed: ∫ e^{(d-2)t} Ψ∞ Ψ₂ dt = ∫ C r^{d-1} g² dr.
    let panels = 60usize;
    let step = lit::<T>(12.0) / from_usize(panels);
    for k in 0..panels {
        let lo = r_seed + step * from_usize(k);
        gauss(lo, lo + step, |r, w| {
            let (g, _) = tail_shape(d, p.lambda, r, TailLaw::Kummer);
            a1 = a1 + w * c * r.powi(d as i32 - 1) * g * g;
            Ok(())
        })?;
    }

    if t_join <= t_low {
        return Ok(Run {
            a1,
            modal: None,
            t_join,
        });
    }

    // Ψ∞ forward from the origin series up to the join point.
    let t_start = t_low - T::one();
    let r0 = t_start.exp();
    let (f0, fp0) = init_singular(p, r0)?;
    let base = integrator.integrate(&sys, t_start, [f0, r0 * fp0], t_join, &[])?;
    check_status(&base, || ctx("limiting solution"))?;
    let base = base.trajectory;

    let yj = out.trajectory.last_state();
    let u0 = [(yj[0] - yj[2]) / two_h, (yj[1] - yj[3]) / two_h];
    let k3 = p.dm(3);
    let k4 = p.dm(4);
    let three: T = lit(3.0);
    let variational = |t: T, u: &[T; 2]| -> [T; 2] {
        let psi = base.interpolate(t).map_or(T::nan(), |y| y[0]);
        let e2 = (t + t).exp();
        let coef = k3 - three * psi * psi - p.lambda * e2 + e2 * e2;
        [u[1], -k4 * u[1] + coef * u[0]]
    };
    let lin = integrator.integrate(&variational, t_join, u0, t_low, &[])?;
    check_status(&lin, || ctx("variational equation"))?;
    a1 = a1
        + integrate_steps(&lin.trajectory, |t, u| {
            weight(t) * base.interpolate(t).map_or(T::nan(), |y| y[0]) * u[0]
        })?;

    let pack = exponents::<T>(d)?;
    let modal = if pack.oscillatory {
        None
    } else {
        let (kp, km) = (pack.kappa_plus, pack.kappa_minus);
        let n = 41usize;
        let vals = (0..n)
            .map(|i| {
                let t = t_low + lit::<T>(PLATEAU_SPAN) * from_usize(i) / from_usize(n - 1);
                let u = lin.trajectory.interpolate(t)?;
                Ok((-km * t).exp() * (u[1] - kp * u[0]) / (km - kp))
            })
            .collect::<Result<Vec<T>>>()?;
        let mean = vals.iter().fold(T::zero(), |s, &x| s + x) / from_usize(n);
        let lo = vals.iter().copied().fold(T::infinity(), T::min);
        let hi = vals.iter().copied().fold(T::neg_infinity(), T::max);
        Some((mean, (hi - lo) / mean.abs()))
    };
    Ok(Run { a1, modal, t_join })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::solve_lambda_inf;

    #[test]
    fn d5_a1_clearly_nonzero() {
        let cfg = ShootConfig::default();
        let sg = solve_lambda_inf::<f64>(5, &cfg).unwrap();
        let nd = verify_nondegeneracy(&sg, &cfg).unwrap();
        assert_eq!(nd.a3, ModalCoefficient::NotApplicable);
        assert!(nd.clearly_nonzero(10.0), "{nd:?}");
    }

    #[test]
    fn d13_modal_coefficient_clearly_nonzero() {
        let cfg = ShootConfig::default();
        let sg = solve_lambda_inf::<f64>(13, &cfg).unwrap();
        let nd = verify_nondegeneracy(&sg, &cfg).unwrap();
        assert!(matches!(nd.a3, ModalCoefficient::Value { .. }), "{nd:?}");
        assert!(nd.clearly_nonzero(10.0), "{nd:?}");
    }

    #[test]
    fn central_difference_converges_quadratically() {
        let cfg = ShootConfig::default();
        let sg = solve_lambda_inf::<f64>(5, &cfg).unwrap();
        let nd = verify_nondegeneracy(&sg, &cfg).unwrap();
        let [(_, a), (_, b), (_, c)] = nd.a1_by_step;
        let ratio = (a - b) / (b - c);
        assert!((ratio - 4.0).abs() < 1.0, "{nd:?}, ratio {ratio}");
    }
}
