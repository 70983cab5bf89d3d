//! The truncated heteroclinic orbit `Θ` and translated trajectories `Ψ_b(s - ln b)`.

use crate::error::{Error, Result};
use crate::integrator::{Direction, EventSpec, Integrator, OdeSystem, Status, Trajectory};
use crate::models::{
    exponents, init_theta, init_translated, EmdenTrajectory, ModelParams, TruncatedSystem, Variable,
};
use crate::scalar::{lit, Real};

use super::{check_status, sample_dense, ShootConfig};

/// The orbit counts as arrived once `|Θ - sqrt(d-3)| + |Θ'|` drops below this.
const ARRIVAL: f64 = 1e-10;
const T_MAX: f64 = 200.0;
/// Samples used by the tail fit: distance to the equilibrium in this range.
const FIT_WINDOW: (f64, f64) = (1e-9, 1e-4);

/// Linear tail of `Θ` around `sqrt(d-3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaFit<T> {
    /// `Θ - sqrt(d-3) ≈ A0 e^{-βt} sin(αt + δ0)` with fitted `α`, `β`.
    Spiral {
        a0: T,
        delta0: T,
        alpha_fit: T,
        beta_fit: T,
    },
    /// `Θ - sqrt(d-3) ≈ A0 e^{κ₊t} + B0 e^{κ₋t}`; `rate_fit` is the fitted `κ₊`.
    Sink {
        a0: T,
        b0: T,
        rate_fit: T,
        minor_rate_fit: T,
    },
}

/// The orbit from the origin to `(sqrt(d-3), 0)`.
#[derive(Clone, Debug)]
pub struct ThetaOrbit<T> {
    pub d: u32,
    /// Samples of `(t, Θ, Θ')`.
    pub trajectory: EmdenTrajectory<T>,
    pub fit: ThetaFit<T>,
    dense: Trajectory<T, 2>,
}

impl<T: Real> ThetaOrbit<T> {
    /// `(Θ, Θ')` at `t` from the dense output.
    pub fn eval(&self, t: T) -> Result<[T; 2]> {
        Ok(self.dense.interpolate(t)?)
    }

    pub fn t_range(&self) -> (T, T) {
        (self.dense.t_start(), self.dense.t_end())
    }

    /// Energy `V` at every sample.
    pub fn energy(&self) -> Vec<T> {
        let sys = TruncatedSystem::<T>::new(self.d);
        let tr = &self.trajectory;
        tr.value()
            .iter()
            .zip(tr.derivative())
            .map(|(&v, &dv)| sys.energy(v, dv))
            .collect()
    }
}

/// Integrates the truncated equation from `t = cfg.s0` until the orbit
/// settles at `sqrt(d-3)`, then fits its linear tail.
pub fn solve_theta<T: Real>(d: u32, cfg: &ShootConfig<T>) -> Result<ThetaOrbit<T>> {
    cfg.validate()?;
    let pack = exponents::<T>(d)?;
    let (v0, dv0) = init_theta(d, cfg.s0)?;
    let sys = TruncatedSystem::<T>::new(d);
    let eq = sys_equilibrium(d);
    let arrival = [EventSpec::new(
        move |_, y: &[T; 2]| (y[0] - eq).abs() + y[1].abs() - lit(ARRIVAL),
        Direction::Falling,
    )];
    let out =
        Integrator::new(cfg.control).integrate(&sys, cfg.s0, [v0, dv0], lit(T_MAX), &arrival)?;
    check_status(&out, || format!("truncated orbit d = {d}"))?;
    if out.status != Status::EventStop {
        return Err(Error::ThetaNotConverged);
    }
    let samples = sample_dense(&out.trajectory, cfg.profile_subdiv)?;
    let t: Vec<T> = samples.iter().map(|s| s.0).collect();
    let v: Vec<T> = samples.iter().map(|s| s.1[0]).collect();
    let dv: Vec<T> = samples.iter().map(|s| s.1[1]).collect();

    let window: Vec<(T, T, T, T)> = samples
        .iter()
        .filter_map(|(x, y)| {
            let u = y[0] - eq;
            let dist = u.abs() + y[1].abs();
            (dist >= lit(FIT_WINDOW.0) && dist <= lit(FIT_WINDOW.1))
                .then(|| (*x, u, y[1], sys.rhs(*x, y)[1]))
        })
        .collect();
    if window.len() < 8 {
        return Err(Error::Fit(format!(
            "{} samples in the linear tail of the truncated orbit",
            window.len()
        )));
    }
    let fit = fit_tail(&window, pack.oscillatory)?;
    Ok(ThetaOrbit {
        d,
        trajectory: EmdenTrajectory::new(Variable::Theta, t, v, dv)?,
        fit,
        dense: out.trajectory,
    })
}

fn sys_equilibrium<T: Real>(d: u32) -> T {
    T::from_u32(d - 3).unwrap().sqrt()
}

/// Least squares for `u'' = -p u' - q u`, then the amplitudes at the rates
/// this gives. Rows are scaled to unit size so every decade of the window
/// counts equally.
fn fit_tail<T: Real>(rows: &[(T, T, T, T)], oscillatory: bool) -> Result<ThetaFit<T>> {
    let scaled: Vec<[T; 3]> = rows
        .iter()
        .map(|&(_, u, du, ddu)| {
            let s = T::one() / (u.abs() + du.abs());
            [-du * s, -u * s, ddu * s]
        })
        .collect();
    let [p, q] = least_squares2(&scaled)?;
    let half: T = lit(0.5);
    let disc = p * p * lit(0.25) - q;
    if oscillatory {
        if disc >= T::zero() {
            return Err(Error::Fit(
                "tail of the truncated orbit does not oscillate".into(),
            ));
        }
        let alpha = (-disc).sqrt();
        let beta = p * half;
        // u e^{βt} = P sin(αt) + Q cos(αt)
        let amp: Vec<[T; 3]> = rows
            .iter()
            .map(|&(t, u, _, _)| {
                let (s, c) = (alpha * t).sin_cos();
                [s, c, u * (beta * t).exp()]
            })
            .collect();
        let [pp, qq] = least_squares2(&amp)?;
        Ok(ThetaFit::Spiral {
            a0: (pp * pp + qq * qq).sqrt(),
            delta0: qq.atan2(pp),
            alpha_fit: alpha,
            beta_fit: beta,
        })
    } else {
        if disc <= T::zero() {
            return Err(Error::Fit("tail of the truncated orbit oscillates".into()));
        }
        let root = disc.sqrt();
        let (k_plus, k_minus) = (-p * half + root, -p * half - root);
        // Columns normalized by the dominant mode.
        let amp: Vec<[T; 3]> = rows
            .iter()
            .map(|&(t, u, _, _)| {
                let g = (-k_plus * t).exp();
                [T::one(), ((k_minus - k_plus) * t).exp(), u * g]
            })
            .collect();
        let [a0, b0] = least_squares2(&amp)?;
        Ok(ThetaFit::Sink {
            a0,
            b0,
            rate_fit: k_plus,
            minor_rate_fit: k_minus,
        })
    }
}

/// Solves the 2-column least squares problem `[x, y, rhs]` by normal equations.
fn least_squares2<T: Real>(rows: &[[T; 3]]) -> Result<[T; 2]> {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for r in rows {
        a11 = a11 + r[0] * r[0];
        a12 = a12 + r[0] * r[1];
        a22 = a22 + r[1] * r[1];
        b1 = b1 + r[0] * r[2];
        b2 = b2 + r[1] * r[2];
    }
    let det = a11 * a22 - a12 * a12;
    if !(det.abs() > T::epsilon() * a11 * a22) {
        return Err(Error::Fit("singular least-squares system".into()));
    }
    Ok([(b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det])
}

/// `s ↦ Ψ_b(s - ln b)` on `[cfg.s0, ln b]`, i.e. up to `r = 1`.
#[derive(Clone, Debug)]
pub struct PsiTrajectory<T> {
    pub params: ModelParams<T>,
    pub b: T,
    dense: Trajectory<T, 2>,
}

impl<T: Real> PsiTrajectory<T> {
    /// `(Ψ, dΨ/ds)` at shifted time `s`.
    pub fn eval(&self, s: T) -> Result<[T; 2]> {
        let y = self.dense.interpolate(s)?;
        Ok([y[0], y[1] + y[0]])
    }

    /// `(Ψ_b, Ψ_b')` at unshifted time `t = s - ln b`.
    pub fn eval_unshifted(&self, t: T) -> Result<[T; 2]> {
        self.eval(t + self.b.ln())
    }

    pub fn s_range(&self) -> (T, T) {
        (self.dense.t_start(), self.dense.t_end())
    }

    /// Samples in the shifted time, `subdiv` per accepted step.
    pub fn to_emden(&self, subdiv: usize) -> Result<EmdenTrajectory<T>> {
        let samples = sample_dense(&self.dense, subdiv)?;
        let s = samples.iter().map(|x| x.0).collect();
        let v = samples.iter().map(|x| x.1[0]).collect();
        let dv = samples.iter().map(|x| x.1[1] + x.1[0]).collect();
        EmdenTrajectory::new(Variable::BigPsi, s, v, dv)
    }
}

/// Integrates the translated equation for amplitude `b >= 1` at `lambda`.
pub fn compute_psi_b<T: Real>(
    d: u32,
    b: T,
    lambda: T,
    cfg: &ShootConfig<T>,
) -> Result<PsiTrajectory<T>> {
    cfg.validate()?;
    if !(b >= T::one()) || !b.is_finite() {
        return Err(Error::Parameter(format!(
            "amplitude {b} must be at least 1"
        )));
    }
    let p = ModelParams::new(d, lambda)?;
    let (v0, w0) = init_translated(&p, b, cfg.s0)?;
    let s_end = b.ln().max(lit(0.0));
    let out =
        Integrator::new(cfg.control).integrate(&p.translated(b), cfg.s0, [v0, w0], s_end, &[])?;
    check_status(&out, || format!("translated trajectory d = {d}, b = {b}"))?;
    Ok(PsiTrajectory {
        params: p,
        b,
        dense: out.trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ShootConfig<f64> {
        ShootConfig::default()
    }

    #[test]
    fn d5_spirals_into_equilibrium() {
        let orbit = solve_theta::<f64>(5, &cfg()).unwrap();
        let last = *orbit.trajectory.value().last().unwrap();
        assert!((last - 2f64.sqrt()).abs() < 1e-9);
        let ThetaFit::Spiral {
            alpha_fit,
            beta_fit,
            a0,
            ..
        } = orbit.fit
        else {
            panic!("expected a spiral fit, got {:?}", orbit.fit);
        };
        let alpha = 15f64.sqrt() / 2.0;
        assert!((alpha_fit / alpha - 1.0).abs() < 0.01, "{alpha_fit}");
        assert!((beta_fit - 0.5).abs() < 0.01, "{beta_fit}");
        assert!(a0 > 0.0);
    }

    #[test]
    fn d13_sinks_at_kappa_plus() {
        let orbit = solve_theta::<f64>(13, &cfg()).unwrap();
        let ThetaFit::Sink {
            rate_fit,
            minor_rate_fit,
            ..
        } = orbit.fit
        else {
            panic!("expected a sink fit, got {:?}", orbit.fit);
        };
        assert!((rate_fit / -4.0 - 1.0).abs() < 0.02, "{rate_fit}");
        assert!(
            (minor_rate_fit / -5.0 - 1.0).abs() < 0.05,
            "{minor_rate_fit}"
        );
    }

    #[test]
    fn energy_decreases_while_moving() {
        for d in [5u32, 9, 13] {
            let orbit = solve_theta::<f64>(d, &cfg()).unwrap();
            let e = orbit.energy();
            let dv = orbit.trajectory.derivative();
            for i in 1..e.len() {
                if dv[i].abs() > 1e-4 && dv[i - 1].abs() > 1e-4 {
                    assert!(e[i] < e[i - 1], "d = {d}, sample {i}");
                }
            }
        }
    }

    #[test]
    fn spiral_fit_recovers_synthetic_tail() {
        let (a, dl, al, be) = (0.3, 1.1, 1.7, 0.6);
        let rows: Vec<_> = (0..200)
            .map(|i| {
                let t = 10.0 + i as f64 * 0.05;
                let e = (-be * t).exp();
                let (s, c) = (al * t + dl).sin_cos();
                let u = a * e * s;
                let du = a * e * (al * c - be * s);
                let ddu = -2.0 * be * du - (al * al + be * be) * u;
                (t, u, du, ddu)
            })
            .collect();
        let ThetaFit::Spiral {
            a0,
            delta0,
            alpha_fit,
            beta_fit,
        } = fit_tail(&rows, true).unwrap()
        else {
            unreachable!()
        };
        assert!(
            (a0 - a).abs() < 1e-9
                && (alpha_fit - al).abs() < 1e-10
                && (beta_fit - be).abs() < 1e-10
        );
        assert!((delta0.rem_euclid(std::f64::consts::TAU) - dl).abs() < 1e-9);
    }

    #[test]
    fn psi_b_at_unit_amplitude_matches_emden_form() {
        let lam = 4.5;
        let p = ModelParams::new(5, lam).unwrap();
        let psi = compute_psi_b(5, 1.0, lam, &cfg()).unwrap();
        // ψ from t = -12 with ψ = 1 - (λ+1) e^{2t}/(2d), then Ψ = e^t ψ.
        let t0 = -12.0f64;
        let k = (lam + 1.0) / 10.0;
        let y0 = [1.0 - k * (2.0 * t0).exp() / 2.0, -k * (2.0 * t0).exp()];
        let out = Integrator::new(cfg().control)
            .integrate(&p.emden(), t0, y0, 0.0, &[])
            .unwrap();
        for t in [-8.0, -3.0, -1.0, 0.0] {
            let y = out.trajectory.interpolate(t).unwrap();
            let want = t.exp() * y[0];
            let got = psi.eval_unshifted(t).unwrap()[0];
            assert!((got - want).abs() < 1e-10, "t = {t}: {got} vs {want}");
        }
    }

    #[test]
    fn large_amplitude_start_is_universal() {
        let a = compute_psi_b(5, 1e4, 4.0, &cfg()).unwrap();
        let b = compute_psi_b(5, 1e6, 4.0, &cfg()).unwrap();
        for s in [-10.0f64, -6.0] {
            let want = s.exp() - (3.0 * s).exp() / 10.0;
            assert!((a.eval(s).unwrap()[0] - want).abs() < 1e-8 * s.exp());
            assert!((b.eval(s).unwrap()[0] - want).abs() < 1e-8 * s.exp());
        }
        assert!(compute_psi_b(5, 0.5, 4.0, &cfg()).is_err());
    }
}
