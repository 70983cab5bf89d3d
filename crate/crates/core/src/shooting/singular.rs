//! Shots of the singular problem `F(0) = sqrt(d-3)` and the limit `λ∞`.

use crate::error::{Error, Result};
use crate::integrator::{Direction, EventSpec, IntegrationResult, Integrator, Status};
use crate::models::{
    decay_constant, init_singular, EmdenTrajectory, ModelParams, ProfileKind, RadialProfile,
    TailLaw, Variable,
};
use crate::scalar::Real;

use super::{bisect, check_status, sample_dense, EigenResult, ShootConfig, ShotClass, ShotTag};

/// The limiting singular solution and its eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularGroundState<T> {
    pub d: u32,
    pub lambda_inf: T,
    pub eigen: EigenResult<T>,
    /// Tail constant of `f = F/r`.
    pub c_inf: T,
    pub tail_spread: T,
    /// `(r, F, F')` up to the end of the tail window.
    pub f_profile: EmdenTrajectory<T>,
    /// `(t, Ψ, Ψ')` with `Ψ(t) = F(e^t)`.
    pub psi: EmdenTrajectory<T>,
    /// `f = F/r` on the same radii.
    pub radial: RadialProfile<T>,
    pub anomalies: Vec<String>,
}

pub(crate) struct SingularShot<T> {
    pub class: ShotClass<T>,
    pub out: Option<IntegrationResult<T, 2>>,
}

/// Integrates `F` from the series at `r0` with the classification events.
pub(crate) fn shoot_singular<T: Real>(
    p: &ModelParams<T>,
    cfg: &ShootConfig<T>,
    r0: T,
    y0: [T; 2],
) -> Result<SingularShot<T>> {
    // F'(r0) >= 0 means the solution never decreased (λ <= 0).
    if y0[1] >= T::zero() {
        return Ok(SingularShot {
            class: ShotClass {
                tag: ShotTag::TurnedUp,
                location: Some(r0),
                end_value: y0[0] / r0,
            },
            out: None,
        });
    }
    let events = [
        EventSpec::new(|_, y: &[T; 2]| y[0], Direction::Falling),
        EventSpec::new(|_, y: &[T; 2]| y[1], Direction::Rising),
    ];
    let out = Integrator::new(cfg.control).integrate(
        &p.singular_radial(),
        r0,
        y0,
        cfg.r_stop(p.d),
        &events,
    )?;
    check_status(&out, || {
        format!("singular shot d = {}, lambda = {}", p.d, p.lambda)
    })?;
    let class = match (&out.terminal_event, out.status) {
        (Some(ev), Status::EventStop) => ShotClass {
            tag: if ev.index == 0 {
                ShotTag::HitZero
            } else {
                ShotTag::TurnedUp
            },
            location: Some(ev.t),
            end_value: ev.y[0] / ev.t,
        },
        _ => {
            let r = out.trajectory.t_end();
            let big_f = out.trajectory.last_state()[0];
            if big_f.abs() >= cfg.value_floor {
                return Err(Error::Shot {
                    context: format!("singular shot d = {}, lambda = {}", p.d, p.lambda),
                    detail: format!("no event and F = {big_f:e} above the floor at r = {r}"),
                });
            }
            ShotClass {
                tag: ShotTag::Undetermined,
                location: Some(r),
                end_value: big_f / r,
            }
        }
    };
    Ok(SingularShot {
        class,
        out: Some(out),
    })
}

fn shoot<T: Real>(p: &ModelParams<T>, cfg: &ShootConfig<T>) -> Result<SingularShot<T>> {
    let r0 = cfg.singular_r0;
    let (f0, fp0) = init_singular(p, r0)?;
    shoot_singular(p, cfg, r0, [f0, fp0])
}

/// Classifies the singular shot at `p.lambda`.
pub fn classify_singular<T: Real>(
    p: &ModelParams<T>,
    cfg: &ShootConfig<T>,
) -> Result<ShotClass<T>> {
    cfg.validate()?;
    p.require_singular()?;
    Ok(shoot(p, cfg)?.class)
}

/// `λ∞` by bisection on `(0, d)`, with the tail constant of the limit.
pub fn solve_lambda_inf<T: Real>(d: u32, cfg: &ShootConfig<T>) -> Result<SingularGroundState<T>> {
    cfg.validate()?;
    let base = ModelParams::singular(d, T::zero())?;
    let tight = cfg.tightened();
    let eigen = bisect(T::zero(), base.dim(), cfg.lambda_tol, None, |lam, retry| {
        let c = if retry { &tight } else { cfg };
        Ok(shoot(&base.with_lambda(lam), c)?.class)
    })?;
    let p = base.with_lambda(eigen.lambda);
    let shot = shoot(&p, cfg)?;
    assemble_singular(p, eigen, shot, cfg)
}

pub(crate) fn assemble_singular<T: Real>(
    p: ModelParams<T>,
    eigen: EigenResult<T>,
    shot: SingularShot<T>,
    cfg: &ShootConfig<T>,
) -> Result<SingularGroundState<T>> {
    let Some(out) = shot.out else {
        return Err(Error::Shot {
            context: format!("singular profile d = {}, lambda = {}", p.d, p.lambda),
            detail: "shot turned up at the start".into(),
        });
    };
    let samples = sample_dense(&out.trajectory, cfg.profile_subdiv)?;
    let r: Vec<T> = samples.iter().map(|s| s.0).collect();
    let f: Vec<T> = samples.iter().map(|(x, y)| y[0] / *x).collect();
    let fp: Vec<T> = samples
        .iter()
        .map(|(x, y)| (y[1] - y[0] / *x) / *x)
        .collect();
    let mut radial = RadialProfile::new(p, ProfileKind::Singular, r, f, fp)?;
    let mut anomalies = eigen.anomalies.clone();
    let (c_inf, tail_spread) = match decay_constant(&radial, TailLaw::Kummer) {
        Ok(fit) => {
            radial.truncate(fit.window.1);
            (fit.c, fit.spread)
        }
        Err(e) => {
            anomalies.push(format!("tail constant: {e}"));
            (T::nan(), T::nan())
        }
    };
    let n = radial.len();
    let kept = &samples[..n];
    let big_f: Vec<T> = kept.iter().map(|s| s.1[0]).collect();
    let big_fp: Vec<T> = kept.iter().map(|s| s.1[1]).collect();
    let r: Vec<T> = kept.iter().map(|s| s.0).collect();
    let t: Vec<T> = r.iter().map(|x| x.ln()).collect();
    let dpsi: Vec<T> = r.iter().zip(&big_fp).map(|(x, v)| *x * *v).collect();
    let f_profile = EmdenTrajectory::new(Variable::F, r, big_f.clone(), big_fp)?;
    let psi = EmdenTrajectory::new(Variable::BigPsi, t, big_f, dpsi)?;
    Ok(SingularGroundState {
        d: p.d,
        lambda_inf: p.lambda,
        eigen,
        c_inf,
        tail_spread,
        f_profile,
        psi,
        radial,
        anomalies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(d: u32, lambda: f64) -> ShotTag {
        let p = ModelParams::singular(d, lambda).unwrap();
        classify_singular(&p, &ShootConfig::default()).unwrap().tag
    }

    #[test]
    fn bracket_ends_classify() {
        assert_eq!(class(5, 5.0), ShotTag::HitZero);
        assert_eq!(class(5, 0.0), ShotTag::TurnedUp);
        assert_eq!(class(5, 4.01036 + 1e-4), ShotTag::HitZero);
        assert_eq!(class(5, 4.01036 - 1e-4), ShotTag::TurnedUp);
        assert!(
            classify_singular(&ModelParams::new(4, 1.0).unwrap(), &ShootConfig::default()).is_err()
        );
    }

    #[test]
    fn table_values() {
        for (d, want) in [(5, 4.01036), (13, 12.89681), (20, 19.98563)] {
            let sg = solve_lambda_inf::<f64>(d, &ShootConfig::default()).unwrap();
            assert!(
                (sg.lambda_inf - want).abs() <= 5e-5,
                "d = {d}: {}",
                sg.lambda_inf
            );
            assert!(sg.c_inf > 0.0 && sg.tail_spread < 0.01);
            assert!(sg.radial.is_positive() && sg.radial.is_strictly_decreasing());
        }
    }
}
