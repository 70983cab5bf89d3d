//! Shots from `f(0) = b` and the ground state `λ(b)`.

use crate::error::{Error, Result};
use crate::integrator::{Direction, EventSpec, IntegrationResult, Integrator, Status};
use crate::models::{
    decay_constant, functionals, init_regular, init_translated, Functionals, ModelParams,
    ProfileKind, RadialProfile, ShotParams, SpectralBracket, TailLaw,
};
use crate::scalar::{lit, Real};

use super::{bisect, check_status, sample_dense, EigenResult, ShootConfig, ShotClass, ShotTag};

/// Converged solution for one amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundState<T> {
    pub d: u32,
    pub b: T,
    pub lambda: T,
    pub eigen: EigenResult<T>,
    /// Samples up to the end of the tail-constant window.
    pub profile: RadialProfile<T>,
    pub tail_c: T,
    /// Relative spread of the tail plateau.
    pub tail_spread: T,
    pub functionals: Functionals<T>,
    pub anomalies: Vec<String>,
}

impl<T: Real> GroundState<T> {
    /// Violated ground-state invariants, empty when all hold.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !SpectralBracket::for_dimension(self.d).contains(self.lambda) {
            v.push(format!("lambda {} outside (d-4, d)", self.lambda));
        }
        if !(self.functionals.pohozaev_residual < T::from_f64(1e-5).unwrap()) {
            v.push(format!(
                "Pohozaev residual {:e} not below 1e-5",
                self.functionals.pohozaev_residual
            ));
        }
        if !(self.functionals.bound1_slack > T::zero()) {
            v.push(format!(
                "bound slack {:e} not positive",
                self.functionals.bound1_slack
            ));
        }
        if !self.profile.is_positive() {
            v.push("profile not positive".into());
        }
        if !self.profile.is_strictly_decreasing() {
            v.push("profile not strictly decreasing".into());
        }
        if !self.profile.lyapunov_decreasing() {
            v.push("Lyapunov function not decreasing".into());
        }
        v
    }
}

/// How a regular shot is integrated.
enum Frame<T> {
    /// In `r` from `r0`.
    Radial { r0: T },
    /// In `s = ln(b r)` from `s0`, state `(Ψ, w)`.
    Translated { s0: T },
}

fn frame<T: Real>(b: T, cfg: &ShootConfig<T>) -> Frame<T> {
    if b > cfg.translate_above {
        Frame::Translated { s0: cfg.s0 }
    } else {
        Frame::Radial {
            r0: cfg.r0 / b.max(T::one()),
        }
    }
}

struct Shot<T> {
    class: ShotClass<T>,
    out: Option<IntegrationResult<T, 2>>,
    frame: Frame<T>,
}

fn shoot<T: Real>(p: &ModelParams<T>, b: T, cfg: &ShootConfig<T>) -> Result<Shot<T>> {
    let integrator = Integrator::new(cfg.control);
    let r_stop = cfg.r_stop(p.d);
    let floor = cfg.value_floor;
    let fr = frame(b, cfg);
    let (x0, y0, x_end) = match fr {
        Frame::Radial { r0 } => {
            let (f0, fp0) = init_regular(p, &ShotParams::new(b)?, r0)?;
            (r0, [f0, fp0], r_stop)
        }
        Frame::Translated { s0 } => {
            let (v0, w0) = init_translated(p, b, s0)?;
            (s0, [v0, w0], (b * r_stop).ln())
        }
    };
    let ctx = || format!("regular shot d = {}, b = {b}, lambda = {}", p.d, p.lambda);
    // f'(r0) >= 0 already means the solution turned up (λ <= -b²).
    if y0[1] >= T::zero() {
        return Ok(Shot {
            class: ShotClass {
                tag: ShotTag::TurnedUp,
                location: Some(x0),
                end_value: y0[0],
            },
            out: None,
            frame: fr,
        });
    }
    let events = [
        EventSpec::new(|_, y: &[T; 2]| y[0], Direction::Falling),
        EventSpec::new(|_, y: &[T; 2]| y[1], Direction::Rising),
    ];
    let out = match fr {
        Frame::Radial { .. } => integrator.integrate(&p.radial(), x0, y0, x_end, &events)?,
        Frame::Translated { .. } => {
            integrator.integrate(&p.translated(b), x0, y0, x_end, &events)?
        }
    };
    check_status(&out, ctx)?;
    let to_r = |x: T, y: &[T; 2]| -> (T, T) {
        match fr {
            Frame::Radial { .. } => (x, y[0]),
            Frame::Translated { .. } => {
                let (r, f, _) = p.translated_to_radial(b, x, y);
                (r, f)
            }
        }
    };
    let class = match (&out.terminal_event, out.status) {
        (Some(ev), Status::EventStop) => {
            let (r, f) = to_r(ev.t, &ev.y);
            let tag = if ev.index == 0 {
                ShotTag::HitZero
            } else {
                ShotTag::TurnedUp
            };
            ShotClass {
                tag,
                location: Some(r),
                end_value: f,
            }
        }
        _ => {
            let last = out.trajectory.last_state();
            let (r, f) = to_r(out.trajectory.t_end(), &last);
            if f.abs() >= floor * b {
                return Err(Error::Shot {
                    context: ctx(),
                    detail: format!("no event and f = {f:e} above the floor at r = {r}"),
                });
            }
            ShotClass {
                tag: ShotTag::Undetermined,
                location: Some(r),
                end_value: f,
            }
        }
    };
    Ok(Shot {
        class,
        out: Some(out),
        frame: fr,
    })
}

/// Classifies the shot with amplitude `s.b` at `p.lambda`.
pub fn classify_regular<T: Real>(
    p: &ModelParams<T>,
    s: &ShotParams<T>,
    cfg: &ShootConfig<T>,
) -> Result<ShotClass<T>> {
    cfg.validate()?;
    Ok(shoot(p, s.b, cfg)?.class)
}

/// Ground state for amplitude `b` by bisection on `(d - 4, d)`.
pub fn solve_lambda<T: Real>(d: u32, b: T, cfg: &ShootConfig<T>) -> Result<GroundState<T>> {
    solve_lambda_warm(d, b, cfg, None)
}

/// [`solve_lambda`] with a guess interval for `λ`; the result does not
/// depend on the guess.
pub fn solve_lambda_warm<T: Real>(
    d: u32,
    b: T,
    cfg: &ShootConfig<T>,
    guess: Option<(T, T)>,
) -> Result<GroundState<T>> {
    cfg.validate()?;
    let shot = ShotParams::new(b)?;
    let bracket = SpectralBracket::for_dimension(d);
    let base = ModelParams::new(d, bracket.hi)?;
    let tight = cfg.tightened();
    let eigen = bisect(
        bracket.lo,
        bracket.hi,
        cfg.lambda_tol,
        guess,
        |lam, retry| {
            let c = if retry { &tight } else { cfg };
            Ok(shoot(&base.with_lambda(lam), shot.b, c)?.class)
        },
    )?;
    assemble(base.with_lambda(eigen.lambda), b, eigen, cfg)
}

/// One shot at a prescribed `λ`: its class and the sampled profile up to
/// the terminal event or the stop radius.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialShot<T> {
    pub class: ShotClass<T>,
    pub profile: RadialProfile<T>,
}

/// Integrates the regular problem once at `lambda` without bisection.
pub fn trial_shot<T: Real>(d: u32, b: T, lambda: T, cfg: &ShootConfig<T>) -> Result<TrialShot<T>> {
    cfg.validate()?;
    let p = ModelParams::new(d, lambda)?;
    let shot = shoot(&p, ShotParams::new(b)?.b, cfg)?;
    let mut profile = sample_profile(&p, b, &shot, cfg.profile_subdiv)?;
    if let Some(r) = shot.class.location {
        profile.truncate(r);
    }
    Ok(TrialShot {
        class: shot.class,
        profile,
    })
}

fn assemble<T: Real>(
    p: ModelParams<T>,
    b: T,
    eigen: EigenResult<T>,
    cfg: &ShootConfig<T>,
) -> Result<GroundState<T>> {
    let shot = shoot(&p, b, cfg)?;
    let mut profile = sample_profile(&p, b, &shot, cfg.profile_subdiv)?;
    let mut anomalies = eigen.anomalies.clone();
    let (tail_c, tail_spread) = match decay_constant(&profile, TailLaw::Kummer) {
        Ok(fit) => {
            profile.truncate(fit.window.1);
            (fit.c, fit.spread)
        }
        Err(e) => {
            anomalies.push(format!("tail constant: {e}"));
            trim_to_positive_decreasing(&mut profile);
            (T::zero(), T::nan())
        }
    };
    let functionals = functionals(&profile, tail_c)?;
    Ok(GroundState {
        d: p.d,
        b,
        lambda: p.lambda,
        eigen,
        profile,
        tail_c,
        tail_spread,
        functionals,
        anomalies,
    })
}

/// Keeps the leading run of positive, decreasing samples.
fn trim_to_positive_decreasing<T: Real>(profile: &mut RadialProfile<T>) {
    let f = profile.f();
    let mut end = 1;
    while end < f.len() && f[end] > T::zero() && f[end] < f[end - 1] {
        end += 1;
    }
    let r_cut = profile.r()[end - 1];
    profile.truncate(r_cut);
}

/// Relative drop of `f` below `b` before translated-frame samples are kept.
const HEAD_RESOLUTION: f64 = 1e-6;

/// Samples the shot at `subdiv` points per accepted step, in `r`.
fn sample_profile<T: Real>(
    p: &ModelParams<T>,
    b: T,
    shot: &Shot<T>,
    subdiv: usize,
) -> Result<RadialProfile<T>> {
    let Some(out) = &shot.out else {
        return Err(Error::Shot {
            context: format!("profile d = {}, b = {b}, lambda = {}", p.d, p.lambda),
            detail: "shot turned up at the start".into(),
        });
    };
    let samples = sample_dense(&out.trajectory, subdiv)?;
    let (mut r, mut f, mut fp) = (Vec::new(), Vec::new(), Vec::new());
    // In the translated frame `f = Ψ/r` carries the relative error of `Ψ`,
    // which hides the initial decrease of `f`; samples start once it shows.
    let plateau = match shot.frame {
        Frame::Radial { .. } => T::infinity(),
        Frame::Translated { .. } => b * (T::one() - lit(HEAD_RESOLUTION)),
    };
    for (x, y) in samples {
        let (rv, fv, fpv) = match shot.frame {
            Frame::Radial { .. } => (x, y[0], y[1]),
            Frame::Translated { .. } => p.translated_to_radial(b, x, &y),
        };
        if fv > plateau {
            continue;
        }
        if r.last().is_none_or(|&last| rv > last) {
            r.push(rv);
            f.push(fv);
            fp.push(fpv);
        }
    }
    RadialProfile::new(*p, ProfileKind::Regular { b }, r, f, fp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ShootConfig<f64> {
        ShootConfig::default()
    }

    fn class(d: u32, b: f64, lambda: f64) -> ShotTag {
        let p = ModelParams::new(d, lambda).unwrap();
        classify_regular(&p, &ShotParams::new(b).unwrap(), &cfg())
            .unwrap()
            .tag
    }

    #[test]
    fn bracket_ends_classify() {
        assert_eq!(class(5, 1.0, 5.0), ShotTag::HitZero);
        assert_eq!(class(5, 1.0, 0.0), ShotTag::TurnedUp);
        assert_eq!(class(5, 200.0, 5.0), ShotTag::HitZero);
        assert_eq!(class(5, 200.0, 0.0), ShotTag::TurnedUp);
        assert_eq!(class(5, 1.0, -3.0), ShotTag::TurnedUp);
    }

    #[test]
    fn trial_shots_straddle_the_eigenvalue() {
        let gs = solve_lambda(5, 10.0, &cfg()).unwrap();
        let below = trial_shot(5, 10.0, gs.lambda - 1e-3, &cfg()).unwrap();
        let above = trial_shot(5, 10.0, gs.lambda + 1e-3, &cfg()).unwrap();
        assert_eq!(below.class.tag, ShotTag::TurnedUp);
        assert_eq!(above.class.tag, ShotTag::HitZero);
        assert!(above.profile.f().iter().all(|&f| f > -1e-12));
        assert!(trial_shot(5, -1.0, 4.0, &cfg()).is_err());
    }

    #[test]
    fn small_amplitude_law() {
        let gs = solve_lambda(5, 0.1, &cfg()).unwrap();
        let want = 5.0 - 2f64.powf(-2.5) * 0.01;
        assert!((gs.lambda - want).abs() <= 1e-4, "{}", gs.lambda);
    }

    #[test]
    fn opposite_classes_around_eigenvalue() {
        let gs = solve_lambda(5, 10.0, &cfg()).unwrap();
        assert!(gs.eigen.bracket_width <= 1e-12);
        let lo = gs.lambda - 1e-12;
        let hi = gs.lambda + 1e-12;
        assert_eq!(class(5, 10.0, lo), ShotTag::TurnedUp);
        assert_eq!(class(5, 10.0, hi), ShotTag::HitZero);
    }

    #[test]
    fn ground_state_invariants_at_b1() {
        for d in 5..=13 {
            let gs = solve_lambda(d, 1.0, &cfg()).unwrap();
            assert!(
                gs.invariant_violations().is_empty(),
                "d = {d}: {:?}",
                gs.invariant_violations()
            );
            assert!(gs.tail_c > 0.0 && gs.tail_spread < 0.01);
            if d == 5 {
                assert!(gs.functionals.pohozaev_residual < 1e-6);
            }
        }
    }

    #[test]
    fn translated_and_radial_frames_agree() {
        let mut a = cfg();
        a.translate_above = 1e9;
        let mut t = cfg();
        t.translate_above = 1.0;
        let la = solve_lambda(6, 20.0, &a).unwrap().lambda;
        let lt = solve_lambda(6, 20.0, &t).unwrap().lambda;
        assert!((la - lt).abs() < 1e-10, "{la} vs {lt}");
    }
}
