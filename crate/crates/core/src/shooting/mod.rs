//! Shooting on `λ`: shot classification, bisection, and the solvers built on it.

mod nondegeneracy;
mod regular;
mod singular;
mod theta;

pub use nondegeneracy::{verify_nondegeneracy, ModalCoefficient, Nondegeneracy};
pub use regular::{
    classify_regular, solve_lambda, solve_lambda_warm, trial_shot, GroundState, TrialShot,
};
pub(crate) use singular::shoot_singular;
pub use singular::{classify_singular, solve_lambda_inf, SingularGroundState};
pub use theta::{compute_psi_b, solve_theta, PsiTrajectory, ThetaFit, ThetaOrbit};

use crate::error::{Error, Result};
use crate::integrator::{IntegrationResult, Status, StepControl, Trajectory};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Outcome of one shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShotTag {
    /// The solution reached zero while decreasing: `λ` above the eigenvalue.
    HitZero,
    /// The derivative vanished with the solution positive: `λ` below it.
    TurnedUp,
    /// Reached the stop radius below the floor without either event.
    Undetermined,
}

impl std::fmt::Display for ShotTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ShotTag::HitZero => "HitZero",
            ShotTag::TurnedUp => "TurnedUp",
            ShotTag::Undetermined => "Undetermined",
        };
        f.write_str(s)
    }
}

/// Classified shot: tag, radius of the terminal event, and `f` there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotClass<T> {
    pub tag: ShotTag,
    pub location: Option<T>,
    pub end_value: T,
}

/// Numerical settings shared by every shot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootConfig<T> {
    /// Start radius for `b <= 1`; divided by `b` above.
    pub r0: T,
    /// Start of the translated and truncated orbits in `s = t + ln b`.
    pub s0: T,
    /// Start radius of the singular shot.
    pub singular_r0: T,
    /// Shots stop at `r = sqrt(d) + r_margin`.
    pub r_margin: T,
    /// A shot ending without an event must have `|f| < value_floor * f(0)`.
    pub value_floor: T,
    /// Amplitudes above this use the translated system.
    pub translate_above: T,
    pub lambda_tol: T,
    /// Profile samples per accepted step.
    pub profile_subdiv: usize,
    pub control: StepControl<T>,
}

impl<T: Real> Default for ShootConfig<T> {
    fn default() -> Self {
        Self {
            r0: lit(1e-4),
            s0: lit(-12.0),
            singular_r0: lit(1e-4),
            r_margin: lit(8.0),
            value_floor: lit(1e-9),
            translate_above: lit(50.0),
            lambda_tol: lit(1e-12),
            profile_subdiv: 4,
            control: StepControl {
                abs_tol: lit(1e-20),
                ..StepControl::default()
            },
        }
    }
}

impl<T: Real> ShootConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.control.validate()?;
        let bad = |what: &str| Err(Error::Parameter(what.to_string()));
        if !(self.lambda_tol >= lit(1e-13)) {
            return bad("lambda_tol must be at least 1e-13");
        }
        if !(self.r0 > T::zero()) || !(self.singular_r0 > T::zero()) {
            return bad("start radii must be positive");
        }
        if !(self.r_margin > T::one()) {
            return bad("r_margin must exceed 1");
        }
        if !(self.value_floor > T::zero()) {
            return bad("value_floor must be positive");
        }
        if self.s0 > lit(-10.0) {
            return bad("s0 must be at most -10");
        }
        if self.profile_subdiv == 0 {
            return bad("profile_subdiv must be positive");
        }
        Ok(())
    }

    pub fn r_stop(&self, d: u32) -> T {
        T::from_u32(d).unwrap().sqrt() + self.r_margin
    }

    /// Retry settings for an undetermined shot.
    pub(crate) fn tightened(&self) -> Self {
        Self {
            value_floor: self.value_floor * lit(0.01),
            r_margin: self.r_margin + lit(4.0),
            ..*self
        }
    }
}

/// Result of a bisection on `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult<T> {
    pub lambda: T,
    pub bracket_width: T,
    pub shots: usize,
    pub classification_log: Vec<(T, ShotClass<T>)>,
    pub anomalies: Vec<String>,
}

pub(crate) fn check_status<T: Real, const N: usize>(
    out: &IntegrationResult<T, N>,
    context: impl FnOnce() -> String,
) -> Result<()> {
    if let Status::StepFailure(fail) = out.status {
        return Err(Error::Shot {
            context: context(),
            detail: format!("{fail:?}"),
        });
    }
    Ok(())
}

/// States at the accepted steps and `subdiv - 1` dense points between each.
pub(crate) fn sample_dense<T: Real, const N: usize>(
    traj: &Trajectory<T, N>,
    subdiv: usize,
) -> Result<Vec<(T, [T; N])>> {
    let times = traj.times();
    let n = times.len();
    let mut cur = traj.cursor();
    let mut out = Vec::with_capacity((n - 1) * subdiv + 1);
    for i in 0..n - 1 {
        out.push((times[i], traj.states()[i]));
        for k in 1..subdiv {
            let x = times[i] + (times[i + 1] - times[i]) * from_usize::<T>(k) / from_usize(subdiv);
            out.push((x, cur.eval(x)?));
        }
    }
    out.push((times[n - 1], traj.states()[n - 1]));
    Ok(out)
}

/// Bisection on `(lo, hi)` with `TurnedUp` below and `HitZero` above.
///
/// `classify(λ, tight)` runs one shot; `tight` requests the retry settings
/// for an undetermined outcome. A `guess` interval skips the shots of the
/// leading bisection steps it decides, then checks the bracket it lands on;
/// the midpoints are the same dyadic points a cold start visits.
pub(crate) fn bisect<T: Real>(
    lo: T,
    hi: T,
    tol: T,
    guess: Option<(T, T)>,
    mut classify: impl FnMut(T, bool) -> Result<ShotClass<T>>,
) -> Result<EigenResult<T>> {
    let mut log: Vec<(T, ShotClass<T>)> = Vec::new();
    let half: T = lit(0.5);
    let mut resolve = |lam: T, log: &mut Vec<(T, ShotClass<T>)>| -> Result<ShotTag> {
        let c = classify(lam, false)?;
        log.push((lam, c));
        if c.tag != ShotTag::Undetermined {
            return Ok(c.tag);
        }
        let c = classify(lam, true)?;
        log.push((lam, c));
        Ok(c.tag)
    };

    let (lo0, hi0) = (lo, hi);
    let tag_lo = resolve(lo0, &mut log)?;
    let tag_hi = resolve(hi0, &mut log)?;
    if tag_lo != ShotTag::TurnedUp || tag_hi != ShotTag::HitZero {
        let class = if tag_lo == tag_hi {
            tag_lo.to_string()
        } else {
            format!("{tag_lo}/{tag_hi}")
        };
        return Err(Error::BracketInvalid {
            lo: to_f64(lo0),
            hi: to_f64(hi0),
            class,
        });
    }

    let (mut lo, mut hi) = (lo0, hi0);
    if let Some((g_lo, g_hi)) = guess {
        while hi - lo > tol {
            let mid = lo + (hi - lo) * half;
            if g_hi < mid {
                hi = mid;
            } else if g_lo > mid {
                lo = mid;
            } else {
                break;
            }
        }
        let ok_lo = lo == lo0 || resolve(lo, &mut log)? == ShotTag::TurnedUp;
        let ok_hi = ok_lo && (hi == hi0 || resolve(hi, &mut log)? == ShotTag::HitZero);
        if !(ok_lo && ok_hi) {
            lo = lo0;
            hi = hi0;
        }
    }

    let mut settled = None;
    while hi - lo > tol {
        let mid = lo + (hi - lo) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        match resolve(mid, &mut log)? {
            ShotTag::HitZero => hi = mid,
            ShotTag::TurnedUp => lo = mid,
            ShotTag::Undetermined => {
                settled = Some(mid);
                break;
            }
        }
    }

    let mut anomalies = Vec::new();
    let max_up = log
        .iter()
        .filter(|(_, c)| c.tag == ShotTag::TurnedUp)
        .map(|e| e.0)
        .fold(T::neg_infinity(), T::max);
    let min_zero = log
        .iter()
        .filter(|(_, c)| c.tag == ShotTag::HitZero)
        .map(|e| e.0)
        .fold(T::infinity(), T::min);
    if max_up >= min_zero {
        anomalies.push(format!(
            "non-monotone classification: TurnedUp at {max_up:e} above HitZero at {min_zero:e}"
        ));
    }
    if let Some(mid) = settled {
        anomalies.push(format!("undetermined shot accepted at lambda = {mid:e}"));
    }
    Ok(EigenResult {
        lambda: settled.unwrap_or(lo + (hi - lo) * half),
        bracket_width: hi - lo,
        shots: log.len(),
        classification_log: log,
        anomalies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(root: f64) -> impl FnMut(f64, bool) -> Result<ShotClass<f64>> {
        move |lam, _| {
            let tag = if lam > root {
                ShotTag::HitZero
            } else {
                ShotTag::TurnedUp
            };
            Ok(ShotClass {
                tag,
                location: None,
                end_value: 0.0,
            })
        }
    }

    #[test]
    fn bisection_brackets_root() {
        let res = bisect(1.0, 5.0, 1e-12, None, oracle(std::f64::consts::PI)).unwrap();
        assert!((res.lambda - std::f64::consts::PI).abs() <= 1e-12);
        assert!(res.bracket_width <= 1e-12);
        assert!(res.anomalies.is_empty());
    }

    #[test]
    fn warm_start_is_bit_identical_and_cheaper() {
        let root = 3.7012345678;
        let cold = bisect(1.0, 5.0, 1e-12, None, oracle(root)).unwrap();
        let warm = bisect(1.0, 5.0, 1e-12, Some((3.70, 3.71)), oracle(root)).unwrap();
        assert_eq!(cold.lambda, warm.lambda);
        assert_eq!(cold.bracket_width, warm.bracket_width);
        assert!(warm.shots < cold.shots);
        // A wrong guess falls back to the cold path.
        let wrong = bisect(1.0, 5.0, 1e-12, Some((4.5, 4.6)), oracle(root)).unwrap();
        assert_eq!(cold.lambda, wrong.lambda);
    }

    #[test]
    fn same_class_endpoints_rejected() {
        let err = bisect(1.0, 5.0, 1e-12, None, oracle(10.0)).unwrap_err();
        assert!(matches!(err, Error::BracketInvalid { .. }));
    }

    #[test]
    fn undetermined_settles() {
        let cls = |lam: f64, tight: bool| {
            let tag = if (lam - 2.0).abs() < 1e-3 {
                ShotTag::Undetermined
            } else if lam > 2.0 {
                ShotTag::HitZero
            } else {
                ShotTag::TurnedUp
            };
            assert!(tag != ShotTag::Undetermined || tight || lam != 0.0);
            Ok(ShotClass {
                tag,
                location: None,
                end_value: 0.0,
            })
        };
        let res = bisect(0.0, 4.0, 1e-12, None, cls).unwrap();
        assert_eq!(res.lambda, 2.0);
        assert_eq!(res.anomalies.len(), 1);
    }

    #[test]
    fn default_config_is_valid() {
        ShootConfig::<f64>::default().validate().unwrap();
        let bad = ShootConfig::<f64> {
            lambda_tol: 1e-15,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
