//! Differential systems of the stationary radial problem, their local series
//! at the origin, characteristic exponents and the Lyapunov function.

mod functionals;
mod profile;
mod systems;

pub use functionals::{functionals, Functionals};
pub use profile::{
    decay_constant, tail_shape, DecayFit, EmdenTrajectory, ProfileKind, RadialProfile, TailLaw,
    Variable,
};
pub use systems::{
    EmdenSystem, RadialSystem, SingularEmdenSystem, SingularRadialSystem, TranslatedEmdenSystem,
    TruncatedSystem,
};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Largest start radius (or `e^{t0}`) accepted by the series initializers.
pub const MAX_SERIES_START: f64 = 1e-2;

/// Dimension and eigenvalue parameter of one equation instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub d: u32,
    pub lambda: T,
}

impl<T: Real> ModelParams<T> {
    /// Parameters for the regular problem, `d >= 4`.
    pub fn new(d: u32, lambda: T) -> Result<Self> {
        if d < 4 {
            return Err(Error::Dimension { d, min: 4 });
        }
        if !lambda.is_finite() {
            return Err(Error::Parameter(format!("lambda = {lambda} is not finite")));
        }
        Ok(Self { d, lambda })
    }

    /// Parameters for the singular problem, which needs `d >= 5`.
    pub fn singular(d: u32, lambda: T) -> Result<Self> {
        let p = Self::new(d, lambda)?;
        p.require_singular()?;
        Ok(p)
    }

    pub fn require_singular(&self) -> Result<()> {
        if self.d < 5 {
            return Err(Error::Dimension { d: self.d, min: 5 });
        }
        Ok(())
    }

    pub fn with_lambda(self, lambda: T) -> Self {
        Self { lambda, ..self }
    }

    /// `d` as a scalar.
    #[inline]
    pub fn dim(&self) -> T {
        T::from_u32(self.d).expect("dimension fits scalar")
    }

    /// `d - k` as a scalar.
    #[inline]
    pub fn dm(&self, k: u32) -> T {
        self.dim() - T::from_u32(k).expect("small integer fits scalar")
    }

    /// The regular system in `r`.
    pub fn radial(&self) -> RadialSystem<T> {
        RadialSystem { params: *self }
    }

    pub fn emden(&self) -> EmdenSystem<T> {
        EmdenSystem { params: *self }
    }

    pub fn singular_emden(&self) -> SingularEmdenSystem<T> {
        SingularEmdenSystem { params: *self }
    }

    pub fn singular_radial(&self) -> SingularRadialSystem<T> {
        SingularRadialSystem { params: *self }
    }

    pub fn translated(&self, b: T) -> TranslatedEmdenSystem<T> {
        TranslatedEmdenSystem::new(*self, b)
    }

    /// `f(r) = b e^{-s} Ψ`, `f'(r) = b² e^{-2s} w` for a translated state.
    pub fn translated_to_radial(&self, b: T, s: T, y: &[T; 2]) -> (T, T, T) {
        let r = (s - b.ln()).exp();
        (r, y[0] / r, y[1] / (r * r))
    }
}

/// Shooting amplitude `f(0) = b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotParams<T> {
    pub b: T,
}

impl<T: Real> ShotParams<T> {
    pub fn new(b: T) -> Result<Self> {
        if !(b > T::zero()) || !b.is_finite() {
            return Err(Error::Parameter(format!(
                "amplitude b = {b} must be positive"
            )));
        }
        Ok(Self { b })
    }
}

/// Open interval `(d - 4, d)` containing every ground-state eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBracket<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> SpectralBracket<T> {
    pub fn for_dimension(d: u32) -> Self {
        let d_t = T::from_u32(d).expect("dimension fits scalar");
        Self {
            lo: d_t - lit(4.0),
            hi: d_t,
        }
    }

    pub fn contains(&self, lambda: T) -> bool {
        lambda > self.lo && lambda < self.hi
    }
}

fn check_start<T: Real>(value: T) -> Result<()> {
    if !(value > T::zero()) || value > lit(MAX_SERIES_START) {
        return Err(Error::SeriesStart {
            value: to_f64(value),
            max: MAX_SERIES_START,
        });
    }
    Ok(())
}

/// `(f, f')` at `r0` from `f = b - (λb + b³) r²/(2d)`.
pub fn init_regular<T: Real>(p: &ModelParams<T>, s: &ShotParams<T>, r0: T) -> Result<(T, T)> {
    check_start(r0)?;
    let b = s.b;
    let k = p.lambda * b + b * b * b;
    let d = p.dim();
    Ok((b - k * r0 * r0 / (d + d), -k * r0 / d))
}

/// `(F, F')` at `r0` from `F = sqrt(d-3) (1 - λ r²/(4d - 10))`.
pub fn init_singular<T: Real>(p: &ModelParams<T>, r0: T) -> Result<(T, T)> {
    p.require_singular()?;
    check_start(r0)?;
    let a = p.dm(3).sqrt();
    let c1 = p.lambda / (lit::<T>(4.0) * p.dim() - lit(10.0));
    Ok((a * (T::one() - c1 * r0 * r0), -a * (c1 + c1) * r0))
}

/// `(Θ, Θ')` at `t0` on the unstable manifold of the origin.
pub fn init_theta<T: Real>(d: u32, t0: T) -> Result<(T, T)> {
    if d < 5 {
        return Err(Error::Dimension { d, min: 5 });
    }
    if t0 > lit(-10.0) {
        return Err(Error::SeriesStart {
            value: to_f64(t0.exp()),
            max: (-10.0f64).exp(),
        });
    }
    let two_d = T::from_u32(2 * d).unwrap();
    let e1 = t0.exp();
    let e3 = e1 * e1 * e1;
    Ok((e1 - e3 / two_d, e1 - lit::<T>(3.0) * e3 / two_d))
}

/// `(Ψ, w)` at shifted time `s0` for the translated system with amplitude `b`.
pub fn init_translated<T: Real>(p: &ModelParams<T>, b: T, s0: T) -> Result<(T, T)> {
    check_start(s0.exp())?;
    let d = p.dim();
    let k = p.lambda / (b * b) + T::one();
    let e1 = s0.exp();
    let e3 = e1 * e1 * e1;
    Ok((e1 - k * e3 / (d + d), -k * e3 / d))
}

/// Linearization exponents at `(sqrt(d-3), 0)`.
///
/// For `5 <= d <= 12` the roots `κ±` are complex with real part `-β`, and both
/// fields hold `-β`. For `d >= 13` they are real and `alpha` is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentPack<T> {
    pub alpha: T,
    pub beta: T,
    pub kappa_plus: T,
    pub kappa_minus: T,
    pub oscillatory: bool,
}

impl<T: Real> ExponentPack<T> {
    /// `e^{π/α}`, the limiting ratio of consecutive crossing amplitudes.
    pub fn root_ratio(&self) -> Option<T> {
        self.oscillatory.then(|| (T::PI() / self.alpha).exp())
    }
}

pub fn exponents<T: Real>(d: u32) -> Result<ExponentPack<T>> {
    if d < 5 {
        return Err(Error::Dimension { d, min: 5 });
    }
    let di = i64::from(d);
    let disc = -di * di + 16 * di - 40;
    let half: T = lit(0.5);
    let beta = T::from_i64(di - 4).unwrap() * half;
    if disc > 0 {
        let alpha = T::from_i64(disc).unwrap().sqrt() * half;
        Ok(ExponentPack {
            alpha,
            beta,
            kappa_plus: -beta,
            kappa_minus: -beta,
            oscillatory: true,
        })
    } else {
        let root = T::from_i64(-disc).unwrap().sqrt() * half;
        Ok(ExponentPack {
            alpha: T::zero(),
            beta,
            kappa_plus: -beta + root,
            kappa_minus: -beta - root,
            oscillatory: false,
        })
    }
}

/// `Λ = ½f'² + ½(λ - r²)f² + ¼f⁴`.
pub fn lyapunov<T: Real>(p: &ModelParams<T>, r: T, f: T, fp: T) -> T {
    let half: T = lit(0.5);
    half * fp * fp + half * (p.lambda - r * r) * f * f + lit::<T>(0.25) * f.powi(4)
}
