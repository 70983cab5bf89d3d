//! The differential systems, each as a two-component first order system.

use crate::error::{Error, Result};
use crate::integrator::OdeSystem;
use crate::scalar::{to_f64, Real};

use super::ModelParams;

/// Radial stationary equation in `r`, state `(f, f')`:
/// `f'' = -((d-1)/r) f' + r² f - λ f - f³`.
#[derive(Clone, Copy, Debug)]
pub struct RadialSystem<T> {
    pub params: ModelParams<T>,
}

impl<T: Real> RadialSystem<T> {
    pub fn second_derivative(&self, r: T, f: T, fp: T) -> Result<T> {
        if r <= T::zero() {
            return Err(Error::SingularPoint { r: to_f64(r) });
        }
        Ok(self.rhs(r, &[f, fp])[1])
    }
}

impl<T: Real> OdeSystem<T, 2> for RadialSystem<T> {
    fn rhs(&self, r: T, y: &[T; 2]) -> [T; 2] {
        let p = &self.params;
        let (f, fp) = (y[0], y[1]);
        [fp, -(p.dm(1) / r) * fp + (r * r - p.lambda) * f - f * f * f]
    }
}

/// Regular equation after `r = e^t`, state `(ψ, ψ')`:
/// `ψ'' = -(d-2) ψ' - e^{2t}(λψ + ψ³) + e^{4t} ψ`.
#[derive(Clone, Copy, Debug)]
pub struct EmdenSystem<T> {
    pub params: ModelParams<T>,
}

impl<T: Real> OdeSystem<T, 2> for EmdenSystem<T> {
    fn rhs(&self, t: T, y: &[T; 2]) -> [T; 2] {
        let p = &self.params;
        let (psi, dpsi) = (y[0], y[1]);
        let e2 = (t + t).exp();
        [
            dpsi,
            -p.dm(2) * dpsi - e2 * (p.lambda * psi + psi * psi * psi) + e2 * e2 * psi,
        ]
    }
}

/// Equation for `Ψ = e^t ψ`, state `(Ψ, Ψ')`:
/// `Ψ'' = -(d-4) Ψ' + (d-3) Ψ - Ψ³ - λ e^{2t} Ψ + e^{4t} Ψ`.
#[derive(Clone, Copy, Debug)]
pub struct SingularEmdenSystem<T> {
    pub params: ModelParams<T>,
}

impl<T: Real> OdeSystem<T, 2> for SingularEmdenSystem<T> {
    fn rhs(&self, t: T, y: &[T; 2]) -> [T; 2] {
        let p = &self.params;
        let (v, dv) = (y[0], y[1]);
        let e2 = (t + t).exp();
        [
            dv,
            -p.dm(4) * dv + (p.dm(3) - v * v) * v + (e2 * e2 - p.lambda * e2) * v,
        ]
    }
}

/// Equation for `F = r f` in `r`, state `(F, F')`:
/// `F'' = -((d-3)/r) F' + ((d-3) F - F³)/r² + r² F - λ F`.
#[derive(Clone, Copy, Debug)]
pub struct SingularRadialSystem<T> {
    pub params: ModelParams<T>,
}

impl<T: Real> OdeSystem<T, 2> for SingularRadialSystem<T> {
    fn rhs(&self, r: T, y: &[T; 2]) -> [T; 2] {
        let p = &self.params;
        let (v, dv) = (y[0], y[1]);
        let k = p.dm(3);
        [
            dv,
            -(k / r) * dv + (k - v * v) * v / (r * r) + (r * r - p.lambda) * v,
        ]
    }
}

/// Autonomous truncation, state `(Θ, Θ')`:
/// `Θ'' = -(d-4) Θ' + (d-3) Θ - Θ³`.
#[derive(Clone, Copy, Debug)]
pub struct TruncatedSystem<T> {
    pub d: u32,
    k3: T,
    k4: T,
}

impl<T: Real> TruncatedSystem<T> {
    pub fn new(d: u32) -> Self {
        let d_t = T::from_u32(d).expect("dimension fits scalar");
        Self {
            d,
            k3: d_t - T::from_u32(3).unwrap(),
            k4: d_t - T::from_u32(4).unwrap(),
        }
    }

    /// `V = ½Θ'² + ½(3-d)Θ² + ¼Θ⁴`, non-increasing along orbits for `d >= 4`.
    pub fn energy(&self, theta: T, dtheta: T) -> T {
        let half = T::from_f64(0.5).unwrap();
        let quarter = T::from_f64(0.25).unwrap();
        half * dtheta * dtheta - half * self.k3 * theta * theta + quarter * theta.powi(4)
    }
}

impl<T: Real> OdeSystem<T, 2> for TruncatedSystem<T> {
    fn rhs(&self, _t: T, y: &[T; 2]) -> [T; 2] {
        let (v, dv) = (y[0], y[1]);
        [dv, -self.k4 * dv + (self.k3 - v * v) * v]
    }
}

/// `Ψ_b(s - ln b)` in the shifted time `s`, state `(Ψ, w)` with `w = Ψ' - Ψ`.
///
/// With `t = s - ln b` and `r = e^t`, `Ψ = e^t f(r)` and `w = e^{2t} f'(r)`, so
/// `f = 0` and `f' = 0` are the zeros of the two components. The state stays
/// of size `sqrt(d-3)` for every `b`, and the sign of `w` is carried without
/// cancellation near the origin.
#[derive(Clone, Copy, Debug)]
pub struct TranslatedEmdenSystem<T> {
    pub params: ModelParams<T>,
    pub b: T,
    ln_b: T,
}

impl<T: Real> TranslatedEmdenSystem<T> {
    pub fn new(params: ModelParams<T>, b: T) -> Self {
        Self {
            params,
            b,
            ln_b: b.ln(),
        }
    }

    pub fn ln_b(&self) -> T {
        self.ln_b
    }

    /// Radius `r = e^s / b`.
    pub fn radius(&self, s: T) -> T {
        (s - self.ln_b).exp()
    }
}

impl<T: Real> OdeSystem<T, 2> for TranslatedEmdenSystem<T> {
    fn rhs(&self, s: T, y: &[T; 2]) -> [T; 2] {
        let p = &self.params;
        let (v, w) = (y[0], y[1]);
        let r = self.radius(s);
        let r2 = r * r;
        [w + v, -p.dm(3) * w - v * (v * v + p.lambda * r2 - r2 * r2)]
    }
}
