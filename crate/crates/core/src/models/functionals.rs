//! Radial integrals of a sampled profile.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

use super::profile::{hermite5, tail_shape, RadialProfile, TailLaw};

/// Radial integrals `∫ · r^{d-1} dr` and the diagnostics built from them.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Functionals<T> {
    /// `‖f‖² = ∫ f² r^{d-1} dr`.
    pub mass: T,
    /// `∫ (f'² + r² f² - ½ f⁴) r^{d-1} dr`.
    pub energy: T,
    /// Relative defect of `4‖rf‖² - 2λ‖f‖² + ½(d-4)‖f‖⁴₄ = 0`.
    pub pohozaev_residual: T,
    /// `λ - (d-4) - (8/d) ‖rf‖²/‖f‖²`.
    pub bound1_slack: T,
    pub norm_rf2: T,
    pub norm_f4: T,
    pub norm_fp2: T,
}

const TAIL_LENGTH: f64 = 12.0;
const TAIL_PANELS: usize = 60;

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
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

fn gauss_legendre<T: Real>(a: T, b: T, mut visit: impl FnMut(T, T)) {
    let half: T = lit(0.5);
    let (mid, rad) = ((a + b) * half, (b - a) * half);
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        visit(mid + rad * lit(*x), rad * lit(w));
    }
}

#[derive(Clone, Copy)]
struct Acc<T> {
    f2: T,
    rf2: T,
    f4: T,
    fp2: T,
}

impl<T: Real> Acc<T> {
    fn zero() -> Self {
        Self {
            f2: T::zero(),
            rf2: T::zero(),
            f4: T::zero(),
            fp2: T::zero(),
        }
    }

    /// Adds `w * integrand(r, f, f') * r^{d-1} * jac`.
    fn add(&mut self, w: T, r: T, f: T, fp: T, rd1: T) {
        let f2 = f * f * rd1 * w;
        self.f2 = self.f2 + f2;
        self.rf2 = self.rf2 + r * r * f2;
        self.f4 = self.f4 + f * f * f2;
        self.fp2 = self.fp2 + fp * fp * rd1 * w;
    }
}

/// Integrals of `profile` over `(0, ∞)`.
///
/// Between samples `f` and `f'` use quintic Hermite interpolation in `ln r`,
/// with the higher derivatives taken from the equation. The piece
/// below the first sample is closed with the local power law of `f`, and the
/// piece beyond the last sample with `tail_c` times the Kummer tail law.
pub fn functionals<T: Real>(profile: &RadialProfile<T>, tail_c: T) -> Result<Functionals<T>> {
    let p = &profile.params;
    let fmax = profile.max_abs();
    if fmax == T::zero() {
        return Ok(Functionals::default());
    }
    let n = profile.len();
    let (r, f, fp) = (profile.r(), profile.f(), profile.fp());
    let ratio = f[n - 1].abs() / fmax;
    if ratio > lit(1e-4) {
        return Err(Error::UndecayedTail {
            ratio: to_f64(ratio),
        });
    }
    let d = p.d as i32;
    let mut acc = Acc::zero();

    // Head: f ≈ f0 (r/r0)^q on (0, r0].
    let (r0, f0, fp0) = (r[0], f[0], fp[0]);
    let q = if f0 != T::zero() {
        r0 * fp0 / f0
    } else {
        T::zero()
    };
    let dd = p.dim();
    let two: T = lit(2.0);
    let four: T = lit(4.0);
    let r0d = r0.powi(d);
    acc.f2 = f0 * f0 * r0d / (two * q + dd);
    acc.rf2 = f0 * f0 * r0d * r0 * r0 / (two * q + dd + two);
    acc.f4 = f0.powi(4) * r0d / (four * q + dd);
    acc.fp2 = fp0 * fp0 * r0d / (two * q + dd);

    // Body: Gauss-Legendre in t = ln r on each sample interval.
    for i in 0..n - 1 {
        let (t0, t1) = (r[i].ln(), r[i + 1].ln());
        // Derivatives in t: (r ∂_r) and (r ∂_r)² of f and f'.
        let jet = |j: usize| {
            let (x, g1, g2, g3) = (r[j], fp[j], profile.fpp(j), profile.fppp(j));
            (x * g1, x * g1 + x * x * g2, x * g2, x * g2 + x * x * g3)
        };
        let (a0, aa0, b0, bb0) = jet(i);
        let (a1, aa1, b1, bb1) = jet(i + 1);
        gauss_legendre(t0, t1, |t, w| {
            let rv = t.exp();
            let fv = hermite5(t0, t1, [f[i], a0, aa0], [f[i + 1], a1, aa1], t);
            let fpv = hermite5(t0, t1, [fp[i], b0, bb0], [fp[i + 1], b1, bb1], t);
            // dr = r dt, so the weight picks up r^d.
            acc.add(w, rv, fv, fpv, rv.powi(d));
        });
    }

    // Tail: the decay law on [r_max, r_max + TAIL_LENGTH].
    if tail_c != T::zero() {
        let a = profile.r_max();
        let h = lit::<T>(TAIL_LENGTH) / from_usize(TAIL_PANELS);
        for k in 0..TAIL_PANELS {
            let lo = a + h * from_usize(k);
            gauss_legendre(lo, lo + h, |x, w| {
                let (g, gp) = tail_shape(p.d, p.lambda, x, TailLaw::Kummer);
                acc.add(w, x, tail_c * g, tail_c * gp, x.powi(d - 1));
            });
        }
    }

    let half: T = lit(0.5);
    let k4 = p.dm(4);
    let poho = four * acc.rf2 - two * p.lambda * acc.f2 + half * k4 * acc.f4;
    let scale = four * acc.rf2 + two * p.lambda.abs() * acc.f2 + half * k4 * acc.f4;
    Ok(Functionals {
        mass: acc.f2,
        energy: acc.fp2 + acc.rf2 - half * acc.f4,
        pohozaev_residual: poho.abs() / scale,
        bound1_slack: p.lambda - k4 - lit::<T>(8.0) / dd * acc.rf2 / acc.f2,
        norm_rf2: acc.rf2,
        norm_f4: acc.f4,
        norm_fp2: acc.fp2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ModelParams, ProfileKind};
    use approx::assert_relative_eq;

    const EPS: f64 = 1e-6;

    /// `EPS e^{-r²/2}`; with λ = d it solves the equation up to the cubic
    /// term, which is `EPS²` smaller.
    fn gaussian(d: u32, step: f64) -> RadialProfile<f64> {
        let r: Vec<f64> = (1..)
            .map(|i| i as f64 * step)
            .take_while(|&x| x <= 6.0)
            .collect();
        let f = r.iter().map(|&x| EPS * (-x * x / 2.0).exp()).collect();
        let fp = r.iter().map(|&x| -EPS * x * (-x * x / 2.0).exp()).collect();
        let p = ModelParams::new(d, d as f64).unwrap();
        RadialProfile::new(p, ProfileKind::Regular { b: 1.0 }, r, f, fp).unwrap()
    }

    /// `∫_0^∞ r^{k} e^{-a r²} dr = Γ((k+1)/2) / (2 a^{(k+1)/2})`.
    fn gauss_moment(k: i32, a: f64) -> f64 {
        let s = (k as f64 + 1.0) / 2.0;
        gamma(s) / (2.0 * a.powf(s))
    }

    fn gamma(s: f64) -> f64 {
        // Half-integer and integer arguments only.
        if (s - 0.5).abs() < 1e-12 {
            std::f64::consts::PI.sqrt()
        } else if (s - 1.0).abs() < 1e-12 {
            1.0
        } else {
            (s - 1.0) * gamma(s - 1.0)
        }
    }

    #[test]
    fn zero_profile_gives_zeros() {
        let p = ModelParams::new(5, 4.0).unwrap();
        let prof = RadialProfile::new(
            p,
            ProfileKind::Singular,
            vec![0.1, 0.2, 0.3],
            vec![0.0; 3],
            vec![0.0; 3],
        )
        .unwrap();
        assert_eq!(functionals(&prof, 0.0).unwrap(), Functionals::default());
    }

    #[test]
    fn gaussian_moments() {
        for d in [5u32, 8] {
            let prof = gaussian(d, 0.05);
            let fun = functionals(&prof, EPS).unwrap();
            let di = d as i32;
            let e2 = EPS * EPS;
            assert_relative_eq!(
                fun.mass / e2,
                gauss_moment(di - 1, 1.0),
                max_relative = 1e-10
            );
            assert_relative_eq!(
                fun.norm_rf2 / e2,
                gauss_moment(di + 1, 1.0),
                max_relative = 1e-10
            );
            assert_relative_eq!(
                fun.norm_f4 / (e2 * e2),
                gauss_moment(di - 1, 2.0),
                max_relative = 1e-9
            );
            assert_relative_eq!(
                fun.norm_fp2 / e2,
                gauss_moment(di + 1, 1.0),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn coarse_samples_still_accurate() {
        let fun = functionals(&gaussian(6, 0.2), EPS).unwrap();
        assert_relative_eq!(
            fun.mass / (EPS * EPS),
            gauss_moment(5, 1.0),
            max_relative = 1e-7
        );
    }

    #[test]
    fn undecayed_tail_rejected() {
        let p = ModelParams::new(5, 4.0).unwrap();
        let prof = RadialProfile::new(
            p,
            ProfileKind::Singular,
            vec![0.1, 0.2],
            vec![1.0, 0.5],
            vec![-1.0, -1.0],
        )
        .unwrap();
        assert!(matches!(
            functionals(&prof, 1.0),
            Err(Error::UndecayedTail { .. })
        ));
    }
}
