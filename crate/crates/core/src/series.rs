//! Origin series of the singular solution, Padé continuation, and the
//! Padé-based estimate of `λ∞`.

use num_rational::Ratio;
use num_traits::{Num, Signed};

use crate::error::{Error, Result};
use crate::models::ModelParams;
use crate::scalar::{from_usize, lit, Real};
use crate::shooting::{bisect, shoot_singular, EigenResult, ShootConfig};

pub const MAX_TERMS: usize = 60;

/// `F(r) = sqrt(d-3) (1 + Σ_{n=1}^{N} c_n r^{2n})`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesCoeffs<T> {
    pub d: u32,
    pub lambda: T,
    /// `c_1, …, c_N`.
    pub coeffs: Vec<T>,
}

impl<T: Real> SeriesCoeffs<T> {
    /// `1, c_1, …, c_N` as a power series in `s = r²`.
    pub fn in_s(&self) -> Vec<T> {
        std::iter::once(T::one())
            .chain(self.coeffs.iter().copied())
            .collect()
    }

    /// `(F, F', F'')` of the truncated series at `r`.
    pub fn eval(&self, r: T) -> (T, T, T) {
        let a = T::from_u32(self.d - 3).unwrap().sqrt();
        let c = self.in_s();
        let s = r * r;
        let (g, gs, gss) = (
            s_derivative(&c, s, 0),
            s_derivative(&c, s, 1),
            s_derivative(&c, s, 2),
        );
        // dF/dr = 2r G'(s), d²F/dr² = 2G'(s) + 4s G''(s).
        let two: T = lit(2.0);
        (
            a * g,
            a * two * r * gs,
            a * (two * gs + lit::<T>(4.0) * s * gss),
        )
    }
}

/// `k`-th derivative of `Σ c_n s^n` at `s`.
fn s_derivative<T: Real>(c: &[T], s: T, k: usize) -> T {
    let mut acc = T::zero();
    for n in (k..c.len()).rev() {
        let fall = (0..k).fold(T::one(), |f, j| f * from_usize(n - j));
        acc = acc * s + fall * c[n];
    }
    acc
}

/// Coefficients `c_1…c_N` of the singular solution at `λ`.
///
/// With `G = F/sqrt(d-3)` the equation becomes
/// `[2n(2n+d-4) + 2(d-3)] c_n = c_{n-2} - λ c_{n-1} - (d-3) R_n`,
/// where `R_n` collects the terms of `(G³)_n` free of `c_n`.
pub fn singular_series<T: Real>(d: u32, lambda: T, n_terms: usize) -> Result<SeriesCoeffs<T>> {
    let p = ModelParams::singular(d, lambda)?;
    if n_terms == 0 || n_terms > MAX_TERMS {
        return Err(Error::Parameter(format!(
            "series length {n_terms} outside 1..={MAX_TERMS}"
        )));
    }
    let k3 = p.dm(3);
    let k4 = p.dm(4);
    let two: T = lit(2.0);
    // c[0] = 1; sq[m] = (G²)_m.
    let mut c = vec![T::one()];
    let mut sq = vec![T::one()];
    for n in 1..=n_terms {
        let nt: T = from_usize(n);
        // P_n = Σ_{i=1}^{n-1} c_i c_{n-i}: (G²)_n without its c_n part.
        let pn = (1..n).fold(T::zero(), |s, i| s + c[i] * c[n - i]);
        let rn = (1..n).fold(pn, |s, j| s + c[j] * sq[n - j]);
        let older = if n >= 2 { c[n - 2] } else { T::zero() };
        let lhs = two * nt * (two * nt + k4) + two * k3;
        let cn = (older - lambda * c[n - 1] - k3 * rn) / lhs;
        if !cn.is_finite() {
            return Err(Error::SeriesOverflow { n });
        }
        c.push(cn);
        sq.push(two * cn + pn);
    }
    Ok(SeriesCoeffs {
        d,
        lambda,
        coeffs: c[1..].to_vec(),
    })
}

/// Scalars the Padé solve runs on.
pub trait PadeField: Clone + Num + Signed + PartialOrd {
    /// Whether a pivot of size `pivot` in a column of size `scale` is zero.
    fn negligible(pivot: &Self, scale: &Self) -> bool;
}

macro_rules! float_field {
    ($t:ty) => {
        impl PadeField for $t {
            fn negligible(pivot: &Self, scale: &Self) -> bool {
                pivot.abs() <= 64.0 * <$t>::EPSILON * scale.abs()
            }
        }
    };
}
float_field!(f32);
float_field!(f64);

macro_rules! ratio_field {
    ($t:ty) => {
        impl PadeField for Ratio<$t> {
            fn negligible(pivot: &Self, _scale: &Self) -> bool {
                num_traits::Zero::is_zero(pivot)
            }
        }
    };
}
ratio_field!(i64);
ratio_field!(i128);

/// `P(s)/Q(s)` with `Q(0) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PadeApproximant<T> {
    pub num: Vec<T>,
    pub den: Vec<T>,
}

impl<T: PadeField> PadeApproximant<T> {
    pub fn degrees(&self) -> (usize, usize) {
        (self.num.len() - 1, self.den.len() - 1)
    }

    /// Taylor coefficients of `P/Q` through order `n`.
    pub fn taylor(&self, n: usize) -> Vec<T> {
        let mut out: Vec<T> = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let mut v = self.num.get(i).cloned().unwrap_or_else(T::zero);
            for j in 1..self.den.len().min(i + 1) {
                v = v - self.den[j].clone() * out[i - j].clone();
            }
            out.push(v);
        }
        out
    }
}

impl<T: Real + PadeField> PadeApproximant<T> {
    /// `(R, R')` at `s`.
    pub fn eval(&self, s: T) -> (T, T) {
        let (p, dp) = poly_with_derivative(&self.num, s);
        let (q, dq) = poly_with_derivative(&self.den, s);
        (p / q, (dp * q - p * dq) / (q * q))
    }

    /// First point of `(0, s_max]` where the denominator vanishes or comes
    /// within round-off of zero, on a grid of `samples` points.
    pub fn pole_in(&self, s_max: T, samples: usize) -> Option<T> {
        let abs: Vec<T> = self.den.iter().map(|c| c.abs()).collect();
        let floor = poly_with_derivative(&abs, s_max).0 * lit(1e-12);
        let mut prev = T::one();
        for i in 1..=samples {
            let s = s_max * from_usize(i) / from_usize(samples);
            let (q, _) = poly_with_derivative(&self.den, s);
            if q.abs() <= floor || q.signum() != prev.signum() {
                return Some(s);
            }
            prev = q;
        }
        None
    }
}

fn poly_with_derivative<T: Real>(c: &[T], s: T) -> (T, T) {
    let (mut v, mut dv) = (T::zero(), T::zero());
    for &a in c.iter().rev() {
        dv = dv * s + v;
        v = v * s + a;
    }
    (v, dv)
}

/// `[m/k]` Padé approximant of `series` (coefficients in ascending order).
pub fn pade<T: PadeField>(series: &[T], m: usize, k: usize) -> Result<PadeApproximant<T>> {
    if m + k + 1 > series.len() {
        return Err(Error::Parameter(format!(
            "[{m}/{k}] needs {} coefficients, got {}",
            m + k + 1,
            series.len()
        )));
    }
    let a = |i: isize| -> T {
        if i < 0 {
            T::zero()
        } else {
            series[i as usize].clone()
        }
    };
    // Σ_{j=1}^{k} q_j a_{i-j} = -a_i for i = m+1 … m+k.
    let mut mat: Vec<Vec<T>> = (0..k)
        .map(|row| {
            let i = (m + 1 + row) as isize;
            let mut line: Vec<T> = (1..=k).map(|j| a(i - j as isize)).collect();
            line.push(-a(i));
            line
        })
        .collect();
    let q_tail = solve(&mut mat, k).ok_or(Error::DegeneratePade { m, k })?;
    let mut den = vec![T::one()];
    den.extend(q_tail);
    let num = (0..=m)
        .map(|i| (0..=k.min(i)).fold(T::zero(), |s, j| s + den[j].clone() * a((i - j) as isize)))
        .collect();
    Ok(PadeApproximant { num, den })
}

/// Gaussian elimination with partial pivoting on an augmented `n × (n+1)` matrix.
fn solve<T: PadeField>(mat: &mut [Vec<T>], n: usize) -> Option<Vec<T>> {
    for col in 0..n {
        let scale = (0..n).fold(T::zero(), |m, r| {
            let v = mat[r][col].abs();
            if v > m {
                v
            } else {
                m
            }
        });
        let piv = (col..n).fold(col, |best, r| {
            if mat[r][col].abs() > mat[best][col].abs() {
                r
            } else {
                best
            }
        });
        if T::negligible(&mat[piv][col], &scale) {
            return None;
        }
        mat.swap(col, piv);
        let (top, rest) = mat.split_at_mut(col + 1);
        let pivot = &top[col];
        for row in rest.iter_mut() {
            let f = row[col].clone() / pivot[col].clone();
            for (v, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *v = v.clone() - f.clone() * p.clone();
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut v = mat[r][n].clone();
        for c in r + 1..n {
            v = v - mat[r][c].clone() * x[c].clone();
        }
        x[r] = v / mat[r][r].clone();
    }
    Some(x)
}

/// Settings of the Padé estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PadeConfig<T> {
    pub n_terms: usize,
    /// Requested `[m/k]`; degenerate entries step down the diagonal to the
    /// first solvable `[m-j/k-j]`.
    pub m: usize,
    pub k: usize,
    pub r_match: T,
    /// Factor applied to `r_match` on the single retry after a pole.
    pub shrink: T,
}

impl<T: Real> Default for PadeConfig<T> {
    fn default() -> Self {
        Self {
            n_terms: 40,
            m: 20,
            k: 20,
            r_match: lit(1.5),
            shrink: lit(0.8),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PadeEstimate<T> {
    pub lambda_inf: T,
    pub eigen: EigenResult<T>,
    /// Smallest matching radius used during the bisection.
    pub r_match_min: T,
    /// Lowest `[m/k]` used during the bisection.
    pub order_min: (usize, usize),
}

/// The requested entry, or the closest solvable one below it on its diagonal.
pub fn pade_stepping_down<T: PadeField>(
    series: &[T],
    m: usize,
    k: usize,
) -> Result<PadeApproximant<T>> {
    let mut last = Error::DegeneratePade { m, k };
    for j in 0..=m.min(k) {
        match pade(series, m - j, k - j) {
            Ok(ap) => return Ok(ap),
            Err(e @ Error::DegeneratePade { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// `λ∞` from Padé-continued Cauchy data at `r_match` and onward shooting.
pub fn lambda_inf_via_pade<T: Real + PadeField>(
    d: u32,
    pc: &PadeConfig<T>,
    cfg: &ShootConfig<T>,
) -> Result<PadeEstimate<T>> {
    cfg.validate()?;
    let base = ModelParams::singular(d, T::zero())?;
    if pc.m + pc.k > pc.n_terms {
        return Err(Error::Parameter(format!(
            "[{}/{}] needs at least {} terms",
            pc.m,
            pc.k,
            pc.m + pc.k
        )));
    }
    if !(pc.r_match > T::zero()) || !(pc.shrink > T::zero() && pc.shrink < T::one()) {
        return Err(Error::Parameter(
            "r_match must be positive and shrink in (0, 1)".into(),
        ));
    }
    let a = base.dm(3).sqrt();
    let tight = cfg.tightened();
    let mut r_min = pc.r_match;
    let mut order_min = (pc.m, pc.k);
    let eigen = bisect(T::zero(), base.dim(), cfg.lambda_tol, None, |lam, retry| {
        let p = base.with_lambda(lam);
        let series = singular_series(d, lam, pc.n_terms)?;
        let approx = pade_stepping_down(&series.in_s(), pc.m, pc.k)?;
        let order = approx.degrees();
        if order.0 + order.1 < order_min.0 + order_min.1 {
            order_min = order;
        }
        let mut r = pc.r_match;
        if approx.pole_in(r * r, 2000).is_some() {
            r = r * pc.shrink;
            if let Some(s) = approx.pole_in(r * r, 2000) {
                return Err(Error::PadePole {
                    s: s.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        r_min = r_min.min(r);
        let (g, gs) = approx.eval(r * r);
        let y0 = [a * g, a * lit::<T>(2.0) * r * gs];
        let c = if retry { &tight } else { cfg };
        Ok(shoot_singular(&p, c, r, y0)?.class)
    })?;
    Ok(PadeEstimate {
        lambda_inf: eigen.lambda,
        eigen,
        r_match_min: r_min,
        order_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn residual(sc: &SeriesCoeffs<f64>, r: f64) -> f64 {
        let (f, fp, fpp) = sc.eval(r);
        let d = sc.d as f64;
        fpp + (d - 3.0) / r * fp - ((d - 3.0) * f - f * f * f) / (r * r) - r * r * f + sc.lambda * f
    }

    #[test]
    fn first_coefficient() {
        let sc = singular_series(5, 4.01036, 5).unwrap();
        assert!((sc.coeffs[0] + 0.401036).abs() < 1e-15);
        let zero = singular_series(7, 0.0, 5).unwrap();
        assert_eq!(zero.coeffs[0], 0.0);
        assert!(singular_series(4, 1.0, 5).is_err());
        assert!(singular_series(5, 1.0, 61).is_err());
    }

    #[test]
    fn residual_decays_at_order_2n() {
        for (d, lam, n) in [
            (5, 4.0, 2),
            (7, 1.3, 3),
            (9, 8.2, 2),
            (13, 12.9, 3),
            (20, 3.3, 2),
        ] {
            let sc = singular_series(d, lam, n).unwrap();
            let (r1, r2) = (0.05f64, 0.2f64);
            let slope =
                (residual(&sc, r2).abs().ln() - residual(&sc, r1).abs().ln()) / (r2.ln() - r1.ln());
            assert!(
                (slope - 2.0 * n as f64).abs() < 0.5,
                "d = {d}: slope {slope}"
            );
        }
    }

    #[test]
    fn exponential_one_one() {
        let one = Ratio::<i64>::from_integer(1);
        let half = Ratio::new(1, 2);
        let ap = pade(&[one, one, half], 1, 1).unwrap();
        assert_eq!(ap.num, vec![one, half]);
        assert_eq!(ap.den, vec![one, -half]);
    }

    #[test]
    fn zero_zero_is_constant_term() {
        let ap = pade(&[3.5f64, 1.0, 2.0], 0, 0).unwrap();
        assert_eq!(ap.num, vec![3.5]);
        assert_eq!(ap.den, vec![1.0]);
    }

    #[test]
    fn degenerate_entry_rejected() {
        // 1 + s² has no [1/1] entry.
        let one = Ratio::<i64>::from_integer(1);
        let zero = Ratio::<i64>::from_integer(0);
        assert!(matches!(
            pade(&[one, zero, one], 1, 1),
            Err(Error::DegeneratePade { .. })
        ));
        let ap = pade_stepping_down(&[one, zero, one], 1, 1).unwrap();
        assert_eq!(ap.degrees(), (0, 0));
    }

    #[test]
    fn pole_detected() {
        // [0/1] of Σ s^n is 1/(1 - s).
        let ap = pade(&[1.0f64, 1.0, 1.0], 0, 1).unwrap();
        assert!(ap.pole_in(0.9, 100).is_none());
        let s = ap.pole_in(1.5, 1500).unwrap();
        assert!((s - 1.0).abs() < 2e-3);
    }

    #[test]
    fn pade_of_singular_series_extends_it() {
        let cfg = ShootConfig::<f64>::default();
        let sg = crate::shooting::solve_lambda_inf(5, &cfg).unwrap();
        let series = singular_series(5, sg.lambda_inf, 40).unwrap();
        let ap = pade_stepping_down(&series.in_s(), 20, 20).unwrap();
        let a = 2f64.sqrt();
        for r in [0.5, 1.0, 1.5] {
            let want = sg.f_profile.interpolate(r).unwrap();
            let (g, _) = ap.eval(r * r);
            assert!((a * g - want).abs() < 1e-6, "r = {r}: {} vs {want}", a * g);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn reexpansion_matches_series(coeffs in proptest::collection::vec(-20i64..20, 10), m in 0usize..5, k in 0usize..5) {
                let series: Vec<Ratio<i128>> = coeffs.iter().map(|&c| Ratio::new(c as i128, 7)).collect();
                if let Ok(ap) = pade(&series, m, k) {
                    let back = ap.taylor(m + k);
                    prop_assert_eq!(&back[..], &series[..=m + k]);
                }
            }

            #[test]
            fn float_recovers_rational_function(
                num in proptest::collection::vec(-1.0f64..1.0, 5),
                roots in proptest::collection::vec(1.5f64..3.0, 4),
                signs in proptest::collection::vec(proptest::bool::ANY, 4),
            ) {
                // Q(s) = Π (1 - s/z_i); its Taylor series times P gives the input.
                let mut den = vec![1.0f64];
                for (z, neg) in roots.iter().zip(&signs) {
                    let z = if *neg { -z } else { *z };
                    let mut next = vec![0.0; den.len() + 1];
                    for (i, c) in den.iter().enumerate() {
                        next[i] += c;
                        next[i + 1] -= c / z;
                    }
                    den = next;
                }
                let exact = PadeApproximant { num: num.clone(), den };
                let series = exact.taylor(8);
                let ap = pade(&series, 4, 4).unwrap();
                for (x, y) in ap.taylor(8).iter().zip(&series) {
                    prop_assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()));
                }
            }
        }
    }
}
