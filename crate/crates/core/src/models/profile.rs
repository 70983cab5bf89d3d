//! Sampled solutions and the Gaussian tail law.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

use super::{lyapunov, ModelParams};

/// Where a radial profile came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileKind<T> {
    /// Regular solution with `f(0) = b`.
    Regular { b: T },
    /// `f = F/r` for the singular solution.
    Singular,
}

/// Samples `(r, f, f')` of a radial solution.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile<T> {
    pub params: ModelParams<T>,
    pub kind: ProfileKind<T>,
    r: Vec<T>,
    f: Vec<T>,
    fp: Vec<T>,
}

fn check_samples<T: Real>(x: &[T], cols: &[&[T]]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::Profile("need at least two samples".into()));
    }
    if cols.iter().any(|c| c.len() != x.len()) {
        return Err(Error::Profile("column lengths differ".into()));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Profile("abscissae not strictly increasing".into()));
    }
    if x.iter()
        .chain(cols.iter().flat_map(|c| c.iter()))
        .any(|v| !v.is_finite())
    {
        return Err(Error::Profile("non-finite sample".into()));
    }
    Ok(())
}

impl<T: Real> RadialProfile<T> {
    pub fn new(
        params: ModelParams<T>,
        kind: ProfileKind<T>,
        r: Vec<T>,
        f: Vec<T>,
        fp: Vec<T>,
    ) -> Result<Self> {
        check_samples(&r, &[&f, &fp])?;
        if !(r[0] > T::zero()) {
            return Err(Error::Profile("radii must be positive".into()));
        }
        Ok(Self {
            params,
            kind,
            r,
            f,
            fp,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r(&self) -> &[T] {
        &self.r
    }

    pub fn f(&self) -> &[T] {
        &self.f
    }

    pub fn fp(&self) -> &[T] {
        &self.fp
    }

    pub fn r_max(&self) -> T {
        self.r[self.r.len() - 1]
    }

    pub fn max_abs(&self) -> T {
        self.f.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Drops samples beyond `r_cut`, keeping at least two.
    pub fn truncate(&mut self, r_cut: T) {
        let keep = self.r.partition_point(|&r| r <= r_cut).max(2);
        self.r.truncate(keep);
        self.f.truncate(keep);
        self.fp.truncate(keep);
    }

    pub fn is_positive(&self) -> bool {
        self.f.iter().all(|&v| v > T::zero())
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.f.windows(2).all(|w| w[1] < w[0])
    }

    pub fn lyapunov_values(&self) -> Vec<T> {
        (0..self.len())
            .map(|i| lyapunov(&self.params, self.r[i], self.f[i], self.fp[i]))
            .collect()
    }

    pub fn lyapunov_decreasing(&self) -> bool {
        self.lyapunov_values().windows(2).all(|w| w[1] < w[0])
    }

    /// `f''` from the equation at sample `i`.
    pub(crate) fn fpp(&self, i: usize) -> T {
        let p = &self.params;
        let (r, f, fp) = (self.r[i], self.f[i], self.fp[i]);
        -(p.dm(1) / r) * fp + (r * r - p.lambda) * f - f * f * f
    }

    /// Third derivative from the differentiated equation at sample `i`.
    pub(crate) fn fppp(&self, i: usize) -> T {
        let p = &self.params;
        let (r, f, fp) = (self.r[i], self.f[i], self.fp[i]);
        let fpp = self.fpp(i);
        let k = p.dm(1);
        k / (r * r) * fp - k / r * fpp + (r + r) * f + (r * r - p.lambda) * fp
            - lit::<T>(3.0) * f * f * fp
    }

    /// Cubic Hermite value of `f` at `r` inside interval `i`.
    pub(crate) fn hermite_f(&self, i: usize, r: T) -> T {
        hermite(
            self.r[i],
            self.r[i + 1],
            self.f[i],
            self.f[i + 1],
            self.fp[i],
            self.fp[i + 1],
            r,
        )
    }
}

/// Cubic Hermite interpolant through `(x0, y0, d0)` and `(x1, y1, d1)`.
pub(crate) fn hermite<T: Real>(x0: T, x1: T, y0: T, y1: T, d0: T, d1: T, x: T) -> T {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let one = T::one();
    let two: T = lit(2.0);
    let three: T = lit(3.0);
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = two * s3 - three * s2 + one;
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Quintic Hermite interpolant through the jets `[y, y', y'']` at `x0`, `x1`.
pub(crate) fn hermite5<T: Real>(x0: T, x1: T, j0: [T; 3], j1: [T; 3], x: T) -> T {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let c = |v: f64| -> T { lit(v) };
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = T::one() - c(10.0) * s3 + c(15.0) * s4 - c(6.0) * s5;
    let h1 = s - c(6.0) * s3 + c(8.0) * s4 - c(3.0) * s5;
    let h2 = (s2 - c(3.0) * s3 + c(3.0) * s4 - s5) * c(0.5);
    let h3 = c(10.0) * s3 - c(15.0) * s4 + c(6.0) * s5;
    let h4 = -c(4.0) * s3 + c(7.0) * s4 - c(3.0) * s5;
    let h5 = (s3 - c(2.0) * s4 + s5) * c(0.5);
    h0 * j0[0]
        + h1 * h * j0[1]
        + h2 * h * h * j0[2]
        + h3 * j1[0]
        + h4 * h * j1[1]
        + h5 * h * h * j1[2]
}

/// Which dependent variable an [`EmdenTrajectory`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variable {
    /// `ψ(t) = f(e^t)`.
    SmallPsi,
    /// `Ψ(t) = e^t ψ(t)`.
    BigPsi,
    /// `F(r) = r f(r)`; the abscissa column holds `r`.
    F,
    /// Solution of the truncated autonomous equation.
    Theta,
}

impl Variable {
    pub fn column_name(self) -> &'static str {
        match self {
            Variable::SmallPsi => "psi",
            Variable::BigPsi => "Psi",
            Variable::F => "F",
            Variable::Theta => "Theta",
        }
    }
}

/// Samples `(t, value, derivative)` of one transformed variable.
#[derive(Clone, Debug, PartialEq)]
pub struct EmdenTrajectory<T> {
    pub variable: Variable,
    t: Vec<T>,
    value: Vec<T>,
    derivative: Vec<T>,
}

impl<T: Real> EmdenTrajectory<T> {
    pub fn new(variable: Variable, t: Vec<T>, value: Vec<T>, derivative: Vec<T>) -> Result<Self> {
        check_samples(&t, &[&value, &derivative])?;
        Ok(Self {
            variable,
            t,
            value,
            derivative,
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t(&self) -> &[T] {
        &self.t
    }

    pub fn value(&self) -> &[T] {
        &self.value
    }

    pub fn derivative(&self) -> &[T] {
        &self.derivative
    }

    /// Cubic Hermite interpolation; `None` outside the sampled span.
    pub fn interpolate(&self, t: T) -> Option<T> {
        let n = self.t.len();
        if t < self.t[0] || t > self.t[n - 1] {
            return None;
        }
        let i = self.t.partition_point(|&x| x <= t).clamp(1, n - 1) - 1;
        Some(hermite(
            self.t[i],
            self.t[i + 1],
            self.value[i],
            self.value[i + 1],
            self.derivative[i],
            self.derivative[i + 1],
            t,
        ))
    }
}

/// Form of the tail law used to normalize `f` at large `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TailLaw {
    /// `r^{(λ-d)/2} e^{-r²/2}`.
    Leading,
    /// The leading law times the asymptotic series of `z^a U(a, d/2, z)`,
    /// `z = r²`, `a = (d - λ)/4`, which is exact for the linearized equation.
    #[default]
    Kummer,
}

/// `(g, g')` with `f ≈ C g(r)` in the decay regime.
pub fn tail_shape<T: Real>(d: u32, lambda: T, r: T, law: TailLaw) -> (T, T) {
    let d_t = T::from_u32(d).unwrap();
    let half: T = lit(0.5);
    let expo = (lambda - d_t) * half;
    let lead = r.powf(expo) * (-half * r * r).exp();
    let dlog = expo / r - r;
    match law {
        TailLaw::Leading => (lead, lead * dlog),
        TailLaw::Kummer => {
            let z = r * r;
            let a = (d_t - lambda) * lit(0.25);
            let c = a - d_t * half + T::one();
            let (mut sum, mut dsum) = (T::one(), T::zero());
            let mut term = T::one();
            for n in 0..30usize {
                let nt = from_usize::<T>(n);
                let next = -term * (a + nt) * (c + nt) / ((nt + T::one()) * z);
                if next.abs() >= term.abs() || next.abs() < lit::<T>(1e-17) * sum.abs() {
                    break;
                }
                term = next;
                sum = sum + term;
                // d/dz of the n+1 term is -(n+1) term / z.
                dsum = dsum - (nt + T::one()) * term / z;
            }
            let g = lead * sum;
            (g, g * dlog + lead * dsum * (r + r))
        }
    }
}

/// Plateau estimate of the tail constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit<T> {
    pub c: T,
    /// `(max - min)/mean` of `f/g` over the window.
    pub spread: T,
    pub window: (T, T),
}

const PLATEAU_WIDTH: f64 = 0.75;
const PLATEAU_STEP: f64 = 0.025;
const PLATEAU_MAX_SPREAD: f64 = 0.05;

/// Tail constant `C` in `f ≈ C g(r)`, from the flattest window of `f/g`.
///
/// Candidates lie beyond the turning radius `sqrt(λ) + 1` where `f` is
/// positive, decreasing and below `1e-4 max|f|`.
pub fn decay_constant<T: Real>(profile: &RadialProfile<T>, law: TailLaw) -> Result<DecayFit<T>> {
    let p = &profile.params;
    let r_turn = p.lambda.max(T::zero()).sqrt() + T::one();
    let small = profile.max_abs() * lit(1e-4);
    let r = profile.r();
    let n = r.len();
    let step: T = lit(PLATEAU_STEP);
    let mut grid: Vec<(T, T)> = Vec::new();
    let mut segments: Vec<Vec<(T, T)>> = Vec::new();
    for i in 0..n - 1 {
        let ok = r[i] >= r_turn
            && profile.f()[i] > T::zero()
            && profile.f()[i] <= small
            && profile.fp()[i] < T::zero();
        if !ok {
            if !grid.is_empty() {
                segments.push(std::mem::take(&mut grid));
            }
            continue;
        }
        let pieces = ((r[i + 1] - r[i]) / step)
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        for k in 0..pieces {
            let x = r[i] + (r[i + 1] - r[i]) * from_usize::<T>(k) / from_usize::<T>(pieces);
            let f = profile.hermite_f(i, x);
            let (g, _) = tail_shape(p.d, p.lambda, x, law);
            if f > T::zero() && g > T::zero() {
                grid.push((x, f / g));
            }
        }
    }
    if !grid.is_empty() {
        segments.push(grid);
    }
    let width: T = lit(PLATEAU_WIDTH);
    let mut best: Option<DecayFit<T>> = None;
    for seg in &segments {
        let mut lo = 0;
        for hi in 0..seg.len() {
            while seg[hi].0 - seg[lo].0 > width {
                lo += 1;
            }
            if seg[hi].0 - seg[lo].0 < width * lit(0.9) || hi - lo + 1 < 5 {
                continue;
            }
            let win = &seg[lo..=hi];
            let (mut mn, mut mx, mut sum) = (T::infinity(), T::neg_infinity(), T::zero());
            for &(_, q) in win {
                mn = mn.min(q);
                mx = mx.max(q);
                sum = sum + q;
            }
            let mean = sum / from_usize(win.len());
            let spread = (mx - mn) / mean;
            if best.is_none_or(|b| spread < b.spread) {
                best = Some(DecayFit {
                    c: mean,
                    spread,
                    window: (win[0].0, win[win.len() - 1].0),
                });
            }
        }
    }
    match best {
        Some(fit) if fit.spread <= lit(PLATEAU_MAX_SPREAD) => Ok(fit),
        Some(fit) => Err(Error::NoPlateau {
            spread: to_f64(fit.spread),
        }),
        None => Err(Error::NoPlateau {
            spread: f64::INFINITY,
        }),
    }
}
