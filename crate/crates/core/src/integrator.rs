//! Adaptive Dormand–Prince 5(4) integration with dense output and event location.
//!
//! The integrator advances small fixed-size systems `y' = f(t, y)` with an
//! embedded 5(4) pair, PI step-size control and the classical fourth order
//! continuous extension. Events are sign changes of user functions `g(t, y)`;
//! they are bracketed on accepted steps and refined on the dense output with
//! the Illinois variant of regula falsi.
//!
//! Integration runs forward or backward in time depending on the sign of
//! `t_end - t0`.

use thiserror::Error;

use crate::scalar::{from_usize, lit, Real};

/// Right-hand side of an explicit first order system with `N` components.
pub trait OdeSystem<T: Real, const N: usize> {
    fn rhs(&self, t: T, y: &[T; N]) -> [T; N];
}

impl<T: Real, const N: usize, F> OdeSystem<T, N> for F
where
    F: Fn(T, &[T; N]) -> [T; N],
{
    fn rhs(&self, t: T, y: &[T; N]) -> [T; N] {
        self(t, y)
    }
}

/// Step-size and tolerance settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub h_init: T,
    pub h_min: T,
    pub h_max: T,
    pub max_steps: usize,
}

impl<T: Real> Default for StepControl<T> {
    fn default() -> Self {
        Self {
            rel_tol: lit(1e-11),
            abs_tol: lit(1e-11),
            h_init: lit(1e-6),
            h_min: lit(1e-14),
            h_max: lit(0.25),
            max_steps: 500_000,
        }
    }
}

impl<T: Real> StepControl<T> {
    /// Same control with both tolerances set to `tol`.
    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.rel_tol = tol;
        self.abs_tol = tol;
        self
    }

    /// Same control with both tolerances multiplied by `factor`.
    pub fn scale_tolerance(mut self, factor: T) -> Self {
        self.rel_tol = self.rel_tol * factor;
        self.abs_tol = self.abs_tol * factor;
        self
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let floor = T::epsilon() * lit(4.5);
        let ok = self.rel_tol > T::zero()
            && self.abs_tol > T::zero()
            && self.rel_tol >= floor.min(lit(1e-15))
            && self.h_min > T::zero()
            && self.h_min <= self.h_init
            && self.h_init <= self.h_max
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(IntegrateError::InvalidControl(format!("{self:?}")))
        }
    }
}

/// Which sign changes of an event function count as a crossing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `g` goes from negative to non-negative.
    Rising,
    /// `g` goes from positive to non-positive.
    Falling,
    Any,
}

type EventFn<'a, T, const N: usize> = Box<dyn Fn(T, &[T; N]) -> T + Send + Sync + 'a>;

/// A scalar event function watched during integration.
pub struct EventSpec<'a, T, const N: usize> {
    g: EventFn<'a, T, N>,
    pub direction: Direction,
    pub terminal: bool,
    /// Width of the final bracket in the independent variable.
    pub root_tol: T,
}

impl<'a, T: Real, const N: usize> EventSpec<'a, T, N> {
    /// Terminal event with the default root tolerance of `1e-12`.
    pub fn new(g: impl Fn(T, &[T; N]) -> T + Send + Sync + 'a, direction: Direction) -> Self {
        Self {
            g: Box::new(g),
            direction,
            terminal: true,
            root_tol: lit(1e-12),
        }
    }

    pub fn non_terminal(mut self) -> Self {
        self.terminal = false;
        self
    }

    pub fn with_root_tol(mut self, tol: T) -> Self {
        self.root_tol = tol;
        self
    }

    pub fn value(&self, t: T, y: &[T; N]) -> T {
        (self.g)(t, y)
    }

    fn crosses(&self, before: T, after: T) -> bool {
        if before == T::zero() || before.is_nan() || after.is_nan() {
            return false;
        }
        let rising = before < T::zero() && after >= T::zero();
        let falling = before > T::zero() && after <= T::zero();
        match self.direction {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Any => rising || falling,
        }
    }
}

/// A located event crossing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventHit<T, const N: usize> {
    pub index: usize,
    pub t: T,
    pub y: [T; N],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepFailure<T> {
    /// Step size fell below `h_min` with the error estimate above tolerance.
    StepSizeUnderflow {
        t: T,
    },
    /// The state or error estimate stopped being finite.
    NonFinite {
        t: T,
    },
    MaxSteps {
        t: T,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Status<T> {
    ReachedEnd,
    EventStop,
    StepFailure(StepFailure<T>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("integration span is empty (t0 == t_end)")]
    EmptySpan,
    #[error("initial state is not finite")]
    NonFiniteInitial,
    #[error("invalid step control: {0}")]
    InvalidControl(String),
    #[error("query time {t} outside trajectory span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },
}

/// Dense-output polynomial of one accepted step.
#[derive(Clone, Copy, Debug)]
struct Segment<T, const N: usize> {
    h: T,
    coeffs: [[T; N]; 5],
}

impl<T: Real, const N: usize> Segment<T, N> {
    fn eval(&self, t0: T, t: T) -> [T; N] {
        let theta = (t - t0) / self.h;
        let theta1 = T::one() - theta;
        let c = &self.coeffs;
        std::array::from_fn(|i| {
            c[0][i] + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])))
        })
    }
}

/// Accepted samples `(t, y, y')` with the dense interpolant between them.
#[derive(Clone, Debug)]
pub struct Trajectory<T, const N: usize> {
    times: Vec<T>,
    states: Vec<[T; N]>,
    derivs: Vec<[T; N]>,
    segments: Vec<Segment<T, N>>,
}

impl<T: Real, const N: usize> Trajectory<T, N> {
    fn start(t: T, y: [T; N], dy: [T; N]) -> Self {
        Self {
            times: vec![t],
            states: vec![y],
            derivs: vec![dy],
            segments: Vec::new(),
        }
    }

    fn push(&mut self, t: T, y: [T; N], dy: [T; N], seg: Segment<T, N>) {
        self.times.push(t);
        self.states.push(y);
        self.derivs.push(dy);
        self.segments.push(seg);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn states(&self) -> &[[T; N]] {
        &self.states
    }

    pub fn derivatives(&self) -> &[[T; N]] {
        &self.derivs
    }

    pub fn t_start(&self) -> T {
        self.times[0]
    }

    pub fn t_end(&self) -> T {
        self.times[self.times.len() - 1]
    }

    pub fn last_state(&self) -> [T; N] {
        self.states[self.states.len() - 1]
    }

    fn forward(&self) -> bool {
        self.t_end() >= self.t_start()
    }

    fn contains(&self, t: T) -> bool {
        let (lo, hi) = if self.forward() {
            (self.t_start(), self.t_end())
        } else {
            (self.t_end(), self.t_start())
        };
        t >= lo && t <= hi
    }

    fn out_of_span(&self, t: T) -> IntegrateError {
        IntegrateError::OutOfSpan {
            t: t.to_f64().unwrap_or(f64::NAN),
            start: self.t_start().to_f64().unwrap_or(f64::NAN),
            end: self.t_end().to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Index `i` of the segment `[times[i], times[i+1]]` containing `t`.
    fn locate(&self, t: T) -> usize {
        let fwd = self.forward();
        // first index with times[i] beyond t, in integration order
        let idx = self
            .times
            .partition_point(|&s| if fwd { s <= t } else { s >= t });
        idx.saturating_sub(1)
            .min(self.segments.len().saturating_sub(1))
    }

    fn eval_segment(&self, i: usize, t: T) -> [T; N] {
        if t == self.times[i] {
            return self.states[i];
        }
        if t == self.times[i + 1] {
            return self.states[i + 1];
        }
        self.segments[i].eval(self.times[i], t)
    }

    /// State at time `t` from the dense interpolant.
    pub fn interpolate(&self, t: T) -> Result<[T; N], IntegrateError> {
        if !self.contains(t) {
            return Err(self.out_of_span(t));
        }
        if self.segments.is_empty() {
            return Ok(self.states[0]);
        }
        Ok(self.eval_segment(self.locate(t), t))
    }

    /// Cursor for evaluating a monotone sequence of query times without rescanning.
    pub fn cursor(&self) -> Cursor<'_, T, N> {
        Cursor {
            traj: self,
            index: 0,
            probes: 0,
        }
    }
}

/// Sequential interpolation over a [`Trajectory`].
///
/// Queries must move in the integration direction; each query only walks
/// forward from the previous segment.
pub struct Cursor<'a, T, const N: usize> {
    traj: &'a Trajectory<T, N>,
    index: usize,
    probes: usize,
}

impl<T: Real, const N: usize> Cursor<'_, T, N> {
    pub fn eval(&mut self, t: T) -> Result<[T; N], IntegrateError> {
        let traj = self.traj;
        if !traj.contains(t) {
            return Err(traj.out_of_span(t));
        }
        if traj.segments.is_empty() {
            return Ok(traj.states[0]);
        }
        let fwd = traj.forward();
        let before = |a: T, b: T| if fwd { a < b } else { a > b };
        if before(t, traj.times[self.index]) {
            self.index = traj.locate(t);
            self.probes += 1;
        }
        while self.index + 1 < traj.segments.len() && before(traj.times[self.index + 1], t) {
            self.index += 1;
            self.probes += 1;
        }
        self.probes += 1;
        Ok(traj.eval_segment(self.index, t))
    }

    /// Number of segment probes performed so far.
    pub fn probes(&self) -> usize {
        self.probes
    }
}

#[derive(Clone, Debug)]
pub struct IntegrationResult<T, const N: usize> {
    pub trajectory: Trajectory<T, N>,
    pub terminal_event: Option<EventHit<T, N>>,
    /// Non-terminal crossings in the order they occurred.
    pub events: Vec<EventHit<T, N>>,
    pub status: Status<T>,
    pub stats: Stats,
}

// Dormand–Prince 5(4) coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Coeffs<T> {
    c: [T; 4],
    a: [T; 20],
    e: [T; 6],
    d: [T; 6],
}

impl<T: Real> Coeffs<T> {
    fn new() -> Self {
        Self {
            c: [lit(C2), lit(C3), lit(C4), lit(C5)],
            a: [
                lit(A21),
                lit(A31),
                lit(A32),
                lit(A41),
                lit(A42),
                lit(A43),
                lit(A51),
                lit(A52),
                lit(A53),
                lit(A54),
                lit(A61),
                lit(A62),
                lit(A63),
                lit(A64),
                lit(A65),
                lit(A71),
                lit(A73),
                lit(A74),
                lit(A75),
                lit(A76),
            ],
            e: [lit(E1), lit(E3), lit(E4), lit(E5), lit(E6), lit(E7)],
            d: [lit(D1), lit(D3), lit(D4), lit(D5), lit(D6), lit(D7)],
        }
    }
}

fn combo<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(T, &[T; N])]) -> [T; N] {
    std::array::from_fn(|i| {
        let mut acc = T::zero();
        for (w, k) in terms {
            acc = acc + *w * k[i];
        }
        y[i] + h * acc
    })
}

fn all_finite<T: Real, const N: usize>(y: &[T; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Adaptive integrator configured by a [`StepControl`].
#[derive(Clone, Copy, Debug)]
pub struct Integrator<T> {
    pub control: StepControl<T>,
}

impl<T: Real> Default for Integrator<T> {
    fn default() -> Self {
        Self::new(StepControl::default())
    }
}

struct Step<T, const N: usize> {
    y: [T; N],
    k7: [T; N],
    err: T,
    seg: Segment<T, N>,
}

impl<T: Real> Integrator<T> {
    pub fn new(control: StepControl<T>) -> Self {
        Self { control }
    }

    #[allow(clippy::too_many_arguments)]
    fn step<S: OdeSystem<T, N>, const N: usize>(
        &self,
        co: &Coeffs<T>,
        sys: &S,
        t: T,
        y: &[T; N],
        k1: &[T; N],
        h: T,
        tol: (T, T),
    ) -> Step<T, N> {
        let a = &co.a;
        let c = &co.c;
        let y2 = combo(y, h, &[(a[0], k1)]);
        let k2 = sys.rhs(t + c[0] * h, &y2);
        let y3 = combo(y, h, &[(a[1], k1), (a[2], &k2)]);
        let k3 = sys.rhs(t + c[1] * h, &y3);
        let y4 = combo(y, h, &[(a[3], k1), (a[4], &k2), (a[5], &k3)]);
        let k4 = sys.rhs(t + c[2] * h, &y4);
        let y5 = combo(y, h, &[(a[6], k1), (a[7], &k2), (a[8], &k3), (a[9], &k4)]);
        let k5 = sys.rhs(t + c[3] * h, &y5);
        let y6 = combo(
            y,
            h,
            &[
                (a[10], k1),
                (a[11], &k2),
                (a[12], &k3),
                (a[13], &k4),
                (a[14], &k5),
            ],
        );
        let k6 = sys.rhs(t + h, &y6);
        let y_new = combo(
            y,
            h,
            &[
                (a[15], k1),
                (a[16], &k3),
                (a[17], &k4),
                (a[18], &k5),
                (a[19], &k6),
            ],
        );
        let k7 = sys.rhs(t + h, &y_new);

        let e = &co.e;
        let mut sum = T::zero();
        for i in 0..N {
            let est = h
                * (e[0] * k1[i]
                    + e[1] * k3[i]
                    + e[2] * k4[i]
                    + e[3] * k5[i]
                    + e[4] * k6[i]
                    + e[5] * k7[i]);
            let sc = tol.0 + tol.1 * y[i].abs().max(y_new[i].abs());
            let q = est / sc;
            sum = sum + q * q;
        }
        let err = (sum / from_usize(N)).sqrt();

        let d = &co.d;
        let coeffs: [[T; N]; 5] = {
            let ydiff: [T; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [T; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            [
                *y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h * (d[0] * k1[i]
                        + d[1] * k3[i]
                        + d[2] * k4[i]
                        + d[3] * k5[i]
                        + d[4] * k6[i]
                        + d[5] * k7[i])
                }),
            ]
        };
        Step {
            y: y_new,
            k7,
            err,
            seg: Segment { h, coeffs },
        }
    }

    /// Integrates `sys` from `(t0, y0)` toward `t_end`, watching `events`.
    pub fn integrate<S: OdeSystem<T, N>, const N: usize>(
        &self,
        sys: &S,
        t0: T,
        y0: [T; N],
        t_end: T,
        events: &[EventSpec<'_, T, N>],
    ) -> Result<IntegrationResult<T, N>, IntegrateError> {
        self.control.validate()?;
        if t0 == t_end || !t0.is_finite() || !t_end.is_finite() {
            return Err(IntegrateError::EmptySpan);
        }
        if !all_finite(&y0) {
            return Err(IntegrateError::NonFiniteInitial);
        }
        let ctl = self.control;
        let tols = (
            effective_tolerance(ctl.abs_tol),
            effective_tolerance(ctl.rel_tol),
        );
        let co = Coeffs::<T>::new();
        let dir = (t_end - t0).signum();
        let span = (t_end - t0).abs();
        let safe: T = lit(0.9);
        let beta: T = lit(0.04);
        let expo1: T = lit(0.2 - 0.04 * 0.75);
        let fac_max: T = lit(10.0);
        let fac_min: T = lit(0.2);

        let mut stats = Stats::default();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = sys.rhs(t, &y);
        stats.rhs_evals += 1;
        let mut traj = Trajectory::start(t, y, k1);
        let mut g_prev: Vec<T> = events.iter().map(|e| e.value(t, &y)).collect();
        let mut hits = Vec::new();

        let mut h = ctl.h_init.min(ctl.h_max).min(span) * dir;
        let mut facold: T = lit(1e-4);
        let mut last_rejected = false;

        let finish = |traj, terminal, hits, status, stats| IntegrationResult {
            trajectory: traj,
            terminal_event: terminal,
            events: hits,
            status,
            stats,
        };

        if !all_finite(&k1) {
            return Ok(finish(
                traj,
                None,
                hits,
                Status::StepFailure(StepFailure::NonFinite { t }),
                stats,
            ));
        }

        loop {
            let remaining = (t_end - t) * dir;
            if remaining <= T::zero() {
                return Ok(finish(traj, None, hits, Status::ReachedEnd, stats));
            }
            if stats.accepted + stats.rejected >= ctl.max_steps {
                return Ok(finish(
                    traj,
                    None,
                    hits,
                    Status::StepFailure(StepFailure::MaxSteps { t }),
                    stats,
                ));
            }
            let mut last = false;
            if h.abs() * lit(1.01) >= remaining {
                h = remaining * dir;
                last = true;
            }

            let st = self.step(&co, sys, t, &y, &k1, h, tols);
            stats.rhs_evals += 6;

            if !st.err.is_finite() || !all_finite(&st.y) {
                stats.rejected += 1;
                h = h * fac_min;
                last_rejected = true;
                if h.abs() < ctl.h_min {
                    return Ok(finish(
                        traj,
                        None,
                        hits,
                        Status::StepFailure(StepFailure::NonFinite { t }),
                        stats,
                    ));
                }
                continue;
            }

            let fac11 = st.err.powf(expo1);
            if st.err <= T::one() {
                stats.accepted += 1;
                let t_new = if last { t_end } else { t + h };

                // event bracketing on the accepted step
                let g_new: Vec<T> = events.iter().map(|e| e.value(t_new, &st.y)).collect();
                let mut crossings: Vec<(usize, T, [T; N])> = Vec::new();
                for (i, ev) in events.iter().enumerate() {
                    if ev.crosses(g_prev[i], g_new[i]) {
                        let (tc, yc) =
                            locate_root(ev, &st.seg, t, t_new, &st.y, g_prev[i], g_new[i]);
                        crossings.push((i, tc, yc));
                    }
                }
                crossings.sort_by(|a, b| {
                    let ka = (a.1 - t) * dir;
                    let kb = (b.1 - t) * dir;
                    ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
                });
                let mut terminal = None;
                for (i, tc, yc) in crossings {
                    let hit = EventHit {
                        index: i,
                        t: tc,
                        y: yc,
                    };
                    if events[i].terminal {
                        terminal = Some(hit);
                        break;
                    }
                    hits.push(hit);
                }
                if let Some(hit) = terminal {
                    if hit.t != t {
                        let dy = sys.rhs(hit.t, &hit.y);
                        stats.rhs_evals += 1;
                        traj.push(hit.t, hit.y, dy, st.seg);
                    }
                    return Ok(finish(traj, Some(hit), hits, Status::EventStop, stats));
                }

                traj.push(t_new, st.y, st.k7, st.seg);
                t = t_new;
                y = st.y;
                k1 = st.k7;
                g_prev = g_new;

                let mut fac = fac11 / facold.powf(beta);
                fac = (fac / safe).min(T::one() / fac_min).max(T::one() / fac_max);
                facold = st.err.max(lit(1e-4));
                let mut h_new = (h / fac).abs().min(ctl.h_max);
                if last_rejected {
                    h_new = h_new.min(h.abs());
                }
                last_rejected = false;
                h = h_new * dir;
            } else {
                stats.rejected += 1;
                last_rejected = true;
                let fac = (fac11 / safe).min(T::one() / fac_min);
                h = h / fac;
                if h.abs() < ctl.h_min {
                    return Ok(finish(
                        traj,
                        None,
                        hits,
                        Status::StepFailure(StepFailure::StepSizeUnderflow { t }),
                        stats,
                    ));
                }
            }
        }
    }
}

/// Local tolerance handed to the error test: `tol * (tol / 1e-11)^0.2`.
///
/// Global error then falls slightly faster than the requested tolerance. The
/// mapping is the identity at `1e-11`.
fn effective_tolerance<T: Real>(tol: T) -> T {
    let reference: T = lit(1e-11);
    tol * (tol / reference).powf(lit(TOLERANCE_EXPONENT))
}

const TOLERANCE_EXPONENT: f64 = 0.2;

/// Illinois regula falsi on the dense output of one step.
fn locate_root<T: Real, const N: usize>(
    ev: &EventSpec<'_, T, N>,
    seg: &Segment<T, N>,
    t_a: T,
    t_b: T,
    y_b: &[T; N],
    g_a: T,
    g_b: T,
) -> (T, [T; N]) {
    if g_b == T::zero() {
        return (t_b, *y_b);
    }
    let (mut a, mut fa) = (t_a, g_a);
    let (mut b, mut fb) = (t_b, g_b);
    let mut side = 0i8;
    let tol = ev.root_tol;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if !(c > lo && c < hi) {
            c = (a + b) * lit(0.5);
        }
        let yc = seg.eval(t_a, c);
        let fc = ev.value(c, &yc);
        if fc == T::zero() {
            return (c, yc);
        }
        if (fc > T::zero()) == (fb > T::zero()) {
            b = c;
            fb = fc;
            if side == 1 {
                fa = fa * lit(0.5);
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb = fb * lit(0.5);
            }
            side = -1;
        }
    }
    // the far end of the final bracket lies on the crossed side
    let yb = if b == t_b { *y_b } else { seg.eval(t_a, b) };
    let ya = seg.eval(t_a, a);
    let ga = ev.value(a, &ya);
    let gb = ev.value(b, &yb);
    if ga.abs() < gb.abs() && ev.crosses(g_a, ga) {
        (a, ya)
    } else {
        (b, yb)
    }
}

/// Integrates with the given control; shorthand for [`Integrator::integrate`].
pub fn integrate<T: Real, S: OdeSystem<T, N>, const N: usize>(
    sys: &S,
    t0: T,
    y0: [T; N],
    t_end: T,
    control: StepControl<T>,
    events: &[EventSpec<'_, T, N>],
) -> Result<IntegrationResult<T, N>, IntegrateError> {
    Integrator::new(control).integrate(sys, t0, y0, t_end, events)
}
