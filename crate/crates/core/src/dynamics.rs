//! Explicit contact-line stepping.
//!
//! With `l = b - a`, one step of size `h` is
//!
//! ```text
//! a_half = a + (beta(a) - G(l)) h
//! b_next = b + (H(l) - beta(b)) h
//! a_next = max(a_half, b_next - ell_c)
//! ```
//!
//! The homogenized law replaces the rear and front speeds by `-r(G)` and
//! `r(H)`.

use log::warn;

use crate::beta::BetaProfile;
use crate::error::{DropletError, Result};
use crate::homog::EffectiveLaw;
use crate::params::PhysicalParams;
use crate::scalar::Real;
use crate::tables::{CriticalLength, SlopeTables};

/// Relative slack on the speed bound for the `O(h)` overshoot of the scheme.
pub const SPEED_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropState<T> {
    pub t: T,
    pub a: T,
    pub b: T,
}

impl<T: Real> DropState<T> {
    pub fn new(a: T, b: T) -> Self {
        Self { t: T::zero(), a, b }
    }

    pub fn length(&self) -> T {
        self.b - self.a
    }
}

/// Contact-line velocity law.
#[derive(Debug, Clone, Copy)]
pub enum VelocityLaw<'a, T: Real> {
    /// `a' = beta(a) - G`, `b' = H - beta(b)`.
    Raw(&'a BetaProfile<T>),
    /// `a' = -r(G)`, `b' = r(H)`.
    Homogenized(&'a EffectiveLaw<T>),
}

impl<'a, T: Real> VelocityLaw<'a, T> {
    /// Adhesion profile entering the energy diagnostic.
    pub fn beta(&self) -> &'a BetaProfile<T> {
        match self {
            VelocityLaw::Raw(beta) => beta,
            VelocityLaw::Homogenized(law) => law.beta(),
        }
    }

    /// `(a', b')` before the length constraint.
    pub fn velocities(&self, a: T, b: T, g: T, h: T) -> Result<(T, T)> {
        match self {
            VelocityLaw::Raw(beta) => Ok((beta.eval(a) - g, h - beta.eval(b))),
            VelocityLaw::Homogenized(law) => Ok((-law.r(g)?, law.r(h)?)),
        }
    }
}

/// Default collapse guard: `ell_c / 1000`, or a volume-based scale when the
/// critical length is unbounded.
pub fn default_floor<T: Real>(tables: &SlopeTables<T>) -> T {
    let scale = tables
        .critical_length()
        .finite()
        .unwrap_or_else(|| tables.params().volume().sqrt());
    scale * T::lit(1e-3)
}

/// One explicit step.
pub fn step<T: Real>(
    state: DropState<T>,
    h: T,
    law: &VelocityLaw<'_, T>,
    tables: &SlopeTables<T>,
    ell_floor: T,
) -> Result<DropState<T>> {
    if !(h > T::zero()) {
        return Err(DropletError::InvalidParameter {
            name: "h",
            value: h.as_f64(),
            reason: "step size must be positive",
        });
    }
    let (g, hh) = tables.gh(state.length())?;
    let (va, vb) = law.velocities(state.a, state.b, g, hh)?;
    let a_half = state.a + va * h;
    let b_next = state.b + vb * h;
    let a_next = match tables.critical_length() {
        CriticalLength::Finite(lc) => a_half.max(b_next - lc),
        CriticalLength::Unbounded => a_half,
    };
    let t = state.t + h;
    let ell = b_next - a_next;
    if !(ell >= ell_floor) {
        return Err(DropletError::Collapse {
            t: t.as_f64(),
            ell: ell.as_f64(),
            floor: ell_floor.as_f64(),
        });
    }
    Ok(DropState { t, a: a_next, b: b_next })
}

/// A-priori endpoint speed bound `M^2 / 2 + max beta` with
/// `M = max(2 sqrt(max beta), |u'(b)|)` at the initial length.
pub fn speed_bound<T: Real>(tables: &SlopeTables<T>, beta: &BetaProfile<T>, ell0: T) -> Result<T> {
    let ell0 = tables.critical_length().clamp(ell0);
    let front = tables.h_exact(ell0)?;
    let m_sq = (T::lit(4.0) * beta.max()).max(T::lit(2.0) * front);
    Ok(T::lit(0.5) * m_sq + beta.max())
}

#[derive(Debug, Clone, Copy)]
pub struct SimulateOptions<T> {
    /// Record a sample every `stride` steps.
    pub stride: usize,
    /// Collapse guard; `None` selects [`default_floor`].
    pub ell_floor: Option<T>,
    /// Abort when an endpoint speed exceeds the a-priori bound.
    pub check_speed: bool,
    /// Evaluate the energy at each sample.
    pub energy: bool,
}

impl<T> Default for SimulateOptions<T> {
    fn default() -> Self {
        Self {
            stride: 1,
            ell_floor: None,
            check_speed: true,
            energy: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub a: T,
    pub b: T,
    pub ell: T,
    pub lambda: T,
    pub slope_a: T,
    pub slope_b: T,
    pub energy: T,
}

impl<T: Real> Sample<T> {
    pub fn state(&self) -> DropState<T> {
        DropState { t: self.t, a: self.a, b: self.b }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub params: PhysicalParams<T>,
    pub beta: String,
    pub h: T,
    pub stride: usize,
    pub samples: Vec<Sample<T>>,
    /// Largest endpoint speed seen over all steps.
    pub max_speed: T,
    pub speed_bound: T,
}

impl<T: Real> Trajectory<T> {
    pub fn first(&self) -> &Sample<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample<T> {
        &self.samples[self.samples.len() - 1]
    }

    /// Sample spacing in time.
    pub fn dt(&self) -> T {
        self.h * T::of_usize(self.stride)
    }

    /// Front position at time `t` by linear interpolation between samples.
    pub fn b_at(&self, t: T) -> Option<T> {
        self.interpolate(t, |s| s.b)
    }

    pub fn a_at(&self, t: T) -> Option<T> {
        self.interpolate(t, |s| s.a)
    }

    fn interpolate(&self, t: T, f: impl Fn(&Sample<T>) -> T) -> Option<T> {
        let i = self.samples.partition_point(|s| s.t <= t);
        if i == 0 {
            return None;
        }
        if i == self.samples.len() {
            let last = self.last();
            return (t == last.t).then(|| f(last));
        }
        let (p, q) = (&self.samples[i - 1], &self.samples[i]);
        let w = (t - p.t) / (q.t - p.t);
        Some(f(p) + w * (f(q) - f(p)))
    }
}

fn sample<T: Real>(
    state: &DropState<T>,
    tables: &SlopeTables<T>,
    beta: &BetaProfile<T>,
    with_energy: bool,
) -> Result<Sample<T>> {
    let u = tables.profile(state.a, state.b)?;
    Ok(Sample {
        t: state.t,
        a: state.a,
        b: state.b,
        ell: state.length(),
        lambda: u.lambda(),
        slope_a: u.slope_a(),
        slope_b: u.slope_b(),
        energy: if with_energy { u.energy(beta) } else { T::nan() },
    })
}

/// Runs `round(horizon / h)` steps from `initial`.
pub fn simulate<T: Real>(
    initial: DropState<T>,
    horizon: T,
    h: T,
    law: &VelocityLaw<'_, T>,
    tables: &SlopeTables<T>,
    opts: &SimulateOptions<T>,
) -> Result<Trajectory<T>> {
    if !(horizon > T::zero()) || !(h > T::zero()) {
        return Err(DropletError::Precondition(
            "horizon and step size must be positive".into(),
        ));
    }
    if !(initial.b > initial.a) {
        return Err(DropletError::DegenerateInterval {
            a: initial.a.as_f64(),
            b: initial.b.as_f64(),
        });
    }
    let stride = opts.stride.max(1);
    let floor = opts.ell_floor.unwrap_or_else(|| default_floor(tables));
    let mut state = initial;
    if let CriticalLength::Finite(lc) = tables.critical_length() {
        if state.length() > lc {
            warn!(
                "initial length {} exceeds the critical length {}; moving the rear to b - ell_c",
                state.length(),
                lc
            );
            state.a = state.b - lc;
        }
    }
    let beta = law.beta();
    let bound = speed_bound(tables, beta, state.length())?;
    let limit = bound * (T::one() + T::lit(SPEED_SLACK));
    let steps = (horizon / h).round().to_usize().unwrap_or(0).max(1);
    let t0 = state.t;
    let mut samples = Vec::with_capacity(steps / stride + 2);
    samples.push(sample(&state, tables, beta, opts.energy)?);
    let mut max_speed = T::zero();
    for n in 1..=steps {
        let next = step(state, h, law, tables, floor)?;
        let speed = (next.a - state.a).abs().max((next.b - state.b).abs()) / h;
        max_speed = max_speed.max(speed);
        if opts.check_speed && speed > limit {
            return Err(DropletError::SpeedBound {
                t: next.t.as_f64(),
                speed: speed.as_f64(),
                bound: bound.as_f64(),
            });
        }
        state = DropState {
            t: t0 + h * T::of_usize(n),
            ..next
        };
        if n % stride == 0 || n == steps {
            samples.push(sample(&state, tables, beta, opts.energy)?);
        }
    }
    Ok(Trajectory {
        params: *tables.params(),
        beta: beta.descriptor(),
        h,
        stride,
        samples,
        max_speed,
        speed_bound: bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport<T> {
    /// Smallest value of `x2 + tol(t) - x1` over both endpoints and all samples.
    pub worst_margin: T,
    /// Time of the worst margin.
    pub worst_time: T,
    /// Whether `a1 < a2` and `b1 < b2` held at every sample.
    pub strict: bool,
    pub holds: bool,
}

/// Checks `a1 <= a2 + tol(t)` and `b1 <= b2 + tol(t)` with
/// `tol(t) = c h exp(k t)`.
pub fn check_comparison<T: Real>(
    lower: &Trajectory<T>,
    upper: &Trajectory<T>,
    c: T,
    k: T,
) -> Result<ComparisonReport<T>> {
    if lower.h != upper.h || lower.samples.len() != upper.samples.len() {
        return Err(DropletError::MismatchedGrids(format!(
            "h {} vs {}, {} vs {} samples",
            lower.h,
            upper.h,
            lower.samples.len(),
            upper.samples.len()
        )));
    }
    let mut report = ComparisonReport {
        worst_margin: T::infinity(),
        worst_time: T::zero(),
        strict: true,
        holds: true,
    };
    for (p, q) in lower.samples.iter().zip(&upper.samples) {
        if p.t != q.t {
            return Err(DropletError::MismatchedGrids(format!("sample times {} vs {}", p.t, q.t)));
        }
        let tol = c * lower.h * (k * (p.t - lower.first().t)).exp();
        let margin = (q.a + tol - p.a).min(q.b + tol - p.b);
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_time = p.t;
        }
        report.strict &= p.a < q.a && p.b < q.b;
    }
    report.holds = report.worst_margin >= T::zero();
    Ok(report)
}

/// First sample time after which the forward difference quotient of `b`
/// stays above `eta`; `None` if the front is still slower at the end.
pub fn sliding_onset<T: Real>(
    traj: &Trajectory<T>,
    eta: T,
    beta: &BetaProfile<T>,
) -> Result<Option<T>> {
    if !(beta.oscillation() < traj.params.drive()) {
        return Err(DropletError::Precondition(format!(
            "sliding onset needs max beta - min beta = {} below V0 tilt = {}",
            beta.oscillation(),
            traj.params.drive()
        )));
    }
    let s = &traj.samples;
    let mut onset = None;
    for i in (0..s.len().saturating_sub(1)).rev() {
        let v = (s[i + 1].b - s[i].b) / (s[i + 1].t - s[i].t);
        if v > eta {
            onset = Some(s[i].t);
        } else {
            break;
        }
    }
    Ok(onset)
}
