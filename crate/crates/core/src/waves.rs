//! Traveling waves, pulsating waves and sticking barriers.

use crate::beta::BetaProfile;
use crate::error::{DropletError, Result};
use crate::homog::EffectiveLaw;
use crate::ode::{integrate, OdeOptions};
use crate::params::PhysicalParams;
use crate::roots::bisect;
use crate::scalar::Real;
use crate::tables::SlopeTables;

/// Rigidly translating drop over constant adhesion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TravelingWave<T> {
    pub ell0: T,
    pub speed: T,
    /// Rear slope zero, support at the critical length.
    pub degenerate_rear: bool,
}

/// Traveling wave for `beta = beta0`.
///
/// Below the saturation drive the length solves `F(ell0) = 2 beta0` and both
/// contact points move at `V0 tilt / 2`; otherwise the support is saturated
/// and the speed is `V0 tilt - beta0`.
pub fn traveling_wave<T: Real>(beta0: T, tables: &SlopeTables<T>) -> Result<TravelingWave<T>> {
    if !(beta0 > T::zero()) {
        return Err(DropletError::InvalidParameter {
            name: "beta0",
            value: beta0.as_f64(),
            reason: "adhesion must be positive",
        });
    }
    let Some(lc) = tables.critical_length().finite() else {
        return Err(DropletError::Precondition(
            "no traveling wave without tilt".into(),
        ));
    };
    let drive = tables.params().drive();
    let target = T::lit(2.0) * beta0;
    if drive < target {
        if let Some(ell0) = tables.f_inverse(target)? {
            return Ok(TravelingWave {
                ell0,
                speed: T::lit(0.5) * drive,
                degenerate_rear: false,
            });
        }
    }
    Ok(TravelingWave {
        ell0: lc,
        speed: drive - beta0,
        degenerate_rear: true,
    })
}

/// Speed of the homogenized traveling wave: `c = r(q0 + V0 tilt)` with
/// `r(q0 + V0 tilt) + r(q0) = 0`, or `r(V0 tilt)` when the rear is flat.
pub fn homogenized_tw_speed<T: Real>(law: &EffectiveLaw<T>, params: &PhysicalParams<T>) -> Result<T> {
    let drive = params.drive();
    if !(drive > T::zero()) {
        return Err(DropletError::Precondition(
            "no traveling wave without tilt".into(),
        ));
    }
    if law.r(drive)? + law.r(T::zero())? >= T::zero() {
        return law.r(drive);
    }
    let sum = |q: T| Ok(law.r(q + drive)? + law.r(q)?);
    let hi = law.plateau().1.max(T::zero());
    let q0 = bisect(sum, T::zero(), hi, T::tol_floor(1e-14) * hi.max(T::one()))?;
    law.r(q0 + drive)
}

/// Limit length profile over one period of the adhesion.
#[derive(Debug, Clone)]
pub struct PulsatingWave<T> {
    /// Front positions `x` covering `[0, period]`.
    pub x: Vec<T>,
    /// Support length `z(x)` when the front is at `x`.
    pub z: Vec<T>,
    /// Time for the front to advance one period.
    pub time_period: T,
    pub mean_speed: T,
    /// Sup-norm change between consecutive periods, one entry per period.
    pub sup_differences: Vec<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct PulsatingOptions<T> {
    /// Samples of `z` per period.
    pub samples: usize,
    pub tol: T,
    pub max_periods: usize,
    pub ode: OdeOptions<T>,
}

impl<T: Real> Default for PulsatingOptions<T> {
    fn default() -> Self {
        Self {
            samples: 256,
            tol: T::tol_floor(1e-8),
            max_periods: 5000,
            ode: OdeOptions::default(),
        }
    }
}

/// Periodic limit of the support length along the front position.
///
/// Integrates `y' = (F(y) - beta(x - y) - beta(x)) / (H(y) - beta(x))` with
/// `y <= ell_c` period after period, together with `dt/dx = 1 / (H(y) - beta(x))`.
pub fn pulsating_wave<T: Real>(
    beta: &BetaProfile<T>,
    tables: &SlopeTables<T>,
    opts: &PulsatingOptions<T>,
) -> Result<PulsatingWave<T>> {
    let Some(lc) = tables.critical_length().finite() else {
        return Err(DropletError::Precondition("no pulsating wave without tilt".into()));
    };
    let drive = tables.params().drive();
    if !(beta.oscillation() < drive) {
        return Err(DropletError::Precondition(format!(
            "pulsating wave needs max beta - min beta = {} below V0 tilt = {}",
            beta.oscillation(),
            drive
        )));
    }
    let period = beta.period().unwrap_or_else(T::one);
    let n = opts.samples.max(2);
    let start = traveling_wave(beta.mean(), tables)?.ell0;
    let rhs = |x: T, s: &[T; 2]| -> Result<[T; 2]> {
        let y = s[0].min(lc);
        let (g, h) = tables.gh_exact(y)?;
        let front = h - beta.eval(x);
        if !(front > T::zero()) {
            return Err(DropletError::NonPositiveFrontSpeed {
                x: x.as_f64(),
                value: front.as_f64(),
            });
        }
        let mut dy = (g + h - beta.eval(x - y) - beta.eval(x)) / front;
        if y >= lc && dy > T::zero() {
            dy = T::zero();
        }
        Ok([dy, T::one() / front])
    };
    let clamp = |s: &mut [T; 2]| s[0] = s[0].min(lc);

    let mut state = [start, T::zero()];
    let mut step = T::zero();
    let mut previous: Option<Vec<T>> = None;
    let mut diffs = Vec::new();
    for p in 0..opts.max_periods {
        let x0 = period * T::of_usize(p);
        let t0 = state[1];
        let mut ys = Vec::with_capacity(n + 1);
        ys.push(state[0]);
        for k in 1..=n {
            let xa = x0 + period * T::of_usize(k - 1) / T::of_usize(n);
            let xb = x0 + period * T::of_usize(k) / T::of_usize(n);
            state = integrate(rhs, xa, state, xb, &mut step, &opts.ode, clamp)?;
            ys.push(state[0]);
        }
        let time_period = state[1] - t0;
        if let Some(prev) = &previous {
            let d = prev
                .iter()
                .zip(&ys)
                .fold(T::zero(), |m, (u, v)| m.max((*u - *v).abs()));
            diffs.push(d);
            if d < opts.tol {
                let x = (0..=n).map(|k| period * T::of_usize(k) / T::of_usize(n)).collect();
                return Ok(PulsatingWave {
                    x,
                    z: ys,
                    time_period,
                    mean_speed: period / time_period,
                    sup_differences: diffs,
                });
            }
        }
        previous = Some(ys);
    }
    Err(DropletError::NotConverged {
        what: "pulsating wave iteration",
        iterations: opts.max_periods,
    })
}

/// Stationary support `(a, b)` that blocks the drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickingBarrier<T> {
    pub a: T,
    pub b: T,
    /// Length with `H(ell0) = max beta`.
    pub ell0: T,
    /// `u'(b)^2 / 2 - beta(b)`, required `<= 0`.
    pub front_excess: T,
    /// `beta(a) - u'(a)^2 / 2`, required `<= 0`.
    pub rear_excess: T,
}

/// Slack allowed on the barrier inequalities.
pub const BARRIER_MARGIN: f64 = 1e-9;

/// Attempts the barrier construction: rear at a minimum of `beta`, front at a
/// maximum no closer than `ell0`. `None` means the construction fails, which
/// does not rule out pinning.
pub fn sticking_barrier<T: Real>(
    beta: &BetaProfile<T>,
    tables: &SlopeTables<T>,
) -> Result<Option<StickingBarrier<T>>> {
    let Some(period) = beta.period() else {
        return Err(DropletError::Precondition(
            "sticking barrier needs a periodic adhesion profile".into(),
        ));
    };
    if tables.critical_length().finite().is_none() {
        return Err(DropletError::Precondition("no barrier analysis without tilt".into()));
    }
    let Some(ell0) = tables.h_inverse(beta.max())? else {
        return Ok(None);
    };
    let a = beta.argmin();
    let shift = ((a + ell0 - beta.argmax()) / period).ceil();
    let b = beta.argmax() + shift * period;
    let u = tables.profile(a, b)?;
    let half = T::lit(0.5);
    let front_excess = half * u.slope_b() * u.slope_b() - beta.eval(b);
    let rear_excess = beta.eval(a) - half * u.slope_a() * u.slope_a();
    let margin = T::lit(BARRIER_MARGIN);
    Ok((front_excess <= margin && rear_excess <= margin).then_some(StickingBarrier {
        a,
        b,
        ell0,
        front_excess,
        rear_excess,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homog::sine_effective_velocity;
    use std::f64::consts::FRAC_PI_6;

    fn tables(v0: f64) -> SlopeTables<f64> {
        SlopeTables::new(&PhysicalParams::new(v0, 1.0, FRAC_PI_6).unwrap()).unwrap()
    }

    #[test]
    fn speed_formula_branches() {
        // tilt = 1/2, so V0 = 2 gives drive 1 and V0 = 6 gives drive 3.
        let tw = traveling_wave(1.0, &tables(2.0)).unwrap();
        assert!((tw.speed - 0.5).abs() < 1e-14 && !tw.degenerate_rear);
        let t = tables(2.0);
        assert!((t.f_exact(tw.ell0).unwrap() - 2.0).abs() < 1e-9);
        let tw = traveling_wave(1.0, &tables(6.0)).unwrap();
        assert!((tw.speed - 2.0).abs() < 1e-14 && tw.degenerate_rear);
    }

    #[test]
    fn homogenized_speed_recovers_constant_formula() {
        let law = EffectiveLaw::new(&BetaProfile::constant(1.0).unwrap());
        for drive in [0.5, 1.0, 1.9, 2.0, 2.1, 3.0] {
            let p = PhysicalParams::new(2.0 * drive, 1.0, FRAC_PI_6).unwrap();
            let c = homogenized_tw_speed(&law, &p).unwrap();
            let expect = if drive <= 2.0 { 0.5 * drive } else { drive - 1.0 };
            assert!((c - expect).abs() < 1e-12, "{drive}: {c}");
        }
    }

    #[test]
    fn homogenized_speed_sine_closed_form() {
        let law = EffectiveLaw::new(&BetaProfile::sine(1.0, 0.3, 1.0).unwrap());
        for drive in [0.4, 0.7, 1.5, 2.0, 2.5, 4.0] {
            let p = PhysicalParams::new(2.0 * drive, 1.0, FRAC_PI_6).unwrap();
            let c = homogenized_tw_speed(&law, &p).unwrap();
            let expect = if drive <= 2.0 {
                sine_effective_velocity(1.0 + 0.5 * drive, 1.0, 0.3)
            } else {
                sine_effective_velocity(drive, 1.0, 0.3)
            };
            assert!((c - expect).abs() < 1e-6, "{drive}: {c} vs {expect}");
        }
    }

    #[test]
    fn constant_pulsating_wave_is_traveling_wave() {
        let t = tables(2.0);
        // A vanishing ripple keeps the periodic machinery in play.
        let beta = BetaProfile::sine(1.0, 1e-12, 1.0).unwrap();
        let pw = pulsating_wave(&beta, &t, &PulsatingOptions::default()).unwrap();
        let tw = traveling_wave(1.0, &t).unwrap();
        assert!(pw.z.iter().all(|z| (z - tw.ell0).abs() < 1e-8));
        assert!((pw.mean_speed - tw.speed).abs() < 1e-8);
    }

    #[test]
    fn pulsating_refuses_pinning_regime() {
        let beta = BetaProfile::sine(1.0, 0.6, 1.0).unwrap();
        assert!(pulsating_wave(&beta, &tables(2.0), &PulsatingOptions::default()).is_err());
    }

    #[test]
    fn no_barrier_when_drive_dominates() {
        let beta = BetaProfile::sine(1.0, 0.2, 0.05).unwrap();
        assert!(sticking_barrier(&beta, &tables(2.0)).unwrap().is_none());
    }

    #[test]
    fn barrier_for_short_period() {
        // drive = 1 < 2A = 1.2.
        let beta = BetaProfile::sine(1.0, 0.6, 0.05).unwrap();
        let bar = sticking_barrier(&beta, &tables(2.0)).unwrap().unwrap();
        assert!(bar.b - bar.a >= bar.ell0);
        assert!(bar.front_excess <= 1e-9 && bar.rear_excess <= 1e-9);
    }
}
