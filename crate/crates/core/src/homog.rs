//! Effective contact-line velocity over periodic adhesion and the
//! epsilon-sweep convergence experiment.
//!
//! A contact point driven by a fixed slope energy `q` over a periodic `beta`
//! moves by `x' = q - beta(x)`. Off the plateau `[min beta, max beta]` the
//! motion is periodic in time with cell crossing time
//! `t_c = integral over one period of dx / (q - beta(x))`, and the averaged
//! speed is `r(q) = period / t_c`. On the plateau every orbit is trapped and
//! `r(q) = 0`.

use rayon::prelude::*;

use crate::beta::BetaProfile;
use crate::cache::{Grid, InterpCache};
use crate::dynamics::{simulate, speed_bound, DropState, SimulateOptions, Trajectory, VelocityLaw};
use crate::error::{DropletError, Result};
use crate::quadrature::adaptive;
use crate::scalar::Real;
use crate::tables::SlopeTables;

/// Interpolation tolerance of the `r` cache.
pub const R_CACHE_TOL: f64 = 1e-7;

/// Ratio of the geometric ladder next to the plateau edges.
const LADDER_RATIO: f64 = 1.044_273_782_427_413_8; // 2^(1/16)

/// `r(q)` by direct quadrature over one cell.
pub fn effective_velocity<T: Real>(q: T, beta: &BetaProfile<T>) -> Result<T> {
    if !q.is_finite() {
        return Err(DropletError::InvalidParameter {
            name: "q",
            value: q.as_f64(),
            reason: "slope energy must be finite",
        });
    }
    if beta.is_constant() {
        return Ok(q - beta.min());
    }
    if q >= beta.min() && q <= beta.max() {
        return Ok(T::zero());
    }
    // Split the cell at the extremum closest to q and substitute
    // s = s* +- t^2 on both sides of it. The distance q - beta is assembled
    // from the plateau gap and the cell gap to keep its relative accuracy.
    let above = q > beta.max();
    let edge_gap = if above { q - beta.max() } else { q - beta.min() };
    let half_width = T::lit(0.5).sqrt();
    let integrand = |t: T, sign: T| {
        let gap = beta.cell_gap(sign * t * t, above);
        let dist = if above { edge_gap + gap } else { edge_gap - gap };
        T::lit(2.0) * t / dist
    };
    let rtol = T::tol_floor(1e-12);
    let atol = T::min_positive_value();
    let right = adaptive(|t| integrand(t, T::one()), T::zero(), half_width, atol, rtol)?;
    let left = adaptive(|t| integrand(t, -T::one()), T::zero(), half_width, atol, rtol)?;
    let crossing = right + left;
    if crossing == T::zero() || !crossing.is_finite() {
        return Err(DropletError::Singular("cell crossing time"));
    }
    Ok(T::one() / crossing)
}

/// Closed form of `r` for `beta = mean + amplitude * sin(2 pi x / period)`.
pub fn sine_effective_velocity<T: Real>(q: T, mean: T, amplitude: T) -> T {
    let d = q - mean;
    if d.abs() <= amplitude {
        return T::zero();
    }
    d.signum() * (d * d - amplitude * amplitude).sqrt()
}

/// Distances to a plateau edge: a geometric ladder from `d_min` that
/// continues linearly once its spacing reaches the ladder's last step.
struct EdgeGrid<T> {
    d_min: T,
    ratio: T,
    rungs: i64,
    linear_step: T,
}

impl<T: Real> EdgeGrid<T> {
    fn new(scale: T) -> Self {
        let ratio = T::lit(LADDER_RATIO);
        let d_min = scale * T::lit(1e-9);
        let rungs = 16 * 30;
        let top = d_min * ratio.powi(rungs as i32);
        Self {
            d_min,
            ratio,
            rungs,
            linear_step: top * (ratio - T::one()),
        }
    }
}

impl<T: Real> Grid<T> for EdgeGrid<T> {
    fn node(&self, i: i64) -> T {
        if i <= self.rungs {
            self.d_min * self.ratio.powi(i as i32)
        } else {
            self.node(self.rungs) + self.linear_step * T::from_i64(i - self.rungs).unwrap()
        }
    }

    fn locate(&self, d: T) -> Option<i64> {
        if !(d >= self.d_min) {
            return None;
        }
        let top = self.node(self.rungs);
        let mut i = if d < top {
            ((d / self.d_min).ln() / self.ratio.ln()).floor().to_i64()?
        } else {
            self.rungs + ((d - top) / self.linear_step).floor().to_i64()?
        };
        // Guard the guess against rounding at the nodes.
        while i > 0 && self.node(i) > d {
            i -= 1;
        }
        while self.node(i + 1) <= d {
            i += 1;
        }
        (i >= 1).then_some(i)
    }
}

/// Effective law `q -> r(q)` for one adhesion profile, with a cache.
pub struct EffectiveLaw<T: Real> {
    beta: BetaProfile<T>,
    grid: EdgeGrid<T>,
    above: InterpCache<T, 1>,
    below: InterpCache<T, 1>,
}

impl<T: Real> std::fmt::Debug for EffectiveLaw<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EffectiveLaw").field("beta", &self.beta).finish()
    }
}

impl<T: Real> EffectiveLaw<T> {
    pub fn new(beta: &BetaProfile<T>) -> Self {
        Self::with_tolerance(beta, T::lit(R_CACHE_TOL))
    }

    /// Law without interpolation.
    pub fn exact(beta: &BetaProfile<T>) -> Self {
        Self::with_tolerance(beta, T::zero())
    }

    pub fn with_tolerance(beta: &BetaProfile<T>, tol: T) -> Self {
        let scale = beta.max().abs().max(beta.oscillation());
        Self {
            beta: beta.clone(),
            grid: EdgeGrid::new(scale),
            above: InterpCache::new(tol),
            below: InterpCache::new(tol),
        }
    }

    pub fn beta(&self) -> &BetaProfile<T> {
        &self.beta
    }

    /// `[min beta, max beta]`, where `r` vanishes.
    pub fn plateau(&self) -> (T, T) {
        (self.beta.min(), self.beta.max())
    }

    pub fn r(&self, q: T) -> Result<T> {
        if self.beta.is_constant() {
            return effective_velocity(q, &self.beta);
        }
        let (lo, hi) = self.plateau();
        if q >= lo && q <= hi {
            return Ok(T::zero());
        }
        let exact = |q| effective_velocity(q, &self.beta);
        if q > hi {
            Ok(self.above.eval(&self.grid, q - hi, |d| Ok([exact(hi + d)?]))?[0])
        } else {
            Ok(self.below.eval(&self.grid, lo - q, |d| Ok([exact(lo - d)?]))?[0])
        }
    }

    /// `r` without the cache.
    pub fn r_exact(&self, q: T) -> Result<T> {
        effective_velocity(q, &self.beta)
    }

    /// Rows `(q, r(q))` on `count` equally spaced points.
    pub fn curve(&self, q_min: T, q_max: T, count: usize) -> Result<Vec<[T; 2]>> {
        if !(q_max > q_min) || count < 2 {
            return Err(DropletError::Precondition(
                "curve range needs q_max > q_min and at least two points".into(),
            ));
        }
        (0..count)
            .map(|i| {
                let q = q_min + (q_max - q_min) * T::of_usize(i) / T::of_usize(count - 1);
                Ok([q, self.r(q)?])
            })
            .collect()
    }
}

/// Least-squares exponent `p` in `r(q) ~ (q - max beta)^p` over a dyadic
/// ladder of distances in `[1e-6, 1e-2]`.
pub fn sqrt_degeneracy_check<T: Real>(beta: &BetaProfile<T>) -> Result<T> {
    if beta.is_constant() {
        return Err(DropletError::Precondition(
            "constant adhesion has no non-degenerate maximum".into(),
        ));
    }
    if !beta.is_smooth() {
        return Err(DropletError::Precondition(
            "exponent fit needs a twice differentiable adhesion profile".into(),
        ));
    }
    let mut pts = Vec::new();
    let mut d = T::lit(1e-6);
    while d <= T::lit(1e-2) {
        let r = effective_velocity(beta.max() + d, beta)?;
        pts.push((d.ln(), r.ln()));
        d = d * T::lit(2.0);
    }
    let n = T::of_usize(pts.len());
    let mx = pts.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let my = pts.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let (sxy, sxx) = pts.iter().fold((T::zero(), T::zero()), |(sxy, sxx), p| {
        (sxy + (p.0 - mx) * (p.1 - my), sxx + (p.0 - mx) * (p.0 - mx))
    });
    Ok(sxy / sxx)
}

/// One row of the epsilon-sweep report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub eps: T,
    pub sup_err_a: T,
    pub sup_err_b: T,
}

impl<T: Real> SweepRow<T> {
    pub fn sup_err(&self) -> T {
        self.sup_err_a.max(self.sup_err_b)
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport<T: Real> {
    pub rows: Vec<SweepRow<T>>,
    pub homogenized: Trajectory<T>,
}

impl<T: Real> SweepReport<T> {
    /// Whether the combined error decreases strictly with `eps`.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_err() < w[0].sup_err())
    }
}

/// Compares raw trajectories over `x -> beta(x / eps)` with the homogenized
/// trajectory from the same initial state.
pub fn epsilon_sweep<T: Real>(
    initial: DropState<T>,
    horizon: T,
    beta: &BetaProfile<T>,
    eps_list: &[T],
    h: T,
    tables: &SlopeTables<T>,
) -> Result<SweepReport<T>> {
    if eps_list.is_empty() {
        return Err(DropletError::Precondition("empty eps list".into()));
    }
    if eps_list.iter().any(|e| !(*e > T::zero()))
        || eps_list.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(DropletError::Precondition(
            "eps list must be positive and strictly decreasing".into(),
        ));
    }
    let eps_min = eps_list[eps_list.len() - 1];
    let bound = speed_bound(tables, beta, initial.length())?;
    let limit = eps_min * beta.period().unwrap_or_else(T::one) / (T::lit(10.0) * bound);
    if h > limit {
        return Err(DropletError::StepTooCoarse {
            h: h.as_f64(),
            eps: eps_min.as_f64(),
            limit: limit.as_f64(),
        });
    }
    let opts = SimulateOptions::default();
    let law = EffectiveLaw::new(beta);
    let homogenized = simulate(initial, horizon, h, &VelocityLaw::Homogenized(&law), tables, &opts)?;
    let rows = eps_list
        .par_iter()
        .map(|&eps| {
            let fast = beta.rescaled(eps)?;
            let traj = simulate(initial, horizon, h, &VelocityLaw::Raw(&fast), tables, &opts)?;
            let (mut ea, mut eb) = (T::zero(), T::zero());
            for (s, r) in traj.samples.iter().zip(&homogenized.samples) {
                ea = ea.max((s.a - r.a).abs());
                eb = eb.max((s.b - r.b).abs());
            }
            Ok(SweepRow {
                eps,
                sup_err_a: ea,
                sup_err_b: eb,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { rows, homogenized })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine() -> BetaProfile<f64> {
        BetaProfile::sine(1.0, 0.3, 1.0).unwrap()
    }

    #[test]
    fn plateau_is_zero() {
        let b = sine();
        for q in [0.7, 0.9, 1.0, 1.3] {
            assert_eq!(effective_velocity(q, &b).unwrap(), 0.0);
        }
    }

    #[test]
    fn matches_closed_form() {
        let b = sine();
        for q in [1.31, 1.4, 2.0, 5.0, 1.3 + 1e-9, 0.69, 0.0, -3.0] {
            let r = effective_velocity(q, &b).unwrap();
            let exact = sine_effective_velocity(q, 1.0, 0.3);
            assert!((r - exact).abs() < 1e-9, "q = {q}: {r} vs {exact}");
        }
    }

    #[test]
    fn independent_of_period() {
        let b = BetaProfile::sine(1.0, 0.3, 0.05).unwrap();
        assert!((effective_velocity(2.0, &b).unwrap() - 0.91f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn constant_is_linear() {
        let b = BetaProfile::constant(0.8).unwrap();
        assert_eq!(effective_velocity(2.5, &b).unwrap(), 2.5 - 0.8);
        assert_eq!(effective_velocity(0.3, &b).unwrap(), 0.3 - 0.8);
    }

    #[test]
    fn cached_law_agrees() {
        let law = EffectiveLaw::new(&sine());
        for i in 0..400 {
            let q = -1.0 + 0.01 * i as f64;
            let exact = sine_effective_velocity(q, 1.0, 0.3);
            assert!((law.r(q).unwrap() - exact).abs() < 2e-7, "q = {q}");
        }
    }

    #[test]
    fn edge_grid_locates_its_nodes() {
        let g = EdgeGrid::new(1.0);
        for i in [1i64, 5, 100, 479, 480, 481, 700] {
            let x = g.node(i);
            assert_eq!(g.locate(x), Some(i));
            assert_eq!(g.locate(0.5 * (x + g.node(i + 1))), Some(i));
        }
        assert_eq!(g.locate(1e-12), None);
    }

    #[test]
    fn sqrt_exponent() {
        let p = sqrt_degeneracy_check(&sine()).unwrap();
        assert!((p - 0.5).abs() < 0.05, "{p}");
    }

    #[test]
    fn exponent_refuses_constant_and_kinked() {
        assert!(sqrt_degeneracy_check(&BetaProfile::constant(1.0).unwrap()).is_err());
        let tent = BetaProfile::piecewise_linear(1.0, &[(0.0, 0.5), (0.5, 1.5)]).unwrap();
        assert!(sqrt_degeneracy_check(&tent).is_err());
    }

    #[test]
    fn log_law_for_kinked_maximum() {
        let tent = BetaProfile::piecewise_linear(1.0, &[(0.0, 0.5), (0.5, 1.5)]).unwrap();
        let vals: Vec<f64> = (6..=18)
            .map(|k| {
                let d = 2f64.powi(-k);
                effective_velocity(1.5 + d, &tent).unwrap() * -d.ln()
            })
            .collect();
        let (lo, hi) = vals.iter().fold((f64::MAX, 0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        assert!(hi / lo < 1.5, "{vals:?}");
    }
}
