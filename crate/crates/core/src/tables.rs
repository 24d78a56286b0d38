//! Contact slope energies `G`, `H`, `F = G + H` and the critical length.

use std::fmt;

use crate::cache::{InterpCache, Uniform};
use crate::equilibrium::{solve_bvp, solve_obstacle_with, EquilibriumProfile};
use crate::error::{DropletError, Result};
use crate::params::PhysicalParams;
use crate::roots::bisect;
use crate::scalar::Real;

/// Interpolation error above which cached tables fall back to an exact solve.
pub const INTERP_TOL: f64 = 1e-7;

/// Refinement level of the dyadic table grid below `ell_c`.
pub const GRID_LEVEL: u32 = 12;

/// Maximal support length. Without tilt the rear never detaches and there is
/// no finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalLength<T> {
    Finite(T),
    Unbounded,
}

impl<T: Real> CriticalLength<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            CriticalLength::Finite(v) => Some(v),
            CriticalLength::Unbounded => None,
        }
    }

    /// Whether a support of length `ell` is longer than the critical length.
    pub fn exceeded_by(self, ell: T) -> bool {
        matches!(self, CriticalLength::Finite(v) if ell > v)
    }

    /// `min(ell, ell_c)`.
    pub fn clamp(self, ell: T) -> T {
        match self {
            CriticalLength::Finite(v) => ell.min(v),
            CriticalLength::Unbounded => ell,
        }
    }
}

impl<T: Real> fmt::Display for CriticalLength<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalLength::Finite(v) => write!(f, "{v}"),
            CriticalLength::Unbounded => f.write_str("inf"),
        }
    }
}

fn rear_slope<T: Real>(params: &PhysicalParams<T>, ell: T) -> Result<T> {
    Ok(solve_bvp(T::zero(), ell, params)?.slope_a())
}

/// Root of `ell -> slope_a(solve_bvp(0, ell))`.
///
/// The upper bracket uses `lambda(ell) >= ell * tilt` at the critical
/// length together with the monotone decrease of `lambda`: any `lo` below the
/// root gives `ell_c <= lambda(lo) / tilt`.
pub fn critical_length<T: Real>(params: &PhysicalParams<T>) -> Result<CriticalLength<T>> {
    let tilt = params.tilt();
    if tilt == T::zero() {
        return Ok(CriticalLength::Unbounded);
    }
    let mut lo = params.volume().sqrt();
    let mut tries = 0;
    while rear_slope(params, lo)? <= T::zero() {
        lo = lo * T::lit(0.5);
        tries += 1;
        if tries > 200 {
            return Err(DropletError::NoCriticalLength);
        }
    }
    let lambda = solve_bvp(T::zero(), lo, params)?.lambda();
    let mut hi = (lambda / tilt).max(lo * T::lit(2.0));
    tries = 0;
    while rear_slope(params, hi)? > T::zero() {
        hi = hi * T::lit(2.0);
        tries += 1;
        if tries > 200 {
            return Err(DropletError::NoCriticalLength);
        }
    }
    let root = bisect(|ell| rear_slope(params, ell), lo, hi, hi * T::tol_floor(1e-13))?;
    Ok(CriticalLength::Finite(root))
}

/// Monotone slope-energy tables for one set of physical parameters.
pub struct SlopeTables<T: Real> {
    params: PhysicalParams<T>,
    ell_c: CriticalLength<T>,
    /// `H(ell_c)`, the front energy on the saturated branch.
    h_sat: T,
    grid: Uniform<T>,
    cache: InterpCache<T, 2>,
}

impl<T: Real> fmt::Debug for SlopeTables<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SlopeTables")
            .field("params", &self.params)
            .field("ell_c", &self.ell_c)
            .field("cached_nodes", &self.cache.len())
            .finish()
    }
}

impl<T: Real> SlopeTables<T> {
    pub fn new(params: &PhysicalParams<T>) -> Result<Self> {
        Self::with_tolerance(params, T::lit(INTERP_TOL))
    }

    /// Tables without interpolation: every evaluation is an exact solve.
    pub fn exact(params: &PhysicalParams<T>) -> Result<Self> {
        Self::with_tolerance(params, T::zero())
    }

    pub fn with_tolerance(params: &PhysicalParams<T>, tol: T) -> Result<Self> {
        let ell_c = critical_length(params)?;
        let (scale, h_sat) = match ell_c {
            CriticalLength::Finite(lc) => {
                let u = solve_bvp(T::zero(), lc, params)?;
                (lc, T::lit(0.5) * u.slope_b() * u.slope_b())
            }
            CriticalLength::Unbounded => (params.volume().sqrt(), T::infinity()),
        };
        let spacing = scale / T::lit(2f64.powi(GRID_LEVEL as i32));
        Ok(Self {
            params: *params,
            ell_c,
            h_sat,
            grid: Uniform { spacing, first: 1 },
            cache: InterpCache::new(tol),
        })
    }

    pub fn params(&self) -> &PhysicalParams<T> {
        &self.params
    }

    pub fn critical_length(&self) -> CriticalLength<T> {
        self.ell_c
    }

    /// Grid spacing of the cache.
    pub fn spacing(&self) -> T {
        self.grid.spacing
    }

    /// Range of lengths with cached nodes, if any.
    pub fn cached_range(&self) -> Option<(T, T)> {
        let nodes = self.cache.snapshot();
        let first = nodes.first()?.0;
        let last = nodes.last()?.0;
        Some((
            self.grid.spacing * T::from_i64(first)?,
            self.grid.spacing * T::from_i64(last)?,
        ))
    }

    /// `(G, H)` at `ell` by an exact solve.
    pub fn gh_exact(&self, ell: T) -> Result<(T, T)> {
        check_length(ell)?;
        if self.ell_c.exceeded_by(ell) || self.ell_c.finite() == Some(ell) {
            return Ok((T::zero(), self.h_sat));
        }
        let u = solve_bvp(T::zero(), ell, &self.params)?;
        let half = T::lit(0.5);
        Ok((half * u.slope_a() * u.slope_a(), half * u.slope_b() * u.slope_b()))
    }

    /// `(G, H)` at `ell` through the cache.
    pub fn gh(&self, ell: T) -> Result<(T, T)> {
        check_length(ell)?;
        if self.ell_c.exceeded_by(ell) {
            return Ok((T::zero(), self.h_sat));
        }
        let [g, h] = self.cache.eval(&self.grid, ell, |l| {
            let (g, h) = self.gh_exact(l)?;
            Ok([g, h])
        })?;
        Ok((g, h))
    }

    pub fn g(&self, ell: T) -> Result<T> {
        Ok(self.gh(ell)?.0)
    }

    pub fn h(&self, ell: T) -> Result<T> {
        Ok(self.gh(ell)?.1)
    }

    pub fn f(&self, ell: T) -> Result<T> {
        let (g, h) = self.gh(ell)?;
        Ok(g + h)
    }

    pub fn g_exact(&self, ell: T) -> Result<T> {
        Ok(self.gh_exact(ell)?.0)
    }

    pub fn h_exact(&self, ell: T) -> Result<T> {
        Ok(self.gh_exact(ell)?.1)
    }

    pub fn f_exact(&self, ell: T) -> Result<T> {
        let (g, h) = self.gh_exact(ell)?;
        Ok(g + h)
    }

    /// Obstacle profile on `(a, b)` using the stored critical length.
    pub fn profile(&self, a: T, b: T) -> Result<EquilibriumProfile<T>> {
        solve_obstacle_with(a, b, &self.params, self.ell_c)
    }

    /// Length at which the exact `H` equals `target`; `None` when `target`
    /// is not above the saturated value `H(ell_c)`.
    pub fn h_inverse(&self, target: T) -> Result<Option<T>> {
        self.decreasing_inverse(target, |l| self.h_exact(l))
    }

    /// Length at which the exact `F` equals `target`, as for [`Self::h_inverse`].
    pub fn f_inverse(&self, target: T) -> Result<Option<T>> {
        self.decreasing_inverse(target, |l| self.f_exact(l))
    }

    fn decreasing_inverse(&self, target: T, eval: impl Fn(T) -> Result<T>) -> Result<Option<T>> {
        let Some(hi) = self.ell_c.finite() else {
            return Err(DropletError::NoCriticalLength);
        };
        if !(eval(hi)? < target) {
            return Ok(None);
        }
        let mut lo = hi * T::lit(0.5);
        let mut tries = 0;
        while eval(lo)? <= target {
            lo = lo * T::lit(0.5);
            tries += 1;
            if tries > 200 {
                return Err(DropletError::NotConverged {
                    what: "inverse bracket",
                    iterations: tries,
                });
            }
        }
        bisect(|l| Ok(eval(l)? - target), lo, hi, hi * T::tol_floor(1e-13)).map(Some)
    }

    /// Rows `(ell, G, H, F)` on `count` equally spaced lengths.
    pub fn rows(&self, ell_min: T, ell_max: T, count: usize) -> Result<Vec<[T; 4]>> {
        if !(ell_max > ell_min) || count < 2 {
            return Err(DropletError::Precondition(
                "table range needs ell_max > ell_min and at least two rows".into(),
            ));
        }
        (0..count)
            .map(|i| {
                let ell = ell_min + (ell_max - ell_min) * T::of_usize(i) / T::of_usize(count - 1);
                let (g, h) = self.gh(ell)?;
                Ok([ell, g, h, g + h])
            })
            .collect()
    }
}

fn check_length<T: Real>(ell: T) -> Result<()> {
    if ell > T::zero() && ell.is_finite() {
        Ok(())
    } else {
        Err(DropletError::NonPositiveLength(ell.as_f64()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::fd_critical_length;
    use std::f64::consts::FRAC_PI_6;

    fn reference() -> PhysicalParams<f64> {
        PhysicalParams::new(1.0, 1.0, FRAC_PI_6).unwrap()
    }

    #[test]
    fn no_tilt_means_unbounded() {
        let p = PhysicalParams::new(1.0, 2.0, 0.0).unwrap();
        assert_eq!(critical_length(&p).unwrap(), CriticalLength::Unbounded);
        let p = PhysicalParams::new(1.0, 0.0, 0.5).unwrap();
        assert_eq!(critical_length(&p).unwrap(), CriticalLength::Unbounded);
    }

    #[test]
    fn critical_slope_vanishes() {
        let p = reference();
        let lc = critical_length(&p).unwrap().finite().unwrap();
        let s = solve_bvp(0.0, lc, &p).unwrap().slope_a();
        assert!(s.abs() <= 1e-9, "slope {s}");
    }

    #[test]
    fn critical_length_matches_fd_oracle() {
        let p = reference();
        let lc = critical_length(&p).unwrap().finite().unwrap();
        let fd = fd_critical_length(&p, 4096, 0.5 * lc, 1.5 * lc).unwrap();
        assert!((lc - fd).abs() < 1e-5, "{lc} vs {fd}");
    }

    #[test]
    fn parabola_tables() {
        let p = PhysicalParams::new(0.8, 0.0, 0.0).unwrap();
        let t = SlopeTables::new(&p).unwrap();
        for ell in [0.3f64, 1.0, 2.5] {
            let expect = 18.0 * 0.64 / ell.powi(4);
            let (g, h) = t.gh(ell).unwrap();
            assert!((g - expect).abs() < 1e-7 * expect.max(1.0));
            assert!((h - expect).abs() < 1e-7 * expect.max(1.0));
        }
    }

    #[test]
    fn saturated_branch() {
        let p = reference();
        let t = SlopeTables::new(&p).unwrap();
        let lc = t.critical_length().finite().unwrap();
        let (g, h) = t.gh(lc * 1.5).unwrap();
        assert_eq!(g, 0.0);
        assert!((h - p.drive()).abs() < 1e-8);
        let u = t.profile(0.0, lc + 1.0).unwrap();
        assert!((u.support_left() - 1.0).abs() < 1e-12);
        assert!((0.5 * u.slope_b().powi(2) - p.drive()).abs() < 1e-8);
    }

    #[test]
    fn cached_matches_exact() {
        let p = reference();
        let t = SlopeTables::new(&p).unwrap();
        let lc = t.critical_length().finite().unwrap();
        for i in 1..200 {
            let ell = lc * (0.05 + 0.95 * i as f64 / 200.0);
            let (g, h) = t.gh(ell).unwrap();
            let (ge, he) = t.gh_exact(ell).unwrap();
            assert!((g - ge).abs() <= 1e-7 && (h - he).abs() <= 1e-7);
            assert!((h - g - p.drive()).abs() <= 1e-8);
        }
        assert!(t.cached_range().is_some());
    }

    #[test]
    fn inverse_round_trip() {
        let p = reference();
        let t = SlopeTables::new(&p).unwrap();
        let lc = t.critical_length().finite().unwrap();
        let ell = 0.6 * lc;
        let target = t.h_exact(ell).unwrap();
        let back = t.h_inverse(target).unwrap().unwrap();
        assert!((back - ell).abs() < 1e-9);
        assert!(t.h_inverse(0.5 * p.drive()).unwrap().is_none());
    }

    #[test]
    fn rejects_non_positive_length() {
        let t = SlopeTables::new(&reference()).unwrap();
        assert!(t.g(0.0).is_err());
        assert!(t.h(-1.0).is_err());
    }
}
