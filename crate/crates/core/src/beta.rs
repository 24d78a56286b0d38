//! Relative adhesion coefficient `beta(x)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{DropletError, Result};
use crate::params::invalid;
use crate::quadrature::composite_gauss;
use crate::roots::sampled_max;
use crate::scalar::Real;

type ShapeFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Shape of one period, in the normalized variable `s = x / period`.
#[derive(Clone)]
enum Shape<T> {
    Constant(T),
    /// `mean + amplitude * sin(2 pi s)`.
    Sine { mean: T, amplitude: T },
    /// Linear interpolation through `(s_i, y_i)` covering `[0, 1]` with
    /// `y(0) = y(1)`; `cumulative[i]` is the integral from 0 to `s_i`.
    PiecewiseLinear { s: Vec<T>, y: Vec<T>, cumulative: Vec<T> },
    Custom(ShapeFn<T>),
}

/// Adhesion coefficient, constant or periodic, with exact extrema and
/// Lipschitz metadata.
///
/// Periodic profiles are stored on a unit cell and rescaled by their period,
/// so `rescaled(eps)` (the map `x -> beta(x / eps)`) is exact.
#[derive(Clone)]
pub struct BetaProfile<T> {
    shape: Shape<T>,
    period: T,
    min: T,
    max: T,
    /// Lipschitz constant of the unit-cell shape.
    cell_lipschitz: T,
    argmin: T,
    argmax: T,
    smooth: bool,
}

impl<T: Real> fmt::Debug for BetaProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl<T: Real> fmt::Display for BetaProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl<T: Real> BetaProfile<T> {
    pub fn constant(value: T) -> Result<Self> {
        if !(value > T::zero()) || !value.is_finite() {
            return Err(invalid("beta.value", value, "adhesion must be positive"));
        }
        Ok(Self {
            shape: Shape::Constant(value),
            period: T::one(),
            min: value,
            max: value,
            cell_lipschitz: T::zero(),
            argmin: T::zero(),
            argmax: T::zero(),
            smooth: true,
        })
    }

    /// `mean + amplitude * sin(2 pi x / period)`.
    pub fn sine(mean: T, amplitude: T, period: T) -> Result<Self> {
        check_period(period)?;
        if !(amplitude >= T::zero()) {
            return Err(invalid("beta.amplitude", amplitude, "amplitude must be non-negative"));
        }
        if !(mean - amplitude > T::zero()) {
            return Err(invalid(
                "beta.amplitude",
                amplitude,
                "amplitude must be smaller than the mean so beta stays positive",
            ));
        }
        if amplitude == T::zero() {
            return Self::constant(mean);
        }
        Ok(Self {
            shape: Shape::Sine { mean, amplitude },
            period,
            min: mean - amplitude,
            max: mean + amplitude,
            cell_lipschitz: T::TAU() * amplitude,
            argmin: T::lit(0.75),
            argmax: T::lit(0.25),
            smooth: true,
        })
    }

    /// Periodic piecewise-linear profile through `(x_i, beta_i)` with
    /// `0 <= x_i < period` strictly increasing; the last node connects to the
    /// first one of the next period.
    pub fn piecewise_linear(period: T, nodes: &[(T, T)]) -> Result<Self> {
        check_period(period)?;
        if nodes.len() < 2 {
            return Err(DropletError::Precondition(
                "piecewise-linear beta needs at least two nodes".into(),
            ));
        }
        let mut s = Vec::with_capacity(nodes.len() + 2);
        let mut y = Vec::with_capacity(nodes.len() + 2);
        for (i, &(x, v)) in nodes.iter().enumerate() {
            if !(x >= T::zero() && x < period) || (i > 0 && x <= nodes[i - 1].0) {
                return Err(invalid(
                    "beta.nodes",
                    x,
                    "node abscissae must increase strictly within [0, period)",
                ));
            }
            if !(v > T::zero()) {
                return Err(invalid("beta.nodes", v, "adhesion must be positive"));
            }
            s.push(x / period);
            y.push(v);
        }
        let (y_min, y_max) = y.iter().fold((y[0], y[0]), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        if y_min == y_max {
            return Self::constant(y[0]);
        }
        let imin = y.iter().position(|v| *v == y_min).unwrap_or(0);
        let imax = y.iter().position(|v| *v == y_max).unwrap_or(0);
        let (argmin, argmax) = (s[imin], s[imax]);
        // Close the cell: value at s = 0 (and s = 1) on the wrap segment.
        let (first_s, first_y) = (s[0], y[0]);
        let (last_s, last_y) = (s[s.len() - 1], y[y.len() - 1]);
        let wrap_len = first_s + T::one() - last_s;
        let y0 = last_y + (first_y - last_y) * (T::one() - last_s) / wrap_len;
        if first_s > T::zero() {
            s.insert(0, T::zero());
            y.insert(0, y0);
        }
        s.push(T::one());
        y.push(if first_s > T::zero() { y0 } else { first_y });
        let mut cumulative = vec![T::zero(); s.len()];
        let mut lip = T::zero();
        for i in 1..s.len() {
            let ds = s[i] - s[i - 1];
            cumulative[i] = cumulative[i - 1] + (y[i] + y[i - 1]) * T::lit(0.5) * ds;
            if ds > T::zero() {
                lip = lip.max(((y[i] - y[i - 1]) / ds).abs());
            }
        }
        Ok(Self {
            min: y_min,
            max: y_max,
            argmin,
            argmax,
            shape: Shape::PiecewiseLinear { s, y, cumulative },
            period,
            cell_lipschitz: lip,
            smooth: false,
        })
    }

    /// Arbitrary periodic profile. The declared extrema and Lipschitz constant
    /// are spot-checked on a grid; extremum locations are found by sampling
    /// plus golden-section refinement.
    pub fn custom<F>(period: T, f: F, min: T, max: T, lipschitz: T, smooth: bool) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        check_period(period)?;
        if !(min > T::zero()) || !(max >= min) {
            return Err(invalid("beta.min", min, "need 0 < min <= max"));
        }
        let cell: ShapeFn<T> = Arc::new(move |s: T| f(s * period));
        let slack = (max - min) * T::lit(1e-9) + T::epsilon() * max * T::lit(8.0);
        let grid = 4096;
        for i in 0..grid {
            let v = cell(T::of_usize(i) / T::of_usize(grid));
            if v < min - slack || v > max + slack {
                return Err(invalid("beta", v, "custom profile leaves its declared [min, max]"));
            }
        }
        let (argmax, _) = sampled_max(|s| cell(s), T::zero(), T::one(), 1024);
        let (argmin, _) = sampled_max(|s| -cell(s), T::zero(), T::one(), 1024);
        Ok(Self {
            shape: Shape::Custom(cell),
            period,
            min,
            max,
            cell_lipschitz: lipschitz * period,
            argmin: wrap_unit(argmin),
            argmax: wrap_unit(argmax),
            smooth,
        })
    }

    pub fn eval(&self, x: T) -> T {
        match &self.shape {
            Shape::Constant(v) => *v,
            _ => self.eval_cell(x / self.period),
        }
    }

    /// Unit-cell shape: `beta(s * period)`.
    pub fn eval_cell(&self, s: T) -> T {
        match &self.shape {
            Shape::Constant(v) => *v,
            Shape::Sine { mean, amplitude } => *mean + *amplitude * (T::TAU() * s).sin(),
            Shape::PiecewiseLinear { s: xs, y, .. } => {
                let s = wrap_unit(s);
                let i = pl_segment(xs, s);
                y[i] + (y[i + 1] - y[i]) * (s - xs[i]) / (xs[i + 1] - xs[i])
            }
            Shape::Custom(f) => f(s),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.shape, Shape::Constant(_))
    }

    /// Whether the profile is declared twice differentiable.
    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    /// Period, or `None` for a constant profile.
    pub fn period(&self) -> Option<T> {
        (!self.is_constant()).then_some(self.period)
    }

    pub fn min(&self) -> T {
        self.min
    }

    pub fn max(&self) -> T {
        self.max
    }

    pub fn oscillation(&self) -> T {
        self.max - self.min
    }

    /// Lipschitz constant in the physical variable.
    pub fn lipschitz(&self) -> T {
        if self.is_constant() {
            T::zero()
        } else {
            self.cell_lipschitz / self.period
        }
    }

    /// Location of the minimum within `[0, period)`.
    pub fn argmin(&self) -> T {
        self.argmin * self.period
    }

    /// Location of the maximum within `[0, period)`.
    pub fn argmax(&self) -> T {
        self.argmax * self.period
    }

    /// `|beta - extremum|` at cell offset `delta` from the maximum (or the
    /// minimum), evaluated without cancellation for the built-in shapes.
    pub fn cell_gap(&self, delta: T, maximum: bool) -> T {
        match &self.shape {
            Shape::Constant(_) => T::zero(),
            Shape::Sine { amplitude, .. } => {
                let s = (T::PI() * delta).sin();
                T::lit(2.0) * amplitude.abs() * s * s
            }
            _ => {
                let (centre, level) = if maximum { (self.argmax, self.max) } else { (self.argmin, self.min) };
                (self.eval_cell(centre + delta) - level).abs()
            }
        }
    }

    /// Cell average.
    pub fn mean(&self) -> T {
        match &self.shape {
            Shape::Constant(v) => *v,
            Shape::Sine { mean, .. } => *mean,
            Shape::PiecewiseLinear { cumulative, .. } => cumulative[cumulative.len() - 1],
            Shape::Custom(f) => composite_gauss(|s| f(s), T::zero(), T::one(), 16),
        }
    }

    /// `x -> beta(x / eps)`.
    pub fn rescaled(&self, eps: T) -> Result<Self> {
        check_period(eps)?;
        let mut out = self.clone();
        if !self.is_constant() {
            out.period = self.period * eps;
        }
        Ok(out)
    }

    /// Same unit cell stretched to the given period.
    pub fn with_period(&self, period: T) -> Result<Self> {
        check_period(period)?;
        let mut out = self.clone();
        if !self.is_constant() {
            out.period = period;
        }
        Ok(out)
    }

    /// `integral of beta over [a, b]`, exact for the built-in shapes.
    pub fn integral(&self, a: T, b: T) -> T {
        match &self.shape {
            Shape::Constant(v) => *v * (b - a),
            Shape::Sine { mean, amplitude } => {
                let k = T::TAU() / self.period;
                *mean * (b - a) + *amplitude / k * ((k * a).cos() - (k * b).cos())
            }
            Shape::PiecewiseLinear { .. } => {
                (self.cell_antiderivative(b / self.period) - self.cell_antiderivative(a / self.period))
                    * self.period
            }
            Shape::Custom(_) => {
                let cells = ((b - a).abs() / self.period).ceil().to_usize().unwrap_or(1).max(1);
                composite_gauss(|x| self.eval(x), a, b, 4 * cells)
            }
        }
    }

    /// Antiderivative of the unit-cell shape measured from `s = 0`.
    fn cell_antiderivative(&self, s: T) -> T {
        let Shape::PiecewiseLinear { s: xs, y, cumulative } = &self.shape else {
            unreachable!("only used for piecewise-linear shapes")
        };
        let whole = s.floor();
        let frac = wrap_unit(s);
        let i = pl_segment(xs, frac);
        let dt = frac - xs[i];
        let slope = (y[i + 1] - y[i]) / (xs[i + 1] - xs[i]);
        whole * cumulative[cumulative.len() - 1] + cumulative[i] + y[i] * dt + slope * dt * dt * T::lit(0.5)
    }

    /// Human-readable description used in provenance headers.
    pub fn descriptor(&self) -> String {
        match &self.shape {
            Shape::Constant(v) => format!("constant({v})"),
            Shape::Sine { mean, amplitude } => {
                format!("sine(mean={mean}, amplitude={amplitude}, period={})", self.period)
            }
            Shape::PiecewiseLinear { s, y, .. } => {
                let nodes: Vec<String> = s[..s.len() - 1]
                    .iter()
                    .zip(y)
                    .map(|(s, y)| format!("{}:{}", *s * self.period, y))
                    .collect();
                format!("piecewise-linear(period={}, nodes=[{}])", self.period, nodes.join(","))
            }
            Shape::Custom(_) => format!(
                "custom(period={}, min={}, max={})",
                self.period, self.min, self.max
            ),
        }
    }
}

fn check_period<T: Real>(period: T) -> Result<()> {
    if period > T::zero() && period.is_finite() {
        Ok(())
    } else {
        Err(invalid("beta.period", period, "period must be positive"))
    }
}

fn wrap_unit<T: Real>(s: T) -> T {
    let w = s - s.floor();
    if w >= T::one() {
        T::zero()
    } else {
        w
    }
}

/// Index `i` of the segment `[xs[i], xs[i + 1])` containing `s` in `[0, 1)`.
fn pl_segment<T: Real>(xs: &[T], s: T) -> usize {
    xs.partition_point(|&x| x <= s).clamp(1, xs.len() - 1) - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_metadata() {
        let b = BetaProfile::<f64>::sine(1.0, 0.3, 2.0).unwrap();
        assert_eq!(b.min(), 0.7);
        assert_eq!(b.max(), 1.3);
        assert!((b.eval(b.argmax()) - 1.3).abs() < 1e-15);
        assert!((b.eval(b.argmin()) - 0.7).abs() < 1e-15);
        assert!((b.eval(0.3) - b.eval(2.3)).abs() < 1e-14);
        assert!((b.lipschitz() - std::f64::consts::PI * 0.3).abs() < 1e-14);
    }

    #[test]
    fn extrema_bound_profile_on_grid() {
        let profiles = [
            BetaProfile::sine(1.0, 0.3, 0.7).unwrap(),
            BetaProfile::piecewise_linear(1.0, &[(0.0, 1.0), (0.3, 1.5), (0.6, 0.8)]).unwrap(),
        ];
        for b in &profiles {
            for i in 0..5000 {
                let x = -3.0 + 6.0 * i as f64 / 5000.0;
                let v = b.eval(x);
                assert!(v >= b.min() - 1e-14 && v <= b.max() + 1e-14);
                assert!(v > 0.0);
            }
        }
    }

    #[test]
    fn rejects_nonpositive_sine() {
        assert!(BetaProfile::sine(1.0, 1.2, 1.0).is_err());
        assert!(BetaProfile::sine(1.0, 0.3, 0.0).is_err());
        assert!(BetaProfile::<f64>::constant(0.0).is_err());
    }

    #[test]
    fn integrals_match_quadrature() {
        let profiles = [
            BetaProfile::<f64>::sine(1.0, 0.3, 0.37).unwrap(),
            BetaProfile::piecewise_linear(0.5, &[(0.1, 1.0), (0.2, 1.5), (0.4, 0.8)]).unwrap(),
            BetaProfile::constant(1.7).unwrap(),
        ];
        for b in &profiles {
            for &(lo, hi) in &[(-1.3, 0.2), (0.05, 0.07), (0.0, 3.0), (2.31, 2.95)] {
                let exact = b.integral(lo, hi);
                let quad = composite_gauss(|x| b.eval(x), lo, hi, 4000);
                assert!((exact - quad).abs() < 1e-9, "{b:?} on [{lo},{hi}]: {exact} vs {quad}");
            }
        }
    }

    #[test]
    fn rescaling_shrinks_period() {
        let b = BetaProfile::<f64>::sine(1.0, 0.3, 1.0).unwrap();
        let e = b.rescaled(0.1).unwrap();
        assert!((e.eval(0.013) - b.eval(0.13)).abs() < 1e-14);
        assert!((e.lipschitz() - 10.0 * b.lipschitz()).abs() < 1e-12);
    }

    #[test]
    fn custom_profile_locates_extrema() {
        let b = BetaProfile::custom(
            2.0,
            |x: f64| 1.0 + 0.2 * (std::f64::consts::PI * x).cos(),
            0.8,
            1.2,
            0.2 * std::f64::consts::PI,
            true,
        )
        .unwrap();
        assert!(b.argmax().min(2.0 - b.argmax()) < 1e-6);
        assert!((b.argmin() - 1.0).abs() < 1e-6);
        assert!((b.mean() - 1.0).abs() < 1e-12);
        assert!(BetaProfile::custom(1.0, |_x: f64| 2.0, 0.5, 1.0, 0.0, true).is_err());
    }
}
