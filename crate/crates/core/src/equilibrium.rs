//! Volume-constrained equilibrium profiles.
//!
//! On an interval `(a, b)` of length `l` the profile solves
//! `-u'' + k2 u = lambda + (x - b) tilt` with `u(a) = u(b) = 0` and
//! `integral u = V0`. Writing `x = a + l s` the solution is
//! `u = lambda l^2 w(s) + tilt l^3 w2(s)` where, with `m = k2 l^2`,
//!
//! ```text
//! -w''  + m w  = 1,      w(0)  = w(1)  = 0
//! -w2'' + m w2 = s - 1,  w2(0) = w2(1) = 0
//! ```
//!
//! Both unit solutions are evaluated in closed form: hyperbolic functions
//! written through `exp(-theta ...)` and `expm1` for `m >= 1`, and the power
//! series in `m` (summed into one polynomial in `s`) for `m < 1`, which also
//! covers `k2 = 0` exactly. The multiplier follows from the volume constraint
//! in one division.

use crate::beta::BetaProfile;
use crate::error::{DropletError, Result};
use crate::params::PhysicalParams;
use crate::quadrature::composite_gauss;
use crate::scalar::Real;
use crate::tables::{critical_length, CriticalLength};

/// Below this value of `k2 l^2` the unit solutions are summed as series.
pub const SERIES_LIMIT: f64 = 1.0;

/// Quadrature panels used for volume and energy diagnostics.
pub const DIAGNOSTIC_PANELS: usize = 8;

#[derive(Debug, Clone)]
enum Basis<T> {
    /// Coefficients in `s` of `w` and `w2`.
    Polynomial { w: Vec<T>, w2: Vec<T> },
    Hyperbolic { theta: T, m: T },
}

impl<T: Real> Basis<T> {
    fn new(m: T) -> Self {
        if m < T::lit(SERIES_LIMIT) {
            Basis::Polynomial {
                w: series(m, vec![T::one()]),
                w2: series(m, vec![-T::one(), T::one()]),
            }
        } else {
            Basis::Hyperbolic { theta: m.sqrt(), m }
        }
    }

    /// `(w, w2)` at `s`.
    fn values(&self, s: T) -> (T, T) {
        match self {
            Basis::Polynomial { w, w2 } => (horner(w, s), horner(w2, s)),
            Basis::Hyperbolic { theta, m } => {
                let th = *theta;
                let front = -(-th * s).exp_m1();
                let back = -(-th * (T::one() - s)).exp_m1();
                let w = front * back / (*m * (T::one() + (-th).exp()));
                let w2 = ((s - T::one()) + sinh_ratio(th, s)) / *m;
                (w, w2)
            }
        }
    }

    /// `(w', w2')` at `s`.
    fn slopes(&self, s: T) -> (T, T) {
        match self {
            Basis::Polynomial { w, w2 } => (horner_derivative(w, s), horner_derivative(w2, s)),
            Basis::Hyperbolic { theta, m } => {
                let th = *theta;
                let e_front = (-th * s).exp();
                let e_back = (-th * (T::one() - s)).exp();
                let front = -(-th * s).exp_m1();
                let back = -(-th * (T::one() - s)).exp_m1();
                let dw = th * (e_front * back - front * e_back) / (*m * (T::one() + (-th).exp()));
                let ds = -th * (e_front + (-th * (T::lit(2.0) - s)).exp()) / -(-T::lit(2.0) * th).exp_m1();
                (dw, (T::one() + ds) / *m)
            }
        }
    }

    /// `(integral w, integral w2)` over `[0, 1]`.
    fn integrals(&self) -> (T, T) {
        match self {
            Basis::Polynomial { w, w2 } => (poly_integral(w), poly_integral(w2)),
            Basis::Hyperbolic { theta, m } => {
                let t = (*theta * T::lit(0.5)).tanh() / *theta;
                ((T::one() - T::lit(2.0) * t) / *m, (t - T::lit(0.5)) / *m)
            }
        }
    }
}

/// `sinh(theta (1 - s)) / sinh(theta)` without overflow.
fn sinh_ratio<T: Real>(theta: T, s: T) -> T {
    ((-theta * s).exp() - (-theta * (T::lit(2.0) - s)).exp()) / -(-T::lit(2.0) * theta).exp_m1()
}

/// Sums `sum_n m^n q_n` where `q_0'' = -f`, `q_n'' = q_{n-1}`, all vanishing
/// at `s = 0, 1`.
fn series<T: Real>(m: T, forcing: Vec<T>) -> Vec<T> {
    let neg: Vec<T> = forcing.into_iter().map(|c| -c).collect();
    let mut term = integrate_twice(&neg);
    let mut total = term.clone();
    let scale = l1(&term);
    let mut power = T::one();
    for _ in 0..80 {
        term = integrate_twice(&term);
        power = power * m;
        if power == T::zero() {
            break;
        }
        let contribution = power * l1(&term);
        if total.len() < term.len() {
            total.resize(term.len(), T::zero());
        }
        for (t, c) in total.iter_mut().zip(&term) {
            *t = *t + power * *c;
        }
        if contribution <= T::epsilon() * scale * T::lit(1e-3) {
            break;
        }
    }
    total
}

/// `q'' = p` with `q(0) = q(1) = 0`.
fn integrate_twice<T: Real>(p: &[T]) -> Vec<T> {
    let mut q = vec![T::zero(); p.len() + 2];
    for (j, c) in p.iter().enumerate() {
        q[j + 2] = *c / (T::of_usize(j + 1) * T::of_usize(j + 2));
    }
    let at_one = q.iter().fold(T::zero(), |s, c| s + *c);
    q[1] = -at_one;
    q
}

fn l1<T: Real>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |s, c| s + c.abs())
}

fn horner<T: Real>(p: &[T], s: T) -> T {
    p.iter().rev().fold(T::zero(), |acc, c| acc * s + *c)
}

fn horner_derivative<T: Real>(p: &[T], s: T) -> T {
    p.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(T::zero(), |acc, (j, c)| acc * s + *c * T::of_usize(j))
}

fn poly_integral<T: Real>(p: &[T]) -> T {
    p.iter()
        .enumerate()
        .fold(T::zero(), |acc, (j, c)| acc + *c / T::of_usize(j + 1))
}

/// One solved drop shape.
#[derive(Debug, Clone)]
pub struct EquilibriumProfile<T> {
    a: T,
    b: T,
    support_left: T,
    lambda: T,
    slope_a: T,
    slope_b: T,
    params: PhysicalParams<T>,
    basis: Basis<T>,
}

impl<T: Real> EquilibriumProfile<T> {
    /// Left end of the prescribed interval.
    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    /// Left end `a'` of the positivity set.
    pub fn support_left(&self) -> T {
        self.support_left
    }

    /// `b - a'`.
    pub fn support_length(&self) -> T {
        self.b - self.support_left
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// `u'(a')`.
    pub fn slope_a(&self) -> T {
        self.slope_a
    }

    /// `u'(b)`.
    pub fn slope_b(&self) -> T {
        self.slope_b
    }

    pub fn params(&self) -> &PhysicalParams<T> {
        &self.params
    }

    fn unit(&self, x: T) -> T {
        (x - self.support_left) / self.support_length()
    }

    /// `u(x)`; zero outside `[a', b]`.
    pub fn eval(&self, x: T) -> T {
        if x <= self.support_left || x >= self.b {
            return T::zero();
        }
        let l = self.support_length();
        let (w, w2) = self.basis.values(self.unit(x));
        self.lambda * l * l * w + self.params.tilt() * l * l * l * w2
    }

    /// `u'(x)` on `[a', b]`.
    pub fn derivative(&self, x: T) -> T {
        let l = self.support_length();
        let (dw, dw2) = self.basis.slopes(self.unit(x));
        self.lambda * l * dw + self.params.tilt() * l * l * dw2
    }

    /// `integral u` by composite Gauss–Legendre quadrature.
    pub fn volume(&self) -> T {
        self.volume_with_panels(DIAGNOSTIC_PANELS)
    }

    pub fn volume_with_panels(&self, panels: usize) -> T {
        composite_gauss(|x| self.eval(x), self.support_left, self.b, panels)
    }

    /// Energy `F(u) + integral of beta over the support`, see [`energy`].
    pub fn energy(&self, beta: &BetaProfile<T>) -> T {
        self.energy_with_panels(beta, DIAGNOSTIC_PANELS)
    }

    pub fn energy_with_panels(&self, beta: &BetaProfile<T>, panels: usize) -> T {
        let k2 = self.params.k2();
        let tilt = self.params.tilt();
        let b = self.b;
        let half = T::lit(0.5);
        // The linear potential is split as x = (x - b) + b to avoid cancellation.
        let local = composite_gauss(
            |x| {
                let u = self.eval(x);
                let du = self.derivative(x);
                half * du * du + half * k2 * u * u - tilt * (x - b) * u
            },
            self.support_left,
            b,
            panels,
        );
        local - tilt * b * self.params.volume() + beta.integral(self.support_left, b)
    }
}

/// Solves the linear volume-constrained problem on `(a, b)`.
///
/// Positivity is not enforced: on intervals longer than the critical length
/// the returned profile changes sign near `a`.
pub fn solve_bvp<T: Real>(a: T, b: T, params: &PhysicalParams<T>) -> Result<EquilibriumProfile<T>> {
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(DropletError::DegenerateInterval {
            a: a.as_f64(),
            b: b.as_f64(),
        });
    }
    Ok(solve_on_support(a, a, b, params))
}

fn solve_on_support<T: Real>(a: T, left: T, b: T, params: &PhysicalParams<T>) -> EquilibriumProfile<T> {
    let l = b - left;
    let tilt = params.tilt();
    let basis = Basis::new(params.k2() * l * l);
    let (i1, i2) = basis.integrals();
    let l3 = l * l * l;
    let lambda = (params.volume() - tilt * l3 * l * i2) / (l3 * i1);
    let (dw0, dw20) = basis.slopes(T::zero());
    let (dw1, dw21) = basis.slopes(T::one());
    EquilibriumProfile {
        a,
        b,
        support_left: left,
        lambda,
        slope_a: lambda * l * dw0 + tilt * l * l * dw20,
        slope_b: lambda * l * dw1 + tilt * l * l * dw21,
        params: *params,
        basis,
    }
}

/// Solves the obstacle problem (`u >= 0`) on `(a, b)`.
///
/// Computes the critical length first; use [`solve_obstacle_with`] when it is
/// already known (for instance from [`crate::tables::SlopeTables`]).
pub fn solve_obstacle<T: Real>(a: T, b: T, params: &PhysicalParams<T>) -> Result<EquilibriumProfile<T>> {
    let ell_c = critical_length(params)?;
    solve_obstacle_with(a, b, params, ell_c)
}

/// Obstacle solve with a known critical length. Intervals no longer than
/// `ell_c` give the linear solution; longer ones detach at `b - ell_c` with a
/// flat rear contact.
pub fn solve_obstacle_with<T: Real>(
    a: T,
    b: T,
    params: &PhysicalParams<T>,
    ell_c: CriticalLength<T>,
) -> Result<EquilibriumProfile<T>> {
    let mut profile = solve_bvp(a, b, params)?;
    if let CriticalLength::Finite(lc) = ell_c {
        let l = b - a;
        if l > lc {
            profile = solve_on_support(a, b - lc, b, params);
            profile.slope_a = T::zero();
        } else if l == lc {
            profile.slope_a = T::zero();
        }
    }
    Ok(profile)
}

/// Whether the profile is non-negative on its interval.
///
/// Checks the rear slope sign and a dense sample of the interior; for
/// solutions of the linear problem the two agree.
pub fn positivity_check<T: Real>(profile: &EquilibriumProfile<T>) -> bool {
    if profile.slope_a < T::zero() {
        return false;
    }
    let samples = 512;
    let left = profile.support_left;
    let l = profile.support_length();
    (1..samples).all(|i| profile.eval(left + l * T::of_usize(i) / T::of_usize(samples)) >= T::zero())
}

/// Energy `F(u) + integral_{support} beta` of a solved profile.
pub fn energy<T: Real>(profile: &EquilibriumProfile<T>, beta: &BetaProfile<T>) -> T {
    profile.energy(beta)
}
