//! Brute-force reference solvers used to validate the closed-form path.
//!
//! Nothing here touches the `equilibrium` module; the finite-difference
//! solvers only read [`PhysicalParams`].

use crate::error::{DropletError, Result};
use crate::params::PhysicalParams;
use crate::scalar::Real;

/// Grid solution of the volume-constrained problem.
#[derive(Debug, Clone)]
pub struct GridSolution<T> {
    /// Number of grid intervals (`n + 1` nodes).
    pub n: usize,
    pub nodes: Vec<T>,
    pub values: Vec<T>,
    pub lambda: T,
    /// Left edge of the positivity set.
    pub support_left: T,
    /// Three-point one-sided slope at `support_left`.
    pub slope_a: T,
    /// Three-point one-sided slope at `b`.
    pub slope_b: T,
}

impl<T: Real> GridSolution<T> {
    pub fn spacing(&self) -> T {
        self.nodes[1] - self.nodes[0]
    }

    /// Trapezoidal volume (boundary values vanish).
    pub fn trapezoidal_volume(&self) -> T {
        let h = self.spacing();
        let inner = self.values[1..self.n].iter().fold(T::zero(), |acc, v| acc + *v);
        inner * h
    }
}

/// Solves `-u'' + k2 u = lambda + (x - b) tilt` on `(a, b)` with zero boundary
/// values and trapezoidal volume `V0`, using second-order central differences.
///
/// The bordered system (tridiagonal block plus one dense row and column for
/// `lambda`) is solved through two tridiagonal solves and a scalar Schur
/// complement.
pub fn fd_bvp<T: Real>(a: T, b: T, params: &PhysicalParams<T>, n: usize) -> Result<GridSolution<T>> {
    check(a, b, n)?;
    let h = (b - a) / T::of_usize(n);
    let nodes = grid(a, h, n);
    let inv_h2 = T::one() / (h * h);
    let diag = T::lit(2.0) * inv_h2 + params.k2();
    let off = -inv_h2;
    let forcing: Vec<T> = nodes[1..n].iter().map(|x| (*x - b) * params.tilt()).collect();
    let ones = vec![T::one(); n - 1];
    let y = thomas(off, diag, &forcing)?;
    let z = thomas(off, diag, &ones)?;
    let sum_y = y.iter().fold(T::zero(), |s, v| s + *v);
    let sum_z = z.iter().fold(T::zero(), |s, v| s + *v);
    if !(sum_z > T::zero()) {
        return Err(DropletError::Singular("volume row of the bordered system"));
    }
    let lambda = (params.volume() / h - sum_y) / sum_z;
    let mut values = vec![T::zero(); n + 1];
    for i in 1..n {
        values[i] = y[i - 1] + lambda * z[i - 1];
    }
    Ok(finish(nodes, values, lambda, 0, n))
}

/// `(lambda, slope_a, slope_b)` from [`fd_bvp`] on `n` and `2n` intervals,
/// Richardson-extrapolated to remove the `h^2` term.
pub fn fd_bvp_extrapolated<T: Real>(a: T, b: T, params: &PhysicalParams<T>, n: usize) -> Result<[T; 3]> {
    let coarse = fd_bvp(a, b, params, n)?;
    let fine = fd_bvp(a, b, params, 2 * n)?;
    let ex = |c: T, f: T| (T::lit(4.0) * f - c) / T::lit(3.0);
    Ok([
        ex(coarse.lambda, fine.lambda),
        ex(coarse.slope_a, fine.slope_a),
        ex(coarse.slope_b, fine.slope_b),
    ])
}

/// Discrete obstacle problem `min{-u'' + k2 u - lambda - (x - b) tilt, u} = 0`
/// with trapezoidal volume `V0`.
///
/// Inner solve: projected SOR at fixed `lambda`, converged when the largest
/// update drops below `1e-10`. Outer solve: secant updates on `lambda`, which
/// are exact once the active set stops changing.
pub fn fd_obstacle<T: Real>(
    a: T,
    b: T,
    params: &PhysicalParams<T>,
    n: usize,
) -> Result<GridSolution<T>> {
    check(a, b, n)?;
    let start = fd_bvp(a, b, params, n)?;
    if start.values.iter().all(|v| *v >= T::zero()) {
        return Ok(start);
    }
    let h = start.spacing();
    let nodes = start.nodes.clone();
    let inv_h2 = T::one() / (h * h);
    let diag = T::lit(2.0) * inv_h2 + params.k2();
    let omega = T::lit(2.0) / (T::one() + (T::PI() / T::of_usize(n)).sin());
    let tol = T::tol_floor(1e-10);
    let sweep_cap = 40 * n + 20_000;

    let mut u: Vec<T> = start.values.iter().map(|v| v.max(T::zero())).collect();
    let psor = |lambda: T, u: &mut Vec<T>| -> Result<T> {
        for _ in 0..sweep_cap {
            let mut largest = T::zero();
            for i in 1..n {
                let rhs = lambda + (nodes[i] - b) * params.tilt();
                let gs = (rhs + (u[i - 1] + u[i + 1]) * inv_h2) / diag;
                let next = (u[i] + omega * (gs - u[i])).max(T::zero());
                largest = largest.max((next - u[i]).abs());
                u[i] = next;
            }
            if largest < tol {
                let inner = u[1..n].iter().fold(T::zero(), |s, v| s + *v);
                return Ok(inner * h);
            }
        }
        Err(DropletError::NotConverged {
            what: "projected SOR",
            iterations: sweep_cap,
        })
    };

    let target = params.volume();
    let mut lam0 = start.lambda;
    let mut vol0 = psor(lam0, &mut u)?;
    let mut lam1 = lam0 * T::lit(1.05) + T::lit(1e-3);
    let mut vol1 = psor(lam1, &mut u)?;
    for _ in 0..60 {
        let settled = (lam1 - lam0).abs() <= T::tol_floor(1e-13) * lam1.abs();
        if (vol1 - target).abs() <= T::tol_floor(1e-9) * target || settled {
            let first = (1..n).find(|&i| u[i] > T::zero()).unwrap_or(1);
            let lambda = lam1;
            let edge = first - 1;
            return Ok(finish(nodes, u, lambda, edge, n));
        }
        if vol1 == vol0 {
            return Err(DropletError::Singular("volume insensitive to lambda"));
        }
        let lam2 = lam1 + (target - vol1) * (lam1 - lam0) / (vol1 - vol0);
        lam0 = lam1;
        vol0 = vol1;
        lam1 = lam2;
        vol1 = psor(lam1, &mut u)?;
    }
    Err(DropletError::NotConverged {
        what: "obstacle volume iteration",
        iterations: 60,
    })
}

/// Critical length from the finite-difference rear slope: bisection on the
/// sign change of `slope_a(l)` of [`fd_bvp`] on `(0, l)`.
pub fn fd_critical_length<T: Real>(params: &PhysicalParams<T>, n: usize, lo: T, hi: T) -> Result<T> {
    let slope = |l: T| fd_bvp(T::zero(), l, params, n).map(|s| s.slope_a);
    let (mut lo, mut hi) = (lo, hi);
    let (s_lo, s_hi) = (slope(lo)?, slope(hi)?);
    if !(s_lo > T::zero() && s_hi < T::zero()) {
        return Err(DropletError::NotBracketed {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: s_lo.as_f64(),
            f_hi: s_hi.as_f64(),
        });
    }
    while hi - lo > T::tol_floor(1e-12) * hi {
        let mid = (lo + hi) * T::lit(0.5);
        if slope(mid)? > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// Classical RK4 integration of `a' = rear(a, b)`, `b' = front(a, b)` over
/// `duration` with `substeps` equal steps. Serves as the fine-step reference
/// flow for order checks of the explicit scheme.
pub fn reference_flow<T, R, F>(a: T, b: T, duration: T, substeps: usize, rear: R, front: F) -> (T, T)
where
    T: Real,
    R: Fn(T, T) -> T,
    F: Fn(T, T) -> T,
{
    let dt = duration / T::of_usize(substeps.max(1));
    let half = dt * T::lit(0.5);
    let (mut a, mut b) = (a, b);
    for _ in 0..substeps.max(1) {
        let (ka1, kb1) = (rear(a, b), front(a, b));
        let (ka2, kb2) = (rear(a + half * ka1, b + half * kb1), front(a + half * ka1, b + half * kb1));
        let (ka3, kb3) = (rear(a + half * ka2, b + half * kb2), front(a + half * ka2, b + half * kb2));
        let (ka4, kb4) = (rear(a + dt * ka3, b + dt * kb3), front(a + dt * ka3, b + dt * kb3));
        let sixth = dt / T::lit(6.0);
        a = a + sixth * (ka1 + T::lit(2.0) * (ka2 + ka3) + ka4);
        b = b + sixth * (kb1 + T::lit(2.0) * (kb2 + kb3) + kb4);
    }
    (a, b)
}

fn check<T: Real>(a: T, b: T, n: usize) -> Result<()> {
    if !(b > a) {
        return Err(DropletError::DegenerateInterval {
            a: a.as_f64(),
            b: b.as_f64(),
        });
    }
    if n < 16 {
        return Err(DropletError::Precondition(format!(
            "finite-difference oracle needs at least 16 intervals, got {n}"
        )));
    }
    Ok(())
}

fn grid<T: Real>(a: T, h: T, n: usize) -> Vec<T> {
    (0..=n).map(|i| a + h * T::of_usize(i)).collect()
}

fn finish<T: Real>(nodes: Vec<T>, values: Vec<T>, lambda: T, edge: usize, n: usize) -> GridSolution<T> {
    let h = nodes[1] - nodes[0];
    let two_h = T::lit(2.0) * h;
    let slope_a = (-T::lit(3.0) * values[edge] + T::lit(4.0) * values[edge + 1] - values[edge + 2]) / two_h;
    let slope_b = (T::lit(3.0) * values[n] - T::lit(4.0) * values[n - 1] + values[n - 2]) / two_h;
    GridSolution {
        n,
        support_left: nodes[edge],
        nodes,
        values,
        lambda,
        slope_a,
        slope_b,
    }
}

/// Thomas algorithm for a constant-coefficient symmetric tridiagonal system.
fn thomas<T: Real>(off: T, diag: T, rhs: &[T]) -> Result<Vec<T>> {
    let m = rhs.len();
    let mut c = vec![T::zero(); m];
    let mut d = vec![T::zero(); m];
    let mut denom = diag;
    if denom == T::zero() {
        return Err(DropletError::Singular("tridiagonal pivot"));
    }
    c[0] = off / denom;
    d[0] = rhs[0] / denom;
    for i in 1..m {
        denom = diag - off * c[i - 1];
        if denom == T::zero() {
            return Err(DropletError::Singular("tridiagonal pivot"));
        }
        c[i] = off / denom;
        d[i] = (rhs[i] - off * d[i - 1]) / denom;
    }
    for i in (0..m - 1).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    Ok(d)
}
