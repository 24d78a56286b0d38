//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{DropletError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rtol: T::tol_floor(1e-11),
            atol: T::tol_floor(1e-13),
            max_steps: 1_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order ones.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(x, y)` from `x0` to `x1` (`x1 > x0`).
///
/// `step` carries the step size between calls; `project` is applied to every
/// accepted state (used for one-sided constraints).
pub fn integrate<T, const N: usize, F, P>(
    mut f: F,
    x0: T,
    y0: [T; N],
    x1: T,
    step: &mut T,
    opts: &OdeOptions<T>,
    mut project: P,
) -> Result<[T; N]>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
    P: FnMut(&mut [T; N]),
{
    let span = x1 - x0;
    if !(span > T::zero()) {
        return Ok(y0);
    }
    let mut x = x0;
    let mut y = y0;
    let mut h = if *step > T::zero() { step.min(span) } else { span * T::lit(1e-3) };
    let h_min = span.abs().max(x0.abs()) * T::epsilon() * T::lit(16.0);
    let mut k = [[T::zero(); N]; 7];
    k[0] = f(x, &y)?;
    for _ in 0..opts.max_steps {
        let last = x + h >= x1;
        if last {
            h = x1 - x;
        }
        for s in 1..7 {
            let mut ys = y;
            for (i, v) in ys.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc = acc + T::lit(A[s][j]) * kj[i];
                }
                *v = *v + h * acc;
            }
            k[s] = f(x + T::lit(C[s]) * h, &ys)?;
        }
        let mut y_new = y;
        let mut err = T::zero();
        for i in 0..N {
            let mut acc = T::zero();
            let mut est = T::zero();
            for s in 0..6 {
                acc = acc + T::lit(A[6][s]) * k[s][i];
            }
            for (s, ks) in k.iter().enumerate() {
                est = est + T::lit(E[s]) * ks[i];
            }
            y_new[i] = y[i] + h * acc;
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((h * est).abs() / scale);
        }
        if err <= T::one() || h <= h_min {
            x = if last { x1 } else { x + h };
            let raw = y_new;
            project(&mut y_new);
            y = y_new;
            if last {
                *step = h.max(*step * T::lit(0.5));
                return Ok(y);
            }
            // The last stage is the derivative at the new point unless the
            // projection moved the state.
            k[0] = if raw == y { k[6] } else { f(x, &y)? };
            let grow = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0))
            };
            h = h * grow;
            *step = h;
        } else {
            let shrink = (T::lit(0.9) * err.powf(T::lit(-0.25))).max(T::lit(0.1));
            h = (h * shrink).max(h_min);
        }
    }
    Err(DropletError::NotConverged {
        what: "adaptive integrator",
        iterations: opts.max_steps,
    })
}
