//! Bracketing root finder and golden-section search.

use crate::error::{DropletError, Result};
use crate::scalar::Real;

/// Bisection on `[lo, hi]` for a function changing sign on the bracket.
///
/// Stops when the bracket is narrower than `x_tol` or when the midpoint no
/// longer separates the endpoints in floating point. Returns the midpoint of
/// the final bracket.
pub fn bisect<T: Real, F: FnMut(T) -> Result<T>>(mut f: F, lo: T, hi: T, x_tol: T) -> Result<T> {
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if (f_lo > T::zero()) == (f_hi > T::zero()) {
        return Err(DropletError::NotBracketed {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: f_lo.as_f64(),
            f_hi: f_hi.as_f64(),
        });
    }
    let lo_positive = f_lo > T::zero();
    for _ in 0..400 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if hi - lo <= x_tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm > T::zero()) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) * T::lit(0.5))
}

/// Golden-section search for a maximiser of a unimodal function on `[lo, hi]`.
pub fn golden_max<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, x_tol: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    (a + b) * T::lit(0.5)
}

/// Global maximiser on one interval: dense sampling followed by golden-section
/// refinement around the best sample.
pub fn sampled_max<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, samples: usize) -> (T, T) {
    let n = samples.max(3);
    let step = (hi - lo) / T::of_usize(n);
    let mut best = (lo, f(lo));
    for i in 1..=n {
        let x = lo + step * T::of_usize(i);
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let x = golden_max(&mut f, best.0 - step, best.0 + step, T::tol_floor(1e-13));
    let v = f(x);
    if v >= best.1 {
        (x, v)
    } else {
        best
    }
}
