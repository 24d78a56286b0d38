//! Gauss–Legendre and adaptive Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{DropletError, Result};
use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Fixed-order rule used by the composite integrator.
pub const GAUSS_ORDER: usize = 20;

fn cached_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(GAUSS_ORDER))
}

/// Composite Gauss–Legendre quadrature of order [`GAUSS_ORDER`] over
/// `panels` equal sub-intervals of `[a, b]`.
pub fn composite_gauss<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, panels: usize) -> T {
    let (nodes, weights) = cached_rule();
    let panels = panels.max(1);
    let width = (b - a) / T::of_usize(panels);
    let half = width * T::lit(0.5);
    let mut total = T::zero();
    for p in 0..panels {
        let mid = a + width * (T::of_usize(p) + T::lit(0.5));
        let mut acc = T::zero();
        for (x, w) in nodes.iter().zip(weights) {
            acc = acc + T::lit(*w) * f(mid + half * T::lit(*x));
        }
        total = total + acc * half;
    }
    total
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel; returns the Kronrod estimate and the
/// difference to the embedded 7-point Gauss estimate.
fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let center = (a + b) * T::lit(0.5);
    let half = (b - a) * T::lit(0.5);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(WGK[j]) * s;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * s;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

/// Globally adaptive Gauss–Kronrod (7/15) integration.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate falls below `max(abs_tol, rel_tol |I|)`, or until the worst
/// panel is limited by rounding.
pub fn adaptive<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
) -> Result<T> {
    const MAX_PANELS: usize = 20_000;
    if a == b {
        return Ok(T::zero());
    }
    let total_len = (b - a).abs();
    let (value, err) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { lo: a, hi: b, value, err });
    let (mut sum, mut err_sum) = (value, err);
    loop {
        if err_sum <= abs_tol.max(rel_tol * sum.abs()) {
            break;
        }
        let Some(p) = heap.pop() else { break };
        let rounding = p.err <= T::lit(50.0) * T::epsilon() * p.value.abs();
        let tiny = (p.hi - p.lo).abs() <= total_len * T::epsilon() * T::lit(16.0);
        if rounding || tiny {
            heap.push(p);
            break;
        }
        if heap.len() + 2 > MAX_PANELS {
            return Err(DropletError::NotConverged {
                what: "adaptive quadrature",
                iterations: heap.len() + 2,
            });
        }
        let mid = (p.lo + p.hi) * T::lit(0.5);
        let (lv, le) = gk15(&mut f, p.lo, mid);
        let (rv, re) = gk15(&mut f, mid, p.hi);
        sum = sum - p.value + lv + rv;
        err_sum = err_sum - p.err + le + re;
        heap.push(Panel { lo: p.lo, hi: mid, value: lv, err: le });
        heap.push(Panel { lo: mid, hi: p.hi, value: rv, err: re });
    }
    // Resum to shed the drift of the running totals.
    Ok(heap.iter().fold(T::zero(), |s, p| s + p.value))
}

#[derive(Clone, Copy)]
struct Panel<T> {
    lo: T,
    hi: T,
    value: T,
    err: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl<T: Real> Eq for Panel<T> {}

impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}
