//! Memoized node values with checked linear interpolation.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::Result;
use crate::scalar::Real;

/// Index-addressed node set.
pub(crate) trait Grid<T>: Send + Sync {
    fn node(&self, i: i64) -> T;
    /// Index `i` with `node(i) <= x < node(i + 1)`, or `None` when `x` lies
    /// where the interpolation stencil `i - 1 ..= i + 2` is not available.
    fn locate(&self, x: T) -> Option<i64>;
}

/// Uniform nodes `i * spacing` for `i >= first`.
pub(crate) struct Uniform<T> {
    pub spacing: T,
    pub first: i64,
}

impl<T: Real> Grid<T> for Uniform<T> {
    fn node(&self, i: i64) -> T {
        self.spacing * T::from_i64(i).unwrap()
    }

    fn locate(&self, x: T) -> Option<i64> {
        let i = (x / self.spacing).floor().to_i64()?;
        (i - 1 >= self.first).then_some(i)
    }
}

/// Thread-safe node store. Values between nodes are interpolated linearly;
/// if the local second differences suggest an interpolation error above
/// `tol`, the exact evaluator is used instead.
pub(crate) struct InterpCache<T, const K: usize> {
    nodes: RwLock<HashMap<i64, [T; K]>>,
    tol: T,
}

impl<T: Real, const K: usize> InterpCache<T, K> {
    pub fn new(tol: T) -> Self {
        Self {
            nodes: RwLock::new(HashMap::new()),
            tol,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.read().map(|m| m.len()).unwrap_or(0)
    }

    /// Cached nodes sorted by index.
    pub fn snapshot(&self) -> Vec<(i64, [T; K])> {
        let mut out: Vec<_> = match self.nodes.read() {
            Ok(m) => m.iter().map(|(i, v)| (*i, *v)).collect(),
            Err(_) => Vec::new(),
        };
        out.sort_by_key(|(i, _)| *i);
        out
    }

    fn fetch<G, F>(&self, grid: &G, i: i64, exact: &F) -> Result<[T; K]>
    where
        G: Grid<T> + ?Sized,
        F: Fn(T) -> Result<[T; K]>,
    {
        if let Some(v) = self.nodes.read().ok().and_then(|m| m.get(&i).copied()) {
            return Ok(v);
        }
        let v = exact(grid.node(i))?;
        if let Ok(mut m) = self.nodes.write() {
            m.insert(i, v);
        }
        Ok(v)
    }

    pub fn eval<G, F>(&self, grid: &G, x: T, exact: F) -> Result<[T; K]>
    where
        G: Grid<T> + ?Sized,
        F: Fn(T) -> Result<[T; K]>,
    {
        let Some(i) = grid.locate(x) else {
            return exact(x);
        };
        let mut v = [[T::zero(); K]; 4];
        for (j, slot) in v.iter_mut().enumerate() {
            *slot = self.fetch(grid, i - 1 + j as i64, &exact)?;
        }
        let xs = [grid.node(i - 1), grid.node(i), grid.node(i + 1), grid.node(i + 2)];
        let quarter = T::lit(0.25);
        let mut estimate = T::zero();
        for k in 0..K {
            for c in 1..3 {
                let w = (xs[c] - xs[c - 1]) / (xs[c + 1] - xs[c - 1]);
                let chord = v[c - 1][k] + w * (v[c + 1][k] - v[c - 1][k]);
                estimate = estimate.max(quarter * (v[c][k] - chord).abs());
            }
        }
        if !(estimate <= self.tol) {
            return exact(x);
        }
        let w = (x - xs[1]) / (xs[2] - xs[1]);
        let mut out = [T::zero(); K];
        for k in 0..K {
            out[k] = v[1][k] + w * (v[2][k] - v[1][k]);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_smooth_function_within_tolerance() {
        let grid = Uniform { spacing: 1e-3, first: 1 };
        let cache = InterpCache::<f64, 1>::new(1e-7);
        for i in 0..500 {
            let x = 0.01 + 0.0137 * i as f64;
            let v = cache.eval(&grid, x, |t| Ok([t.sin()])).unwrap()[0];
            assert!((v - x.sin()).abs() < 2e-7);
        }
        assert!(cache.len() > 0);
    }

    #[test]
    fn falls_back_to_exact_on_kinks() {
        let grid = Uniform { spacing: 0.1, first: 1 };
        let cache = InterpCache::<f64, 1>::new(1e-7);
        let f = |t: f64| Ok([(t - 0.55).abs()]);
        let v = cache.eval(&grid, 0.56, f).unwrap()[0];
        assert!((v - 0.01).abs() < 1e-15);
    }

    #[test]
    fn outside_stencil_uses_exact() {
        let grid = Uniform { spacing: 0.1, first: 1 };
        let cache = InterpCache::<f64, 1>::new(1.0);
        let v = cache.eval(&grid, 0.15, |t| Ok([t * t])).unwrap()[0];
        assert_eq!(v, 0.0225);
        assert_eq!(cache.len(), 0);
    }
}
