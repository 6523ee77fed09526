//! Sampling of initial and boundary data on the parabolic boundary.

use crate::error::Result;
use crate::geometry::{Domain, Point};
use crate::scenario::verify::probe_directions;
use crate::scenario::{Expr, SampleSpec};
use crate::solver::Grid;

/// Time samples per window when maximizing boundary data over `[a, b]`.
pub const WINDOW_TIMES: usize = 17;

/// Spatial samples of the closure of a domain and of its boundary.
#[derive(Debug, Clone)]
pub struct DataSamples {
    pub closure: Vec<Point>,
    pub boundary: Vec<Point>,
}

impl DataSamples {
    /// Tensor-grid nodes for intervals and boxes; for balls, grid points of
    /// the closure and points on the sphere along the probe directions.
    pub fn new(domain: &Domain, per_axis: &[usize]) -> Result<Self> {
        match domain {
            Domain::Ball { center, radius } => {
                let n = center.len();
                let per = per_axis.iter().copied().max().unwrap_or(11);
                let closure = SampleSpec::grid(domain, per, 0.0, 0.0, 1, vec![]).points;
                let boundary = probe_directions(n)
                    .into_iter()
                    .map(|dir| center.iter().zip(&dir).map(|(c, v)| c + radius * v).collect())
                    .collect();
                Ok(DataSamples { closure, boundary })
            }
            _ => Ok(Self::from_grid(&Grid::new(domain, per_axis)?)),
        }
    }

    pub fn from_grid(grid: &Grid) -> Self {
        DataSamples {
            closure: (0..grid.len()).map(|p| grid.coords(p).to_vec()).collect(),
            boundary: grid.boundary().iter().map(|&p| grid.coords(p).to_vec()).collect(),
        }
    }

    /// `(min, max)` of `u0` over the closure.
    pub fn initial_range(&self, u0: &Expr) -> Result<(f64, f64)> {
        let mut r = (f64::INFINITY, f64::NEG_INFINITY);
        for x in &self.closure {
            let v = u0.at(x, 0.0, 0.0)?;
            r = (r.0.min(v), r.1.max(v));
        }
        Ok(r)
    }

    /// `(min, max)` of `g` over the boundary and `times`.
    pub fn boundary_range(&self, g: &Expr, times: &[f64]) -> Result<(f64, f64)> {
        let mut r = (f64::INFINITY, f64::NEG_INFINITY);
        for &t in times {
            for x in &self.boundary {
                let v = g.at(x, t, 0.0)?;
                r = (r.0.min(v), r.1.max(v));
            }
        }
        Ok(r)
    }

    /// `max φ(g(x, t))` over the boundary and `WINDOW_TIMES` equispaced times
    /// in `[a, b]`.
    pub fn boundary_window_max(
        &self,
        g: &Expr,
        a: f64,
        b: f64,
        mut phi: impl FnMut(f64) -> Result<f64>,
    ) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for t in window_times(a, b) {
            for x in &self.boundary {
                best = best.max(phi(g.at(x, t, 0.0)?)?);
            }
        }
        Ok(best)
    }

    /// `max φ(u0(x))` over the closure together with `max φ(g(x, 0))` over
    /// the boundary.
    pub fn initial_max(
        &self,
        u0: &Expr,
        g: &Expr,
        mut phi: impl FnMut(f64) -> Result<f64>,
    ) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for x in &self.closure {
            best = best.max(phi(u0.at(x, 0.0, 0.0)?)?);
        }
        for x in &self.boundary {
            best = best.max(phi(g.at(x, 0.0, 0.0)?)?);
        }
        Ok(best)
    }
}

pub fn window_times(a: f64, b: f64) -> impl Iterator<Item = f64> {
    let n = WINDOW_TIMES;
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// `n` equispaced times in `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// `n` geometric times in `[a, b]`, `a > 0`.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64))
        .collect()
}
