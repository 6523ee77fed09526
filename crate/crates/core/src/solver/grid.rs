//! Tensor grids on intervals and boxes, and the discrete solution state.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::scenario::Expr;

/// Uniform tensor grid. Node `p` has multi-index `(k_0, ..., k_{n-1})` with
/// `p = Σ k_i stride_i` and axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub lower: Vec<f64>,
    pub h: Vec<f64>,
    pub strides: Vec<usize>,
    coords: Vec<f64>,
    boundary: Vec<bool>,
    interior_nodes: Vec<usize>,
    boundary_nodes: Vec<usize>,
}

impl Grid {
    pub fn new(domain: &Domain, resolution: &[usize]) -> Result<Grid> {
        let (lower, upper) = domain
            .axis_bounds()
            .ok_or_else(|| Error::UnsupportedDomain(domain.kind_name().into()))?;
        let n = lower.len();
        if resolution.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: resolution.len(),
            });
        }
        if let Some(&bad) = resolution.iter().find(|&&r| r < 3) {
            return Err(Error::BadParameter(format!(
                "grid resolution must be at least 3 nodes per axis, got {bad}"
            )));
        }
        let dims = resolution.to_vec();
        let h: Vec<f64> = (0..n)
            .map(|i| (upper[i] - lower[i]) / (dims[i] - 1) as f64)
            .collect();
        let mut strides = vec![1; n];
        for i in 1..n {
            strides[i] = strides[i - 1] * dims[i - 1];
        }
        let total: usize = dims.iter().product();
        let mut coords = Vec::with_capacity(total * n);
        let mut boundary = Vec::with_capacity(total);
        for p in 0..total {
            let mut on_boundary = false;
            for i in 0..n {
                let k = (p / strides[i]) % dims[i];
                on_boundary |= k == 0 || k == dims[i] - 1;
                // Hit the upper bound exactly at the last node.
                let x = if k == dims[i] - 1 {
                    upper[i]
                } else {
                    lower[i] + k as f64 * h[i]
                };
                coords.push(x);
            }
            boundary.push(on_boundary);
        }
        let interior_nodes = (0..total).filter(|&p| !boundary[p]).collect();
        let boundary_nodes = (0..total).filter(|&p| boundary[p]).collect();
        Ok(Grid {
            dims,
            lower,
            h,
            strides,
            coords,
            boundary,
            interior_nodes,
            boundary_nodes,
        })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn coords(&self, p: usize) -> &[f64] {
        let n = self.dim();
        &self.coords[p * n..(p + 1) * n]
    }

    pub fn is_boundary(&self, p: usize) -> bool {
        self.boundary[p]
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior_nodes
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary_nodes
    }

    /// Largest spacing.
    pub fn h_max(&self) -> f64 {
        self.h.iter().cloned().fold(0.0, f64::max)
    }

    /// Centered first differences at an interior node.
    pub fn gradient(&self, u: &[f64], p: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let s = self.strides[i];
            *o = (u[p + s] - u[p - s]) / (2.0 * self.h[i]);
        }
    }

    /// Second differences at an interior node (row-major `n x n`): centered
    /// on the diagonal, 4-point cross stencil off the diagonal.
    pub fn hessian(&self, u: &[f64], p: usize, out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let si = self.strides[i];
            out[i * n + i] = (u[p + si] - 2.0 * u[p] + u[p - si]) / (self.h[i] * self.h[i]);
            for j in i + 1..n {
                let sj = self.strides[j];
                let v = (u[p + si + sj] - u[p + si - sj] - u[p - si + sj] + u[p - si - sj])
                    / (4.0 * self.h[i] * self.h[j]);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
    }
}

/// Sup-norm statistics of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub max_u: f64,
    pub min_u: f64,
    pub max_abs_u: f64,
    /// `max |u - u_*|` over all nodes.
    pub max_dev_ustar: f64,
    /// `max |g - u_*|` over boundary nodes.
    pub boundary_max: f64,
}

/// Discrete field at one time level.
#[derive(Debug, Clone)]
pub struct GridState {
    pub grid: Arc<Grid>,
    pub u: Vec<f64>,
    pub t: f64,
    pub u_star: f64,
}

impl GridState {
    pub fn stats(&self) -> Stats {
        let mut s = Stats {
            max_u: f64::NEG_INFINITY,
            min_u: f64::INFINITY,
            max_abs_u: 0.0,
            max_dev_ustar: 0.0,
            boundary_max: 0.0,
        };
        for (p, &v) in self.u.iter().enumerate() {
            s.max_u = s.max_u.max(v);
            s.min_u = s.min_u.min(v);
            s.max_abs_u = s.max_abs_u.max(v.abs());
            let dev = (v - self.u_star).abs();
            s.max_dev_ustar = s.max_dev_ustar.max(dev);
            if self.grid.is_boundary(p) {
                s.boundary_max = s.boundary_max.max(dev);
            }
        }
        s
    }

    /// Largest interior value.
    pub fn interior_max(&self) -> f64 {
        self.grid
            .interior()
            .iter()
            .map(|&p| self.u[p])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sample `u0` in the interior and `g(·, 0)` on the boundary.
pub fn build_grid(domain: &Domain, resolution: &[usize], u0: &Expr, g: &Expr, u_star: f64) -> Result<GridState> {
    let grid = Arc::new(Grid::new(domain, resolution)?);
    let mut u = vec![0.0; grid.len()];
    for (p, v) in u.iter_mut().enumerate() {
        let x = grid.coords(p);
        *v = if grid.is_boundary(p) {
            g.at(x, 0.0, 0.0)?
        } else {
            u0.at(x, 0.0, 0.0)?
        };
    }
    Ok(GridState {
        grid,
        u,
        t: 0.0,
        u_star,
    })
}

/// `max |u0 - g(·,0)|` over boundary nodes; nonzero values mean the data
/// are incompatible at the corner of the parabolic boundary.
pub fn compatibility_mismatch(grid: &Grid, u0: &Expr, g: &Expr) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &p in grid.boundary() {
        let x = grid.coords(p);
        worst = worst.max((u0.at(x, 0.0, 0.0)? - g.at(x, 0.0, 0.0)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn linear_sampling() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let st = build_grid(&d, &[5], &e("x1"), &e("x1"), 0.0).unwrap();
        assert_eq!(st.u, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(compatibility_mismatch(&st.grid, &e("x1"), &e("0")).unwrap(), 1.0);
    }

    #[test]
    fn box_counts() {
        let d = Domain::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let g = Grid::new(&d, &[3, 3]).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.boundary().len(), 8);
        assert_eq!(g.interior(), &[4]);
        assert_eq!(g.coords(5), &[1.0, 0.5]);
    }

    #[test]
    fn rejects_ball_and_coarse_grids() {
        let ball = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            Grid::new(&ball, &[5, 5]),
            Err(Error::UnsupportedDomain(_))
        ));
        let d = Domain::interval(0.0, 1.0).unwrap();
        assert!(Grid::new(&d, &[2]).is_err());
        assert!(Grid::new(&d, &[5, 5]).is_err());
    }

    #[test]
    fn stencils_exact_on_quadratics() {
        let d = Domain::boxed(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let st = build_grid(&d, &[5, 7], &e("x1^2 + 3*x1*x2 - x2^2"), &e("x1^2 + 3*x1*x2 - x2^2"), 0.0)
            .unwrap();
        let p = 2 + 3 * 5;
        let mut hess = [0.0; 4];
        st.grid.hessian(&st.u, p, &mut hess);
        for (a, b) in hess.iter().zip([2.0, 3.0, 3.0, -2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let mut grad = [0.0; 2];
        st.grid.gradient(&st.u, p, &mut grad);
        let x = st.grid.coords(p);
        assert!((grad[0] - (2.0 * x[0] + 3.0 * x[1])).abs() < 1e-12);
        assert!((grad[1] - (3.0 * x[0] - 2.0 * x[1])).abs() < 1e-12);
    }
}
