//! Explicit Euler time stepping with centered diffusion and upwind
//! transport.

use std::sync::Arc;

use super::grid::{build_grid, Grid, GridState};
use crate::error::{Error, Result};
use crate::scenario::expr::{BinOp, Node};
use crate::scenario::{Expr, Mode, Scenario};

/// Fraction of the stability bound used as time step.
pub const CFL_FRACTION: f64 = 0.9;
/// Blow-up threshold relative to the initial data scale.
const INSTABILITY_FACTOR: f64 = 1e6;

/// A coefficient sampled on a node set, re-evaluated only as often as its
/// variable dependencies require.
#[derive(Debug, Clone)]
enum Coef {
    Const(f64),
    /// Depends on `x` only; values per node.
    Spatial(Vec<f64>),
    /// Depends on `t` only; value refreshed once per step.
    Temporal(Expr, f64),
    /// Product of a function of `t` and a function of `x`; the spatial
    /// factor is sampled once.
    Separable(Expr, Vec<f64>, Vec<f64>),
    /// Depends on `x` and `t` (and possibly `s`); values per node per step.
    General(Expr, Vec<f64>),
}

/// Split `expr` as `a(t) * b(x)` when its root is such a product.
fn separable_factors(expr: &Expr) -> Option<(Expr, Expr)> {
    let Node::Bin(BinOp::Mul, l, r) = expr.node() else {
        return None;
    };
    let (l, r) = (Expr::from_node((**l).clone()), Expr::from_node((**r).clone()));
    let temporal = |e: &Expr| !e.deps().x && !e.deps().s;
    let spatial = |e: &Expr| !e.deps().t && !e.deps().s;
    if temporal(&l) && spatial(&r) {
        Some((l, r))
    } else if temporal(&r) && spatial(&l) {
        Some((r, l))
    } else {
        None
    }
}

impl Coef {
    fn new(expr: &Expr, grid: &Grid, nodes: &[usize]) -> Result<Coef> {
        let deps = expr.deps();
        if let Some(v) = expr.as_constant() {
            return Ok(Coef::Const(v));
        }
        if !deps.t && !deps.s {
            let mut vals = vec![0.0; grid.len()];
            for &p in nodes {
                vals[p] = expr.at(grid.coords(p), 0.0, 0.0)?;
            }
            return Ok(Coef::Spatial(vals));
        }
        if !deps.x && !deps.s {
            return Ok(Coef::Temporal(expr.clone(), f64::NAN));
        }
        if let Some((time, space)) = separable_factors(expr) {
            let mut shape = vec![0.0; grid.len()];
            for &p in nodes {
                shape[p] = space.at(grid.coords(p), 0.0, 0.0)?;
            }
            return Ok(Coef::Separable(time, shape, vec![0.0; grid.len()]));
        }
        Ok(Coef::General(expr.clone(), vec![0.0; grid.len()]))
    }

    fn is_zero(&self) -> bool {
        matches!(self, Coef::Const(v) if *v == 0.0)
    }

    fn is_static(&self) -> bool {
        matches!(self, Coef::Const(_) | Coef::Spatial(_))
    }

    fn refresh(&mut self, grid: &Grid, nodes: &[usize], t: f64, u: &[f64]) -> Result<()> {
        match self {
            Coef::Const(_) | Coef::Spatial(_) => {}
            Coef::Temporal(e, v) => *v = e.at_t(t)?,
            Coef::Separable(e, shape, vals) => {
                let a = e.at_t(t)?;
                for &p in nodes {
                    vals[p] = a * shape[p];
                }
            }
            Coef::General(e, vals) => {
                for &p in nodes {
                    vals[p] = e.at(grid.coords(p), t, u[p])?;
                }
            }
        }
        Ok(())
    }

    #[inline(always)]
    fn at(&self, p: usize) -> f64 {
        match self {
            Coef::Const(v) | Coef::Temporal(_, v) => *v,
            Coef::Spatial(vals) | Coef::Separable(_, _, vals) | Coef::General(_, vals) => vals[p],
        }
    }
}

/// Weights `rate[p] = Σ_o w[p][o] u[p + o] + f(p)` of a static linear
/// operator, one row of `offsets.len()` weights per interior node.
#[derive(Debug, Clone)]
struct Stencil {
    offsets: Vec<isize>,
    weights: Vec<f64>,
}

/// Finite-difference solver for one scenario on one grid.
#[derive(Debug, Clone)]
pub struct Solver {
    scenario: Scenario,
    grid: Arc<Grid>,
    a_diag: Vec<Coef>,
    a_off: Vec<(usize, usize, Coef)>,
    drift: Vec<Coef>,
    /// Full `n x n` entries of `K`, present only in nonlinear mode.
    k: Option<Vec<Coef>>,
    f: Coef,
    g: Coef,
    rate: Vec<f64>,
    scale: f64,
    static_bound: Option<f64>,
    /// Fixed weights of the spatial operator when it does not change in
    /// time or with the solution.
    stencil: Option<Stencil>,
    /// Worst violation of the diagonal-dominance condition for monotone
    /// mixed stencils (positive means violated).
    pub monotonicity_defect: f64,
}

impl Solver {
    pub fn new(scenario: &Scenario, resolution: &[usize]) -> Result<Solver> {
        scenario.validate()?;
        let grid = Arc::new(Grid::new(&scenario.domain, resolution)?);
        let n = grid.dim();
        let interior = grid.interior().to_vec();
        let boundary = grid.boundary().to_vec();
        let mut a_diag = Vec::new();
        let mut a_off = Vec::new();
        for i in 0..n {
            a_diag.push(Coef::new(scenario.a.get(i, i), &grid, &interior)?);
            for j in i + 1..n {
                let c = Coef::new(scenario.a.get(i, j), &grid, &interior)?;
                if !c.is_zero() {
                    a_off.push((i, j, c));
                }
            }
        }
        let drift = scenario
            .drift
            .iter()
            .map(|e| Coef::new(e, &grid, &interior))
            .collect::<Result<Vec<_>>>()?;
        let k = match (&scenario.k, scenario.mode) {
            (Some(k), Mode::Nonlinear) => {
                let mut entries = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        entries.push(Coef::new(k.get(i, j), &grid, &interior)?);
                    }
                }
                if entries.iter().all(Coef::is_zero) {
                    None
                } else {
                    Some(entries)
                }
            }
            _ => None,
        };
        let f = Coef::new(&scenario.f, &grid, &interior)?;
        let g = Coef::new(&scenario.g, &grid, &boundary)?;
        let mut solver = Solver {
            scenario: scenario.clone(),
            rate: vec![0.0; grid.len()],
            grid,
            a_diag,
            a_off,
            drift,
            k,
            f,
            g,
            scale: 1.0,
            static_bound: None,
            stencil: None,
            monotonicity_defect: 0.0,
        };
        let init = solver.initial_state()?;
        solver.scale = init.u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if solver.a_diag.iter().all(Coef::is_static)
            && solver.a_off.iter().all(|(_, _, c)| c.is_static())
            && solver.drift.iter().all(Coef::is_static)
            && solver.k.is_none()
        {
            solver.static_bound = Some(solver.stability_rate(&init.u));
            solver.stencil = Some(solver.linear_stencil());
        }
        solver.monotonicity_defect = solver.mixed_defect();
        Ok(solver)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn initial_state(&self) -> Result<GridState> {
        let mut st = build_grid(
            &self.scenario.domain,
            &self.grid.dims,
            &self.scenario.u0,
            &self.scenario.g,
            self.scenario.u_star,
        )?;
        st.grid = Arc::clone(&self.grid);
        if self.scenario.mode == Mode::Nonlinear {
            self.check_range(&st.u, 0.0)?;
        }
        Ok(st)
    }

    fn check_range(&self, u: &[f64], t: f64) -> Result<()> {
        let fam = &self.scenario.p_family;
        for &v in u {
            if !fam.contains(v) {
                return Err(Error::RangeExit {
                    t,
                    value: v,
                    range: fam.range_name().into(),
                });
            }
        }
        Ok(())
    }

    fn mixed_defect(&self) -> f64 {
        let n = self.grid.dim();
        let h = &self.grid.h;
        let mut worst = f64::NEG_INFINITY;
        for &p in self.grid.interior() {
            for i in 0..n {
                let mut off = 0.0;
                for (a, b, c) in &self.a_off {
                    if *a == i || *b == i {
                        let j = if *a == i { *b } else { *a };
                        off += c.at(p).abs() / (2.0 * h[i] * h[j]);
                    }
                }
                worst = worst.max(off - self.a_diag[i].at(p) / (h[i] * h[i]));
            }
        }
        worst
    }

    fn refresh(&mut self, t: f64, u: &[f64]) -> Result<()> {
        let grid = &*self.grid;
        let nodes = grid.interior();
        for c in self.a_diag.iter_mut() {
            c.refresh(grid, nodes, t, u)?;
        }
        for (_, _, c) in self.a_off.iter_mut() {
            c.refresh(grid, nodes, t, u)?;
        }
        for c in self.drift.iter_mut() {
            c.refresh(grid, nodes, t, u)?;
        }
        if let Some(k) = self.k.as_mut() {
            for c in k.iter_mut() {
                c.refresh(grid, nodes, t, u)?;
            }
        }
        self.f.refresh(grid, nodes, t, u)
    }

    /// Total drift at an interior node: `B̃` plus the lagged quadratic
    /// drift `P'(u) K ∇u`.
    #[inline(always)]
    fn total_drift(&self, u: &[f64], p: usize, grad: &mut [f64], v: &mut [f64]) {
        for (vi, c) in v.iter_mut().zip(&self.drift) {
            *vi = c.at(p);
        }
        if let Some(k) = &self.k {
            let n = v.len();
            self.grid.gradient(u, p, grad);
            let dp = self.scenario.p_family.dp(u[p]);
            for i in 0..n {
                let mut kg = 0.0;
                for j in 0..n {
                    kg += k[i * n + j].at(p) * grad[j];
                }
                v[i] += dp * kg;
            }
        }
    }

    /// Discrete `<A, D²u>` and upwind `v·∇u` at an interior node, together
    /// with the node's stability rate.
    #[inline(always)]
    fn node_terms(&self, u: &[f64], p: usize, grad: &mut [f64], v: &mut [f64]) -> (f64, f64, f64) {
        let grid = &*self.grid;
        let n = grid.dim();
        let up = u[p];
        let mut diff = 0.0;
        let mut rate = 0.0;
        for i in 0..n {
            let s = grid.strides[i];
            let h2 = grid.h[i] * grid.h[i];
            let a = self.a_diag[i].at(p);
            diff += a * (u[p + s] - 2.0 * up + u[p - s]) / h2;
            rate += 2.0 * a / h2;
        }
        for (i, j, c) in &self.a_off {
            let (si, sj) = (grid.strides[*i], grid.strides[*j]);
            let hh = grid.h[*i] * grid.h[*j];
            let a = c.at(p);
            diff += 2.0 * a * (u[p + si + sj] - u[p + si - sj] - u[p - si + sj] + u[p - si - sj])
                / (4.0 * hh);
            rate += 2.0 * a.abs() / hh;
        }
        self.total_drift(u, p, grad, v);
        let mut adv = 0.0;
        for i in 0..n {
            let s = grid.strides[i];
            let vi = v[i];
            if vi > 0.0 {
                adv += vi * (up - u[p - s]) / grid.h[i];
            } else if vi < 0.0 {
                adv += vi * (u[p + s] - up) / grid.h[i];
            }
            rate += vi.abs() / grid.h[i];
        }
        (diff, adv, rate)
    }

    fn stability_rate(&self, u: &[f64]) -> f64 {
        let n = self.grid.dim();
        let (mut grad, mut v) = (vec![0.0; n], vec![0.0; n]);
        self.grid
            .interior()
            .iter()
            .map(|&p| self.node_terms(u, p, &mut grad, &mut v).2)
            .fold(0.0, f64::max)
    }

    /// Largest stable step for `state`: `0.9 / max_node(Σ 2A_ii/h_i² +
    /// Σ_{i≠j} |A_ij|/(h_i h_j) + Σ |v_i|/h_i)`.
    pub fn stable_dt(&mut self, state: &GridState) -> Result<f64> {
        let rate = match self.static_bound {
            Some(r) => r,
            None => {
                self.refresh(state.t, &state.u)?;
                self.stability_rate(&state.u)
            }
        };
        Ok(if rate > 0.0 {
            CFL_FRACTION / rate
        } else {
            f64::INFINITY
        })
    }

    /// Discrete `−<A, D²w> + v·∇w` at interior node `p`, with coefficients
    /// taken at time `t` and solution-dependent drifts frozen at `w`.
    pub fn spatial_operator(&mut self, w: &[f64], t: f64, p: usize) -> Result<f64> {
        self.refresh(t, w)?;
        let n = self.grid.dim();
        let (mut grad, mut v) = (vec![0.0; n], vec![0.0; n]);
        let (diff, adv, _) = self.node_terms(w, p, &mut grad, &mut v);
        Ok(adv - diff)
    }

    /// Read off the weights of the (linear, static) node operator by
    /// applying it to unit vectors.
    fn linear_stencil(&self) -> Stencil {
        let grid = &*self.grid;
        let n = grid.dim();
        let mut offsets = vec![0isize];
        for i in 0..n {
            let s = grid.strides[i] as isize;
            offsets.extend([s, -s]);
        }
        for (i, j, _) in &self.a_off {
            let (si, sj) = (grid.strides[*i] as isize, grid.strides[*j] as isize);
            offsets.extend([si + sj, si - sj, -si + sj, -si - sj]);
        }
        let (mut grad, mut v) = (vec![0.0; n], vec![0.0; n]);
        let mut unit = vec![0.0; grid.len()];
        let mut weights = Vec::with_capacity(grid.interior().len() * offsets.len());
        for &p in grid.interior() {
            for &o in &offsets {
                let q = (p as isize + o) as usize;
                unit[q] = 1.0;
                let (diff, adv, _) = self.node_terms(&unit, p, &mut grad, &mut v);
                unit[q] = 0.0;
                weights.push(diff - adv);
            }
        }
        Stencil { offsets, weights }
    }

    /// Rates for all interior nodes; returns the largest stability rate.
    fn compute_rates(&mut self, state: &GridState) -> Result<f64> {
        if let Some(st) = &self.stencil {
            let grid = &*self.grid;
            self.f.refresh(grid, grid.interior(), state.t, &state.u)?;
            let u = &state.u;
            let m = st.offsets.len();
            for (&p, w) in grid.interior().iter().zip(st.weights.chunks_exact(m)) {
                let mut r = self.f.at(p);
                for (&o, &wk) in st.offsets.iter().zip(w) {
                    r += wk * u[(p as isize + o) as usize];
                }
                self.rate[p] = r;
            }
            return Ok(self.static_bound.unwrap_or(0.0));
        }
        self.refresh(state.t, &state.u)?;
        let n = self.grid.dim();
        let (mut grad, mut v) = (vec![0.0; n], vec![0.0; n]);
        let mut rates = std::mem::take(&mut self.rate);
        let mut max_rate: f64 = 0.0;
        let u = &state.u;
        for &p in self.grid.interior() {
            let (diff, adv, r) = self.node_terms(u, p, &mut grad, &mut v);
            rates[p] = diff - adv + self.f.at(p);
            max_rate = max_rate.max(r);
        }
        self.rate = rates;
        Ok(self.static_bound.unwrap_or(max_rate))
    }

    fn apply(&self, state: &GridState, dt: f64, t_new: f64) -> Result<GridState> {
        let mut u = state.u.clone();
        let mut max_abs: f64 = 0.0;
        for &p in self.grid.interior() {
            let v = u[p] + dt * self.rate[p];
            u[p] = v;
            max_abs = max_abs.max(v.abs());
        }
        if !(max_abs <= INSTABILITY_FACTOR * self.scale) {
            return Err(Error::Instability { t: t_new, max_abs });
        }
        if self.scenario.mode == Mode::Nonlinear {
            for &p in self.grid.interior() {
                if !self.scenario.p_family.contains(u[p]) {
                    return Err(Error::RangeExit {
                        t: t_new,
                        value: u[p],
                        range: self.scenario.p_family.range_name().into(),
                    });
                }
            }
        }
        self.set_boundary(&mut u, t_new)?;
        Ok(GridState {
            grid: Arc::clone(&self.grid),
            u,
            t: t_new,
            u_star: state.u_star,
        })
    }

    fn set_boundary(&self, u: &mut [f64], t: f64) -> Result<()> {
        let grid = &*self.grid;
        match &self.g {
            Coef::Const(v) => grid.boundary().iter().for_each(|&p| u[p] = *v),
            Coef::Spatial(vals) => grid.boundary().iter().for_each(|&p| u[p] = vals[p]),
            Coef::Temporal(e, _) => {
                let v = e.at_t(t)?;
                grid.boundary().iter().for_each(|&p| u[p] = v);
            }
            Coef::Separable(e, shape, _) => {
                let a = e.at_t(t)?;
                grid.boundary().iter().for_each(|&p| u[p] = a * shape[p]);
            }
            Coef::General(e, _) => {
                for &p in grid.boundary() {
                    u[p] = e.at(grid.coords(p), t, 0.0)?;
                }
            }
        }
        Ok(())
    }

    /// One explicit Euler step of size `dt` (the caller keeps `dt` within
    /// [`Solver::stable_dt`]).
    pub fn step(&mut self, state: &GridState, dt: f64) -> Result<GridState> {
        self.compute_rates(state)?;
        self.apply(state, dt, state.t + dt)
    }

    /// One step of the largest stable size, shortened so as not to pass
    /// `t_limit`.
    pub fn advance(&mut self, state: &GridState, t_limit: Option<f64>) -> Result<GridState> {
        let rate = self.compute_rates(state)?;
        let mut dt = if rate > 0.0 {
            CFL_FRACTION / rate
        } else {
            f64::INFINITY
        };
        let mut t_new = state.t + dt;
        if let Some(limit) = t_limit {
            if t_new >= limit {
                dt = limit - state.t;
                t_new = limit;
            }
        }
        if !dt.is_finite() {
            return Err(Error::BadParameter(
                "no stability limit and no target time: step size undefined".into(),
            ));
        }
        self.apply(state, dt, t_new)
    }

    /// Advance until exactly `t_target`.
    pub fn advance_to(&mut self, state: GridState, t_target: f64) -> Result<GridState> {
        let mut st = state;
        while st.t < t_target {
            st = self.advance(&st, Some(t_target))?;
        }
        Ok(st)
    }
}

/// One explicit step of `scenario` from `state`.
pub fn step(state: &GridState, scenario: &Scenario, dt: f64) -> Result<GridState> {
    let mut solver = Solver::new(scenario, &state.grid.dims)?;
    solver.step(state, dt)
}
