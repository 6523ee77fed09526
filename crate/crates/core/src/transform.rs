//! Bernstein–Cole–Hopf substitutions `w = F(u)` with
//! `F'(s) = C e^{λ P(s)}`, the admissible λ windows, and a discrete check of
//! the differential inequalities they produce.
//!
//! For `λ ≥ c1/c0` the transformed function satisfies `𝓛w ≤ F'(u) Lu`
//! (a subsolution direction); for `λ ≤ −c2/c0`, `𝓛w ≥ F'(u) Lu`. Here `L` is
//! the full nonlinear operator and `𝓛` the linear operator with the drift
//! frozen at `B̃(x,t) = B(x,t,u(x,t))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::gauss_kronrod;
use crate::scenario::{Mode, PFamily, Scenario};
use crate::solver::GridState;

/// Absolute tolerance of the quadrature behind [`ClosedForm::Integral`].
pub const INTEGRAL_ABS_TOL: f64 = 1e-10;

/// Default distance of the λ window from zero.
pub const DEFAULT_LAMBDA_MARGIN: f64 = 0.1;

/// `(λ1, λ2)` with `λ1 = max(c1/c0, margin) > 0` and
/// `λ2 = min(−c2/c0, −margin) < 0`.
pub fn lambda_window(c0: f64, c1: f64, c2: f64, margin: f64) -> (f64, f64) {
    ((c1 / c0).max(margin), (-c2 / c0).min(-margin))
}

/// Which closed form evaluates `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedForm {
    /// `C ∫_0^s e^{λ z^γ} dz` (power family with γ > 1).
    Integral,
    /// `C e^{λ s} / λ`, or `C s` when λ = 0 (identity family and power γ = 1).
    ExpScaled,
    /// `C s^{λ+1} / (λ+1)` (log family, λ ≠ −1).
    Power,
    /// `C ln s` (log family, λ = −1).
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transform {
    pub p_family: PFamily,
    pub lambda: f64,
    pub c: f64,
    pub form: ClosedForm,
}

/// `∫_0^s e^{λ z^γ} dz` by adaptive Gauss–Kronrod quadrature.
pub fn power_integral(gamma: f64, lambda: f64, s: f64) -> f64 {
    let r: std::result::Result<f64, std::convert::Infallible> = gauss_kronrod(
        |z: f64| Ok((lambda * z.powf(gamma)).exp()),
        0.0,
        s,
        INTEGRAL_ABS_TOL,
    );
    match r {
        Ok(v) => v,
        Err(e) => match e {},
    }
}

impl Transform {
    pub fn new(p_family: PFamily, lambda: f64, c: f64) -> Result<Transform> {
        if !(c > 0.0 && c.is_finite()) || !lambda.is_finite() {
            return Err(Error::BadParameter(format!(
                "transform needs finite lambda and C > 0, got lambda = {lambda}, C = {c}"
            )));
        }
        let form = match p_family {
            PFamily::Power { gamma } if gamma > 1.0 => ClosedForm::Integral,
            PFamily::Power { .. } | PFamily::Identity { .. } => ClosedForm::ExpScaled,
            PFamily::Log if lambda == -1.0 => ClosedForm::Log,
            PFamily::Log => ClosedForm::Power,
        };
        Ok(Transform {
            p_family,
            lambda,
            c,
            form,
        })
    }

    /// `F'(s) = C e^{λ P(s)}`.
    pub fn derivative(&self, s: f64) -> Result<f64> {
        self.p_family.check(s)?;
        Ok(match self.p_family {
            // e^{λ ln s} written as a power for accuracy.
            PFamily::Log => self.c * s.powf(self.lambda),
            _ => self.c * (self.lambda * self.p_family.p(s)).exp(),
        })
    }

    /// `F''(s) = λ P'(s) F'(s)`.
    pub fn second_derivative(&self, s: f64) -> Result<f64> {
        Ok(self.lambda * self.p_family.dp(s) * self.derivative(s)?)
    }

    /// `(F(s), F'(s))`.
    pub fn value(&self, s: f64) -> Result<(f64, f64)> {
        let fp = self.derivative(s)?;
        let l = self.lambda;
        let f = match self.form {
            ClosedForm::Integral => match self.p_family {
                PFamily::Power { gamma } => self.c * power_integral(gamma, l, s),
                _ => unreachable!("integral form is tied to the power family"),
            },
            ClosedForm::ExpScaled if l == 0.0 => self.c * s,
            ClosedForm::ExpScaled => self.c * (l * s).exp() / l,
            ClosedForm::Power => self.c * s.powf(l + 1.0) / (l + 1.0),
            ClosedForm::Log => self.c * s.ln(),
        };
        Ok((f, fp))
    }

    pub fn f(&self, s: f64) -> Result<f64> {
        Ok(self.value(s)?.0)
    }
}

/// Direction of the transformed inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `𝓛w ≤ F'(u) Lu`, requires `λ ≥ c1/c0`.
    Sub,
    /// `𝓛w ≥ F'(u) Lu`, requires `λ ≤ −c2/c0`.
    Super,
}

/// Discrete residual `𝓛w − F'(u) Lu` over interior nodes and consecutive
/// time levels.
#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub direction: Direction,
    /// One row per consecutive pair of states, indexed by grid node
    /// (boundary entries are zero).
    pub field: Vec<Vec<f64>>,
    pub max: f64,
    pub min: f64,
    /// `max` for [`Direction::Sub`], `−min` for [`Direction::Super`]: the
    /// amount by which the inequality is violated (≤ 0 means satisfied).
    pub violation: f64,
}

/// Evaluate `𝓛w − F'(u) Lu` with `w = F(u)` on consecutive solver states.
///
/// Time derivatives are forward differences between levels, spatial
/// derivatives centered differences at the earlier level, and all
/// coefficients are taken at the earlier level.
pub fn transform_residual(
    states: &[GridState],
    scenario: &Scenario,
    tr: &Transform,
    direction: Direction,
) -> Result<Residual> {
    let c = &scenario.constants;
    match direction {
        Direction::Sub if tr.lambda < c.c1 / c.c0 => {
            return Err(Error::LambdaOutsideWindow {
                lambda: tr.lambda,
                direction: "sub".into(),
                threshold: c.c1 / c.c0,
            })
        }
        Direction::Super if tr.lambda > -c.c2 / c.c0 => {
            return Err(Error::LambdaOutsideWindow {
                lambda: tr.lambda,
                direction: "super".into(),
                threshold: -c.c2 / c.c0,
            })
        }
        _ => {}
    }
    let mut field = Vec::new();
    let (mut max, mut min) = (f64::NEG_INFINITY, f64::INFINITY);
    for pair in states.windows(2) {
        let (s0, s1) = (&pair[0], &pair[1]);
        let grid = &s0.grid;
        let n = grid.dim();
        let dt = s1.t - s0.t;
        if !(dt > 0.0) {
            return Err(Error::BadParameter("states must have increasing times".into()));
        }
        for v in s0.u.iter().chain(&s1.u) {
            tr.p_family.check(*v)?;
        }
        let w0: Vec<f64> = s0.u.iter().map(|&v| tr.f(v)).collect::<Result<_>>()?;
        let w1: Vec<f64> = s1.u.iter().map(|&v| tr.f(v)).collect::<Result<_>>()?;
        let mut row = vec![0.0; grid.len()];
        let (mut gu, mut gw) = (vec![0.0; n], vec![0.0; n]);
        let (mut hu, mut hw) = (vec![0.0; n * n], vec![0.0; n * n]);
        for &p in grid.interior() {
            let x = grid.coords(p);
            let t = s0.t;
            let u = s0.u[p];
            grid.gradient(&s0.u, p, &mut gu);
            grid.gradient(&w0, p, &mut gw);
            grid.hessian(&s0.u, p, &mut hu);
            grid.hessian(&w0, p, &mut hw);
            let a = scenario.a.eval(x, t)?;
            let mut lu = (s1.u[p] - u) / dt;
            let mut lw = (w1[p] - w0[p]) / dt;
            for k in 0..n * n {
                lu -= a[k] * hu[k];
                lw -= a[k] * hw[k];
            }
            for (i, e) in scenario.drift.iter().enumerate() {
                let b = e.at(x, t, u)?;
                lu += b * gu[i];
                lw += b * gw[i];
            }
            if let (Mode::Nonlinear, Some(k)) = (scenario.mode, &scenario.k) {
                let km = k.eval(x, t)?;
                let mut quad = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        quad += km[i * n + j] * gu[i] * gu[j];
                    }
                }
                lu += scenario.p_family.dp(u) * quad;
            }
            let r = lw - tr.derivative(u)? * lu;
            row[p] = r;
            max = max.max(r);
            min = min.min(r);
        }
        field.push(row);
    }
    let violation = match direction {
        Direction::Sub => max,
        Direction::Super => -min,
    };
    Ok(Residual {
        direction,
        field,
        max,
        min,
        violation,
    })
}
