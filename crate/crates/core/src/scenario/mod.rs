//! Problem instances: coefficient fields, the nonlinearity family `P`,
//! boundary/initial/forcing data and the declared constants.
//!
//! The equation is
//!
//! ```text
//! u_t - <A, D²u> + B(x,t,u)·∇u + P'(u) (K∇u)·∇u = f      (nonlinear mode)
//! u_t - <A, D²u> + b(x,t)·∇u                    = f      (linear mode)
//! ```
//!
//! with `u = g` on the lateral boundary and `u = u0` at `t = 0`.

pub mod expr;
pub mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Domain;
pub use expr::{Deps, Env, Expr};
pub use verify::{verify_coefficient_bounds, BoundsReport, SampleSpec};

/// The function `P` in the quadratic gradient term, with its range `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum PFamily {
    /// `P(s) = ln s` on `J = (0, ∞)`.
    Log,
    /// `P(s) = s^gamma`, `gamma ≥ 1`, on `J = [0, ∞)`.
    Power { gamma: f64 },
    /// `P(s) = s` on `J = R`, or on `[0, ∞)` when `nonnegative`.
    Identity { nonnegative: bool },
}

impl PFamily {
    pub fn power(gamma: f64) -> Result<Self> {
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::BadParameter(format!(
                "power family needs gamma >= 1, got {gamma}"
            )));
        }
        Ok(PFamily::Power { gamma })
    }

    pub fn contains(&self, s: f64) -> bool {
        match self {
            PFamily::Log => s > 0.0 && s.is_finite(),
            PFamily::Power { .. } | PFamily::Identity { nonnegative: true } => {
                s >= 0.0 && s.is_finite()
            }
            PFamily::Identity { nonnegative: false } => s.is_finite(),
        }
    }

    /// Human-readable range `J`.
    pub fn range_name(&self) -> &'static str {
        match self {
            PFamily::Log => "(0, inf)",
            PFamily::Power { .. } | PFamily::Identity { nonnegative: true } => "[0, inf)",
            PFamily::Identity { nonnegative: false } => "(-inf, inf)",
        }
    }

    pub fn check(&self, s: f64) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                value: s,
                range: self.range_name().to_string(),
            })
        }
    }

    pub fn p(&self, s: f64) -> f64 {
        match self {
            PFamily::Log => s.ln(),
            PFamily::Power { gamma } => s.powf(*gamma),
            PFamily::Identity { .. } => s,
        }
    }

    pub fn dp(&self, s: f64) -> f64 {
        match self {
            PFamily::Log => 1.0 / s,
            PFamily::Power { gamma } => gamma * s.powf(gamma - 1.0),
            PFamily::Identity { .. } => 1.0,
        }
    }

    /// `max |P|` on `[lo, hi] ⊂ J` in closed form.
    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        match self {
            PFamily::Log => lo.ln().abs().max(hi.ln().abs()),
            PFamily::Power { gamma } => hi.powf(*gamma),
            PFamily::Identity { .. } => lo.abs().max(hi.abs()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Linear,
    Nonlinear,
}

/// Symmetric matrix field stored as its upper triangle, row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<Expr>,
}

impl SymMatrix {
    pub fn from_upper(n: usize, upper: Vec<Expr>) -> Result<Self> {
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::DimensionMismatch {
                expected: n * (n + 1) / 2,
                found: upper.len(),
            });
        }
        Ok(SymMatrix { n, upper })
    }

    /// Build from a full square matrix, rejecting lower entries that differ
    /// from their upper counterparts.
    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Self> {
        let n = rows.len();
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for j in i..n {
                if i != j && rows[j][i].canonical() != row[j].canonical() {
                    return Err(Error::Config(format!(
                        "matrix is not symmetric: entry ({},{}) = {} but ({},{}) = {}",
                        i + 1,
                        j + 1,
                        row[j],
                        j + 1,
                        i + 1,
                        rows[j][i]
                    )));
                }
                upper.push(row[j].clone());
            }
        }
        Ok(SymMatrix { n, upper })
    }

    pub fn identity(n: usize) -> Self {
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i..n {
                upper.push(Expr::constant(if i == j { 1.0 } else { 0.0 }));
            }
        }
        SymMatrix { n, upper }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.upper[self.index(i, j)]
    }

    pub fn entries(&self) -> &[Expr] {
        &self.upper
    }

    /// Numeric full matrix at `(x, t)`, row major.
    pub fn eval(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.get(i, j).at(x, t, 0.0)?;
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let c = Expr::constant(factor);
        SymMatrix {
            n: self.n,
            upper: self.upper.iter().map(|e| c.times(e)).collect(),
        }
    }

    pub fn deps(&self) -> Deps {
        self.upper.iter().fold(Deps::default(), |acc, e| {
            let d = e.deps();
            Deps {
                x: acc.x || d.x,
                t: acc.t || d.t,
                s: acc.s || d.s,
            }
        })
    }
}

/// Declared structural constants. Optional entries are only required by
/// the certificates that use them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Ellipticity: `ξᵀAξ ≥ c0 |ξ|²`.
    pub c0: f64,
    /// Trace bound: `Tr A ≤ M1`.
    #[serde(rename = "M1")]
    pub m1: f64,
    /// Uniform drift bound `|b| ≤ M2`.
    #[serde(rename = "M2", default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    /// Growing drift bound `|b(x,t)| ≤ z0(t)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Expr>,
    /// Lower and upper bounds for `K`: `-c1|ξ|² ≤ ξᵀKξ ≤ c2|ξ|²`.
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    /// Drift growth in the solution: `|B(x,t,s)| ≤ cB (1+|s|)^gamma0`.
    #[serde(rename = "cB", default, skip_serializing_if = "Option::is_none")]
    pub c_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
}

impl Constants {
    pub fn new(c0: f64, m1: f64) -> Self {
        Constants {
            c0,
            m1,
            m2: None,
            z0: None,
            c1: 0.0,
            c2: 0.0,
            c_b: None,
            gamma0: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadParameter(m));
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return bad(format!("c0 must be positive, got {}", self.c0));
        }
        if !(self.m1 > 0.0 && self.m1.is_finite()) {
            return bad(format!("M1 must be positive, got {}", self.m1));
        }
        if let Some(m2) = self.m2 {
            if !(m2 >= 0.0 && m2.is_finite()) {
                return bad(format!("M2 must be non-negative, got {m2}"));
            }
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0) {
            return bad(format!(
                "c1 and c2 must be non-negative, got {} and {}",
                self.c1, self.c2
            ));
        }
        if let Some(cb) = self.c_b {
            if !(cb > 0.0) {
                return bad(format!("cB must be positive, got {cb}"));
            }
        }
        if let Some(g0) = self.gamma0 {
            if !(g0 > 0.0) {
                return bad(format!("gamma0 must be positive, got {g0}"));
            }
        }
        Ok(())
    }
}

/// Equation-of-state presets wiring `P`, the scaling of `K` and the drift
/// `B(x,t,s) = -s B0(x,t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `P = ln s`, `K = K0 / kappa`.
    SlightlyCompressible { kappa: f64 },
    /// `P = s^gamma`, `K = c K0`.
    Isentropic { gamma: f64, c: f64 },
    /// `P = s`, `K = c K0`.
    IdealGas { c: f64 },
}

/// Fields shared by all presets.
#[derive(Debug, Clone)]
pub struct BaseFields {
    pub domain: Domain,
    pub a: SymMatrix,
    pub k0: SymMatrix,
    pub b0: Vec<Expr>,
    pub f: Expr,
    pub g: Expr,
    pub u0: Expr,
    pub u_star: f64,
    pub constants: Constants,
}

/// A complete problem instance.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub domain: Domain,
    pub mode: Mode,
    pub a: SymMatrix,
    /// `b(x,t)` in linear mode, `B(x,t,s)` in nonlinear mode.
    pub drift: Vec<Expr>,
    /// `None` means `K ≡ 0`.
    pub k: Option<SymMatrix>,
    pub p_family: PFamily,
    pub f: Expr,
    pub g: Expr,
    pub u0: Expr,
    pub u_star: f64,
    pub constants: Constants,
}

impl Scenario {
    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    /// Check dimensions, variable usage and constants.
    pub fn validate(&self) -> Result<()> {
        let n = self.dimension();
        self.constants.validate()?;
        if self.a.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.a.dim(),
            });
        }
        if self.drift.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.drift.len(),
            });
        }
        for e in self.a.entries() {
            e.validate(n, true, false)?;
        }
        let nonlinear = self.mode == Mode::Nonlinear;
        for e in &self.drift {
            e.validate(n, true, nonlinear)?;
        }
        if let Some(k) = &self.k {
            if k.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: k.dim(),
                });
            }
            for e in k.entries() {
                e.validate(n, true, false)?;
            }
        }
        for e in [&self.f, &self.g, &self.u0] {
            e.validate(n, true, false)?;
        }
        if let Some(z0) = &self.constants.z0 {
            z0.validate(0, false, false)?;
        }
        if !self.u_star.is_finite() {
            return Err(Error::BadParameter("u_star must be finite".into()));
        }
        Ok(())
    }

    /// Build a nonlinear scenario from an equation-of-state preset.
    pub fn preset(kind: Preset, base: BaseFields) -> Result<Scenario> {
        let (p_family, k_scale) = match kind {
            Preset::SlightlyCompressible { kappa } => {
                if !(kappa > 0.0 && kappa.is_finite()) {
                    return Err(Error::BadParameter(format!(
                        "compressibility kappa must be positive, got {kappa}"
                    )));
                }
                (PFamily::Log, 1.0 / kappa)
            }
            Preset::Isentropic { gamma, c } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::BadParameter(format!(
                        "isentropic constant c must be positive, got {c}"
                    )));
                }
                (PFamily::power(gamma)?, c)
            }
            Preset::IdealGas { c } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::BadParameter(format!(
                        "ideal gas constant c must be positive, got {c}"
                    )));
                }
                (PFamily::Identity { nonnegative: true }, c)
            }
        };
        let scenario = Scenario {
            domain: base.domain,
            mode: Mode::Nonlinear,
            a: base.a,
            drift: base.b0.iter().map(Expr::times_minus_s).collect(),
            k: Some(base.k0.scaled(k_scale)),
            p_family,
            f: base.f,
            g: base.g,
            u0: base.u0,
            u_star: base.u_star,
            constants: base.constants,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Drift vector at `(x, t, s)` (`s` is ignored in linear mode).
    pub fn drift_at(&self, x: &[f64], t: f64, s: f64, out: &mut [f64]) -> Result<()> {
        for (o, e) in out.iter_mut().zip(&self.drift) {
            *o = e.at(x, t, s)?;
        }
        Ok(())
    }

    /// Pointwise value of `u_t - <A,D²u> + B·∇u (+ P'(u)(K∇u)·∇u)` from
    /// prescribed derivatives; `hess` is row major.
    pub fn operator_value(
        &self,
        x: &[f64],
        t: f64,
        u: f64,
        u_t: f64,
        grad: &[f64],
        hess: &[f64],
    ) -> Result<f64> {
        let n = self.dimension();
        let a = self.a.eval(x, t)?;
        let mut value = u_t;
        for i in 0..n {
            for j in 0..n {
                value -= a[i * n + j] * hess[i * n + j];
            }
        }
        for (i, e) in self.drift.iter().enumerate() {
            value += e.at(x, t, u)? * grad[i];
        }
        if self.mode == Mode::Nonlinear {
            if let Some(k) = &self.k {
                let km = k.eval(x, t)?;
                let mut quad = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        quad += km[i * n + j] * grad[j] * grad[i];
                    }
                }
                value += self.p_family.dp(u) * quad;
            }
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn base(n: usize) -> BaseFields {
        let domain = if n == 1 {
            Domain::interval(0.0, 1.0).unwrap()
        } else {
            Domain::boxed(vec![0.0; n], vec![1.0; n]).unwrap()
        };
        let mut c = Constants::new(1.0, n as f64);
        c.c_b = Some(1.0);
        c.gamma0 = Some(1.0);
        BaseFields {
            domain,
            a: SymMatrix::identity(n),
            k0: SymMatrix::identity(n),
            b0: (0..n).map(|i| e(&format!("sin(x{} + t)", i + 1))).collect(),
            f: e("0"),
            g: e("1"),
            u0: e("1"),
            u_star: 1.0,
            constants: c,
        }
    }

    #[test]
    fn slightly_compressible_scales_k() {
        let s = Scenario::preset(Preset::SlightlyCompressible { kappa: 2.0 }, base(2)).unwrap();
        assert_eq!(s.p_family, PFamily::Log);
        let k = s.k.unwrap().eval(&[0.3, 0.4], 0.0).unwrap();
        assert_eq!(k, vec![0.5, 0.0, 0.0, 0.5]);
        let b = s.drift[0].at(&[0.3, 0.4], 0.2, 2.0).unwrap();
        assert_eq!(b, -2.0 * (0.5f64).sin());
    }

    #[test]
    fn ideal_gas_keeps_k() {
        let s = Scenario::preset(Preset::IdealGas { c: 1.0 }, base(1)).unwrap();
        assert_eq!(s.p_family, PFamily::Identity { nonnegative: true });
        assert_eq!(s.p_family.p(3.5), 3.5);
        assert_eq!(s.k.unwrap().eval(&[0.5], 0.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn preset_parameter_errors() {
        for kind in [
            Preset::SlightlyCompressible { kappa: 0.0 },
            Preset::Isentropic { gamma: 0.5, c: 1.0 },
            Preset::Isentropic { gamma: 2.0, c: -1.0 },
            Preset::IdealGas { c: 0.0 },
        ] {
            assert!(matches!(
                Scenario::preset(kind, base(1)),
                Err(Error::BadParameter(_))
            ));
        }
    }

    #[test]
    fn symmetric_storage() {
        let rows = vec![vec![e("2"), e("x1")], vec![e("x1"), e("1")]];
        let m = SymMatrix::from_rows(rows).unwrap();
        assert_eq!(m.get(1, 0).canonical(), "x1");
        assert_eq!(m.eval(&[0.5, 0.0], 0.0).unwrap(), vec![2.0, 0.5, 0.5, 1.0]);
        let rows = vec![vec![e("2"), e("x1")], vec![e("x2"), e("1")]];
        assert!(matches!(SymMatrix::from_rows(rows), Err(Error::Config(_))));
    }

    #[test]
    fn family_ranges() {
        assert!(!PFamily::Log.contains(0.0));
        assert!(PFamily::power(2.0).unwrap().contains(0.0));
        assert!(PFamily::Identity { nonnegative: false }.contains(-3.0));
        assert!(PFamily::power(0.9).is_err());
        assert!(matches!(
            PFamily::Log.check(-1.0),
            Err(Error::OutOfRange { .. })
        ));
        assert_eq!(PFamily::Log.max_abs_on(0.5, 1.5), 2f64.ln());
    }

    proptest! {
        #[test]
        fn isentropic_unit_gamma_matches_ideal_gas(
            x in prop::collection::vec(0.0..1.0f64, 2),
            t in 0.0..5.0f64,
            u in 0.0..10.0f64,
            u_t in -5.0..5.0f64,
            grad in prop::collection::vec(-5.0..5.0f64, 2),
            hess in prop::collection::vec(-5.0..5.0f64, 4),
        ) {
            let iso = Scenario::preset(Preset::Isentropic { gamma: 1.0, c: 1.0 }, base(2)).unwrap();
            let ideal = Scenario::preset(Preset::IdealGas { c: 1.0 }, base(2)).unwrap();
            let a = iso.operator_value(&x, t, u, u_t, &grad, &hess).unwrap();
            let b = ideal.operator_value(&x, t, u, u_t, &grad, &hess).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
