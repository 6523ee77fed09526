//! JSON run configuration: the scenario, solver settings and certificate
//! settings in one file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::certify::CertifyConfig;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::scenario::{BaseFields, Constants, Expr, Mode, PFamily, Preset, Scenario, SymMatrix};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(rename = "A")]
    pub a: Vec<Vec<Expr>>,
    /// `b(x,t)` in linear mode, `B(x,t,s)` (or `B0(x,t)` under a preset) in
    /// nonlinear mode; defaults to zero.
    #[serde(default)]
    pub drift: Option<Vec<Expr>>,
    /// `K` (or `K0` under a preset); absent means `K ≡ 0`.
    #[serde(rename = "K", default)]
    pub k: Option<Vec<Vec<Expr>>>,
}

/// Wire form of the nonlinearity. Giving `kappa` (log family) or `c`
/// (power and identity families) selects the matching equation-of-state
/// preset, which scales `K` and turns the drift into `-s B0`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PFamilyConfig {
    pub tag: String,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub nonnegative: bool,
}

impl PFamilyConfig {
    fn resolve(&self) -> Result<(PFamily, Option<Preset>)> {
        match self.tag.as_str() {
            "log" => Ok((
                PFamily::Log,
                self.kappa.map(|kappa| Preset::SlightlyCompressible { kappa }),
            )),
            "power" => {
                let gamma = self
                    .gamma
                    .ok_or_else(|| Error::Config("power family needs `gamma`".into()))?;
                Ok((
                    PFamily::power(gamma)?,
                    self.c.map(|c| Preset::Isentropic { gamma, c }),
                ))
            }
            "identity" => match self.c {
                Some(c) => Ok((
                    PFamily::Identity { nonnegative: true },
                    Some(Preset::IdealGas { c }),
                )),
                None => Ok((
                    PFamily::Identity {
                        nonnegative: self.nonnegative,
                    },
                    None,
                )),
            },
            other => Err(Error::Config(format!(
                "unknown p_family tag `{other}` (expected log, power or identity)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default = "zero")]
    pub f: Expr,
    pub g: Expr,
    pub u0: Expr,
    #[serde(default)]
    pub u_star: f64,
}

fn zero() -> Expr {
    Expr::constant(0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Nodes per axis.
    #[serde(alias = "grid")]
    pub resolution: Vec<usize>,
    pub t_end: f64,
    pub sample_dt: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Domain,
    #[serde(default)]
    pub dimension: Option<usize>,
    pub mode: Mode,
    pub coefficients: Coefficients,
    #[serde(default)]
    pub p_family: Option<PFamilyConfig>,
    pub data: DataConfig,
    pub constants: Constants,
    #[serde(default)]
    pub simulation: Option<SimulationConfig>,
    #[serde(default)]
    pub certify: Option<CertifyConfig>,
}

fn matrix(rows: &[Vec<Expr>]) -> Result<SymMatrix> {
    SymMatrix::from_rows(rows.to_vec())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Build and validate the scenario.
    pub fn scenario(&self) -> Result<Scenario> {
        let n = self.domain.dimension();
        if let Some(dim) = self.dimension {
            if dim != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: dim,
                });
            }
        }
        let a = matrix(&self.coefficients.a)?;
        let drift = match &self.coefficients.drift {
            Some(d) => d.clone(),
            None => vec![zero(); n],
        };
        let k = self.coefficients.k.as_deref().map(matrix).transpose()?;
        let (p_family, preset) = match &self.p_family {
            Some(p) => p.resolve()?,
            None => (PFamily::Identity { nonnegative: false }, None),
        };
        let data = &self.data;
        match preset {
            Some(kind) => {
                if self.mode != Mode::Nonlinear {
                    return Err(Error::Config(
                        "equation-of-state presets (kappa or c) need mode \"nonlinear\"".into(),
                    ));
                }
                Scenario::preset(
                    kind,
                    BaseFields {
                        domain: self.domain.clone(),
                        a,
                        k0: k.unwrap_or_else(|| SymMatrix::identity(n)),
                        b0: drift,
                        f: data.f.clone(),
                        g: data.g.clone(),
                        u0: data.u0.clone(),
                        u_star: data.u_star,
                        constants: self.constants.clone(),
                    },
                )
            }
            None => {
                let scenario = Scenario {
                    domain: self.domain.clone(),
                    mode: self.mode,
                    a,
                    drift,
                    k,
                    p_family,
                    f: data.f.clone(),
                    g: data.g.clone(),
                    u0: data.u0.clone(),
                    u_star: data.u_star,
                    constants: self.constants.clone(),
                };
                scenario.validate()?;
                Ok(scenario)
            }
        }
    }

    pub fn simulation(&self) -> Result<&SimulationConfig> {
        self.simulation
            .as_ref()
            .ok_or_else(|| Error::Config("missing `simulation` section".into()))
    }

    pub fn certify(&self) -> Result<&CertifyConfig> {
        self.certify
            .as_ref()
            .ok_or_else(|| Error::Config("missing `certify` section".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAT: &str = r#"{
        "domain": {"kind": "interval", "lower": 0, "upper": 1},
        "dimension": 1,
        "mode": "linear",
        "coefficients": {"A": [["1"]], "drift": ["0"]},
        "data": {"g": "0", "u0": "sin(pi*x1)"},
        "constants": {"c0": 1, "M1": 1, "M2": 0},
        "simulation": {"resolution": [101], "t_end": 0.1, "sample_dt": 0.05}
    }"#;

    #[test]
    fn heat_config() {
        let cfg = RunConfig::from_json(HEAT).unwrap();
        let s = cfg.scenario().unwrap();
        assert_eq!(s.mode, Mode::Linear);
        assert!(s.k.is_none());
        assert_eq!(cfg.simulation().unwrap().resolution, vec![101]);
        assert!(cfg.certify().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = HEAT.replace("\"dimension\": 1,", "\"dimensoin\": 1,");
        assert!(matches!(RunConfig::from_json(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn dimension_must_match_domain() {
        let bad = HEAT.replace("\"dimension\": 1", "\"dimension\": 2");
        let cfg = RunConfig::from_json(&bad).unwrap();
        assert!(matches!(cfg.scenario(), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn kappa_selects_the_slightly_compressible_preset() {
        let text = r#"{
            "domain": {"kind": "interval", "lower": 0, "upper": 1},
            "mode": "nonlinear",
            "coefficients": {"A": [["1"]], "drift": ["0.5*sin(t)"], "K": [["1"]]},
            "p_family": {"tag": "log", "kappa": 5},
            "data": {"g": "1", "u0": "1", "u_star": 1},
            "constants": {"c0": 1, "M1": 1, "c2": 0.2, "cB": 0.5, "gamma0": 1}
        }"#;
        let s = RunConfig::from_json(text).unwrap().scenario().unwrap();
        assert_eq!(s.p_family, PFamily::Log);
        assert_eq!(s.k.as_ref().unwrap().eval(&[0.5], 0.0).unwrap(), vec![0.2]);
        let b = s.drift[0].at(&[0.5], 1.0, 2.0).unwrap();
        assert!((b + 2.0 * 0.5 * 1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn preset_needs_nonlinear_mode() {
        let text = HEAT.replace("\"mode\": \"linear\",", "\"mode\": \"linear\", \"p_family\": {\"tag\": \"identity\", \"c\": 1},");
        let cfg = RunConfig::from_json(&text).unwrap();
        assert!(matches!(cfg.scenario(), Err(Error::Config(_))));
    }
}
