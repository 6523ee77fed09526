//! Certificate records: constants ledger, per-step table, sampled envelope
//! and hypothesis checks.

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    MaxPrinciple,
    BoundedDrift,
    UnboundedDrift,
    Nonlinear,
}

impl CertificateKind {
    /// Pointwise certificates bound every sample; the others bound the
    /// tail of the trajectory.
    pub fn is_pointwise(self) -> bool {
        self == CertificateKind::MaxPrinciple
    }
}

/// Which column of a sampled trajectory an envelope bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    MaxU,
    /// `-min u`, bounded by lower-side maximum-principle envelopes.
    NegMinU,
    MaxAbsU,
    MaxDevUstar,
}

/// Named constants in insertion order. Non-finite values serialize as
/// `null` and read back as `+inf`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ledger(pub Vec<(String, f64)>);

impl Ledger {
    pub fn set(&mut self, name: &str, value: f64) {
        match self.0.iter_mut().find(|(n, _)| n == name) {
            Some(entry) => entry.1 = value,
            None => self.0.push((name.to_string(), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(n, v)| (n.as_str(), *v))
    }
}

impl Serialize for Ledger {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, v) in &self.0 {
            map.serialize_entry(name, &finite_or_null(*v))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Ledger {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: serde_json::Map<String, serde_json::Value> = Deserialize::deserialize(deserializer)?;
        Ok(Ledger(
            raw.into_iter()
                .map(|(k, v)| (k, v.as_f64().unwrap_or(f64::INFINITY)))
                .collect(),
        ))
    }
}

fn finite_or_null(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn ser_opt_inf<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    finite_or_null(*v).serialize(s)
}

fn de_opt_inf<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// One row of the per-step table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    #[serde(rename = "T_k")]
    pub t_k: f64,
    pub tau_k: f64,
    pub eta_k: f64,
    #[serde(rename = "Lambda_k")]
    pub lambda_k: f64,
    #[serde(rename = "J_k", serialize_with = "ser_opt_inf", deserialize_with = "de_opt_inf")]
    pub j_k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSample {
    pub t: f64,
    #[serde(serialize_with = "ser_opt_inf", deserialize_with = "de_opt_inf")]
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    /// Name of the hypothesis.
    pub assumption: String,
    /// The condition in symbols.
    pub quote_key: String,
    /// Non-negative when the hypothesis holds.
    #[serde(serialize_with = "ser_opt_inf", deserialize_with = "de_opt_inf")]
    pub margin: f64,
    pub pass: bool,
}

impl HypothesisCheck {
    pub fn new(assumption: &str, quote_key: &str, margin: f64) -> Self {
        HypothesisCheck {
            assumption: assumption.to_string(),
            quote_key: quote_key.to_string(),
            pass: margin >= 0.0,
            margin,
        }
    }

    pub fn with_pass(assumption: &str, quote_key: &str, margin: f64, pass: bool) -> Self {
        HypothesisCheck {
            assumption: assumption.to_string(),
            quote_key: quote_key.to_string(),
            margin,
            pass,
        }
    }
}

/// Whether the asymptotic bound is a finite number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundState {
    Finite,
    /// No finite envelope: a contraction factor rounded to one or a limit
    /// could not be shown to vanish.
    NoFiniteEnvelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub kind: CertificateKind,
    pub quantity: Quantity,
    pub constants: Ledger,
    pub steps: Vec<StepRecord>,
    pub envelope: Vec<EnvelopeSample>,
    pub checks: Vec<HypothesisCheck>,
    #[serde(serialize_with = "ser_opt_inf", deserialize_with = "de_opt_inf")]
    pub final_bound: f64,
    pub final_bound_state: BoundState,
    /// Window over which limsups were estimated from samples, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_window: Option<(f64, f64)>,
    /// `exact` for closed-form families, `windowed` for sampled profiles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell_source: Option<String>,
}

impl BoundCertificate {
    pub fn new(kind: CertificateKind, quantity: Quantity) -> Self {
        BoundCertificate {
            kind,
            quantity,
            constants: Ledger::default(),
            steps: Vec::new(),
            envelope: Vec::new(),
            checks: Vec::new(),
            final_bound: 0.0,
            final_bound_state: BoundState::Finite,
            tail_window: None,
            ell_source: None,
        }
    }

    pub fn set_final_bound(&mut self, bound: f64) {
        self.final_bound = bound;
        self.final_bound_state = if bound.is_finite() {
            BoundState::Finite
        } else {
            BoundState::NoFiniteEnvelope
        };
        self.constants.set("final_bound", bound);
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Envelope value at `t`: the stored sample when one matches, otherwise
    /// the larger of the two neighbouring samples (`None` outside the
    /// sampled range).
    pub fn envelope_at(&self, t: f64) -> Option<f64> {
        let tol = 1e-12 * t.abs().max(1.0);
        let idx = self.envelope.partition_point(|s| s.t < t - tol);
        let next = self.envelope.get(idx)?;
        if (next.t - t).abs() <= tol {
            return Some(next.bound);
        }
        let prev = self.envelope.get(idx.checked_sub(1)?)?;
        Some(prev.bound.max(next.bound))
    }
}
