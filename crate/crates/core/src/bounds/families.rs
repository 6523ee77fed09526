//! Closed-form drift-growth profiles `z0` paired with data decay rates `Λ̄`
//! for which the unbounded-drift envelope applies.

use serde::{Deserialize, Serialize};

use super::unbounded::{
    drift_divergence_integral, monotone_balance, unbounded_drift_envelope, ConditionOptions,
    MonotoneReport,
};
use crate::error::{Error, Result};
use crate::scenario::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FamilyKind {
    /// `z0 = γ ln ln t`.
    #[serde(rename = "ex1_i")]
    Ex1I { gamma: f64 },
    /// `z0 = γ ln(t (ln t)^α)` with `γ < c0/d`.
    #[serde(rename = "ex1_ii")]
    Ex1Ii { gamma: f64, alpha: f64 },
    /// `z0 = (c0/d) ln(t (ln t)^α)` with `α < 1`.
    #[serde(rename = "ex1_iii")]
    Ex1Iii { alpha: f64 },
    /// `z0 = γ (ln ln t)^α`, `Λ̄ = L t^{-β}`.
    #[serde(rename = "ex2")]
    Ex2 { alpha: f64, beta: f64, gamma: f64 },
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Ex1I { .. } => "ex1_i",
            FamilyKind::Ex1Ii { .. } => "ex1_ii",
            FamilyKind::Ex1Iii { .. } => "ex1_iii",
            FamilyKind::Ex2 { .. } => "ex2",
        }
    }

    /// Sign of `𝓕'` for large `t`.
    pub fn expected_sign(&self) -> i8 {
        match *self {
            FamilyKind::Ex1Iii { alpha } if alpha >= 0.0 => -1,
            _ => 1,
        }
    }
}

/// A closed-form pair `(z0, Λ̄)` with its exact limit
/// `ℓ = lim Λ̄(t) e^{(d/c0) z0(t)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleFamily {
    pub kind: FamilyKind,
    pub l: f64,
    pub delta: f64,
    pub z0: Expr,
    pub lambda_bar: Expr,
    pub ell: f64,
}

fn num(v: f64) -> String {
    format!("({v})")
}

fn bad(msg: String) -> Error {
    Error::BadParameter(msg)
}

/// Build the closed-form pair for `kind`. The ex1 cases use
/// `Λ̄ = L e^{-(d/c0 + δ) z0}`, so `ℓ = L` for `δ = 0` and `0` for `δ > 0`.
pub fn example_family(kind: FamilyKind, l: f64, delta: f64, c0: f64, d: f64) -> Result<ExampleFamily> {
    if !(l > 0.0) {
        return Err(bad(format!("L must be positive, got {l}")));
    }
    if !(c0 > 0.0 && d > 0.0) {
        return Err(bad(format!("c0 and d must be positive, got c0 = {c0}, d = {d}")));
    }
    let is_ex1 = !matches!(kind, FamilyKind::Ex2 { .. });
    if is_ex1 && !(delta >= 0.0) {
        return Err(bad(format!("delta must be non-negative, got {delta}")));
    }
    let rate = d / c0 + delta;
    let (z0, lambda_bar) = match kind {
        FamilyKind::Ex1I { gamma } => {
            if !(gamma > 0.0) {
                return Err(bad(format!("ex1_i needs gamma > 0, got {gamma}")));
            }
            (
                format!("{}*lnln(t)", num(gamma)),
                format!("{}*ln(t)^{}", num(l), num(-gamma * rate)),
            )
        }
        FamilyKind::Ex1Ii { gamma, alpha } => {
            if !(gamma > 0.0) {
                return Err(bad(format!("ex1_ii needs gamma > 0, got {gamma}")));
            }
            if !(gamma < c0 / d) {
                return Err(Error::HypothesisFailed {
                    assumption: "ex1_ii_rate_below_critical".into(),
                    detail: format!("ex1_ii needs gamma < c0/d = {}, got {gamma}", c0 / d),
                });
            }
            let base = format!("(t*ln(t)^{})", num(alpha));
            (
                format!("{}*ln{base}", num(gamma)),
                format!("{}*{base}^{}", num(l), num(-gamma * rate)),
            )
        }
        FamilyKind::Ex1Iii { alpha } => {
            if !(alpha < 1.0) {
                return Err(bad(format!("ex1_iii needs alpha < 1, got {alpha}")));
            }
            let base = format!("(t*ln(t)^{})", num(alpha));
            (
                format!("{}*ln{base}", num(c0 / d)),
                format!("{}*{base}^{}", num(l), num(-(c0 / d) * rate)),
            )
        }
        FamilyKind::Ex2 { alpha, beta, gamma } => {
            if !(alpha > 0.0 && beta > 0.0 && gamma > 0.0) {
                return Err(bad(format!(
                    "ex2 needs alpha, beta, gamma > 0, got ({alpha}, {beta}, {gamma})"
                )));
            }
            (
                format!("{}*lnln(t)^{}", num(gamma), num(alpha)),
                format!("{}*t^{}", num(l), num(-beta)),
            )
        }
    };
    let ell = if is_ex1 && delta == 0.0 { l } else { 0.0 };
    Ok(ExampleFamily {
        kind,
        l,
        delta,
        z0: Expr::parse(&z0)?,
        lambda_bar: Expr::parse(&lambda_bar)?,
        ell,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub family: String,
    #[serde(rename = "L")]
    pub l: f64,
    pub delta: f64,
    pub z0: String,
    #[serde(rename = "Lambda_bar")]
    pub lambda_bar: String,
    pub ell: f64,
    pub ell_windowed: f64,
    pub divergence_integral: f64,
    pub divergence_pass: bool,
    pub monotone: MonotoneReport,
    pub expected_sign: i8,
    pub pass: bool,
}

/// Check that `∫ e^{-(d/c0) z0}` diverges and that
/// `𝓕(t) = Λ̄(t) exp(e^{-d²/(2c0)-ε} ∫_{t*}^{t+1} e^{-(d/c0) z0})` is
/// monotone on `[t*, t* + window]`.
pub fn condition_report(
    family: &ExampleFamily,
    c0: f64,
    d: f64,
    opts: &ConditionOptions,
) -> Result<ConditionReport> {
    let z0 = |t: f64| family.z0.at_t(t);
    let lb = |t: f64| family.lambda_bar.at_t(t);
    let divergence = drift_divergence_integral(z0, c0, d, opts.t_lower, opts.horizon)?;
    let monotone = monotone_balance(lb, z0, c0, d, opts.eps, opts.t_star, opts.window, opts.samples)?;
    let windowed = unbounded_drift_envelope(lb, z0, c0, d, opts.tail, 64)?;
    let divergence_pass = divergence > opts.threshold;
    Ok(ConditionReport {
        family: family.kind.name().to_string(),
        l: family.l,
        delta: family.delta,
        z0: family.z0.canonical(),
        lambda_bar: family.lambda_bar.canonical(),
        ell: family.ell,
        ell_windowed: windowed.ell,
        divergence_integral: divergence,
        divergence_pass,
        expected_sign: family.kind.expected_sign(),
        pass: divergence_pass && monotone.single_signed(),
        monotone,
    })
}

/// The parameter sweep reported by the `families` command.
pub fn default_sweep(c0: f64, d: f64) -> Vec<(FamilyKind, f64)> {
    let mut out = Vec::new();
    for gamma in [0.5, 1.0, 2.0] {
        for delta in [0.0, 0.5] {
            out.push((FamilyKind::Ex1I { gamma }, delta));
        }
    }
    for g in [0.3, 0.6] {
        for alpha in [-1.0, 0.0, 1.0] {
            for delta in [0.0, 0.5] {
                out.push((FamilyKind::Ex1Ii { gamma: g * c0 / d, alpha }, delta));
            }
        }
    }
    for alpha in [-1.0, 0.0, 0.5] {
        for delta in [0.0, 0.5] {
            out.push((FamilyKind::Ex1Iii { alpha }, delta));
        }
    }
    for (alpha, beta, gamma) in [(1.0, 1.0, 1.0), (0.5, 2.0, 1.0), (2.0, 0.5, 0.5)] {
        out.push((FamilyKind::Ex2 { alpha, beta, gamma }, 0.0));
    }
    out
}
