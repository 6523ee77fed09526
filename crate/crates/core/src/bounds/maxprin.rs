//! Maximum-principle bounds: boundary data plus accumulated forcing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{improper_integral, simpson, Improper, SIMPSON_REL_TOL};

/// Largest time up to which integrals over `[a, ∞)` are tracked.
pub const IMPROPER_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Bound `max u` by `G1 + ∫F1`.
    Upper,
    /// Bound `min u` from below by `G2 - ∫F2`.
    Lower,
    /// Bound `max |u|` by `G + ∫F`.
    Abs,
}

fn checked(forcing: &mut impl FnMut(f64) -> Result<f64>, t: f64) -> Result<f64> {
    let v = forcing(t)?;
    if v < 0.0 || v.is_nan() {
        return Err(Error::NegativeForcingMajorant { t, value: v });
    }
    Ok(v)
}

/// `∫_0^t F` for a non-negative majorant; `t = ∞` is allowed and fails with
/// `HypothesisFailed` when the integral diverges.
pub fn forcing_integral(mut forcing: impl FnMut(f64) -> Result<f64>, t: f64) -> Result<f64> {
    if t.is_infinite() {
        return match improper_integral(|s| checked(&mut forcing, s), 0.0, IMPROPER_LIMIT)? {
            Improper::Divergent { partial, upper } => Err(Error::HypothesisFailed {
                assumption: "integrable_forcing".into(),
                detail: format!("integral of F keeps growing (reaches {partial:.6e} by t = {upper:.3e})"),
            }),
            ok => Ok(ok.value().unwrap_or(f64::INFINITY)),
        };
    }
    simpson(|s| checked(&mut forcing, s), 0.0, t, SIMPSON_REL_TOL)
}

/// Maximum-principle envelope at time `t`: `G(t) + ∫_0^t F` for the upper
/// and absolute sides, `G(t) - ∫_0^t F` for the lower side, where `G` is
/// the corresponding extremum of the data on the parabolic boundary up to
/// `t`.
pub fn max_principle_envelope(
    boundary_max: impl Fn(f64) -> f64,
    forcing: impl FnMut(f64) -> Result<f64>,
    t: f64,
    side: Side,
) -> Result<f64> {
    let integral = forcing_integral(forcing, t)?;
    let g = boundary_max(t);
    Ok(match side {
        Side::Upper | Side::Abs => g + integral,
        Side::Lower => g - integral,
    })
}

/// Range of a solution over all time implied by its data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalRange {
    pub upper: f64,
    pub lower: f64,
}

/// Global range from data extremes: `upper = max(sup u0, sup g) + ∫F1` and
/// `lower = min(inf u0, inf g) - ∫F2`, where `F1`, `F2` bound the positive
/// and negative parts of the forcing.
pub fn global_range(
    u0: (f64, f64),
    g: (f64, f64),
    f1_integral: f64,
    f2_integral: f64,
) -> GlobalRange {
    let m1 = u0.1.max(g.1);
    let m2 = u0.0.min(g.0);
    GlobalRange {
        upper: m1 + f1_integral,
        lower: m2 - f2_integral,
    }
}
