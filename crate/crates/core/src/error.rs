//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} lies in the closed domain; distances to the domain are degenerate")]
    InteriorPoint { point: Vec<f64> },

    #[error("barrier radius {radius} must exceed the domain diameter {diameter}")]
    RadiusTooSmall { radius: f64, diameter: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parse error at byte {pos}: expected one of [{}], found {found}", expected.join(", "))]
    Parse {
        pos: usize,
        expected: Vec<String>,
        found: String,
    },

    #[error("expression outside its domain: {0}")]
    EvalDomain(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("value {value} lies outside the admissible range {range}")]
    OutOfRange { value: f64, range: String },

    #[error("lambda {lambda} is outside the admissible window for the {direction} inequality (threshold {threshold})")]
    LambdaOutsideWindow {
        lambda: f64,
        direction: String,
        threshold: f64,
    },

    #[error("forcing majorant is negative ({value}) at t = {t}")]
    NegativeForcingMajorant { t: f64, value: f64 },

    #[error("inner radius {r0} must lie strictly between 0 and the outer radius {outer}")]
    BadGeometry { r0: f64, outer: f64 },

    #[error("drift growth profile is not increasing near t = {t}")]
    NotIncreasing { t: f64 },

    #[error("no admissible start time found up to t = {horizon}")]
    NoValidT0 { horizon: f64 },

    #[error("hypothesis `{assumption}` failed: {detail}")]
    HypothesisFailed { assumption: String, detail: String },

    #[error("solution range [{lower}, {upper}] is not certified to lie in {range}")]
    RangeViolation {
        lower: f64,
        upper: f64,
        range: String,
    },

    #[error("the finite-difference solver does not support {0} domains")]
    UnsupportedDomain(String),

    #[error("solution value {value} left {range} at t = {t}")]
    RangeExit { t: f64, value: f64, range: String },

    #[error("solution blew up at t = {t} (max |u| = {max_abs})")]
    Instability { t: f64, max_abs: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InteriorPoint { .. } => "interior_point",
            Error::RadiusTooSmall { .. } => "radius_too_small",
            Error::InvalidDomain(_) => "invalid_domain",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Parse { .. } => "parse",
            Error::EvalDomain(_) => "eval_domain",
            Error::UnknownVariable(_) => "unknown_variable",
            Error::BadParameter(_) => "bad_parameter",
            Error::OutOfRange { .. } => "out_of_range",
            Error::LambdaOutsideWindow { .. } => "lambda_outside_window",
            Error::NegativeForcingMajorant { .. } => "negative_forcing_majorant",
            Error::BadGeometry { .. } => "bad_geometry",
            Error::NotIncreasing { .. } => "not_increasing",
            Error::NoValidT0 { .. } => "no_valid_t0",
            Error::HypothesisFailed { .. } => "hypothesis_failed",
            Error::RangeViolation { .. } => "range_violation",
            Error::UnsupportedDomain(_) => "unsupported_domain",
            Error::RangeExit { .. } => "range_exit",
            Error::Instability { .. } => "instability",
            Error::Config(_) => "config",
        }
    }

    /// The hypothesis a failure violates, when there is one.
    pub fn assumption(&self) -> Option<&str> {
        Some(match self {
            Error::HypothesisFailed { assumption, .. } => assumption,
            Error::RadiusTooSmall { .. } => "barrier_radius_exceeds_diameter",
            Error::InteriorPoint { .. } | Error::BadGeometry { .. } => "barrier_center_outside_domain",
            Error::BadParameter(_) => "parameter_constraints",
            Error::NegativeForcingMajorant { .. } => "forcing_majorant",
            Error::NotIncreasing { .. } => "drift_profile_increasing",
            Error::NoValidT0 { .. } => "start_time_exists",
            Error::RangeViolation { .. } | Error::RangeExit { .. } | Error::OutOfRange { .. } => {
                "range_in_J"
            }
            Error::LambdaOutsideWindow { .. } => "lambda_window",
            _ => return None,
        })
    }

    /// True for errors that stem from malformed input rather than from a
    /// failed hypothesis or a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::UnknownVariable(_)
                | Error::Config(_)
                | Error::DimensionMismatch { .. }
                | Error::InvalidDomain(_)
        )
    }
}
