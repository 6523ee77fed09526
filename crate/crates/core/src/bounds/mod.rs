//! Explicit long-time bounds and their certificates.

pub mod certificate;
pub mod certify;
pub mod data;
pub mod families;
pub mod growth;
pub mod maxprin;
pub mod nonlinear;
pub mod unbounded;

pub use certificate::{
    BoundCertificate, BoundState, CertificateKind, EnvelopeSample, HypothesisCheck, Ledger,
    Quantity, StepRecord,
};
pub use growth::{
    bounded_drift_envelope, contraction_factor, geometric_tail, growth_params, iterate_contractions,
    iterate_growth, ln_one_minus_eta, uniform_growth_envelope, BoundedEnvelope, GrowthIterate,
    GrowthParams, GrowthSchedule, GrowthStep, ScheduleMode, UniformEnvelope,
};
pub use maxprin::{forcing_integral, global_range, max_principle_envelope, GlobalRange, Side};
pub use unbounded::{
    drift_exponent, find_t0, growth_conditions, unbounded_drift_envelope, unbounded_drift_schedule,
    ConditionOptions, GrowthConditions, T0Search, UnboundedEnvelope,
};
pub use families::{
    condition_report, default_sweep, example_family, ConditionReport, ExampleFamily, FamilyKind,
};
pub use nonlinear::{nonlinear_certificate, NonlinearMode, NonlinearOptions, NonlinearProfiles};
pub use certify::{certify, CertifyConfig, CertifyMode, FamilySpec};
