//! Certificate dispatch for a configured scenario: the `certify` section of
//! a run configuration selects the bound and supplies its hypothesis
//! profiles.

use serde::{Deserialize, Serialize};

use super::certificate::{
    BoundCertificate, CertificateKind, EnvelopeSample, HypothesisCheck, Quantity, StepRecord,
};
use super::data::{geomspace, linspace, DataSamples};
use super::families::{example_family, FamilyKind};
use super::growth::{bounded_drift_envelope, iterate_growth, uniform_growth_envelope};
use super::maxprin::forcing_integral;
use super::nonlinear::{
    envelope_times, forcing_majorant_margin, forcing_window_sup, nonlinear_certificate,
    push_bound_checks, NonlinearMode, NonlinearOptions, NonlinearProfiles,
};
use super::unbounded::{
    final_from_ell, growth_conditions, unbounded_drift_schedule, ConditionOptions, T0Search,
    DEFAULT_EPS0, DEFAULT_HORIZON, SAMPLES_PER_DECADE,
};
use crate::error::{Error, Result};
use crate::quadrature::{simpson, SIMPSON_REL_TOL};
use crate::scenario::{Expr, Mode, Scenario};
use crate::transform::DEFAULT_LAMBDA_MARGIN;

/// Which certificate to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertifyMode {
    #[serde(rename = "max_principle")]
    MaxPrinciple,
    #[serde(rename = "bounded")]
    Bounded,
    #[serde(rename = "unbounded")]
    Unbounded,
    #[serde(rename = "nonlinear-NHL1")]
    IntegrableBounded,
    #[serde(rename = "nonlinear-NHL2")]
    IntegrableGrowing,
    #[serde(rename = "nonlinear-NHL3")]
    NonIntegrable,
    #[serde(rename = "nonlinear-NHL4")]
    NonIntegrableZero,
}

impl CertifyMode {
    pub fn nonlinear(self) -> Option<NonlinearMode> {
        match self {
            CertifyMode::IntegrableBounded => Some(NonlinearMode::IntegrableBounded),
            CertifyMode::IntegrableGrowing => Some(NonlinearMode::IntegrableGrowing),
            CertifyMode::NonIntegrable => Some(NonlinearMode::NonIntegrable),
            CertifyMode::NonIntegrableZero => Some(NonlinearMode::NonIntegrableZero),
            _ => None,
        }
    }
}

/// A closed-form drift/decay pair for the unbounded-drift certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub kind: FamilyKind,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default)]
    pub delta: f64,
}

fn default_tail_fraction() -> f64 {
    0.8
}

fn default_eps0() -> f64 {
    DEFAULT_EPS0
}

fn default_steps() -> usize {
    500
}

fn default_t0_horizon() -> f64 {
    DEFAULT_HORIZON
}

fn default_lambda_margin() -> f64 {
    DEFAULT_LAMBDA_MARGIN
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub mode: CertifyMode,
    /// `F(t) ≥ |f(x,t)|`; may be omitted when `f` is a constant.
    #[serde(default)]
    pub forcing_majorant: Option<Expr>,
    /// Majorant of `f⁻` for the lower end of the solution range.
    #[serde(default)]
    pub forcing_minus_majorant: Option<Expr>,
    #[serde(default)]
    pub b_bar: Option<Expr>,
    #[serde(rename = "Lambda_tilde", default)]
    pub lambda_tilde: Option<Expr>,
    #[serde(rename = "F_cal", default)]
    pub cal_f: Option<Expr>,
    /// Decay profile `Λ̄` for the unbounded-drift certificate.
    #[serde(rename = "Lambda_bar", default)]
    pub lambda_bar: Option<Expr>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    /// Outer barrier radius; defaults to twice the diameter.
    #[serde(default)]
    pub barrier_radius: Option<f64>,
    /// Horizon of the certified envelope; defaults to the simulation end.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub envelope_dt: Option<f64>,
    #[serde(default = "default_tail_fraction")]
    pub tail_fraction: f64,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    /// Number of steps of the unbounded-drift schedule.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_t0_horizon")]
    pub t0_horizon: f64,
    #[serde(default = "default_lambda_margin")]
    pub lambda_margin: f64,
    /// Spatial samples per axis for data maxima.
    #[serde(default)]
    pub resolution: Option<Vec<usize>>,
    #[serde(default)]
    pub conditions: ConditionOptions,
}

impl CertifyConfig {
    pub fn new(mode: CertifyMode) -> Self {
        CertifyConfig {
            mode,
            forcing_majorant: None,
            forcing_minus_majorant: None,
            b_bar: None,
            lambda_tilde: None,
            cal_f: None,
            lambda_bar: None,
            family: None,
            barrier_radius: None,
            t_end: None,
            envelope_dt: None,
            tail_fraction: default_tail_fraction(),
            eps0: default_eps0(),
            steps: default_steps(),
            t0_horizon: default_t0_horizon(),
            lambda_margin: default_lambda_margin(),
            resolution: None,
            conditions: ConditionOptions::default(),
        }
    }
}

/// Settings resolved against the scenario.
struct Resolved {
    t_end: f64,
    envelope_dt: f64,
    tail: (f64, f64),
    samples: DataSamples,
}

fn resolve(scenario: &Scenario, cfg: &CertifyConfig, t_end: f64) -> Result<Resolved> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::BadParameter(format!("certificate horizon must be positive, got {t_end}")));
    }
    if !(cfg.tail_fraction > 0.0 && cfg.tail_fraction < 1.0) {
        return Err(Error::BadParameter(format!(
            "tail_fraction must lie in (0, 1), got {}",
            cfg.tail_fraction
        )));
    }
    let envelope_dt = cfg.envelope_dt.unwrap_or(t_end / 100.0);
    if !(envelope_dt > 0.0) {
        return Err(Error::BadParameter(format!("envelope_dt must be positive, got {envelope_dt}")));
    }
    let resolution = cfg
        .resolution
        .clone()
        .unwrap_or_else(|| vec![21; scenario.dimension()]);
    Ok(Resolved {
        t_end,
        envelope_dt,
        tail: (cfg.tail_fraction * t_end, t_end),
        samples: DataSamples::new(&scenario.domain, &resolution)?,
    })
}

/// The declared majorant `F`, or `|c|` for a constant forcing `f ≡ c`.
fn forcing_of(scenario: &Scenario, cfg: &CertifyConfig) -> Result<Expr> {
    if let Some(f) = &cfg.forcing_majorant {
        return Ok(f.clone());
    }
    match scenario.f.as_constant() {
        Some(c) => Ok(Expr::constant(c.abs())),
        None => Err(Error::Config(
            "non-constant forcing needs `certify.forcing_majorant`".into(),
        )),
    }
}

fn barrier_radius(scenario: &Scenario, cfg: &CertifyConfig) -> f64 {
    cfg.barrier_radius
        .unwrap_or(2.0 * scenario.domain.diameter())
}

fn abs(v: f64) -> Result<f64> {
    Ok(v.abs())
}

/// Build the certificate selected by `cfg.mode` over `[0, t_end]`.
pub fn certify(scenario: &Scenario, cfg: &CertifyConfig, t_end: f64) -> Result<BoundCertificate> {
    let res = resolve(scenario, cfg, t_end)?;
    if let Some(mode) = cfg.mode.nonlinear() {
        let mut opts = NonlinearOptions::new(scenario.dimension(), res.t_end);
        opts.lambda_margin = cfg.lambda_margin;
        opts.barrier_radius_factor = barrier_radius(scenario, cfg) / scenario.domain.diameter();
        if let Some(r) = &cfg.resolution {
            opts.resolution = r.clone();
        }
        opts.tail_fraction = cfg.tail_fraction;
        opts.envelope_dt = res.envelope_dt;
        opts.conditions = cfg.conditions;
        let profiles = NonlinearProfiles {
            forcing: Some(forcing_of(scenario, cfg)?),
            forcing_minus: cfg.forcing_minus_majorant.clone(),
            b_bar: cfg.b_bar.clone(),
            lambda_tilde: cfg.lambda_tilde.clone(),
            cal_f: cfg.cal_f.clone(),
        };
        return nonlinear_certificate(scenario, mode, &profiles, &opts);
    }
    if scenario.mode != Mode::Linear {
        return Err(Error::Config(format!(
            "certify mode {:?} needs a linear scenario",
            cfg.mode
        )));
    }
    let forcing = forcing_of(scenario, cfg)?;
    match cfg.mode {
        CertifyMode::MaxPrinciple => max_principle_certificate(scenario, &forcing, &res),
        CertifyMode::Bounded => bounded_certificate(scenario, cfg, &forcing, &res),
        CertifyMode::Unbounded => unbounded_certificate(scenario, cfg, &forcing, &res),
        _ => unreachable!("nonlinear modes handled above"),
    }
}

/// `(t_i, G(t_i) + ∫_0^{t_i} F)` where `G(t)` is the max of `|u|` on the
/// parabolic boundary up to `t`.
fn max_principle_samples(
    scenario: &Scenario,
    samples: &DataSamples,
    forcing: &Expr,
    times: &[f64],
) -> Result<Vec<EnvelopeSample>> {
    let mut g = samples.initial_max(&scenario.u0, &scenario.g, abs)?;
    let mut integral = 0.0;
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t > prev {
            g = g.max(samples.boundary_window_max(&scenario.g, prev, t, abs)?);
            integral += forcing_integral(|s| forcing.at_t(s), t)? - forcing_integral(|s| forcing.at_t(s), prev)?;
            prev = t;
        }
        out.push(EnvelopeSample { t, bound: g + integral });
    }
    Ok(out)
}

fn forcing_check(
    cert: &mut BoundCertificate,
    scenario: &Scenario,
    samples: &DataSamples,
    forcing: &Expr,
    t_end: f64,
) -> Result<()> {
    let fm = forcing_majorant_margin(scenario, samples, forcing, 0.0, t_end)?;
    cert.checks.push(HypothesisCheck::new("forcing_majorant", "|f(x,t)| ≤ F(t)", fm));
    Ok(())
}

fn max_principle_certificate(
    scenario: &Scenario,
    forcing: &Expr,
    res: &Resolved,
) -> Result<BoundCertificate> {
    let mut cert = BoundCertificate::new(CertificateKind::MaxPrinciple, Quantity::MaxAbsU);
    forcing_check(&mut cert, scenario, &res.samples, forcing, res.t_end)?;
    let times = envelope_times(res.t_end, res.envelope_dt);
    cert.envelope = max_principle_samples(scenario, &res.samples, forcing, &times)?;
    let last = cert.envelope.last().map_or(0.0, |s| s.bound);
    cert.constants.set("boundary_sup", cert.envelope.first().map_or(0.0, |s| s.bound));
    cert.constants.set("forcing_integral", forcing_integral(|s| forcing.at_t(s), res.t_end)?);
    cert.set_final_bound(last);
    Ok(cert)
}

fn bounded_certificate(
    scenario: &Scenario,
    cfg: &CertifyConfig,
    forcing: &Expr,
    res: &Resolved,
) -> Result<BoundCertificate> {
    let c = &scenario.constants;
    let m2 = c
        .m2
        .ok_or_else(|| Error::Config("bounded-drift certificate needs constant `M2`".into()))?;
    let mut cert = BoundCertificate::new(CertificateKind::BoundedDrift, Quantity::MaxAbsU);
    push_bound_checks(&mut cert, scenario, &res.samples, linspace(0.0, res.t_end, 21), vec![0.0], None)?;
    forcing_check(&mut cert, scenario, &res.samples, forcing, res.t_end)?;

    let x0 = scenario.domain.barrier_center(barrier_radius(scenario, cfg))?;
    let shape = bounded_drift_envelope(c.c0, c.m1, m2, &scenario.domain, &x0, 0.0, 0.0)?;
    let g_tail = res.samples.boundary_window_max(&scenario.g, res.tail.0, res.tail.1, abs)?;
    let fw = forcing_window_sup(forcing, res.tail, shape.t_star)?;
    let env = bounded_drift_envelope(c.c0, c.m1, m2, &scenario.domain, &x0, g_tail, fw)?;
    let led = &mut cert.constants;
    led.set("c0", c.c0);
    led.set("M1", c.m1);
    led.set("M2", m2);
    led.set("d", scenario.domain.diameter());
    led.set("r0", shape.r0);
    led.set("R", shape.outer);
    led.set("beta_star", shape.beta_star);
    led.set("T_star", shape.t_star);
    led.set("eta_star", shape.eta_star);
    led.set("prefactor", shape.prefactor);
    led.set("boundary_limsup", g_tail);
    led.set("forcing_window_limsup", fw);
    cert.set_final_bound(env.bound);
    cert.tail_window = Some(res.tail);
    cert.ell_source = Some("windowed".into());

    let samples = &res.samples;
    let j0 = samples.initial_max(&scenario.u0, &scenario.g, abs)?;
    let uniform = uniform_growth_envelope(shape.t_star, shape.eta_star, j0, res.t_end, |a, b| {
        Ok(samples.boundary_window_max(&scenario.g, a, b, abs)?
            + simpson(|s| forcing.at_t(s), a, b, SIMPSON_REL_TOL)?)
    })?;
    for k in 1..=uniform.lambdas.len() {
        cert.steps.push(StepRecord {
            k,
            t_k: uniform.step_end(k),
            tau_k: shape.t_star,
            eta_k: shape.eta_star,
            lambda_k: uniform.lambdas[k - 1],
            j_k: uniform.iterate.j[k],
        });
    }
    for t in envelope_times(res.t_end, res.envelope_dt) {
        cert.envelope.push(EnvelopeSample { t, bound: uniform.at(t) });
    }
    Ok(cert)
}

fn unbounded_certificate(
    scenario: &Scenario,
    cfg: &CertifyConfig,
    forcing: &Expr,
    res: &Resolved,
) -> Result<BoundCertificate> {
    let c = &scenario.constants;
    let d = scenario.domain.diameter();
    let cond = &cfg.conditions;
    let family = cfg
        .family
        .map(|f| example_family(f.kind, f.l, f.delta, c.c0, d))
        .transpose()?;
    let z0 = match (&c.z0, &family) {
        (Some(z), _) => z.clone(),
        (None, Some(f)) => f.z0.clone(),
        (None, None) => {
            return Err(Error::Config(
                "unbounded-drift certificate needs `constants.z0` or `certify.family`".into(),
            ))
        }
    };
    let lambda_bar = match (&cfg.lambda_bar, &family) {
        (Some(l), _) => l.clone(),
        (None, Some(f)) => f.lambda_bar.clone(),
        (None, None) => {
            return Err(Error::Config(
                "unbounded-drift certificate needs `certify.Lambda_bar` or `certify.family`".into(),
            ))
        }
    };
    let mut cert = BoundCertificate::new(CertificateKind::UnboundedDrift, Quantity::MaxAbsU);
    let samples = &res.samples;
    let times = linspace(cond.t_lower, cond.t_lower + res.t_end.max(10.0), 21);
    push_bound_checks(&mut cert, scenario, samples, times, vec![0.0], None)?;
    forcing_check(&mut cert, scenario, samples, forcing, res.t_end)?;

    // Λ̄(4t) must dominate the data on [t, t+1].
    let mut margin = f64::INFINITY;
    for t in geomspace(cond.t_lower, cond.t_lower * 1e4, 41) {
        let g = samples.boundary_window_max(&scenario.g, t, t + 1.0, abs)?;
        let f = simpson(|s| forcing.at_t(s), t, t + 1.0, SIMPSON_REL_TOL)?;
        margin = margin.min(lambda_bar.at_t(4.0 * t)? - g - f);
    }
    cert.checks.push(HypothesisCheck::new(
        "data_decay_majorant",
        "max_{Γ×[t,t+1]} |g| + ∫_t^{t+1} F ≤ Λ̄(4t)",
        margin,
    ));
    let z0_fn = |t: f64| z0.at_t(t);
    let lb_fn = |t: f64| lambda_bar.at_t(t);
    let gc = growth_conditions(&lb_fn, &z0_fn, c.c0, d, cond)?;
    cert.checks.extend(gc.checks.into_iter().filter(|c| c.assumption != "vanishing_balance"));
    let (ell, source) = match &family {
        Some(f) => (f.ell, "exact"),
        None => (gc.ell_windowed, "windowed"),
    };
    let led = &mut cert.constants;
    led.set("c0", c.c0);
    led.set("M1", c.m1);
    led.set("d", d);
    led.set("eps0", cfg.eps0);
    led.set("ell", ell);
    led.set("ell_windowed", gc.ell_windowed);
    cert.set_final_bound(final_from_ell(ell, c.c0, d));
    cert.tail_window = Some(cond.tail);
    cert.ell_source = Some(source.into());

    let search = T0Search {
        t_min: cond.t_lower,
        horizon: cfg.t0_horizon,
        per_decade: SAMPLES_PER_DECADE,
    };
    match unbounded_drift_schedule(c.c0, c.m1, &scenario.domain, z0_fn, cfg.eps0, cfg.steps, &search) {
        Ok((t0, schedule)) => {
            cert.constants.set("T0", t0);
            let env = max_principle_samples(scenario, samples, forcing, &[t0])?;
            let j0 = env[0].bound;
            let lambdas = (1..=schedule.steps.len())
                .map(|k| lambda_bar.at_t(4.0 * schedule.step_start(k)))
                .collect::<Result<Vec<f64>>>()?;
            let it = iterate_growth(&schedule, &lambdas, j0);
            for (i, s) in schedule.steps.iter().enumerate() {
                cert.steps.push(StepRecord {
                    k: s.k,
                    t_k: s.t_k,
                    tau_k: s.tau_k,
                    eta_k: s.eta_k,
                    lambda_k: lambdas[i],
                    j_k: it.j[i + 1],
                });
            }
        }
        // No start time below the search horizon.
        Err(Error::NoValidT0 { .. }) => cert.constants.set("T0", f64::INFINITY),
        Err(e) => return Err(e),
    }
    let times = envelope_times(res.t_end, res.envelope_dt);
    cert.envelope = max_principle_samples(scenario, samples, forcing, &times)?;
    Ok(cert)
}
