//! Certificates for the nonlinear problem `u_t - ⟨A, D²u⟩ + B(x,t,u)·∇u +
//! P'(u)(K∇u)·∇u = f`: the range of `u` from its data, the transforms
//! `F_λ(u)` that remove the quadratic term, and the resulting envelopes
//! for `|u - u_*|`.

use serde::{Deserialize, Serialize};

use super::certificate::{
    BoundCertificate, CertificateKind, EnvelopeSample, HypothesisCheck, Quantity, StepRecord,
};
use super::data::{geomspace, linspace, DataSamples};
use super::growth::{bounded_drift_envelope, uniform_growth_envelope};
use super::maxprin::{forcing_integral, global_range};
use super::unbounded::{growth_conditions, ConditionOptions};
use crate::error::{Error, Result};
use crate::quadrature::{simpson, SIMPSON_REL_TOL};
use crate::scenario::{verify_coefficient_bounds, Expr, Mode, PFamily, SampleSpec, Scenario};
use crate::transform::{lambda_window, Transform, DEFAULT_LAMBDA_MARGIN};

/// Which convergence theorem the certificate follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonlinearMode {
    /// Integrable forcing, drift bounded by `cB (1+|s|)^γ0`.
    #[serde(rename = "NHL1")]
    IntegrableBounded,
    /// Integrable forcing, drift bounded by `b̄(t) (1+|s|)^γ0` with `b̄ → ∞`.
    #[serde(rename = "NHL2")]
    IntegrableGrowing,
    /// Non-integrable forcing, `P = ln`, target `u_* > 0`.
    #[serde(rename = "NHL3")]
    NonIntegrable,
    /// Non-integrable forcing, `P = ln`, target `u_* = 0`.
    #[serde(rename = "NHL4")]
    NonIntegrableZero,
}

/// Time profiles supplied as hypotheses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NonlinearProfiles {
    /// `F(t) ≥ |f(x,t)|`.
    pub forcing: Option<Expr>,
    /// Majorant of `f⁻` for the lower end of the range; defaults to `F`.
    pub forcing_minus: Option<Expr>,
    /// Drift growth `b̄(t)`.
    pub b_bar: Option<Expr>,
    /// Decreasing majorant `Λ̃(t)` of boundary deviation plus forcing on
    /// `[t, t+1]`.
    pub lambda_tilde: Option<Expr>,
    /// Increasing majorant `𝓕(t)` of `∫_0^t F`.
    pub cal_f: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearOptions {
    pub lambda_margin: f64,
    /// Barrier radius as a multiple of the diameter.
    pub barrier_radius_factor: f64,
    /// Spatial samples per axis for data maxima.
    pub resolution: Vec<usize>,
    /// End of the sampled time range.
    pub t_end: f64,
    /// Limsups are estimated on `[tail_fraction·t_end, t_end]`.
    pub tail_fraction: f64,
    pub envelope_dt: f64,
    pub conditions: ConditionOptions,
}

impl NonlinearOptions {
    pub fn new(dimension: usize, t_end: f64) -> Self {
        NonlinearOptions {
            lambda_margin: DEFAULT_LAMBDA_MARGIN,
            barrier_radius_factor: 2.0,
            resolution: vec![21; dimension],
            t_end,
            tail_fraction: 0.8,
            envelope_dt: t_end / 100.0,
            conditions: ConditionOptions::default(),
        }
    }

    fn tail(&self) -> (f64, f64) {
        (self.tail_fraction * self.t_end, self.t_end)
    }
}

fn missing(what: &str, mode: NonlinearMode) -> Error {
    Error::Config(format!("{mode:?} certificate needs `{what}`"))
}

fn required<'a>(e: &'a Option<Expr>, what: &str, mode: NonlinearMode) -> Result<&'a Expr> {
    e.as_ref().ok_or_else(|| missing(what, mode))
}

/// Data-derived quantities shared by all modes. Boundary data are sampled
/// on `[0, t_end]` and geometrically up to the end of the tail window.
struct DataSummary {
    samples: DataSamples,
    u0: (f64, f64),
    g: (f64, f64),
    /// `sup |u|` over the parabolic boundary.
    boundary_sup: f64,
}

fn summarize(scenario: &Scenario, opts: &NonlinearOptions) -> Result<DataSummary> {
    let samples = DataSamples::new(&scenario.domain, &opts.resolution)?;
    let u0 = samples.initial_range(&scenario.u0)?;
    let t_end = opts.t_end.max(1.0);
    let mut times = linspace(0.0, t_end, 401);
    times.extend(geomspace(t_end, t_end.max(opts.conditions.tail.1), 61));
    let g = samples.boundary_range(&scenario.g, &times)?;
    let boundary_sup = u0.0.abs().max(u0.1.abs()).max(g.0.abs()).max(g.1.abs());
    Ok(DataSummary {
        samples,
        u0,
        g,
        boundary_sup,
    })
}

/// Sampled `F(t) - |f(x,t)|` over the closure and `[t0, t1]`.
pub(crate) fn forcing_majorant_margin(
    scenario: &Scenario,
    samples: &DataSamples,
    forcing: &Expr,
    t0: f64,
    t1: f64,
) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for t in linspace(t0, t1, 41) {
        let cap = forcing.at_t(t)?;
        for x in &samples.closure {
            margin = margin.min(cap - scenario.f.at(x, t, 0.0)?.abs());
        }
    }
    Ok(margin)
}

pub(crate) fn push_bound_checks(
    cert: &mut BoundCertificate,
    scenario: &Scenario,
    samples: &DataSamples,
    times: Vec<f64>,
    s_values: Vec<f64>,
    b_bar: Option<&Expr>,
) -> Result<()> {
    let spec = SampleSpec {
        points: samples.closure.clone(),
        times,
        s_values,
    };
    let report = verify_coefficient_bounds(scenario, &spec, b_bar)?;
    for c in report.checks {
        let quote = match c.name.as_str() {
            "ellipticity" => "ξᵀA ξ ≥ c0 |ξ|²",
            "trace_bound" => "Tr A ≤ M1",
            "k_lower_bound" => "ξᵀK ξ ≥ -c1 |ξ|²",
            "k_upper_bound" => "ξᵀK ξ ≤ c2 |ξ|²",
            "drift_bound" => "|b(x,t)| ≤ M2 or z0(t)",
            "drift_growth" => "|B(x,t,s)| ≤ cB (1+|s|)^γ0",
            "drift_growth_profile" => "|B(x,t,s)| ≤ b̄(t) (1+|s|)^γ0",
            _ => "",
        };
        cert.checks.push(HypothesisCheck::with_pass(&c.name, quote, c.margin, c.pass));
    }
    Ok(())
}

/// `sup_t ∫_t^{t+len} F` over `WINDOW`-spaced `t` in `window`.
pub(crate) fn forcing_window_sup(forcing: &Expr, window: (f64, f64), len: f64) -> Result<f64> {
    let mut best: f64 = 0.0;
    for t in linspace(window.0, window.1, 17) {
        best = best.max(simpson(|s| forcing.at_t(s), t, t + len, SIMPSON_REL_TOL)?);
    }
    Ok(best)
}

/// Check the declared structure of `scenario` for a nonlinear certificate.
fn check_mode(scenario: &Scenario, mode: NonlinearMode) -> Result<()> {
    if scenario.mode != Mode::Nonlinear {
        return Err(Error::Config(format!(
            "{mode:?} certificate needs a nonlinear scenario"
        )));
    }
    let log_only = matches!(mode, NonlinearMode::NonIntegrable | NonlinearMode::NonIntegrableZero);
    if log_only && scenario.p_family != PFamily::Log {
        return Err(Error::HypothesisFailed {
            assumption: "log_nonlinearity".into(),
            detail: "non-integrable forcing is only covered for P(s) = ln s on (0, inf)".into(),
        });
    }
    if mode == NonlinearMode::NonIntegrableZero {
        if scenario.u_star != 0.0 {
            return Err(Error::Config("target u_star must be 0 for this mode".into()));
        }
    } else {
        scenario.p_family.check(scenario.u_star)?;
    }
    Ok(())
}

/// Build the certificate for `mode`. Errors name the failed hypothesis
/// when a quantity the bound depends on does not exist (divergent forcing
/// integral, range outside `J`).
pub fn nonlinear_certificate(
    scenario: &Scenario,
    mode: NonlinearMode,
    profiles: &NonlinearProfiles,
    opts: &NonlinearOptions,
) -> Result<BoundCertificate> {
    check_mode(scenario, mode)?;
    match mode {
        NonlinearMode::IntegrableBounded | NonlinearMode::IntegrableGrowing => {
            integrable_certificate(scenario, mode, profiles, opts)
        }
        NonlinearMode::NonIntegrable | NonlinearMode::NonIntegrableZero => {
            non_integrable_certificate(scenario, mode, profiles, opts)
        }
    }
}

fn integrable_certificate(
    scenario: &Scenario,
    mode: NonlinearMode,
    profiles: &NonlinearProfiles,
    opts: &NonlinearOptions,
) -> Result<BoundCertificate> {
    let c = &scenario.constants;
    let forcing = required(&profiles.forcing, "forcing_majorant", mode)?;
    let gamma0 = c.gamma0.ok_or_else(|| missing("gamma0", mode))?;
    let mut cert = BoundCertificate::new(CertificateKind::Nonlinear, Quantity::MaxDevUstar);
    let data = summarize(scenario, opts)?;

    let mu0 = forcing_integral(|t| forcing.at_t(t), f64::INFINITY)?;
    let f2_integral = match &profiles.forcing_minus {
        Some(f2) => forcing_integral(|t| f2.at_t(t), f64::INFINITY)?,
        None => mu0,
    };
    let mu1 = data.boundary_sup;
    let mu2 = mu1 + mu0;
    let range = global_range(data.u0, data.g, mu0, f2_integral);
    let m_lo = range.lower.max(-mu2);
    let m_hi = range.upper.min(mu2);
    let p = scenario.p_family;
    if !(p.contains(m_lo) && p.contains(m_hi)) {
        return Err(Error::RangeViolation {
            lower: m_lo,
            upper: m_hi,
            range: p.range_name().into(),
        });
    }
    let mu3 = p.max_abs_on(m_lo, m_hi);
    let (l1, l2) = lambda_window(c.c0, c.c1, c.c2, opts.lambda_margin);
    let c1 = (mu3 * l1.max(-l2)).exp();
    let c2 = (mu3 * (-l1).min(l2)).exp();
    let led = &mut cert.constants;
    led.set("mu0", mu0);
    led.set("mu1", mu1);
    led.set("mu2", mu2);
    led.set("range_lower", range.lower);
    led.set("range_upper", range.upper);
    led.set("m_star", m_lo);
    led.set("M_star", m_hi);
    led.set("mu3", mu3);
    led.set("lambda1", l1);
    led.set("lambda2", l2);
    led.set("C1", c1);
    led.set("C2", c2);

    let t_end = opts.t_end;
    let fm = forcing_majorant_margin(scenario, &data.samples, forcing, 0.0, t_end)?;
    cert.checks.push(HypothesisCheck::new("forcing_majorant", "|f(x,t)| ≤ F(t)", fm));
    cert.checks.push(HypothesisCheck::new("integrable_forcing", "∫_0^∞ F < ∞", 0.0));
    cert.checks.push(HypothesisCheck::new(
        "range_in_J",
        "u(closure) ⊂ [m_*, M_*] ⊂ J",
        0.0,
    ));

    let tr1 = Transform::new(p, l1, 1.0)?;
    let tr2 = Transform::new(p, l2, 1.0)?;
    let w1_star = tr1.f(scenario.u_star)?;
    let w2_star = tr2.f(scenario.u_star)?;
    // Positive part of w̄1 = F_λ1(s) - F_λ1(u_*) and negative part of w̄2.
    let w1_plus = |s: f64| Ok((tr1.f(s)? - w1_star).max(0.0));
    let w2_minus = |s: f64| Ok((w2_star - tr2.f(s)?).max(0.0));
    let s_values = linspace(m_lo, m_hi, 9);

    match mode {
        NonlinearMode::IntegrableBounded => {
            let cb = c.c_b.ok_or_else(|| missing("cB", mode))?;
            let mu4 = cb * (1.0 + mu2).powf(gamma0);
            cert.constants.set("mu4", mu4);
            push_bound_checks(&mut cert, scenario, &data.samples, linspace(0.0, t_end, 21), s_values, None)?;
            let d = scenario.domain.diameter();
            let x0 = scenario.domain.barrier_center(opts.barrier_radius_factor * d)?;
            let tail = opts.tail();
            let shape = bounded_drift_envelope(c.c0, c.m1, mu4, &scenario.domain, &x0, 0.0, 0.0)?;
            let fw = c1 * forcing_window_sup(forcing, tail, shape.t_star)?;
            let g1 = data.samples.boundary_window_max(&scenario.g, tail.0, tail.1, w1_plus)?;
            let g2 = data.samples.boundary_window_max(&scenario.g, tail.0, tail.1, w2_minus)?;
            let e1 = bounded_drift_envelope(c.c0, c.m1, mu4, &scenario.domain, &x0, g1, fw)?;
            let e2 = bounded_drift_envelope(c.c0, c.m1, mu4, &scenario.domain, &x0, g2, fw)?;
            let led = &mut cert.constants;
            led.set("r0", shape.r0);
            led.set("R", shape.outer);
            led.set("beta_star", shape.beta_star);
            led.set("T_star", shape.t_star);
            led.set("eta_star", shape.eta_star);
            led.set("prefactor", shape.prefactor);
            led.set("boundary_limsup_w1", g1);
            led.set("boundary_limsup_w2", g2);
            led.set("forcing_window_limsup", fw);
            let bound = e1.bound.max(e2.bound);
            cert.set_final_bound(if bound == 0.0 { 0.0 } else { bound / c2 });
            cert.tail_window = Some(tail);
            cert.ell_source = Some("windowed".into());

            let forcing_on = |a: f64, b: f64| -> Result<f64> {
                Ok(c1 * simpson(|s| forcing.at_t(s), a, b, SIMPSON_REL_TOL)?)
            };
            let j1 = data.samples.initial_max(&scenario.u0, &scenario.g, w1_plus)?;
            let j2 = data.samples.initial_max(&scenario.u0, &scenario.g, w2_minus)?;
            let env1 = uniform_growth_envelope(shape.t_star, shape.eta_star, j1, t_end, |a, b| {
                Ok(data.samples.boundary_window_max(&scenario.g, a, b, w1_plus)? + forcing_on(a, b)?)
            })?;
            let env2 = uniform_growth_envelope(shape.t_star, shape.eta_star, j2, t_end, |a, b| {
                Ok(data.samples.boundary_window_max(&scenario.g, a, b, w2_minus)? + forcing_on(a, b)?)
            })?;
            for k in 1..=env1.lambdas.len() {
                cert.steps.push(StepRecord {
                    k,
                    t_k: env1.step_end(k),
                    tau_k: shape.t_star,
                    eta_k: shape.eta_star,
                    lambda_k: env1.lambdas[k - 1].max(env2.lambdas[k - 1]) / c2,
                    j_k: env1.iterate.j[k].max(env2.iterate.j[k]) / c2,
                });
            }
            for t in envelope_times(t_end, opts.envelope_dt) {
                cert.envelope.push(EnvelopeSample {
                    t,
                    bound: env1.at(t).max(env2.at(t)) / c2,
                });
            }
        }
        NonlinearMode::IntegrableGrowing => {
            let b_bar = required(&profiles.b_bar, "b_bar", mode)?;
            let lambda_tilde = required(&profiles.lambda_tilde, "Lambda_tilde", mode)?;
            let cond = &opts.conditions;
            let mu6 = (1.0 + mu2).powf(gamma0);
            // F_λ is C1-Lipschitz on [m_*, M_*], so the boundary factor is C1.
            let c_star = c1;
            let mu7 = c_star.max(c1);
            let led = &mut cert.constants;
            led.set("mu6", mu6);
            led.set("C_star", c_star);
            led.set("mu7", mu7);
            let times = linspace(cond.t_lower, cond.t_lower + t_end.max(10.0), 21);
            push_bound_checks(&mut cert, scenario, &data.samples, times, s_values, Some(b_bar))?;
            let margin = lambda_tilde_margin(scenario, &data.samples, lambda_tilde, cond.t_lower, |a, b| {
                simpson(|s| forcing.at_t(s), a, b, SIMPSON_REL_TOL)
            })?;
            cert.checks.push(HypothesisCheck::new(
                "boundary_decay_majorant",
                "max_{Γ×[t,t+1]} |g - u_*| + ∫_t^{t+1} F ≤ Λ̃(t)",
                margin,
            ));
            let z0 = |t: f64| Ok(mu6 * b_bar.at_t(t)?);
            let lambda_bar = |t: f64| Ok(mu7 * lambda_tilde.at_t(t / 4.0)?);
            finish_growing(&mut cert, scenario, &lambda_bar, &z0, Some(c2), cond)?;
        }
        _ => unreachable!("integrable modes only"),
    }
    Ok(cert)
}

/// Sampled `Λ̃(t) - (max_{Γ×[t,t+1]} |g - u_*| + ∫_t^{t+1} φ)` for
/// geometric `t` from `t_lower` over four decades.
fn lambda_tilde_margin(
    scenario: &Scenario,
    samples: &DataSamples,
    lambda_tilde: &Expr,
    t_lower: f64,
    mut integral: impl FnMut(f64, f64) -> Result<f64>,
) -> Result<f64> {
    let u_star = scenario.u_star;
    let mut margin = f64::INFINITY;
    for t in geomspace(t_lower, t_lower * 1e4, 41) {
        let g = samples.boundary_window_max(&scenario.g, t, t + 1.0, |v| Ok((v - u_star).abs()))?;
        margin = margin.min(lambda_tilde.at_t(t)? - g - integral(t, t + 1.0)?);
    }
    Ok(margin)
}

/// Growth conditions for `(z0, Λ̄)` and the final bound: with `scale =
/// Some(C2)` the bound is `C2⁻¹ e^{d²/(2c0)} ℓ`, with `None` it is `0` when
/// the balance vanishes and `+∞` otherwise.
fn finish_growing(
    cert: &mut BoundCertificate,
    scenario: &Scenario,
    lambda_bar: &impl Fn(f64) -> Result<f64>,
    z0: &impl Fn(f64) -> Result<f64>,
    scale: Option<f64>,
    cond: &ConditionOptions,
) -> Result<()> {
    let c0 = scenario.constants.c0;
    let d = scenario.domain.diameter();
    let gc = growth_conditions(lambda_bar, z0, c0, d, cond)?;
    let holds = gc.hold();
    cert.checks.extend(gc.checks);
    cert.constants.set("ell_windowed", gc.ell_windowed);
    cert.tail_window = Some(cond.tail);
    let bound = match (holds, scale) {
        (true, _) => {
            cert.ell_source = Some("vanishing".into());
            0.0
        }
        (false, Some(c2)) => {
            cert.ell_source = Some("windowed".into());
            (d * d / (2.0 * c0)).exp() * gc.ell_windowed / c2
        }
        (false, None) => f64::INFINITY,
    };
    cert.set_final_bound(bound);
    Ok(())
}

fn non_integrable_certificate(
    scenario: &Scenario,
    mode: NonlinearMode,
    profiles: &NonlinearProfiles,
    opts: &NonlinearOptions,
) -> Result<BoundCertificate> {
    let c = &scenario.constants;
    let forcing = required(&profiles.forcing, "forcing_majorant", mode)?;
    let b_bar = required(&profiles.b_bar, "b_bar", mode)?;
    let lambda_tilde = required(&profiles.lambda_tilde, "Lambda_tilde", mode)?;
    let cal_f = required(&profiles.cal_f, "F_cal", mode)?;
    let gamma0 = c.gamma0.ok_or_else(|| missing("gamma0", mode))?;
    let cond = &opts.conditions;
    let zero_target = mode == NonlinearMode::NonIntegrableZero;
    let quantity = if zero_target { Quantity::MaxU } else { Quantity::MaxDevUstar };
    let mut cert = BoundCertificate::new(CertificateKind::Nonlinear, quantity);
    let data = summarize(scenario, opts)?;

    let divergent = matches!(
        forcing_integral(|t| forcing.at_t(t), f64::INFINITY),
        Err(Error::HypothesisFailed { .. })
    );
    cert.checks.push(HypothesisCheck::with_pass(
        "non_integrable_forcing",
        "∫_0^∞ F = ∞",
        if divergent { 0.0 } else { -1.0 },
        divergent,
    ));
    let f2 = profiles.forcing_minus.as_ref().ok_or_else(|| missing("forcing_minus_majorant", mode))?;
    let f2_integral = forcing_integral(|t| f2.at_t(t), f64::INFINITY)?;
    let lower = data.u0.0.min(data.g.0) - f2_integral;
    let positive = if zero_target { lower >= 0.0 } else { lower > 0.0 };
    if !positive {
        return Err(Error::RangeViolation {
            lower,
            upper: f64::INFINITY,
            range: if zero_target { "[0, inf)" } else { "(0, inf)" }.into(),
        });
    }
    let fm = forcing_majorant_margin(scenario, &data.samples, forcing, 0.0, opts.t_end)?;
    cert.checks.push(HypothesisCheck::new("forcing_majorant", "|f(x,t)| ≤ F(t)", fm));
    if zero_target {
        cert.checks.push(HypothesisCheck::new("nonnegative_boundary", "g ≥ 0", data.g.0));
    }

    // 𝓕 must dominate ∫_0^t F and increase.
    let t_lower = cond.t_lower;
    let times = geomspace(t_lower, t_lower * 1e5, 61);
    let mut running = simpson(|s| forcing.at_t(s), 0.0, t_lower, SIMPSON_REL_TOL)?;
    let mut prev_t = t_lower;
    let mut prev_cal = cal_f.at_t(t_lower)?;
    let (mut dom, mut rise) = (prev_cal - running, f64::INFINITY);
    for &t in &times[1..] {
        running += simpson(|s| forcing.at_t(s), prev_t, t, SIMPSON_REL_TOL)?;
        let cal = cal_f.at_t(t)?;
        dom = dom.min(cal - running);
        rise = rise.min(cal - prev_cal);
        prev_t = t;
        prev_cal = cal;
    }
    cert.checks.push(HypothesisCheck::new("forcing_integral_majorant", "∫_0^t F ≤ 𝓕(t)", dom));
    cert.checks.push(HypothesisCheck::with_pass("forcing_integral_increasing", "𝓕 increasing", rise, rise > 0.0));

    let (l1, l2) = lambda_window(c.c0, c.c1, c.c2, opts.lambda_margin);
    let cal_lo = cal_f.at_t(t_lower)?;
    if !(cal_lo > 0.0) {
        return Err(Error::HypothesisFailed {
            assumption: "forcing_integral_majorant".into(),
            detail: format!("F_cal({t_lower}) = {cal_lo} must be positive"),
        });
    }
    let mu1 = data.boundary_sup / cal_lo + 1.0;
    let mu2 = (1.0 / cal_lo + mu1).powf(gamma0);
    let mu3 = mu1.powf(l1);
    let u_star = scenario.u_star;
    let g_lo = data.g.0.min(u_star);
    let g_hi = data.g.1.max(u_star);
    let c_star = if zero_target {
        g_hi.powf(l1)
    } else {
        g_hi.powf(l1).max(g_lo.powf(l2))
    };
    let mu4 = c_star.max(mu3);
    let mu5 = c_star.max(1.0);
    let scale = if zero_target { mu4 } else { mu4.max(mu5) };
    let led = &mut cert.constants;
    led.set("boundary_sup", data.boundary_sup);
    led.set("forcing_minus_integral", f2_integral);
    led.set("m", lower);
    led.set("F_cal_lower", cal_lo);
    led.set("lambda1", l1);
    led.set("lambda2", l2);
    led.set("mu1", mu1);
    led.set("mu2", mu2);
    led.set("mu3", mu3);
    led.set("C_star", c_star);
    led.set("mu4", mu4);
    if !zero_target {
        led.set("mu5", mu5);
        let dom_power = cal_f.at_t(cond.horizon)?.powf(l1) - lower.powf(l2);
        cert.checks.push(HypothesisCheck::new(
            "lower_bound_power",
            "m^{λ2} ≤ 𝓕(t)^{λ1} for large t",
            dom_power,
        ));
    }

    let s_hi = data.boundary_sup + cal_f.at_t(t_lower + opts.t_end.max(10.0))?;
    let s_values: Vec<f64> = linspace(lower, s_hi, 9)
        .into_iter()
        .filter(|&s| scenario.p_family.contains(s))
        .collect();
    let vtimes = linspace(t_lower, t_lower + opts.t_end.max(10.0), 21);
    push_bound_checks(&mut cert, scenario, &data.samples, vtimes, s_values, Some(b_bar))?;
    let margin = lambda_tilde_margin(scenario, &data.samples, lambda_tilde, t_lower, |a, b| {
        simpson(
            |s| Ok(forcing.at_t(s)? * cal_f.at_t(s)?.powf(l1)),
            a,
            b,
            SIMPSON_REL_TOL,
        )
    })?;
    cert.checks.push(HypothesisCheck::new(
        "boundary_decay_majorant",
        "max_{Γ×[t,t+1]} |g - u_*| + ∫_t^{t+1} F 𝓕^{λ1} ≤ Λ̃(t)",
        margin,
    ));
    let z0 = |t: f64| Ok(mu2 * b_bar.at_t(t)? * cal_f.at_t(t)?.powf(gamma0));
    let lambda_bar = |t: f64| Ok(scale * lambda_tilde.at_t(t / 4.0)?);
    finish_growing(&mut cert, scenario, &lambda_bar, &z0, None, cond)?;
    Ok(cert)
}

/// Sample times `0, dt, 2dt, ...` through `t_end`.
pub fn envelope_times(t_end: f64, dt: f64) -> Vec<f64> {
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let mut out: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
    out.push(t_end);
    out
}
