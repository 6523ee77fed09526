//! Contraction schedules and asymptotic envelopes for drifts whose bound
//! `z0(t)` grows without limit.

use serde::{Deserialize, Serialize};

use super::certificate::HypothesisCheck;
use super::growth::{GrowthSchedule, GrowthStep, ScheduleMode};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::quadrature::{simpson, SIMPSON_REL_TOL};

pub const DEFAULT_EPS0: f64 = 1e-2;
pub const SAMPLES_PER_DECADE: usize = 512;
pub const DEFAULT_HORIZON: f64 = 1e6;
/// Fraction of the horizon where sampled limsups start.
pub const TAIL_FRACTION: f64 = 0.8;

/// `Z = -((M1 + z²)/c0) ln(1 - d/z)`, the exponent with
/// `1 - η = e^{-Z}` for a step whose outer radius is `z`.
pub fn drift_exponent(c0: f64, m1: f64, d: f64, z: f64) -> f64 {
    -((m1 + z * z) / c0) * (-d / z).ln_1p()
}

/// Where and how finely the start time `T0` is searched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct T0Search {
    /// Lower end of the search; the start time also exceeds `1/3`.
    pub t_min: f64,
    pub horizon: f64,
    pub per_decade: usize,
}

impl Default for T0Search {
    fn default() -> Self {
        T0Search {
            t_min: 0.0,
            horizon: DEFAULT_HORIZON,
            per_decade: SAMPLES_PER_DECADE,
        }
    }
}

/// Geometric grid `t_i = start·10^{i/per_decade}`, `i ≥ 1`, up to and
/// including the first point at or beyond `horizon`.
pub fn geometric_grid(start: f64, horizon: f64, per_decade: usize) -> Vec<f64> {
    let ratio = 10f64.powf(1.0 / per_decade.max(1) as f64);
    let mut out = Vec::new();
    let mut i = 1;
    loop {
        let t = start * ratio.powi(i);
        out.push(t);
        if t >= horizon {
            break;
        }
        i += 1;
    }
    out
}

/// Smallest sampled `T0 > max(1/3, t_min)` with `z0(T0) > max(d, √M1)` and
/// `Z(t) ≤ (d/c0) z0(t) + d²/(2c0) + eps0` at every later sample.
pub fn find_t0(
    c0: f64,
    m1: f64,
    d: f64,
    mut z0: impl FnMut(f64) -> Result<f64>,
    eps0: f64,
    search: &T0Search,
) -> Result<f64> {
    if !(eps0 > 0.0) {
        return Err(Error::BadParameter(format!("eps0 must be positive, got {eps0}")));
    }
    let start = search.t_min.max(1.0 / 3.0);
    let grid = geometric_grid(start, search.horizon, search.per_decade);
    let zs = grid.iter().map(|&t| z0(t)).collect::<Result<Vec<f64>>>()?;
    for w in 1..zs.len() {
        if !(zs[w] > zs[w - 1]) {
            return Err(Error::NotIncreasing { t: grid[w] });
        }
    }
    let floor = d.max(m1.sqrt());
    let mut t0 = None;
    for i in (0..grid.len()).rev() {
        let z = zs[i];
        let ok = z > floor
            && drift_exponent(c0, m1, d, z) <= (d / c0) * z + d * d / (2.0 * c0) + eps0;
        if !ok {
            break;
        }
        t0 = Some(grid[i]);
    }
    t0.ok_or(Error::NoValidT0 {
        horizon: search.horizon,
    })
}

/// Start time and `steps` contraction steps for a drift bounded by `z0`:
/// `R_k = z0(T0 + k)`, barrier centers with `r_k = R_k - d`, `m_k = R_k`,
/// `β_k = (M1 + R_k²)/(2c0)` and `τ_k = R_k²/(4c0β_k) ∈ [1/4, 1/2]`.
pub fn unbounded_drift_schedule(
    c0: f64,
    m1: f64,
    domain: &Domain,
    mut z0: impl FnMut(f64) -> Result<f64>,
    eps0: f64,
    steps: usize,
    search: &T0Search,
) -> Result<(f64, GrowthSchedule)> {
    let d = domain.diameter();
    let t0 = find_t0(c0, m1, d, &mut z0, eps0, search)?;
    let mut out = Vec::with_capacity(steps);
    let mut t_k = t0;
    let mut prev_r = z0(t0)?;
    for k in 1..=steps {
        let big_r = z0(t0 + k as f64)?;
        if !(big_r > prev_r) {
            return Err(Error::NotIncreasing { t: t0 + k as f64 });
        }
        prev_r = big_r;
        let center = domain.barrier_center(big_r)?;
        let (r_k, _) = domain.radial_extents(&center)?;
        let beta = (m1 + big_r * big_r) / (2.0 * c0);
        let tau = big_r * big_r / (2.0 * (m1 + big_r * big_r));
        let ln1m = -drift_exponent(c0, m1, d, big_r);
        t_k += tau;
        out.push(GrowthStep {
            k,
            t_k,
            tau_k: tau,
            center,
            r_k,
            big_r_k: big_r,
            m_k: big_r,
            beta_k: beta,
            eta_k: -ln1m.exp_m1(),
            ln_one_minus_eta: ln1m,
        });
    }
    Ok((
        t0,
        GrowthSchedule {
            t0,
            steps: out,
            mode: ScheduleMode::Unbounded,
        },
    ))
}

/// Output of [`unbounded_drift_envelope`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnboundedEnvelope {
    /// Sampled sup of `Λ̄(t) e^{(d/c0) z0(t)}` on the window.
    pub ell: f64,
    /// `e^{d²/(2c0)} ℓ`.
    pub final_bound: f64,
    pub window: (f64, f64),
    /// Sample attaining `ell`.
    pub worst_t: f64,
}

/// `ln(Λ̄(t) e^{(d/c0) z0(t)})`.
fn ln_balance(
    lambda_bar: &mut impl FnMut(f64) -> Result<f64>,
    z0: &mut impl FnMut(f64) -> Result<f64>,
    c0: f64,
    d: f64,
    t: f64,
) -> Result<f64> {
    Ok(lambda_bar(t)?.ln() + (d / c0) * z0(t)?)
}

/// Final bound `e^{d²/(2c0)} ℓ`, with `0` for `ℓ = 0` and `+∞` on overflow.
pub fn final_from_ell(ell: f64, c0: f64, d: f64) -> f64 {
    if ell == 0.0 {
        0.0
    } else {
        (d * d / (2.0 * c0)).exp() * ell
    }
}

/// Estimate `ℓ = limsup Λ̄(t) e^{(d/c0) z0(t)}` by the sup over `samples`
/// geometric points of `window`, and the final bound `e^{d²/(2c0)} ℓ`.
pub fn unbounded_drift_envelope(
    mut lambda_bar: impl FnMut(f64) -> Result<f64>,
    mut z0: impl FnMut(f64) -> Result<f64>,
    c0: f64,
    d: f64,
    window: (f64, f64),
    samples: usize,
) -> Result<UnboundedEnvelope> {
    let (a, b) = window;
    if !(a > 0.0 && b > a) {
        return Err(Error::BadParameter(format!("tail window ({a}, {b}) is not a positive interval")));
    }
    let n = samples.max(2);
    let mut best = f64::NEG_INFINITY;
    let mut worst_t = a;
    for i in 0..n {
        let t = a * (b / a).powf(i as f64 / (n - 1) as f64);
        let v = ln_balance(&mut lambda_bar, &mut z0, c0, d, t)?;
        if v > best {
            best = v;
            worst_t = t;
        }
    }
    let ell = best.exp();
    Ok(UnboundedEnvelope {
        ell,
        final_bound: final_from_ell(ell, c0, d),
        window,
        worst_t,
    })
}

/// Growth of `∫_{t_lower}^{horizon} e^{-(d/c0) z0(t)} dt`, integrated in the
/// variable `ln t`.
pub fn drift_divergence_integral(
    mut z0: impl FnMut(f64) -> Result<f64>,
    c0: f64,
    d: f64,
    t_lower: f64,
    horizon: f64,
) -> Result<f64> {
    let (a, b) = (t_lower.ln(), horizon.ln());
    let decades = ((b - a) / std::f64::consts::LN_10).ceil().max(1.0) as usize;
    let mut total = 0.0;
    for i in 0..decades {
        let lo = a + (b - a) * i as f64 / decades as f64;
        let hi = a + (b - a) * (i + 1) as f64 / decades as f64;
        total += simpson(|u| Ok::<f64, Error>((u - (d / c0) * z0(u.exp())?).exp()), lo, hi, SIMPSON_REL_TOL)?;
    }
    Ok(total)
}

/// Sampled monotonicity of `𝓕(t) = Λ̄(t) exp(κ ∫_{t*}^{t+1} e^{-(d/c0) z0})`
/// with `κ = e^{-d²/(2c0) - ε}` on `[t*, t* + window]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub t_star: f64,
    pub window: f64,
    /// Smallest and largest sampled increment of `ln 𝓕`.
    pub min_step: f64,
    pub max_step: f64,
    /// `1` increasing, `-1` decreasing, `0` mixed.
    pub sign: i8,
}

impl MonotoneReport {
    pub fn single_signed(&self) -> bool {
        self.sign != 0
    }

    /// Positive when every increment has the same strict sign.
    pub fn margin(&self) -> f64 {
        match self.sign {
            1 => self.min_step,
            -1 => -self.max_step,
            _ => -(self.max_step.min(-self.min_step)),
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn monotone_balance(
    mut lambda_bar: impl FnMut(f64) -> Result<f64>,
    mut z0: impl FnMut(f64) -> Result<f64>,
    c0: f64,
    d: f64,
    eps: f64,
    t_star: f64,
    window: f64,
    samples: usize,
) -> Result<MonotoneReport> {
    let kappa = (-d * d / (2.0 * c0) - eps).exp();
    let n = samples.max(2);
    let mut integral = simpson(
        |x| Ok::<f64, Error>((-(d / c0) * z0(x)?).exp()),
        t_star,
        t_star + 1.0,
        SIMPSON_REL_TOL,
    )?;
    let mut prev_t = t_star;
    let mut prev = lambda_bar(t_star)?.ln() + kappa * integral;
    let (mut min_step, mut max_step) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 1..n {
        let t = t_star + window * i as f64 / (n - 1) as f64;
        integral += simpson(
            |x| Ok::<f64, Error>((-(d / c0) * z0(x)?).exp()),
            prev_t + 1.0,
            t + 1.0,
            SIMPSON_REL_TOL,
        )?;
        let cur = lambda_bar(t)?.ln() + kappa * integral;
        let step = cur - prev;
        min_step = min_step.min(step);
        max_step = max_step.max(step);
        prev = cur;
        prev_t = t;
    }
    let sign = if min_step > 0.0 {
        1
    } else if max_step < 0.0 {
        -1
    } else {
        0
    };
    Ok(MonotoneReport {
        t_star,
        window,
        min_step,
        max_step,
        sign,
    })
}

/// Trend of `q(t) = Λ̄(t) e^{(d/c0) z0(t)}` over the last two decades before
/// `horizon`; a positive margin means `q(H) < q(H/10) < q(H/100)`.
pub fn balance_trend(
    mut lambda_bar: impl FnMut(f64) -> Result<f64>,
    mut z0: impl FnMut(f64) -> Result<f64>,
    c0: f64,
    d: f64,
    horizon: f64,
) -> Result<(f64, [f64; 3])> {
    let mut q = [0.0; 3];
    for (i, t) in [horizon / 100.0, horizon / 10.0, horizon].into_iter().enumerate() {
        q[i] = ln_balance(&mut lambda_bar, &mut z0, c0, d, t)?;
    }
    let margin = (q[0] - q[1]).min(q[1] - q[2]);
    Ok((margin, q.map(f64::exp)))
}

/// Sampling used to check the growth conditions on `(z0, Λ̄)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConditionOptions {
    /// Start of "sufficiently large" times; lower end of the divergence
    /// integral.
    pub t_lower: f64,
    pub horizon: f64,
    /// The divergence integral must exceed this by `horizon`.
    pub threshold: f64,
    pub t_star: f64,
    pub window: f64,
    pub samples: usize,
    pub eps: f64,
    /// Window for the sampled estimate of `ℓ`.
    pub tail: (f64, f64),
}

impl Default for ConditionOptions {
    fn default() -> Self {
        ConditionOptions {
            t_lower: 16.0,
            horizon: 1e12,
            threshold: 5.0,
            t_star: 64.0,
            window: 1000.0,
            samples: 400,
            eps: 0.01,
            tail: (8e5, 1e6),
        }
    }
}

/// Outcome of [`growth_conditions`].
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthConditions {
    pub checks: Vec<HypothesisCheck>,
    /// Sampled sup of `Λ̄ e^{(d/c0) z0}` over `opts.tail`.
    pub ell_windowed: f64,
}

impl GrowthConditions {
    pub fn hold(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn min_step(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Sampled checks that a drift profile `z0` and a decay profile `Λ̄` meet
/// the conditions of the unbounded-drift envelope with `ℓ = 0`.
pub fn growth_conditions(
    lambda_bar: &impl Fn(f64) -> Result<f64>,
    z0: &impl Fn(f64) -> Result<f64>,
    c0: f64,
    d: f64,
    opts: &ConditionOptions,
) -> Result<GrowthConditions> {
    let mut times = geometric_grid(opts.t_lower, opts.horizon, 16);
    times.insert(0, opts.t_lower);
    times.retain(|&t| t <= opts.horizon);
    let zs = times.iter().map(|&t| z0(t)).collect::<Result<Vec<f64>>>()?;
    let lbs = times.iter().map(|&t| lambda_bar(t)).collect::<Result<Vec<f64>>>()?;
    let z_step = min_step(&zs);
    let lb_floor = lbs.iter().copied().fold(f64::INFINITY, f64::min);
    let lb_rise = lbs
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut checks = vec![
        HypothesisCheck::with_pass(
            "drift_profile_increasing",
            "z0(t) strictly increasing",
            z_step,
            z_step > 0.0,
        ),
        HypothesisCheck::new(
            "decay_profile_decreasing",
            "Λ̄(t) ≥ 0 and non-increasing",
            lb_floor.min(-lb_rise),
        ),
    ];
    let divergence = drift_divergence_integral(z0, c0, d, opts.t_lower, opts.horizon)?;
    checks.push(HypothesisCheck::new(
        "drift_divergence",
        "∫ e^{-(d/c0) z0(t)} dt = ∞",
        divergence - opts.threshold,
    ));
    let mono = monotone_balance(lambda_bar, z0, c0, d, opts.eps, opts.t_star, opts.window, opts.samples)?;
    checks.push(HypothesisCheck::with_pass(
        "balance_monotone",
        "Λ̄(t) exp(e^{-d²/(2c0)-ε} ∫_{t*}^{t+1} e^{-(d/c0) z0}) monotone for t ≥ t*",
        mono.margin(),
        mono.single_signed(),
    ));
    let (trend, _) = balance_trend(lambda_bar, z0, c0, d, opts.horizon)?;
    checks.push(HypothesisCheck::with_pass(
        "vanishing_balance",
        "Λ̄(t) e^{(d/c0) z0(t)} → 0",
        trend,
        trend > 0.0,
    ));
    let windowed = unbounded_drift_envelope(lambda_bar, z0, c0, d, opts.tail, 64)?;
    Ok(GrowthConditions {
        checks,
        ell_windowed: windowed.ell,
    })
}
