//! Sampling checks of the declared coefficient bounds.
//!
//! Every check reports the worst margin over the sample set; a negative
//! margin means the declared constant is violated at some sampled point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Expr, Mode, Scenario};
use crate::error::Result;
use crate::geometry::{Domain, Point};

const PROBE_SEED: u64 = 0x005e_ed0f_d1f7;
const RANDOM_PROBES: usize = 16;
/// Margins down to this (negative) value count as rounding noise.
const PASS_TOLERANCE: f64 = 1e-12;

/// Sample set: spatial points, times and solution values (the latter only
/// matter for solution-dependent drifts).
#[derive(Debug, Clone, Default)]
pub struct SampleSpec {
    pub points: Vec<Point>,
    pub times: Vec<f64>,
    pub s_values: Vec<f64>,
}

impl SampleSpec {
    /// Tensor grid with `per_axis` points per axis over the closure of the
    /// domain (bounding box filtered to the closure for balls), `n_times`
    /// equispaced times in `[t0, t1]`, and the given solution values.
    pub fn grid(
        domain: &Domain,
        per_axis: usize,
        t0: f64,
        t1: f64,
        n_times: usize,
        s_values: Vec<f64>,
    ) -> Self {
        let per_axis = per_axis.max(2);
        let (lower, upper) = match domain {
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect::<Vec<_>>(),
                center.iter().map(|c| c + radius).collect::<Vec<_>>(),
            ),
            other => other.axis_bounds().expect("interval or box"),
        };
        let n = lower.len();
        let total = per_axis.pow(n as u32);
        let mut points = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut p = Vec::with_capacity(n);
            for i in 0..n {
                let k = rem % per_axis;
                rem /= per_axis;
                p.push(lower[i] + (upper[i] - lower[i]) * k as f64 / (per_axis - 1) as f64);
            }
            if domain.contains_closed(&p) {
                points.push(p);
            }
        }
        let n_times = n_times.max(1);
        let times = if n_times == 1 {
            vec![t0]
        } else {
            (0..n_times)
                .map(|k| t0 + (t1 - t0) * k as f64 / (n_times - 1) as f64)
                .collect()
        };
        SampleSpec {
            points,
            times,
            s_values: if s_values.is_empty() { vec![0.0] } else { s_values },
        }
    }

    /// Union with another sample set.
    pub fn extended(&self, other: &SampleSpec) -> SampleSpec {
        let mut out = self.clone();
        out.points.extend(other.points.iter().cloned());
        out.times.extend(&other.times);
        out.s_values.extend(&other.s_values);
        out
    }
}

/// Worst sampled margin of one declared bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub margin: f64,
    pub pass: bool,
    /// Sample `(x, t, s)` attaining the worst margin.
    pub worst_x: Vec<f64>,
    pub worst_t: f64,
    pub worst_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub checks: Vec<BoundCheck>,
}

impl BoundsReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// The `2n` signed axis directions followed by a fixed set of pseudo-random
/// unit vectors.
pub fn probe_directions(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * n + RANDOM_PROBES);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = sign;
            out.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    while out.len() < 2 * n + RANDOM_PROBES {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 0.1 && norm <= 1.0 {
            out.push(v.into_iter().map(|c| c / norm).collect());
        }
    }
    out
}

struct Tracker {
    name: String,
    margin: f64,
    at: (Vec<f64>, f64, f64),
}

impl Tracker {
    fn new(name: &str) -> Self {
        Tracker {
            name: name.to_string(),
            margin: f64::INFINITY,
            at: (Vec::new(), f64::NAN, f64::NAN),
        }
    }

    fn observe(&mut self, margin: f64, x: &[f64], t: f64, s: f64) {
        if margin < self.margin {
            self.margin = margin;
            self.at = (x.to_vec(), t, s);
        }
    }

    fn finish(self) -> BoundCheck {
        BoundCheck {
            pass: self.margin >= -PASS_TOLERANCE,
            name: self.name,
            margin: self.margin,
            worst_x: self.at.0,
            worst_t: self.at.1,
            worst_s: self.at.2,
        }
    }
}

fn quad_form(m: &[f64], xi: &[f64]) -> f64 {
    let n = xi.len();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += m[i * n + j] * xi[i] * xi[j];
        }
    }
    q
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Sample the declared bounds of `scenario` on `samples`.
///
/// Checks: `ellipticity` (ξᵀAξ − c0), `trace_bound` (M1 − Tr A), in linear
/// mode `drift_bound` (M2 − |b| or z0(t) − |b|), when `K` is present
/// `k_lower_bound` (ξᵀKξ + c1) and `k_upper_bound` (c2 − ξᵀKξ), and in
/// nonlinear mode `drift_growth` (cB(1+|s|)^γ0 − |B|) plus, when `b_bar` is
/// given, `drift_growth_profile` (b̄(t)(1+|s|)^γ0 − |B|).
pub fn verify_coefficient_bounds(
    scenario: &Scenario,
    samples: &SampleSpec,
    b_bar: Option<&Expr>,
) -> Result<BoundsReport> {
    let n = scenario.dimension();
    let c = &scenario.constants;
    let probes = probe_directions(n);
    let mut ellip = Tracker::new("ellipticity");
    let mut trace = Tracker::new("trace_bound");
    let mut drift = Tracker::new("drift_bound");
    let mut k_lo = Tracker::new("k_lower_bound");
    let mut k_hi = Tracker::new("k_upper_bound");
    let mut growth = Tracker::new("drift_growth");
    let mut growth_profile = Tracker::new("drift_growth_profile");
    let linear = scenario.mode == Mode::Linear;
    let check_drift = linear && (c.m2.is_some() || c.z0.is_some());
    let check_growth = !linear && c.c_b.is_some();
    let gamma0 = c.gamma0.unwrap_or(1.0);
    let mut b = vec![0.0; n];

    for &t in &samples.times {
        let drift_cap = match (&c.z0, c.m2) {
            (Some(z0), _) if check_drift => Some(z0.at_t(t)?),
            (_, Some(m2)) => Some(m2),
            _ => None,
        };
        let bbar_t = match b_bar {
            Some(e) if !linear => Some(e.at_t(t)?),
            _ => None,
        };
        for x in &samples.points {
            let a = scenario.a.eval(x, t)?;
            for xi in &probes {
                ellip.observe(quad_form(&a, xi) - c.c0, x, t, 0.0);
            }
            let tr: f64 = (0..n).map(|i| a[i * n + i]).sum();
            trace.observe(c.m1 - tr, x, t, 0.0);
            if let Some(k) = &scenario.k {
                let km = k.eval(x, t)?;
                for xi in &probes {
                    let q = quad_form(&km, xi);
                    k_lo.observe(q + c.c1, x, t, 0.0);
                    k_hi.observe(c.c2 - q, x, t, 0.0);
                }
            }
            if linear {
                if let (true, Some(cap)) = (check_drift, drift_cap) {
                    scenario.drift_at(x, t, 0.0, &mut b)?;
                    drift.observe(cap - norm(&b), x, t, 0.0);
                }
            } else {
                for &s in &samples.s_values {
                    if !scenario.p_family.contains(s) {
                        continue;
                    }
                    scenario.drift_at(x, t, s, &mut b)?;
                    let mag = norm(&b);
                    let weight = (1.0 + s.abs()).powf(gamma0);
                    if let (true, Some(cb)) = (check_growth, c.c_b) {
                        growth.observe(cb * weight - mag, x, t, s);
                    }
                    if let Some(bb) = bbar_t {
                        growth_profile.observe(bb * weight - mag, x, t, s);
                    }
                }
            }
        }
    }

    let mut checks = vec![ellip.finish(), trace.finish()];
    if check_drift {
        checks.push(drift.finish());
    }
    if scenario.k.is_some() {
        checks.push(k_lo.finish());
        checks.push(k_hi.finish());
    }
    if check_growth {
        checks.push(growth.finish());
    }
    if b_bar.is_some() && !linear {
        checks.push(growth_profile.finish());
    }
    Ok(BoundsReport { checks })
}
