//! Contraction factors of the growth lemma, their iteration over a
//! schedule of time intervals, and the bounded-drift asymptotic envelope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};

/// Output of [`growth_params`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    pub beta_star: f64,
    pub beta: f64,
    pub t_star: f64,
    pub eta_star: f64,
}

fn check_annulus(r0: f64, outer: f64) -> Result<()> {
    if !(r0 > 0.0 && r0 < outer && outer.is_finite()) {
        return Err(Error::BadGeometry { r0, outer });
    }
    Ok(())
}

/// `ln(1 - η) = 2β ln(r0/R)` for `η = 1 - (r0/R)^{2β}`.
pub fn ln_one_minus_eta(r0: f64, outer: f64, beta: f64) -> f64 {
    2.0 * beta * (r0 / outer).ln()
}

/// `η = 1 - (r0/R)^{2β}`, evaluated without cancellation.
pub fn contraction_factor(r0: f64, outer: f64, beta: f64) -> f64 {
    -ln_one_minus_eta(r0, outer, beta).exp_m1()
}

/// Growth-lemma constants for a barrier with inner radius `r0`, outer
/// radius `outer` and time budget `t`:
/// `β* = (M1 + M2 R)/(2c0)`, `β = max(β*, R²/(4c0 T))`, `T* = R²/(4c0β)`,
/// `η* = 1 - (r0/R)^{2β}`.
pub fn growth_params(c0: f64, m1: f64, m2: f64, r0: f64, outer: f64, t: f64) -> Result<GrowthParams> {
    check_annulus(r0, outer)?;
    if !(c0 > 0.0 && t > 0.0) {
        return Err(Error::BadParameter(format!(
            "growth parameters need c0 > 0 and T > 0, got c0 = {c0}, T = {t}"
        )));
    }
    let r2 = outer * outer;
    let beta_star = (m1 + m2 * outer) / (2.0 * c0);
    let (beta, t_star) = if 4.0 * c0 * beta_star * t == r2 {
        (beta_star, t)
    } else {
        let beta = beta_star.max(r2 / (4.0 * c0 * t));
        (beta, (r2 / (4.0 * c0 * beta)).min(t))
    };
    Ok(GrowthParams {
        beta_star,
        beta,
        t_star,
        eta_star: contraction_factor(r0, outer, beta),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    Bounded,
    Unbounded,
}

/// One interval `(T_{k-1}, T_k]` of a contraction schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthStep {
    pub k: usize,
    pub t_k: f64,
    pub tau_k: f64,
    pub center: Point,
    pub r_k: f64,
    pub big_r_k: f64,
    /// Drift bound on the interval.
    pub m_k: f64,
    pub beta_k: f64,
    pub eta_k: f64,
    /// `ln(1 - η_k)`, kept for factors that round to one.
    pub ln_one_minus_eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSchedule {
    pub t0: f64,
    pub steps: Vec<GrowthStep>,
    pub mode: ScheduleMode,
}

impl GrowthSchedule {
    /// `count` equal steps of length `T* = R²/(4c0β*)` starting at `t0`,
    /// for a drift bounded by `m2` and the barrier centered at `x0`.
    pub fn bounded(
        c0: f64,
        m1: f64,
        m2: f64,
        domain: &Domain,
        x0: &[f64],
        t0: f64,
        count: usize,
    ) -> Result<GrowthSchedule> {
        let (r0, outer) = domain.radial_extents(x0)?;
        check_annulus(r0, outer)?;
        let beta = (m1 + m2 * outer) / (2.0 * c0);
        let tau = outer * outer / (4.0 * c0 * beta);
        let ln1m = ln_one_minus_eta(r0, outer, beta);
        let steps = (1..=count)
            .map(|k| GrowthStep {
                k,
                t_k: t0 + k as f64 * tau,
                tau_k: tau,
                center: x0.to_vec(),
                r_k: r0,
                big_r_k: outer,
                m_k: m2,
                beta_k: beta,
                eta_k: -ln1m.exp_m1(),
                ln_one_minus_eta: ln1m,
            })
            .collect();
        Ok(GrowthSchedule {
            t0,
            steps,
            mode: ScheduleMode::Bounded,
        })
    }

    pub fn etas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.eta_k).collect()
    }

    /// Start of step `k` (1-based), i.e. `T_{k-1}`.
    pub fn step_start(&self, k: usize) -> f64 {
        if k <= 1 {
            self.t0
        } else {
            self.steps[k - 2].t_k
        }
    }
}

/// Iterated bounds `J_0, ..., J_k` and interval bounds for steps `1..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthIterate {
    /// `J_k` for `k = 0..=K` (underflows to zero only when `ln_j` is below
    /// the smallest subnormal).
    pub j: Vec<f64>,
    /// `ln J_k`.
    pub ln_j: Vec<f64>,
    /// `J_{k-1} + Λ_k` bounding the whole interval `[T_{k-1}, T_k]`,
    /// indexed by `k - 1`.
    pub interval: Vec<f64>,
}

/// Threshold below which the recursion switches to log space.
const LOG_SPACE_BELOW: f64 = 1e-300;

fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `J_k = Σ_{m=0}^{k} (Π_{j=m+1}^{k} η_j) Λ_m` with `Λ_0 = J0`, evaluated
/// as the running recursion `J_k = η_k J_{k-1} + Λ_k`. `lambdas[i]` is
/// `Λ_{i+1}`.
pub fn iterate_contractions(etas: &[f64], lambdas: &[f64], j0: f64) -> GrowthIterate {
    let k = etas.len().min(lambdas.len());
    let mut j = Vec::with_capacity(k + 1);
    let mut ln_j = Vec::with_capacity(k + 1);
    let mut interval = Vec::with_capacity(k);
    j.push(j0);
    ln_j.push(j0.ln());
    let mut cur = j0;
    let mut ln_cur = j0.ln();
    for i in 0..k {
        let (eta, lam) = (etas[i], lambdas[i]);
        interval.push(cur + lam);
        let next = eta * cur + lam;
        if cur >= LOG_SPACE_BELOW && next >= LOG_SPACE_BELOW || lam >= LOG_SPACE_BELOW {
            cur = next;
            ln_cur = cur.ln();
        } else {
            ln_cur = ln_add(eta.ln() + ln_cur, lam.ln());
            cur = ln_cur.exp();
        }
        j.push(cur);
        ln_j.push(ln_cur);
    }
    GrowthIterate { j, ln_j, interval }
}

/// [`iterate_contractions`] with the factors of `schedule`.
pub fn iterate_growth(schedule: &GrowthSchedule, lambdas: &[f64], j0: f64) -> GrowthIterate {
    iterate_contractions(&schedule.etas(), lambdas, j0)
}

/// Limsup of `Σ η^{k-j} Λ_j` given `limsup Λ_k = Λ∞`: `Λ∞ / (1 - η)`.
pub fn geometric_tail(eta: f64, lambda_inf: f64) -> f64 {
    if lambda_inf == 0.0 {
        return 0.0;
    }
    if eta >= 1.0 {
        return f64::INFINITY;
    }
    lambda_inf / (1.0 - eta)
}

/// Output of [`bounded_drift_envelope`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedEnvelope {
    pub r0: f64,
    pub outer: f64,
    pub beta_star: f64,
    pub t_star: f64,
    pub eta_star: f64,
    /// `(2 - η*)/(1 - η*)`, infinite when `η*` rounds to one.
    pub prefactor: f64,
    pub bound: f64,
}

/// Asymptotic bound for a bounded drift `|b| ≤ M2`:
/// `limsup max w⁺ ≤ (2-η*)/(1-η*) · (limsup max_Γ w⁺ + limsup ∫_t^{t+T*} F)`
/// with the barrier centered at `x0`.
pub fn bounded_drift_envelope(
    c0: f64,
    m1: f64,
    m2: f64,
    domain: &Domain,
    x0: &[f64],
    boundary_limsup: f64,
    forcing_window_limsup: f64,
) -> Result<BoundedEnvelope> {
    let (r0, outer) = domain.radial_extents(x0)?;
    check_annulus(r0, outer)?;
    let beta_star = (m1 + m2 * outer) / (2.0 * c0);
    let t_star = outer * outer / (4.0 * c0 * beta_star);
    let ln1m = ln_one_minus_eta(r0, outer, beta_star);
    let one_minus = ln1m.exp();
    let eta_star = -ln1m.exp_m1();
    let prefactor = if one_minus > 0.0 {
        (1.0 + one_minus) / one_minus
    } else {
        f64::INFINITY
    };
    let data = boundary_limsup + forcing_window_limsup;
    let bound = if data == 0.0 { 0.0 } else { prefactor * data };
    Ok(BoundedEnvelope {
        r0,
        outer,
        beta_star,
        t_star,
        eta_star,
        prefactor,
        bound,
    })
}

/// Contraction bounds on the uniform grid `T_k = k T*` with a fixed factor
/// `η`: on `[T_{k-1}, T_k]` the positive part of the function is at most
/// `J_{k-1} + Λ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformEnvelope {
    pub t_star: f64,
    pub eta: f64,
    /// `Λ_k` for `k = 1..`.
    pub lambdas: Vec<f64>,
    pub iterate: GrowthIterate,
}

impl UniformEnvelope {
    /// Bound at time `t`, using the step with `t ∈ (T_{k-1}, T_k]` (`J_0` at
    /// `t = 0`); infinite beyond the last step.
    pub fn at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.iterate.j[0];
        }
        let k = (t / self.t_star * (1.0 - 1e-9)).ceil().max(1.0) as usize;
        self.iterate.interval.get(k - 1).copied().unwrap_or(f64::INFINITY)
    }

    pub fn step_end(&self, k: usize) -> f64 {
        k as f64 * self.t_star
    }
}

/// Build a [`UniformEnvelope`] covering `[0, t_end]`, where `lambda(a, b)`
/// bounds the data over `[a, b]`.
pub fn uniform_growth_envelope(
    t_star: f64,
    eta: f64,
    j0: f64,
    t_end: f64,
    mut lambda: impl FnMut(f64, f64) -> Result<f64>,
) -> Result<UniformEnvelope> {
    if !(t_star > 0.0) {
        return Err(Error::BadParameter(format!("step length must be positive, got {t_star}")));
    }
    let steps = (t_end / t_star * (1.0 - 1e-9)).ceil().max(1.0) as usize;
    let lambdas = (1..=steps)
        .map(|k| lambda((k - 1) as f64 * t_star, k as f64 * t_star))
        .collect::<Result<Vec<f64>>>()?;
    let iterate = iterate_contractions(&vec![eta; steps], &lambdas, j0);
    Ok(UniformEnvelope {
        t_star,
        eta,
        lambdas,
        iterate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn balanced_time_budget_keeps_beta_star() {
        let p = growth_params(1.0, 2.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        assert_eq!((p.beta_star, p.beta, p.t_star), (2.0, 2.0, 0.5));
        assert_relative_eq!(p.eta_star, 1.0 - 0.5f64.powi(4), max_relative = 1e-15);
    }

    #[test]
    fn short_time_budget_raises_beta() {
        let p = growth_params(1.0, 2.0, 1.0, 1.0, 2.0, 0.25).unwrap();
        assert_eq!((p.beta_star, p.beta), (2.0, 4.0));
        assert_relative_eq!(p.t_star, 0.25, max_relative = 1e-15);
        assert_relative_eq!(p.eta_star, 1.0 - 0.5f64.powi(8), max_relative = 1e-15);
    }

    #[test]
    fn degenerate_annulus() {
        assert!(matches!(
            growth_params(1.0, 1.0, 0.0, 2.0, 2.0, 1.0),
            Err(Error::BadGeometry { .. })
        ));
        assert!(growth_params(1.0, 1.0, 0.0, 0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn uniform_envelope_lookup() {
        let e = uniform_growth_envelope(0.5, 0.5, 4.0, 1.2, |a, _| Ok(a)).unwrap();
        assert_eq!(e.lambdas, vec![0.0, 0.5, 1.0]);
        assert_eq!(e.at(0.0), 4.0);
        assert_eq!(e.at(0.5), 4.0);
        assert_eq!(e.at(0.7), 2.0 + 0.5);
        assert_eq!(e.at(1.2), 1.5 + 1.0);
        assert_eq!(e.at(1.6), f64::INFINITY);
    }

    #[test]
    fn two_step_expansion() {
        let it = iterate_contractions(&[0.5, 0.5], &[1.0, 1.0], 1.0);
        assert_relative_eq!(it.j[2], 0.25 + 0.5 + 1.0);
        assert_eq!(it.interval, vec![2.0, 2.5]);
    }

    #[test]
    fn pure_contraction_underflows_gracefully() {
        let etas = vec![1e-10; 100];
        let it = iterate_contractions(&etas, &vec![0.0; 100], 1.0);
        assert_relative_eq!(it.ln_j[100], 100.0 * 1e-10f64.ln(), max_relative = 1e-12);
        assert_eq!(it.j[100], 0.0);
        let it = iterate_contractions(&etas, &[vec![0.0; 99], vec![1e-320]].concat(), 1.0);
        assert_relative_eq!(it.ln_j[100], 1e-320f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn geometric_limits() {
        assert_eq!(geometric_tail(0.5, 1.0), 2.0);
        assert_eq!(geometric_tail(0.5, 0.0), 0.0);
        assert_relative_eq!(geometric_tail(0.9, 0.1), 1.0, max_relative = 1e-12);
        let it = iterate_contractions(&[0.5; 60], &[1.0; 60], 1.0);
        assert!((it.j[60] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn bounded_envelope_prefactor() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let x0 = d.barrier_center(2.0).unwrap();
        // r0 = 1, R = 2, β* = 1/2: η* = 1/2 and the prefactor is 3.
        let e = bounded_drift_envelope(1.0, 1.0, 0.0, &d, &x0, 0.1, 0.2).unwrap();
        assert_relative_eq!(e.eta_star, 0.5, max_relative = 1e-15);
        assert_relative_eq!(e.prefactor, 3.0, max_relative = 1e-15);
        assert_relative_eq!(e.bound, 0.9, max_relative = 1e-15);
        assert_relative_eq!(e.t_star, 2.0, max_relative = 1e-15);
        let zero = bounded_drift_envelope(1.0, 1.0, 0.0, &d, &x0, 0.0, 0.0).unwrap();
        assert_eq!(zero.bound, 0.0);
        let huge = bounded_drift_envelope(1.0, 1.0, 1e6, &d, &x0, 0.1, 0.0).unwrap();
        assert_eq!(huge.bound, f64::INFINITY);
        assert_eq!(huge.eta_star, 1.0);
    }

    #[test]
    fn bounded_schedule_matches_params() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let x0 = d.barrier_center(2.0).unwrap();
        let s = GrowthSchedule::bounded(1.0, 2.0, 1.0, &d, &x0, 0.0, 3).unwrap();
        let p = growth_params(1.0, 2.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        assert_eq!(s.steps.len(), 3);
        assert_relative_eq!(s.steps[2].t_k, 1.5);
        assert_relative_eq!(s.steps[0].eta_k, p.eta_star, max_relative = 1e-15);
    }

    fn brute_force(etas: &[f64], lambdas: &[f64], j0: f64, k: usize) -> f64 {
        let lam = |m: usize| if m == 0 { j0 } else { lambdas[m - 1] };
        (0..=k)
            .map(|m| etas[m..k].iter().product::<f64>() * lam(m))
            .sum()
    }

    proptest! {
        #[test]
        fn eta_increases_with_beta_and_ratio(
            r0 in 0.5..5.0f64, gap in 0.01..2.0f64, beta in 0.01..3.0f64, db in 0.01..2.0f64,
        ) {
            let outer = r0 + gap;
            let e1 = contraction_factor(r0, outer, beta);
            prop_assert!(e1 > 0.0 && e1 < 1.0);
            prop_assert!(contraction_factor(r0, outer, beta + db) > e1);
            prop_assert!(contraction_factor(r0, outer + 0.5, beta) > e1);
        }

        #[test]
        fn t_star_never_exceeds_budget(
            c0 in 0.1..3.0f64, m1 in 0.1..5.0f64, m2 in 0.0..5.0f64,
            r0 in 0.1..2.0f64, gap in 0.1..3.0f64, t in 0.01..10.0f64,
        ) {
            let p = growth_params(c0, m1, m2, r0, r0 + gap, t).unwrap();
            prop_assert!(p.t_star <= t && p.t_star > 0.0);
            prop_assert!(p.beta >= p.beta_star);
        }

        #[test]
        fn balanced_budget_is_exact(c0 in 0.1..3.0f64, m1 in 0.1..5.0f64, r0 in 0.1..2.0f64, gap in 0.1..3.0f64) {
            let outer = r0 + gap;
            let beta_star = m1 / (2.0 * c0);
            let t = outer * outer / (4.0 * c0 * beta_star);
            let p = growth_params(c0, m1, 0.0, r0, outer, t).unwrap();
            if 4.0 * c0 * beta_star * t == outer * outer {
                prop_assert_eq!(p.beta, p.beta_star);
                prop_assert_eq!(p.t_star, t);
            }
            prop_assert!((p.t_star - t).abs() <= 1e-12 * t);
        }

        #[test]
        fn recursion_matches_expanded_sum(
            seq in prop::collection::vec((0.0..1.0f64, 0.0..3.0f64), 1..50), j0 in 0.0..3.0f64,
        ) {
            let etas: Vec<f64> = seq.iter().map(|p| p.0).collect();
            let lambdas: Vec<f64> = seq.iter().map(|p| p.1).collect();
            let it = iterate_contractions(&etas, &lambdas, j0);
            for k in 0..=seq.len() {
                let exact = brute_force(&etas, &lambdas, j0, k);
                prop_assert!((it.j[k] - exact).abs() <= 1e-12 * exact.abs().max(1e-300));
            }
        }

        #[test]
        fn partial_sums_stay_below_geometric_tail(
            eta in 0.01..0.99f64, cap in 0.0..2.0f64,
            fractions in prop::collection::vec(0.0..1.0f64, 1..80),
        ) {
            let lambdas: Vec<f64> = fractions.iter().map(|f| f * cap).collect();
            let it = iterate_contractions(&vec![eta; lambdas.len()], &lambdas, cap);
            let tail = geometric_tail(eta, cap);
            for v in it.j {
                prop_assert!(v <= tail + 1e-9);
            }
        }
    }
}
