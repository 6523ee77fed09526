//! Domination of a measured trajectory by a certificate.

use serde::{Deserialize, Serialize};

use super::series::{Sample, TimeSeries};
use crate::bounds::certificate::{BoundCertificate, Quantity};
use crate::bounds::unbounded::TAIL_FRACTION;

/// Measured value of `q` in one sample.
pub fn measured(sample: &Sample, q: Quantity) -> f64 {
    match q {
        Quantity::MaxU => sample.max_u,
        Quantity::NegMinU => -sample.min_u,
        Quantity::MaxAbsU => sample.max_abs_u,
        Quantity::MaxDevUstar => sample.max_dev_ustar,
    }
}

/// Margins are `measured - bound`; a check passes when its margin is at
/// most `slack`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub quantity: Quantity,
    pub slack: f64,
    /// Samples compared against the sampled envelope.
    pub pointwise_samples: usize,
    pub pointwise_worst_margin: Option<f64>,
    pub pointwise_worst_t: Option<f64>,
    /// Window on which the measured sup is compared with the final bound.
    pub tail_window: Option<(f64, f64)>,
    pub tail_sup: Option<f64>,
    pub tail_margin: Option<f64>,
    pub worst_margin: f64,
    pub worst_t: f64,
    pub pass: bool,
}

/// Compare `series` with `cert`. Every sample covered by the envelope is
/// checked pointwise. Asymptotic certificates also compare the sup over the
/// tail window with the final bound; the certificate's window is used when
/// the series reaches it, otherwise the last `1 - TAIL_FRACTION` of the
/// series.
pub fn check_envelope(series: &TimeSeries, cert: &BoundCertificate, slack: f64) -> DominationReport {
    let q = cert.quantity;
    let mut worst = (f64::NEG_INFINITY, f64::NAN);
    let mut point = (0usize, f64::NEG_INFINITY, f64::NAN);
    for s in &series.samples {
        if let Some(bound) = cert.envelope_at(s.t) {
            let m = measured(s, q) - bound;
            point.0 += 1;
            if m > point.1 {
                point = (point.0, m, s.t);
            }
        }
    }
    if point.0 > 0 && point.1 > worst.0 {
        worst = (point.1, point.2);
    }

    let mut tail = (None, None, None);
    let asymptotic = !cert.kind.is_pointwise() || cert.envelope.is_empty();
    if let (true, Some(last)) = (asymptotic, series.last()) {
        let t_last = last.t;
        let window = match cert.tail_window {
            Some((a, b)) if b <= t_last => (a, b),
            _ => (TAIL_FRACTION * t_last, t_last),
        };
        let mut sup = (f64::NEG_INFINITY, f64::NAN);
        for s in series.samples.iter().filter(|s| s.t >= window.0 && s.t <= window.1) {
            let v = measured(s, q);
            if v > sup.0 {
                sup = (v, s.t);
            }
        }
        if sup.0.is_finite() {
            let m = sup.0 - cert.final_bound;
            tail = (Some(window), Some(sup.0), Some(m));
            if m > worst.0 {
                worst = (m, sup.1);
            }
        }
    }

    DominationReport {
        quantity: q,
        slack,
        pointwise_samples: point.0,
        pointwise_worst_margin: (point.0 > 0).then_some(point.1),
        pointwise_worst_t: (point.0 > 0).then_some(point.2),
        tail_window: tail.0,
        tail_sup: tail.1,
        tail_margin: tail.2,
        worst_margin: worst.0,
        worst_t: worst.1,
        pass: worst.0 <= slack,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::certificate::{CertificateKind, EnvelopeSample};

    fn series(values: &[(f64, f64)]) -> TimeSeries {
        let mut ts = TimeSeries::default();
        for &(t, v) in values {
            ts.push(Sample {
                t,
                max_u: v,
                min_u: -v,
                max_abs_u: v,
                max_dev_ustar: v,
                boundary_max: 0.0,
            });
        }
        ts
    }

    fn pointwise(bounds: &[(f64, f64)]) -> BoundCertificate {
        let mut c = BoundCertificate::new(CertificateKind::MaxPrinciple, Quantity::MaxAbsU);
        c.envelope = bounds.iter().map(|&(t, bound)| EnvelopeSample { t, bound }).collect();
        c
    }

    #[test]
    fn zero_run_under_zero_envelope() {
        let r = check_envelope(&series(&[(0.0, 0.0), (1.0, 0.0)]), &pointwise(&[(0.0, 0.0), (1.0, 0.0)]), 0.0);
        assert!(r.pass);
        assert_eq!(r.worst_margin, 0.0);
        assert_eq!(r.pointwise_samples, 2);
    }

    #[test]
    fn forced_run_breaks_zero_envelope() {
        let r = check_envelope(&series(&[(0.0, 0.0), (1.0, 0.3)]), &pointwise(&[(0.0, 0.0), (1.0, 0.0)]), 1e-3);
        assert!(!r.pass);
        assert_eq!((r.worst_margin, r.worst_t), (0.3, 1.0));
    }

    #[test]
    fn asymptotic_certificate_uses_series_tail() {
        let mut c = BoundCertificate::new(CertificateKind::BoundedDrift, Quantity::MaxAbsU);
        c.set_final_bound(0.05);
        c.tail_window = Some((80.0, 100.0));
        let ts = series(&[(0.0, 1.0), (5.0, 0.5), (8.0, 0.04), (10.0, 0.01)]);
        let r = check_envelope(&ts, &c, 0.0);
        assert_eq!(r.tail_window, Some((8.0, 10.0)));
        assert_eq!(r.tail_sup, Some(0.04));
        assert!(r.pass);
        assert_eq!(r.pointwise_samples, 0);
    }
}
