//! Spatial domains (interval, axis-aligned box, ball) and the distance
//! quantities used by the growth estimates: the diameter `d`, the nearest
//! and farthest distances `r_*(y)`, `R_*(y)` from an exterior point, and the
//! canonical barrier centers realizing `r_* = R - d`, `R_* = R`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the ambient space `R^n`.
pub type Point = Vec<f64>;

/// Bounded open region of `R^n`. Constructed through [`Domain::interval`],
/// [`Domain::boxed`] or [`Domain::ball`], which enforce a nonempty interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawDomain")]
pub enum Domain {
    Interval { lower: f64, upper: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

/// Untrusted wire form of a domain; interval bounds may be scalars or
/// one-element arrays.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawDomain {
    Interval { lower: Scalarish, upper: Scalarish },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Scalarish {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Scalarish {
    fn into_scalar(self) -> Result<f64> {
        match self {
            Scalarish::Scalar(v) => Ok(v),
            Scalarish::Vector(v) if v.len() == 1 => Ok(v[0]),
            Scalarish::Vector(v) => Err(Error::DimensionMismatch {
                expected: 1,
                found: v.len(),
            }),
        }
    }
}

impl TryFrom<RawDomain> for Domain {
    type Error = Error;

    fn try_from(raw: RawDomain) -> Result<Self> {
        match raw {
            RawDomain::Interval { lower, upper } => {
                Domain::interval(lower.into_scalar()?, upper.into_scalar()?)
            }
            RawDomain::Box { lower, upper } => Domain::boxed(lower, upper),
            RawDomain::Ball { center, radius } => Domain::ball(center, radius),
        }
    }
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|c| c * c).sum::<f64>().sqrt()
}

impl Domain {
    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && upper > lower) {
            return Err(Error::InvalidDomain(format!(
                "interval ({lower}, {upper}) has empty interior"
            )));
        }
        Ok(Domain::Interval { lower, upper })
    }

    /// Axis-aligned box `(lower_1, upper_1) x ... x (lower_n, upper_n)`.
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidDomain("box of dimension 0".into()));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidDomain(format!(
                    "box axis {i} has bounds ({lo}, {hi})"
                )));
            }
        }
        Ok(Domain::Box { lower, upper })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidDomain("ball of dimension 0".into()));
        }
        if !(radius.is_finite() && radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "ball radius {radius} must be positive and finite"
            )));
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Box { lower, .. } => lower.len(),
            Domain::Ball { center, .. } => center.len(),
        }
    }

    /// Per-axis bounds for interval and box domains; `None` for balls.
    pub fn axis_bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Domain::Interval { lower, upper } => Some((vec![*lower], vec![*upper])),
            Domain::Box { lower, upper } => Some((lower.clone(), upper.clone())),
            Domain::Ball { .. } => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Domain::Interval { .. } => "interval",
            Domain::Box { .. } => "box",
            Domain::Ball { .. } => "ball",
        }
    }

    /// Exact diameter `d = max |x - x'|` over the closure.
    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Interval { lower, upper } => upper - lower,
            Domain::Box { lower, upper } => norm(lower.iter().zip(upper).map(|(l, u)| u - l)),
            Domain::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// The pair of closure points realizing the diameter: opposite corners
    /// along the main diagonal for boxes, the endpoints along the first axis
    /// for balls.
    pub fn diameter_pair(&self) -> (Point, Point) {
        match self {
            Domain::Interval { lower, upper } => (vec![*lower], vec![*upper]),
            Domain::Box { lower, upper } => (lower.clone(), upper.clone()),
            Domain::Ball { center, radius } => {
                let mut a = center.clone();
                let mut b = center.clone();
                a[0] -= radius;
                b[0] += radius;
                (a, b)
            }
        }
    }

    /// Whether `y` belongs to the closed domain.
    pub fn contains_closed(&self, y: &[f64]) -> bool {
        match self {
            Domain::Interval { lower, upper } => y[0] >= *lower && y[0] <= *upper,
            Domain::Box { lower, upper } => y
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| v >= l && v <= u),
            Domain::Ball { center, radius } => {
                norm(y.iter().zip(center).map(|(a, c)| a - c)) <= *radius
            }
        }
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: y.len(),
            });
        }
        Ok(())
    }

    /// Nearest and farthest distances `(r_*(y), R_*(y))` from an exterior
    /// point `y` to the closed domain.
    pub fn radial_extents(&self, y: &[f64]) -> Result<(f64, f64)> {
        self.check_dim(y)?;
        if self.contains_closed(y) {
            return Err(Error::InteriorPoint { point: y.to_vec() });
        }
        let (lower, upper) = match self {
            Domain::Ball { center, radius } => {
                let dist = norm(y.iter().zip(center).map(|(a, c)| a - c));
                return Ok((dist - radius, dist + radius));
            }
            Domain::Interval { lower, upper } => (vec![*lower], vec![*upper]),
            Domain::Box { lower, upper } => (lower.clone(), upper.clone()),
        };
        let near = norm(
            y.iter()
                .zip(lower.iter().zip(&upper))
                .map(|(v, (l, u))| if v < l { l - v } else if v > u { v - u } else { 0.0 }),
        );
        let far = norm(
            y.iter()
                .zip(lower.iter().zip(&upper))
                .map(|(v, (l, u))| (v - l).abs().max((u - v).abs())),
        );
        Ok((near, far))
    }

    /// Exterior point `y = xi_1 + (R/d)(xi_2 - xi_1)` with
    /// `r_*(y) = R - d` and `R_*(y) = R`, for any `R > d`.
    pub fn barrier_center(&self, radius: f64) -> Result<Point> {
        let d = self.diameter();
        if !(radius > d) {
            return Err(Error::RadiusTooSmall {
                radius,
                diameter: d,
            });
        }
        let (xi1, xi2) = self.diameter_pair();
        let scale = radius / d;
        Ok(xi1
            .iter()
            .zip(&xi2)
            .map(|(a, b)| a + scale * (b - a))
            .collect())
    }

    /// Translate the domain by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        self.check_dim(shift)?;
        let add = |v: &[f64]| v.iter().zip(shift).map(|(a, s)| a + s).collect::<Vec<_>>();
        match self {
            Domain::Interval { lower, upper } => Domain::interval(lower + shift[0], upper + shift[0]),
            Domain::Box { lower, upper } => Domain::boxed(add(lower), add(upper)),
            Domain::Ball { center, radius } => Domain::ball(add(center), *radius),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn diameters() {
        assert_eq!(Domain::interval(0.0, 1.0).unwrap().diameter(), 1.0);
        assert_eq!(Domain::ball(vec![0.0, 0.0], 1.0).unwrap().diameter(), 2.0);
        assert_eq!(
            Domain::boxed(vec![0.0, 0.0], vec![3.0, 4.0]).unwrap().diameter(),
            5.0
        );
    }

    #[test]
    fn extents_of_exterior_points() {
        let unit = Domain::interval(0.0, 1.0).unwrap();
        assert_eq!(unit.radial_extents(&[2.0]).unwrap(), (1.0, 2.0));
        let disc = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(disc.radial_extents(&[3.0, 0.0]).unwrap(), (2.0, 4.0));
        assert!(matches!(
            unit.radial_extents(&[0.5]),
            Err(Error::InteriorPoint { .. })
        ));
        assert!(matches!(
            unit.radial_extents(&[1.0]),
            Err(Error::InteriorPoint { .. })
        ));
    }

    #[test]
    fn barrier_centers() {
        let disc = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        let y = disc.barrier_center(3.0).unwrap();
        assert_eq!(y, vec![2.0, 0.0]);
        assert_eq!(disc.radial_extents(&y).unwrap(), (1.0, 3.0));

        let unit = Domain::interval(0.0, 1.0).unwrap();
        let y = unit.barrier_center(2.0).unwrap();
        assert_eq!(y, vec![2.0]);
        assert_eq!(unit.radial_extents(&y).unwrap(), (1.0, 2.0));

        assert!(matches!(
            unit.barrier_center(1.0),
            Err(Error::RadiusTooSmall { .. })
        ));
    }

    #[test]
    fn rejects_degenerate_domains() {
        assert!(Domain::interval(1.0, 1.0).is_err());
        assert!(Domain::boxed(vec![0.0, 0.0], vec![1.0, 0.0]).is_err());
        assert!(Domain::ball(vec![0.0], 0.0).is_err());
        assert!(Domain::boxed(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn deserializes_scalar_and_array_intervals() {
        let a: Domain = serde_json::from_str(r#"{"kind":"interval","lower":0,"upper":1}"#).unwrap();
        let b: Domain =
            serde_json::from_str(r#"{"kind":"interval","lower":[0],"upper":[1]}"#).unwrap();
        assert_eq!(a, b);
        let bad = serde_json::from_str::<Domain>(r#"{"kind":"interval","lower":2,"upper":1}"#);
        assert!(bad.is_err());
    }

    fn arb_domain() -> impl Strategy<Value = Domain> {
        prop_oneof![
            (-5.0..5.0f64, 0.1..4.0f64).prop_map(|(a, w)| Domain::interval(a, a + w).unwrap()),
            (
                prop::collection::vec(-5.0..5.0f64, 2..=3),
                prop::collection::vec(0.1..4.0f64, 3)
            )
                .prop_map(|(lo, w)| {
                    let hi = lo.iter().zip(&w).map(|(l, w)| l + w).collect();
                    Domain::boxed(lo, hi).unwrap()
                }),
            (prop::collection::vec(-5.0..5.0f64, 1..=3), 0.1..3.0f64)
                .prop_map(|(c, r)| Domain::ball(c, r).unwrap()),
        ]
    }

    fn exterior_point(domain: &Domain, dir: &[f64], dist: f64) -> Point {
        // Walk from the diameter midpoint along `dir` until far enough outside.
        let (a, b) = domain.diameter_pair();
        let n = domain.dimension();
        let len = norm(dir.iter().take(n).copied()).max(1e-9);
        let step = domain.diameter() + dist;
        (0..n)
            .map(|i| 0.5 * (a[i] + b[i]) + step * dir[i] / len)
            .collect()
    }

    proptest! {
        #[test]
        fn extents_chain(domain in arb_domain(),
                         dir in prop::collection::vec(-1.0..1.0f64, 3),
                         dist in 0.01..10.0f64) {
            prop_assume!(norm(dir.iter().take(domain.dimension()).copied()) > 1e-3);
            let y = exterior_point(&domain, &dir, dist);
            let d = domain.diameter();
            let (r, big_r) = domain.radial_extents(&y).unwrap();
            let tol = 1e-12 * (1.0 + big_r);
            prop_assert!(big_r - d <= r + tol);
            prop_assert!(r < big_r);
            prop_assert!(big_r <= r + d + tol);
        }

        #[test]
        fn barrier_center_realizes_extents(domain in arb_domain(), factor in 1.0001..10.0f64) {
            let d = domain.diameter();
            let radius = factor * d;
            let y = domain.barrier_center(radius).unwrap();
            let (r, big_r) = domain.radial_extents(&y).unwrap();
            assert_relative_eq!(r, radius - d, max_relative = 1e-12, epsilon = 1e-12 * radius);
            assert_relative_eq!(big_r, radius, max_relative = 1e-12);
        }

        #[test]
        fn diameter_translation_invariant(domain in arb_domain(),
                                          shift in prop::collection::vec(-100.0..100.0f64, 3)) {
            let moved = domain.translated(&shift[..domain.dimension()]).unwrap();
            assert_relative_eq!(moved.diameter(), domain.diameter(), max_relative = 1e-12);
        }
    }
}
