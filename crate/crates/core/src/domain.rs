//! Value types shared across the crate: domains, points with directions,
//! and numeric configuration.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::quadkernel::CurveSpec;

/// A point (or tangent vector) in Cⁿ.
pub type CVector = DVector<Complex64>;

/// Minimum distance to the boundary accepted by kernel and metric evaluators.
pub const INTERIOR_MARGIN: f64 = 1e-8;

/// Largest ball dimension the closed forms are evaluated for.
pub const MAX_BALL_DIMENSION: usize = 12;

/// Build a vector from complex components.
pub fn cvec(components: &[Complex64]) -> CVector {
    DVector::from_column_slice(components)
}

/// Build a vector from real components.
pub fn rvec(components: &[f64]) -> CVector {
    DVector::from_iterator(components.len(), components.iter().map(|&x| Complex64::new(x, 0.0)))
}

/// Hermitian inner product ⟨z, w⟩ = Σ z_j conj(w_j).
pub fn hdot(z: &CVector, w: &CVector) -> Complex64 {
    z.iter().zip(w.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm_sqr(z: &CVector) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    UnitDisk,
    Annulus { inner_radius: f64 },
    UnitBall { dimension: usize },
    PlanarCurve(CurveSpec),
}

/// Discriminant of a [`DomainSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    UnitDisk,
    Annulus,
    UnitBall,
    PlanarCurve,
}

/// A validated model domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    shape: Shape,
}

impl DomainSpec {
    pub fn unit_disk() -> Self {
        Self { shape: Shape::UnitDisk }
    }

    /// The ring {r < |z| < 1}.
    pub fn annulus(inner_radius: f64) -> Result<Self> {
        if !(inner_radius > 0.0 && inner_radius < 1.0) {
            return Err(LabError::Argument(format!(
                "annulus inner radius must lie in (0,1), got {inner_radius}"
            )));
        }
        Ok(Self {
            shape: Shape::Annulus { inner_radius },
        })
    }

    pub fn unit_ball(dimension: usize) -> Result<Self> {
        if dimension == 0 || dimension > MAX_BALL_DIMENSION {
            return Err(LabError::Argument(format!(
                "ball dimension must lie in 1..={MAX_BALL_DIMENSION}, got {dimension}"
            )));
        }
        Ok(Self {
            shape: Shape::UnitBall { dimension },
        })
    }

    pub fn planar_curve(curve: CurveSpec) -> Self {
        Self {
            shape: Shape::PlanarCurve(curve),
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn kind(&self) -> DomainKind {
        match self.shape {
            Shape::UnitDisk => DomainKind::UnitDisk,
            Shape::Annulus { .. } => DomainKind::Annulus,
            Shape::UnitBall { .. } => DomainKind::UnitBall,
            Shape::PlanarCurve(_) => DomainKind::PlanarCurve,
        }
    }

    /// Complex dimension n.
    pub fn dimension(&self) -> usize {
        match self.shape {
            Shape::UnitBall { dimension } => dimension,
            _ => 1,
        }
    }

    pub fn inner_radius(&self) -> Option<f64> {
        match self.shape {
            Shape::Annulus { inner_radius } => Some(inner_radius),
            _ => None,
        }
    }

    fn check_dimension(&self, z: &CVector) -> Result<()> {
        if z.len() != self.dimension() {
            return Err(LabError::DimensionMismatch {
                expected: self.dimension(),
                got: z.len(),
            });
        }
        Ok(())
    }

    /// Signed distance to the boundary: positive inside, zero or negative otherwise.
    pub fn boundary_distance(&self, z: &CVector) -> Result<f64> {
        self.check_dimension(z)?;
        let radius = norm_sqr(z).sqrt();
        Ok(match &self.shape {
            Shape::UnitDisk | Shape::UnitBall { .. } => 1.0 - radius,
            Shape::Annulus { inner_radius } => (radius - inner_radius).min(1.0 - radius),
            Shape::PlanarCurve(curve) => curve.signed_distance(z[0]),
        })
    }

    /// True iff `z` lies strictly inside the domain.
    pub fn contains(&self, z: &CVector) -> Result<bool> {
        Ok(self.boundary_distance(z)? > 0.0)
    }

    /// Interior check with the [`INTERIOR_MARGIN`] required by evaluators.
    pub fn require_interior(&self, z: &CVector) -> Result<()> {
        let distance = self.boundary_distance(z)?;
        if distance <= 0.0 || !distance.is_finite() {
            return Err(LabError::NotInterior {
                domain: self.to_string(),
            });
        }
        if distance < INTERIOR_MARGIN {
            return Err(LabError::DomainMargin {
                domain: self.to_string(),
                distance,
                margin: INTERIOR_MARGIN,
            });
        }
        Ok(())
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::UnitDisk => write!(f, "disk"),
            Shape::Annulus { inner_radius } => write!(f, "annulus:{inner_radius}"),
            Shape::UnitBall { dimension } => write!(f, "ball:{dimension}"),
            Shape::PlanarCurve(curve) => write!(f, "curve:{curve}"),
        }
    }
}

impl FromStr for DomainSpec {
    type Err = LabError;

    /// Parses `disk`, `annulus:<r>`, `ball:<n>` or `curve:<curve selector>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let bad = || LabError::Argument(format!("unrecognized domain selector '{s}'"));
        match (head, tail) {
            ("disk", None) => Ok(Self::unit_disk()),
            ("annulus", Some(r)) => Self::annulus(r.parse().map_err(|_| bad())?),
            ("ball", Some(n)) => Self::unit_ball(n.parse().map_err(|_| bad())?),
            ("curve", Some(c)) => Ok(Self::planar_curve(c.parse()?)),
            _ => Err(bad()),
        }
    }
}

/// An interior point together with a tangent direction.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDir {
    pub z: CVector,
    pub xi: CVector,
}

impl PointDir {
    pub fn new(z: CVector, xi: CVector) -> Result<Self> {
        if z.len() != xi.len() {
            return Err(LabError::DimensionMismatch {
                expected: z.len(),
                got: xi.len(),
            });
        }
        Ok(Self { z, xi })
    }

    /// Planar point with a planar direction.
    pub fn planar(z: Complex64, xi: Complex64) -> Self {
        Self {
            z: cvec(&[z]),
            xi: cvec(&[xi]),
        }
    }

    pub fn require_nonzero_direction(&self) -> Result<()> {
        if norm_sqr(&self.xi) == 0.0 {
            return Err(LabError::Argument("direction ξ must be nonzero".into()));
        }
        Ok(())
    }
}

/// Tunables for series truncation, finite differences and the dimensional
/// constants of the boundary measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericConfig {
    /// Minimum number of terms on each side of the annulus Laurent series.
    pub series_cutoff: usize,
    pub fd_step: f64,
    /// Dimensional constant in the plane.
    pub c1: f64,
    /// Dimensional constant for n ≥ 2.
    pub cn: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            series_cutoff: 64,
            fd_step: 1e-5,
            c1: 2.0,
            cn: 1.0,
        }
    }
}

impl NumericConfig {
    pub fn validate(&self) -> Result<()> {
        if self.series_cutoff < 1 {
            return Err(LabError::Argument("series_cutoff must be at least 1".into()));
        }
        if !(self.fd_step > 0.0 && self.fd_step <= 1e-2) {
            return Err(LabError::Argument(format!(
                "fd_step must lie in (0, 1e-2], got {}",
                self.fd_step
            )));
        }
        if !(self.c1 > 0.0 && self.c1.is_finite() && self.cn > 0.0 && self.cn.is_finite()) {
            return Err(LabError::Argument("dimensional constants must be positive".into()));
        }
        Ok(())
    }

    /// The dimensional constant c_n for complex dimension `n`.
    pub fn dimensional_constant(&self, n: usize) -> f64 {
        if n == 1 {
            self.c1
        } else {
            self.cn
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn contains_examples() {
        let annulus = DomainSpec::annulus(0.1).unwrap();
        assert!(annulus.contains(&rvec(&[0.5])).unwrap());
        let ball = DomainSpec::unit_ball(2).unwrap();
        assert!(ball.contains(&rvec(&[0.0, 0.0])).unwrap());
        assert!(!DomainSpec::unit_disk().contains(&rvec(&[1.0])).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_argument_error() {
        let ball = DomainSpec::unit_ball(2).unwrap();
        let err = ball.contains(&rvec(&[0.1])).unwrap_err();
        assert_eq!(err, LabError::DimensionMismatch { expected: 2, got: 1 });
        assert!(err.is_argument_error());
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(DomainSpec::annulus(0.0).is_err());
        assert!(DomainSpec::annulus(1.0).is_err());
        assert!(DomainSpec::unit_ball(0).is_err());
        assert!(DomainSpec::unit_ball(13).is_err());
    }

    #[test]
    fn margin_violation_is_reported() {
        let disk = DomainSpec::unit_disk();
        let err = disk.require_interior(&rvec(&[1.0 - 1e-10])).unwrap_err();
        assert!(matches!(err, LabError::DomainMargin { .. }));
        assert!(matches!(
            disk.require_interior(&rvec(&[1.5])).unwrap_err(),
            LabError::NotInterior { .. }
        ));
    }

    #[test]
    fn selectors_round_trip() {
        for s in ["disk", "annulus:0.25", "ball:3"] {
            let d: DomainSpec = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("ball".parse::<DomainSpec>().is_err());
        assert!("annulus:2".parse::<DomainSpec>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(NumericConfig::default().validate().is_ok());
        let bad = NumericConfig {
            fd_step: 0.1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = NumericConfig {
            series_cutoff: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn annulus_membership_is_exact(r in 0.01f64..0.99, x in -1.2f64..1.2, y in -1.2f64..1.2) {
            let d = DomainSpec::annulus(r).unwrap();
            let z = Complex64::new(x, y);
            let expected = r < z.norm() && z.norm() < 1.0;
            prop_assert_eq!(d.contains(&cvec(&[z])).unwrap(), expected);
        }

        #[test]
        fn membership_is_rotation_invariant(
            r in 0.05f64..0.9, x in -1.1f64..1.1, y in -1.1f64..1.1, theta in 0.0f64..6.0
        ) {
            let rot = Complex64::from_polar(1.0, theta);
            let z = Complex64::new(x, y);
            // rounding in the rotation may flip points sitting on the boundary
            prop_assume!((z.norm() - 1.0).abs() > 1e-12 && (z.norm() - r).abs() > 1e-12);
            for d in [DomainSpec::unit_disk(), DomainSpec::annulus(r).unwrap()] {
                prop_assert_eq!(
                    d.contains(&cvec(&[z])).unwrap(),
                    d.contains(&cvec(&[rot * z])).unwrap()
                );
            }
            let ball = DomainSpec::unit_ball(2).unwrap();
            let p = cvec(&[z, Complex64::new(0.3 * y, 0.2 * x)]);
            prop_assume!((p.norm() - 1.0).abs() > 1e-12);
            prop_assert_eq!(ball.contains(&p).unwrap(), ball.contains(&(p.clone() * rot)).unwrap());
        }
    }
}
