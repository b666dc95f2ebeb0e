//! Szegő and Bergman kernels of planar domains built numerically: monomial
//! Gram matrices from spectrally accurate quadrature, symmetric
//! orthonormalization, and assembly as `Σ ψ_k(z)·conj(ψ_k(w))`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::quadrature::{gauss_legendre, trapezoid};

/// Largest admissible condition number of the column-scaled Gram matrix.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

pub const DEFAULT_NODES: usize = 256;

/// One closed boundary component, parametrized over `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    Circle {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// The unit circle traversed non-uniformly: `t ↦ exp(i(t + warp·sin t))`.
    WarpedCircle {
        warp: f64,
    },
}

impl Component {
    pub fn point(&self, t: f64) -> Complex64 {
        match *self {
            Component::Circle { radius } => Complex64::from_polar(radius, t),
            Component::Ellipse { a, b } => Complex64::new(a * t.cos(), b * t.sin()),
            Component::WarpedCircle { warp } => Complex64::from_polar(1.0, t + warp * t.sin()),
        }
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        match *self {
            Component::Circle { radius } => Complex64::new(0.0, radius) * Complex64::from_polar(1.0, t),
            Component::Ellipse { a, b } => Complex64::new(-a * t.sin(), b * t.cos()),
            Component::WarpedCircle { warp } => {
                let phase = t + warp * t.sin();
                Complex64::new(0.0, 1.0 + warp * t.cos()) * Complex64::from_polar(1.0, phase)
            }
        }
    }

    /// Signed distance, positive inside the component.
    fn signed_distance(&self, z: Complex64) -> f64 {
        match *self {
            Component::Circle { radius } => radius - z.norm(),
            Component::WarpedCircle { .. } => 1.0 - z.norm(),
            Component::Ellipse { a, b } => {
                let inside = (z.re / a).powi(2) + (z.im / b).powi(2) < 1.0;
                // nearest boundary point by dense sampling and a few Newton steps on t
                let samples = 1024;
                let mut best_t = 0.0;
                let mut best = f64::INFINITY;
                for k in 0..samples {
                    let t = 2.0 * PI * k as f64 / samples as f64;
                    let d = (self.point(t) - z).norm_sqr();
                    if d < best {
                        best = d;
                        best_t = t;
                    }
                }
                for _ in 0..8 {
                    let p = self.point(best_t) - z;
                    let dp = self.derivative(best_t);
                    let ddp = Complex64::new(-a * best_t.cos(), -b * best_t.sin());
                    let g = (p.conj() * dp).re;
                    let h = dp.norm_sqr() + (p.conj() * ddp).re;
                    if h.abs() < 1e-300 {
                        break;
                    }
                    best_t -= g / h;
                }
                let dist = (self.point(best_t) - z).norm().min(best.sqrt());
                if inside {
                    dist
                } else {
                    -dist
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveShape {
    Circle,
    Ellipse {
        a: f64,
        b: f64,
    },
    WarpedCircle {
        warp: f64,
    },
    /// Unit circle together with the circle of radius `inner`.
    Annulus {
        inner: f64,
    },
}

/// A discretized planar boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    shape: CurveShape,
    nodes: usize,
}

impl CurveSpec {
    pub fn new(shape: CurveShape, nodes: usize) -> Result<Self> {
        if nodes < 64 || !nodes.is_power_of_two() {
            return Err(LabError::Argument(format!(
                "curve nodes must be a power of two ≥ 64, got {nodes}"
            )));
        }
        match shape {
            CurveShape::Ellipse { a, b } if !(a > 0.0 && b > 0.0) => {
                return Err(LabError::Argument("ellipse semi-axes must be positive".into()))
            }
            CurveShape::Annulus { inner } if !(inner > 0.0 && inner < 1.0) => {
                return Err(LabError::Argument("annulus inner radius must lie in (0,1)".into()))
            }
            // the parametrization derivative 1 + warp·cos t must not vanish
            CurveShape::WarpedCircle { warp } if warp.abs() >= 1.0 => {
                return Err(LabError::Argument("warp must satisfy |warp| < 1".into()))
            }
            _ => {}
        }
        Ok(Self { shape, nodes })
    }

    pub fn circle() -> Self {
        Self {
            shape: CurveShape::Circle,
            nodes: DEFAULT_NODES,
        }
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(CurveShape::Ellipse { a, b }, DEFAULT_NODES)
    }

    pub fn annulus(inner: f64) -> Result<Self> {
        Self::new(CurveShape::Annulus { inner }, DEFAULT_NODES)
    }

    pub fn warped_circle(warp: f64) -> Result<Self> {
        Self::new(CurveShape::WarpedCircle { warp }, DEFAULT_NODES)
    }

    pub fn with_nodes(&self, nodes: usize) -> Result<Self> {
        Self::new(self.shape, nodes)
    }

    pub fn shape(&self) -> CurveShape {
        self.shape
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn components(&self) -> Vec<Component> {
        match self.shape {
            CurveShape::Circle => vec![Component::Circle { radius: 1.0 }],
            CurveShape::Ellipse { a, b } => vec![Component::Ellipse { a, b }],
            CurveShape::WarpedCircle { warp } => vec![Component::WarpedCircle { warp }],
            CurveShape::Annulus { inner } => {
                vec![Component::Circle { radius: 1.0 }, Component::Circle { radius: inner }]
            }
        }
    }

    /// Positive inside the bounded region, measured to the nearest component.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        let comps = self.components();
        let outer = comps[0].signed_distance(z);
        match comps.get(1) {
            Some(inner) => outer.min(-inner.signed_distance(z)),
            None => outer,
        }
    }

    /// Trapezoid rule for arclength on every component with `m` nodes each.
    pub fn arclength_rule(&self, m: usize) -> Vec<(Complex64, f64)> {
        let mut out = Vec::new();
        for comp in self.components() {
            for (t, w) in trapezoid(m) {
                out.push((comp.point(t), w * comp.derivative(t).norm()));
            }
        }
        out
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape {
            CurveShape::Circle => write!(f, "circle"),
            CurveShape::Ellipse { a, b } => write!(f, "ellipse:{a},{b}"),
            CurveShape::WarpedCircle { warp } => write!(f, "warped-circle:{warp}"),
            CurveShape::Annulus { inner } => write!(f, "annulus:{inner}"),
        }
    }
}

impl FromStr for CurveSpec {
    type Err = LabError;

    /// `circle`, `annulus:<r>`, `ellipse:<a>,<b>` or `warped-circle:<w>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || LabError::Argument(format!("unrecognized curve selector '{s}'"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        match s.trim().split_once(':') {
            None if s.trim() == "circle" => Ok(Self::circle()),
            Some(("annulus", r)) => Self::annulus(num(r)?),
            Some(("warped-circle", w)) => Self::warped_circle(num(w)?),
            Some(("ellipse", ab)) => {
                let (a, b) = ab.split_once(',').ok_or_else(bad)?;
                Self::ellipse(num(a)?, num(b)?)
            }
            _ => Err(bad()),
        }
    }
}

/// Planar region carrying area measure, integrated on a polar tensor grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disk,
    Annulus { inner: f64 },
}

impl Region {
    fn inner(&self) -> f64 {
        match *self {
            Region::Disk => 0.0,
            Region::Annulus { inner } => inner,
        }
    }

    /// Gauss–Legendre in the radius times trapezoid in the angle.
    pub fn area_rule(&self, radial: usize, angular: usize) -> Result<Vec<(Complex64, f64)>> {
        let radii = gauss_legendre(radial, self.inner(), 1.0)?;
        let angles = trapezoid(angular);
        let mut out = Vec::with_capacity(radial * angular);
        for &(t, wt) in &radii {
            for &(theta, wa) in &angles {
                out.push((Complex64::from_polar(t, theta), wt * t * wa));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Measure {
    Boundary(CurveSpec),
    Area {
        region: Region,
        radial: usize,
        angular: usize,
    },
}

impl Measure {
    /// The same measure at twice the resolution.
    fn refined_rule(&self) -> Result<Vec<(Complex64, f64)>> {
        match self {
            Measure::Boundary(curve) => Ok(curve.arclength_rule(2 * curve.nodes())),
            Measure::Area {
                region,
                radial,
                angular,
            } => region.area_rule(2 * radial, 2 * angular),
        }
    }
}

/// Laurent polynomial `Σ c_k z^{e_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(i32, Complex64)>,
}

impl Polynomial {
    pub fn monomial(exponent: i32) -> Self {
        Self {
            terms: vec![(exponent, Complex64::new(1.0, 0.0))],
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms.iter().map(|&(e, c)| c * z.powi(e)).sum()
    }
}

/// An orthonormalized monomial basis and the kernel it reproduces.
#[derive(Debug, Clone)]
pub struct NumericKernel {
    exponents: Vec<i32>,
    /// Column `l` holds the monomial coefficients of `ψ_l`.
    coeffs: DMatrix<Complex64>,
    measure: Measure,
    gram_residual: f64,
    condition: f64,
}

fn monomials(exponents: &[i32], z: Complex64) -> DVector<Complex64> {
    DVector::from_iterator(exponents.len(), exponents.iter().map(|&e| z.powi(e)))
}

/// `H^{-1/2}` for a Hermitian positive definite `H`, with its condition number.
fn inverse_sqrt(h: DMatrix<Complex64>) -> (DMatrix<Complex64>, f64) {
    let eig = SymmetricEigen::new(h);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let inv = eig
        .eigenvalues
        .map(|l| Complex64::new(1.0 / l.max(f64::MIN_POSITIVE).sqrt(), 0.0));
    let u = &eig.eigenvectors;
    let out = u * DMatrix::from_diagonal(&inv) * u.adjoint();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    (out, condition)
}

fn orthonormalize(exponents: Vec<i32>, rule: &[(Complex64, f64)], measure: Measure) -> Result<NumericKernel> {
    let (rows, cols) = (rule.len(), exponents.len());
    if cols == 0 {
        return Err(LabError::Argument("empty degree range".into()));
    }
    // weighted samples: A[m, j] = √w_m · z_m^{e_j}
    let samples = DMatrix::from_fn(rows, cols, |m, j| {
        let (z, w) = rule[m];
        z.powi(exponents[j]) * w.sqrt()
    });
    let scale = DVector::from_iterator(cols, samples.column_iter().map(|c| Complex64::new(1.0 / c.norm(), 0.0)));
    let scaled = &samples * DMatrix::from_diagonal(&scale);
    let (root, condition) = inverse_sqrt(scaled.adjoint() * &scaled);
    if !(condition <= MAX_GRAM_CONDITION) {
        let (lo, hi) = (exponents[0], exponents[cols - 1]);
        let shrink = |e: i32| (e as f64 * 0.75).round() as i32;
        return Err(LabError::IllConditioned {
            condition,
            suggested: format!("{}..{}", shrink(lo), shrink(hi)),
        });
    }
    let mut coeffs = DMatrix::from_diagonal(&scale) * root;
    // one symmetric re-orthogonalization pass
    let q = &samples * &coeffs;
    let (correction, _) = inverse_sqrt(q.adjoint() * &q);
    coeffs *= correction;
    let q = &samples * &coeffs;
    let gram = q.adjoint() * &q;
    let gram_residual = (gram - DMatrix::<Complex64>::identity(cols, cols))
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    Ok(NumericKernel {
        exponents,
        coeffs,
        measure,
        gram_residual,
        condition,
    })
}

fn exponent_list(degrees: RangeInclusive<i32>) -> Result<Vec<i32>> {
    let list: Vec<i32> = degrees.collect();
    if list.is_empty() {
        return Err(LabError::Argument("empty degree range".into()));
    }
    Ok(list)
}

/// Szegő kernel of the region bounded by `curve`, for arclength measure.
pub fn build_szego(curve: &CurveSpec, degrees: RangeInclusive<i32>) -> Result<NumericKernel> {
    let exponents = exponent_list(degrees)?;
    if exponents[0] < 0 && curve.components().len() < 2 {
        return Err(LabError::Argument(
            "negative exponents require a two-component boundary".into(),
        ));
    }
    let rule = curve.arclength_rule(curve.nodes());
    orthonormalize(exponents, &rule, Measure::Boundary(curve.clone()))
}

/// Bergman kernel of a disk or annulus for area measure.
pub fn build_bergman(
    region: Region,
    degrees: RangeInclusive<i32>,
    radial: usize,
    angular: usize,
) -> Result<NumericKernel> {
    let exponents = exponent_list(degrees)?;
    if exponents[0] < 0 && region == Region::Disk {
        return Err(LabError::Argument(
            "negative exponents are not square integrable on the disk".into(),
        ));
    }
    let rule = region.area_rule(radial, angular)?;
    orthonormalize(
        exponents,
        &rule,
        Measure::Area {
            region,
            radial,
            angular,
        },
    )
}

impl NumericKernel {
    pub fn exponents(&self) -> &[i32] {
        &self.exponents
    }

    /// `max |G − I|` of the orthonormalized family under the build quadrature.
    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    /// Condition number of the column-scaled monomial Gram matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Values of the orthonormal functions `ψ_l(z)`.
    pub fn basis_values(&self, z: Complex64) -> DVector<Complex64> {
        self.coeffs.transpose() * monomials(&self.exponents, z)
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        let a = self.basis_values(z);
        let b = self.basis_values(w);
        a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
    }

    /// `(C·C*)_{jj}` for the monomial `z^exponent`; equals `1/‖z^e‖²` for an
    /// orthogonal monomial family.
    pub fn diagonal_coefficient(&self, exponent: i32) -> Option<f64> {
        let j = self.exponents.iter().position(|&e| e == exponent)?;
        Some(self.coeffs.row(j).iter().map(|c| c.norm_sqr()).sum())
    }

    /// `|∫ K(z,ζ) f(ζ) dμ(ζ) − f(z)|`, integrated at twice the build resolution.
    pub fn reproducing_residual(&self, f: &Polynomial, z: Complex64) -> Result<f64> {
        if let Some(&(e, _)) = f.terms.iter().find(|(e, _)| !self.exponents.contains(e)) {
            return Err(LabError::Precondition(format!(
                "test function exponent {e} lies outside the spanned degree range"
            )));
        }
        let left = self.basis_values(z);
        let mut acc = crate::summation::ComplexKahanSum::new();
        for (zeta, w) in self.measure.refined_rule()? {
            let right = self.basis_values(zeta);
            let k: Complex64 = left.iter().zip(right.iter()).map(|(x, y)| x * y.conj()).sum();
            acc.add(k * f.eval(zeta) * w);
        }
        Ok((acc.value() - f.eval(z)).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{rvec, DomainSpec, NumericConfig};
    use crate::kernels::{annulus_coefficients, KernelEvaluator, KernelKind};

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn circle_szego_matches_closed_form() {
        let k = build_szego(&CurveSpec::circle(), 0..=40).unwrap();
        let (z, w) = (c(0.3, 0.0), c(0.2, 0.0));
        let exact = 1.0 / (2.0 * PI * (c(1.0, 0.0) - z * w.conj()));
        assert!((k.eval(z, w) - exact).norm() <= 1e-10);
        assert!(k.gram_residual() <= 1e-10);
    }

    #[test]
    fn annulus_szego_matches_series() {
        let curve = CurveSpec::annulus(0.5).unwrap();
        let k = build_szego(&curve, -40..=40).unwrap();
        let series = KernelEvaluator::szego(DomainSpec::annulus(0.5).unwrap(), NumericConfig::default()).unwrap();
        let z = rvec(&[0.7]);
        let exact = series.eval(&z, &z).unwrap();
        assert!((k.eval(c(0.7, 0.0), c(0.7, 0.0)) - exact).norm() <= 1e-8 * exact.norm());
    }

    #[test]
    fn ellipse_reproduces_cubics() {
        let k = build_szego(&CurveSpec::ellipse(1.0, 0.6).unwrap(), 0..=30).unwrap();
        assert!(k.gram_residual() <= 1e-10);
        let res = k.reproducing_residual(&Polynomial::monomial(3), c(0.2, 0.0)).unwrap();
        assert!(res <= 1e-8, "residual {res}");
        let outside = Polynomial::monomial(31);
        assert!(matches!(
            k.reproducing_residual(&outside, c(0.2, 0.0)).unwrap_err(),
            LabError::Precondition(_)
        ));
    }

    #[test]
    fn disk_reproduction() {
        let k = build_szego(&CurveSpec::circle(), 0..=40).unwrap();
        assert!(k.reproducing_residual(&Polynomial::monomial(0), c(0.0, 0.0)).unwrap() <= 1e-12);
        assert!(k.reproducing_residual(&Polynomial::monomial(5), c(0.4, 0.0)).unwrap() <= 1e-10);
    }

    #[test]
    fn bergman_disk_and_annulus() {
        let k = build_bergman(Region::Disk, 0..=40, 64, 128).unwrap();
        let (z, w) = (c(0.3, 0.1), c(0.2, -0.4));
        let exact = 1.0 / (PI * (c(1.0, 0.0) - z * w.conj()).powi(2));
        assert!((k.eval(z, w) - exact).norm() <= 1e-10 * exact.norm());

        let constant = build_bergman(Region::Disk, 0..=0, 8, 64).unwrap();
        for z in [c(0.0, 0.0), c(0.5, 0.5), c(-0.9, 0.0)] {
            assert!((constant.eval(z, z) - 1.0 / PI).norm() < 1e-14);
        }

        let annulus = build_bergman(Region::Annulus { inner: 0.5 }, -10..=10, 64, 64).unwrap();
        let b = annulus.diagonal_coefficient(-1).unwrap();
        assert!((b - 1.0 / (2.0 * PI * 2f64.ln())).abs() < 1e-12);
        assert!((b - 0.22961).abs() < 5e-6);
        for n in [-4i32, 0, 3] {
            let exact = annulus_coefficients(0.5, n as i64, KernelKind::Bergman).unwrap();
            assert!((annulus.diagonal_coefficient(n).unwrap() - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_szego(&CurveSpec::circle(), -3..=3).is_err());
        assert!(build_bergman(Region::Disk, -1..=3, 16, 64).is_err());
        assert!(CurveSpec::circle().with_nodes(100).is_err());
        assert!(CurveSpec::circle().with_nodes(32).is_err());
        assert!("ellipse:1".parse::<CurveSpec>().is_err());
    }

    #[test]
    fn ill_conditioned_gram_is_reported() {
        let curve = CurveSpec::ellipse(1.0, 0.3).unwrap().with_nodes(512).unwrap();
        match build_szego(&curve, 0..=60) {
            Err(LabError::IllConditioned { condition, suggested }) => {
                assert!(condition > MAX_GRAM_CONDITION);
                assert_eq!(suggested, "0..45");
            }
            other => panic!("expected ill-conditioning, got {other:?}"),
        }
    }

    #[test]
    fn assembled_kernel_is_positive_semidefinite() {
        let k = build_szego(&CurveSpec::ellipse(1.0, 0.6).unwrap(), 0..=30).unwrap();
        let pts: Vec<Complex64> = (0..12)
            .map(|j| Complex64::from_polar(0.5 * (j as f64 / 12.0), 2.4 * j as f64))
            .collect();
        let gram: DMatrix<Complex64> = DMatrix::from_fn(pts.len(), pts.len(), |i, j| k.eval(pts[i], pts[j]));
        let eig = SymmetricEigen::new(gram);
        assert!(eig.eigenvalues.min() >= -1e-10);
    }

    #[test]
    fn diagonal_is_monotone_in_degree_range() {
        let curve = CurveSpec::ellipse(1.0, 0.6).unwrap();
        let z = c(0.3, 0.2);
        let mut last = 0.0;
        for hi in [0, 4, 8, 16, 24] {
            let v = build_szego(&curve, 0..=hi).unwrap().eval(z, z).re;
            assert!(v >= last - 1e-14);
            last = v;
        }
    }

    #[test]
    fn curve_signed_distance() {
        let e = CurveSpec::ellipse(1.0, 0.6).unwrap();
        assert!((e.signed_distance(c(0.0, 0.0)) - 0.6).abs() < 1e-12);
        assert!((e.signed_distance(c(2.0, 0.0)) + 1.0).abs() < 1e-12);
        let a = CurveSpec::annulus(0.5).unwrap();
        assert!((a.signed_distance(c(0.6, 0.0)) - 0.1).abs() < 1e-12);
        assert!(a.signed_distance(c(0.2, 0.0)) < 0.0);
    }
}
