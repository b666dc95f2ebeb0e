//! Szegő, Bergman and Carathéodory metrics, the invariant `SK = S^{n+1}/Kⁿ`
//! and the comparison quantity `E = (n+1)F_S² − nF_B²`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::domain::{norm_sqr, CVector, DomainKind, DomainSpec, NumericConfig, PointDir};
use crate::error::{LabError, Result};
use crate::kernels::{factorial, KernelEvaluator};

/// Negative round-off in a squared metric above this (relative) level is clamped to zero.
pub const NEGATIVE_FORM_TOLERANCE: f64 = 1e-14;

/// `|K(z,w)|` below this refuses the SK quotient.
pub const DIVISION_HAZARD: f64 = 1e-30;

/// Value of an infinitesimal metric at a point and direction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MetricValue(f64);

impl MetricValue {
    pub fn new(value: f64) -> Result<Self> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(LabError::Consistency(format!(
                "metric value {value} is not a finite nonnegative number"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn squared(self) -> f64 {
        self.0 * self.0
    }
}

impl fmt::Display for MetricValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Szego,
    Bergman,
    Caratheodory,
}

impl FromStr for MetricKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "szego" => Ok(MetricKind::Szego),
            "bergman" => Ok(MetricKind::Bergman),
            "caratheodory" | "carathéodory" => Ok(MetricKind::Caratheodory),
            _ => Err(LabError::Argument(format!("unknown metric '{s}'"))),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Szego => "szego",
            MetricKind::Bergman => "bergman",
            MetricKind::Caratheodory => "caratheodory",
        })
    }
}

/// `SK(z,w)` together with `E(z,ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonValue {
    pub sk: Complex64,
    pub e_val: f64,
}

/// Hermitian form `Σ H_{jk̄} ξ_j conj(ξ_k)`, real part.
fn hermitian_form(h: &nalgebra::DMatrix<Complex64>, xi: &CVector) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..xi.len() {
        for k in 0..xi.len() {
            acc += h[(j, k)] * xi[j] * xi[k].conj();
        }
    }
    acc.re
}

fn clamp_square(form: f64, scale: f64) -> Result<f64> {
    if form >= 0.0 {
        return Ok(form);
    }
    if form >= -NEGATIVE_FORM_TOLERANCE * scale.max(1.0) {
        return Ok(0.0);
    }
    Err(LabError::Consistency(format!("squared metric {form:e} is negative")))
}

/// `F(z,ξ) = (∂∂̄ log K(z,z)(ξ,ξ))^{1/2}` from the kernel's diagonal jet.
pub fn hessian_metric(kernel: &KernelEvaluator, at: &PointDir) -> Result<MetricValue> {
    at.require_nonzero_direction()?;
    let jet = kernel.diagonal_jet(&at.z)?;
    if !(jet.k0 > 0.0) {
        return Err(LabError::Consistency(format!("K(z,z) = {} is not positive", jet.k0)));
    }
    let h = jet.log_hessian();
    let form = hermitian_form(&h, &at.xi);
    let scale = hermitian_form(
        &jet.k2.map(|c| Complex64::new(c.norm(), 0.0)),
        &at.xi.map(|c| Complex64::new(c.norm(), 0.0)),
    ) / jet.k0;
    MetricValue::new(clamp_square(form, scale)?.sqrt())
}

/// Carathéodory metric where a closed form is available: anywhere in the
/// disk, and at the origin of the ball.
pub fn caratheodory(at: &PointDir, domain: &DomainSpec) -> Result<MetricValue> {
    at.require_nonzero_direction()?;
    domain.require_interior(&at.z)?;
    let xi = norm_sqr(&at.xi).sqrt();
    match domain.kind() {
        DomainKind::UnitDisk => MetricValue::new(xi / (1.0 - at.z[0].norm_sqr())),
        DomainKind::UnitBall if at.z.len() == 1 => MetricValue::new(xi / (1.0 - at.z[0].norm_sqr())),
        DomainKind::UnitBall if norm_sqr(&at.z) == 0.0 => MetricValue::new(xi),
        _ => Err(LabError::Capability(format!(
            "no closed-form Carathéodory metric on {domain} at this point"
        ))),
    }
}

/// Evaluate the requested metric.
pub fn metric(domain: &DomainSpec, which: MetricKind, at: &PointDir, config: NumericConfig) -> Result<MetricValue> {
    match which {
        MetricKind::Szego => hessian_metric(&KernelEvaluator::szego(domain.clone(), config)?, at),
        MetricKind::Bergman => hessian_metric(&KernelEvaluator::bergman(domain.clone(), config)?, at),
        MetricKind::Caratheodory => caratheodory(at, domain),
    }
}

/// `SK(z,w) = S(z,w)^{n+1} / K(z,w)ⁿ`.
pub fn sk_function(domain: &DomainSpec, z: &CVector, w: &CVector, config: NumericConfig) -> Result<Complex64> {
    let n = domain.dimension() as i32;
    let s = KernelEvaluator::szego(domain.clone(), config)?.eval(z, w)?;
    let k = KernelEvaluator::bergman(domain.clone(), config)?.eval(z, w)?;
    if k.norm() < DIVISION_HAZARD {
        return Err(LabError::DivisionHazard(k.norm()));
    }
    Ok(s.powi(n + 1) / k.powi(n))
}

/// The constant value of SK on the ball: `(n−1)!/(c_n^{n+1}(nπ)ⁿ)`.
pub fn ball_sk_constant(n: usize, config: &NumericConfig) -> Result<f64> {
    let c = config.dimensional_constant(n);
    Ok(factorial(n - 1)? / (c.powi(n as i32 + 1) * (n as f64 * PI).powi(n as i32)))
}

/// `E(z,ξ) = (n+1)F_S² − nF_B²` from the two metrics.
pub fn e_quantity(domain: &DomainSpec, at: &PointDir, config: NumericConfig) -> Result<f64> {
    let n = domain.dimension() as f64;
    let fs = hessian_metric(&KernelEvaluator::szego(domain.clone(), config)?, at)?;
    let fb = hessian_metric(&KernelEvaluator::bergman(domain.clone(), config)?, at)?;
    Ok((n + 1.0) * fs.squared() - n * fb.squared())
}

/// Nodes on each Cauchy circle used by [`e_quantity_log_sk`].
const CAUCHY_NODES: usize = 64;

/// `E(z,ξ)` as the mixed Hessian of `log SK(z + sξ, z + tξ)` at `s = t = 0`.
///
/// `SK(z + sξ, z + tξ)` is holomorphic in `s` and anti-holomorphic in `t`;
/// the mixed derivative is taken by trapezoid Cauchy integrals on circles of
/// radius a quarter of the distance to the boundary. Uses only kernel values
/// off the diagonal, never the diagonal jets.
pub fn e_quantity_log_sk(domain: &DomainSpec, at: &PointDir, config: NumericConfig) -> Result<f64> {
    at.require_nonzero_direction()?;
    domain.require_interior(&at.z)?;
    let distance = domain.boundary_distance(&at.z)?;
    let xi_norm = norm_sqr(&at.xi).sqrt();
    let radius = 0.25 * distance / xi_norm;
    let s_kernel = KernelEvaluator::szego(domain.clone(), config)?;
    let b_kernel = KernelEvaluator::bergman(domain.clone(), config)?;
    let n = domain.dimension() as i32;
    let center = {
        let s = s_kernel.eval(&at.z, &at.z)?;
        let k = b_kernel.eval(&at.z, &at.z)?;
        (s.powi(n + 1) / k.powi(n)).ln()
    };
    let roots: Vec<Complex64> = (0..CAUCHY_NODES)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / CAUCHY_NODES as f64))
        .collect();
    let points: Vec<CVector> = roots.iter().map(|&u| &at.z + &at.xi * (u * radius)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, &u) in points.iter().zip(&roots) {
        for (b, &v) in points.iter().zip(&roots) {
            let s = s_kernel.eval(a, b)?;
            let k = b_kernel.eval(a, b)?;
            if k.norm() < DIVISION_HAZARD {
                return Err(LabError::DivisionHazard(k.norm()));
            }
            // log SK relative to the centre keeps the principal branch continuous
            let log_sk = (s.powi(n + 1) / k.powi(n)).ln() - center;
            let log_sk = Complex64::new(log_sk.re, wrap_angle(log_sk.im));
            // w = z + tξ with t = radius·v, so the antiholomorphic variable is conj(t)
            acc += log_sk * u.conj() * v;
        }
    }
    let m = CAUCHY_NODES as f64;
    Ok((acc / (m * m * radius * radius)).re)
}

fn wrap_angle(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

/// Both `SK(z,w)` and `E(z,ξ)` at a point.
pub fn comparison(domain: &DomainSpec, at: &PointDir, w: &CVector, config: NumericConfig) -> Result<ComparisonValue> {
    Ok(ComparisonValue {
        sk: sk_function(domain, &at.z, w, config)?,
        e_val: e_quantity(domain, at, config)?,
    })
}
