//! Fefferman boundary measure: density against Euclidean surface measure from
//! the bordered complex Hessian of a defining function, and the pullback law
//! `∫_{∂Ω} g dσ_F = ∫_{∂Ω} (g∘Φ)·|det J_ℂΦ|^{2n/(n+1)} dσ_F`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::automorphism::AutomorphismMap;
use crate::domain::{norm_sqr, CVector, NumericConfig, Shape};
use crate::error::{LabError, Result};
use crate::quadrature::{sphere_c2, trapezoid};

/// Points with `|ρ| ≤ BOUNDARY_TOLERANCE` count as boundary points.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

/// Trapezoid nodes per circle for [`pullback_check`].
pub const DEFAULT_PULLBACK_NODES: usize = 512;

/// Positive multiplier `h` in `ρ = h·(|z|² − 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HFactor {
    Constant(f64),
    /// `2 + Re z₁`
    AffineReal,
    /// `1 + |z|²`
    Quadratic,
    /// `exp(Im z₁)`
    Exponential,
}

impl HFactor {
    pub const PERTURBATIONS: [HFactor; 3] = [HFactor::AffineReal, HFactor::Quadratic, HFactor::Exponential];

    fn value(&self, z: &CVector) -> f64 {
        match self {
            HFactor::Constant(s) => *s,
            HFactor::AffineReal => 2.0 + z[0].re,
            HFactor::Quadratic => 1.0 + norm_sqr(z),
            HFactor::Exponential => z[0].im.exp(),
        }
    }

    /// `(h, h_j, h_{jk̄})`.
    fn jet(&self, z: &CVector) -> (f64, CVector, DMatrix<Complex64>) {
        let n = z.len();
        let h = self.value(z);
        let mut grad = CVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        match self {
            HFactor::Constant(_) => {}
            HFactor::AffineReal => grad[0] = Complex64::new(0.5, 0.0),
            HFactor::Quadratic => {
                grad = z.map(|c| c.conj());
                hess = DMatrix::identity(n, n);
            }
            HFactor::Exponential => {
                grad[0] = Complex64::new(0.0, -0.5 * h);
                hess[(0, 0)] = Complex64::new(0.25 * h, 0.0);
            }
        }
        (h, grad, hess)
    }
}

impl fmt::Display for HFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HFactor::Constant(s) if *s == 1.0 => f.write_str("ball"),
            HFactor::Constant(s) => write!(f, "scaled-ball:{s}"),
            HFactor::AffineReal => f.write_str("perturbed-ball:h1"),
            HFactor::Quadratic => f.write_str("perturbed-ball:h2"),
            HFactor::Exponential => f.write_str("perturbed-ball:h3"),
        }
    }
}

impl FromStr for HFactor {
    type Err = LabError;

    /// `ball`, `scaled-ball:s`, `perturbed-ball:h1|h2|h3`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ball" => Ok(HFactor::Constant(1.0)),
            "perturbed-ball:h1" => Ok(HFactor::AffineReal),
            "perturbed-ball:h2" => Ok(HFactor::Quadratic),
            "perturbed-ball:h3" => Ok(HFactor::Exponential),
            _ => {
                let scale = s
                    .strip_prefix("scaled-ball:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| LabError::Argument(format!("unknown defining function '{s}'")))?;
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(LabError::Argument(format!("scale must be positive, got {scale}")));
                }
                Ok(HFactor::Constant(scale))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeMode {
    Analytic,
    /// Second-order central differences in real coordinates with this step.
    FiniteDifference {
        step: f64,
    },
}

/// A defining function `ρ = h·(|z|² − 1)` of the unit ball with its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefiningFunctionProbe {
    pub dimension: usize,
    pub factor: HFactor,
    pub mode: ProbeMode,
}

impl DefiningFunctionProbe {
    pub fn new(dimension: usize, factor: HFactor, mode: ProbeMode) -> Result<Self> {
        if dimension == 0 {
            return Err(LabError::Argument("dimension must be at least 1".into()));
        }
        if let ProbeMode::FiniteDifference { step } = mode {
            if !(step > 0.0 && step <= 1e-2) {
                return Err(LabError::Argument(format!(
                    "finite-difference step must lie in (0, 1e-2], got {step}"
                )));
            }
        }
        Ok(Self {
            dimension,
            factor,
            mode,
        })
    }

    pub fn ball(dimension: usize) -> Result<Self> {
        Self::new(dimension, HFactor::Constant(1.0), ProbeMode::Analytic)
    }

    pub fn with_mode(self, mode: ProbeMode) -> Result<Self> {
        Self::new(self.dimension, self.factor, mode)
    }

    fn check_len(&self, z: &CVector) -> Result<()> {
        if z.len() != self.dimension {
            return Err(LabError::DimensionMismatch {
                expected: self.dimension,
                got: z.len(),
            });
        }
        Ok(())
    }

    pub fn rho(&self, z: &CVector) -> Result<f64> {
        self.check_len(z)?;
        Ok(self.factor.value(z) * (norm_sqr(z) - 1.0))
    }

    /// `ρ_j = ∂ρ/∂z_j`.
    pub fn grad(&self, z: &CVector) -> Result<CVector> {
        Ok(self.jet(z)?.0)
    }

    /// `ρ_{jk̄} = ∂²ρ/∂z_j∂z̄_k`.
    pub fn hess(&self, z: &CVector) -> Result<DMatrix<Complex64>> {
        Ok(self.jet(z)?.1)
    }

    fn jet(&self, z: &CVector) -> Result<(CVector, DMatrix<Complex64>)> {
        self.check_len(z)?;
        match self.mode {
            ProbeMode::Analytic => Ok(self.analytic_jet(z)),
            ProbeMode::FiniteDifference { step } => self.difference_jet(z, step),
        }
    }

    fn analytic_jet(&self, z: &CVector) -> (CVector, DMatrix<Complex64>) {
        let n = z.len();
        let base = norm_sqr(z) - 1.0;
        let base_grad = z.map(|c| c.conj());
        let (h, hg, hh) = self.factor.jet(z);
        let grad = &hg * Complex64::new(base, 0.0) + &base_grad * Complex64::new(h, 0.0);
        // (hρ₀)_{jk̄} = h_{jk̄}ρ₀ + h_j ρ₀_k̄ + h_k̄ ρ₀_j + h ρ₀_{jk̄}
        let hess = DMatrix::from_fn(n, n, |j, k| {
            let delta = if j == k { h } else { 0.0 };
            hh[(j, k)] * base + hg[j] * base_grad[k].conj() + hg[k].conj() * base_grad[j] + delta
        });
        (grad, hess)
    }

    fn difference_jet(&self, z: &CVector, step: f64) -> Result<(CVector, DMatrix<Complex64>)> {
        let n = z.len();
        // real coordinates: index 2j ↦ x_j, 2j+1 ↦ y_j
        let shift = |v: &CVector, idx: usize, amount: f64| {
            let mut w = v.clone();
            let unit = if idx.is_multiple_of(2) {
                Complex64::new(amount, 0.0)
            } else {
                Complex64::new(0.0, amount)
            };
            w[idx / 2] += unit;
            w
        };
        let f = |v: &CVector| self.factor.value(v) * (norm_sqr(v) - 1.0);
        let f0 = f(z);
        let m = 2 * n;
        let h = step;
        let mut first = vec![0.0; m];
        let mut second = vec![vec![0.0; m]; m];
        for a in 0..m {
            let plus = f(&shift(z, a, h));
            let minus = f(&shift(z, a, -h));
            first[a] = (plus - minus) / (2.0 * h);
            second[a][a] = (plus - 2.0 * f0 + minus) / (h * h);
            for b in 0..a {
                let pp = f(&shift(&shift(z, a, h), b, h));
                let pm = f(&shift(&shift(z, a, h), b, -h));
                let mp = f(&shift(&shift(z, a, -h), b, h));
                let mm = f(&shift(&shift(z, a, -h), b, -h));
                second[a][b] = (pp - pm - mp + mm) / (4.0 * h * h);
                second[b][a] = second[a][b];
            }
        }
        let grad = CVector::from_fn(n, |j, _| Complex64::new(0.5 * first[2 * j], -0.5 * first[2 * j + 1]));
        let hess = DMatrix::from_fn(n, n, |j, k| {
            let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            Complex64::new(
                0.25 * (second[xj][xk] + second[yj][yk]),
                0.25 * (second[xj][yk] - second[yj][xk]),
            )
        });
        Ok((grad, hess))
    }

    /// Accept `z` within the boundary tolerance and take one Newton step onto `ρ = 0`.
    pub fn project_to_boundary(&self, z: &CVector) -> Result<CVector> {
        let rho = self.rho(z)?;
        if !(rho.abs() <= BOUNDARY_TOLERANCE) {
            return Err(LabError::Precondition(format!(
                "|ρ(z)| = {:e} exceeds the boundary tolerance",
                rho.abs()
            )));
        }
        let (grad, _) = self.analytic_or_mode_jet(z)?;
        let g2 = norm_sqr(&grad);
        if g2 == 0.0 {
            return Err(LabError::Degenerate("dρ vanishes at a boundary point".into()));
        }
        // real gradient as a complex vector is 2·conj(ρ_j), with squared norm 4|∂ρ|²
        Ok(z - grad.map(|c| c.conj()) * Complex64::new(2.0 * rho / (4.0 * g2), 0.0))
    }

    fn analytic_or_mode_jet(&self, z: &CVector) -> Result<(CVector, DMatrix<Complex64>)> {
        self.jet(z)
    }
}

/// Value of `dσ_F/dσ_E` at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FeffermanDensity(f64);

impl FeffermanDensity {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for FeffermanDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn bordered_matrix(grad: &CVector, hess: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = grad.len();
    DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => Complex64::new(0.0, 0.0),
        (0, k) => grad[k - 1].conj(),
        (j, 0) => grad[j - 1],
        (j, k) => hess[(j - 1, k - 1)],
    })
}

/// `det [[0, ρ_k̄], [ρ_j, ρ_{jk̄}]]` at a boundary point.
pub fn bordered_det(probe: &DefiningFunctionProbe, z: &CVector) -> Result<f64> {
    let rho = probe.rho(z)?;
    if !(rho.abs() <= BOUNDARY_TOLERANCE) {
        return Err(LabError::Precondition(format!(
            "|ρ(z)| = {:e} exceeds the boundary tolerance",
            rho.abs()
        )));
    }
    let (grad, hess) = probe.jet(z)?;
    // Hermitian, so the determinant is real
    Ok(bordered_matrix(&grad, &hess).determinant().re)
}

/// `c_n·(−det)^{1/(n+1)} / ‖∇ρ‖` with `‖∇ρ‖` the Euclidean norm of the real gradient.
pub fn density(probe: &DefiningFunctionProbe, z: &CVector, config: NumericConfig) -> Result<FeffermanDensity> {
    let z = probe.project_to_boundary(z)?;
    let det = bordered_det(probe, &z)?;
    if !(det < 0.0) {
        return Err(LabError::NotStronglyPseudoconvex(det));
    }
    let grad = probe.grad(&z)?;
    let real_grad_norm = 2.0 * norm_sqr(&grad).sqrt();
    let n = probe.dimension;
    let c = config.dimensional_constant(n);
    Ok(FeffermanDensity(c * (-det).powf(1.0 / (n + 1) as f64) / real_grad_norm))
}

/// Nodes and Fefferman-measure weights on the boundary of the map's domain.
fn boundary_rule(map: &AutomorphismMap, nodes: usize, config: NumericConfig) -> Result<Vec<(CVector, f64)>> {
    let one = |z: Complex64| CVector::from_element(1, z);
    let n = map.domain().dimension();
    let probe = DefiningFunctionProbe::ball(n)?;
    let unit = CVector::from_fn(n, |j, _| Complex64::new(if j == 0 { 1.0 } else { 0.0 }, 0.0));
    let scale = density(&probe, &unit, config)?.value();
    Ok(match map.domain().shape() {
        Shape::UnitDisk | Shape::UnitBall { dimension: 1 } => trapezoid(nodes)
            .into_iter()
            .map(|(t, w)| (one(Complex64::from_polar(1.0, t)), scale * w))
            .collect(),
        Shape::Annulus { inner_radius } => {
            // planar density is c₁/2 against arclength on both circles
            let r = *inner_radius;
            trapezoid(nodes)
                .into_iter()
                .flat_map(|(t, w)| {
                    [
                        (one(Complex64::from_polar(1.0, t)), scale * w),
                        (one(Complex64::from_polar(r, t)), scale * r * w),
                    ]
                })
                .collect()
        }
        Shape::UnitBall { dimension: 2 } => sphere_c2((nodes / 16).max(4), (nodes / 8).max(8))?
            .into_iter()
            .map(|(z, w)| (z, scale * w))
            .collect(),
        _ => {
            return Err(LabError::Capability(format!(
                "boundary quadrature is available for the disk, annulus and ball of dimension ≤ 2, not {}",
                map.domain()
            )))
        }
    })
}

/// `(∫ g dσ_F, ∫ (g∘Φ)|det J|^{2n/(n+1)} dσ_F)` with `g = |f|²`.
fn pullback_sides(
    map: &AutomorphismMap,
    f: &dyn Fn(&CVector) -> Complex64,
    nodes: usize,
    config: NumericConfig,
) -> Result<(f64, f64)> {
    let n = map.domain().dimension() as f64;
    let exponent = 2.0 * n / (n + 1.0);
    let mut lhs = crate::summation::KahanSum::default();
    let mut rhs = crate::summation::KahanSum::default();
    for (z, w) in boundary_rule(map, nodes, config)? {
        lhs.add(w * f(&z).norm_sqr());
        let image = map.forward(&z)?;
        rhs.add(w * f(&image).norm_sqr() * map.jac_det(&z)?.norm().powf(exponent));
    }
    Ok((lhs.value(), rhs.value()))
}

/// Successive changes must at least halve unless already below `floor`.
fn check_refinement(coarse: f64, mid: f64, fine: f64, floor: f64) -> Result<()> {
    let e1 = (mid - coarse).abs();
    let e2 = (fine - mid).abs();
    if e2 > floor && e2 > 0.5 * e1 {
        return Err(LabError::Accuracy(format!(
            "boundary quadrature not converging (changes {e1:e} then {e2:e})"
        )));
    }
    Ok(())
}

/// `|∫ |f|² dσ_F − ∫ |f∘Φ|²|det J|^{2n/(n+1)} dσ_F|` by boundary quadrature.
///
/// Both sides are also evaluated at a quarter and half of `nodes`; if the
/// last refinement fails to halve the change (above round-off), the rule has
/// not converged and an accuracy error is raised.
pub fn pullback_check(
    map: &AutomorphismMap,
    f: &dyn Fn(&CVector) -> Complex64,
    nodes: usize,
    config: NumericConfig,
) -> Result<f64> {
    if nodes < 16 || !nodes.is_power_of_two() {
        return Err(LabError::Argument(format!(
            "pullback nodes must be a power of two ≥ 16, got {nodes}"
        )));
    }
    let coarse = pullback_sides(map, f, nodes / 4, config)?;
    let mid = pullback_sides(map, f, nodes / 2, config)?;
    let fine = pullback_sides(map, f, nodes, config)?;
    let floor = 1e-13 * fine.0.abs().max(fine.1.abs()).max(1.0);
    check_refinement(coarse.0, mid.0, fine.0, floor)?;
    check_refinement(coarse.1, mid.1, fine.1, floor)?;
    Ok((fine.0 - fine.1).abs())
}
