//! Node/weight rules: periodic trapezoid, Gauss–Legendre on an interval,
//! and a product rule on the unit sphere in C².

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::domain::{cvec, CVector};
use crate::error::{LabError, Result};

/// Equispaced angles `2πk/m` with weight `2π/m`.
pub fn trapezoid(m: usize) -> Vec<(f64, f64)> {
    let h = 2.0 * PI / m as f64;
    (0..m).map(|k| (k as f64 * h, h)).collect()
}

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    let rule = GaussLegendre::new(n)
        .map_err(|_| LabError::Argument(format!("Gauss–Legendre needs at least 2 nodes, got {n}")))?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    Ok(rule
        .into_node_weight_pairs()
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect())
}

/// Product rule for Euclidean surface measure on the unit sphere of C².
///
/// Parametrizes `z = (cos φ·e^{iθ₁}, sin φ·e^{iθ₂})`, `φ ∈ [0, π/2]`, where
/// `dσ_E = sin φ cos φ dφ dθ₁ dθ₂`. Gauss–Legendre in `φ` (smooth integrands
/// stay smooth, unlike in `|z₁|²`), trapezoid in both angles.
pub fn sphere_c2(radial: usize, angular: usize) -> Result<Vec<(CVector, f64)>> {
    let phis = gauss_legendre(radial, 0.0, 0.5 * PI)?;
    let thetas = trapezoid(angular);
    let mut out = Vec::with_capacity(radial * angular * angular);
    for &(phi, wp) in &phis {
        let (s, c) = phi.sin_cos();
        for &(t1, w1) in &thetas {
            for &(t2, w2) in &thetas {
                let z = cvec(&[Complex64::from_polar(c, t1), Complex64::from_polar(s, t2)]);
                out.push((z, s * c * wp * w1 * w2));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_integrates_trigonometric_polynomials_exactly() {
        let rule = trapezoid(64);
        let total: f64 = rule.iter().map(|&(t, w)| w * (1.0 + (5.0 * t).cos())).sum();
        assert!((total - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_on_interval() {
        let rule = gauss_legendre(10, 0.5, 1.0).unwrap();
        let total: f64 = rule.iter().map(|&(x, w)| w * x.powi(7)).sum();
        let exact = (1.0 - 0.5f64.powi(8)) / 8.0;
        assert!((total - exact).abs() < 1e-15);
        assert!(gauss_legendre(1, 0.0, 1.0).is_err());
    }

    #[test]
    fn sphere_area_and_moments() {
        let rule = sphere_c2(16, 16).unwrap();
        let area: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((area - 2.0 * PI * PI).abs() < 1e-12);
        // ∫|z₁|²|z₂|² dσ_E = 2π²·1!1!/3!
        let m: f64 = rule.iter().map(|(z, w)| w * z[0].norm_sqr() * z[1].norm_sqr()).sum();
        assert!((m - 2.0 * PI * PI / 6.0).abs() < 1e-12);
    }
}
