//! Metrics from the extremal problem
//! `F² = sup{ |ξ·∇g(p)|² : g(p) = 0, ‖g‖ = 1 } / K(p,p)`,
//! solved exactly over a truncated orthonormal frame. Also certified
//! Carathéodory lower bounds on the annulus from explicit maps into the disk.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::domain::{CVector, DomainSpec, NumericConfig, PointDir, Shape};
use crate::error::{LabError, Result};
use crate::kernels::{cutoff_for, factorial, KernelEvaluator, KernelKind};
use crate::metrics::MetricValue;

/// Relative agreement required between the frame's partial kernel sum and K(p,p).
pub const FRAME_KERNEL_TOLERANCE: f64 = 1e-10;

/// One orthonormal function of a frame.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisElement {
    /// `coeff · z^α`.
    Monomial { alpha: Vec<u32>, coeff: f64 },
    /// `coeff · (radius/z)^order`, the negative powers on an annulus.
    Reflected { order: u32, radius: f64, coeff: f64 },
}

impl BasisElement {
    /// `(φ(p), ξ·∇φ(p))`.
    fn value_and_derivative(&self, p: &CVector, xi: &CVector) -> (Complex64, Complex64) {
        match self {
            BasisElement::Monomial { alpha, coeff } => {
                let value: Complex64 = alpha
                    .iter()
                    .zip(p.iter())
                    .map(|(&a, &z)| z.powu(a))
                    .product::<Complex64>()
                    * *coeff;
                let mut deriv = Complex64::new(0.0, 0.0);
                for j in 0..alpha.len() {
                    if alpha[j] == 0 {
                        continue;
                    }
                    let part: Complex64 = alpha
                        .iter()
                        .zip(p.iter())
                        .enumerate()
                        .map(|(k, (&a, &z))| if k == j { z.powu(a - 1) * a as f64 } else { z.powu(a) })
                        .product();
                    deriv += part * xi[j] * *coeff;
                }
                (value, deriv)
            }
            BasisElement::Reflected { order, radius, coeff } => {
                let z = p[0];
                let value = (Complex64::new(*radius, 0.0) / z).powu(*order) * *coeff;
                (value, -value * (*order as f64) / z * xi[0])
            }
        }
    }
}

/// A truncated orthonormal basis of the Hardy or Bergman space of a model domain.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFrame {
    domain: DomainSpec,
    kind: KernelKind,
    cutoff: usize,
    config: NumericConfig,
    elements: Vec<BasisElement>,
}

/// All multi-indices of length `n` with total degree ≤ `max_degree`.
fn multi_indices(n: usize, max_degree: usize) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for a in 0..=left {
            prefix.push(a as u32);
            rec(n, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max_degree, &mut Vec::with_capacity(n), &mut out);
    out
}

/// `ln k!` without overflow.
fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

impl BasisFrame {
    /// Frame with monomials of degree ≤ `cutoff` (ball, disk) or exponents in
    /// `[−cutoff, cutoff]` (annulus).
    pub fn new(domain: DomainSpec, kind: KernelKind, cutoff: usize, config: NumericConfig) -> Result<Self> {
        config.validate()?;
        let elements = match domain.shape() {
            Shape::Annulus { inner_radius } => {
                let r = *inner_radius;
                let scale = match kind {
                    KernelKind::Szego => 2.0 / config.c1,
                    KernelKind::Bergman => 1.0,
                };
                let mut out = Vec::with_capacity(2 * cutoff + 1);
                for n in 0..=cutoff as i64 {
                    let c = crate::kernels::annulus_coefficients(r, n, kind)? * scale;
                    out.push(BasisElement::Monomial {
                        alpha: vec![n as u32],
                        coeff: c.sqrt(),
                    });
                }
                for m in 1..=cutoff as u32 {
                    // c_{−m} r^{−2m}, kept finite for tiny r
                    let mf = m as i32;
                    let reduced = match kind {
                        KernelKind::Szego => 1.0 / (2.0 * PI * r * (1.0 + r.powi(2 * mf - 1))),
                        KernelKind::Bergman if m == 1 => 1.0 / (2.0 * PI * r * r * (1.0 / r).ln()),
                        KernelKind::Bergman => (m - 1) as f64 / (PI * r * r * (1.0 - r.powi(2 * mf - 2))),
                    } * scale;
                    out.push(BasisElement::Reflected {
                        order: m,
                        radius: r,
                        coeff: reduced.sqrt(),
                    });
                }
                out
            }
            Shape::UnitDisk | Shape::UnitBall { .. } => {
                let n = domain.dimension();
                let pi_n = PI.powi(n as i32);
                multi_indices(n, cutoff)
                    .into_iter()
                    .map(|alpha| {
                        let total: usize = alpha.iter().map(|&a| a as usize).sum();
                        let ln_alpha: f64 = alpha.iter().map(|&a| ln_factorial(a as usize)).sum();
                        // ‖z^α‖² on the sphere (measure (c/2)·σ_E) and on the ball (volume)
                        let ln_norm_sqr = match kind {
                            KernelKind::Szego => {
                                config.dimensional_constant(n).ln() + pi_n.ln() + ln_alpha - ln_factorial(n - 1 + total)
                            }
                            KernelKind::Bergman => pi_n.ln() + ln_alpha - ln_factorial(n + total),
                        };
                        BasisElement::Monomial {
                            alpha,
                            coeff: (-0.5 * ln_norm_sqr).exp(),
                        }
                    })
                    .collect()
            }
            Shape::PlanarCurve(_) => {
                return Err(LabError::Capability(
                    "orthonormal frames are available only for the disk, annulus and ball".into(),
                ))
            }
        };
        Ok(Self {
            domain,
            kind,
            cutoff,
            config,
            elements,
        })
    }

    /// Frame whose truncation tail at `p` is below double precision.
    pub fn adapted(domain: DomainSpec, kind: KernelKind, p: &CVector, config: NumericConfig) -> Result<Self> {
        domain.require_interior(p)?;
        let q = p.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let cutoff = match domain.shape() {
            Shape::Annulus { .. } => KernelEvaluator::new(domain.clone(), kind, config)?
                .with_cutoff(8)
                .required_cutoff(q, 2)?,
            _ => {
                let n = domain.dimension();
                let amp = factorial(n)? / PI.powi(n as i32);
                cutoff_for(amp, n as i32 + 2, q, 4, 1e-18 * amp)?
            }
        };
        Self::new(domain, kind, cutoff, config)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    /// Evaluation vector `e_α = φ_α(p)` and directional-derivative vector
    /// `d_α = ξ·∇φ_α(p)`.
    pub fn vectors(&self, at: &PointDir) -> (Vec<Complex64>, Vec<Complex64>) {
        self.elements
            .iter()
            .map(|el| el.value_and_derivative(&at.z, &at.xi))
            .unzip()
    }

    /// `Σ |φ_α(p)|²`, the truncated kernel on the diagonal.
    pub fn partial_kernel(&self, p: &CVector) -> f64 {
        let zero = p.map(|_| Complex64::new(0.0, 0.0));
        self.elements
            .iter()
            .map(|el| el.value_and_derivative(p, &zero).0.norm_sqr())
            .sum()
    }

    fn check_truncation(&self, p: &CVector) -> Result<()> {
        let exact = KernelEvaluator::new(self.domain.clone(), self.kind, self.config)?
            .diagonal_jet(p)?
            .k0;
        let partial = self.partial_kernel(p);
        if (exact - partial).abs() > FRAME_KERNEL_TOLERANCE * exact {
            return Err(LabError::Precision(format!(
                "frame cutoff {} too small: partial kernel {partial} vs {exact}",
                self.cutoff
            )));
        }
        Ok(())
    }
}

/// The maximizer of the extremal problem, as coefficients in the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremal {
    pub coefficients: Vec<Complex64>,
    /// `|ξ·∇g(p)|` at the maximizer.
    pub derivative: f64,
    pub metric: MetricValue,
}

impl Extremal {
    /// `(g(p), ‖g‖)` reconstructed from the coefficients.
    pub fn reconstruct(&self, frame: &BasisFrame, at: &PointDir) -> (Complex64, f64) {
        let (e, _) = frame.vectors(at);
        let value: Complex64 = self.coefficients.iter().zip(&e).map(|(c, v)| c * v).sum();
        let norm = self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        (value, norm)
    }
}

fn hdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Solve the extremal problem: with `y = d − (⟨d,e⟩/|e|²)·e`, the maximizer is
/// `g = Σ conj(y_α)/|y| · φ_α`, and `F² = |y|²/|e|²`.
pub fn extremal(frame: &BasisFrame, at: &PointDir) -> Result<Extremal> {
    at.require_nonzero_direction()?;
    frame.domain.require_interior(&at.z)?;
    frame.check_truncation(&at.z)?;
    let (e, d) = frame.vectors(at);
    let ee = norm_sqr(&e);
    if ee == 0.0 {
        return Err(LabError::Degenerate("all frame elements vanish at p".into()));
    }
    let proj = hdot(&d, &e) / ee;
    let y: Vec<Complex64> = d.iter().zip(&e).map(|(dv, ev)| dv - proj * ev).collect();
    let yy = norm_sqr(&y);
    // |d|²|e|² − |⟨d,e⟩|² over |e|⁴, the closed form of the projection
    let form = (norm_sqr(&d) * ee - hdot(&d, &e).norm_sqr()) / (ee * ee);
    let metric = MetricValue::new(form.max(0.0).sqrt())?;
    let y_norm = yy.sqrt();
    let coefficients = if y_norm > 0.0 {
        y.iter().map(|c| c.conj() / y_norm).collect()
    } else {
        vec![Complex64::new(0.0, 0.0); y.len()]
    };
    Ok(Extremal {
        coefficients,
        derivative: y_norm,
        metric,
    })
}

/// Metric from the extremal problem over `frame`.
pub fn variational_metric(frame: &BasisFrame, at: &PointDir) -> Result<MetricValue> {
    Ok(extremal(frame, at)?.metric)
}

/// A certified lower bound for the Carathéodory metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CaratheodoryBound {
    /// `"power"` for `z ↦ z^k`, `"reflected"` for `z ↦ (r/z)^k`, each
    /// followed by the disk automorphism sending the image of p to 0.
    pub family: &'static str,
    pub power: u32,
    pub value: f64,
}

/// Lower bounds `|φ'(p)ξ|` for holomorphic `φ: Ω_r → 𝔻` with `φ(p) = 0`.
pub fn annulus_caratheodory_bounds(
    domain: &DomainSpec,
    at: &PointDir,
    max_power: u32,
) -> Result<Vec<CaratheodoryBound>> {
    let r = domain
        .inner_radius()
        .ok_or_else(|| LabError::Capability("Carathéodory bounds are built for annuli only".into()))?;
    domain.require_interior(&at.z)?;
    at.require_nonzero_direction()?;
    let p = at.z[0];
    let xi = at.xi[0].norm();
    let mut out = Vec::with_capacity(2 * max_power as usize);
    for k in 1..=max_power {
        let kf = k as f64;
        let a = p.norm();
        // Möbius ∘ z^k: |ξ|·k|p|^{k−1} / (1 − |p|^{2k})
        let v = xi * kf * a.powi(k as i32 - 1) / (1.0 - a.powi(2 * k as i32));
        out.push(CaratheodoryBound {
            family: "power",
            power: k,
            value: v,
        });
        // Möbius ∘ (r/z)^k: |ξ|·k r^k/|p|^{k+1} / (1 − (r/|p|)^{2k})
        let s = r / a;
        let v = xi * kf * s.powi(k as i32) / a / (1.0 - s.powi(2 * k as i32));
        out.push(CaratheodoryBound {
            family: "reflected",
            power: k,
            value: v,
        });
    }
    Ok(out)
}
