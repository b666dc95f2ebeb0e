//! Closed-form and Laurent-series Szegő and Bergman kernels on the unit
//! disk, the annulus {r < |z| < 1} and the unit ball, with on-diagonal
//! derivatives up to second order.
//!
//! Conventions: the planar boundary measure is `(c₁/2)·ds`, the sphere
//! measure `(c_n/2)·dσ_E`. Szegő kernels scale with `1/c`, Bergman kernels
//! do not depend on the constants.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::domain::{hdot, norm_sqr, CVector, DomainSpec, NumericConfig, Shape};
use crate::error::{LabError, Result};
use crate::summation::{ComplexKahanSum, KahanSum};

/// Relative size of each neglected Laurent tail.
pub const SERIES_TAIL_TARGET: f64 = 1e-16;

/// Hard ceiling for automatic cutoff escalation.
pub const MAX_SERIES_CUTOFF: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Szego,
    Bergman,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Szego => "szego",
            KernelKind::Bergman => "bergman",
        })
    }
}

impl FromStr for KernelKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "szego" | "s" => Ok(KernelKind::Szego),
            "bergman" | "b" | "k" => Ok(KernelKind::Bergman),
            _ => Err(LabError::Argument(format!("unknown kernel kind '{s}'"))),
        }
    }
}

const FACTORIALS: [u64; 21] = {
    let mut table = [1u64; 21];
    let mut k = 1;
    while k < 21 {
        table[k] = table[k - 1] * k as u64;
        k += 1;
    }
    table
};

/// n! for n ≤ 20.
pub fn factorial(n: usize) -> Result<f64> {
    FACTORIALS
        .get(n)
        .map(|&f| f as f64)
        .ok_or_else(|| LabError::Argument(format!("factorial table holds n ≤ 20, got {n}")))
}

/// Squared norm-one coefficient of zⁿ in the annulus {r<|z|<1}, with the
/// boundary measure taken to be arclength (c₁ = 2).
///
/// Szegő: `1/(2π(1+r^{2n+1}))`. Bergman: `(n+1)/(π(1−r^{2n+2}))`, and
/// `1/(2π log(1/r))` for n = −1.
pub fn annulus_coefficients(r: f64, n: i64, kind: KernelKind) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(LabError::Argument(format!("annulus radius must lie in (0,1), got {r}")));
    }
    let exp = |e: i64| r.powf(e as f64);
    Ok(match kind {
        KernelKind::Szego => 1.0 / (2.0 * PI * (1.0 + exp(2 * n + 1))),
        KernelKind::Bergman if n == -1 => 1.0 / (2.0 * PI * (1.0 / r).ln()),
        KernelKind::Bergman => (n + 1) as f64 / (PI * (1.0 - exp(2 * n + 2))),
    })
}

/// Value, gradient and complex Hessian of `z ↦ K(z,z)`.
///
/// `k1[j] = ∂K/∂z_j`, `k2[(j,k)] = ∂²K/∂z_j∂z̄_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalJet {
    pub k0: f64,
    pub k1: CVector,
    pub k2: DMatrix<Complex64>,
}

impl DiagonalJet {
    /// Complex Hessian of `log K(z,z)`: `(k0·k2 − k1·k1*)/k0²`.
    pub fn log_hessian(&self) -> DMatrix<Complex64> {
        let n = self.k1.len();
        DMatrix::from_fn(n, n, |j, k| {
            (self.k2[(j, k)] * self.k0 - self.k1[j] * self.k1[k].conj()) / (self.k0 * self.k0)
        })
    }
}

/// Geometric tail bound for `Σ_{n>n0} amp·(n+1)^power·qⁿ`.
pub(crate) fn tail_bound(amp: f64, power: i32, q: f64, n0: usize) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let n1 = (n0 + 1) as f64;
    let ratio = q * ((n1 + 2.0) / (n1 + 1.0)).powi(power);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    amp * (n1 + 1.0).powi(power) * q.powf(n1) / (1.0 - ratio)
}

/// Smallest cutoff ≥ `start` whose tail bound falls below `target`.
pub(crate) fn cutoff_for(amp: f64, power: i32, q: f64, start: usize, target: f64) -> Result<usize> {
    let mut n = start.max(1);
    while tail_bound(amp, power, q, n) > target {
        n = if n < 64 { n + 8 } else { n + n / 4 };
        if n > MAX_SERIES_CUTOFF {
            return Err(LabError::Precision(format!(
                "series cutoff would exceed {MAX_SERIES_CUTOFF} (ratio {q})"
            )));
        }
    }
    Ok(n)
}

/// Laurent coefficients of an annulus kernel, split so that no term
/// overflows: `K(z,w) = Σ_{n≥0} pos(n)·pⁿ + Σ_{m≥1} neg(m)·(r²/p)^m` with
/// `p = z·w̄`.
#[derive(Debug, Clone, Copy)]
struct AnnulusSeries {
    r: f64,
    kind: KernelKind,
    scale: f64,
}

impl AnnulusSeries {
    fn pos(&self, n: usize) -> f64 {
        let r = self.r;
        self.scale
            * match self.kind {
                KernelKind::Szego => 1.0 / (2.0 * PI * (1.0 + r.powi(2 * n as i32 + 1))),
                KernelKind::Bergman => (n + 1) as f64 / (PI * (1.0 - r.powi(2 * n as i32 + 2))),
            }
    }

    /// `c_{−m}·r^{−2m}`.
    fn neg(&self, m: usize) -> f64 {
        let r = self.r;
        self.scale
            * match self.kind {
                KernelKind::Szego => 1.0 / (2.0 * PI * r * (1.0 + r.powi(2 * m as i32 - 1))),
                KernelKind::Bergman if m == 1 => 1.0 / (2.0 * PI * r * r * (1.0 / r).ln()),
                KernelKind::Bergman => (m - 1) as f64 / (PI * r * r * (1.0 - r.powi(2 * m as i32 - 2))),
            }
    }

    /// (amplitude, polynomial power) bounds on |pos(n)| and |neg(m)|.
    fn pos_bound(&self) -> (f64, i32) {
        match self.kind {
            KernelKind::Szego => (self.scale / (2.0 * PI), 0),
            KernelKind::Bergman => (self.scale / (PI * (1.0 - self.r * self.r)), 1),
        }
    }

    fn neg_bound(&self) -> (f64, i32) {
        let r = self.r;
        match self.kind {
            KernelKind::Szego => (self.scale / (2.0 * PI * r), 0),
            KernelKind::Bergman => {
                let a = 1.0 / (PI * r * r * (1.0 - r * r));
                let b = 1.0 / (2.0 * PI * r * r * (1.0 / r).ln());
                (self.scale * a.max(b), 1)
            }
        }
    }

    /// Cutoff making both tails of `Σ n^extra·|term|` negligible against `scale`.
    fn cutoff(&self, modulus: f64, extra_power: i32, start: usize, scale: f64) -> Result<usize> {
        let target = SERIES_TAIL_TARGET * scale;
        let (ap, kp) = self.pos_bound();
        let (an, kn) = self.neg_bound();
        let qn = self.r * self.r / modulus;
        let np = cutoff_for(ap, kp + extra_power, modulus, start, target)?;
        let nn = cutoff_for(an, kn + extra_power, qn, start, target)?;
        Ok(np.max(nn))
    }

    /// Sum of the series at `p = z·w̄`, symmetric outward from n = 0.
    fn sum(&self, p: Complex64, cutoff: usize) -> Complex64 {
        let u = Complex64::new(self.r * self.r, 0.0) / p;
        let mut acc = ComplexKahanSum::new();
        acc.add(Complex64::new(self.pos(0), 0.0));
        for n in 1..=cutoff {
            acc.add(p.powi(n as i32) * self.pos(n));
            acc.add(u.powi(n as i32) * self.neg(n));
        }
        acc.value()
    }

    /// Moments `Σ n^j·c_n·tⁿ` for j = 0, 1, 2 at `t = |z|²` (n over ℤ).
    fn moments(&self, t: f64, cutoff: usize) -> [f64; 3] {
        let s = self.r * self.r / t;
        let mut acc = [KahanSum::new(), KahanSum::new(), KahanSum::new()];
        acc[0].add(self.pos(0));
        for n in 1..=cutoff {
            let nf = n as f64;
            let a = self.pos(n) * t.powi(n as i32);
            let b = self.neg(n) * s.powi(n as i32);
            acc[0].add(a);
            acc[0].add(b);
            acc[1].add(nf * a);
            acc[1].add(-nf * b);
            acc[2].add(nf * nf * a);
            acc[2].add(nf * nf * b);
        }
        [acc[0].value(), acc[1].value(), acc[2].value()]
    }
}

/// A Szegő or Bergman kernel of one of the model domains.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEvaluator {
    domain: DomainSpec,
    kind: KernelKind,
    config: NumericConfig,
}

impl KernelEvaluator {
    pub fn new(domain: DomainSpec, kind: KernelKind, config: NumericConfig) -> Result<Self> {
        config.validate()?;
        if let Shape::PlanarCurve(_) = domain.shape() {
            return Err(LabError::Capability(
                "no closed-form kernel for general planar curves; use the quadrature kernels".into(),
            ));
        }
        Ok(Self { domain, kind, config })
    }

    pub fn szego(domain: DomainSpec, config: NumericConfig) -> Result<Self> {
        Self::new(domain, KernelKind::Szego, config)
    }

    pub fn bergman(domain: DomainSpec, config: NumericConfig) -> Result<Self> {
        Self::new(domain, KernelKind::Bergman, config)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn config(&self) -> &NumericConfig {
        &self.config
    }

    /// Copy of this evaluator with a different minimum series cutoff.
    pub fn with_cutoff(&self, series_cutoff: usize) -> Self {
        Self {
            config: NumericConfig {
                series_cutoff,
                ..self.config
            },
            ..self.clone()
        }
    }

    fn series(&self) -> Option<AnnulusSeries> {
        self.domain.inner_radius().map(|r| AnnulusSeries {
            r,
            kind: self.kind,
            scale: match self.kind {
                KernelKind::Szego => 2.0 / self.config.c1,
                KernelKind::Bergman => 1.0,
            },
        })
    }

    /// Ball data `(C, m)` with `K(z,w) = C·(1 − ⟨z,w⟩)^{−m}`.
    fn ball_constants(&self) -> Result<(f64, i32)> {
        let n = self.domain.dimension();
        let pi_n = PI.powi(n as i32);
        Ok(match self.kind {
            KernelKind::Szego => {
                let c = self.config.dimensional_constant(n);
                (factorial(n - 1)? / (c * pi_n), n as i32)
            }
            KernelKind::Bergman => (factorial(n)? / pi_n, n as i32 + 1),
        })
    }

    /// Effective cutoff for the annulus series at modulus `|z·w̄|`.
    pub fn required_cutoff(&self, modulus: f64, extra_power: i32) -> Result<usize> {
        let series = self
            .series()
            .ok_or_else(|| LabError::Capability("series cutoff only applies to annulus kernels".into()))?;
        // the n = 0 term bounds the result from below on the diagonal
        let scale = series.pos(0).min(series.neg(1) * (series.r * series.r / modulus));
        series.cutoff(
            modulus,
            extra_power,
            self.config.series_cutoff,
            scale.max(series.pos(0)),
        )
    }

    /// K(z, w).
    pub fn eval(&self, z: &CVector, w: &CVector) -> Result<Complex64> {
        self.domain.require_interior(z)?;
        self.domain.require_interior(w)?;
        match self.series() {
            Some(series) => {
                let p = z[0] * w[0].conj();
                let first = self.config.series_cutoff;
                let value = series.sum(p, first);
                let needed = series.cutoff(p.norm(), 0, first, value.norm())?;
                if needed > first {
                    return Ok(self.with_cutoff(needed).series().unwrap().sum(p, needed));
                }
                Ok(value)
            }
            None => {
                let (c, m) = self.ball_constants()?;
                let base = Complex64::new(1.0, 0.0) - hdot(z, w);
                Ok(base.powi(-m) * c)
            }
        }
    }

    /// K(z, z) with its first and mixed second derivatives.
    pub fn diagonal_jet(&self, z: &CVector) -> Result<DiagonalJet> {
        self.domain.require_interior(z)?;
        match self.series() {
            Some(series) => {
                let z0 = z[0];
                let t = z0.norm_sqr();
                let first = self.config.series_cutoff;
                let [m0, _, _] = series.moments(t, first);
                let cutoff = series.cutoff(t, 2, first, m0)?;
                let [m0, m1, m2] = series.moments(t, cutoff);
                Ok(DiagonalJet {
                    k0: m0,
                    k1: CVector::from_element(1, Complex64::new(m1, 0.0) / z0),
                    k2: DMatrix::from_element(1, 1, Complex64::new(m2 / t, 0.0)),
                })
            }
            None => {
                let (c, m) = self.ball_constants()?;
                let n = z.len();
                let u = 1.0 - norm_sqr(z);
                let mf = m as f64;
                let k0 = c * u.powi(-m);
                let k1 = z.map(|zj| zj.conj() * (c * mf * u.powi(-m - 1)));
                let lead = c * mf * u.powi(-m - 2);
                let k2 = DMatrix::from_fn(n, n, |j, k| {
                    let delta = if j == k { u } else { 0.0 };
                    (z[j].conj() * z[k] * (mf + 1.0) + delta) * lead
                });
                Ok(DiagonalJet { k0, k1, k2 })
            }
        }
    }
}
