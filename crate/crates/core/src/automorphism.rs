//! Automorphism families of the disk, annulus and ball, with Jacobians and
//! an explicit branch of `(det J)^{n/(n+1)}`, and residual checks of the
//! kernel, metric and SK transformation laws.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::domain::{hdot, norm_sqr, CVector, DomainSpec, NumericConfig, PointDir};
use crate::error::{LabError, Result};
use crate::kernels::KernelEvaluator;
use crate::metrics::{hessian_metric, sk_function, MetricKind};

pub const DEFAULT_SEED: u64 = 0x5EED;

/// Relative tolerance of `branch^{n+1} = detⁿ`.
pub const BRANCH_TOLERANCE: f64 = 1e-12;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq)]
pub enum MapFamily {
    /// `e^{iθ}(z − a)/(1 − āz)`.
    DiskMobius {
        a: Complex64,
        theta: f64,
    },
    DiskRotation {
        theta: f64,
    },
    AnnulusRotation {
        radius: f64,
        theta: f64,
    },
    /// `z ↦ r/z`.
    AnnulusInversion {
        radius: f64,
    },
    /// `U·φ_a` with `φ_a` the involution exchanging `a` and `0`.
    BallAutomorphism {
        a: CVector,
        unitary: DMatrix<Complex64>,
    },
    /// Apply the maps in order.
    Composite(Vec<AutomorphismMap>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutomorphismMap {
    family: MapFamily,
    domain: DomainSpec,
}

fn scalar(z: &CVector) -> Complex64 {
    z[0]
}

fn one_vec(z: Complex64) -> CVector {
    CVector::from_element(1, z)
}

impl AutomorphismMap {
    pub fn disk_mobius(a: Complex64, theta: f64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(LabError::Argument(format!(
                "Möbius parameter must lie in the disk, got {a}"
            )));
        }
        Ok(Self {
            family: MapFamily::DiskMobius { a, theta },
            domain: DomainSpec::unit_disk(),
        })
    }

    pub fn disk_rotation(theta: f64) -> Self {
        Self {
            family: MapFamily::DiskRotation { theta },
            domain: DomainSpec::unit_disk(),
        }
    }

    pub fn annulus_rotation(radius: f64, theta: f64) -> Result<Self> {
        Ok(Self {
            family: MapFamily::AnnulusRotation { radius, theta },
            domain: DomainSpec::annulus(radius)?,
        })
    }

    pub fn annulus_inversion(radius: f64) -> Result<Self> {
        Ok(Self {
            family: MapFamily::AnnulusInversion { radius },
            domain: DomainSpec::annulus(radius)?,
        })
    }

    /// `U·φ_a` on the ball of dimension `a.len()`; `unitary` must be unitary.
    pub fn ball(a: CVector, unitary: DMatrix<Complex64>) -> Result<Self> {
        let n = a.len();
        let domain = DomainSpec::unit_ball(n)?;
        if unitary.nrows() != n || unitary.ncols() != n {
            return Err(LabError::DimensionMismatch {
                expected: n,
                got: unitary.nrows(),
            });
        }
        if !(norm_sqr(&a) < 1.0) {
            return Err(LabError::Argument(
                "ball automorphism centre must lie in the ball".into(),
            ));
        }
        let defect = (unitary.adjoint() * &unitary - DMatrix::identity(n, n)).camax();
        if defect > 1e-12 {
            return Err(LabError::Argument(format!("matrix is not unitary (defect {defect:e})")));
        }
        Ok(Self {
            family: MapFamily::BallAutomorphism { a, unitary },
            domain,
        })
    }

    pub fn identity(domain: DomainSpec) -> Result<Self> {
        match domain.shape() {
            crate::domain::Shape::UnitDisk => Ok(Self::disk_rotation(0.0)),
            crate::domain::Shape::Annulus { inner_radius } => Self::annulus_rotation(*inner_radius, 0.0),
            crate::domain::Shape::UnitBall { dimension } => {
                // φ_0 = −z, so U = −I gives the identity
                let n = *dimension;
                Self::ball(CVector::zeros(n), DMatrix::identity(n, n) * -ONE)
            }
            crate::domain::Shape::PlanarCurve(_) => Err(LabError::Capability(
                "no automorphism families for general curves".into(),
            )),
        }
    }

    /// `second ∘ first`.
    pub fn compose(first: &AutomorphismMap, second: &AutomorphismMap) -> Result<Self> {
        if first.domain != second.domain {
            return Err(LabError::Argument(format!(
                "cannot compose maps of {} and {}",
                first.domain, second.domain
            )));
        }
        let mut parts = Vec::new();
        for m in [first, second] {
            match &m.family {
                MapFamily::Composite(inner) => parts.extend(inner.iter().cloned()),
                _ => parts.push(m.clone()),
            }
        }
        Ok(Self {
            family: MapFamily::Composite(parts),
            domain: first.domain.clone(),
        })
    }

    pub fn family(&self) -> &MapFamily {
        &self.family
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn ball_parts(a: &CVector) -> (DMatrix<Complex64>, f64) {
        let n = a.len();
        let aa = norm_sqr(a);
        let s = (1.0 - aa).sqrt();
        let mut m = DMatrix::identity(n, n) * Complex64::new(s, 0.0);
        if aa > 0.0 {
            m += (a * a.adjoint()) * Complex64::new((1.0 - s) / aa, 0.0);
        }
        (m, aa)
    }

    fn phi_a(a: &CVector, z: &CVector) -> CVector {
        let (m, _) = Self::ball_parts(a);
        let d = ONE - hdot(z, a);
        (a - &m * z) / d
    }

    pub fn forward(&self, z: &CVector) -> Result<CVector> {
        self.check_len(z)?;
        Ok(match &self.family {
            MapFamily::DiskMobius { a, theta } => {
                let w = scalar(z);
                one_vec(Complex64::from_polar(1.0, *theta) * (w - a) / (ONE - a.conj() * w))
            }
            MapFamily::DiskRotation { theta } | MapFamily::AnnulusRotation { theta, .. } => {
                one_vec(Complex64::from_polar(1.0, *theta) * scalar(z))
            }
            MapFamily::AnnulusInversion { radius } => one_vec(Complex64::new(*radius, 0.0) / scalar(z)),
            MapFamily::BallAutomorphism { a, unitary } => unitary * Self::phi_a(a, z),
            MapFamily::Composite(parts) => {
                let mut w = z.clone();
                for p in parts {
                    w = p.forward(&w)?;
                }
                w
            }
        })
    }

    pub fn inverse(&self, w: &CVector) -> Result<CVector> {
        self.check_len(w)?;
        Ok(match &self.family {
            MapFamily::DiskMobius { a, theta } => {
                let u = Complex64::from_polar(1.0, -*theta) * scalar(w);
                one_vec((u + a) / (ONE + a.conj() * u))
            }
            MapFamily::DiskRotation { theta } | MapFamily::AnnulusRotation { theta, .. } => {
                one_vec(Complex64::from_polar(1.0, -*theta) * scalar(w))
            }
            MapFamily::AnnulusInversion { radius } => one_vec(Complex64::new(*radius, 0.0) / scalar(w)),
            MapFamily::BallAutomorphism { a, unitary } => Self::phi_a(a, &(unitary.adjoint() * w)),
            MapFamily::Composite(parts) => {
                let mut z = w.clone();
                for p in parts.iter().rev() {
                    z = p.inverse(&z)?;
                }
                z
            }
        })
    }

    /// Complex Jacobian matrix `J_ℂΦ(z)`.
    pub fn jacobian(&self, z: &CVector) -> Result<DMatrix<Complex64>> {
        self.check_len(z)?;
        let one_by_one = |v: Complex64| DMatrix::from_element(1, 1, v);
        Ok(match &self.family {
            MapFamily::DiskMobius { a, theta } => {
                let d = ONE - a.conj() * scalar(z);
                one_by_one(Complex64::from_polar(1.0, *theta) * (1.0 - a.norm_sqr()) / (d * d))
            }
            MapFamily::DiskRotation { theta } | MapFamily::AnnulusRotation { theta, .. } => {
                one_by_one(Complex64::from_polar(1.0, *theta))
            }
            MapFamily::AnnulusInversion { radius } => {
                let w = scalar(z);
                one_by_one(-*radius / (w * w))
            }
            MapFamily::BallAutomorphism { a, unitary } => {
                let (m, _) = Self::ball_parts(a);
                let d = ONE - hdot(z, a);
                let num = a - &m * z;
                // ∂/∂z of (a − Mz)/(1 − a*z)
                let j = -m / d + (num * a.adjoint()) / (d * d);
                unitary * j
            }
            MapFamily::Composite(parts) => {
                let n = z.len();
                let mut j = DMatrix::identity(n, n);
                let mut w = z.clone();
                for p in parts {
                    j = p.jacobian(&w)? * j;
                    w = p.forward(&w)?;
                }
                j
            }
        })
    }

    /// `det J_ℂΦ(z)` from the family's closed form.
    pub fn jac_det(&self, z: &CVector) -> Result<Complex64> {
        self.check_len(z)?;
        Ok(match &self.family {
            MapFamily::BallAutomorphism { a, unitary } => {
                let n = a.len() as i32;
                let (_, aa) = Self::ball_parts(a);
                let d = ONE - hdot(z, a);
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                unitary.determinant() * sign * (1.0 - aa).powf(0.5 * (n + 1) as f64) / d.powi(n + 1)
            }
            MapFamily::Composite(parts) => {
                let mut det = ONE;
                let mut w = z.clone();
                for p in parts {
                    det *= p.jac_det(&w)?;
                    w = p.forward(&w)?;
                }
                det
            }
            _ => self.jacobian(z)?[(0, 0)],
        })
    }

    /// The fixed holomorphic branch of `(det J_ℂΦ(z))^{n/(n+1)}`.
    pub fn branch_power(&self, z: &CVector) -> Result<Complex64> {
        self.check_len(z)?;
        Ok(match &self.family {
            MapFamily::DiskMobius { a, theta } => {
                Complex64::from_polar(1.0, 0.5 * theta) * (1.0 - a.norm_sqr()).sqrt() / (ONE - a.conj() * scalar(z))
            }
            MapFamily::DiskRotation { theta } | MapFamily::AnnulusRotation { theta, .. } => {
                Complex64::from_polar(1.0, 0.5 * theta)
            }
            // (−r/z²)^{1/2} = i√r/z
            MapFamily::AnnulusInversion { radius } => I * radius.sqrt() / scalar(z),
            MapFamily::BallAutomorphism { a, unitary } => {
                let n = a.len() as i32;
                let nf = n as f64;
                let (_, aa) = Self::ball_parts(a);
                let d = ONE - hdot(z, a);
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let omega = (unitary.determinant() * sign).powf(nf / (nf + 1.0));
                omega * (1.0 - aa).powf(0.5 * nf) / d.powi(n)
            }
            MapFamily::Composite(parts) => {
                let mut b = ONE;
                let mut w = z.clone();
                for p in parts {
                    b *= p.branch_power(&w)?;
                    w = p.forward(&w)?;
                }
                b
            }
        })
    }

    /// `|branch^{n+1} − detⁿ| / |detⁿ|`.
    pub fn branch_defect(&self, z: &CVector) -> Result<f64> {
        let n = z.len() as i32;
        let lhs = self.branch_power(z)?.powi(n + 1);
        let rhs = self.jac_det(z)?.powi(n);
        Ok((lhs - rhs).norm() / rhs.norm())
    }

    fn require_branch(&self, z: &CVector) -> Result<()> {
        let defect = self.branch_defect(z)?;
        if !(defect <= BRANCH_TOLERANCE) {
            return Err(LabError::Branch(format!(
                "branch power inconsistent at z (defect {defect:e})"
            )));
        }
        Ok(())
    }

    fn check_len(&self, z: &CVector) -> Result<()> {
        let n = self.domain.dimension();
        if z.len() != n {
            return Err(LabError::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for AutomorphismMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            MapFamily::DiskMobius { a, theta } => write!(f, "disk-mobius(a={a}, theta={theta})"),
            MapFamily::DiskRotation { theta } => write!(f, "disk-rotation(theta={theta})"),
            MapFamily::AnnulusRotation { radius, theta } => write!(f, "annulus-rotation(r={radius}, theta={theta})"),
            MapFamily::AnnulusInversion { radius } => write!(f, "annulus-inversion(r={radius})"),
            MapFamily::BallAutomorphism { a, .. } => {
                write!(f, "ball-automorphism(n={}, |a|={})", a.len(), norm_sqr(a).sqrt())
            }
            MapFamily::Composite(parts) => {
                let names: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "composite[{}]", names.join(" then "))
            }
        }
    }
}

fn relative(lhs: Complex64, rhs: Complex64) -> f64 {
    let scale = lhs.norm();
    if scale == 0.0 {
        rhs.norm()
    } else {
        (lhs - rhs).norm() / scale
    }
}

/// `S(z,w)` against `S(Φz,Φw)·b(z)·conj(b(w))`, with `b` the branch power.
pub fn check_szego_law(map: &AutomorphismMap, z: &CVector, w: &CVector, config: NumericConfig) -> Result<f64> {
    map.require_branch(z)?;
    map.require_branch(w)?;
    let kernel = KernelEvaluator::szego(map.domain.clone(), config)?;
    let lhs = kernel.eval(z, w)?;
    let rhs = kernel.eval(&map.forward(z)?, &map.forward(w)?)? * map.branch_power(z)? * map.branch_power(w)?.conj();
    Ok(relative(lhs, rhs))
}

/// `K(z,w)` against `K(Φz,Φw)·det J(z)·conj(det J(w))`.
pub fn check_bergman_law(map: &AutomorphismMap, z: &CVector, w: &CVector, config: NumericConfig) -> Result<f64> {
    let kernel = KernelEvaluator::bergman(map.domain.clone(), config)?;
    let lhs = kernel.eval(z, w)?;
    let rhs = kernel.eval(&map.forward(z)?, &map.forward(w)?)? * map.jac_det(z)? * map.jac_det(w)?.conj();
    Ok(relative(lhs, rhs))
}

/// `F(z,ξ)` against `F(Φz, J(z)ξ)`.
pub fn check_metric_invariance(
    map: &AutomorphismMap,
    at: &PointDir,
    which: MetricKind,
    config: NumericConfig,
) -> Result<f64> {
    let image = PointDir::new(map.forward(&at.z)?, map.jacobian(&at.z)? * &at.xi)?;
    let (lhs, rhs) = match which {
        MetricKind::Caratheodory => (
            crate::metrics::caratheodory(at, &map.domain)?,
            crate::metrics::caratheodory(&image, &map.domain)?,
        ),
        MetricKind::Szego | MetricKind::Bergman => {
            let kernel = match which {
                MetricKind::Szego => KernelEvaluator::szego(map.domain.clone(), config)?,
                _ => KernelEvaluator::bergman(map.domain.clone(), config)?,
            };
            (hessian_metric(&kernel, at)?, hessian_metric(&kernel, &image)?)
        }
    };
    Ok((lhs.value() - rhs.value()).abs() / lhs.value())
}

/// `SK(z,w)` against `SK(Φz,Φw)`.
pub fn check_sk_invariance(map: &AutomorphismMap, z: &CVector, w: &CVector, config: NumericConfig) -> Result<f64> {
    let lhs = sk_function(&map.domain, z, w, config)?;
    let rhs = sk_function(&map.domain, &map.forward(z)?, &map.forward(w)?, config)?;
    Ok(relative(lhs, rhs))
}

/// `|det(J₂(Φ₁z)·J₁(z)) − det J₂(Φ₁z)·det J₁(z)|` relative, together with the
/// branch defect of the composite.
pub fn cocycle_residual(first: &AutomorphismMap, second: &AutomorphismMap, z: &CVector) -> Result<f64> {
    let composite = AutomorphismMap::compose(first, second)?;
    let via_matrix = composite.jacobian(z)?.determinant();
    let via_factors = composite.jac_det(z)?;
    let mut defect = relative(via_factors, via_matrix);
    defect = defect.max(composite.branch_defect(z)?);
    Ok(defect)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    DiskMobius,
    DiskRotation,
    AnnulusRotation,
    AnnulusInversion,
    BallAutomorphism,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::DiskMobius,
        Family::DiskRotation,
        Family::AnnulusRotation,
        Family::AnnulusInversion,
        Family::BallAutomorphism,
    ];

    /// Residual tolerance: closed-form kernels vs series kernels.
    pub fn tolerance(self) -> f64 {
        match self {
            Family::AnnulusRotation | Family::AnnulusInversion => 1e-8,
            _ => 1e-10,
        }
    }

    fn index(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::DiskMobius => "disk-mobius",
            Family::DiskRotation => "disk-rotation",
            Family::AnnulusRotation => "annulus-rotation",
            Family::AnnulusInversion => "annulus-inversion",
            Family::BallAutomorphism => "ball-automorphism",
        })
    }
}

/// Which law a sweep exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Law {
    Szego,
    Bergman,
    Metric,
    Sk,
    Pullback,
}

impl Law {
    pub const ALL: [Law; 5] = [Law::Szego, Law::Bergman, Law::Metric, Law::Sk, Law::Pullback];
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Law::Szego => "szego",
            Law::Bergman => "bergman",
            Law::Metric => "metric",
            Law::Sk => "sk",
            Law::Pullback => "pullback",
        })
    }
}

impl std::str::FromStr for Law {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "szego" => Ok(Law::Szego),
            "bergman" => Ok(Law::Bergman),
            "metric" => Ok(Law::Metric),
            "sk" => Ok(Law::Sk),
            "pullback" => Ok(Law::Pullback),
            _ => Err(LabError::Argument(format!("unknown law '{s}'"))),
        }
    }
}

/// One random draw: a map with two interior points and a direction.
#[derive(Debug, Clone)]
pub struct Draw {
    pub map: AutomorphismMap,
    pub z: CVector,
    pub w: CVector,
    pub xi: CVector,
}

/// Independent generator for draw `index` of `family` under `seed`.
pub fn draw_rng(seed: u64, family: Family, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((family.index() << 32) | index);
    rng
}

fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn point_in_ball(rng: &mut ChaCha8Rng, n: usize, max_radius: f64) -> CVector {
    let g = CVector::from_fn(n, |_, _| gaussian_complex(rng));
    let radius = max_radius * rng.gen_range(0.0f64..1.0).powf(1.0 / (2 * n) as f64);
    &g * Complex64::new(radius / norm_sqr(&g).sqrt(), 0.0)
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the phases so the distribution is Haar
    let phases = DMatrix::from_diagonal(&CVector::from_fn(n, |j, _| {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            ONE
        }
    }));
    q * phases
}

fn annulus_point(rng: &mut ChaCha8Rng, r: f64) -> CVector {
    let band = 0.1 * (1.0 - r);
    let modulus = rng.gen_range(r + band..1.0 - band);
    one_vec(Complex64::from_polar(
        modulus,
        rng.gen_range(0.0..std::f64::consts::TAU),
    ))
}

/// Deterministic draw `index` of `family`.
pub fn draw(seed: u64, family: Family, index: u64) -> Result<Draw> {
    let mut rng = draw_rng(seed, family, index);
    let tau = std::f64::consts::TAU;
    let unit_dir = |rng: &mut ChaCha8Rng, n: usize| {
        let g = CVector::from_fn(n, |_, _| gaussian_complex(rng));
        &g / Complex64::new(norm_sqr(&g).sqrt(), 0.0)
    };
    Ok(match family {
        Family::DiskMobius | Family::DiskRotation => {
            let map = if family == Family::DiskMobius {
                let a = point_in_ball(&mut rng, 1, 0.7)[0];
                AutomorphismMap::disk_mobius(a, rng.gen_range(0.0..tau))?
            } else {
                AutomorphismMap::disk_rotation(rng.gen_range(0.0..tau))
            };
            let z = point_in_ball(&mut rng, 1, 0.7);
            let w = point_in_ball(&mut rng, 1, 0.7);
            Draw {
                map,
                z,
                w,
                xi: unit_dir(&mut rng, 1),
            }
        }
        Family::AnnulusRotation | Family::AnnulusInversion => {
            let r = rng.gen_range(0.05..0.5);
            let map = if family == Family::AnnulusRotation {
                AutomorphismMap::annulus_rotation(r, rng.gen_range(0.0..tau))?
            } else {
                AutomorphismMap::annulus_inversion(r)?
            };
            let z = annulus_point(&mut rng, r);
            let w = annulus_point(&mut rng, r);
            Draw {
                map,
                z,
                w,
                xi: unit_dir(&mut rng, 1),
            }
        }
        Family::BallAutomorphism => {
            let n = rng.gen_range(1..=3usize);
            let a = point_in_ball(&mut rng, n, 0.6);
            let u = random_unitary(&mut rng, n);
            let map = AutomorphismMap::ball(a, u)?;
            let z = point_in_ball(&mut rng, n, 0.6);
            let w = point_in_ball(&mut rng, n, 0.6);
            Draw {
                map,
                z,
                w,
                xi: unit_dir(&mut rng, n),
            }
        }
    })
}

/// Largest residual of `law` over `count` seeded draws of `family`.
pub fn sweep(law: Law, family: Family, seed: u64, count: u64, config: NumericConfig) -> Result<f64> {
    let mut worst = 0.0f64;
    for index in 0..count {
        let d = draw(seed, family, index)?;
        let residual = match law {
            Law::Szego => check_szego_law(&d.map, &d.z, &d.w, config)?,
            Law::Bergman => check_bergman_law(&d.map, &d.z, &d.w, config)?,
            Law::Metric => {
                let at = PointDir::new(d.z.clone(), d.xi.clone())?;
                check_metric_invariance(&d.map, &at, MetricKind::Szego, config)?.max(check_metric_invariance(
                    &d.map,
                    &at,
                    MetricKind::Bergman,
                    config,
                )?)
            }
            Law::Sk => check_sk_invariance(&d.map, &d.z, &d.w, config)?,
            Law::Pullback => {
                if d.map.domain.dimension() > 2 {
                    continue;
                }
                let f = |z: &CVector| z.iter().map(|c| c.powu(2)).sum::<Complex64>() + ONE;
                crate::fefferman::pullback_check(&d.map, &f, crate::fefferman::DEFAULT_PULLBACK_NODES, config)?
            }
        };
        worst = worst.max(residual);
    }
    Ok(worst)
}
