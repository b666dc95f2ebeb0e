//! Metric asymptotics on thin annuli `Ω_r` as `r → 0`, probed at `z = r^q`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::domain::{DomainSpec, NumericConfig, PointDir};
use crate::error::{LabError, Result};
use crate::kernels::{KernelEvaluator, KernelKind};
use crate::metrics::hessian_metric;

/// Smallest admissible `r`; below this the series lose double precision.
pub const MIN_RADIUS: f64 = 1e-12;

/// Evaluation point exponent: `z = r^{1/2}` or `z = r^{1/5}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Probe {
    Sqrt,
    FifthRoot,
}

impl Probe {
    pub fn exponent(self) -> f64 {
        match self {
            Probe::Sqrt => 0.5,
            Probe::FifthRoot => 0.2,
        }
    }

    pub fn point(self, r: f64) -> f64 {
        match self {
            Probe::Sqrt => r.sqrt(),
            Probe::FifthRoot => r.powf(0.2),
        }
    }

    /// Decades `k` of the default sequence `r = 10^{−k}`.
    pub fn default_decades(self) -> usize {
        match self {
            Probe::Sqrt => 6,
            Probe::FifthRoot => 12,
        }
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Probe::Sqrt => "sqrt",
            Probe::FifthRoot => "fifth",
        })
    }
}

impl FromStr for Probe {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(Probe::Sqrt),
            "fifth" | "fifth-root" => Ok(Probe::FifthRoot),
            _ => Err(LabError::Argument(format!(
                "unknown probe '{s}' (expected sqrt or fifth)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// `F / √log(1/r)`
    DivSqrtLog,
    /// `√r · F`
    MulSqrtR,
    Raw,
}

impl Normalization {
    pub fn apply(self, r: f64, value: f64) -> f64 {
        match self {
            Normalization::DivSqrtLog => value / (1.0 / r).ln().sqrt(),
            Normalization::MulSqrtR => value * r.sqrt(),
            Normalization::Raw => value,
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::DivSqrtLog => "div-sqrt-log",
            Normalization::MulSqrtR => "mul-sqrt-r",
            Normalization::Raw => "raw",
        })
    }
}

/// `r = 10^{−k}` for `k = 1..=decades`.
pub fn decade_sequence(decades: usize) -> Vec<f64> {
    (1..=decades).map(|k| 10f64.powi(-(k as i32))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitExperiment {
    pub kind: KernelKind,
    pub probe: Probe,
    pub normalization: Normalization,
    pub r_sequence: Vec<f64>,
    pub expected_limit: f64,
}

impl LimitExperiment {
    pub fn new(
        kind: KernelKind,
        probe: Probe,
        normalization: Normalization,
        r_sequence: Vec<f64>,
        expected_limit: f64,
    ) -> Result<Self> {
        if r_sequence.is_empty() {
            return Err(LabError::Argument("empty r sequence".into()));
        }
        if r_sequence.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(LabError::Argument("r sequence must be strictly decreasing".into()));
        }
        let last = *r_sequence.last().unwrap();
        if !(r_sequence[0] < 1.0 && last >= MIN_RADIUS) {
            return Err(LabError::Argument(format!(
                "r values must lie in [{MIN_RADIUS}, 1), got down to {last}"
            )));
        }
        Ok(Self {
            kind,
            probe,
            normalization,
            r_sequence,
            expected_limit,
        })
    }

    /// The four limits: `F_B(√r)/√log(1/r) → 2`, `√r·F_S(√r) → 1/2`,
    /// `F_B(r^{1/5})/√log(1/r) → √2`, `F_S(r^{1/5}) → 1`.
    pub fn standard(kind: KernelKind, probe: Probe, decades: usize) -> Result<Self> {
        let (normalization, expected) = match (kind, probe) {
            (KernelKind::Bergman, Probe::Sqrt) => (Normalization::DivSqrtLog, 2.0),
            (KernelKind::Szego, Probe::Sqrt) => (Normalization::MulSqrtR, 0.5),
            (KernelKind::Bergman, Probe::FifthRoot) => (Normalization::DivSqrtLog, 2f64.sqrt()),
            (KernelKind::Szego, Probe::FifthRoot) => (Normalization::Raw, 1.0),
        };
        if decades == 0 || decades > 12 {
            return Err(LabError::Argument(format!("decades must lie in 1..=12, got {decades}")));
        }
        Self::new(kind, probe, normalization, decade_sequence(decades), expected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    pub r: f64,
    pub z: f64,
    pub raw: f64,
    pub normalized: f64,
    pub expected: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitTable {
    pub experiment: LimitExperiment,
    pub rows: Vec<LimitRow>,
    /// Aitken Δ² extrapolation from the last three rows.
    pub extrapolated: Option<f64>,
    /// Fitted contraction ratio of successive differences over the last three rows.
    pub rate: Option<f64>,
}

/// Aitken Δ² limit of three successive terms, with the ratio of differences.
pub fn aitken(x0: f64, x1: f64, x2: f64) -> Option<(f64, f64)> {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let denom = d2 - d1;
    if denom == 0.0 || d1 == 0.0 {
        return None;
    }
    Some((x2 - d2 * d2 / denom, d2 / d1))
}

impl LimitTable {
    pub fn last(&self) -> &LimitRow {
        self.rows.last().expect("tables have at least one row")
    }

    pub fn extrapolation_error(&self) -> Option<f64> {
        self.extrapolated.map(|v| (v - self.experiment.expected_limit).abs())
    }

    /// Differences between successive rows shrink over the last three decades.
    pub fn cauchy_tail(&self) -> bool {
        let n = self.rows.len();
        if n < 4 {
            return false;
        }
        let d: Vec<f64> = self.rows[n - 4..]
            .windows(2)
            .map(|w| (w[1].normalized - w[0].normalized).abs())
            .collect();
        d[1] < d[0] && d[2] < d[1]
    }
}

fn metric_at(kind: KernelKind, r: f64, z: f64, config: NumericConfig) -> Result<f64> {
    let domain = DomainSpec::annulus(r)?;
    let kernel = KernelEvaluator::new(domain, kind, config)?;
    let at = PointDir::planar(Complex64::new(z, 0.0), Complex64::new(1.0, 0.0));
    Ok(hessian_metric(&kernel, &at)?.value())
}

pub fn run_limit(experiment: &LimitExperiment, config: NumericConfig) -> Result<LimitTable> {
    let mut rows: Vec<LimitRow> = Vec::with_capacity(experiment.r_sequence.len());
    for &r in &experiment.r_sequence {
        let z = experiment.probe.point(r);
        let raw = metric_at(experiment.kind, r, z, config).map_err(|err| match err {
            LabError::Precision(msg) => LabError::Precision(match rows.last() {
                Some(row) => format!("{msg}; last trustworthy row r={}", row.r),
                None => format!("{msg}; no trustworthy rows"),
            }),
            other => other,
        })?;
        let normalized = experiment.normalization.apply(r, raw);
        rows.push(LimitRow {
            r,
            z,
            raw,
            normalized,
            expected: experiment.expected_limit,
            abs_error: (normalized - experiment.expected_limit).abs(),
        });
    }
    let fit = match rows.len() {
        n if n >= 3 => aitken(rows[n - 3].normalized, rows[n - 2].normalized, rows[n - 1].normalized),
        _ => None,
    };
    Ok(LimitTable {
        experiment: experiment.clone(),
        rows,
        extrapolated: fit.map(|f| f.0),
        rate: fit.map(|f| f.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub r: f64,
    pub z: f64,
    pub ratio: f64,
}

/// `F_S/F_B` at `z = r^q` along the sequence.
pub fn run_ratio(probe: Probe, r_sequence: &[f64], config: NumericConfig) -> Result<Vec<RatioRow>> {
    r_sequence
        .iter()
        .map(|&r| {
            let z = probe.point(r);
            let fs = metric_at(KernelKind::Szego, r, z, config)?;
            let fb = metric_at(KernelKind::Bergman, r, z, config)?;
            let ratio = fs / fb;
            if !(ratio.is_finite() && ratio > 0.0) {
                return Err(LabError::Consistency(format!("ratio {ratio} at r={r}")));
            }
            Ok(RatioRow { r, z, ratio })
        })
        .collect()
}

/// Computed diagonal jet sums against their leading expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCheck {
    /// 0, 1 or 2: value, `∂_z`, `∂_z∂_z̄` of the diagonal kernel.
    pub order: usize,
    pub computed: f64,
    pub leading: f64,
    /// Size of the remainder term.
    pub remainder_scale: f64,
}

impl ExpansionCheck {
    pub fn residual(&self) -> f64 {
        (self.computed - self.leading).abs()
    }
}

/// Multiple of the remainder scale allowed between a sum and its expansion.
pub const REMAINDER_CONSTANT: f64 = 25.0;

/// `2π·α_j` (Szegő) or `π·β_j` (Bergman) at `z = r^q`, with arclength measure on
/// the boundary, next to the two leading terms of their small-`r` expansions.
pub fn expansion_checks(kind: KernelKind, probe: Probe, r: f64) -> Result<[ExpansionCheck; 3]> {
    let config = NumericConfig {
        c1: 2.0,
        ..NumericConfig::default()
    };
    let domain = DomainSpec::annulus(r)?;
    let z = probe.point(r);
    let jet = KernelEvaluator::new(domain, kind, config)?.diagonal_jet(&crate::domain::rvec(&[z]))?;
    let factor = match kind {
        KernelKind::Szego => 2.0 * std::f64::consts::PI,
        KernelKind::Bergman => std::f64::consts::PI,
    };
    let computed = [factor * jet.k0, factor * jet.k1[0].re, factor * jet.k2[(0, 0)].re];
    let l = (1.0 / r).ln();
    let s = r.sqrt();
    let p = |e: f64| r.powf(e);
    let (leading, scale): ([f64; 3], [f64; 3]) = match (kind, probe) {
        (KernelKind::Szego, Probe::Sqrt) => (
            [
                2.0 / (1.0 + r) + 2.0 * r / (1.0 + r.powi(3)),
                -1.0 / (s * (1.0 + r)) - s / (1.0 + r.powi(3)),
                1.0 / (r * (1.0 + r)) + 5.0 / (1.0 + r.powi(3)),
            ],
            [r * r, p(1.5), r],
        ),
        (KernelKind::Szego, Probe::FifthRoot) => (
            [
                1.0 / (1.0 + r) + p(0.4) / (1.0 + r.powi(3)),
                p(0.2) / (1.0 + r.powi(3)) - p(0.4) / (1.0 + r),
                1.0 / (1.0 + r.powi(3)) + p(0.2) / (1.0 + r),
            ],
            [p(0.6), p(0.6), p(0.4)],
        ),
        (KernelKind::Bergman, Probe::Sqrt) => (
            [
                1.0 / (2.0 * r * l) + 2.0 / (1.0 - r * r),
                -1.0 / (2.0 * p(1.5) * l) - 2.0 / (s * (1.0 - r * r)),
                1.0 / (2.0 * r * r * l) + 4.0 / (r * (1.0 - r * r)),
            ],
            [r, s, 1.0],
        ),
        (KernelKind::Bergman, Probe::FifthRoot) => (
            [
                1.0 / (2.0 * p(0.4) * l) + 1.0 / (1.0 - r * r),
                -1.0 / (2.0 * p(0.6) * l) + 2.0 * p(0.2) / (1.0 - r.powi(4)),
                1.0 / (2.0 * p(0.8) * l) + 2.0 / (1.0 - r.powi(4)),
            ],
            [p(0.4), p(0.6), p(0.4)],
        ),
    };
    Ok([0, 1, 2].map(|j| ExpansionCheck {
        order: j,
        computed: computed[j],
        leading: leading[j],
        remainder_scale: scale[j],
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> NumericConfig {
        NumericConfig::default()
    }

    // high-precision reference rows, r = 10^{-k}
    const FIFTH_BERGMAN: [f64; 12] = [
        1.7151869493326064,
        0.9959088854061104,
        0.9504559974837092,
        1.0617782171611532,
        1.1943114265655543,
        1.2940006980821739,
        1.3539207033515013,
        1.385558227617954,
        1.401045221606942,
        1.4082932496272949,
        1.4115919267599046,
        1.413065574332549,
    ];
    const FIFTH_SZEGO: [f64; 12] = [
        1.8276838186880615,
        1.3336037032708372,
        1.1763882636144736,
        1.099793984880905,
        1.058355020924265,
        1.034927560494902,
        1.0212654580172131,
        1.0131047272552287,
        1.0081425362450815,
        1.0050870659326139,
        1.0031895117444771,
        1.0020043761489232,
    ];
    const SQRT_BERGMAN: [f64; 6] = [
        2.0059746036923896,
        1.909480904176428,
        1.9807789131816684,
        1.9971239293303822,
        1.9996196155582138,
        1.9999527399285277,
    ];
    const SQRT_SZEGO: [f64; 6] = [
        0.7202400224004002,
        0.5202000204000002,
        0.502002000002004,
        0.5002000200000002,
        0.5000200002,
        0.500002000002,
    ];

    fn assert_rows(kind: KernelKind, probe: Probe, reference: &[f64]) {
        let e = LimitExperiment::standard(kind, probe, reference.len()).unwrap();
        let t = run_limit(&e, cfg()).unwrap();
        for (row, want) in t.rows.iter().zip(reference) {
            assert!(
                (row.normalized - want).abs() <= 1e-11 * want,
                "r={}: {} vs {want}",
                row.r,
                row.normalized
            );
        }
    }

    #[test]
    fn rows_match_high_precision_reference() {
        assert_rows(KernelKind::Bergman, Probe::FifthRoot, &FIFTH_BERGMAN);
        assert_rows(KernelKind::Szego, Probe::FifthRoot, &FIFTH_SZEGO);
        assert_rows(KernelKind::Bergman, Probe::Sqrt, &SQRT_BERGMAN);
        assert_rows(KernelKind::Szego, Probe::Sqrt, &SQRT_SZEGO);
    }

    #[test]
    fn sqrt_probe_limits() {
        for kind in [KernelKind::Bergman, KernelKind::Szego] {
            let t = run_limit(&LimitExperiment::standard(kind, Probe::Sqrt, 6).unwrap(), cfg()).unwrap();
            assert!(t.last().abs_error <= 5e-3);
            assert!(t.extrapolation_error().unwrap() <= 1e-4);
            assert!(t.cauchy_tail());
        }
    }

    #[test]
    fn fifth_root_probe_converges_slowly() {
        let short = run_limit(
            &LimitExperiment::standard(KernelKind::Bergman, Probe::FifthRoot, 8).unwrap(),
            cfg(),
        )
        .unwrap();
        assert!(short.last().abs_error > 1e-2);
        for kind in [KernelKind::Bergman, KernelKind::Szego] {
            let t = run_limit(&LimitExperiment::standard(kind, Probe::FifthRoot, 12).unwrap(), cfg()).unwrap();
            assert!(t.last().abs_error <= 1e-2);
            assert!(t.extrapolation_error().unwrap() <= 1e-4);
            assert!(t.cauchy_tail());
        }
    }

    #[test]
    fn aitken_recovers_geometric_limit() {
        let (limit, rate) = aitken(3.0 + 0.5, 3.0 + 0.25, 3.0 + 0.125).unwrap();
        assert!((limit - 3.0).abs() < 1e-15);
        assert!((rate - 0.5).abs() < 1e-15);
        assert!(aitken(1.0, 1.0, 1.0).is_none());
    }

    #[test]
    fn ratio_directions() {
        let rs = decade_sequence(6)[1..].to_vec();
        let up = run_ratio(Probe::Sqrt, &rs, cfg()).unwrap();
        assert!(up.windows(2).all(|w| w[1].ratio > w[0].ratio));
        assert!(up.last().unwrap().ratio / up[0].ratio >= 10.0);
        let down = run_ratio(Probe::FifthRoot, &rs, cfg()).unwrap();
        assert!(down.windows(2).all(|w| w[1].ratio < w[0].ratio));
        let single = run_ratio(Probe::Sqrt, &[0.3], cfg()).unwrap();
        assert!(single[0].ratio.is_finite() && single[0].ratio > 0.0);
    }

    #[test]
    fn expansions_hold_to_remainder_order() {
        for r in [1e-4, 1e-6] {
            for kind in [KernelKind::Szego, KernelKind::Bergman] {
                for probe in [Probe::Sqrt, Probe::FifthRoot] {
                    for c in expansion_checks(kind, probe, r).unwrap() {
                        assert!(
                            c.residual() <= REMAINDER_CONSTANT * c.remainder_scale,
                            "{kind} {probe} j={} r={r}: {} vs {}",
                            c.order,
                            c.computed,
                            c.leading
                        );
                    }
                }
            }
        }
        let a0 = expansion_checks(KernelKind::Szego, Probe::Sqrt, 1e-4).unwrap()[0];
        assert!(a0.residual() <= 1e-6);
    }

    #[test]
    fn rejects_bad_sequences() {
        let mk = |rs: Vec<f64>| LimitExperiment::new(KernelKind::Szego, Probe::Sqrt, Normalization::Raw, rs, 1.0);
        assert!(mk(vec![]).is_err());
        assert!(mk(vec![0.1, 0.2]).is_err());
        assert!(mk(vec![0.1, 1e-13]).is_err());
        assert!(mk(vec![1.5, 0.1]).is_err());
        assert!(LimitExperiment::standard(KernelKind::Szego, Probe::Sqrt, 13).is_err());
    }
}
