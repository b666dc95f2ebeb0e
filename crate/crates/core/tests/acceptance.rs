//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use szego_lab::asymptotics::{decade_sequence, run_limit, run_ratio, LimitExperiment, Probe};
use szego_lab::automorphism::{cocycle_residual, draw, sweep, AutomorphismMap, Family, Law, DEFAULT_SEED};
use szego_lab::domain::{cvec, norm_sqr, rvec, CVector, DomainSpec, NumericConfig, PointDir};
use szego_lab::fefferman::{density, pullback_check, DefiningFunctionProbe, HFactor, ProbeMode};
use szego_lab::kernels::{KernelEvaluator, KernelKind};
use szego_lab::metrics::{
    ball_sk_constant, caratheodory, e_quantity, e_quantity_log_sk, hessian_metric, metric, sk_function, MetricKind,
};
use szego_lab::quadkernel::{build_szego, CurveSpec, Polynomial};
use szego_lab::variational::{annulus_caratheodory_bounds, variational_metric, BasisFrame};

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn cfg() -> NumericConfig {
    NumericConfig::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ball_point(rng: &mut ChaCha8Rng, n: usize, max_radius: f64) -> CVector {
    let v = CVector::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let scale = max_radius * rng.gen_range(0.0..1.0f64) / norm_sqr(&v).sqrt();
    v * c(scale, 0.0)
}

fn direction(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn annulus_point(rng: &mut ChaCha8Rng, r: f64) -> CVector {
    let band = 0.05 * (1.0 - r);
    rvec(&[0.0]).map(|_| Complex64::from_polar(rng.gen_range(r + band..1.0 - band), rng.gen_range(0.0..2.0 * PI)))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ball_constants() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=3 {
        let domain = DomainSpec::unit_ball(n).unwrap();
        for _ in 0..5 {
            let xi = direction(&mut rng, n);
            let len = norm_sqr(&xi).sqrt();
            let at = PointDir::new(CVector::zeros(n), xi).unwrap();
            let fs = metric(&domain, MetricKind::Szego, &at, cfg()).unwrap().value();
            let fb = metric(&domain, MetricKind::Bergman, &at, cfg()).unwrap().value();
            let fc = metric(&domain, MetricKind::Caratheodory, &at, cfg()).unwrap().value();
            let nf = n as f64;
            worst = worst
                .max(rel(fs, nf.sqrt() * len))
                .max(rel(fb, (nf + 1.0).sqrt() * len))
                .max(rel(fc, len));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    (
        worst <= 1e-10 && elapsed < 1.0,
        format!("max rel error {worst:.2e}, {elapsed:.3} s"),
    )
}

fn ratio_propagation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for n in 1..=3 {
        let domain = DomainSpec::unit_ball(n).unwrap();
        let expected = (n as f64 / (n as f64 + 1.0)).sqrt();
        for _ in 0..50 {
            let at = PointDir::new(ball_point(&mut rng, n, 0.95), direction(&mut rng, n)).unwrap();
            let fs = metric(&domain, MetricKind::Szego, &at, cfg()).unwrap().value();
            let fb = metric(&domain, MetricKind::Bergman, &at, cfg()).unwrap().value();
            worst = worst.max(rel(fs / fb, expected));
        }
    }
    (worst <= 1e-8, format!("max rel error {worst:.2e} over 150 points"))
}

fn sk_constancy() -> Outcome {
    let mut worst = 0.0f64;
    for config in [
        cfg(),
        NumericConfig {
            c1: 1.0,
            cn: 3.0,
            ..cfg()
        },
    ] {
        for n in 1..=3 {
            let domain = if n == 1 {
                DomainSpec::unit_disk()
            } else {
                DomainSpec::unit_ball(n).unwrap()
            };
            let constant = ball_sk_constant(n, &config).unwrap();
            // 10 radii × 10 angles, spread over the coordinates
            for i in 0..10 {
                for j in 0..10 {
                    let radius = 0.95 * i as f64 / 10.0;
                    let theta = 2.0 * PI * j as f64 / 10.0;
                    let z = CVector::from_fn(n, |k, _| {
                        Complex64::from_polar(radius / (n as f64).sqrt(), theta * (k + 1) as f64)
                    });
                    let sk = sk_function(&domain, &z, &z, config).unwrap();
                    worst = worst.max((sk - constant).norm() / constant);
                }
            }
        }
    }
    (
        worst <= 1e-10,
        format!("max rel deviation {worst:.2e} (c_n = 1 and 3, c1 = 2 and 1)"),
    )
}

fn annulus_limits() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (kind, probe, tol) in [
        (KernelKind::Bergman, Probe::Sqrt, 5e-3),
        (KernelKind::Szego, Probe::Sqrt, 5e-3),
        (KernelKind::Bergman, Probe::FifthRoot, 1e-2),
        (KernelKind::Szego, Probe::FifthRoot, 1e-2),
    ] {
        let e = LimitExperiment::standard(kind, probe, probe.default_decades()).unwrap();
        let t = run_limit(&e, cfg()).unwrap();
        let last = t.last().abs_error;
        let extrap = t.extrapolation_error().unwrap_or(f64::INFINITY);
        ok &= last <= tol && extrap <= 1e-4 && t.cauchy_tail();
        parts.push(format!("{kind}/{probe}: final {last:.1e}, extrapolated {extrap:.1e}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 30.0;
    (ok, format!("{}; {elapsed:.2} s", parts.join("; ")))
}

fn ratio_behavior() -> Outcome {
    let rs = decade_sequence(6)[1..].to_vec();
    let up = run_ratio(Probe::Sqrt, &rs, cfg()).unwrap();
    let down = run_ratio(Probe::FifthRoot, &rs, cfg()).unwrap();
    let growth = up.last().unwrap().ratio / up[0].ratio;
    let shrink = down[0].ratio / down.last().unwrap().ratio;
    let monotone = up.windows(2).all(|w| w[1].ratio > w[0].ratio) && down.windows(2).all(|w| w[1].ratio < w[0].ratio);
    (
        growth >= 10.0 && shrink >= 3.0 && monotone,
        format!("sqrt probe grows {growth:.2}x (need 10x), fifth-root probe shrinks {shrink:.3}x (need 3x)"),
    )
}

fn transformation_laws() -> Outcome {
    let mut ok = true;
    let mut worst_closed = 0.0f64;
    let mut worst_series = 0.0f64;
    for law in Law::ALL {
        for family in Family::ALL {
            let residual = sweep(law, family, DEFAULT_SEED, 100, cfg()).unwrap();
            ok &= residual <= family.tolerance();
            match family {
                Family::AnnulusRotation | Family::AnnulusInversion => worst_series = worst_series.max(residual),
                _ => worst_closed = worst_closed.max(residual),
            }
        }
    }
    // cocycle on composed draws
    let mut worst_cocycle = 0.0f64;
    for family in Family::ALL {
        for index in 0..20 {
            let a = draw(DEFAULT_SEED, family, index).unwrap();
            let b = draw(DEFAULT_SEED ^ 1, family, index).unwrap();
            if a.map.domain() != b.map.domain() {
                continue;
            }
            worst_cocycle = worst_cocycle.max(cocycle_residual(&a.map, &b.map, &a.z).unwrap());
        }
    }
    ok &= worst_cocycle <= 1e-10;
    (
        ok,
        format!("closed-form max {worst_closed:.2e}, series max {worst_series:.2e}, cocycle {worst_cocycle:.2e}"),
    )
}

fn caratheodory_comparison() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let disk = DomainSpec::unit_disk();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let at = PointDir::new(ball_point(&mut rng, 1, 0.95), direction(&mut rng, 1)).unwrap();
        let fs = metric(&disk, MetricKind::Szego, &at, cfg()).unwrap().value();
        let fc = caratheodory(&at, &disk).unwrap().value();
        worst = worst.max(rel(fs, fc));
    }
    let mut min_slack = f64::INFINITY;
    for i in 0..50 {
        let r = [0.05, 0.1, 0.3, 0.5, 0.7][i % 5];
        let domain = DomainSpec::annulus(r).unwrap();
        let at = PointDir::new(annulus_point(&mut rng, r), direction(&mut rng, 1)).unwrap();
        let fs = metric(&domain, MetricKind::Szego, &at, cfg()).unwrap().value();
        for b in annulus_caratheodory_bounds(&domain, &at, 8).unwrap() {
            min_slack = min_slack.min(fs - b.value);
        }
    }
    (
        worst <= 1e-10 && min_slack >= -1e-12,
        format!("disk F_S vs F_C max rel {worst:.2e}; annulus min F_S − bound {min_slack:.3e}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let (domain, z) = match i % 5 {
            0 => (DomainSpec::unit_disk(), ball_point(&mut rng, 1, 0.9)),
            1 => {
                let r = [0.05, 0.1, 0.3][i / 5 % 3];
                (DomainSpec::annulus(r).unwrap(), annulus_point(&mut rng, r))
            }
            k => (DomainSpec::unit_ball(k - 1).unwrap(), ball_point(&mut rng, k - 1, 0.9)),
        };
        let n = domain.dimension();
        let at = PointDir::new(z, direction(&mut rng, n)).unwrap();
        for kind in [KernelKind::Szego, KernelKind::Bergman] {
            let frame = BasisFrame::adapted(domain.clone(), kind, &at.z, cfg()).unwrap();
            let v = variational_metric(&frame, &at).unwrap().value();
            let h = hessian_metric(&KernelEvaluator::new(domain.clone(), kind, cfg()).unwrap(), &at)
                .unwrap()
                .value();
            worst = worst.max(rel(v, h));
        }
    }
    (
        worst <= 1e-8,
        format!("max rel disagreement {worst:.2e} over 50 triples, both kernels"),
    )
}

fn fefferman_measure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut density_err = 0.0f64;
    let mut independence = 0.0f64;
    for n in 1..=3 {
        let half = cfg().dimensional_constant(n) / 2.0;
        for _ in 0..50 {
            let v = direction(&mut rng, n);
            let z = &v / c(norm_sqr(&v).sqrt(), 0.0);
            let base = density(&DefiningFunctionProbe::ball(n).unwrap(), &z, cfg())
                .unwrap()
                .value();
            density_err = density_err.max((base - half).abs());
            for h in HFactor::PERTURBATIONS {
                let probe = DefiningFunctionProbe::new(n, h, ProbeMode::Analytic).unwrap();
                independence = independence.max(rel(density(&probe, &z, cfg()).unwrap().value(), base));
            }
        }
    }
    let one = |_: &CVector| c(1.0, 0.0);
    let square = |z: &CVector| z[0] * z[0] + c(0.5, 0.0);
    let mut pullback = 0.0f64;
    for (a, theta) in [
        (c(0.4, 0.0), 0.0),
        (c(0.3, -0.5), 1.3),
        (c(-0.6, 0.2), -2.0),
        (c(0.0, 0.7), 0.5),
    ] {
        let m = AutomorphismMap::disk_mobius(a, theta).unwrap();
        pullback = pullback.max(pullback_check(&m, &one, 512, cfg()).unwrap());
        pullback = pullback.max(pullback_check(&m, &square, 512, cfg()).unwrap());
    }
    (
        density_err <= 1e-10 && independence <= 1e-8 && pullback <= 1e-10,
        format!("density error {density_err:.2e}, h-independence {independence:.2e}, pullback residual {pullback:.2e}"),
    )
}

fn quadrature_kernels() -> Outcome {
    let mut ok = true;
    let circle = build_szego(&CurveSpec::circle(), 0..=40).unwrap();
    let disk = KernelEvaluator::szego(DomainSpec::unit_disk(), cfg()).unwrap();
    let (z, w) = (c(0.3, 0.0), c(0.2, 0.0));
    let circle_err = (circle.eval(z, w) - disk.eval(&cvec(&[z]), &cvec(&[w])).unwrap()).norm();
    ok &= circle_err <= 1e-8;

    let ann = build_szego(&CurveSpec::annulus(0.5).unwrap(), -40..=40).unwrap();
    let series = KernelEvaluator::szego(DomainSpec::annulus(0.5).unwrap(), cfg()).unwrap();
    let p = c(0.7, 0.0);
    let ann_err = (ann.eval(p, p) - series.eval(&cvec(&[p]), &cvec(&[p])).unwrap()).norm();
    ok &= ann_err <= 1e-8;

    let ellipse = build_szego(&CurveSpec::ellipse(1.0, 0.6).unwrap(), 0..=30).unwrap();
    let repro = ellipse
        .reproducing_residual(&Polynomial::monomial(3), c(0.2, 0.0))
        .unwrap();
    ok &= repro <= 1e-8;

    // doubling the nodes must cut the closed-form error tenfold until the floor
    let mut ratio_ok = true;
    let mut pairs = Vec::new();
    for (coarse, fine) in [(64, 128), (256, 512)] {
        let err = |m: usize| {
            let k = build_szego(&CurveSpec::circle().with_nodes(m).unwrap(), 0..=40).unwrap();
            (k.eval(z, w) - disk.eval(&cvec(&[z]), &cvec(&[w])).unwrap()).norm()
        };
        let (e1, e2) = (err(coarse), err(fine));
        ratio_ok &= e2 <= (e1 / 10.0).max(1e-12);
        pairs.push(format!("{coarse}->{fine}: {e1:.1e}->{e2:.1e}"));
    }
    ok &= ratio_ok;
    (
        ok,
        format!(
            "circle {circle_err:.1e}, annulus {ann_err:.1e}, ellipse reproducing {repro:.1e}, convergence {}",
            pairs.join(", ")
        ),
    )
}

fn e_quantity_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_zero = 0.0f64;
    for n in 1..=3 {
        let domain = if n == 1 {
            DomainSpec::unit_disk()
        } else {
            DomainSpec::unit_ball(n).unwrap()
        };
        for _ in 0..30 {
            let at = PointDir::new(ball_point(&mut rng, n, 0.9), direction(&mut rng, n)).unwrap();
            worst_zero = worst_zero.max(e_quantity(&domain, &at, cfg()).unwrap().abs());
        }
    }
    let mut worst_paths = 0.0f64;
    for r in [0.05, 0.1, 0.3] {
        let domain = DomainSpec::annulus(r).unwrap();
        for _ in 0..10 {
            let at = PointDir::new(annulus_point(&mut rng, r), direction(&mut rng, 1)).unwrap();
            let direct = e_quantity(&domain, &at, cfg()).unwrap();
            let via = e_quantity_log_sk(&domain, &at, cfg()).unwrap();
            worst_paths = worst_paths.max((direct - via).abs() / direct.abs().max(1.0));
        }
    }
    (
        worst_zero <= 1e-8 && worst_paths <= 1e-8,
        format!("max |E| on ball/disk {worst_zero:.2e}; annulus path disagreement {worst_paths:.2e}"),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("ball metric constants", ball_constants),
        ("Szegő/Bergman ratio on the ball", ratio_propagation),
        ("SK constancy", sk_constancy),
        ("thin-annulus limits", annulus_limits),
        ("thin-annulus ratio behavior", ratio_behavior),
        ("transformation laws", transformation_laws),
        ("Szegő vs Carathéodory", caratheodory_comparison),
        ("variational oracle", oracle_equivalence),
        ("Fefferman measure", fefferman_measure),
        ("quadrature kernels", quadrature_kernels),
        ("E quantity", e_quantity_checks),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match std::panic::catch_unwind(check) {
            Ok(outcome) => outcome,
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<34} {}  {detail}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
