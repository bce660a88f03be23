//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use lozvol::format::{Instance, NormSpec};
use lozvol::report::{RunReport, VerdictOut};
use lozvol::runner::{self, RunOptions, Stage};
use lozvol::suite::{self, SuiteKind, SuiteSpec};
use lozvol_core::isotropy::{self, CheckOptions, Verdict};
use lozvol_core::volume::{Body, Gauge, Polytope};
use lozvol_core::{linalg, lozanovskii, rng, subspace, Norm, SubspaceBasis};
use nalgebra::DMatrix;
use rand::Rng;

type Outcome = Result<String, String>;

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let note = format!("{:.1} s", took.as_secs_f64());
    match (out, limit) {
        (Ok(_), Some(l)) if took > l => Err(format!("took {note}, limit {} s", l.as_secs())),
        (Ok(m), _) => Ok(format!("{m}; {note}")),
        (Err(m), _) => Err(format!("{m}; {note}")),
    }
}

fn suite(n: (usize, usize), k: (usize, usize), count: usize, seed: u64, kind: SuiteKind) -> Vec<Instance> {
    suite::generate_suite(&SuiteSpec { n_range: n, k_range: k, count, seed, kind, polytopal: false })
}

fn run(instances: &[Instance], stages: &[Stage]) -> Result<Vec<RunReport>, String> {
    runner::run_suite(instances, stages, &RunOptions::default()).map_err(|e| e.to_string())
}

fn failures(reports: &[RunReport], pick: impl Fn(&RunReport) -> Option<VerdictOut>) -> Vec<String> {
    reports
        .iter()
        .filter(|r| r.failure.is_some() || pick(r) != Some(VerdictOut::Pass))
        .map(|r| {
            let id = r.id.clone().unwrap_or_default();
            match &r.failure {
                Some(f) => format!("{id} ({}: {})", f.stage, f.error),
                None => id,
            }
        })
        .collect()
}

fn symmetric_norms() -> Outcome {
    let mut count = 0;
    for n in 2..=10 {
        let nf = n as f64;
        for (norm, expected) in [(Norm::l1(n), 1.0 / nf), (Norm::l2(n), nf.powf(-0.5)), (Norm::linf(n), 1.0)] {
            let cert = lozanovskii::solve_weights(&norm).map_err(|e| e.to_string())?;
            let err = cert.weights.iter().map(|w| (w - expected).abs()).fold(0.0, f64::max);
            if err > 1e-8 {
                return Err(format!("{norm:?}: weight error {err:e}"));
            }
            let check = lozanovskii::verify_certificate(&norm, &cert, 10_000, n as u64).map_err(|e| e.to_string())?;
            if !check.passed || check.sign_vertices != 1 << n {
                return Err(format!("{norm:?}: verification {check:?}"));
            }
            count += 1;
        }
    }
    Ok(format!("{count} norms, all sign vertices + 10^4 samples each"))
}

fn section_factor() -> Outcome {
    let insts = suite((2, 8), (1, 4), 100, 201, SuiteKind::Subspace);
    let reports = run(&insts, &[Stage::Enclose])?;
    let bad = failures(&reports, |r| r.verdicts.section_factor.as_ref().map(|c| c.verdict));
    let worst = reports
        .iter()
        .filter_map(|r| r.polytope.as_ref().map(|p| p.section_factor_upper / p.section_factor_bound))
        .fold(0.0, f64::max);
    if bad.is_empty() {
        Ok(format!("100 instances, worst factor/bound {worst:.3}"))
    } else {
        Err(format!("failures: {bad:?}"))
    }
}

fn enclosure() -> Outcome {
    let insts = suite((2, 10), (1, 5), 100, 301, SuiteKind::Subspace);
    let reports = run(&insts, &[Stage::Enclose])?;
    let bad = failures(&reports, |r| r.verdicts.enclosure.as_ref().map(|c| c.verdict));
    if !bad.is_empty() {
        return Err(format!("failures: {bad:?}"));
    }
    let samples = reports.iter().filter_map(|r| r.polytope.as_ref()).map(|p| p.containment.samples).min().unwrap_or(0);
    if samples < 1000 {
        return Err(format!("only {samples} containment samples"));
    }
    let worst = reports.iter().filter_map(|r| r.polytope.as_ref()).map(|p| p.ratio_upper / p.bound).fold(0.0, f64::max);
    let l1 = subspace::enclose(&Norm::l1(3), &SubspaceBasis::full(3), &Default::default()).map_err(|e| e.to_string())?;
    let r = l1.polytope.ratio;
    if (r - 1.0).abs() > 1e-8 {
        return Err(format!("l1^3 full-space ratio {r}"));
    }
    Ok(format!("100 instances, worst ratio/bound {worst:.3}; l1^3 ratio {r:.12}"))
}

fn determinant_formula() -> Outcome {
    let mut g = rng::seeded(401);
    let mut worst = 0.0f64;
    for i in 0..30 {
        let n = g.random_range(2..=7);
        let k = g.random_range(1..=n.min(3));
        let norm = suite::random_norm(&mut g, n, false).to_norm(n).map_err(|e| e.to_string())?;
        let e = SubspaceBasis::new(n, (0..k).map(|_| rng::gaussian_vec(&mut g, n)).collect()).map_err(|e| e.to_string())?;
        let cert = lozanovskii::solve_weights(&norm).map_err(|e| e.to_string())?;
        let maps = lozanovskii::build_embedding(&cert).map_err(|e| e.to_string())?;
        let frame = subspace::embed_subspace(&e, &maps).map_err(|e| e.to_string())?;
        let formula = subspace::polar_zonotope_volume(&frame, subspace::ENUMERATION_CAP).map_err(|e| e.to_string())?;
        let section = Body::section_in_frame(&Norm::l1(n), &frame.h_basis).map_err(|e| e.to_string())?;
        let hull = section.as_polytope().ok_or("l1 section is not a polytope")?.polar().map_err(|e| e.to_string())?.volume();
        let rel = (formula - hull).abs() / hull;
        if rel > 1e-6 {
            return Err(format!("instance {i} (n={n}, k={k}): formula {formula} vs hull {hull}"));
        }
        worst = worst.max(rel);
    }
    Ok(format!("30 subspaces, worst relative gap {worst:.1e}"))
}

fn santalo() -> Outcome {
    let mut g = rng::seeded(501);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let k = 1 + i % 6;
        let a = DMatrix::from_fn(k, k, |_, _| rng::gaussian_vec(&mut g, 1)[0]);
        let cols = linalg::columns_of(&a);
        let pts: Vec<Vec<f64>> = cols.iter().flat_map(|c| [c.clone(), linalg::scaled(c, -1.0)]).collect();
        let body = Polytope::from_vertices(&pts).map_err(|e| e.to_string())?;
        let product = body.volume() * body.polar().map_err(|e| e.to_string())?.volume();
        let expected = 4f64.powi(k as i32) / linalg::factorial(k);
        let rel = (product - expected).abs() / expected;
        if rel > 1e-9 {
            return Err(format!("k={k}: product {product} vs {expected}"));
        }
        worst = worst.max(rel);
    }
    Ok(format!("50 maps, worst relative gap {worst:.1e}"))
}

fn cube(k: usize) -> Body {
    let pts: Vec<Vec<f64>> =
        (0..1usize << k).map(|m| (0..k).map(|i| if m >> i & 1 == 1 { -1.0 } else { 1.0 }).collect()).collect();
    Body::Polytope(Polytope::from_vertices(&pts).unwrap())
}

fn cross(k: usize) -> Body {
    Body::Polytope(Polytope::from_normals(&Norm::l1(k).facet_normals().unwrap()).unwrap())
}

fn random_polytope(g: &mut rng::Rng, k: usize) -> Body {
    let m = g.random_range(k..=3 * k);
    let pts: Vec<Vec<f64>> = (0..m)
        .flat_map(|_| {
            let p = rng::gaussian_vec(g, k);
            [linalg::scaled(&p, -1.0), p]
        })
        .collect();
    Body::Polytope(Polytope::from_vertices(&pts).unwrap())
}

fn isotropy_exactness() -> Outcome {
    for k in 1..=5 {
        let iso = isotropy::to_isotropic(&cube(k), 0, 0).map_err(|e| e.to_string())?;
        if (iso.l_k - 12f64.powf(-0.5)).abs() > 1e-9 || !iso.exact {
            return Err(format!("cube k={k}: L = {}", iso.l_k));
        }
    }
    let mut g = rng::seeded(601);
    let mut entries = 0;
    for i in 0..10 {
        let poly = random_polytope(&mut g, 2);
        let exact = isotropy::covariance(&poly, 0, 0).map_err(|e| e.to_string())?;
        let mc = isotropy::covariance_mc(&poly, 200_000, 700 + i).map_err(|e| e.to_string())?;
        for (a, (b, s)) in exact.matrix.iter().zip(mc.matrix.iter().zip(mc.std_errors.iter())) {
            if (a - b).abs() > 3.0 * s {
                return Err(format!("polygon {i}: exact {a} vs mc {b} +- {s}"));
            }
            entries += 1;
        }
    }
    let mut worst = 0.0f64;
    let mut bodies: Vec<Body> = (2..=4).map(cube).chain((2..=4).map(cross)).collect();
    bodies.extend((0..10).map(|i| random_polytope(&mut g, 2 + i % 3)));
    for b in &bodies {
        let once = isotropy::to_isotropic(b, 0, 0).map_err(|e| e.to_string())?;
        let twice = isotropy::to_isotropic(&once.body, 0, 0).map_err(|e| e.to_string())?;
        let k = b.dim();
        worst = worst.max((twice.map - DMatrix::<f64>::identity(k, k)).abs().max());
    }
    if worst > 1e-8 {
        return Err(format!("idempotence defect {worst:e}"));
    }
    Ok(format!("cube L exact for k<=5; {entries} polygon covariance entries within 3 sigma; idempotence defect {worst:.1e}"))
}

fn subspace_slicing() -> Outcome {
    let insts = suite((4, 8), (2, 4), 50, 701, SuiteKind::Subspace);
    let reports = run(&insts, &[Stage::SubspaceSlicing])?;
    let bad = failures(&reports, |r| r.verdicts.subspace_slicing.as_ref().map(|c| c.verdict));
    if !bad.is_empty() {
        return Err(format!("failures: {bad:?}"));
    }
    let worst = reports
        .iter()
        .filter_map(|r| r.verdicts.subspace_slicing.as_ref())
        .map(|c| 1.0 / c.margin)
        .fold(0.0, f64::max);
    Ok(format!("50 instances, worst lhs/rhs {worst:.3}"))
}

fn quotient_slicing() -> Outcome {
    let mut insts = suite((2, 8), (2, 3), 40, 801, SuiteKind::Quotient);
    for inst in insts.iter_mut().take(20) {
        inst.norm = NormSpec::from_norm(&Norm::l1(inst.dim));
    }
    let reports = run(&insts, &[Stage::QuotientSlicing])?;
    let bad = failures(&reports, |r| r.verdicts.quotient_slicing.as_ref().map(|c| c.verdict));
    if !bad.is_empty() {
        return Err(format!("failures: {bad:?}"));
    }
    let limit = isotropy::quotient_slicing_constant();
    let worst = reports
        .iter()
        .filter_map(|r| r.verdicts.quotient_slicing.as_ref().and_then(|c| c.minimal_constant))
        .fold(0.0, f64::max);
    if worst < limit {
        Ok(format!("40 quotients (20 of l1^n), largest minimal constant {worst:.3} < {limit:.3}"))
    } else {
        Err(format!("minimal constant {worst} >= {limit}"))
    }
}

fn isotropic_pi1() -> Outcome {
    let mut bodies: Vec<(String, Body)> = Vec::new();
    for k in 1..=4 {
        bodies.push((format!("cube {k}"), cube(k)));
        bodies.push((format!("cross-polytope {k}"), cross(k)));
    }
    let mut g = rng::seeded(901);
    for i in 0..20 {
        let k = 1 + i % 4;
        bodies.push((format!("random polytope {i} (k={k})"), random_polytope(&mut g, k)));
    }
    let mut worst = 0.0f64;
    for (name, b) in &bodies {
        let r = isotropy::check_isotropic_pi1(b, &CheckOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        if r.verdict != Verdict::Pass {
            return Err(format!("{name}: L * pi1 = {} > {}", r.lhs, r.rhs));
        }
        worst = worst.max(r.lhs);
    }
    Ok(format!("{} bodies, largest L * pi1 {worst:.4} <= {:.4}", bodies.len(), 2.0 * std::f64::consts::SQRT_2))
}

fn determinism() -> Outcome {
    let insts = suite((2, 7), (1, 3), 16, 1001, SuiteKind::Mixed);
    let a = runner::summary_csv(&run(&insts, &Stage::ALL)?).map_err(|e| e.to_string())?;
    let again = suite((2, 7), (1, 3), 16, 1001, SuiteKind::Mixed);
    let b = runner::summary_csv(&run(&again, &Stage::ALL)?).map_err(|e| e.to_string())?;
    if a == b {
        Ok(format!("16 instances, {} identical CSV bytes", a.len()))
    } else {
        Err("CSV summaries differ".into())
    }
}

fn main() {
    let criteria: [(&str, Option<u64>, fn() -> Outcome); 10] = [
        ("Lozanovskii weights exact on l1, l2, l_inf (n = 2..10)", Some(10), symmetric_norms),
        ("section factor <= e n/k on 100 random subspaces", Some(300), section_factor),
        ("enclosing cross-polytope bound and containment on 100 random subspaces", None, enclosure),
        ("determinant formula equals hull volume of the polar section", Some(60), determinant_formula),
        ("Santalo product of linear images of the cross-polytope", None, santalo),
        ("isotropic position: exact cube, polygon covariance, idempotence", None, isotropy_exactness),
        ("subspace slicing bound on 50 random subspaces", None, subspace_slicing),
        ("quotient slicing constant below 2e*sqrt(6)", None, quotient_slicing),
        ("L_K * pi_1 <= 2 sqrt 2 on isotropic polytopes", None, isotropic_pi1),
        ("suite CSV summaries are reproducible", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        match timed(limit.map(Duration::from_secs), f) {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
