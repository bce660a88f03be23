use lozvol::format::{Instance, MethodSpec, NormSpec};
use lozvol::report::VerdictOut;
use lozvol::runner::{self, RunOptions, Stage};
use lozvol::suite::{self, SuiteKind, SuiteSpec};
use lozvol_core::norm::check_unconditionality;

fn l1_plane() -> Instance {
    serde_json::from_str(
        r#"{"id": "l1-plane", "dim": 3, "norm": {"kind": "lp", "p": 1, "weights": [1, 1, 1]},
            "subspace": [[1, 1, 0], [0, 0, 1]], "seed": 7}"#,
    )
    .unwrap()
}

fn spec(count: usize, seed: u64, kind: SuiteKind) -> SuiteSpec {
    SuiteSpec { n_range: (2, 6), k_range: (1, 3), count, seed, kind, polytopal: false }
}

#[test]
fn l1_plane_full_run() {
    let inst = l1_plane();
    let v = inst.validate().unwrap();
    let r = runner::run_pipeline(&inst, &v, &Stage::ALL, &RunOptions::default());
    assert!(r.failure.is_none(), "{:?}", r.failure);
    let p = r.polytope.as_ref().unwrap();
    let bound = (3.0 * std::f64::consts::E / 2.0).powi(2);
    assert!((p.bound - bound).abs() < 1e-12);
    assert!(p.ratio <= bound);
    assert_eq!(r.verdicts.enclosure.as_ref().unwrap().verdict, VerdictOut::Pass);
    assert_eq!(r.verdicts.section_factor.as_ref().unwrap().verdict, VerdictOut::Pass);
    assert_eq!(r.verdicts.subspace_slicing.as_ref().unwrap().verdict, VerdictOut::Pass);
    assert_eq!(r.verdicts.quotient_slicing.as_ref().unwrap().verdict, VerdictOut::Skipped);
    assert_eq!(r.verdicts.isotropic_pi1.as_ref().unwrap().verdict, VerdictOut::Pass);
    assert!(r.isotropy.is_some() && r.certificate.is_some());
    assert_eq!(r.timings_ms.len(), 6);
}

#[test]
fn stage_gating() {
    let inst = l1_plane();
    let v = inst.validate().unwrap();
    let r = runner::run_pipeline(&inst, &v, &[Stage::Lozanovskii], &RunOptions::default());
    assert_eq!(r.stages, ["lozanovskii"]);
    let c = r.certificate.as_ref().unwrap();
    assert!(c.weights.iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-12));
    assert!(r.polytope.is_none() && r.isotropy.is_none());
    assert!(r.verdicts.all().next().is_none());

    // enclose pulls in the weights it is built from
    let r = runner::run_pipeline(&inst, &v, &[Stage::Enclose], &RunOptions::default());
    assert_eq!(r.stages, ["lozanovskii", "enclose"]);
    assert!(r.polytope.is_some() && r.verdicts.subspace_slicing.is_none());
}

#[test]
fn exact_runs_are_reproducible() {
    let inst = l1_plane();
    let v = inst.validate().unwrap();
    let a = runner::run_pipeline(&inst, &v, &Stage::ALL, &RunOptions::default());
    let b = runner::run_pipeline(&inst, &v, &Stage::ALL, &RunOptions::default());
    assert_eq!(
        serde_json::to_string(&a.numeric_payload()).unwrap(),
        serde_json::to_string(&b.numeric_payload()).unwrap()
    );
}

#[test]
fn quotient_run_fills_the_cube() {
    let inst: Instance = serde_json::from_str(
        r#"{"dim": 4, "norm": {"kind": "lp", "p": 1, "weights": [1, 1, 1, 1]},
            "quotient": [[1, 0.3, -0.5, 2], [0.2, 1, 0.7, -0.4]], "seed": 2}"#,
    )
    .unwrap();
    let v = inst.validate().unwrap();
    let r = runner::run_pipeline(&inst, &v, &Stage::ALL, &RunOptions::default());
    assert!(r.failure.is_none(), "{:?}", r.failure);
    assert_eq!(r.kind, "quotient");
    let q = r.quotient_cube.as_ref().unwrap();
    assert!(q.within_bound);
    assert_eq!(r.verdicts.subspace_slicing.as_ref().unwrap().verdict, VerdictOut::Skipped);
    assert_eq!(r.verdicts.quotient_slicing.as_ref().unwrap().verdict, VerdictOut::Pass);
}

#[test]
fn invalid_instances_are_reported_not_run() {
    let mut bad = l1_plane();
    bad.subspace = Some(vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]]);
    let reports = runner::run_suite(&[l1_plane(), bad], &[Stage::Lozanovskii], &RunOptions::default()).unwrap();
    assert!(reports[0].failure.is_none());
    assert_eq!(reports[1].failure.as_ref().unwrap().stage, "validate");
}

#[test]
fn stage_lists() {
    assert_eq!(runner::parse_stages("all").unwrap(), Stage::ALL);
    assert_eq!(runner::parse_stages("isotropic_pi1, enclose").unwrap(), [Stage::IsotropicPi1, Stage::Enclose]);
    assert!(runner::parse_stages("slicing").is_err());
}

#[test]
fn suites() {
    assert!(suite::generate_suite(&spec(0, 1, SuiteKind::Mixed)).is_empty());
    let a = suite::generate_suite(&spec(40, 9, SuiteKind::Mixed));
    assert_eq!(a, suite::generate_suite(&spec(40, 9, SuiteKind::Mixed)));
    assert_ne!(a, suite::generate_suite(&spec(40, 10, SuiteKind::Mixed)));
    for inst in &a {
        let v = inst.validate().unwrap();
        let k = v.target.sub_dim();
        assert!((2..=6).contains(&inst.dim) && (1..=3).contains(&k) && k <= inst.dim);
        assert!(check_unconditionality(&v.norm, 50, 3).passed);
        assert_eq!(inst.method, MethodSpec::Exact);
    }
    assert!(a.iter().any(|i| i.quotient.is_some()) && a.iter().any(|i| i.subspace.is_some()));
    let polytopal = SuiteSpec { polytopal: true, ..spec(20, 4, SuiteKind::Subspace) };
    for inst in suite::generate_suite(&polytopal) {
        assert!(inst.validate().unwrap().norm.is_polytopal());
        assert!(inst.quotient.is_none());
    }
}

#[test]
fn csv_summary() {
    let insts = suite::generate_suite(&spec(4, 5, SuiteKind::Mixed));
    let reports = runner::run_suite(&insts, &[Stage::Enclose, Stage::IsotropicPi1], &RunOptions::default()).unwrap();
    let text = runner::summary_csv(&reports).unwrap();
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<runner::SummaryRow> = rd.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 4);
    for (row, inst) in rows.iter().zip(&insts) {
        assert_eq!(Some(&row.id), inst.id.as_ref());
        assert!(row.ratio.unwrap() <= row.bound.unwrap());
        assert_eq!(row.enclosure_verdict, "pass");
        assert!(!row.isotropic_pi1_verdict.is_empty() && row.subspace_slicing_verdict.is_empty());
    }
    assert!(!text.contains(';'));
}

#[test]
fn norm_spec_matches_the_norm() {
    let spec: NormSpec =
        serde_json::from_str(r#"{"kind": "sum", "blocks": [{"coords": [0, 2], "norm": {"kind": "lp", "p": 2, "weights": [3, 4]}},
            {"coords": [1], "norm": {"kind": "lp", "p": "inf", "weights": [2]}}]}"#)
            .unwrap();
    let norm = spec.to_norm(3).unwrap();
    // sqrt((3*1)^2 + (4*1)^2) + 2*1
    assert!((norm.eval(&[1.0, 1.0, 1.0]).unwrap() - 7.0).abs() < 1e-12);
}
