//! Pipeline orchestration: stages in dependency order, per-stage timings,
//! partial reports on failure.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use lozvol_core::isotropy::{self, CheckOptions, Pi1Search};
use lozvol_core::lozanovskii;
use lozvol_core::subspace::{self, Enclosure, PipelineOptions};
use lozvol_core::volume::{Body, SectionSearch};
use lozvol_core::Error as CoreError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::format::{Instance, Target, Validated};
use crate::report::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Lozanovskii,
    Enclose,
    Isotropy,
    SubspaceSlicing,
    QuotientSlicing,
    IsotropicPi1,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::Lozanovskii, Stage::Enclose, Stage::Isotropy, Stage::SubspaceSlicing, Stage::QuotientSlicing, Stage::IsotropicPi1];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Lozanovskii => "lozanovskii",
            Stage::Enclose => "enclose",
            Stage::Isotropy => "isotropy",
            Stage::SubspaceSlicing => "subspace_slicing",
            Stage::QuotientSlicing => "quotient_slicing",
            Stage::IsotropicPi1 => "isotropic_pi1",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

/// Parses a comma-separated stage list; `all` selects every stage.
pub fn parse_stages(text: &str) -> Result<Vec<Stage>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if part == "all" {
            out.extend(Stage::ALL);
        } else {
            out.push(part.parse()?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub mc_samples: usize,
    pub containment_samples: usize,
    pub verify_samples: usize,
    pub section: SectionSearch,
    pub pi1: Pi1Search,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mc_samples: 100_000,
            containment_samples: 1000,
            verify_samples: 1000,
            section: SectionSearch::default(),
            pi1: Pi1Search::default(),
        }
    }
}

impl RunOptions {
    fn pipeline(&self, inst: &Instance) -> PipelineOptions {
        PipelineOptions {
            method: inst.method.into(),
            mc_samples: inst.mc_samples.unwrap_or(self.mc_samples),
            containment_samples: self.containment_samples,
            seed: inst.seed,
            ..PipelineOptions::default()
        }
    }

    fn checks(&self, inst: &Instance) -> CheckOptions {
        CheckOptions {
            mc_samples: inst.mc_samples.unwrap_or(self.mc_samples),
            section: self.section,
            pi1: self.pi1,
            seed: inst.seed,
        }
    }
}

/// The unit ball whose slicing behaviour is studied: `B_E` for a subspace,
/// `Q(B_X)` for a quotient.
pub fn ball_of(v: &Validated) -> lozvol_core::Result<Body> {
    match &v.target {
        Target::Subspace(e) => Ok(Body::norm_section(&v.norm, e)?.0),
        Target::Quotient(q) => Body::quotient(&v.norm, q),
    }
}

fn with_dependencies(stages: &[Stage]) -> Vec<Stage> {
    let mut s: Vec<Stage> = stages.to_vec();
    if s.contains(&Stage::Enclose) {
        s.push(Stage::Lozanovskii);
    }
    s.sort_unstable();
    s.dedup();
    s
}

/// Runs the requested stages (plus their prerequisites) in order. A failing
/// stage ends the run; its name and error are recorded in the report.
pub fn run_pipeline(inst: &Instance, v: &Validated, stages: &[Stage], opts: &RunOptions) -> RunReport {
    let stages = with_dependencies(stages);
    let (kind, k) = match &v.target {
        Target::Subspace(e) => ("subspace", e.sub_dim()),
        Target::Quotient(q) => ("quotient", q.nrows()),
    };
    let mut report = RunReport {
        id: inst.id.clone(),
        kind: kind.into(),
        n: inst.dim,
        k,
        seed: inst.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        stages: stages.iter().map(|s| s.name().to_string()).collect(),
        certificate: None,
        embedding: None,
        frame: None,
        selection: None,
        polytope: None,
        quotient_cube: None,
        isotropy: None,
        verdicts: Verdicts::default(),
        failure: None,
        timings_ms: BTreeMap::new(),
    };
    for stage in stages {
        let start = Instant::now();
        let result = run_stage(stage, inst, v, opts, &mut report);
        report.timings_ms.insert(stage.name().into(), start.elapsed().as_secs_f64() * 1e3);
        if let Err(e) = result {
            if let CoreError::BoundViolated { ratio, bound } = e {
                report.verdicts.enclosure = Some(CheckOut::upper_bound(ratio, bound, false));
            }
            report.failure = Some(Failure { stage: stage.name().into(), error: e.to_string() });
            break;
        }
    }
    report
}

fn record_enclosure(report: &mut RunReport, enc: &Enclosure) {
    let p = &enc.polytope;
    report.frame = Some((&enc.frame).into());
    report.selection = Some((&enc.selection).into());
    report.polytope = Some(p.into());
    let mut t2 = CheckOut::upper_bound(p.ratio_upper, p.bound, p.ratio_upper <= p.bound && p.containment.passed);
    if !p.containment.passed {
        t2.note = Some(format!("containment gauge {}", p.containment.max_gauge));
    }
    report.verdicts.enclosure = Some(t2);
    report.verdicts.section_factor = Some(CheckOut::upper_bound(p.section_factor.factor_upper, p.section_factor.bound, p.section_factor.passed));
}

fn run_stage(stage: Stage, inst: &Instance, v: &Validated, opts: &RunOptions, report: &mut RunReport) -> lozvol_core::Result<()> {
    match stage {
        Stage::Lozanovskii => {
            let cert = lozanovskii::solve_weights(&v.norm)?;
            let maps = lozanovskii::build_embedding(&cert)?;
            let check = lozanovskii::check_embedding(&v.norm, &maps, opts.verify_samples, inst.seed)?;
            report.certificate = Some((&cert).into());
            report.embedding = Some(EmbeddingOut::new(&maps, &check));
        }
        Stage::Enclose => match &v.target {
            Target::Subspace(e) => {
                let enc = subspace::enclose(&v.norm, e, &opts.pipeline(inst))?;
                record_enclosure(report, &enc);
            }
            Target::Quotient(q) => {
                let cube = subspace::quotient_cube(&v.norm, q, &opts.pipeline(inst))?;
                record_enclosure(report, &cube.dual);
                report.quotient_cube = Some((&cube).into());
            }
        },
        Stage::Isotropy => {
            let body = ball_of(v)?;
            let iso = isotropy::to_isotropic(&body, opts.checks(inst).mc_samples, inst.seed)?;
            report.isotropy = Some((&iso).into());
        }
        Stage::SubspaceSlicing => {
            report.verdicts.subspace_slicing = Some(match &v.target {
                Target::Subspace(e) => with_note(isotropy::check_subspace_slicing(&v.norm, e, &opts.checks(inst))?),
                Target::Quotient(_) => CheckOut::skipped("instance is a quotient"),
            });
        }
        Stage::QuotientSlicing => {
            report.verdicts.quotient_slicing = Some(match &v.target {
                Target::Quotient(q) => {
                    with_note(isotropy::check_quotient_slicing(&v.norm, q, inst.quotient_constant, &opts.checks(inst))?)
                }
                Target::Subspace(_) => CheckOut::skipped("instance is a subspace"),
            });
        }
        Stage::IsotropicPi1 => {
            let body = ball_of(v)?;
            report.verdicts.isotropic_pi1 = Some(with_note(isotropy::check_isotropic_pi1(&body, &opts.checks(inst))?));
        }
    }
    Ok(())
}

fn with_note(r: isotropy::BoundCheckReport) -> CheckOut {
    let mut c: CheckOut = (&r).into();
    if r.verdict == isotropy::Verdict::Skipped {
        c.note = Some("one-dimensional: hyperplane sections are points".into());
    }
    c
}

/// Thread pool honouring `LOZVOL_THREADS`.
pub fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(s) = std::env::var("LOZVOL_THREADS") {
        let n: usize = s.trim().parse().map_err(|_| anyhow::anyhow!("LOZVOL_THREADS must be a positive integer"))?;
        if n == 0 {
            anyhow::bail!("LOZVOL_THREADS must be a positive integer");
        }
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

/// Runs every instance, in parallel, returning reports in input order.
/// Instances that fail validation produce a report with a `validate` failure.
pub fn run_suite(instances: &[Instance], stages: &[Stage], opts: &RunOptions) -> anyhow::Result<Vec<RunReport>> {
    let pool = thread_pool()?;
    Ok(pool.install(|| {
        instances
            .par_iter()
            .map(|inst| match inst.validate() {
                Ok(v) => run_pipeline(inst, &v, stages, opts),
                Err(e) => invalid_report(inst, &e.to_string()),
            })
            .collect()
    }))
}

fn invalid_report(inst: &Instance, error: &str) -> RunReport {
    RunReport {
        id: inst.id.clone(),
        kind: if inst.quotient.is_some() { "quotient" } else { "subspace" }.into(),
        n: inst.dim,
        k: 0,
        seed: inst.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        stages: Vec::new(),
        certificate: None,
        embedding: None,
        frame: None,
        selection: None,
        polytope: None,
        quotient_cube: None,
        isotropy: None,
        verdicts: Verdicts::default(),
        failure: Some(Failure { stage: "validate".into(), error: error.into() }),
        timings_ms: BTreeMap::new(),
    }
}

/// One CSV row per instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub id: String,
    pub kind: String,
    pub n: usize,
    pub k: usize,
    pub ratio: Option<f64>,
    pub bound: Option<f64>,
    pub section_factor: Option<f64>,
    pub l_k: Option<f64>,
    pub max_section: Option<f64>,
    pub enclosure_verdict: String,
    pub section_factor_verdict: String,
    pub subspace_slicing_verdict: String,
    pub quotient_slicing_verdict: String,
    pub isotropic_pi1_verdict: String,
    pub quotient_minimal_constant: Option<f64>,
    pub failed_stage: String,
}

fn verdict_cell(c: &Option<CheckOut>) -> String {
    match c.as_ref().map(|c| c.verdict) {
        Some(VerdictOut::Pass) => "pass",
        Some(VerdictOut::Fail) => "fail",
        Some(VerdictOut::Skipped) => "skipped",
        None => "",
    }
    .into()
}

impl From<&RunReport> for SummaryRow {
    fn from(r: &RunReport) -> Self {
        let section = [&r.verdicts.subspace_slicing, &r.verdicts.quotient_slicing].into_iter().flatten().find_map(|c| c.max_section);
        SummaryRow {
            id: r.id.clone().unwrap_or_default(),
            kind: r.kind.clone(),
            n: r.n,
            k: r.k,
            ratio: r.polytope.as_ref().map(|p| p.ratio),
            bound: r.polytope.as_ref().map(|p| p.bound),
            section_factor: r.polytope.as_ref().map(|p| p.section_factor),
            l_k: r.isotropy.as_ref().map(|i| i.l_k).or(r.verdicts.isotropic_pi1.as_ref().and_then(|c| c.l_k)),
            max_section: section,
            enclosure_verdict: verdict_cell(&r.verdicts.enclosure),
            section_factor_verdict: verdict_cell(&r.verdicts.section_factor),
            subspace_slicing_verdict: verdict_cell(&r.verdicts.subspace_slicing),
            quotient_slicing_verdict: verdict_cell(&r.verdicts.quotient_slicing),
            isotropic_pi1_verdict: verdict_cell(&r.verdicts.isotropic_pi1),
            quotient_minimal_constant: r.verdicts.quotient_slicing.as_ref().and_then(|c| c.minimal_constant),
            failed_stage: r.failure.as_ref().map(|f| f.stage.clone()).unwrap_or_default(),
        }
    }
}

/// CSV summary of a suite run.
pub fn summary_csv(reports: &[RunReport]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(SummaryRow::from(r))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
