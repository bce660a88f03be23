use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use lozvol::format::{self, BodyFile, Instance, MethodSpec, NormSpec, SubspaceFile};
use lozvol::report::{CertificateOut, IsotropyOut, RunReport, VerificationOut, VolumeOut};
use lozvol::runner::{self, RunOptions, Stage};
use lozvol::suite::{self, SuiteKind, SuiteSpec};
use lozvol_core::lozanovskii::{self, SolverOptions};
use lozvol_core::{isotropy, volume};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "lozvol", version, about = "Enclosing cross-polytopes and slicing checks for unconditional norms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the Lozanovskii weights of a norm and certify them.
    Lozanovskii {
        #[arg(long)]
        norm: PathBuf,
        #[arg(long, default_value_t = lozanovskii::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random samples for the certificate check, on top of the sign vertices.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the enclosing cross-polytope of the unit ball of a subspace.
    Enclose {
        #[arg(long)]
        norm: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        method: MethodArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        mc_samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Volume of a body given by vertices, facet normals or a norm section.
    Volume {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        mc_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Put a body in isotropic position and report its isotropy constant.
    Isotropy {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        mc_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one bound on an instance.
    Verify {
        /// enclosure, subspace_slicing, quotient_slicing or isotropic_pi1
        /// (short forms 2, 3, 4 and lemma3).
        #[arg(long = "check", visible_alias = "theorem")]
        check: String,
        #[arg(long)]
        instance: PathBuf,
        /// Constant for the quotient slicing bound.
        #[arg(long)]
        constant: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate random instances and run the pipeline on all of them.
    Suite {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        k_min: usize,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "mixed")]
        kind: SuiteKind,
        /// Only l_1 and l_inf leaves, so every ball is a polytope.
        #[arg(long)]
        polytopal: bool,
        /// Comma-separated stages, or `all`.
        #[arg(long, default_value = "all")]
        stages: String,
        #[arg(long)]
        mc_samples: Option<usize>,
        /// CSV summary; printed to stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Directory for the generated instances and per-instance reports.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum MethodArg {
    Exact,
    Greedy,
}

impl From<MethodArg> for MethodSpec {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => MethodSpec::Exact,
            MethodArg::Greedy => MethodSpec::Greedy,
        }
    }
}

#[derive(Serialize)]
struct LozanovskiiOut {
    certificate: CertificateOut,
    verification: VerificationOut,
}

#[derive(Serialize)]
struct BodyReport<T> {
    dim: usize,
    #[serde(flatten)]
    result: T,
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    match out {
        Some(p) => format::write_json(p, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

enum Outcome {
    Pass,
    Fail,
}

fn outcome(report: &RunReport) -> Outcome {
    if report.verdicts.any_failed() {
        Outcome::Fail
    } else {
        Outcome::Pass
    }
}

fn run_report(report: &RunReport, out: Option<&Path>) -> anyhow::Result<Outcome> {
    emit(out, report)?;
    if let Some(f) = &report.failure {
        if !report.verdicts.any_failed() {
            bail!("stage {} failed: {}", f.stage, f.error);
        }
    }
    Ok(outcome(report))
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Lozanovskii { norm, tol, seed, samples, out } => {
            let spec: NormSpec = format::read_json(&norm)?;
            let n = spec.dim();
            let norm = spec.to_norm(n)?;
            let cert = lozanovskii::solve_weights_with(&norm, &SolverOptions { tol, ..SolverOptions::default() })?;
            let check = lozanovskii::verify_certificate(&norm, &cert, samples, seed)?;
            let passed = check.passed;
            emit(out.as_deref(), &LozanovskiiOut { certificate: (&cert).into(), verification: (&check).into() })?;
            Ok(if passed { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Enclose { norm, subspace, method, seed, mc_samples, out } => {
            let spec: NormSpec = format::read_json(&norm)?;
            let e: SubspaceFile = format::read_json(&subspace)?;
            let inst = Instance {
                id: None,
                dim: spec.dim(),
                norm: spec,
                subspace: Some(e.basis),
                quotient: None,
                seed,
                method: method.into(),
                mc_samples,
                quotient_constant: None,
            };
            let v = inst.validate()?;
            let report = runner::run_pipeline(&inst, &v, &[Stage::Enclose], &RunOptions::default());
            run_report(&report, out.as_deref())
        }
        Command::Volume { body, mc_samples, seed, out } => {
            let file: BodyFile = format::read_json(&body)?;
            let body = file.to_body()?;
            let vol = volume::body_volume(&body, mc_samples, seed)?;
            emit(out.as_deref(), &BodyReport { dim: volume::Gauge::dim(&body), result: VolumeOut::from(&vol) })?;
            Ok(Outcome::Pass)
        }
        Command::Isotropy { body, mc_samples, seed, out } => {
            let file: BodyFile = format::read_json(&body)?;
            let body = file.to_body()?;
            let iso = isotropy::to_isotropic(&body, mc_samples, seed)?;
            emit(out.as_deref(), &BodyReport { dim: volume::Gauge::dim(&body), result: IsotropyOut::from(&iso) })?;
            Ok(Outcome::Pass)
        }
        Command::Verify { check, instance, constant, out } => {
            let stage = match check.as_str() {
                "2" | "enclosure" => Stage::Enclose,
                "3" | "subspace_slicing" => Stage::SubspaceSlicing,
                "4" | "quotient_slicing" => Stage::QuotientSlicing,
                "lemma3" | "isotropic_pi1" => Stage::IsotropicPi1,
                other => bail!("unknown check {other:?}"),
            };
            let (mut inst, v) = format::parse_instance(&instance)?;
            if let Some(c) = constant {
                if stage != Stage::QuotientSlicing {
                    bail!("--constant only applies to quotient_slicing");
                }
                inst.quotient_constant = Some(c);
                inst.validate()?;
            }
            let report = runner::run_pipeline(&inst, &v, &[stage], &RunOptions::default());
            run_report(&report, out.as_deref())
        }
        Command::Suite { n_min, n_max, k_min, k_max, count, seed, kind, polytopal, stages, mc_samples, csv, out_dir } => {
            if !(1 <= k_min && k_min <= k_max && 1 <= n_min && n_min <= n_max && k_min <= n_max) {
                bail!("need 1 <= k-min <= k-max and 1 <= n-min <= n-max");
            }
            let stages = runner::parse_stages(&stages).map_err(anyhow::Error::msg)?;
            let spec = SuiteSpec { n_range: (n_min, n_max), k_range: (k_min, k_max), count, seed, kind, polytopal };
            let mut instances = suite::generate_suite(&spec);
            if mc_samples.is_some() {
                for inst in &mut instances {
                    inst.mc_samples = mc_samples;
                }
            }
            let reports = runner::run_suite(&instances, &stages, &RunOptions::default())?;
            if let Some(dir) = &out_dir {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                for (inst, rep) in instances.iter().zip(&reports) {
                    let id = inst.id.as_deref().unwrap_or("instance");
                    format::write_json(&dir.join(format!("{id}.instance.json")), inst)?;
                    format::write_json(&dir.join(format!("{id}.report.json")), rep)?;
                }
            }
            let table = runner::summary_csv(&reports)?;
            match csv {
                Some(p) => std::fs::write(&p, table).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{table}"),
            }
            if let Some(r) = reports.iter().find(|r| r.failure.is_some() && !r.verdicts.any_failed()) {
                let f = r.failure.as_ref().expect("checked");
                bail!("{}: stage {} failed: {}", r.id.as_deref().unwrap_or("?"), f.stage, f.error);
            }
            Ok(if reports.iter().any(|r| r.verdicts.any_failed()) { Outcome::Fail } else { Outcome::Pass })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
