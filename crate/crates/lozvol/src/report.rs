//! Serializable views of the pipeline results.

use std::collections::BTreeMap;

use lozvol_core::isotropy::{BoundCheckReport, IsotropyReport, Verdict};
use lozvol_core::lozanovskii::{CertificateReport, EmbeddingCheck, EmbeddingMaps, LozanovskiiCertificate};
use lozvol_core::linalg;
use lozvol_core::subspace::{EnclosingCrossPolytope, ProjectionFrame, QuotientCube, SelectionMethod, SubsetSelection};
use lozvol_core::volume::{VolumeEstimate, VolumeMethod};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    linalg::rows_of(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateOut {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub norm_of_lambda: f64,
    pub lower_residual: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
}

impl From<&LozanovskiiCertificate> for CertificateOut {
    fn from(c: &LozanovskiiCertificate) -> Self {
        CertificateOut {
            weights: c.weights.clone(),
            objective: c.objective,
            norm_of_lambda: c.norm_of_lambda,
            lower_residual: c.lower_residual,
            kkt_residual: c.kkt_residual,
            iterations: c.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationOut {
    pub min_left_ratio: f64,
    pub max_right_ratio: f64,
    pub exact_left_ratio: f64,
    pub exact_right_ratio: f64,
    pub samples: usize,
    pub sign_vertices: usize,
    pub passed: bool,
}

impl From<&CertificateReport> for VerificationOut {
    fn from(r: &CertificateReport) -> Self {
        VerificationOut {
            min_left_ratio: r.min_left_ratio,
            max_right_ratio: r.max_right_ratio,
            exact_left_ratio: r.exact_left_ratio,
            exact_right_ratio: r.exact_right_ratio,
            samples: r.samples,
            sign_vertices: r.sign_vertices,
            passed: r.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingOut {
    pub t_diag: Vec<f64>,
    pub s_diag: Vec<f64>,
    pub t_norm: f64,
    pub s_norm: f64,
    pub passed: bool,
}

impl EmbeddingOut {
    pub fn new(m: &EmbeddingMaps, check: &EmbeddingCheck) -> Self {
        EmbeddingOut {
            t_diag: m.t_diag.clone(),
            s_diag: m.s_diag.clone(),
            t_norm: check.t_norm,
            s_norm: check.s_norm,
            passed: check.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameOut {
    /// `k x n`, orthonormal rows.
    pub h_basis: Vec<Vec<f64>>,
    pub generators: Vec<Vec<f64>>,
}

impl From<&ProjectionFrame> for FrameOut {
    fn from(f: &ProjectionFrame) -> Self {
        FrameOut { h_basis: matrix_rows(&f.h_basis.transpose()), generators: f.generators.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOut {
    pub sigma: Vec<usize>,
    pub abs_det: f64,
    pub method: String,
}

impl From<&SubsetSelection> for SelectionOut {
    fn from(s: &SubsetSelection) -> Self {
        SelectionOut {
            sigma: s.sigma.clone(),
            abs_det: s.abs_det,
            method: match s.method {
                SelectionMethod::Exact => "exact",
                SelectionMethod::Greedy => "greedy",
            }
            .into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeOut {
    pub value: f64,
    pub method: String,
    pub std_error: f64,
}

impl From<&VolumeEstimate> for VolumeOut {
    fn from(v: &VolumeEstimate) -> Self {
        VolumeOut {
            value: v.value,
            method: match v.method {
                VolumeMethod::ExactTriangulation => "exact-triangulation",
                VolumeMethod::DeterminantFormula => "determinant-formula",
                VolumeMethod::MonteCarlo => "monte-carlo",
                VolumeMethod::RadialQuadrature => "radial-quadrature",
                VolumeMethod::PolytopeSandwich => "polytope-sandwich",
            }
            .into(),
            std_error: v.std_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentOut {
    pub samples: usize,
    pub max_gauge: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeOut {
    pub vertices: Vec<Vec<f64>>,
    pub frame_vertices: Vec<Vec<f64>>,
    pub absconv_volume: f64,
    pub ball_volume: VolumeOut,
    pub ratio: f64,
    pub ratio_upper: f64,
    pub bound: f64,
    pub containment: ContainmentOut,
    pub section_factor: f64,
    pub section_factor_upper: f64,
    pub section_factor_bound: f64,
    pub sharpness_verified: bool,
}

impl From<&EnclosingCrossPolytope> for PolytopeOut {
    fn from(p: &EnclosingCrossPolytope) -> Self {
        PolytopeOut {
            vertices: p.vertices.clone(),
            frame_vertices: p.frame_vertices.clone(),
            absconv_volume: p.absconv_volume,
            ball_volume: (&p.ball_volume).into(),
            ratio: p.ratio,
            ratio_upper: p.ratio_upper,
            bound: p.bound,
            containment: ContainmentOut {
                samples: p.containment.samples,
                max_gauge: p.containment.max_gauge,
                passed: p.containment.passed,
            },
            section_factor: p.section_factor.factor,
            section_factor_upper: p.section_factor.factor_upper,
            section_factor_bound: p.section_factor.bound,
            sharpness_verified: p.sharpness_verified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientOut {
    pub cube_normals: Vec<Vec<f64>>,
    pub cube_volume: f64,
    pub ball_volume: VolumeOut,
    pub ratio: f64,
    pub ratio_upper: f64,
    pub bound: f64,
    pub measured_constant: f64,
    pub within_bound: bool,
    pub dual_polytope: PolytopeOut,
}

impl From<&QuotientCube> for QuotientOut {
    fn from(q: &QuotientCube) -> Self {
        QuotientOut {
            cube_normals: q.cube_normals.clone(),
            cube_volume: q.cube_volume,
            ball_volume: (&q.ball_volume).into(),
            ratio: q.ratio,
            ratio_upper: q.ratio_upper,
            bound: q.bound,
            measured_constant: q.measured_constant,
            within_bound: q.passed,
            dual_polytope: (&q.dual.polytope).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyOut {
    pub affine_map: Vec<Vec<f64>>,
    pub inverse: Vec<Vec<f64>>,
    pub l_k: f64,
    pub cov_residual: f64,
    pub volume_check: f64,
    pub exact: bool,
}

impl From<&IsotropyReport> for IsotropyOut {
    fn from(r: &IsotropyReport) -> Self {
        IsotropyOut {
            affine_map: matrix_rows(&r.map),
            inverse: matrix_rows(&r.inverse),
            l_k: r.l_k,
            cov_residual: r.cov_residual,
            volume_check: r.volume_check,
            exact: r.exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictOut {
    Pass,
    Fail,
    Skipped,
}

impl From<Verdict> for VerdictOut {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => VerdictOut::Pass,
            Verdict::Fail => VerdictOut::Fail,
            Verdict::Skipped => VerdictOut::Skipped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOut {
    pub lhs: f64,
    pub rhs: f64,
    pub constant_used: f64,
    pub margin: f64,
    pub verdict: VerdictOut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimal_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_section: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl From<&BoundCheckReport> for CheckOut {
    fn from(r: &BoundCheckReport) -> Self {
        CheckOut {
            lhs: r.lhs,
            rhs: r.rhs,
            constant_used: r.constant_used,
            margin: r.margin,
            verdict: r.verdict.into(),
            minimal_constant: r.minimal_constant,
            max_section: r.max_section,
            l_k: r.l_k,
            note: None,
        }
    }
}

impl CheckOut {
    pub fn skipped(note: &str) -> Self {
        CheckOut {
            lhs: 0.0,
            rhs: 0.0,
            constant_used: 0.0,
            margin: 0.0,
            verdict: VerdictOut::Skipped,
            minimal_constant: None,
            max_section: None,
            l_k: None,
            note: Some(note.into()),
        }
    }

    /// `lhs <= rhs`, with `margin = rhs / lhs`.
    pub fn upper_bound(lhs: f64, rhs: f64, holds: bool) -> Self {
        CheckOut {
            lhs,
            rhs,
            constant_used: rhs,
            margin: rhs / lhs,
            verdict: if holds { VerdictOut::Pass } else { VerdictOut::Fail },
            minimal_constant: None,
            max_section: None,
            l_k: None,
            note: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enclosure: Option<CheckOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section_factor: Option<CheckOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace_slicing: Option<CheckOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient_slicing: Option<CheckOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isotropic_pi1: Option<CheckOut>,
}

impl Verdicts {
    pub fn all(&self) -> impl Iterator<Item = &CheckOut> {
        [&self.enclosure, &self.section_factor, &self.subspace_slicing, &self.quotient_slicing, &self.isotropic_pi1].into_iter().flatten()
    }

    pub fn any_failed(&self) -> bool {
        self.all().any(|c| c.verdict == VerdictOut::Fail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: String,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub version: String,
    pub stages: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polytope: Option<PolytopeOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient_cube: Option<QuotientOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isotropy: Option<IsotropyOut>,
    pub verdicts: Verdicts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    /// Wall-clock milliseconds per stage.
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    /// The report without timings, for reproducibility comparisons.
    pub fn numeric_payload(&self) -> RunReport {
        RunReport { timings_ms: BTreeMap::new(), ..self.clone() }
    }
}
