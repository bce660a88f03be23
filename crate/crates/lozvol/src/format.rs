//! JSON file formats.
//!
//! Norms:
//!
//! ```json
//! {"kind": "lp", "p": 2.0, "weights": [1.0, 0.5]}
//! {"kind": "lp", "p": "inf", "weights": [1.0, 1.0]}
//! {"kind": "sum", "blocks": [{"coords": [0, 2], "norm": {...}}, {"coords": [1], "norm": {...}}]}
//! ```
//!
//! Subspaces are `{"basis": [[...], ...]}` (one row per spanning vector).
//! Bodies are `{"vrep": [[...]]}`, `{"hrep": [[...]]}` or
//! `{"norm": {...}, "subspace": [[...]]}`.

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context};
use lozvol_core::linalg;
use lozvol_core::subspace::SelectionMethod;
use lozvol_core::volume::{Body, Polytope, PolytopeH, PolytopeV};
use lozvol_core::{Block, Exponent, Norm, SubspaceBasis};
use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, thiserror::Error)]
#[error("{field}: {message}")]
pub struct SchemaError {
    pub field: String,
    pub message: String,
}

fn schema(field: impl Into<String>, message: impl fmt::Display) -> SchemaError {
    SchemaError { field: field.into(), message: message.to_string() }
}

/// `p` as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSpec(pub Exponent);

impl Serialize for ExponentSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Exponent::Infinity => s.serialize_str("inf"),
            Exponent::Finite(p) => s.serialize_f64(p),
        }
    }
}

impl<'de> Deserialize<'de> for ExponentSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(ExponentSpec(Exponent::Finite(p))),
            Raw::Str(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(ExponentSpec(Exponent::Infinity)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("invalid exponent {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NormSpec {
    Lp { p: ExponentSpec, weights: Vec<f64> },
    Max { blocks: Vec<BlockSpec> },
    Sum { blocks: Vec<BlockSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub coords: Vec<usize>,
    pub norm: NormSpec,
}

impl NormSpec {
    pub fn dim(&self) -> usize {
        match self {
            NormSpec::Lp { weights, .. } => weights.len(),
            NormSpec::Max { blocks } | NormSpec::Sum { blocks } => blocks.iter().map(|b| b.coords.len()).sum(),
        }
    }

    /// Builds the norm, checking that it acts on `dim` coordinates. Errors
    /// name the offending field.
    pub fn to_norm(&self, dim: usize) -> Result<Norm, SchemaError> {
        self.build("norm", dim)
    }

    fn build(&self, path: &str, dim: usize) -> Result<Norm, SchemaError> {
        let norm = match self {
            NormSpec::Lp { p, weights } => {
                if weights.len() != dim {
                    return Err(schema(
                        format!("{path}.weights"),
                        format!("weights.length != dim ({} != {dim})", weights.len()),
                    ));
                }
                Norm::Lp { p: p.0, weights: weights.clone() }
            }
            NormSpec::Max { blocks } | NormSpec::Sum { blocks } => {
                let total: usize = blocks.iter().map(|b| b.coords.len()).sum();
                if total != dim {
                    return Err(schema(format!("{path}.blocks"), format!("block sizes sum to {total}, dim is {dim}")));
                }
                let mut built = Vec::with_capacity(blocks.len());
                for (i, b) in blocks.iter().enumerate() {
                    let sub = b.norm.build(&format!("{path}.blocks[{i}].norm"), b.coords.len())?;
                    built.push(Block { coords: b.coords.clone(), norm: sub });
                }
                if matches!(self, NormSpec::Max { .. }) {
                    Norm::Max(built)
                } else {
                    Norm::Sum(built)
                }
            }
        };
        norm.validate().map_err(|e| schema(path, e))?;
        Ok(norm)
    }

    pub fn from_norm(norm: &Norm) -> NormSpec {
        match norm {
            Norm::Lp { p, weights } => NormSpec::Lp { p: ExponentSpec(*p), weights: weights.clone() },
            Norm::Max(blocks) => NormSpec::Max { blocks: blocks.iter().map(BlockSpec::from_block).collect() },
            Norm::Sum(blocks) => NormSpec::Sum { blocks: blocks.iter().map(BlockSpec::from_block).collect() },
        }
    }
}

impl BlockSpec {
    fn from_block(b: &Block) -> BlockSpec {
        BlockSpec { coords: b.coords.clone(), norm: NormSpec::from_norm(&b.norm) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceFile {
    pub basis: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vrep: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hrep: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<Vec<Vec<f64>>>,
}

impl BodyFile {
    pub fn to_body(&self) -> anyhow::Result<Body> {
        match (&self.vrep, &self.hrep, &self.norm) {
            (Some(v), None, None) => {
                let p = PolytopeV::new(v.clone()).context("vrep")?;
                Ok(Body::Polytope(Polytope::from_v(&p).context("vrep")?))
            }
            (None, Some(h), None) => {
                let p = PolytopeH::new(h.clone()).context("hrep")?;
                Ok(Body::Polytope(Polytope::from_h(&p).context("hrep")?))
            }
            (None, None, Some(spec)) => {
                let n = spec.dim();
                let norm = spec.to_norm(n)?;
                let basis = match &self.subspace {
                    Some(rows) => subspace_basis(n, rows, "subspace")?,
                    None => SubspaceBasis::full(n),
                };
                Ok(Body::norm_section(&norm, &basis)?.0)
            }
            _ => bail!("body: exactly one of vrep, hrep or norm is required"),
        }
    }
}

pub fn subspace_basis(n: usize, rows: &[Vec<f64>], field: &str) -> Result<SubspaceBasis, SchemaError> {
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(schema(format!("{field}[{i}]"), format!("row length {} != dim {n}", r.len())));
    }
    SubspaceBasis::new(n, rows.to_vec()).map_err(|e| schema(field, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodSpec {
    #[default]
    Exact,
    Greedy,
}

impl From<MethodSpec> for SelectionMethod {
    fn from(m: MethodSpec) -> Self {
        match m {
            MethodSpec::Exact => SelectionMethod::Exact,
            MethodSpec::Greedy => SelectionMethod::Greedy,
        }
    }
}

/// One problem: a norm on `R^dim` together with a subspace (rows spanning
/// it) or a quotient map (`k x dim`). Without either, the subspace is the
/// whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub dim: usize,
    pub norm: NormSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: MethodSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient_constant: Option<f64>,
}

/// An instance with its norm and subspace or quotient map built.
#[derive(Debug, Clone)]
pub struct Validated {
    pub norm: Norm,
    pub target: Target,
}

#[derive(Debug, Clone)]
pub enum Target {
    Subspace(SubspaceBasis),
    Quotient(DMatrix<f64>),
}

impl Target {
    pub fn sub_dim(&self) -> usize {
        match self {
            Target::Subspace(e) => e.sub_dim(),
            Target::Quotient(q) => q.nrows(),
        }
    }
}

impl Instance {
    pub fn validate(&self) -> Result<Validated, SchemaError> {
        if self.dim == 0 {
            return Err(schema("dim", "must be positive"));
        }
        let norm = self.norm.to_norm(self.dim)?;
        let target = match (&self.subspace, &self.quotient) {
            (Some(_), Some(_)) => return Err(schema("quotient", "give either subspace or quotient, not both")),
            (Some(rows), None) => Target::Subspace(subspace_basis(self.dim, rows, "subspace")?),
            (None, Some(rows)) => {
                if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != self.dim) {
                    return Err(schema(format!("quotient[{i}]"), format!("row length {} != dim {}", r.len(), self.dim)));
                }
                if rows.is_empty() || rows.len() > self.dim || linalg::rank_normalized(rows, self.dim, 1e-10) < rows.len() {
                    return Err(schema("quotient", "quotient not surjective"));
                }
                Target::Quotient(linalg::from_rows(rows, self.dim))
            }
            (None, None) => Target::Subspace(SubspaceBasis::full(self.dim)),
        };
        if let Some(m) = self.mc_samples {
            if m == 0 {
                return Err(schema("mc_samples", "must be positive"));
            }
        }
        if let Some(c) = self.quotient_constant {
            if !(c > 0.0 && c.is_finite()) {
                return Err(schema("quotient_constant", "must be a positive number"));
            }
        }
        Ok(Validated { norm, target })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Reads and validates an instance file.
pub fn parse_instance(path: &Path) -> anyhow::Result<(Instance, Validated)> {
    let inst: Instance = read_json(path)?;
    let v = inst.validate().with_context(|| format!("validating {}", path.display()))?;
    Ok((inst, v))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
