//! 1-unconditional norms on `R^n`.
//!
//! A norm is a tree: leaves are weighted `l_p` norms
//! `(Σ (w_i |x_i|)^p)^{1/p}`, inner nodes combine sub-norms living on disjoint
//! coordinate blocks by taking the maximum or the sum of the block values.
//! Every such norm is invariant under coordinate sign changes, the dual norm
//! has the same shape (conjugate exponents, reciprocal weights, max and sum
//! swapped), and the unit ball is a polytope whenever every leaf is `l_1`,
//! `l_∞` or one-dimensional.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;

use crate::linalg;
use crate::rng;
use crate::{Error, Result};

/// Exponent of an `l_p` leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Infinity => 0.0,
            Exponent::Finite(p) => 1.0 / p,
        }
    }
}

/// A sub-norm acting on the coordinates `coords` of the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub coords: Vec<usize>,
    pub norm: Norm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Norm {
    /// Weighted `l_p`: `(Σ (w_i |x_i|)^p)^{1/p}`.
    Lp { p: Exponent, weights: Vec<f64> },
    /// Maximum of the block values.
    Max(Vec<Block>),
    /// Sum of the block values.
    Sum(Vec<Block>),
}

/// Anything that can evaluate a norm on `R^n`. Used where a structured
/// [`Norm`] is not required (e.g. unconditionality checks on foreign oracles).
pub trait NormOracle {
    fn dim(&self) -> usize;
    fn value(&self, v: &[f64]) -> f64;
}

impl NormOracle for Norm {
    fn dim(&self) -> usize {
        Norm::dim(self)
    }

    fn value(&self, v: &[f64]) -> f64 {
        self.eval_unchecked(v)
    }
}

/// Upper bound on the number of vertices enumerated by
/// [`Norm::unit_ball_vertices`].
pub const VERTEX_CAP: usize = 1 << 16;

impl Norm {
    pub fn lp(p: Exponent, weights: Vec<f64>) -> Result<Norm> {
        let n = Norm::Lp { p, weights };
        n.validate()?;
        Ok(n)
    }

    pub fn l1(n: usize) -> Norm {
        Norm::Lp { p: Exponent::Finite(1.0), weights: vec![1.0; n] }
    }

    pub fn l2(n: usize) -> Norm {
        Norm::Lp { p: Exponent::Finite(2.0), weights: vec![1.0; n] }
    }

    pub fn linf(n: usize) -> Norm {
        Norm::Lp { p: Exponent::Infinity, weights: vec![1.0; n] }
    }

    pub fn max_of(blocks: Vec<Block>) -> Result<Norm> {
        let n = Norm::Max(blocks);
        n.validate()?;
        Ok(n)
    }

    pub fn sum_of(blocks: Vec<Block>) -> Result<Norm> {
        let n = Norm::Sum(blocks);
        n.validate()?;
        Ok(n)
    }

    pub fn dim(&self) -> usize {
        match self {
            Norm::Lp { weights, .. } => weights.len(),
            Norm::Max(blocks) | Norm::Sum(blocks) => blocks.iter().map(|b| b.coords.len()).sum(),
        }
    }

    /// Checks weights, exponents, and that the blocks of every combinator
    /// partition its coordinate range.
    pub fn validate(&self) -> Result<()> {
        match self {
            Norm::Lp { p, weights } => {
                if weights.is_empty() {
                    return Err(Error::InvalidNorm("empty weight vector".into()));
                }
                if let Exponent::Finite(p) = p {
                    if !(p.is_finite() && *p >= 1.0) {
                        return Err(Error::InvalidNorm(format!("exponent {p} is not in [1, ∞]")));
                    }
                }
                if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                    return Err(Error::InvalidNorm(format!("weight {w} is not positive")));
                }
                Ok(())
            }
            Norm::Max(blocks) | Norm::Sum(blocks) => {
                if blocks.is_empty() {
                    return Err(Error::InvalidNorm("combinator without blocks".into()));
                }
                let n = self.dim();
                let mut seen = vec![false; n];
                for b in blocks {
                    if b.coords.len() != b.norm.dim() {
                        return Err(Error::InvalidNorm(format!(
                            "block covers {} coordinates but its norm has dimension {}",
                            b.coords.len(),
                            b.norm.dim()
                        )));
                    }
                    for &c in &b.coords {
                        if c >= n || seen[c] {
                            return Err(Error::InvalidNorm(format!(
                                "blocks do not partition 0..{n} (coordinate {c})"
                            )));
                        }
                        seen[c] = true;
                    }
                    b.norm.validate()?;
                }
                Ok(())
            }
        }
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(())
    }

    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        self.check(v)?;
        Ok(self.eval_unchecked(v))
    }

    pub fn eval_dual(&self, v: &[f64]) -> Result<f64> {
        self.check(v)?;
        Ok(self.eval_dual_unchecked(v))
    }

    pub fn eval_unchecked(&self, v: &[f64]) -> f64 {
        match self {
            Norm::Lp { p, weights } => lp_value(*p, weights, v, false),
            Norm::Max(blocks) => blocks
                .iter()
                .map(|b| b.norm.eval_unchecked(&gather(&b.coords, v)))
                .fold(0.0, f64::max),
            Norm::Sum(blocks) => blocks
                .iter()
                .map(|b| b.norm.eval_unchecked(&gather(&b.coords, v)))
                .sum(),
        }
    }

    pub fn eval_dual_unchecked(&self, v: &[f64]) -> f64 {
        match self {
            Norm::Lp { p, weights } => lp_value(p.conjugate(), weights, v, true),
            Norm::Max(blocks) => blocks
                .iter()
                .map(|b| b.norm.eval_dual_unchecked(&gather(&b.coords, v)))
                .sum(),
            Norm::Sum(blocks) => blocks
                .iter()
                .map(|b| b.norm.eval_dual_unchecked(&gather(&b.coords, v)))
                .fold(0.0, f64::max),
        }
    }

    /// The dual norm as a structured norm of the same shape.
    pub fn dual(&self) -> Norm {
        match self {
            Norm::Lp { p, weights } => Norm::Lp {
                p: p.conjugate(),
                weights: weights.iter().map(|w| 1.0 / w).collect(),
            },
            Norm::Max(blocks) => Norm::Sum(dual_blocks(blocks)),
            Norm::Sum(blocks) => Norm::Max(dual_blocks(blocks)),
        }
    }

    /// `c · N` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Norm {
        match self {
            Norm::Lp { p, weights } => Norm::Lp { p: *p, weights: weights.iter().map(|w| w * c).collect() },
            Norm::Max(blocks) => Norm::Max(scale_blocks(blocks, c)),
            Norm::Sum(blocks) => Norm::Sum(scale_blocks(blocks, c)),
        }
    }

    /// The norm `x ↦ N(y)` with `y_i = x_{perm[i]}`, i.e. old coordinate `i`
    /// becomes new coordinate `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Norm> {
        let n = self.dim();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || core::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidInput("not a permutation".into()));
        }
        Ok(match self {
            Norm::Lp { p, weights } => {
                let mut w = vec![0.0; n];
                for (i, &pi) in perm.iter().enumerate() {
                    w[pi] = weights[i];
                }
                Norm::Lp { p: *p, weights: w }
            }
            Norm::Max(blocks) => Norm::Max(permute_blocks(blocks, perm)),
            Norm::Sum(blocks) => Norm::Sum(permute_blocks(blocks, perm)),
        })
    }

    /// True when the unit ball is a polytope.
    pub fn is_polytopal(&self) -> bool {
        match self {
            Norm::Lp { p, weights } => {
                weights.len() == 1 || matches!(p, Exponent::Infinity) || *p == Exponent::Finite(1.0)
            }
            Norm::Max(blocks) | Norm::Sum(blocks) => blocks.iter().all(|b| b.norm.is_polytopal()),
        }
    }

    /// Vertices of the unit ball of a polytopal norm (the ball is their
    /// convex hull; the list may contain non-extreme points only for
    /// one-dimensional leaves, which it does not).
    pub fn unit_ball_vertices(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        match self {
            Norm::Lp { p, weights } => {
                if weights.len() == 1 {
                    return Ok(vec![vec![1.0 / weights[0]], vec![-1.0 / weights[0]]]);
                }
                match p {
                    Exponent::Finite(q) if *q == 1.0 => {
                        let mut out = Vec::with_capacity(2 * n);
                        for (i, w) in weights.iter().enumerate() {
                            for s in [1.0, -1.0] {
                                let mut v = vec![0.0; n];
                                v[i] = s / w;
                                out.push(v);
                            }
                        }
                        Ok(out)
                    }
                    Exponent::Infinity => {
                        if n >= 31 || (1usize << n) > VERTEX_CAP {
                            return Err(Error::TooManyVertices(usize::MAX));
                        }
                        Ok((0..1usize << n)
                            .map(|mask| {
                                (0..n)
                                    .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 } / weights[i])
                                    .collect()
                            })
                            .collect())
                    }
                    Exponent::Finite(q) => Err(Error::InvalidNorm(format!(
                        "unit ball of an l_{q} leaf is not a polytope"
                    ))),
                }
            }
            Norm::Sum(blocks) => {
                let mut out = Vec::new();
                for b in blocks {
                    for u in b.norm.unit_ball_vertices()? {
                        let mut v = vec![0.0; n];
                        scatter(&b.coords, &u, &mut v);
                        out.push(v);
                    }
                    if out.len() > VERTEX_CAP {
                        return Err(Error::TooManyVertices(out.len()));
                    }
                }
                Ok(out)
            }
            Norm::Max(blocks) => {
                let mut out = vec![vec![0.0; n]];
                for b in blocks {
                    let verts = b.norm.unit_ball_vertices()?;
                    let total = out.len().saturating_mul(verts.len());
                    if total > VERTEX_CAP {
                        return Err(Error::TooManyVertices(total));
                    }
                    let mut next = Vec::with_capacity(total);
                    for partial in &out {
                        for u in &verts {
                            let mut v = partial.clone();
                            scatter(&b.coords, u, &mut v);
                            next.push(v);
                        }
                    }
                    out = next;
                }
                Ok(out)
            }
        }
    }

    /// Normals `a` of the facets `<a, x> <= 1` of a polytopal unit ball.
    pub fn facet_normals(&self) -> Result<Vec<Vec<f64>>> {
        self.dual().unit_ball_vertices()
    }

    /// A subgradient of the norm at `x`. Ties between maximal terms (in `l_∞`
    /// leaves and max blocks) are split in proportion to the number of
    /// coordinates involved, so that `<g, x> = N(x)` and symmetric
    /// configurations receive symmetric subgradients.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let value = self.eval_unchecked(x);
        let mut g = vec![0.0; n];
        if value == 0.0 {
            return g;
        }
        match self {
            Norm::Lp { p, weights } => match p {
                Exponent::Finite(q) if *q == 1.0 => {
                    for i in 0..n {
                        g[i] = weights[i] * signum0(x[i]);
                    }
                }
                Exponent::Finite(q) => {
                    for i in 0..n {
                        let t = weights[i] * x[i].abs() / value;
                        g[i] = weights[i] * t.powf(q - 1.0) * signum0(x[i]);
                    }
                }
                Exponent::Infinity => {
                    let active: Vec<usize> =
                        (0..n).filter(|&i| weights[i] * x[i].abs() >= value * (1.0 - 1e-12)).collect();
                    let share = 1.0 / active.len() as f64;
                    for i in active {
                        g[i] = weights[i] * signum0(x[i]) * share;
                    }
                }
            },
            Norm::Sum(blocks) => {
                for b in blocks {
                    let gb = b.norm.subgradient(&gather(&b.coords, x));
                    scatter(&b.coords, &gb, &mut g);
                }
            }
            Norm::Max(blocks) => {
                let values: Vec<f64> =
                    blocks.iter().map(|b| b.norm.eval_unchecked(&gather(&b.coords, x))).collect();
                let active: Vec<usize> =
                    (0..blocks.len()).filter(|&i| values[i] >= value * (1.0 - 1e-12)).collect();
                let total: usize = active.iter().map(|&i| blocks[i].coords.len()).sum();
                for i in active {
                    let b = &blocks[i];
                    let theta = b.coords.len() as f64 / total as f64;
                    let gb = b.norm.subgradient(&gather(&b.coords, x));
                    let gb: Vec<f64> = gb.iter().map(|v| v * theta).collect();
                    scatter(&b.coords, &gb, &mut g);
                }
            }
        }
        g
    }
}

fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn lp_value(p: Exponent, weights: &[f64], v: &[f64], reciprocal_weights: bool) -> f64 {
    let term = |i: usize| {
        if reciprocal_weights {
            v[i].abs() / weights[i]
        } else {
            v[i].abs() * weights[i]
        }
    };
    let n = weights.len();
    match p {
        Exponent::Infinity => (0..n).map(term).fold(0.0, f64::max),
        Exponent::Finite(q) if q == 1.0 => (0..n).map(term).sum(),
        Exponent::Finite(q) => {
            let m = (0..n).map(term).fold(0.0, f64::max);
            if m == 0.0 {
                return 0.0;
            }
            let s: f64 = (0..n).map(|i| (term(i) / m).powf(q)).sum();
            if q == 2.0 {
                m * s.sqrt()
            } else {
                m * s.powf(1.0 / q)
            }
        }
    }
}

pub(crate) fn gather(coords: &[usize], v: &[f64]) -> Vec<f64> {
    coords.iter().map(|&c| v[c]).collect()
}

pub(crate) fn scatter(coords: &[usize], src: &[f64], dst: &mut [f64]) {
    for (&c, &x) in coords.iter().zip(src) {
        dst[c] = x;
    }
}

fn dual_blocks(blocks: &[Block]) -> Vec<Block> {
    blocks.iter().map(|b| Block { coords: b.coords.clone(), norm: b.norm.dual() }).collect()
}

fn scale_blocks(blocks: &[Block], c: f64) -> Vec<Block> {
    blocks.iter().map(|b| Block { coords: b.coords.clone(), norm: b.norm.scaled(c) }).collect()
}

fn permute_blocks(blocks: &[Block], perm: &[usize]) -> Vec<Block> {
    blocks
        .iter()
        .map(|b| Block { coords: b.coords.iter().map(|&c| perm[c]).collect(), norm: b.norm.clone() })
        .collect()
}

/// `count` points on the unit sphere of `norm`: Gaussian directions scaled
/// to norm one.
pub fn sample_unit_sphere(norm: &Norm, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = norm.dim();
    let mut rng = rng::seeded(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g = rng::gaussian_vec(&mut rng, n);
        let s = norm.eval_unchecked(&g);
        if s > 0.0 {
            out.push(linalg::scaled(&g, 1.0 / s));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnconditionalityReport {
    pub trials: usize,
    /// `max |N(εα) - N(α)| / N(α)` over the sampled pairs.
    pub max_deviation: f64,
    pub passed: bool,
}

pub const UNCONDITIONALITY_TOL: f64 = 1e-10;

/// Samples pairs `(α, ε)` and measures how far the oracle is from sign
/// invariance. Each trial also tries every single-coordinate flip of `α`.
pub fn check_unconditionality<O: NormOracle + ?Sized>(oracle: &O, trials: usize, seed: u64) -> UnconditionalityReport {
    let n = oracle.dim();
    let mut rng = rng::seeded(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials.max(1) {
        let alpha = rng::gaussian_vec(&mut rng, n);
        let base = oracle.value(&alpha);
        if base == 0.0 {
            continue;
        }
        let mut flipped: Vec<f64> =
            alpha.iter().map(|a| if rng.random::<bool>() { -a } else { *a }).collect();
        worst = worst.max((oracle.value(&flipped) - base).abs() / base);
        flipped.copy_from_slice(&alpha);
        for i in 0..n {
            flipped[i] = -flipped[i];
            worst = worst.max((oracle.value(&flipped) - base).abs() / base);
            flipped[i] = -flipped[i];
        }
    }
    UnconditionalityReport { trials: trials.max(1), max_deviation: worst, passed: worst <= UNCONDITIONALITY_TOL }
}

/// A `k`-dimensional subspace of `R^n` given by `k` spanning vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl SubspaceBasis {
    pub fn new(ambient_dim: usize, vectors: Vec<Vec<f64>>) -> Result<SubspaceBasis> {
        if vectors.is_empty() || vectors.len() > ambient_dim {
            return Err(Error::InvalidInput(format!(
                "{} basis vectors for ambient dimension {ambient_dim}",
                vectors.len()
            )));
        }
        for v in &vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, got: v.len() });
            }
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        if linalg::rank_normalized(&vectors, ambient_dim, 1e-10) < vectors.len() {
            return Err(Error::Degenerate("subspace basis is rank deficient".into()));
        }
        Ok(SubspaceBasis { ambient_dim, vectors })
    }

    /// The whole space `R^n`.
    pub fn full(n: usize) -> SubspaceBasis {
        let vectors = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        SubspaceBasis { ambient_dim: n, vectors }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn sub_dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mixed() -> Norm {
        Norm::max_of(vec![
            Block { coords: vec![0, 2], norm: Norm::lp(Exponent::Finite(1.5), vec![1.0, 2.0]).unwrap() },
            Block {
                coords: vec![1, 3, 4],
                norm: Norm::sum_of(vec![
                    Block { coords: vec![0], norm: Norm::linf(1) },
                    Block { coords: vec![1, 2], norm: Norm::lp(Exponent::Finite(3.0), vec![0.5, 1.5]).unwrap() },
                ])
                .unwrap(),
            },
        ])
        .unwrap()
    }

    #[test]
    fn evaluates_standard_norms() {
        assert_eq!(Norm::l1(3).eval(&[1.0, -2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(Norm::linf(3).eval(&[1.0, -2.0, 3.0]).unwrap(), 3.0);
        assert_eq!(Norm::l2(2).eval(&[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn evaluates_duals() {
        assert_eq!(Norm::l1(3).eval_dual(&[1.0, -2.0, 3.0]).unwrap(), 3.0);
        assert_eq!(Norm::l2(2).eval_dual(&[3.0, 4.0]).unwrap(), 5.0);
        let w = Norm::lp(Exponent::Finite(1.0), vec![2.0, 1.0]).unwrap();
        // unit ball vertices (±1/2, 0), (0, ±1)
        let brute = w
            .unit_ball_vertices()
            .unwrap()
            .iter()
            .map(|v| linalg::dot(v, &[1.0, 1.0]))
            .fold(f64::MIN, f64::max);
        assert_eq!(brute, 1.0);
        assert_eq!(w.eval_dual(&[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Norm::l1(3).eval(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(Norm::l1(2).eval(&[1.0, f64::NAN]), Err(Error::NonFinite(1))));
        assert!(Norm::lp(Exponent::Finite(0.5), vec![1.0]).is_err());
        assert!(Norm::lp(Exponent::Finite(2.0), vec![1.0, 0.0]).is_err());
        assert!(Norm::max_of(vec![
            Block { coords: vec![0, 0], norm: Norm::l1(2) },
        ])
        .is_err());
    }

    #[test]
    fn sphere_samples_have_unit_norm_and_are_deterministic() {
        let a = sample_unit_sphere(&Norm::l2(4), 200, 7);
        let b = sample_unit_sphere(&Norm::l2(4), 200, 7);
        assert_eq!(a, b);
        for v in &a {
            assert!((Norm::l2(4).eval(v).unwrap() - 1.0).abs() <= 1e-12);
        }
        let m = mixed();
        for v in sample_unit_sphere(&m, 200, 3) {
            assert!((m.eval(&v).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn sphere_sampler_is_centered() {
        let s = sample_unit_sphere(&Norm::l1(2), 10_000, 11);
        for j in 0..2 {
            let mean: f64 = s.iter().map(|v| v[j]).sum::<f64>() / s.len() as f64;
            assert!(mean.abs() < 0.05, "coordinate {j} mean {mean}");
        }
    }

    struct Skewed;
    impl NormOracle for Skewed {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, v: &[f64]) -> f64 {
            (v[0] + v[1]).abs()
        }
    }

    #[test]
    fn unconditionality_detects_sign_dependence() {
        assert!(check_unconditionality(&Norm::lp(Exponent::Finite(2.5), vec![1.0, 3.0, 0.7]).unwrap(), 200, 1).passed);
        assert!(check_unconditionality(&mixed(), 200, 2).passed);
        let report = check_unconditionality(&Skewed, 50, 3);
        assert!(!report.passed);
        // α = (1, 1), ε = (1, -1): |1 - 1| vs 2
        assert_eq!(Skewed.value(&[1.0, -1.0]), 0.0);
        assert_eq!(Skewed.value(&[1.0, 1.0]), 2.0);
    }

    #[test]
    fn polytopal_balls_have_expected_vertices() {
        assert_eq!(Norm::l1(3).unit_ball_vertices().unwrap().len(), 6);
        assert_eq!(Norm::linf(3).unit_ball_vertices().unwrap().len(), 8);
        assert!(Norm::l2(2).unit_ball_vertices().is_err());
        let n = Norm::max_of(vec![
            Block { coords: vec![0, 1], norm: Norm::l1(2) },
            Block { coords: vec![2], norm: Norm::l2(1) },
        ])
        .unwrap();
        assert!(n.is_polytopal());
        let v = n.unit_ball_vertices().unwrap();
        assert_eq!(v.len(), 8);
        for x in &v {
            assert_relative_eq!(n.eval(x).unwrap(), 1.0);
        }
        for a in n.facet_normals().unwrap() {
            assert_relative_eq!(n.eval_dual(&a).unwrap(), 1.0);
        }
    }

    #[test]
    fn subgradient_satisfies_euler_identity() {
        let m = mixed();
        for x in sample_unit_sphere(&m, 50, 5) {
            let g = m.subgradient(&x);
            assert_relative_eq!(linalg::dot(&g, &x), 1.0, epsilon = 1e-10);
            assert!(m.eval_dual(&g).unwrap() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn permuted_norm_relabels_coordinates() {
        let m = mixed();
        let perm = [4, 0, 3, 1, 2];
        let p = m.permuted(&perm).unwrap();
        p.validate().unwrap();
        let x = [0.3, -1.0, 2.0, 0.5, -0.25];
        let mut y = [0.0; 5];
        for i in 0..5 {
            y[perm[i]] = x[i];
        }
        assert_relative_eq!(m.eval(&x).unwrap(), p.eval(&y).unwrap(), epsilon = 1e-15);
    }

    fn arb_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn prop_homogeneity(v in arb_vec(5), t in -20.0f64..20.0) {
            let m = mixed();
            let nv = m.eval(&v).unwrap();
            let tv: Vec<f64> = v.iter().map(|x| x * t).collect();
            prop_assert!((m.eval(&tv).unwrap() - t.abs() * nv).abs() <= 1e-10 * nv * t.abs().max(1e-300));
        }

        #[test]
        fn prop_triangle(u in arb_vec(5), v in arb_vec(5)) {
            let m = mixed();
            let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            let (nu, nv) = (m.eval(&u).unwrap(), m.eval(&v).unwrap());
            prop_assert!(m.eval(&w).unwrap() <= nu + nv + 1e-10 * (nu + nv));
        }

        #[test]
        fn prop_dual_pairing(u in arb_vec(5), v in arb_vec(5)) {
            let m = mixed();
            prop_assert!(linalg::dot(&u, &v) <= m.eval(&u).unwrap() * m.eval_dual(&v).unwrap() + 1e-10);
        }

        #[test]
        fn prop_bidual(v in arb_vec(4), w in prop::collection::vec(0.5f64..2.0, 4), pi in 0usize..5) {
            let p = [Exponent::Finite(1.0), Exponent::Finite(1.5), Exponent::Finite(2.0), Exponent::Finite(3.0), Exponent::Infinity][pi];
            let leaf = Norm::lp(p, w).unwrap();
            let bidual = leaf.dual().dual();
            let a = leaf.eval(&v).unwrap();
            prop_assert!((bidual.eval(&v).unwrap() - a).abs() <= 1e-10 * a.max(1e-300));
            prop_assert!((leaf.dual().eval(&v).unwrap() - leaf.eval_dual(&v).unwrap()).abs() <= 1e-12 * a.max(1.0));
        }
    }
}
