//! Enclosing cross-polytopes for subspaces and inscribed parallelepipeds for
//! quotients.
//!
//! Given a `k`-dimensional subspace `E` of `(R^n, N)`, the diagonal map `T`
//! from the Lozanovskii weights sends `E` onto a subspace `H` of `l_1^n`.
//! With `x_j` the orthogonal projections of the unit vectors onto `H`, every
//! `x ∈ H` has `|x|_1 = Σ_j |<x, x_j>|`, so dropping all but a
//! max-determinant subset `σ` of the `x_j` gives a cross-polytope
//! `B_σ ⊇ B_1^n ∩ H`. Pulling its vertices back with `S = T^{-1}` yields
//! `y_1..y_k ∈ E` with `B_E ⊆ absconv{y_j}`.

use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg;
use crate::lozanovskii::{self, EmbeddingMaps, LozanovskiiCertificate};
use crate::norm::{Exponent, Norm, SubspaceBasis};
use crate::rng;
use crate::volume::{self, Body, Gauge, VolumeEstimate};
use crate::{Error, Result};

/// Default limit on the number of `k`-subsets enumerated.
pub const ENUMERATION_CAP: u128 = 2_000_000;

/// Containment tolerance on the gauge of `absconv{y_j}`.
pub const CONTAINMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionFrame {
    /// `n x k`, orthonormal columns spanning `H = T(E)`.
    pub h_basis: DMatrix<f64>,
    /// `x_j ∈ R^k`: coordinates of the projection of the `j`-th unit vector.
    pub generators: Vec<Vec<f64>>,
}

impl ProjectionFrame {
    pub fn ambient_dim(&self) -> usize {
        self.h_basis.nrows()
    }

    pub fn sub_dim(&self) -> usize {
        self.h_basis.ncols()
    }

    fn det_of(&self, sigma: &[usize]) -> f64 {
        let k = self.sub_dim();
        let rows: Vec<&[f64]> = sigma.iter().map(|&j| &self.generators[j][..k]).collect();
        linalg::det_rows(&rows)
    }
}

/// Orthonormal frame of `T(E)` and the projected unit vectors.
pub fn embed_subspace(e: &SubspaceBasis, maps: &EmbeddingMaps) -> Result<ProjectionFrame> {
    let n = e.ambient_dim();
    if maps.t_diag.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: maps.t_diag.len() });
    }
    let mapped: Vec<Vec<f64>> =
        e.vectors().iter().map(|v| v.iter().zip(&maps.t_diag).map(|(a, t)| a * t).collect()).collect();
    let q = linalg::orthonormal_columns(&mapped, n)?;
    Ok(ProjectionFrame { generators: linalg::rows_of(&q), h_basis: q })
}

fn check_cap(n: usize, k: usize, cap: u128) -> Result<()> {
    let subsets = linalg::binomial(n, k);
    if subsets > cap {
        return Err(Error::EnumerationCap { subsets, cap });
    }
    Ok(())
}

/// `|(B_1^n ∩ H)°| = 2^k Σ_{|σ|=k} |det(x_j)_{j∈σ}|`, in the frame of `H`.
pub fn polar_zonotope_volume(frame: &ProjectionFrame, cap: u128) -> Result<f64> {
    let (n, k) = (frame.ambient_dim(), frame.sub_dim());
    check_cap(n, k, cap)?;
    let mut idx: Vec<usize> = (0..k).collect();
    let mut sum = 0.0;
    loop {
        sum += frame.det_of(&idx).abs();
        if !linalg::next_combination(&mut idx, n) {
            break;
        }
    }
    Ok(2f64.powi(k as i32) * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMethod {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetSelection {
    /// Increasing indices.
    pub sigma: Vec<usize>,
    pub abs_det: f64,
    pub method: SelectionMethod,
}

/// Relative slack under which two determinants count as tied.
const TIE_TOL: f64 = 1e-12;

/// A `k`-subset of the generators with large `|det|`. `Exact` enumerates
/// every subset and keeps the lexicographically first maximiser; `Greedy`
/// picks generators by pivoted Gram-Schmidt (largest residual first, lowest
/// index on ties).
pub fn select_max_det_subset(frame: &ProjectionFrame, method: SelectionMethod, cap: u128) -> Result<SubsetSelection> {
    let (n, k) = (frame.ambient_dim(), frame.sub_dim());
    let sigma = match method {
        SelectionMethod::Exact => {
            check_cap(n, k, cap)?;
            let mut idx: Vec<usize> = (0..k).collect();
            let mut best = (0.0, idx.clone());
            loop {
                let d = frame.det_of(&idx).abs();
                if d > best.0 * (1.0 + TIE_TOL) {
                    best = (d, idx.clone());
                }
                if !linalg::next_combination(&mut idx, n) {
                    break;
                }
            }
            best.1
        }
        SelectionMethod::Greedy => {
            let mut residual = frame.generators.clone();
            let mut chosen = Vec::with_capacity(k);
            for _ in 0..k {
                let norms: Vec<f64> = residual.iter().map(|r| linalg::dot(r, r)).collect();
                let top = (0..n).filter(|j| !chosen.contains(j)).map(|j| norms[j]).fold(0.0, f64::max);
                let Some(pick) = (0..n).find(|&j| !chosen.contains(&j) && norms[j] >= top * (1.0 - TIE_TOL)) else {
                    break;
                };
                if top == 0.0 {
                    break;
                }
                chosen.push(pick);
                let u = linalg::normalized(&residual[pick]);
                for r in residual.iter_mut() {
                    let c = linalg::dot(r, &u);
                    for (ri, ui) in r.iter_mut().zip(&u) {
                        *ri -= c * ui;
                    }
                }
            }
            chosen.sort_unstable();
            chosen
        }
    };
    let abs_det = if sigma.len() == k { frame.det_of(&sigma).abs() } else { 0.0 };
    if !(abs_det > 0.0) {
        return Err(Error::Degenerate("every k-subset of generators is singular".into()));
    }
    Ok(SubsetSelection { sigma, abs_det, method })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub method: SelectionMethod,
    pub cap: u128,
    pub mc_samples: usize,
    pub containment_samples: usize,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            method: SelectionMethod::Exact,
            cap: ENUMERATION_CAP,
            mc_samples: 200_000,
            containment_samples: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContainmentStats {
    pub samples: usize,
    /// Largest gauge of `absconv{y_j}` over the sampled boundary points.
    pub max_gauge: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionFactorCheck {
    /// `|T^{-1}(B_1^n) ∩ E|` in the frame of `E`.
    pub section_volume: f64,
    /// `(|T^{-1}(B_1^n) ∩ E| / |B_E|)^{1/k}`.
    pub factor: f64,
    /// The same with `|B_E|` lowered by three standard errors.
    pub factor_upper: f64,
    /// `e n / k`.
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnclosingCrossPolytope {
    /// `y_1..y_k ∈ E` in ambient coordinates.
    pub vertices: Vec<Vec<f64>>,
    /// The same points in the orthonormal frame of `E`.
    pub frame_vertices: Vec<Vec<f64>>,
    /// `n x k`, orthonormal columns spanning `E`.
    pub e_frame: DMatrix<f64>,
    /// `|absconv{y_j}| = 2^k/k! |det|`.
    pub absconv_volume: f64,
    pub ball_volume: VolumeEstimate,
    /// `(|absconv{y_j}| / |B_E|)^{1/k}`.
    pub ratio: f64,
    /// The same with `|B_E|` lowered by three standard errors.
    pub ratio_upper: f64,
    /// `(e n / k)^2`.
    pub bound: f64,
    pub containment: ContainmentStats,
    pub section_factor: SectionFactorCheck,
    /// `false` when `σ` was not chosen by full enumeration.
    pub sharpness_verified: bool,
}

/// Builds `absconv{y_j}` and measures it against `B_E`. Fails with
/// [`Error::BoundViolated`] if the volume ratio exceeds `(e n/k)^2`.
pub fn build_enclosing_polytope(
    norm: &Norm,
    e: &SubspaceBasis,
    maps: &EmbeddingMaps,
    frame: &ProjectionFrame,
    sel: &SubsetSelection,
    opts: &PipelineOptions,
) -> Result<EnclosingCrossPolytope> {
    let (n, k) = (frame.ambient_dim(), frame.sub_dim());
    if norm.dim() != n || e.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: norm.dim() });
    }
    let x_sigma = linalg::from_rows(&sel.sigma.iter().map(|&j| frame.generators[j].clone()).collect::<Vec<_>>(), k);
    let z = linalg::inverse(&x_sigma)?;
    let vertices: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let zj: Vec<f64> = z.column(j).iter().copied().collect();
            let h = linalg::mat_vec(&frame.h_basis, &zj);
            h.iter().zip(&maps.s_diag).map(|(a, s)| a * s).collect()
        })
        .collect();

    let e_frame = linalg::orthonormal_columns(e.vectors(), n)?;
    let frame_vertices: Vec<Vec<f64>> = vertices.iter().map(|y| linalg::mat_t_vec(&e_frame, y)).collect();
    let y_frame = DMatrix::from_fn(k, k, |i, j| frame_vertices[j][i]);
    let absconv_volume = volume::cross_polytope_image_volume(&y_frame)?;
    let y_inv = linalg::inverse(&y_frame)?;

    let ball = Body::section_in_frame(norm, &e_frame)?;
    let ball_volume = volume::body_volume(&ball, opts.mc_samples, opts.seed)?;
    let kf = k as f64;
    let ratio = (absconv_volume / ball_volume.value).powf(1.0 / kf);
    let ratio_upper = (absconv_volume / ball_volume.lower()).powf(1.0 / kf);
    let bound = (core::f64::consts::E * n as f64 / kf).powi(2);

    let containment = containment(&ball, &y_inv, opts.containment_samples, opts.seed);

    let t_ball = Body::section_in_frame(&Norm::Lp { p: Exponent::Finite(1.0), weights: maps.t_diag.clone() }, &e_frame)?;
    let section_volume = volume::body_volume(&t_ball, opts.mc_samples, opts.seed ^ 0x1e55)?;
    let factor = (section_volume.value / ball_volume.value).powf(1.0 / kf);
    let factor_upper = (section_volume.upper() / ball_volume.lower()).powf(1.0 / kf);
    let factor_bound = core::f64::consts::E * n as f64 / kf;
    let section_factor = SectionFactorCheck {
        section_volume: section_volume.value,
        factor,
        factor_upper,
        bound: factor_bound,
        passed: factor_upper <= factor_bound,
    };

    if !(ratio_upper <= bound) {
        return Err(Error::BoundViolated { ratio: ratio_upper, bound });
    }
    Ok(EnclosingCrossPolytope {
        vertices,
        frame_vertices,
        e_frame,
        absconv_volume,
        ball_volume,
        ratio,
        ratio_upper,
        bound,
        containment,
        section_factor,
        sharpness_verified: sel.method == SelectionMethod::Exact,
    })
}

/// Gauge of `absconv{y_j}` on boundary points of `ball`: random radial
/// directions, plus every vertex when the ball is a polytope.
fn containment(ball: &Body, y_inv: &DMatrix<f64>, samples: usize, seed: u64) -> ContainmentStats {
    let k = ball.dim();
    let gauge = |b: &[f64]| linalg::norm1(&linalg::mat_vec(y_inv, b));
    let mut max_gauge = 0.0f64;
    let mut count = 0;
    let mut rng = rng::stream(seed, 11);
    for _ in 0..samples {
        let theta = rng::gaussian_vec(&mut rng, k);
        let g = ball.gauge(&theta);
        if g > 0.0 {
            max_gauge = max_gauge.max(gauge(&linalg::scaled(&theta, 1.0 / g)));
            count += 1;
        }
    }
    if let Some(p) = ball.as_polytope() {
        for v in p.vertices() {
            max_gauge = max_gauge.max(gauge(v));
            count += 1;
        }
    }
    ContainmentStats { samples: count, max_gauge, passed: max_gauge <= 1.0 + CONTAINMENT_TOL }
}

/// Every stage of the subspace construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Enclosure {
    pub certificate: LozanovskiiCertificate,
    pub maps: EmbeddingMaps,
    pub frame: ProjectionFrame,
    pub selection: SubsetSelection,
    pub polytope: EnclosingCrossPolytope,
}

/// Weights, embedding, projection, selection and enclosing polytope in one go.
pub fn enclose(norm: &Norm, e: &SubspaceBasis, opts: &PipelineOptions) -> Result<Enclosure> {
    if e.ambient_dim() != norm.dim() {
        return Err(Error::DimensionMismatch { expected: norm.dim(), got: e.ambient_dim() });
    }
    let certificate = lozanovskii::solve_weights(norm)?;
    let maps = lozanovskii::build_embedding(&certificate)?;
    let frame = embed_subspace(e, &maps)?;
    let selection = select_max_det_subset(&frame, opts.method, opts.cap)?;
    let polytope = build_enclosing_polytope(norm, e, &maps, &frame, &selection, opts)?;
    Ok(Enclosure { certificate, maps, frame, selection, polytope })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientCube {
    /// `C = {x ∈ R^k : |<c_j, x>| <= 1}`; these are the `c_j`.
    pub cube_normals: Vec<Vec<f64>>,
    pub cube_volume: f64,
    /// `|Q(B_X)|`.
    pub ball_volume: VolumeEstimate,
    /// `(|Q(B_X)| / |C|)^{1/k}`.
    pub ratio: f64,
    /// The same with `|Q(B_X)|` raised by three standard errors.
    pub ratio_upper: f64,
    /// `(e n / k)^2`.
    pub bound: f64,
    /// `ratio / (n/k)^2`.
    pub measured_constant: f64,
    /// The subspace construction run on the dual, for `Q^T(R^k) ⊆ X*`.
    pub dual: Enclosure,
    pub passed: bool,
}

/// A parallelepiped `C ⊆ Q(B_X)` for a surjection `Q: R^n -> R^k`, obtained by
/// polarising the enclosing cross-polytope of the dual subspace.
pub fn quotient_cube(norm: &Norm, q: &DMatrix<f64>, opts: &PipelineOptions) -> Result<QuotientCube> {
    let (k, n) = (q.nrows(), q.ncols());
    if n != norm.dim() {
        return Err(Error::DimensionMismatch { expected: norm.dim(), got: n });
    }
    let rows = linalg::rows_of(q);
    if k == 0 || linalg::rank_normalized(&rows, n, 1e-10) < k {
        return Err(Error::NotSurjective);
    }
    let dual_norm = norm.dual();
    let e_star = SubspaceBasis::new(n, rows).map_err(|_| Error::NotSurjective)?;
    let dual = enclose(&dual_norm, &e_star, opts)?;

    // y_j = Q^T c_j
    let gram = q * q.transpose();
    let gram_inv = linalg::inverse(&gram)?;
    let cube_normals: Vec<Vec<f64>> =
        dual.polytope.vertices.iter().map(|y| linalg::mat_vec(&gram_inv, &linalg::mat_vec(q, y))).collect();
    let c = DMatrix::from_fn(k, k, |i, j| cube_normals[j][i]);
    let cube_volume = 2f64.powi(k as i32) / linalg::det(&c).abs();

    let body = Body::quotient(norm, q)?;
    let ball_volume = volume::body_volume(&body, opts.mc_samples, opts.seed ^ 0x0c0b)?;
    let kf = k as f64;
    let ratio = (ball_volume.value / cube_volume).powf(1.0 / kf);
    let ratio_upper = (ball_volume.upper() / cube_volume).powf(1.0 / kf);
    let bound = (core::f64::consts::E * n as f64 / kf).powi(2);
    Ok(QuotientCube {
        measured_constant: ratio / (n as f64 / kf).powi(2),
        passed: ratio_upper <= bound,
        cube_normals,
        cube_volume,
        ball_volume,
        ratio,
        ratio_upper,
        bound,
        dual,
    })
}

/// Largest gauge of `ball` over the vertices of the parallelepiped, i.e. at
/// most 1 iff `C ⊆ ball`. `None` unless `ball` is a polytope.
pub fn cube_inclusion_gauge(cube: &QuotientCube, ball: &Body) -> Option<f64> {
    let p = ball.as_polytope()?;
    let k = p.dim();
    // vertices of C: solve <c_j, x> = ±1 for all j
    let c = DMatrix::from_fn(k, k, |i, j| cube.cube_normals[i][j]);
    let c_inv = linalg::inverse(&c).ok()?;
    let mut worst = 0.0f64;
    for mask in 0u32..(1u32 << k) {
        let s: Vec<f64> = (0..k).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        worst = worst.max(p.gauge(&linalg::mat_vec(&c_inv, &s)));
    }
    Some(worst)
}
