//! Volumes of symmetric convex bodies.
//!
//! Polytopes carry both representations (vertices and facet normals
//! `<a, x> <= 1`) and get exact volumes, moments and sections from the hull
//! triangulation. Bodies that are only known through a gauge (sections of a
//! non-polytopal unit ball, quotient balls, linear images of those) are
//! measured by rejection sampling from a bounding box.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;

use crate::hull::Hull;
use crate::linalg;
use crate::norm::{Norm, SubspaceBasis};
use crate::rng;
use crate::{Error, Result};

/// Largest dimension handled by the exact (triangulation) path.
pub const MAX_EXACT_DIM: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeMethod {
    ExactTriangulation,
    DeterminantFormula,
    MonteCarlo,
    RadialQuadrature,
    /// Midpoint of an inner and an outer polytope; `lower()`/`upper()` are
    /// their volumes.
    PolytopeSandwich,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub method: VolumeMethod,
    pub std_error: f64,
}

impl VolumeEstimate {
    pub fn exact(value: f64) -> Self {
        VolumeEstimate { value, method: VolumeMethod::ExactTriangulation, std_error: 0.0 }
    }

    /// `value - 3σ`, clamped at zero.
    pub fn lower(&self) -> f64 {
        (self.value - 3.0 * self.std_error).max(0.0)
    }

    /// `value + 3σ`.
    pub fn upper(&self) -> f64 {
        self.value + 3.0 * self.std_error
    }
}

/// Vertex description of a symmetric polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeV {
    pub vertices: Vec<Vec<f64>>,
}

/// Facet description `{x : <a, x> <= 1 for every normal a}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeH {
    pub normals: Vec<Vec<f64>>,
}

fn check_symmetric(points: &[Vec<f64>]) -> Result<()> {
    let scale = points.iter().flat_map(|p| p.iter()).fold(0.0f64, |a, b| a.max(b.abs()));
    let tol = 1e-12 * scale.max(1.0);
    for p in points {
        let mirrored = points.iter().any(|q| q.iter().zip(p).all(|(a, b)| (a + b).abs() <= tol));
        if !mirrored {
            return Err(Error::InvalidInput(format!("point set is not symmetric: -{p:?} missing")));
        }
    }
    Ok(())
}

impl PolytopeV {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<PolytopeV> {
        check_symmetric(&vertices)?;
        Ok(PolytopeV { vertices })
    }
}

impl PolytopeH {
    pub fn new(normals: Vec<Vec<f64>>) -> Result<PolytopeH> {
        check_symmetric(&normals)?;
        Ok(PolytopeH { normals })
    }
}

/// A polytope containing the origin in its interior, in both descriptions.
#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    normals: Vec<Vec<f64>>,
    hull: Hull,
}

/// Turns the facets of `hull` into normals `a` with `<a, x> <= 1`.
fn normalized_facets(hull: &Hull) -> Result<Vec<Vec<f64>>> {
    let scale = hull
        .points()
        .iter()
        .map(|p| linalg::norm2(p))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    hull.hyperplanes(1e-9)
        .into_iter()
        .map(|(n, off)| {
            if off <= 1e-12 * scale {
                Err(Error::Degenerate("origin is not an interior point".into()))
            } else {
                Ok(linalg::scaled(&n, 1.0 / off))
            }
        })
        .collect()
}

impl Polytope {
    pub fn from_vertices(points: &[Vec<f64>]) -> Result<Polytope> {
        let hull = Hull::new(points)?;
        let normals = normalized_facets(&hull)?;
        let vertices = hull.vertices();
        let hull = Hull::new(&vertices)?;
        Ok(Polytope { dim: hull.dim(), vertices, normals, hull })
    }

    pub fn from_normals(normals: &[Vec<f64>]) -> Result<Polytope> {
        if normals.first().is_some_and(|a| a.len() == 1) {
            let hi = normals.iter().filter(|a| a[0] > 0.0).map(|a| 1.0 / a[0]).fold(f64::INFINITY, f64::min);
            let lo = normals.iter().filter(|a| a[0] < 0.0).map(|a| 1.0 / a[0]).fold(f64::NEG_INFINITY, f64::max);
            if !(hi.is_finite() && lo.is_finite()) {
                return Err(Error::Degenerate("facet normals do not bound a polytope".into()));
            }
            let vertices = vec![vec![lo], vec![hi]];
            let hull = Hull::new(&vertices)?;
            return Ok(Polytope { dim: 1, normals: vec![vec![1.0 / lo], vec![1.0 / hi]], vertices, hull });
        }
        let dual = Hull::new(normals).map_err(|e| match e {
            Error::Degenerate(_) => Error::Degenerate("facet normals do not bound a polytope".into()),
            other => other,
        })?;
        let vertices = normalized_facets(&dual)
            .map_err(|_| Error::Degenerate("facet normals do not bound a polytope".into()))?;
        let hull = Hull::new(&vertices)?;
        Ok(Polytope { dim: hull.dim(), vertices, normals: dual.vertices(), hull })
    }

    pub fn from_v(p: &PolytopeV) -> Result<Polytope> {
        Polytope::from_vertices(&p.vertices)
    }

    pub fn from_h(p: &PolytopeH) -> Result<Polytope> {
        Polytope::from_normals(&p.normals)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn to_v(&self) -> PolytopeV {
        PolytopeV { vertices: self.vertices.clone() }
    }

    pub fn to_h(&self) -> PolytopeH {
        PolytopeH { normals: self.normals.clone() }
    }

    pub fn volume(&self) -> f64 {
        self.hull.volume()
    }

    /// `∫ x x^T dx`.
    pub fn second_moment(&self) -> DMatrix<f64> {
        self.hull.second_moment()
    }

    /// The polar body: vertices and facet normals trade places.
    pub fn polar(&self) -> Result<Polytope> {
        Ok(Polytope {
            dim: self.dim,
            vertices: self.normals.clone(),
            normals: self.vertices.clone(),
            hull: Hull::new(&self.normals)?,
        })
    }

    pub fn gauge(&self, x: &[f64]) -> f64 {
        self.normals.iter().map(|a| linalg::dot(a, x)).fold(0.0, f64::max)
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices.iter().map(|v| linalg::dot(v, u)).fold(f64::MIN, f64::max)
    }

    /// Image under an invertible linear map.
    pub fn linear_image(&self, a: &DMatrix<f64>) -> Result<Polytope> {
        let verts: Vec<Vec<f64>> = self.vertices.iter().map(|v| linalg::mat_vec(a, v)).collect();
        Polytope::from_vertices(&verts)
    }

    /// Section with the hyperplane `{x : <x, u> = t}`, expressed in the
    /// orthonormal frame [`linalg::hyperplane_frame`] of `u^⊥`. The point
    /// `t u / |u|` must lie in the interior.
    pub fn section_at(&self, u: &[f64], t: f64) -> Result<Polytope> {
        if self.dim < 2 {
            return Err(Error::Degenerate("sections of a segment are points".into()));
        }
        let frame = linalg::hyperplane_frame(u);
        let unit = linalg::normalized(u);
        let mut normals = Vec::with_capacity(self.normals.len());
        for a in &self.normals {
            let slack = 1.0 - t * linalg::dot(a, &unit);
            if slack <= 0.0 {
                return Err(Error::Degenerate("section offset leaves the interior".into()));
            }
            normals.push(linalg::scaled(&linalg::mat_t_vec(&frame, a), 1.0 / slack));
        }
        Polytope::from_normals(&normals)
    }

    /// `(k-1)`-volume of the central section `P ∩ u^⊥`.
    pub fn central_section_volume(&self, u: &[f64]) -> Result<f64> {
        if self.dim < 2 {
            return Err(Error::Degenerate("sections of a segment are points".into()));
        }
        let frame = linalg::hyperplane_frame(u);
        let projected: Vec<Vec<f64>> = self.normals.iter().map(|a| linalg::mat_t_vec(&frame, a)).collect();
        if self.dim == 2 {
            let m = projected.iter().map(|a| a[0].abs()).fold(0.0, f64::max);
            return Ok(2.0 / m);
        }
        Ok(Polytope::from_normals(&projected)?.volume())
    }
}

/// Exact volume of `conv(P)` by fan triangulation.
pub fn volume_vrep(p: &PolytopeV) -> Result<VolumeEstimate> {
    let d = p.vertices.first().map_or(0, |v| v.len());
    if d > MAX_EXACT_DIM {
        return Err(Error::InvalidInput(format!("exact volumes are limited to dimension {MAX_EXACT_DIM}")));
    }
    Ok(VolumeEstimate::exact(Hull::new(&p.vertices)?.volume()))
}

pub fn volume_hrep(p: &PolytopeH) -> Result<VolumeEstimate> {
    Ok(VolumeEstimate::exact(Polytope::from_h(p)?.volume()))
}

pub fn polar_vrep(p: &PolytopeV) -> Result<PolytopeH> {
    Ok(Polytope::from_v(p)?.to_h())
}

pub fn polar_hrep(p: &PolytopeH) -> Result<PolytopeV> {
    Ok(Polytope::from_h(p)?.to_v())
}

/// `|A(B_1^k)| = 2^k/k! |det A|`.
pub fn cross_polytope_image_volume(a: &DMatrix<f64>) -> Result<f64> {
    let k = a.nrows();
    let d = nonsingular_det(a)?;
    Ok(2f64.powi(k as i32) / linalg::factorial(k) * d.abs())
}

/// `|A(B_∞^k)| = 2^k |det A|`.
pub fn cube_image_volume(a: &DMatrix<f64>) -> Result<f64> {
    let k = a.nrows();
    Ok(2f64.powi(k as i32) * nonsingular_det(a)?.abs())
}

fn nonsingular_det(a: &DMatrix<f64>) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::InvalidInput("matrix is not square".into()));
    }
    let d = linalg::det(a);
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).powi(a.nrows() as i32);
    if !(d.abs() > 1e-14 * scale) {
        return Err(Error::Singular);
    }
    Ok(d)
}

/// Access to a symmetric convex body through its gauge.
pub trait Gauge {
    fn dim(&self) -> usize;
    /// Minkowski functional `inf{t > 0 : x ∈ tK}`.
    fn gauge(&self, x: &[f64]) -> f64;
    /// An upper bound for the support function `sup_{y ∈ K} <y, u>`.
    fn support_bound(&self, u: &[f64]) -> f64;
}

/// A symmetric convex body, exact when polytopal.
#[derive(Debug, Clone)]
pub enum Body {
    Polytope(Polytope),
    /// `{c ∈ R^k : N(F c) <= 1}` for an orthonormal `n x k` frame `F`.
    NormSection { norm: Norm, frame: DMatrix<f64> },
    /// `Q(B_X)` for a surjection `Q : R^n -> R^k`.
    Quotient { norm: Norm, map: DMatrix<f64> },
    /// `A(K)`.
    Image { inner: Box<Body>, map: DMatrix<f64>, inverse: DMatrix<f64> },
}

impl Body {
    /// The unit ball of `norm` restricted to `subspace`, in an orthonormal
    /// frame of the subspace. Exact whenever the unit ball is polytopal and
    /// its facets can be enumerated.
    pub fn norm_section(norm: &Norm, subspace: &SubspaceBasis) -> Result<(Body, DMatrix<f64>)> {
        if subspace.ambient_dim() != norm.dim() {
            return Err(Error::DimensionMismatch { expected: norm.dim(), got: subspace.ambient_dim() });
        }
        let frame = linalg::orthonormal_columns(subspace.vectors(), norm.dim())?;
        Ok((Body::section_in_frame(norm, &frame)?, frame))
    }

    pub fn section_in_frame(norm: &Norm, frame: &DMatrix<f64>) -> Result<Body> {
        if norm.is_polytopal() && frame.ncols() <= MAX_EXACT_DIM {
            if let Ok(normals) = norm.facet_normals() {
                let projected: Vec<Vec<f64>> = normals.iter().map(|a| linalg::mat_t_vec(frame, a)).collect();
                return Ok(Body::Polytope(section_polytope(&projected, frame.ncols())?));
            }
        }
        Ok(Body::NormSection { norm: norm.clone(), frame: frame.clone() })
    }

    /// The quotient ball `Q(B_X)`.
    pub fn quotient(norm: &Norm, map: &DMatrix<f64>) -> Result<Body> {
        if map.ncols() != norm.dim() {
            return Err(Error::DimensionMismatch { expected: norm.dim(), got: map.ncols() });
        }
        let rows = linalg::rows_of(map);
        if map.nrows() == 0 || linalg::rank_normalized(&rows, map.ncols(), 1e-10) < map.nrows() {
            return Err(Error::NotSurjective);
        }
        if norm.is_polytopal() && map.nrows() <= MAX_EXACT_DIM {
            if let Ok(verts) = norm.unit_ball_vertices() {
                let image: Vec<Vec<f64>> = verts.iter().map(|v| linalg::mat_vec(map, v)).collect();
                return Ok(Body::Polytope(Polytope::from_vertices(&image)?));
            }
        }
        Ok(Body::Quotient { norm: norm.clone(), map: map.clone() })
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match self {
            Body::Polytope(p) => Some(p),
            _ => None,
        }
    }

    pub fn linear_image(&self, a: &DMatrix<f64>) -> Result<Body> {
        match self {
            Body::Polytope(p) => Ok(Body::Polytope(p.linear_image(a)?)),
            Body::Image { inner, map, .. } => {
                let m = a * map;
                let inverse = linalg::inverse(&m)?;
                Ok(Body::Image { inner: inner.clone(), map: m, inverse })
            }
            other => Ok(Body::Image { inner: Box::new(other.clone()), map: a.clone(), inverse: linalg::inverse(a)? }),
        }
    }
}

/// Polytopes `inner ⊂ Q(B_X) ⊂ outer` from dual directions `y_1..y_m`
/// (equally spaced for `k = 2`, a Fibonacci lattice for `k = 3`, seeded
/// Gaussian otherwise): `outer = {x : |<y_i, x>| <= N*(Q^T y_i)}` and
/// `inner = absconv{Q z_i}` with `z_i` a norming vector of `Q^T y_i`.
pub fn quotient_sandwich(norm: &Norm, map: &DMatrix<f64>, directions: usize) -> Result<(Polytope, Polytope)> {
    if map.ncols() != norm.dim() {
        return Err(Error::DimensionMismatch { expected: norm.dim(), got: map.ncols() });
    }
    let k = map.nrows();
    let m = directions.max(k);
    let mut ys: Vec<Vec<f64>> = match k {
        1 => vec![vec![1.0]],
        2 => (0..m)
            .map(|i| {
                let (s, c) = (core::f64::consts::PI * i as f64 / m as f64).sin_cos();
                vec![c, s]
            })
            .collect(),
        3 => {
            let golden = core::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|i| {
                    let z = (i as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let (s, c) = (golden * i as f64).sin_cos();
                    vec![r * c, r * s, z]
                })
                .collect()
        }
        _ => {
            let mut g = rng::stream(0x5a4d, k as u64);
            (0..m).map(|_| linalg::normalized(&rng::gaussian_vec(&mut g, k))).collect()
        }
    };
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        ys.push(e);
    }
    let dual = norm.dual();
    let mut normals = Vec::with_capacity(2 * ys.len());
    let mut points = Vec::with_capacity(2 * ys.len());
    for y in &ys {
        let w = linalg::mat_t_vec(map, y);
        let h = norm.eval_dual_unchecked(&w);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::NotSurjective);
        }
        let a = linalg::scaled(y, 1.0 / h);
        normals.push(linalg::scaled(&a, -1.0));
        normals.push(a);
        let z = dual.subgradient(&w);
        let nz = norm.eval_unchecked(&z);
        if nz > 0.0 {
            let p = linalg::mat_vec(map, &linalg::scaled(&z, 1.0 / nz));
            points.push(linalg::scaled(&p, -1.0));
            points.push(p);
        }
    }
    let outer = section_polytope(&normals, k)?;
    let inner = Polytope::from_vertices(&points)?;
    Ok((inner, outer))
}

/// The polytope `{x : <a, x> <= 1}` in dimension `k`, handling `k = 1`.
fn section_polytope(normals: &[Vec<f64>], k: usize) -> Result<Polytope> {
    if k == 1 {
        let m = normals.iter().map(|a| a[0].abs()).fold(0.0, f64::max);
        if !(m > 0.0) {
            return Err(Error::Degenerate("unbounded section".into()));
        }
        return Polytope::from_vertices(&[vec![1.0 / m], vec![-1.0 / m]]);
    }
    Polytope::from_normals(normals)
}

impl Gauge for Body {
    fn dim(&self) -> usize {
        match self {
            Body::Polytope(p) => p.dim(),
            Body::NormSection { frame, .. } => frame.ncols(),
            Body::Quotient { map, .. } => map.nrows(),
            Body::Image { map, .. } => map.nrows(),
        }
    }

    fn gauge(&self, x: &[f64]) -> f64 {
        match self {
            Body::Polytope(p) => p.gauge(x),
            Body::NormSection { norm, frame } => norm.eval_unchecked(&linalg::mat_vec(frame, x)),
            Body::Quotient { norm, map } => quotient_gauge(norm, map, x),
            Body::Image { inner, inverse, .. } => inner.gauge(&linalg::mat_vec(inverse, x)),
        }
    }

    fn support_bound(&self, u: &[f64]) -> f64 {
        match self {
            Body::Polytope(p) => p.support(u),
            Body::NormSection { norm, frame } => norm.eval_dual_unchecked(&linalg::mat_vec(frame, u)),
            Body::Quotient { norm, map } => norm.eval_dual_unchecked(&linalg::mat_t_vec(map, u)),
            Body::Image { inner, map, .. } => inner.support_bound(&linalg::mat_t_vec(map, u)),
        }
    }
}

/// Gauge of `Q(B_X)` through duality:
/// `|x| = 1 / min { N*(Q^T y) : <x, y> = 1 }`.
///
/// The minimum is found by a pattern search over the affine hyperplane
/// `<x, y> = 1`. An inexact minimum can only make the gauge smaller, i.e.
/// the body larger.
fn quotient_gauge(norm: &Norm, map: &DMatrix<f64>, x: &[f64]) -> f64 {
    let k = x.len();
    let r2 = linalg::dot(x, x);
    if r2 == 0.0 {
        return 0.0;
    }
    let base = linalg::scaled(x, 1.0 / r2);
    let f = |y: &[f64]| norm.eval_dual_unchecked(&linalg::mat_t_vec(map, y));
    if k == 1 {
        return 1.0 / f(&base);
    }
    let frame = linalg::hyperplane_frame(x);
    let m = k - 1;
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    if m == 2 {
        for i in 0..8 {
            let a = core::f64::consts::PI * i as f64 / 4.0;
            dirs.push(vec![a.cos(), a.sin()]);
        }
    } else {
        for i in 0..m {
            for s in [1.0, -1.0] {
                let mut d = vec![0.0; m];
                d[i] = s;
                dirs.push(d);
            }
        }
    }
    let point = |w: &[f64]| {
        let mut y = base.clone();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += (0..m).map(|j| frame[(i, j)] * w[j]).sum::<f64>();
        }
        y
    };
    let mut w = vec![0.0; m];
    let mut best = f(&base);
    let cap = 1.0 / r2.sqrt();
    let mut step = cap;
    let floor = 1e-10 / r2.sqrt();
    let mut turn = 0usize;
    while step > floor {
        let mut moved = false;
        for d in &dirs {
            let trial: Vec<f64> = w.iter().zip(d).map(|(a, b)| a + step * b).collect();
            let v = f(&point(&trial));
            if v < best {
                best = v;
                w = trial;
                moved = true;
                break;
            }
        }
        if moved {
            step = (step * 2.0).min(cap);
        } else {
            step *= 0.5;
            if m == 2 {
                // rotate the poll set so kinks are not aligned with it
                turn += 1;
                let a = 0.3819660112501051 * core::f64::consts::PI * turn as f64;
                let (c, s) = (a.cos(), a.sin());
                for d in dirs.iter_mut() {
                    let (x0, x1) = (d[0], d[1]);
                    d[0] = c * x0 - s * x1;
                    d[1] = s * x0 + c * x1;
                }
            }
        }
    }
    1.0 / best
}

/// A body restricted to the subspace spanned by the columns of `frame`.
pub struct Restricted<'a, G: Gauge + ?Sized> {
    pub body: &'a G,
    pub frame: DMatrix<f64>,
}

impl<G: Gauge + ?Sized> Gauge for Restricted<'_, G> {
    fn dim(&self) -> usize {
        self.frame.ncols()
    }

    fn gauge(&self, x: &[f64]) -> f64 {
        self.body.gauge(&linalg::mat_vec(&self.frame, x))
    }

    fn support_bound(&self, u: &[f64]) -> f64 {
        self.body.support_bound(&linalg::mat_vec(&self.frame, u))
    }
}

/// Acceptance rate below which rejection sampling hands over to radial
/// integration.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

/// Relative standard error above which the radial estimator is tried as well.
pub const MAX_RELATIVE_ERROR: f64 = 0.02;

/// Monte Carlo volume of a gauge body: rejection sampling from the box
/// `[-h(e_i), h(e_i)]`; if fewer than one in a thousand proposals land inside,
/// or the relative error exceeds [`MAX_RELATIVE_ERROR`], radial integration
/// `|K| = |B_2^k| E[ρ(θ)^k]` is used as well and the tighter estimate kept.
/// One-dimensional bodies are measured exactly from the gauge, planar ones by
/// [`radial_quadrature_2d`].
pub fn mc_volume<G: Gauge + ?Sized>(body: &G, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    let k = body.dim();
    if k == 1 {
        let g = body.gauge(&[1.0]);
        if !(g > 0.0) {
            return Err(Error::Degenerate("unbounded body".into()));
        }
        return Ok(VolumeEstimate { value: 2.0 / g, method: VolumeMethod::MonteCarlo, std_error: 0.0 });
    }
    if k == 2 {
        return radial_quadrature_2d(body);
    }
    let mut half = Vec::with_capacity(k);
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        let h = body.support_bound(&e);
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Degenerate("bounding box unobtainable".into()));
        }
        half.push(h);
    }
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let mut rng = rng::seeded(seed);
    let samples = samples.max(1);
    let mut inside = 0usize;
    let mut x = vec![0.0; k];
    for _ in 0..samples {
        for (xi, h) in x.iter_mut().zip(&half) {
            *xi = rng.random_range(-*h..*h);
        }
        if body.gauge(&x) <= 1.0 {
            inside += 1;
        }
    }
    let p = inside as f64 / samples as f64;
    let rejection = VolumeEstimate {
        value: box_volume * p,
        method: VolumeMethod::MonteCarlo,
        std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
    };
    if p >= MIN_ACCEPTANCE && rejection.std_error <= MAX_RELATIVE_ERROR * rejection.value {
        return Ok(rejection);
    }
    let radial = radial_volume(body, samples, seed ^ 0x5eed)?;
    if p < MIN_ACCEPTANCE || radial.std_error * rejection.value < rejection.std_error * radial.value {
        Ok(radial)
    } else {
        Ok(rejection)
    }
}

/// Area of a symmetric planar body, `∫_0^π g(θ)^{-2} dθ`, by the rectangle
/// rule on 2048 angles. The reported error is the gap to the rule on every
/// other angle.
pub fn radial_quadrature_2d<G: Gauge + ?Sized>(body: &G) -> Result<VolumeEstimate> {
    radial_quadrature_2d_with(body, 2048)
}

pub fn radial_quadrature_2d_with<G: Gauge + ?Sized>(body: &G, steps: usize) -> Result<VolumeEstimate> {
    let steps = steps.max(4) & !1;
    let h = core::f64::consts::PI / steps as f64;
    let (mut fine, mut coarse) = (0.0, 0.0);
    for i in 0..steps {
        let (s, c) = (h * i as f64).sin_cos();
        let g = body.gauge(&[c, s]);
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Degenerate("unbounded body".into()));
        }
        fine += g.powi(-2);
        if i % 2 == 0 {
            coarse += g.powi(-2);
        }
    }
    let (fine, coarse) = (fine * h, coarse * 2.0 * h);
    Ok(VolumeEstimate { value: fine, method: VolumeMethod::RadialQuadrature, std_error: (fine - coarse).abs() })
}

/// Bands in `z` and azimuthal steps of [`sphere_rule`] as used for volumes
/// and moments of three-dimensional gauge bodies.
pub const SPHERE_RULE: (usize, usize) = (48, 96);

/// `∫_{S^2} f dσ` for an even integrand: midpoint rule in `z` over `nz`
/// equal-area bands of the upper hemisphere, rectangle rule over `nphi`
/// azimuths. Returns the integral on this grid and on the grid with half as
/// many bands and azimuths.
pub fn sphere_rule<const M: usize>(
    nz: usize,
    nphi: usize,
    mut f: impl FnMut(&[f64; 3]) -> Result<[f64; M]>,
) -> Result<([f64; M], [f64; M])> {
    let mut run = |nz: usize, nphi: usize| -> Result<[f64; M]> {
        let mut acc = [0.0; M];
        for i in 0..nz {
            let z = (i as f64 + 0.5) / nz as f64;
            let r = (1.0 - z * z).sqrt();
            for j in 0..nphi {
                let (s, c) = (2.0 * core::f64::consts::PI * j as f64 / nphi as f64).sin_cos();
                let v = f(&[r * c, r * s, z])?;
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += b;
                }
            }
        }
        let w = 2.0 * 2.0 * core::f64::consts::PI / (nz * nphi) as f64;
        Ok(acc.map(|a| a * w))
    };
    Ok((run(nz, nphi)?, run(nz / 2, nphi / 2)?))
}

/// Volume of a symmetric body in `R^3`, `(1/3) ∫_{S^2} g(θ)^{-3} dσ`, by
/// [`sphere_rule`]; the error is the gap to the coarse grid, which
/// understates the true error near edges and vertices.
pub fn radial_quadrature_3d<G: Gauge + ?Sized>(body: &G) -> Result<VolumeEstimate> {
    let (fine, coarse) = sphere_rule(SPHERE_RULE.0, SPHERE_RULE.1, |u| {
        let g = body.gauge(u);
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Degenerate("unbounded body".into()));
        }
        Ok([g.powi(-3) / 3.0])
    })?;
    Ok(VolumeEstimate { value: fine[0], method: VolumeMethod::RadialQuadrature, std_error: (fine[0] - coarse[0]).abs() })
}

/// `|K| = |B_2^k| E_θ[g(θ)^{-k}]` with `θ` uniform on the sphere.
pub fn radial_volume<G: Gauge + ?Sized>(body: &G, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    let k = body.dim();
    let mut rng = rng::seeded(seed);
    let (mut s1, mut s2) = (0.0, 0.0);
    let samples = samples.max(2);
    for _ in 0..samples {
        let theta = linalg::normalized(&rng::gaussian_vec(&mut rng, k));
        let g = body.gauge(&theta);
        if !(g > 0.0) {
            return Err(Error::Degenerate("unbounded body".into()));
        }
        let r = g.powi(-(k as i32));
        s1 += r;
        s2 += r * r;
    }
    let n = samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    let ball = linalg::unit_ball_volume(k);
    Ok(VolumeEstimate { value: ball * mean, method: VolumeMethod::MonteCarlo, std_error: ball * (var / n).sqrt() })
}

/// Volume of the unit ball of `norm` (restricted to `subspace` when given),
/// measured by Monte Carlo in an orthonormal frame of the subspace.
pub fn ball_volume_mc(norm: &Norm, subspace: Option<&SubspaceBasis>, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    let frame = match subspace {
        Some(s) => {
            if s.ambient_dim() != norm.dim() {
                return Err(Error::DimensionMismatch { expected: norm.dim(), got: s.ambient_dim() });
            }
            linalg::orthonormal_columns(s.vectors(), norm.dim())?
        }
        None => DMatrix::identity(norm.dim(), norm.dim()),
    };
    mc_volume(&Body::NormSection { norm: norm.clone(), frame }, samples, seed)
}

/// Volume of a body: exact for polytopes, Monte Carlo otherwise.
pub fn body_volume(body: &Body, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    match body {
        Body::Polytope(p) => Ok(VolumeEstimate::exact(p.volume())),
        other => mc_volume(other, samples, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionEstimate {
    pub value: f64,
    pub std_error: f64,
    pub exact: bool,
}

impl SectionEstimate {
    pub fn lower(&self) -> f64 {
        (self.value - 3.0 * self.std_error).max(0.0)
    }
}

/// `(k-1)`-volume of `body ∩ u^⊥`.
pub fn central_section_volume(body: &Body, u: &[f64], samples: usize, seed: u64) -> Result<SectionEstimate> {
    let k = body.dim();
    if u.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: u.len() });
    }
    if !(linalg::norm2(u) > 0.0) {
        return Err(Error::InvalidInput("zero direction".into()));
    }
    if k < 2 {
        return Ok(SectionEstimate { value: 0.0, std_error: 0.0, exact: true });
    }
    match body {
        Body::Polytope(p) => Ok(SectionEstimate { value: p.central_section_volume(u)?, std_error: 0.0, exact: true }),
        other => {
            let restricted = Restricted { body: other, frame: linalg::hyperplane_frame(u) };
            let v = mc_volume(&restricted, samples, seed)?;
            Ok(SectionEstimate { value: v.value, std_error: v.std_error, exact: k == 2 })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionSearch {
    pub random_directions: usize,
    pub refine_iterations: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for SectionSearch {
    fn default() -> Self {
        SectionSearch { random_directions: 64, refine_iterations: 50, mc_samples: 20_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxSection {
    pub direction: Vec<f64>,
    pub section: SectionEstimate,
    /// Set for one-dimensional bodies, whose hyperplane sections are points.
    pub degenerate: bool,
}

/// Searches for the largest central section: coordinate directions, random
/// directions, then coordinate ascent on the sphere with step halving. The
/// returned value is a lower bound for the supremum. For Monte Carlo bodies
/// the search uses common random numbers and the winner is re-measured with
/// a fresh stream.
pub fn max_central_section(body: &Body, search: &SectionSearch) -> Result<MaxSection> {
    let k = body.dim();
    if k < 2 {
        return Ok(MaxSection {
            direction: vec![1.0; k],
            section: SectionEstimate { value: 0.0, std_error: 0.0, exact: true },
            degenerate: true,
        });
    }
    let eval = |u: &[f64]| central_section_volume(body, u, search.mc_samples, search.seed).map(|s| s.value);
    let mut candidates: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut rng = rng::stream(search.seed, 7);
    for _ in 0..search.random_directions {
        candidates.push(linalg::normalized(&rng::gaussian_vec(&mut rng, k)));
    }
    let mut best_u = candidates[0].clone();
    let mut best = f64::MIN;
    for c in candidates {
        let v = eval(&c)?;
        if v > best {
            best = v;
            best_u = c;
        }
    }
    let mut step = 0.25;
    for _ in 0..search.refine_iterations {
        let mut improved = false;
        for i in 0..k {
            for s in [1.0, -1.0] {
                let mut trial = best_u.clone();
                trial[i] += s * step;
                let trial = linalg::normalized(&trial);
                let v = eval(&trial)?;
                if v > best {
                    best = v;
                    best_u = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-7 {
                break;
            }
        }
    }
    let section = match body {
        Body::Polytope(_) => SectionEstimate { value: best, std_error: 0.0, exact: true },
        _ => central_section_volume(body, &best_u, search.mc_samples * 2, search.seed.wrapping_add(0x9e37_79b9))?,
    };
    Ok(MaxSection { direction: best_u, section, degenerate: false })
}
