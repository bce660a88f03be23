//! Incremental convex hull in `R^d` for small `d`.
//!
//! The boundary is kept as a simplicial complex: every facet has exactly `d`
//! vertices, coplanar configurations are split into several simplicial
//! facets with the same supporting hyperplane. Points within the tolerance
//! of a facet hyperplane count as lying on it and are not added. Volumes and
//! moments are summed over the simplices fanned from an interior point.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg;
use crate::{Error, Result};

/// Relative tolerance for "on the facet".
pub const FACET_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Facet {
    pub vertices: Vec<usize>,
    /// Outward unit normal.
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Facet {
    fn distance(&self, p: &[f64]) -> f64 {
        linalg::dot(&self.normal, p) - self.offset
    }
}

#[derive(Debug, Clone)]
pub struct Hull {
    dim: usize,
    points: Vec<Vec<f64>>,
    interior: Vec<f64>,
    facets: Vec<Facet>,
}

impl Hull {
    pub fn new(points: &[Vec<f64>]) -> Result<Hull> {
        let d = points.first().map(|p| p.len()).ok_or_else(|| Error::Degenerate("empty point set".into()))?;
        if d == 0 {
            return Err(Error::Degenerate("zero-dimensional points".into()));
        }
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
            if let Some(i) = p.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        let scale = points
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |a, &b| a.max(b.abs()))
            .max(f64::MIN_POSITIVE);
        let tol = FACET_TOL * scale;
        if d == 1 {
            return Self::segment(points, tol);
        }

        let simplex = initial_simplex(points, d, scale)?;
        let mut interior = vec![0.0; d];
        for &i in &simplex {
            for (c, x) in interior.iter_mut().zip(&points[i]) {
                *c += x / (d + 1) as f64;
            }
        }
        let mut hull = Hull { dim: d, points: points.to_vec(), interior, facets: Vec::new() };
        let mut alive: Vec<bool> = Vec::new();
        for skip in 0..=d {
            let verts: Vec<usize> = simplex.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, &i)| i).collect();
            let f = hull.make_facet(verts)?;
            hull.facets.push(f);
            alive.push(true);
        }

        let mut in_simplex = vec![false; points.len()];
        for &i in &simplex {
            in_simplex[i] = true;
        }
        for (idx, p) in points.iter().enumerate() {
            if in_simplex[idx] {
                continue;
            }
            let visible: Vec<usize> = (0..hull.facets.len())
                .filter(|&f| alive[f] && hull.facets[f].distance(p) > tol)
                .collect();
            if visible.is_empty() {
                continue;
            }
            let mut ridges: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            for &f in &visible {
                let verts = &hull.facets[f].vertices;
                for skip in 0..d {
                    let mut r: Vec<usize> =
                        verts.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, &v)| v).collect();
                    r.sort_unstable();
                    *ridges.entry(r).or_insert(0) += 1;
                }
                alive[f] = false;
            }
            for (ridge, count) in ridges {
                if count == 1 {
                    let mut verts = ridge;
                    verts.push(idx);
                    let f = hull.make_facet(verts)?;
                    hull.facets.push(f);
                    alive.push(true);
                }
            }
        }
        hull.facets = hull
            .facets
            .into_iter()
            .zip(alive)
            .filter_map(|(f, a)| a.then_some(f))
            .collect();
        Ok(hull)
    }

    fn segment(points: &[Vec<f64>], tol: f64) -> Result<Hull> {
        let (mut lo, mut hi) = (0, 0);
        for (i, p) in points.iter().enumerate() {
            if p[0] < points[lo][0] {
                lo = i;
            }
            if p[0] > points[hi][0] {
                hi = i;
            }
        }
        let (a, b) = (points[lo][0], points[hi][0]);
        if b - a <= tol {
            return Err(Error::Degenerate("points do not span a segment".into()));
        }
        Ok(Hull {
            dim: 1,
            points: points.to_vec(),
            interior: vec![0.5 * (a + b)],
            facets: vec![
                Facet { vertices: vec![lo], normal: vec![-1.0], offset: -a },
                Facet { vertices: vec![hi], normal: vec![1.0], offset: b },
            ],
        })
    }

    fn make_facet(&self, vertices: Vec<usize>) -> Result<Facet> {
        let d = self.dim;
        let base = &self.points[vertices[0]];
        let rows: Vec<Vec<f64>> = vertices[1..].iter().map(|&v| linalg::sub(&self.points[v], base)).collect();
        let mut normal = linalg::cofactor_normal(&rows, d);
        let len = linalg::norm2(&normal);
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::Degenerate(format!("flat facet through {vertices:?}")));
        }
        for x in normal.iter_mut() {
            *x /= len;
        }
        let mut offset = linalg::dot(&normal, base);
        if linalg::dot(&normal, &self.interior) > offset {
            for x in normal.iter_mut() {
                *x = -*x;
            }
            offset = -offset;
        }
        Ok(Facet { vertices, normal, offset })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn interior_point(&self) -> &[f64] {
        &self.interior
    }

    /// Indices of the input points that lie on the hull boundary as
    /// simplicial vertices, ascending.
    pub fn vertex_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.facets.iter().flat_map(|f| f.vertices.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        self.vertex_indices().into_iter().map(|i| self.points[i].clone()).collect()
    }

    fn simplices(&self) -> impl Iterator<Item = (f64, Vec<&[f64]>)> + '_ {
        let d = self.dim;
        let fact = linalg::factorial(d);
        self.facets.iter().map(move |f| {
            let m = DMatrix::from_fn(d, d, |i, j| self.points[f.vertices[i]][j] - self.interior[j]);
            let vol = linalg::det(&m).abs() / fact;
            (vol, f.vertices.iter().map(|&v| self.points[v].as_slice()).collect())
        })
    }

    pub fn volume(&self) -> f64 {
        self.simplices().map(|(v, _)| v).sum()
    }

    /// `∫ x x^T dx` over the hull.
    pub fn second_moment(&self) -> DMatrix<f64> {
        let d = self.dim;
        let mut out = DMatrix::<f64>::zeros(d, d);
        for (vol, verts) in self.simplices() {
            let mut sum = self.interior.clone();
            let mut acc = DMatrix::<f64>::zeros(d, d);
            let c = &self.interior;
            for i in 0..d {
                for j in 0..d {
                    acc[(i, j)] += c[i] * c[j];
                }
            }
            for v in &verts {
                for i in 0..d {
                    sum[i] += v[i];
                    for j in 0..d {
                        acc[(i, j)] += v[i] * v[j];
                    }
                }
            }
            let w = vol / ((d + 1) * (d + 2)) as f64;
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += w * (acc[(i, j)] + sum[i] * sum[j]);
                }
            }
        }
        out
    }

    /// Distinct supporting hyperplanes `(unit normal, offset)`.
    pub fn hyperplanes(&self, rel_tol: f64) -> Vec<(Vec<f64>, f64)> {
        let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
        for f in &self.facets {
            let dup = out.iter().any(|(n, o)| {
                (o - f.offset).abs() <= rel_tol * o.abs().max(1.0)
                    && n.iter().zip(&f.normal).all(|(a, b)| (a - b).abs() <= rel_tol)
            });
            if !dup {
                out.push((f.normal.clone(), f.offset));
            }
        }
        out
    }
}

/// `d + 1` affinely independent points, greedily spread out.
fn initial_simplex(points: &[Vec<f64>], d: usize, scale: f64) -> Result<Vec<usize>> {
    let first = (0..points.len())
        .max_by(|&a, &b| {
            linalg::norm2(&points[a]).partial_cmp(&linalg::norm2(&points[b])).unwrap().then(b.cmp(&a))
        })
        .unwrap();
    let mut chosen = vec![first];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while chosen.len() < d + 1 {
        let mut best = (0.0, usize::MAX);
        for (i, p) in points.iter().enumerate() {
            let mut r = linalg::sub(p, &points[first]);
            for b in &basis {
                let t = linalg::dot(&r, b);
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= t * y;
                }
            }
            let dist = linalg::norm2(&r);
            if dist > best.0 {
                best = (dist, i);
            }
        }
        if best.1 == usize::MAX || best.0 <= 1e-10 * scale {
            return Err(Error::Degenerate(format!(
                "points span only {} dimensions of R^{d}",
                chosen.len() - 1
            )));
        }
        let mut r = linalg::sub(&points[best.1], &points[first]);
        for b in &basis {
            let t = linalg::dot(&r, b);
            for (x, y) in r.iter_mut().zip(b) {
                *x -= t * y;
            }
        }
        basis.push(linalg::normalized(&r));
        chosen.push(best.1);
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cube(d: usize) -> Vec<Vec<f64>> {
        (0..1usize << d)
            .map(|m| (0..d).map(|i| if m >> i & 1 == 1 { 1.0 } else { -1.0 }).collect())
            .collect()
    }

    fn cross(d: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for i in 0..d {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; d];
                v[i] = s;
                out.push(v);
            }
        }
        out
    }

    #[test]
    fn cube_and_cross_polytope_volumes() {
        for d in 1..=6 {
            let c = Hull::new(&cube(d)).unwrap();
            assert_relative_eq!(c.volume(), (1u64 << d) as f64, max_relative = 1e-12);
            assert_eq!(c.vertex_indices().len(), 1 << d);
            assert_eq!(c.hyperplanes(1e-9).len(), 2 * d);
            let x = Hull::new(&cross(d)).unwrap();
            assert_relative_eq!(x.volume(), (1u64 << d) as f64 / linalg::factorial(d), max_relative = 1e-12);
            assert_eq!(x.hyperplanes(1e-9).len(), 1 << d);
        }
    }

    #[test]
    fn interior_and_duplicate_points_are_dropped() {
        let mut pts = cube(3);
        pts.push(vec![0.1, 0.2, -0.3]);
        pts.push(vec![1.0, 1.0, 1.0]);
        pts.push(vec![1.0, 0.0, 0.0]);
        let h = Hull::new(&pts).unwrap();
        assert_relative_eq!(h.volume(), 8.0, max_relative = 1e-12);
        assert_eq!(h.vertex_indices().len(), 8);
    }

    #[test]
    fn flat_sets_are_rejected() {
        let pts = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        assert!(matches!(Hull::new(&pts), Err(Error::Degenerate(_))));
    }

    #[test]
    fn cube_second_moment() {
        let pts: Vec<Vec<f64>> = cube(3).into_iter().map(|v| v.iter().map(|x| x * 0.5).collect()).collect();
        let m = Hull::new(&pts).unwrap().second_moment();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(m[(i, j)], if i == j { 1.0 / 12.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
    }
}
