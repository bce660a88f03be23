//! Isotropic position, the isotropy constant and the slicing checks.
//!
//! A symmetric body `K ⊂ R^k` is isotropic when `|K| = 1` and
//! `∫_K x x^T dx = L_K^2 I`. For any body, `A = s C^{-1/2}` with `C` the
//! normalised covariance and `s = (|K| det C^{-1/2})^{-1/k}` puts `A(K)` in
//! isotropic position, and then `L_K = s`.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;

use crate::linalg;
use crate::norm::{Norm, SubspaceBasis};
use crate::rng;
use crate::volume::{self, Body, Gauge, SectionSearch, VolumeEstimate};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    /// `(1/|K|) ∫_K x x^T dx`.
    pub matrix: DMatrix<f64>,
    /// Entrywise standard errors, zero on the exact path.
    pub std_errors: DMatrix<f64>,
    pub volume: VolumeEstimate,
    pub exact: bool,
}

/// Normalised second-moment matrix: exact for polytopes and segments, radial
/// quadrature in dimensions two and three, Monte Carlo (uniform samples by
/// rejection from the bounding box) otherwise.
pub fn covariance(body: &Body, samples: usize, seed: u64) -> Result<Covariance> {
    let k = body.dim();
    match body {
        Body::Polytope(p) => {
            let vol = p.volume();
            if !(vol > 0.0) {
                return Err(Error::Degenerate("body has no volume".into()));
            }
            Ok(Covariance {
                matrix: p.second_moment() / vol,
                std_errors: DMatrix::zeros(k, k),
                volume: VolumeEstimate::exact(vol),
                exact: true,
            })
        }
        other if k == 1 => {
            let a = 1.0 / other.gauge(&[1.0]);
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Degenerate("body has no volume".into()));
            }
            Ok(Covariance {
                matrix: DMatrix::from_element(1, 1, a * a / 3.0),
                std_errors: DMatrix::zeros(1, 1),
                volume: VolumeEstimate::exact(2.0 * a),
                exact: true,
            })
        }
        other if k == 2 => covariance_radial_2d(other),
        other if k == 3 => covariance_radial_3d(other),
        other => {
            let mut c = covariance_mc(other, samples, seed)?;
            c.volume = volume::mc_volume(other, samples, seed ^ 0xc0)?;
            Ok(c)
        }
    }
}

/// `∫_K x x^T = ∫ r(θ)^4/4 u u^T dθ` and `|K| = ∫ r(θ)^2/2 dθ` with
/// `r = 1/g(u)`, by the midpoint rule; the error estimate compares against
/// the rule on every other node.
pub fn covariance_radial_2d<G: Gauge + ?Sized>(body: &G) -> Result<Covariance> {
    const STEPS: usize = 4096;
    let h = core::f64::consts::PI / STEPS as f64;
    // [m_00, m_01, m_11, vol] on all nodes and on the even ones
    let mut fine = [0.0; 4];
    let mut coarse = [0.0; 4];
    for i in 0..STEPS {
        let t = h * (i as f64 + 0.5);
        let (s, c) = t.sin_cos();
        let g = body.gauge(&[c, s]);
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Degenerate("unbounded body".into()));
        }
        let r2 = g.powi(-2);
        let r4 = r2 * r2 / 4.0;
        let terms = [r4 * c * c, r4 * c * s, r4 * s * s, r2 / 2.0];
        for (f, t) in fine.iter_mut().zip(&terms) {
            *f += t;
        }
        if i % 2 == 0 {
            for (f, t) in coarse.iter_mut().zip(&terms) {
                *f += t;
            }
        }
    }
    // symmetric body: the half-turn is doubled
    let fine = fine.map(|x| 2.0 * h * x);
    let coarse = coarse.map(|x| 4.0 * h * x);
    let vol = fine[3];
    let m = DMatrix::from_row_slice(2, 2, &[fine[0], fine[1], fine[1], fine[2]]) / vol;
    let mc = DMatrix::from_row_slice(2, 2, &[coarse[0], coarse[1], coarse[1], coarse[2]]) / coarse[3];
    Ok(Covariance {
        std_errors: (&m - mc).abs(),
        matrix: m,
        volume: VolumeEstimate {
            value: vol,
            method: volume::VolumeMethod::RadialQuadrature,
            std_error: (fine[3] - coarse[3]).abs(),
        },
        exact: false,
    })
}

/// `∫_K x x^T = (1/5) ∫_{S^2} r^5 u u^T dσ` and `|K| = (1/3) ∫ r^3 dσ` by
/// [`volume::sphere_rule`].
pub fn covariance_radial_3d<G: Gauge + ?Sized>(body: &G) -> Result<Covariance> {
    let (nz, nphi) = volume::SPHERE_RULE;
    let (fine, coarse) = volume::sphere_rule(nz, nphi, |u| {
        let g = body.gauge(u);
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Degenerate("unbounded body".into()));
        }
        let r3 = g.powi(-3);
        let r5 = r3 * g.powi(-2) / 5.0;
        Ok([r5 * u[0] * u[0], r5 * u[0] * u[1], r5 * u[0] * u[2], r5 * u[1] * u[1], r5 * u[1] * u[2], r5 * u[2] * u[2], r3 / 3.0])
    })?;
    let matrix = |m: &[f64; 7]| {
        DMatrix::from_row_slice(3, 3, &[m[0], m[1], m[2], m[1], m[3], m[4], m[2], m[4], m[5]]) / m[6]
    };
    let m = matrix(&fine);
    Ok(Covariance {
        std_errors: (&m - matrix(&coarse)).abs(),
        matrix: m,
        volume: VolumeEstimate {
            value: fine[6],
            method: volume::VolumeMethod::RadialQuadrature,
            std_error: (fine[6] - coarse[6]).abs(),
        },
        exact: false,
    })
}

/// Monte Carlo covariance of any gauge body. The returned volume is the
/// rejection estimate from the same samples.
pub fn covariance_mc<G: Gauge + ?Sized>(body: &G, samples: usize, seed: u64) -> Result<Covariance> {
    let k = body.dim();
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
    let mut rng = rng::seeded(seed);
    let mut s1 = DMatrix::<f64>::zeros(k, k);
    let mut s2 = DMatrix::<f64>::zeros(k, k);
    let mut inside = 0usize;
    let mut x = vec![0.0; k];
    for _ in 0..samples {
        for (xi, h) in x.iter_mut().zip(&half) {
            *xi = rng.random_range(-*h..*h);
        }
        if body.gauge(&x) <= 1.0 {
            inside += 1;
            for i in 0..k {
                for j in 0..k {
                    let v = x[i] * x[j];
                    s1[(i, j)] += v;
                    s2[(i, j)] += v * v;
                }
            }
        }
    }
    if inside < 2 {
        return Err(Error::Degenerate("too few samples inside the body".into()));
    }
    let m = inside as f64;
    let mean = &s1 / m;
    let var = (&s2 / m - mean.component_mul(&mean)) * (m / (m - 1.0));
    let std_errors = var.map(|v| (v.max(0.0) / m).sqrt());
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let p = m / samples as f64;
    Ok(Covariance {
        matrix: mean,
        std_errors,
        volume: VolumeEstimate {
            value: box_volume * p,
            method: volume::VolumeMethod::MonteCarlo,
            std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
        },
        exact: false,
    })
}

#[derive(Debug, Clone)]
pub struct IsotropyReport {
    /// `A` with `A(K)` isotropic.
    pub map: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub l_k: f64,
    /// `max |cov_ij(A K) - L_K^2 δ_ij|`.
    pub cov_residual: f64,
    /// `| |A(K)| - 1 |`.
    pub volume_check: f64,
    pub exact: bool,
    /// `A(K)`.
    pub body: Body,
}

/// Puts `body` in isotropic position and re-measures the result.
pub fn to_isotropic(body: &Body, samples: usize, seed: u64) -> Result<IsotropyReport> {
    let k = body.dim();
    let cov = covariance(body, samples, seed)?;
    let (inv_sqrt, det) = linalg::sym_inv_sqrt(&cov.matrix)?;
    let s = (cov.volume.value / det.sqrt()).powf(-1.0 / k as f64);
    let map = inv_sqrt * s;
    let inverse = linalg::inverse(&map)?;
    let image = body.linear_image(&map)?;
    let check = covariance(&image, samples, seed.wrapping_add(1))?;
    let target = DMatrix::<f64>::identity(k, k) * (s * s);
    let cov_residual = (&check.matrix - target).abs().max();
    Ok(IsotropyReport {
        map,
        inverse,
        l_k: s,
        cov_residual,
        volume_check: (check.volume.value - 1.0).abs(),
        exact: cov.exact,
        body: image,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pi1Estimate {
    pub lower_bound: f64,
    /// The family attaining `lower_bound`.
    pub witness_family: Vec<Vec<f64>>,
    pub family_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pi1Search {
    /// Gaussian families of sizes `m * k` for each multiplier.
    pub multipliers: [usize; 3],
    pub directions: usize,
    pub refinements: usize,
    pub seed: u64,
}

impl Default for Pi1Search {
    fn default() -> Self {
        Pi1Search { multipliers: [1, 4, 16], directions: 10_000, refinements: 100, seed: 0 }
    }
}

/// `sup_{y ∈ K} Σ_j |<y, α_j>|`: exact over the vertices of a polytope,
/// otherwise a search over boundary points `θ / g(θ)`.
pub fn family_sup(body: &Body, family: &[Vec<f64>], search: &Pi1Search) -> f64 {
    let f = |y: &[f64]| family.iter().map(|a| linalg::dot(a, y).abs()).sum::<f64>();
    if let Some(p) = body.as_polytope() {
        return p.vertices().iter().map(|v| f(v)).fold(0.0, f64::max);
    }
    let k = body.dim();
    let radial = |theta: &[f64]| {
        let g = body.gauge(theta);
        if g > 0.0 {
            f(theta) / g
        } else {
            0.0
        }
    };
    let mut rng = rng::stream(search.seed, 23);
    let mut best_theta = vec![0.0; k];
    let mut best = 0.0;
    for _ in 0..search.directions {
        let theta = rng::gaussian_vec(&mut rng, k);
        let v = radial(&theta);
        if v > best {
            best = v;
            best_theta = theta;
        }
    }
    let mut step = 0.25 * linalg::norm2(&best_theta);
    for _ in 0..search.refinements {
        let mut improved = false;
        for i in 0..k {
            for s in [1.0, -1.0] {
                let mut t = best_theta.clone();
                t[i] += s * step;
                let v = radial(&t);
                if v > best {
                    best = v;
                    best_theta = t;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// `Σ |α_j|_2 / sup_{y ∈ K} Σ |<y, α_j>|` for one family.
pub fn family_ratio(body: &Body, family: &[Vec<f64>], search: &Pi1Search) -> f64 {
    let num: f64 = family.iter().map(|a| linalg::norm2(a)).sum();
    num / family_sup(body, family, search)
}

/// Lower bound for the 1-summing norm of the adjoint of `l_2^k -> E_K`:
/// the best ratio over the standard basis and Gaussian families.
pub fn pi1_lower_bound(body: &Body, search: &Pi1Search) -> Pi1Estimate {
    let k = body.dim();
    let mut families: Vec<Vec<Vec<f64>>> = vec![(0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            e
        })
        .collect()];
    for (s, m) in search.multipliers.iter().enumerate() {
        let mut rng = rng::stream(search.seed, 100 + s as u64);
        families.push((0..m * k).map(|_| rng::gaussian_vec(&mut rng, k)).collect());
    }
    pi1_over_families(body, families, search)
}

/// The best ratio over explicitly given families.
pub fn pi1_over_families(body: &Body, families: Vec<Vec<Vec<f64>>>, search: &Pi1Search) -> Pi1Estimate {
    let mut best = Pi1Estimate { lower_bound: 0.0, witness_family: Vec::new(), family_size: 0 };
    for fam in families {
        if fam.is_empty() {
            continue;
        }
        let r = family_ratio(body, &fam, search);
        if r > best.lower_bound {
            best = Pi1Estimate { lower_bound: r, family_size: fam.len(), witness_family: fam };
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The inequality is vacuous for this instance (e.g. `k = 1`).
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheckReport {
    pub lhs: f64,
    pub rhs: f64,
    pub constant_used: f64,
    /// `rhs / lhs`.
    pub margin: f64,
    pub verdict: Verdict,
    /// Smallest constant that would make the instance pass, when defined.
    pub minimal_constant: Option<f64>,
    pub volume: Option<VolumeEstimate>,
    pub max_section: Option<f64>,
    pub l_k: Option<f64>,
}

impl BoundCheckReport {
    fn skipped(constant: f64) -> Self {
        BoundCheckReport {
            lhs: 0.0,
            rhs: 0.0,
            constant_used: constant,
            margin: f64::INFINITY,
            verdict: Verdict::Skipped,
            minimal_constant: None,
            volume: None,
            max_section: None,
            l_k: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub mc_samples: usize,
    pub section: SectionSearch,
    pub pi1: Pi1Search,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { mc_samples: 200_000, section: SectionSearch::default(), pi1: Pi1Search::default(), seed: 0 }
    }
}

/// `2e √(6 + 3 ln(n/k))`.
pub fn subspace_slicing_constant(n: usize, k: usize) -> f64 {
    2.0 * core::f64::consts::E * (6.0 + 3.0 * (n as f64 / k as f64).ln()).sqrt()
}

/// `2e √6`.
pub fn quotient_slicing_constant() -> f64 {
    2.0 * core::f64::consts::E * 6f64.sqrt()
}

/// `|B|^{(k-1)/k}` against `constant · max section`, with the volume raised
/// and the section lowered by three standard errors.
fn slicing_check(body: &Body, constant: f64, log_factor: f64, opts: &CheckOptions) -> Result<BoundCheckReport> {
    let k = body.dim();
    if k < 2 {
        return Ok(BoundCheckReport::skipped(constant));
    }
    let vol = volume::body_volume(body, opts.mc_samples, opts.seed)?;
    let search = SectionSearch { seed: opts.seed ^ opts.section.seed, ..opts.section };
    let section = volume::max_central_section(body, &search)?;
    Ok(slicing_report(k, vol, &section, constant, log_factor))
}

fn slicing_report(k: usize, vol: VolumeEstimate, section: &volume::MaxSection, constant: f64, log_factor: f64) -> BoundCheckReport {
    let lhs = vol.upper().powf((k - 1) as f64 / k as f64);
    let sec = section.section.lower();
    let rhs = constant * log_factor * sec;
    let margin = rhs / lhs;
    BoundCheckReport {
        lhs,
        rhs,
        constant_used: constant,
        margin,
        verdict: if margin >= 1.0 - 1e-12 { Verdict::Pass } else { Verdict::Fail },
        minimal_constant: Some(lhs / (log_factor * sec)),
        volume: Some(vol),
        max_section: Some(section.section.value),
        l_k: None,
    }
}

/// Dual directions used to sandwich a non-polytopal quotient ball in
/// dimension 2 and 3.
pub const SANDWICH_DIRECTIONS: [usize; 2] = [720, 1500];

/// `|B_E|^{(k-1)/k} <= 2e √(6 + 3 ln(n/k)) sup_H |B_E ∩ H|` for a subspace.
pub fn check_subspace_slicing(norm: &Norm, e: &SubspaceBasis, opts: &CheckOptions) -> Result<BoundCheckReport> {
    let (body, _) = Body::norm_section(norm, e)?;
    slicing_check(&body, subspace_slicing_constant(norm.dim(), e.sub_dim()), 1.0, opts)
}

/// `|B|^{(k-1)/k} <= C (1 + ln n) sup_H |B ∩ H|` for the quotient ball
/// `B = Q(B_X)`; `constant` defaults to `2e √6`. Non-polytopal balls in
/// dimension 2 and 3 are bracketed by [`volume::quotient_sandwich`].
pub fn check_quotient_slicing(norm: &Norm, q: &DMatrix<f64>, constant: Option<f64>, opts: &CheckOptions) -> Result<BoundCheckReport> {
    let body = Body::quotient(norm, q)?;
    let c = constant.unwrap_or_else(quotient_slicing_constant);
    let log_factor = 1.0 + (norm.dim() as f64).ln();
    let k = body.dim();
    if body.as_polytope().is_some() || !(2..=3).contains(&k) {
        return slicing_check(&body, c, log_factor, opts);
    }
    // the volume is bounded above by an outer polytope and the sections
    // below by an inner one, both exact
    let (inner, outer) = volume::quotient_sandwich(norm, q, SANDWICH_DIRECTIONS[k - 2])?;
    let (lo, hi) = (inner.volume(), outer.volume());
    let vol = VolumeEstimate { value: 0.5 * (lo + hi), method: volume::VolumeMethod::PolytopeSandwich, std_error: (hi - lo) / 6.0 };
    let search = SectionSearch { seed: opts.seed ^ opts.section.seed, ..opts.section };
    let mut section = volume::max_central_section(&Body::Polytope(inner), &search)?;
    section.section.exact = false;
    Ok(slicing_report(k, vol, &section, c, log_factor))
}

/// `L_K π_1 <= 2√2` with the π_1 lower bound from [`pi1_lower_bound`],
/// after moving `body` to isotropic position.
pub fn check_isotropic_pi1(body: &Body, opts: &CheckOptions) -> Result<BoundCheckReport> {
    let iso = to_isotropic(body, opts.mc_samples, opts.seed)?;
    let pi1 = pi1_lower_bound(&iso.body, &Pi1Search { seed: opts.seed ^ opts.pi1.seed, ..opts.pi1 });
    let lhs = iso.l_k * pi1.lower_bound;
    let rhs = 2.0 * core::f64::consts::SQRT_2;
    Ok(BoundCheckReport {
        lhs,
        rhs,
        constant_used: rhs,
        margin: rhs / lhs,
        verdict: if lhs <= rhs * (1.0 + 1e-6) { Verdict::Pass } else { Verdict::Fail },
        minimal_constant: Some(lhs),
        volume: None,
        max_section: None,
        l_k: Some(iso.l_k),
    })
}
