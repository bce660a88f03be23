//! Lozanovskii weights.
//!
//! For a 1-unconditional norm `N` on `R^n` the weights `λ` maximise
//! `Σ log λ_i` over the unit ball. At the maximiser
//!
//! ```text
//! (1/n) |α|_1  <=  N(λ ∘ α)  <=  |α|_∞      for every α,
//! ```
//!
//! the right side because `N(λ) = 1`, the left side because the first-order
//! conditions say exactly `N*(1/(nλ)) = 1`. The defect `N*(1/(nλ)) N(λ) - 1`
//! is the KKT residual reported by the solvers; it is `>= 0` for any positive
//! `λ` and `n log` of `1 + residual` bounds the gap to the optimum.
//!
//! For norms built from weighted `l_p` leaves with max/sum blocks the
//! maximiser has a closed form, computed by [`solve_weights`]. A projected
//! gradient ascent ([`solve_weights_iterative`]) is available for smooth
//! norms.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;

use crate::norm::{Exponent, Norm};
use crate::rng;
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LozanovskiiCertificate {
    pub weights: Vec<f64>,
    /// `Σ log λ_i`.
    pub objective: f64,
    /// `N(λ)`.
    pub norm_of_lambda: f64,
    /// `max(0, 1 - inf_α N(λα) / (|α|_1 / n))`.
    pub lower_residual: f64,
    /// `N*(1/(nλ)) N(λ) - 1`.
    pub kkt_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

fn certificate(norm: &Norm, weights: Vec<f64>, iterations: usize) -> LozanovskiiCertificate {
    let n = weights.len() as f64;
    let norm_of_lambda = norm.eval_unchecked(&weights);
    let inv: Vec<f64> = weights.iter().map(|l| 1.0 / (n * l)).collect();
    let dual = norm.eval_dual_unchecked(&inv);
    LozanovskiiCertificate {
        objective: weights.iter().map(|l| l.ln()).sum(),
        norm_of_lambda,
        lower_residual: (1.0 - 1.0 / dual).max(0.0),
        kkt_residual: dual * norm_of_lambda - 1.0,
        iterations,
        weights,
    }
}

/// Closed-form maximiser of `Σ log λ_i` subject to `N(λ) <= budget`.
fn closed_form(norm: &Norm, budget: f64, out: &mut [f64]) {
    match norm {
        Norm::Lp { p, weights } => {
            let m = weights.len() as f64;
            let level = budget * m.powf(-p.reciprocal());
            for (o, w) in out.iter_mut().zip(weights) {
                *o = level / w;
            }
        }
        Norm::Max(blocks) => {
            for b in blocks {
                let mut sub = vec![0.0; b.coords.len()];
                closed_form(&b.norm, budget, &mut sub);
                crate::norm::scatter(&b.coords, &sub, out);
            }
        }
        Norm::Sum(blocks) => {
            let total = norm.dim() as f64;
            for b in blocks {
                let mut sub = vec![0.0; b.coords.len()];
                closed_form(&b.norm, budget * b.coords.len() as f64 / total, &mut sub);
                crate::norm::scatter(&b.coords, &sub, out);
            }
        }
    }
}

/// Lozanovskii weights with the default tolerance.
pub fn solve_weights(norm: &Norm) -> Result<LozanovskiiCertificate> {
    solve_weights_with(norm, &SolverOptions::default())
}

/// Lozanovskii weights. The result is rejected if its KKT residual exceeds
/// `opts.tol`.
pub fn solve_weights_with(norm: &Norm, opts: &SolverOptions) -> Result<LozanovskiiCertificate> {
    norm.validate()?;
    let n = norm.dim();
    let weights = if n == 1 {
        vec![1.0 / norm.eval_unchecked(&[1.0])]
    } else {
        let mut w = vec![0.0; n];
        closed_form(norm, 1.0, &mut w);
        // remove rounding drift so that N(λ) = 1 to working precision
        let s = norm.eval_unchecked(&w);
        w.iter().map(|x| x / s).collect()
    };
    let cert = certificate(norm, weights, 0);
    if !(cert.kkt_residual <= opts.tol) {
        return Err(Error::NotConverged { iterations: 0, residual: cert.kkt_residual, best: cert.weights });
    }
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterativeSolution {
    pub certificate: LozanovskiiCertificate,
    /// Objective `Σ log λ_i` after each accepted step, starting with the
    /// initial point.
    pub trace: Vec<f64>,
}

/// Projected gradient ascent on `u = log λ` with Armijo backtracking and
/// radial projection `λ <- λ / N(λ)`. Suited to norms that are smooth at
/// the optimum; on kinks it stalls and reports [`Error::NotConverged`].
pub fn solve_weights_iterative(norm: &Norm, opts: &SolverOptions) -> Result<IterativeSolution> {
    norm.validate()?;
    let n = norm.dim();
    let nf = n as f64;
    let project = |lambda: Vec<f64>| {
        let s = norm.eval_unchecked(&lambda);
        lambda.into_iter().map(|x| x / s).collect::<Vec<f64>>()
    };
    let objective = |lambda: &[f64]| lambda.iter().map(|l| l.ln()).sum::<f64>();
    let residual = |lambda: &[f64]| {
        let inv: Vec<f64> = lambda.iter().map(|l| 1.0 / (nf * l)).collect();
        norm.eval_dual_unchecked(&inv) * norm.eval_unchecked(lambda) - 1.0
    };

    let mut lambda = project(vec![1.0; n]);
    let mut value = objective(&lambda);
    let mut trace = vec![value];
    let mut step = 1.0;
    let mut quiet = 0usize;
    let mut res = residual(&lambda);
    let mut iterations = 0;
    while iterations < opts.max_iter && res > opts.tol {
        iterations += 1;
        let g = norm.subgradient(&lambda);
        // N(λ) = 1 after projection
        let grad: Vec<f64> = (0..n).map(|i| 1.0 - nf * lambda[i] * g[i]).collect();
        let g2: f64 = grad.iter().map(|x| x * x).sum();
        if g2 == 0.0 {
            break;
        }
        let mut accepted = None;
        let mut t = step;
        while t > 1e-16 {
            let trial = project(lambda.iter().zip(&grad).map(|(l, d)| l * (t * d).exp()).collect());
            let v = objective(&trial);
            if v >= value + 1e-4 * t * g2 {
                accepted = Some((trial, v));
                break;
            }
            t *= 0.5;
        }
        let Some((next, v)) = accepted else { break };
        let change = (v - value).abs() / value.abs().max(1.0);
        lambda = next;
        value = v;
        trace.push(value);
        step = (2.0 * t).min(1e3);
        res = residual(&lambda);
        quiet = if change < 1e-12 { quiet + 1 } else { 0 };
        if quiet >= 20 {
            break;
        }
    }
    if res > opts.tol {
        return Err(Error::NotConverged { iterations, residual: res, best: lambda });
    }
    Ok(IterativeSolution { certificate: certificate(norm, lambda, iterations), trace })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    /// `min N(λα) / (|α|_1/n)` over the tested `α`.
    pub min_left_ratio: f64,
    /// `max N(λα) / |α|_∞` over the tested `α`.
    pub max_right_ratio: f64,
    /// `1 / N*(1/(nλ))`, the infimum of the left ratio over all `α`.
    pub exact_left_ratio: f64,
    /// `N(λ)`, the supremum of the right ratio over all `α`.
    pub exact_right_ratio: f64,
    pub samples: usize,
    pub sign_vertices: usize,
    pub passed: bool,
}

/// Largest dimension for which all sign vectors are checked.
pub const SIGN_VERTEX_DIM: usize = 16;

/// Checks both inequalities on `samples` random `α` and, for `n <= 16`, on
/// every `α ∈ {±1}^n`.
pub fn verify_certificate(norm: &Norm, cert: &LozanovskiiCertificate, samples: usize, seed: u64) -> Result<CertificateReport> {
    let n = norm.dim();
    if cert.weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: cert.weights.len() });
    }
    let nf = n as f64;
    let lambda = &cert.weights;
    let mut left = f64::INFINITY;
    let mut right = 0.0f64;
    let mut scratch = vec![0.0; n];
    let mut test = |alpha: &[f64], left: &mut f64, right: &mut f64| {
        let l1: f64 = alpha.iter().map(|a| a.abs()).sum();
        let linf = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if linf == 0.0 {
            return;
        }
        for i in 0..n {
            scratch[i] = lambda[i] * alpha[i];
        }
        let v = norm.eval_unchecked(&scratch);
        *left = left.min(v * nf / l1);
        *right = right.max(v / linf);
    };
    let mut sign_vertices = 0;
    if n <= SIGN_VERTEX_DIM {
        let mut alpha = vec![0.0; n];
        for mask in 0u32..(1u32 << n) {
            for (i, a) in alpha.iter_mut().enumerate() {
                *a = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
            }
            test(&alpha, &mut left, &mut right);
            sign_vertices += 1;
        }
    }
    let mut rng = rng::seeded(seed);
    for s in 0..samples {
        let alpha: Vec<f64> = match s % 3 {
            0 => rng::gaussian_vec(&mut rng, n),
            1 => (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            _ => {
                // sparse: a random support of random size
                let keep = rng.random_range(1..=n);
                let mut a = vec![0.0; n];
                for _ in 0..keep {
                    a[rng.random_range(0..n)] = rng.random_range(-1.0..1.0);
                }
                a
            }
        };
        test(&alpha, &mut left, &mut right);
    }
    let inv: Vec<f64> = lambda.iter().map(|l| 1.0 / (nf * l)).collect();
    Ok(CertificateReport {
        min_left_ratio: left,
        max_right_ratio: right,
        exact_left_ratio: 1.0 / norm.eval_dual_unchecked(&inv),
        exact_right_ratio: norm.eval_unchecked(lambda),
        samples,
        sign_vertices,
        passed: left >= 1.0 - 1e-8 && right <= 1.0 + 1e-8,
    })
}

/// The diagonal maps `T = diag(1/(nλ))` and `S = diag(nλ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMaps {
    pub t_diag: Vec<f64>,
    pub s_diag: Vec<f64>,
}

pub fn build_embedding(cert: &LozanovskiiCertificate) -> Result<EmbeddingMaps> {
    let n = cert.weights.len() as f64;
    if let Some(i) = cert.weights.iter().position(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidInput(alloc::format!("weight {i} is not positive")));
    }
    Ok(EmbeddingMaps {
        t_diag: cert.weights.iter().map(|l| 1.0 / (n * l)).collect(),
        s_diag: cert.weights.iter().map(|l| n * l).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingCheck {
    /// Largest sampled `|Tα|_1 / N(α)`.
    pub t_ratio: f64,
    /// Largest sampled `N(Sβ) / |β|_∞`, divided by `n`.
    pub s_ratio: f64,
    /// `|T : X -> l_1| = N*(T_diag)`.
    pub t_norm: f64,
    /// `|S : l_∞ -> X| = N(S_diag)`.
    pub s_norm: f64,
    pub passed: bool,
}

/// Checks `|T: X -> l_1| <= 1` and `|S: l_∞ -> X| <= n` on sign vectors and
/// random samples, and evaluates both operator norms exactly.
pub fn check_embedding(norm: &Norm, maps: &EmbeddingMaps, samples: usize, seed: u64) -> Result<EmbeddingCheck> {
    let n = norm.dim();
    if maps.t_diag.len() != n || maps.s_diag.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: maps.t_diag.len() });
    }
    let nf = n as f64;
    let mut rng = rng::seeded(seed);
    let mut probes: Vec<Vec<f64>> = Vec::new();
    if n <= SIGN_VERTEX_DIM {
        for mask in 0u32..(1u32 << n) {
            probes.push((0..n).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect());
        }
    }
    for _ in 0..samples {
        probes.push(rng::gaussian_vec(&mut rng, n));
    }
    let (mut t_ratio, mut s_ratio) = (0.0f64, 0.0f64);
    for a in &probes {
        let na = norm.eval_unchecked(a);
        if na > 0.0 {
            let ta: f64 = a.iter().zip(&maps.t_diag).map(|(x, t)| (x * t).abs()).sum();
            t_ratio = t_ratio.max(ta / na);
        }
        let linf = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if linf > 0.0 {
            let sb: Vec<f64> = a.iter().zip(&maps.s_diag).map(|(x, s)| x * s).collect();
            s_ratio = s_ratio.max(norm.eval_unchecked(&sb) / (nf * linf));
        }
    }
    let t_norm = norm.eval_dual_unchecked(&maps.t_diag);
    let s_norm = norm.eval_unchecked(&maps.s_diag);
    let tol = 1.0 + 1e-8;
    Ok(EmbeddingCheck {
        t_ratio,
        s_ratio,
        t_norm,
        s_norm,
        passed: t_ratio <= tol && s_ratio <= tol && t_norm <= tol && s_norm <= nf * tol,
    })
}

/// Weighted `l_p` leaf; `p = f64::INFINITY` gives `l_∞`.
pub fn leaf(p: f64, weights: Vec<f64>) -> Result<Norm> {
    let e = if p.is_infinite() { Exponent::Infinity } else { Exponent::Finite(p) };
    Norm::lp(e, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::Block;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn symmetric_norms() {
        for n in 2..=10 {
            let nf = n as f64;
            for (norm, expect) in [(Norm::l1(n), 1.0 / nf), (Norm::l2(n), nf.powf(-0.5)), (Norm::linf(n), 1.0)] {
                let c = solve_weights(&norm).unwrap();
                for l in &c.weights {
                    assert!((l - expect).abs() <= 1e-12, "{norm:?}: {l} vs {expect}");
                }
                assert!(c.kkt_residual.abs() <= 1e-12);
            }
            let c = solve_weights(&Norm::l1(n)).unwrap();
            assert_relative_eq!(c.objective, -nf * nf.ln(), max_relative = 1e-12);
        }
    }

    #[test]
    fn one_dimensional() {
        let norm = leaf(3.0, vec![2.5]).unwrap();
        let c = solve_weights(&norm).unwrap();
        assert_relative_eq!(c.weights[0], 0.4);
    }

    #[test]
    fn weighted_l1_matches_grid_search() {
        // maximise log λ1 + log λ2 subject to 2λ1 + λ2 = 1
        let mut best = (f64::MIN, 0.0);
        let mut l1 = 1e-4;
        while l1 < 0.5 {
            let v = l1.ln() + (1.0 - 2.0 * l1).ln();
            if v > best.0 {
                best = (v, l1);
            }
            l1 += 1e-4;
        }
        let c = solve_weights(&leaf(1.0, vec![2.0, 1.0]).unwrap()).unwrap();
        assert!((c.weights[0] - best.1).abs() <= 1e-4);
        assert!((c.weights[1] - (1.0 - 2.0 * best.1)).abs() <= 2e-4);
        assert_relative_eq!(c.weights[0], 0.25, max_relative = 1e-14);
        assert_relative_eq!(c.weights[1], 0.5, max_relative = 1e-14);
    }

    #[test]
    fn verification_examples() {
        for n in 2..=6 {
            let c = solve_weights(&Norm::l1(n)).unwrap();
            let r = verify_certificate(&Norm::l1(n), &c, 1000, 1).unwrap();
            assert!(r.passed);
            assert_relative_eq!(r.min_left_ratio, 1.0, max_relative = 1e-12);
            assert_relative_eq!(r.max_right_ratio, 1.0, max_relative = 1e-12);

            let c = solve_weights(&Norm::linf(n)).unwrap();
            let r = verify_certificate(&Norm::linf(n), &c, 1000, 1).unwrap();
            assert!(r.passed);
            assert_relative_eq!(r.exact_left_ratio, 1.0, max_relative = 1e-12);
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            assert!(1.0 / (n as f64) < Norm::linf(n).eval(&e1).unwrap());

            let mut bad = solve_weights(&Norm::l1(n)).unwrap();
            bad.weights.iter_mut().for_each(|l| *l *= 1.1);
            let r = verify_certificate(&Norm::l1(n), &bad, 1000, 1).unwrap();
            assert!(!r.passed);
            assert_relative_eq!(r.max_right_ratio, 1.1, max_relative = 1e-12);
        }
        assert!(verify_certificate(&Norm::l1(3), &solve_weights(&Norm::l1(2)).unwrap(), 10, 0).is_err());
    }

    #[test]
    fn embedding_examples() {
        let c = solve_weights(&Norm::l1(4)).unwrap();
        let m = build_embedding(&c).unwrap();
        assert!(m.t_diag.iter().chain(&m.s_diag).all(|x| (x - 1.0).abs() < 1e-14));
        let c = solve_weights(&Norm::linf(4)).unwrap();
        let m = build_embedding(&c).unwrap();
        assert!(m.t_diag.iter().all(|x| (x - 0.25).abs() < 1e-14));
        assert!(m.s_diag.iter().all(|x| (x - 4.0).abs() < 1e-14));
        let mut bad = c.clone();
        bad.weights[1] = 0.0;
        assert!(build_embedding(&bad).is_err());
    }

    #[test]
    fn iterative_route_agrees_on_smooth_norms() {
        let norms = [
            Norm::l2(5),
            leaf(3.0, vec![1.0, 2.0, 0.5, 1.5]).unwrap(),
            Norm::sum_of(vec![
                Block { coords: vec![0, 2], norm: leaf(2.0, vec![1.0, 3.0]).unwrap() },
                Block { coords: vec![1, 3, 4], norm: leaf(1.5, vec![0.7, 1.0, 2.0]).unwrap() },
            ])
            .unwrap(),
        ];
        for norm in &norms {
            let exact = solve_weights(norm).unwrap();
            let it = solve_weights_iterative(norm, &SolverOptions::default()).unwrap();
            for (a, b) in exact.weights.iter().zip(&it.certificate.weights) {
                assert_relative_eq!(*a, *b, max_relative = 1e-4);
            }
            assert!(it.trace.windows(2).all(|w| w[1] >= w[0]), "objective must not decrease");
            assert!(it.certificate.objective <= exact.objective + 1e-12);
        }
    }

    #[test]
    fn iterative_route_reports_stalls() {
        let opts = SolverOptions { tol: 1e-8, max_iter: 50 };
        let norm = Norm::max_of(vec![
            Block { coords: vec![0], norm: Norm::l1(1) },
            Block { coords: vec![1, 2], norm: leaf(1.0, vec![1.0, 3.0]).unwrap() },
        ])
        .unwrap();
        match solve_weights_iterative(&norm, &opts) {
            Err(Error::NotConverged { best, residual, .. }) => {
                assert_eq!(best.len(), 3);
                assert!(residual > 1e-8);
            }
            Ok(s) => assert!(s.certificate.kkt_residual <= 1e-8),
            Err(e) => panic!("{e}"),
        }
    }

    fn arb_norm(n: usize) -> impl Strategy<Value = Norm> {
        let leafs = prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY), 1.1f64..6.0];
        (
            proptest::collection::vec(0.2f64..5.0, n),
            proptest::collection::vec(leafs, 3),
            1..n,
            any::<bool>(),
        )
            .prop_map(move |(w, ps, cut, max)| {
                let a = leaf(ps[0], w[..cut].to_vec()).unwrap();
                let b = leaf(ps[1], w[cut..].to_vec()).unwrap();
                let blocks = vec![
                    Block { coords: (0..cut).collect(), norm: a },
                    Block { coords: (cut..n).collect(), norm: b },
                ];
                if max {
                    Norm::max_of(blocks).unwrap()
                } else {
                    Norm::sum_of(blocks).unwrap()
                }
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn closed_form_is_optimal(norm in arb_norm(5), seed in 0u64..1000) {
            let c = solve_weights(&norm).unwrap();
            prop_assert!((c.norm_of_lambda - 1.0).abs() <= 1e-12);
            prop_assert!(c.kkt_residual <= 1e-10);
            let r = verify_certificate(&norm, &c, 300, seed).unwrap();
            prop_assert!(r.passed);
            // no feasible point does better
            let mut g = rng::seeded(seed);
            for _ in 0..200 {
                let trial: Vec<f64> = c.weights.iter().map(|l| l * (0.3 * g.random_range(-1.0..1.0f64)).exp()).collect();
                let s = norm.eval_unchecked(&trial);
                let obj: f64 = trial.iter().map(|l| (l / s).ln()).sum();
                prop_assert!(obj <= c.objective + 1e-12);
            }
        }

        #[test]
        fn scale_covariance(norm in arb_norm(4), c in 0.1f64..10.0) {
            let a = solve_weights(&norm).unwrap();
            let b = solve_weights(&norm.scaled(c)).unwrap();
            for (x, y) in a.weights.iter().zip(&b.weights) {
                prop_assert!((y * c - x).abs() <= 1e-12 * x);
            }
            prop_assert!((b.objective - (a.objective - 4.0 * c.ln())).abs() <= 1e-10);
        }

        #[test]
        fn embedding_contract(norm in arb_norm(5), seed in 0u64..1000) {
            let c = solve_weights(&norm).unwrap();
            let m = build_embedding(&c).unwrap();
            for (t, s) in m.t_diag.iter().zip(&m.s_diag) {
                prop_assert!((t * s - 1.0).abs() <= 1e-14);
            }
            prop_assert!(check_embedding(&norm, &m, 200, seed).unwrap().passed);
        }
    }
}
