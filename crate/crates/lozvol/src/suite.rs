//! Random instance generation.

use lozvol_core::rng;
use lozvol_core::Exponent;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::format::{BlockSpec, ExponentSpec, Instance, MethodSpec, NormSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Subspace,
    Quotient,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSpec {
    pub n_range: (usize, usize),
    pub k_range: (usize, usize),
    pub count: usize,
    pub seed: u64,
    pub kind: SuiteKind,
    /// Restrict leaves to `p ∈ {1, ∞}` so every unit ball is a polytope.
    pub polytopal: bool,
}

const EXPONENTS: [Exponent; 5] =
    [Exponent::Finite(1.0), Exponent::Finite(1.5), Exponent::Finite(2.0), Exponent::Finite(3.0), Exponent::Infinity];

/// A random 1-unconditional norm on `R^n`: weighted `l_p` leaves
/// (`p ∈ {1, 1.5, 2, 3, ∞}`, weights in `[0.5, 2]`) under up to two levels
/// of max/sum blocks over a random partition of the coordinates.
pub fn random_norm<R: Rng>(rng: &mut R, n: usize, polytopal: bool) -> NormSpec {
    random_norm_at(rng, n, 2, polytopal)
}

fn random_norm_at<R: Rng>(rng: &mut R, n: usize, depth: usize, polytopal: bool) -> NormSpec {
    if n == 1 || depth == 0 || rng.random_range(0..3) == 0 {
        let p = if polytopal {
            if rng.random_bool(0.5) { Exponent::Finite(1.0) } else { Exponent::Infinity }
        } else {
            EXPONENTS[rng.random_range(0..EXPONENTS.len())]
        };
        let weights = (0..n).map(|_| rng.random_range(0.5..=2.0)).collect();
        return NormSpec::Lp { p: ExponentSpec(p), weights };
    }
    let parts = rng.random_range(2..=n.min(3));
    let mut coords: Vec<usize> = (0..n).collect();
    coords.shuffle(rng);
    // cut points split the shuffled coordinates into `parts` non-empty runs
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts[..parts - 1].to_vec();
    cuts.sort_unstable();
    let mut blocks = Vec::with_capacity(parts);
    let mut start = 0;
    for end in cuts.into_iter().chain([n]) {
        let mut c = coords[start..end].to_vec();
        c.sort_unstable();
        blocks.push(BlockSpec { norm: random_norm_at(rng, c.len(), depth - 1, polytopal), coords: c });
        start = end;
    }
    if rng.random_bool(0.5) {
        NormSpec::Max { blocks }
    } else {
        NormSpec::Sum { blocks }
    }
}

/// Reproducible random instances.
pub fn generate_suite(spec: &SuiteSpec) -> Vec<Instance> {
    let mut rng = rng::seeded(spec.seed);
    (0..spec.count)
        .map(|i| {
            let n = rng.random_range(spec.n_range.0..=spec.n_range.1);
            let k = rng.random_range(spec.k_range.0.min(n)..=spec.k_range.1.min(n));
            let quotient = match spec.kind {
                SuiteKind::Subspace => false,
                SuiteKind::Quotient => true,
                SuiteKind::Mixed => rng.random_bool(0.5),
            };
            let norm = random_norm(&mut rng, n, spec.polytopal);
            let rows: Vec<Vec<f64>> = (0..k).map(|_| rng::gaussian_vec(&mut rng, n)).collect();
            Instance {
                id: Some(format!("{}-{i:04}", spec.seed)),
                dim: n,
                norm,
                subspace: (!quotient).then(|| rows.clone()),
                quotient: quotient.then_some(rows),
                seed: spec.seed.wrapping_mul(1_000_003).wrapping_add(i as u64),
                method: MethodSpec::Exact,
                mc_samples: None,
                quotient_constant: None,
            }
        })
        .collect()
}
