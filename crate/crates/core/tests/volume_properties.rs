use lozvol_core::linalg;
use lozvol_core::rng;
use lozvol_core::volume::{self, Body, Polytope};
use lozvol_core::Norm;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(k: usize, seed: u64) -> DMatrix<f64> {
    let mut g = rng::seeded(seed);
    loop {
        let m = DMatrix::from_fn(k, k, |_, _| rng::gaussian_vec(&mut g, 1)[0]);
        if linalg::det(&m).abs() > 1e-3 {
            return m;
        }
    }
}

fn random_symmetric_polytope(k: usize, m: usize, seed: u64) -> Polytope {
    let mut g = rng::seeded(seed);
    let mut pts = Vec::new();
    for _ in 0..m {
        let v = rng::gaussian_vec(&mut g, k);
        pts.push(linalg::scaled(&v, -1.0));
        pts.push(v);
    }
    Polytope::from_vertices(&pts).unwrap()
}

fn cross(k: usize) -> Polytope {
    Polytope::from_normals(&Norm::l1(k).facet_normals().unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn santalo_product_is_linear_invariant(k in 1usize..=6, seed in any::<u64>()) {
        let a = matrix(k, seed);
        let image = cross(k).linear_image(&a).unwrap();
        let product = image.volume() * image.polar().unwrap().volume();
        let expect = 2f64.powi(k as i32) / linalg::factorial(k) * 2f64.powi(k as i32);
        prop_assert!((product / expect - 1.0).abs() <= 1e-9, "{product} vs {expect}");
    }

    #[test]
    fn volume_scales_with_determinant(k in 2usize..=5, seed in any::<u64>()) {
        let p = random_symmetric_polytope(k, k + 2, seed);
        let a = matrix(k, seed ^ 1);
        let image = p.linear_image(&a).unwrap();
        let expect = linalg::det(&a).abs() * p.volume();
        prop_assert!((image.volume() / expect - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn bipolar_is_the_body(k in 2usize..=4, seed in any::<u64>()) {
        let p = random_symmetric_polytope(k, k + 3, seed);
        let bipolar = p.polar().unwrap().polar().unwrap();
        let h = Polytope::from_normals(p.normals()).unwrap();
        let mut g = rng::seeded(seed ^ 7);
        for _ in 0..500 {
            let u = rng::gaussian_vec(&mut g, k);
            prop_assert!((p.support(&u) - bipolar.support(&u)).abs() <= 1e-10 * (1.0 + p.support(&u)));
            prop_assert!((p.support(&u) - h.support(&u)).abs() <= 1e-10 * (1.0 + p.support(&u)));
        }
    }

    #[test]
    fn central_sections_dominate(k in 2usize..=4, seed in any::<u64>(), t in 0.05f64..0.9) {
        let p = random_symmetric_polytope(k, k + 2, seed);
        let mut g = rng::seeded(seed ^ 3);
        let u = linalg::normalized(&rng::gaussian_vec(&mut g, k));
        let central = p.central_section_volume(&u).unwrap();
        // t u / g(u) stays inside the body for t < 1
        let off = t / p.gauge(&u);
        let parallel = p.section_at(&u, off).unwrap().volume();
        prop_assert!(parallel <= central * (1.0 + 1e-9));
    }
}

#[test]
fn dual_polars_of_standard_balls() {
    for k in 2..=5 {
        let c = cross(k).polar().unwrap();
        assert!((c.volume() - 2f64.powi(k as i32)).abs() <= 1e-10);
        let cube = Polytope::from_normals(&Norm::linf(k).facet_normals().unwrap()).unwrap();
        let pc = cube.polar().unwrap();
        assert!((pc.volume() - 2f64.powi(k as i32) / linalg::factorial(k)).abs() <= 1e-10);
    }
}

#[test]
fn mc_matches_exact_on_random_polytopes() {
    for seed in 0..20u64 {
        let k = 2 + (seed as usize % 3);
        let p = random_symmetric_polytope(k, k + 2, 1000 + seed);
        let exact = p.volume();
        let est = volume::mc_volume(&Body::Polytope(p), 100_000, seed).unwrap();
        assert!((est.value - exact).abs() <= 3.0 * est.std_error + 1e-9, "{seed}: {est:?} vs {exact}");
        assert!(est.std_error <= 0.02 * est.value);
    }
}

#[test]
fn image_formulas_agree_with_hulls() {
    for seed in 0..10u64 {
        let k = 1 + seed as usize % 5;
        let a = matrix(k, seed);
        let hull = cross(k).linear_image(&a).unwrap().volume();
        let f = volume::cross_polytope_image_volume(&a).unwrap();
        assert!((hull / f - 1.0).abs() <= 1e-10);
        let pts: Vec<Vec<f64>> = (0..1usize << k)
            .map(|m| linalg::mat_vec(&a, &(0..k).map(|i| if m >> i & 1 == 1 { -1.0 } else { 1.0 }).collect::<Vec<_>>()))
            .collect();
        let cube = volume::volume_vrep(&volume::PolytopeV::new(pts).unwrap()).unwrap();
        assert!((cube.value / volume::cube_image_volume(&a).unwrap() - 1.0).abs() <= 1e-10);
    }
}
