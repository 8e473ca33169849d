mod common;

use common::*;
use proptest::prelude::*;
use trijm_core::fermat::*;
use trijm_core::joint::{lambda_points, Triple};
use trijm_core::Vec3;

fn median(points: &[Vec3]) -> FtResult {
    ft_point(&FtProblem::new(points.to_vec()).unwrap(), DEFAULT_TOL, DEFAULT_MAX_ITER)
}

fn coord() -> impl Strategy<Value = Vec3> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn no_nearby_point_is_better(pts in prop::collection::vec(coord(), 4), seed in 0u64..1000) {
        let r = median(&pts);
        let mut rng = rng(seed);
        let f0 = total_distance(&pts, r.point);
        for _ in 0..100 {
            let q = r.point + on_sphere(&mut rng) * (10.0 * DEFAULT_TOL);
            prop_assert!(f0 <= total_distance(&pts, q) + 1e-12);
        }
    }

    #[test]
    fn translation_equivariance(pts in prop::collection::vec(coord(), 4), u in coord()) {
        let moved: Vec<Vec3> = pts.iter().map(|p| *p + u).collect();
        prop_assert!(median(&moved).point.max_abs_diff(median(&pts).point + u) <= 1e-9);
    }

    #[test]
    fn scale_equivariance(pts in prop::collection::vec(coord(), 4), c in 0.1..10.0f64) {
        let scaled: Vec<Vec3> = pts.iter().map(|p| *p * c).collect();
        prop_assert!(median(&scaled).point.max_abs_diff(median(&pts).point * c) <= 1e-9);
    }
}

#[test]
fn oracle_agreement_on_random_quadruples() {
    let mut rng = rng(20);
    for _ in 0..100 {
        let pts: Vec<Vec3> = (0..4).map(|_| in_ball(&mut rng) * 2.0).collect();
        let prob = FtProblem::new(pts.clone()).unwrap();
        let w = ft_point(&prob, DEFAULT_TOL, DEFAULT_MAX_ITER);
        let o = ft_point_oracle(&prob, 4.0, 12);
        assert!((w.total_distance - total_distance(&pts, o)).abs() <= 1e-4);
    }
}

#[test]
fn lambda_points_near_a_vertex_converge() {
    let t = Triple {
        l1: Vec3::new(0.0, -0.5379973665707367, -0.10102574212525983),
        l2: Vec3::new(0.0, -0.5260917740220399, -0.10100386099867764),
        l3: Vec3::new(0.0, -0.8611442971902812, -0.17931228745183514),
    };
    let r = median(&lambda_points(&t));
    assert!(r.converged);
    assert!((r.total_distance - 2.0 * trijm_core::joint::coplanar_lhs(&t)).abs() < 1e-12);
}

#[test]
fn lambda_points_of_random_triples_converge() {
    let mut rng = rng(21);
    for _ in 0..2000 {
        let t = Triple::from_vectors([in_ball(&mut rng), in_ball(&mut rng), in_ball(&mut rng)]);
        assert!(median(&lambda_points(&t)).converged, "{t:?}");
    }
}
