mod common;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use common::*;
use rand::Rng;
use trijm_core::bound::SolverConfig;
use trijm_core::ion::*;
use trijm_core::joint::{build_povm_orthogonal, Triple};
use trijm_core::qubit::{prob, Effect, QubitState, Sign};
use trijm_core::scenarios::{approx_family_orthogonal, triad, Family, SweepSpec};
use trijm_core::uncertainty::wasserstein_empirical;
use trijm_core::Vec3;

#[test]
fn pulse_round_trip_on_random_directions() {
    let mut rng = rng(30);
    let mut dirs: Vec<Vec3> = (0..10_000).map(|_| on_sphere(&mut rng)).collect();
    dirs.extend([Vec3::X, -Vec3::X, Vec3::Z, -Vec3::Z, Vec3::new(0.6, 0.0, 0.8), Vec3::new(-0.6, 0.0, -0.8)]);
    for m in dirs {
        let p = measure_angles(m).unwrap();
        assert!(measure_direction(p).max_abs_diff(m) <= 1e-9, "{m:?}");
        let q = prep_angles(m).unwrap();
        assert!(prepare(q).max_abs_diff(m) <= 1e-9, "{m:?}");
    }
}

#[test]
fn branch_rules_for_vanishing_y() {
    assert_eq!(measure_angles(Vec3::new(0.6, 0.0, 0.8)).unwrap().phi, FRAC_PI_2);
    assert_eq!(measure_angles(Vec3::new(-0.6, 0.0, 0.8)).unwrap().phi, -FRAC_PI_2);
    assert_eq!(measure_angles(-Vec3::Z).unwrap(), trijm_core::qubit::PulseParams::new(PI, 0.0));
    assert_eq!(prep_angles(Vec3::new(0.0, -1.0, 0.0)).unwrap().phi, PI);
}

#[test]
fn pulse_table_for_the_orthogonal_optimum_line() {
    let t = triad(Family::Orthogonal, 0.0, 0.0, 0.0).unwrap();
    let fixed = [(Vec3::Z, 0.0, 0.0), (Vec3::Y, FRAC_PI_2, 0.0), (Vec3::X, FRAC_PI_2, FRAC_PI_2)];
    for (x, theta, phi) in fixed {
        let p = measure_angles(x).unwrap();
        assert!((p.theta - theta).abs() <= 1e-9 && (p.phi - phi).abs() <= 1e-9);
    }
    for phi in [0.2, 0.6, 1.0f64] {
        let approx = approx_family_orthogonal(&t, 1.0, FRAC_PI_4, phi);
        let povm = build_povm_orthogonal(&approx).unwrap();
        let s = 2f64.sqrt() * phi.sin() / 2.0;
        let (theta_tilde, theta_bar) = (s.acos(), (-s).acos());
        let phi_bar = (2f64.sqrt() / phi.tan()).atan();
        let phases = [phi_bar, -phi_bar, PI - phi_bar, PI + phi_bar];
        for (i, (signs, e)) in povm.outcomes().enumerate() {
            let m = e.v.normalized().unwrap();
            let p = measure_angles(m).unwrap();
            let theta = if signs[0] == Sign::Plus { theta_tilde } else { theta_bar };
            assert!((p.theta - theta).abs() <= 1e-9, "{signs:?} {phi}");
            assert!((p.phi - phases[i % 4]).abs() <= 1e-9, "{signs:?} {phi}: {} vs {}", p.phi, phases[i % 4]);
        }
    }
}

#[test]
fn exact_paths_equal_the_born_rule() {
    let mut rng = rng(31);
    for _ in 0..1000 {
        let m = on_sphere(&mut rng);
        let s = rng.random_range(0.01..0.5);
        let e = Effect::new(s, m * s);
        let rho = QubitState::new(in_ball(&mut rng)).unwrap();
        let est = simulate_effect_exact(&e, &rho, 100).unwrap();
        assert!((est.p_hat - prob(&e, &rho)).abs() <= 1e-12);
    }
    let exact = ExperimentConfig { exact: true, ..ExperimentConfig::default() };
    let spec = SweepSpec::diagonal(Family::Orthogonal, 0.0, FRAC_PI_2, 7);
    for row in run_experiment(&SweepSpec { varphi_grid: vec![FRAC_PI_4], diagonal_only: false, ..spec }, &ArgminSource::Analytic, &exact).unwrap() {
        for q in &row.quantities {
            assert!((q.value - q.exact).abs() <= 1e-12, "{}", q.name);
        }
    }
}

#[test]
fn reconstructed_marginals_are_within_four_stderr() {
    let t = triad(Family::Orthogonal, 0.0, 0.0, 0.0).unwrap();
    let approx = approx_family_orthogonal(&t, 1.0, FRAC_PI_4, 0.8);
    let povm = build_povm_orthogonal(&approx).unwrap();
    let rho = QubitState::UP;
    let exact = povm.marginal(0, Sign::Plus);
    let want = prob(&exact, &rho);
    let mut inside = 0;
    let noise = NoiseModel::default();
    for trial in 0..1000u64 {
        let sc = ShotConfig { shots: 20_000, seed: trial };
        let mut est = BTreeMap::new();
        for (i, (signs, e)) in povm.outcomes().enumerate() {
            est.insert([signs[0], signs[1], signs[2]], simulate_effect(&e, &rho, &sc, &noise, i as u64).unwrap());
        }
        let d = estimate_marginal(&est, 0, Sign::Plus).unwrap();
        if (d.p_hat - want).abs() <= 4.0 * d.stderr {
            inside += 1;
        }
    }
    assert!(inside >= 999, "{inside}");
}

#[test]
fn single_effect_coverage() {
    let e = Effect::new(0.125, Vec3::new(1.0, 1.0, 1.0).normalized().unwrap() * 0.125);
    let rho = QubitState::UP;
    let want = prob(&e, &rho);
    let inside = (0..1000u64)
        .filter(|&seed| {
            let est = simulate_effect(&e, &rho, &ShotConfig { shots: 20_000, seed }, &NoiseModel::default(), 0).unwrap();
            (est.p_hat - want).abs() <= 4.0 * est.stderr
        })
        .count();
    assert!(inside >= 999, "{inside}");
}

#[test]
fn complementary_counts_give_the_same_distance() {
    let mut rng = rng(32);
    for _ in 0..1000 {
        let n = 20_000u64;
        let (kx, ky) = (rng.random_range(0..=n), rng.random_range(0..=n));
        let (px, py) = (kx as f64 / n as f64, ky as f64 / n as f64);
        let minus = wasserstein_empirical((n - kx) as f64 / n as f64, (n - ky) as f64 / n as f64);
        assert!((wasserstein_empirical(px, py) - minus).abs() <= 1e-12);
    }
}

fn orthogonal_line(n: usize) -> SweepSpec {
    SweepSpec { family: Family::Orthogonal, phi_grid: trijm_core::scenarios::linspace(0.0, FRAC_PI_2, n), varphi_grid: vec![FRAC_PI_4], diagonal_only: false, extra: 0.0 }
}

#[test]
fn experiment_is_deterministic_and_seed_sensitive() {
    let spec = orthogonal_line(5);
    let cfg = |seed| ExperimentConfig { shots: ShotConfig { shots: 2000, seed }, ..ExperimentConfig::default() };
    let a = run_experiment(&spec, &ArgminSource::Analytic, &cfg(1)).unwrap();
    assert_eq!(a, run_experiment(&spec, &ArgminSource::Analytic, &cfg(1)).unwrap());
    let b = run_experiment(&spec, &ArgminSource::Analytic, &cfg(2)).unwrap();
    let mut differ = false;
    for (ra, rb) in a.iter().zip(&b) {
        for (qa, qb) in ra.quantities.iter().zip(&rb.quantities) {
            assert_eq!(qa.exact, qb.exact);
            differ |= qa.value != qb.value;
        }
    }
    assert!(differ);
}

#[test]
fn orthogonal_optimum_is_observed() {
    let phi0 = (1.0f64 / 3.0).sqrt().acos();
    let spec = SweepSpec { phi_grid: vec![phi0], ..orthogonal_line(1) };
    let cfg = ExperimentConfig { shots: ShotConfig { shots: 20_000, seed: 5 }, ..ExperimentConfig::default() };
    let row = &run_experiment(&spec, &ArgminSource::Analytic, &cfg).unwrap()[0];
    let total = row.total();
    assert!((total.exact - 2.535_898_384_862_245).abs() < 1e-12);
    assert!((total.value - total.exact).abs() <= 4.0 * total.stderr);
    assert!((row.get("p_A+").unwrap().value - 1.0).abs() < 1e-15);
    let m = row.get("p_M+++_rho1").unwrap();
    assert!((m.exact - (1.0 + 1.0 / 3f64.sqrt()) / 8.0).abs() < 1e-12);
    assert!(!total.not_single_qubit_measurable);
}

#[test]
fn coplanar_experiment_examples() {
    let spec = SweepSpec::diagonal(Family::Coplanar, 0.0, 1.2, 3);
    let solver = ArgminSource::Solver(SolverConfig { restarts: 2, ..SolverConfig::default() });
    let cfg = ExperimentConfig { shots: ShotConfig { shots: 20_000, seed: 3 }, ..ExperimentConfig::default() };
    let rows = run_experiment(&spec, &solver, &cfg).unwrap();
    for q in &rows[0].quantities {
        if q.name.starts_with("delta") {
            assert!(q.value.abs() < 1e-9 && q.exact.abs() < 1e-6, "{}: {}", q.name, q.value);
        }
    }
    for row in &rows[1..] {
        let (be, cf) = (row.get("delta_BE").unwrap(), row.get("delta_CF").unwrap());
        assert!((be.exact - cf.exact).abs() < 1e-4, "{} {}", be.exact, cf.exact);
        assert!(!row.infeasible);
    }
}

#[test]
fn interior_solutions_are_flagged_not_sampled() {
    let t = triad(Family::Orthogonal, 0.0, 0.0, 0.0).unwrap();
    let approx = Triple::from_vectors(t.vectors()).scaled(0.3);
    let povm = build_povm_orthogonal(&approx).unwrap();
    let cfg = ExperimentConfig { shots: ShotConfig { shots: 500, seed: 1 }, ..ExperimentConfig::default() };
    let row = experiment_point(0, 0.0, 0.0, &t, &approx, &povm, &cfg).unwrap();
    let m = row.get("p_M+++_rho1").unwrap();
    assert!(m.not_single_qubit_measurable);
    assert_eq!(m.value, m.exact);
    assert!(row.total().not_single_qubit_measurable);
    assert!(row.get("p_A+").map(|q| !q.not_single_qubit_measurable).unwrap());
}

#[test]
fn noise_knobs() {
    let e = Effect::new(0.5, Vec3::Z * 0.5);
    let sc = ShotConfig { shots: 20_000, seed: 9 };
    let flip = NoiseModel { detection_flip: 0.1, ..NoiseModel::default() };
    let est = simulate_effect(&e, &QubitState::UP, &sc, &flip, 0).unwrap();
    assert!((est.p_hat - 0.9).abs() < 4.0 * est.stderr + 1e-3);
    let dep = NoiseModel { prep_depolarization: 0.2, ..NoiseModel::default() };
    let est = simulate_effect(&e, &QubitState::UP, &sc, &dep, 0).unwrap();
    assert!((est.p_hat - 0.9).abs() < 4.0 * est.stderr + 1e-3);
    let jitter = NoiseModel { amplitude_jitter: 0.05, ..NoiseModel::default() };
    let x = Effect::new(0.5, Vec3::X * 0.5);
    let a = simulate_effect(&x, &QubitState::new(Vec3::X).unwrap(), &sc, &jitter, 0).unwrap();
    assert_eq!(a, simulate_effect(&x, &QubitState::new(Vec3::X).unwrap(), &sc, &jitter, 0).unwrap());
    assert!(a.p_hat < 1.0);
    assert!(NoiseModel { detection_flip: 1.5, ..NoiseModel::default() }.validate().is_err());
    assert!(ShotConfig { shots: 0, seed: 0 }.validate().is_err());
}
