mod common;

use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use molcav::dynamics::{self, build_diffusion, build_drift, symplectic_eigenvalues};
use molcav::entanglement::{eta_minus, negativity_from_eta, ModePair};
use molcav::model::{ScaledParams, SystemSpec};
use molcav::pipeline::{analyze, evaluate, Mode, PointResult};
use molcav::steady::solve_effective_detuning;
use molcav::sweep::cavity_base;

fn solve(p: &ScaledParams) -> PointResult {
    analyze(p, solve_effective_detuning(p), &ModePair::ALL)
}

fn params_from_seed(seed: u64) -> ScaledParams {
    common::random_params(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn spec_strategy() -> impl Strategy<Value = SystemSpec> {
    (
        -0.5f64..2.5,
        0.0f64..40.0,
        5.0f64..30.0,
        0.003f64..5.0,
        2u32..300,
        0.0f64..1.0,
        50.0f64..700.0,
    )
        .prop_map(|(delta, omega, kappa, gamma, n, frac, t)| SystemSpec {
            delta,
            omega,
            kappa,
            gamma1: gamma,
            gamma2: gamma * 1.3,
            n_molecules: n,
            m_split: (frac * n as f64).round() as u32,
            n1: None,
            n2: None,
            temperature: Some(t),
            ..cavity_base()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn drive_phase_does_not_change_entanglement(spec in spec_strategy(), phase in 0.0f64..std::f64::consts::TAU) {
        let a = &evaluate(&spec, Mode::Effective, &ModePair::ALL).unwrap()[0];
        let b = &evaluate(&SystemSpec { drive_phase: phase, ..spec.clone() }, Mode::Effective, &ModePair::ALL).unwrap()[0];
        prop_assert_eq!(a.stability.stable, b.stability.stable);
        prop_assert!((a.stability.abscissa - b.stability.abscissa).abs() < 1e-12);
        for pair in ModePair::ALL {
            if let (Some(x), Some(y)) = (a.negativity(pair), b.negativity(pair)) {
                prop_assert!((x - y).abs() < 1e-10, "{}: {} vs {}", pair, x, y);
            }
        }
    }

    #[test]
    fn unit_scaling_does_not_change_entanglement(spec in spec_strategy(), s in 0.05f64..20.0) {
        let mut scaled = spec.clone();
        scaled.nu_p *= s;
        scaled.nu_v *= s;
        scaled.nu_l *= s;
        scaled.kappa *= s;
        scaled.gamma1 *= s;
        scaled.gamma2 *= s;
        scaled.g_v *= s;
        scaled.temperature = spec.temperature.map(|t| t * s);
        let a = &evaluate(&spec, Mode::Effective, &ModePair::ALL).unwrap()[0];
        let b = &evaluate(&scaled, Mode::Effective, &ModePair::ALL).unwrap()[0];
        prop_assert_eq!(a.stability.stable, b.stability.stable);
        for pair in ModePair::ALL {
            if let (Some(x), Some(y)) = (a.negativity(pair), b.negativity(pair)) {
                prop_assert!((x - y).abs() < 1e-10, "{}: {} vs {}", pair, x, y);
            }
        }
    }

    #[test]
    fn swapping_the_collective_modes_swaps_the_pairs(seed in any::<u64>()) {
        let p = params_from_seed(seed);
        let swapped = ScaledParams {
            gamma1: p.gamma2,
            gamma2: p.gamma1,
            n1: p.n2,
            n2: p.n1,
            ..p
        }
        .with_split(p.n_molecules, p.n_molecules - p.m_split);
        let (a, b) = (solve(&p), solve(&swapped));
        prop_assert_eq!(a.stability.stable, b.stability.stable);
        if a.stability.stable {
            let e = |r: &PointResult, pair| r.negativity(pair).unwrap();
            prop_assert!((e(&a, ModePair::CavityB1) - e(&b, ModePair::CavityB2)).abs() < 1e-9);
            prop_assert!((e(&a, ModePair::CavityB2) - e(&b, ModePair::CavityB1)).abs() < 1e-9);
            prop_assert!((e(&a, ModePair::B1B2) - e(&b, ModePair::B1B2)).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_first_mode_reduces_to_two_mode_problem(seed in any::<u64>()) {
        let p = params_from_seed(seed);
        let p = p.with_split(p.n_molecules, 0);
        let full = solve(&p);
        let a = build_drift(&solve_effective_detuning(&p), &p).0;
        let q = build_diffusion(&p).0;
        let keep = [2usize, 3, 4, 5];
        let a4 = Matrix4::from_fn(|i, j| a[(keep[i], keep[j])]);
        let q4 = Matrix4::from_fn(|i, j| q[(keep[i], keep[j])]);
        let stable4 = dynamics::stability_of(&a4).unwrap().stable;
        // The decoupled mode only adds -γ₁ to the spectrum.
        prop_assert_eq!(full.stability.stable, stable4);
        if stable4 {
            let v4 = dynamics::lyapunov(&a4, &q4).unwrap();
            let e4 = negativity_from_eta(eta_minus(&v4).unwrap());
            let e = full.negativity(ModePair::CavityB2).unwrap();
            prop_assert!((e - e4).abs() < 1e-10 * e.max(1.0));
            prop_assert!(full.negativity(ModePair::CavityB1).unwrap() < 1e-12);
            prop_assert!(full.negativity(ModePair::B1B2).unwrap() < 1e-12);
        }
    }

    #[test]
    fn stable_covariances_are_physical(seed in any::<u64>()) {
        let p = params_from_seed(seed);
        let r = solve(&p);
        if let Some(v) = r.covariance {
            prop_assert!(r.residual.unwrap() < 1e-9);
            let nu = symplectic_eigenvalues(&v.0).unwrap();
            prop_assert!(nu[0] >= 0.5 - 1e-9, "{:?}", nu);
            prop_assert!((v.0 - v.0.transpose()).amax() == 0.0);
        }
    }

    #[test]
    fn lyapunov_matches_time_integration(seed in any::<u64>()) {
        let p = params_from_seed(seed);
        let a = build_drift(&solve_effective_detuning(&p), &p);
        let s = dynamics::stability(&a).unwrap();
        prop_assume!(s.abscissa < -0.05);
        let q = build_diffusion(&p);
        let direct = dynamics::solve_lyapunov(&a, &q).unwrap();
        let t = dynamics::integrate_covariance(&a, &q, 30.0 / s.abscissa.abs(), 0.02).unwrap();
        prop_assert!((direct.0 - t.0).amax() < 1e-8 * direct.0.amax());
    }

    #[test]
    fn closed_form_matches_spectral_oracle(seed in any::<u64>()) {
        let v = common::random_physical_covariance(&mut ChaCha8Rng::seed_from_u64(seed));
        let closed = eta_minus(&v).unwrap();
        let oracle = common::eta_minus_oracle(&v);
        prop_assert!((closed - oracle).abs() < 1e-9 * oracle.max(1.0), "{} vs {}", closed, oracle);
    }

    #[test]
    fn local_rotations_leave_negativity_unchanged(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let v = common::random_physical_covariance(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut r = SMatrix::<f64, 4, 4>::zeros();
        for (k, t) in [a, b].into_iter().enumerate() {
            let (s, c) = t.sin_cos();
            r[(2 * k, 2 * k)] = c;
            r[(2 * k, 2 * k + 1)] = s;
            r[(2 * k + 1, 2 * k)] = -s;
            r[(2 * k + 1, 2 * k + 1)] = c;
        }
        let w = r * v * r.transpose();
        // Compared on η⁻: the logarithm amplifies roundoff for strongly entangled states.
        let (x, y) = (eta_minus(&v).unwrap(), eta_minus(&w).unwrap());
        prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
    }
}

#[test]
fn decoupled_limit_is_a_thermal_product() {
    let mut p = params_from_seed(3);
    p.g_v = 0.0;
    p.drive = Complex64::new(5.0, 0.0);
    let p = p.with_split(p.n_molecules, p.m_split);
    let v = solve(&p).covariance.unwrap();
    for (k, expected) in [p.n1 + 0.5, p.n1 + 0.5, p.n2 + 0.5, p.n2 + 0.5, 0.5, 0.5].iter().enumerate() {
        for j in 0..6 {
            let e = if j == k { *expected } else { 0.0 };
            assert!((v.0[(k, j)] - e).abs() < 1e-12);
        }
    }
}

