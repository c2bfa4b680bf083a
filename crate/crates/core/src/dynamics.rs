//! Linearized fluctuation dynamics: drift and diffusion matrices, stability,
//! and the steady-state covariance from the Lyapunov equation
//! `A V + V Aᵀ = -Q`.
//!
//! Quadrature order is `(X_B1, Y_B1, X_B2, Y_B2, X_a, Y_a)` with
//! `X = (o + o†)/√2`, `Y = i(o† - o)/√2`, so the vacuum has variance 1/2.

use nalgebra::{DMatrix, Matrix6, SMatrix};
use serde::Serialize;

use crate::error::DynamicsError;
use crate::model::ScaledParams;
use crate::steady::SteadyState;

/// Stability requires every eigenvalue real part below `-STABILITY_MARGIN`.
pub const STABILITY_MARGIN: f64 = 1e-10;
/// Stable points with a spectral abscissa closer to zero than this are flagged.
pub const MARGINAL_ABSCISSA: f64 = 1e-6;
/// Norm at which the covariance integrator declares divergence.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix6<f64>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix(pub Matrix6<f64>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(pub Matrix6<f64>);

impl CovarianceMatrix {
    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stability {
    pub stable: bool,
    /// Largest real part among the drift eigenvalues.
    pub abscissa: f64,
    pub marginal: bool,
}

/// Drift matrix of the linearized Langevin equations (vibrational frequency
/// is 1 in the scaled frame).
pub fn build_drift(ss: &SteadyState, p: &ScaledParams) -> DriftMatrix {
    let w = ScaledParams::OMEGA_V;
    let [g1, g2] = ss.couplings;
    let (d, k) = (ss.delta, p.kappa);
    let (c1, c2) = (p.gamma1, p.gamma2);
    #[rustfmt::skip]
    let a = Matrix6::new(
        -c1,            w,   0.0,            0.0, 0.0,            0.0,
        -w,             -c1, 0.0,            0.0, -2.0 * g1.re,   -2.0 * g1.im,
        0.0,            0.0, -c2,            w,   0.0,            0.0,
        0.0,            0.0, -w,             -c2, -2.0 * g2.re,   -2.0 * g2.im,
        2.0 * g1.im,    0.0, 2.0 * g2.im,    0.0, -k,             d,
        -2.0 * g1.re,   0.0, -2.0 * g2.re,   0.0, -d,             -k,
    );
    DriftMatrix(a)
}

/// Diffusion from thermal phonon baths and the vacuum cavity input.
pub fn build_diffusion(p: &ScaledParams) -> DiffusionMatrix {
    let b1 = (2.0 * p.n1 + 1.0) * p.gamma1;
    let b2 = (2.0 * p.n2 + 1.0) * p.gamma2;
    DiffusionMatrix(Matrix6::from_diagonal(&nalgebra::Vector6::new(b1, b1, b2, b2, p.kappa, p.kappa)))
}

/// Eigenvalues of a small dense real matrix.
pub fn eigenvalues<const D: usize>(a: &SMatrix<f64, D, D>) -> Result<Vec<num_complex::Complex64>, DynamicsError> {
    let m = DMatrix::from_iterator(D, D, a.iter().copied());
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000).ok_or(DynamicsError::EigenSolver)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn spectral_abscissa<const D: usize>(a: &SMatrix<f64, D, D>) -> Result<f64, DynamicsError> {
    Ok(eigenvalues(a)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Routh-Hurwitz stability, decided from the eigenvalue real parts.
pub fn stability_of<const D: usize>(a: &SMatrix<f64, D, D>) -> Result<Stability, DynamicsError> {
    let abscissa = spectral_abscissa(a)?;
    let stable = abscissa < -STABILITY_MARGIN;
    Ok(Stability { stable, abscissa, marginal: stable && abscissa.abs() < MARGINAL_ABSCISSA })
}

pub fn stability(a: &DriftMatrix) -> Result<Stability, DynamicsError> {
    stability_of(&a.0)
}

fn lyapunov_operator<const D: usize>(a: &SMatrix<f64, D, D>) -> DMatrix<f64> {
    // Column-major vec: vec(AV) = (I⊗A) vec V, vec(VAᵀ) = (A⊗I) vec V.
    let n = D * D;
    let mut k = DMatrix::zeros(n, n);
    for j in 0..D {
        for i in 0..D {
            let row = i + j * D;
            for m in 0..D {
                k[(row, m + j * D)] += a[(i, m)];
                k[(row, i + m * D)] += a[(j, m)];
            }
        }
    }
    k
}

/// `A V + V Aᵀ + Q`.
pub fn lyapunov_rhs<const D: usize>(
    a: &SMatrix<f64, D, D>,
    v: &SMatrix<f64, D, D>,
    q: &SMatrix<f64, D, D>,
) -> SMatrix<f64, D, D> {
    a * v + v * a.transpose() + q
}

/// `‖AV + VAᵀ + Q‖_max / ‖Q‖_max`.
pub fn lyapunov_residual<const D: usize>(
    a: &SMatrix<f64, D, D>,
    v: &SMatrix<f64, D, D>,
    q: &SMatrix<f64, D, D>,
) -> f64 {
    let scale = q.amax();
    let r = lyapunov_rhs(a, v, q).amax();
    if scale == 0.0 {
        r
    } else {
        r / scale
    }
}

/// Solves `A V + V Aᵀ = -Q` for a stable `A` by Kronecker vectorization.
pub fn lyapunov<const D: usize>(
    a: &SMatrix<f64, D, D>,
    q: &SMatrix<f64, D, D>,
) -> Result<SMatrix<f64, D, D>, DynamicsError> {
    let s = stability_of(a)?;
    if !s.stable {
        return Err(DynamicsError::Unstable { abscissa: s.abscissa });
    }
    let lu = lyapunov_operator(a).full_piv_lu();
    let solve = |rhs: &SMatrix<f64, D, D>| -> Result<SMatrix<f64, D, D>, DynamicsError> {
        let b = nalgebra::DVector::from_iterator(D * D, rhs.iter().map(|x| -x));
        let x = lu.solve(&b).ok_or(DynamicsError::Singular)?;
        Ok(SMatrix::<f64, D, D>::from_iterator(x.iter().copied()))
    };
    let mut v = solve(q)?;
    // One round of refinement against the working-precision residual.
    let r = lyapunov_rhs(a, &v, q);
    v += solve(&r)?;
    Ok((v + v.transpose()) * 0.5)
}

pub fn solve_lyapunov(a: &DriftMatrix, q: &DiffusionMatrix) -> Result<CovarianceMatrix, DynamicsError> {
    lyapunov(&a.0, &q.0).map(CovarianceMatrix)
}

/// Fixed-step RK4 integration of `dV/dt = AV + VAᵀ + Q` from the vacuum
/// covariance, symmetrizing after every step.
pub fn integrate<const D: usize>(
    a: &SMatrix<f64, D, D>,
    q: &SMatrix<f64, D, D>,
    t_final: f64,
    dt: f64,
) -> Result<SMatrix<f64, D, D>, DynamicsError> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(DynamicsError::InvalidStep("t_final must be positive"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidStep("dt must be positive"));
    }
    let steps = (t_final / dt).ceil() as u64;
    let h = t_final / steps as f64;
    let f = |v: &SMatrix<f64, D, D>| lyapunov_rhs(a, v, q);
    let mut v = SMatrix::<f64, D, D>::identity() * 0.5;
    for step in 0..steps {
        let k1 = f(&v);
        let k2 = f(&(v + k1 * (h / 2.0)));
        let k3 = f(&(v + k2 * (h / 2.0)));
        let k4 = f(&(v + k3 * h));
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        v = (v + v.transpose()) * 0.5;
        let norm = v.amax();
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            return Err(DynamicsError::Diverged { time: (step + 1) as f64 * h });
        }
    }
    Ok(v)
}

pub fn integrate_covariance(
    a: &DriftMatrix,
    q: &DiffusionMatrix,
    t_final: f64,
    dt: f64,
) -> Result<CovarianceMatrix, DynamicsError> {
    integrate(&a.0, &q.0, t_final, dt).map(CovarianceMatrix)
}

/// Symplectic eigenvalues of an even-dimensional covariance matrix, ascending.
pub fn symplectic_eigenvalues<const D: usize>(v: &SMatrix<f64, D, D>) -> Result<Vec<f64>, DynamicsError> {
    let mut j = SMatrix::<f64, D, D>::zeros();
    for k in 0..D / 2 {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    let mut moduli: Vec<f64> = eigenvalues(&(j * v))?.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| a.total_cmp(b));
    Ok(moduli.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::{solve_effective_detuning, Branch};
    use num_complex::Complex64;

    fn params() -> ScaledParams {
        ScaledParams {
            delta: 0.4,
            delta_p: 0.0,
            kappa: 1.0 / 3.0,
            gamma1: 1e-4,
            gamma2: 1e-4,
            g_v: 1e-3,
            drive: Complex64::new(16.0, 0.0),
            g1: 0.0,
            g2: 0.0,
            n1: 0.01,
            n2: 0.01,
            n_molecules: 100,
            m_split: 0,
        }
        .with_split(100, 0)
    }

    fn state_with(couplings: [Complex64; 2], delta: f64) -> SteadyState {
        SteadyState {
            cavity: Complex64::new(0.0, 0.0),
            vibrations: [Complex64::new(0.0, 0.0); 2],
            delta,
            delta_p: delta,
            couplings,
            branch: Branch::Direct,
        }
    }

    #[test]
    fn decoupled_drift_is_block_diagonal() {
        let p = params();
        let a = build_drift(&state_with([Complex64::new(0.0, 0.0); 2], 0.4), &p).0;
        for (r, c) in [(0, 2), (1, 4), (3, 5), (4, 0), (5, 2), (2, 5)] {
            assert_eq!(a[(r, c)], 0.0);
        }
        assert_eq!(a[(0, 0)], -1e-4);
        assert_eq!(a[(0, 1)], 1.0);
        assert_eq!(a[(4, 5)], 0.4);
        assert_eq!(a[(5, 4)], -0.4);
    }

    #[test]
    fn real_coupling_entries() {
        let p = params();
        let a = build_drift(&state_with([Complex64::new(0.0, 0.0), Complex64::new(0.2, 0.0)], 0.4), &p).0;
        assert_eq!(a[(4, 2)], 0.0);
        assert_eq!(a[(5, 2)], -0.4);
        assert_eq!(a[(3, 4)], -0.4);
        assert_eq!(a[(3, 5)], 0.0);
    }

    #[test]
    fn diffusion_values() {
        let mut p = params();
        let q = build_diffusion(&p).0;
        assert!((q[(0, 0)] - 1.02e-4).abs() < 1e-18);
        assert!((q[(1, 1)] - 1.02e-4).abs() < 1e-18);
        assert_eq!(q[(4, 4)], 1.0 / 3.0);
        p.n1 = 0.0;
        p.n2 = 0.0;
        p.gamma1 = 1.0;
        p.gamma2 = 1.0;
        p.kappa = 1.0;
        assert_eq!(build_diffusion(&p).0, Matrix6::identity());
        p.gamma1 = 0.0;
        p.gamma2 = 0.0;
        p.kappa = 0.0;
        assert_eq!(build_diffusion(&p).0, Matrix6::zeros());
    }

    #[test]
    fn decoupled_stability_and_covariance() {
        let mut p = params();
        p.gamma1 = 0.02;
        p.gamma2 = 0.05;
        p.n1 = 0.3;
        p.n2 = 1.7;
        let a = build_drift(&state_with([Complex64::new(0.0, 0.0); 2], 0.4), &p);
        let s = stability(&a).unwrap();
        assert!(s.stable);
        assert!((s.abscissa + 0.02).abs() < 1e-12);
        let v = solve_lyapunov(&a, &build_diffusion(&p)).unwrap().0;
        // n̄ + 1/2 on each vibration, vacuum on the cavity.
        let expected = [0.8, 0.8, 2.2, 2.2, 0.5, 0.5];
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j { expected[i] } else { 0.0 };
                assert!((v[(i, j)] - e).abs() < 1e-12, "V[{i},{j}] = {}", v[(i, j)]);
            }
        }
    }

    #[test]
    fn red_detuned_optimum_is_stable() {
        let p = params();
        let ss = solve_effective_detuning(&p);
        let s = stability(&build_drift(&ss, &p)).unwrap();
        assert!(s.stable && !s.marginal, "{s:?}");
    }

    #[test]
    fn blue_detuned_strong_coupling_is_unstable_and_diverges() {
        let mut p = params();
        p.delta = -0.4;
        let ss = solve_effective_detuning(&p);
        assert!((ss.couplings[1].norm() - 0.307).abs() < 0.01);
        let a = build_drift(&ss, &p);
        let s = stability(&a).unwrap();
        assert!(!s.stable);
        let q = build_diffusion(&p);
        assert!(matches!(solve_lyapunov(&a, &q), Err(DynamicsError::Unstable { .. })));
        assert!(matches!(integrate_covariance(&a, &q, 2000.0, 0.01), Err(DynamicsError::Diverged { .. })));
    }

    #[test]
    fn integrator_converges_to_thermal_product() {
        let mut p = params();
        p.gamma1 = 0.2;
        p.gamma2 = 0.3;
        p.n1 = 0.5;
        let a = build_drift(&state_with([Complex64::new(0.0, 0.0); 2], 0.4), &p);
        let v = integrate_covariance(&a, &build_diffusion(&p), 250.0, 0.01).unwrap().0;
        let diag = [1.0, 1.0, 0.51, 0.51, 0.5, 0.5];
        for i in 0..6 {
            assert!((v[(i, i)] - diag[i]).abs() < 1e-9, "{i}: {}", v[(i, i)]);
        }
    }

    #[test]
    fn integrator_rejects_bad_steps() {
        let p = params();
        let a = build_drift(&solve_effective_detuning(&p), &p);
        let q = build_diffusion(&p);
        assert!(integrate_covariance(&a, &q, 0.0, 0.1).is_err());
        assert!(integrate_covariance(&a, &q, 1.0, -0.1).is_err());
    }

    #[test]
    fn optimum_covariance_is_physical() {
        let p = params();
        let ss = solve_effective_detuning(&p);
        let a = build_drift(&ss, &p);
        let q = build_diffusion(&p);
        let v = solve_lyapunov(&a, &q).unwrap().0;
        assert!(lyapunov_residual(&a.0, &v, &q.0) < 1e-10);
        assert_eq!(v, v.transpose());
        for nu in symplectic_eigenvalues(&v).unwrap() {
            assert!(nu >= 0.5 - 1e-9, "{nu}");
        }
        assert!((0..6).all(|i| v[(i, i)] > 0.0));
    }

    #[test]
    fn symplectic_spectrum_of_thermal_state() {
        let v = Matrix6::from_diagonal(&nalgebra::Vector6::new(0.5, 0.5, 2.5, 2.5, 1.0, 1.0));
        let nu = symplectic_eigenvalues(&v).unwrap();
        assert_eq!(nu.len(), 3);
        for (a, b) in nu.iter().zip([0.5, 1.0, 2.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
