#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use rand::Rng;

use molcav::dynamics::symplectic_eigenvalues;
use molcav::model::ScaledParams;

fn embed(block: &Matrix2<f64>, mode: usize) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<2, 2>(2 * mode, 2 * mode).copy_from(block);
    m
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, s, -s, c)
}

fn squeezer(r: f64) -> Matrix2<f64> {
    Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp())
}

fn beam_splitter(theta: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    let i = Matrix2::identity();
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(i * c));
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&(i * s));
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&(i * -s));
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&(i * c));
    m
}

fn two_mode_squeezer(r: f64) -> Matrix4<f64> {
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(Matrix2::identity() * r.cosh()));
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&(Matrix2::identity() * r.cosh()));
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&(z * r.sinh()));
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&(z * r.sinh()));
    m
}

/// A random symplectic transformation of two modes built from elementary
/// Gaussian operations.
pub fn random_symplectic<R: Rng>(rng: &mut R) -> Matrix4<f64> {
    let mut s = Matrix4::identity();
    for _ in 0..3 {
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        let b = rng.random_range(0.0..std::f64::consts::TAU);
        s = embed(&rotation(a), 0) * embed(&rotation(b), 1) * s;
        s = embed(&squeezer(rng.random_range(-0.8..0.8)), rng.random_range(0..2)) * s;
        s = beam_splitter(rng.random_range(0.0..std::f64::consts::PI)) * s;
        s = two_mode_squeezer(rng.random_range(-1.0..1.0)) * s;
    }
    s
}

/// A random physical two-mode covariance: thermal symplectic spectrum
/// `ν ≥ 1/2` dressed by a random symplectic.
pub fn random_physical_covariance<R: Rng>(rng: &mut R) -> Matrix4<f64> {
    let nu1 = 0.5 + rng.random_range(0.0..2.0f64).powi(2);
    let nu2 = 0.5 + rng.random_range(0.0..2.0f64).powi(2);
    let s = random_symplectic(rng);
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu1, nu1, nu2, nu2));
    let v = s * d * s.transpose();
    (v + v.transpose()) * 0.5
}

/// Smallest symplectic eigenvalue of the partial transpose, taken directly
/// from the spectrum of `J Ṽ` (independent of the closed form).
pub fn eta_minus_oracle(v: &Matrix4<f64>) -> f64 {
    let p = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    symplectic_eigenvalues(&(p * v * p)).unwrap()[0]
}

/// Random scaled parameters covering red and blue detuning, thermal noise
/// and asymmetric splits.
pub fn random_params<R: Rng>(rng: &mut R) -> ScaledParams {
    let n = rng.random_range(2..400u32);
    let m = rng.random_range(0..=n);
    ScaledParams {
        delta: rng.random_range(-1.5..3.0),
        delta_p: 0.0,
        kappa: rng.random_range(0.1..1.0),
        gamma1: rng.random_range(0.05..0.5),
        gamma2: rng.random_range(0.05..0.5),
        g_v: rng.random_range(1e-4..2e-3),
        drive: Complex64::from_polar(rng.random_range(0.0..30.0), rng.random_range(0.0..std::f64::consts::TAU)),
        g1: 0.0,
        g2: 0.0,
        n1: rng.random_range(0.0..5.0),
        n2: rng.random_range(0.0..5.0),
        n_molecules: n,
        m_split: m,
    }
    .with_split(n, m)
}
