//! Two-mode vibrational model with the cavity adiabatically eliminated,
//! and a harness comparing it against the full linearized model.

use nalgebra::{Matrix4, Matrix6};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{self, build_diffusion, build_drift, CovarianceMatrix};
use crate::entanglement::{eta_minus, negativity_from_eta, reduce, ModePair};
use crate::error::PointError;
use crate::model::ScaledParams;
use crate::steady::SteadyState;

/// Ratio below which `a ≪ b` is considered satisfied by the regime report.
pub const REGIME_RATIO: f64 = 0.2;

/// Cavity-induced frequency shift and damping `(ω_opt, γ_opt)` of a mode at
/// frequency `omega` coupled with real strength `g`.
pub fn optical_shift(g: f64, delta: f64, kappa: f64, omega: f64) -> (f64, f64) {
    let lo = kappa * kappa + (delta - omega).powi(2);
    let hi = kappa * kappa + (delta + omega).powi(2);
    let g2 = g * g;
    let shift = g2 * (delta + omega) / hi + g2 * (delta - omega) / lo;
    let damping = g2 * kappa / lo - g2 * kappa / hi;
    (shift, damping)
}

/// The two cavity-mediated exchange couplings for real `g1`, `g2`.
pub fn exchange_couplings(g1: f64, g2: f64, delta: f64, kappa: f64, omega: f64) -> [Complex64; 2] {
    let i = Complex64::i();
    let lo = kappa * kappa + (delta - omega).powi(2);
    let hi = kappa * kappa + (delta + omega).powi(2);
    let gg = g1 * g2;
    let first = gg * (kappa + i * (delta - omega)) / lo - gg * (kappa - i * (delta + omega)) / hi;
    let second = gg * (kappa + i * (delta + omega)) / hi - gg * (kappa - i * (delta - omega)) / lo;
    [first, second]
}

/// Resonant approximation `iG₁G₂/(2ω) - G₁G₂/κ`.
pub fn approximate_coupling(g1: f64, g2: f64, kappa: f64, omega: f64) -> Complex64 {
    let gg = g1 * g2;
    Complex64::new(-gg / kappa, gg / (2.0 * omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub kappa_over_omega: f64,
    /// `max_l |G_l| / κ`.
    pub coupling_over_kappa: f64,
    /// `max_l γ_l / κ`.
    pub gamma_over_kappa: f64,
    /// `|Δ - ω_v| / κ`.
    pub detuning_offset: f64,
}

impl Regime {
    pub fn satisfied(&self) -> bool {
        self.kappa_over_omega < REGIME_RATIO
            && self.coupling_over_kappa < REGIME_RATIO
            && self.gamma_over_kappa < REGIME_RATIO
            && self.detuning_offset < 1.0
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.kappa_over_omega >= REGIME_RATIO {
            w.push(format!("kappa/omega_v = {:.3} is not small", self.kappa_over_omega));
        }
        if self.coupling_over_kappa >= REGIME_RATIO {
            w.push(format!("|G|/kappa = {:.3} is not small", self.coupling_over_kappa));
        }
        if self.gamma_over_kappa >= REGIME_RATIO {
            w.push(format!("gamma/kappa = {:.3} is not small", self.gamma_over_kappa));
        }
        if self.detuning_offset >= 1.0 {
            w.push(format!("|delta - omega_v|/kappa = {:.3}, off resonance", self.detuning_offset));
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveParams {
    /// `Ω_l = ω_l - ω_{l,opt}`.
    pub frequencies: [f64; 2],
    /// `Γ_l = γ_l + γ_{l,opt}`.
    pub decays: [f64; 2],
    pub optical_shifts: [f64; 2],
    pub optical_dampings: [f64; 2],
    pub exchange: [Complex64; 2],
    pub coupling: Complex64,
    /// Real couplings after the cavity phase rotation.
    pub real_couplings: [f64; 2],
    /// Phase (rad) removed from `<a>` to make the couplings real.
    pub rotation: f64,
    pub delta: f64,
    pub kappa: f64,
    pub regime: Regime,
}

pub fn effective_params(ss: &SteadyState, p: &ScaledParams) -> EffectiveParams {
    let w = ScaledParams::OMEGA_V;
    let rotation = -ss.cavity.arg();
    let amplitude = ss.cavity.norm();
    let real_couplings = p.collective().map(|g| g * amplitude);
    let gammas = p.gammas();
    let (kappa, delta) = (p.kappa, ss.delta);
    let mut frequencies = [w; 2];
    let mut decays = gammas;
    let mut optical_shifts = [0.0; 2];
    let mut optical_dampings = [0.0; 2];
    for l in 0..2 {
        let (s, d) = optical_shift(real_couplings[l], delta, kappa, w);
        optical_shifts[l] = s;
        optical_dampings[l] = d;
        frequencies[l] -= s;
        decays[l] += d;
    }
    let [g1, g2] = real_couplings;
    let regime = Regime {
        kappa_over_omega: kappa / w,
        coupling_over_kappa: g1.abs().max(g2.abs()) / kappa,
        gamma_over_kappa: gammas[0].max(gammas[1]) / kappa,
        detuning_offset: (delta - w).abs() / kappa,
    };
    EffectiveParams {
        frequencies,
        decays,
        optical_shifts,
        optical_dampings,
        exchange: exchange_couplings(g1, g2, delta, kappa, w),
        coupling: approximate_coupling(g1, g2, kappa, w),
        real_couplings,
        rotation,
        delta,
        kappa,
        regime,
    }
}

/// Quadrature drift contribution of `dB_t/dt ∋ c B_s + d B_s†`.
fn add_complex_term(a: &mut Matrix4<f64>, target: usize, source: usize, c: Complex64, d: Complex64) {
    let (t, s) = (2 * target, 2 * source);
    let (sum, diff) = (c + d, c - d);
    a[(t, s)] += sum.re;
    a[(t, s + 1)] -= diff.im;
    a[(t + 1, s)] += sum.im;
    a[(t + 1, s + 1)] += diff.re;
}

/// Drift of `(X_B1, Y_B1, X_B2, Y_B2)` for the reduced equations
/// `dB₁ = -(Γ₁+iΩ₁)B₁ + 𝒢B₂ - 𝒢B₂†`, `dB₂ = -𝒢B₁† + 𝒢B₁ - (Γ₂+iΩ₂)B₂`.
pub fn reduced_drift(eff: &EffectiveParams) -> Matrix4<f64> {
    let mut a = Matrix4::zeros();
    let zero = Complex64::new(0.0, 0.0);
    for l in 0..2 {
        let own = -Complex64::new(eff.decays[l], eff.frequencies[l]);
        add_complex_term(&mut a, l, l, own, zero);
    }
    let g = eff.coupling;
    add_complex_term(&mut a, 0, 1, g, -g);
    add_complex_term(&mut a, 1, 0, g, -g);
    a
}

/// Thermal diffusion plus cavity noise filtered at the two sidebands `±ω_v`,
/// split equally between the quadratures of each mode.
pub fn reduced_diffusion(eff: &EffectiveParams, p: &ScaledParams) -> Matrix4<f64> {
    let w = ScaledParams::OMEGA_V;
    let k = eff.kappa;
    let spectrum = k / (k * k + (eff.delta - w).powi(2)) + k / (k * k + (eff.delta + w).powi(2));
    let gammas = p.gammas();
    let occupations = p.occupations();
    let mut d = Matrix4::zeros();
    for l in 0..2 {
        for m in 0..2 {
            let mut v = eff.real_couplings[l] * eff.real_couplings[m] * spectrum;
            if l == m {
                v += (2.0 * occupations[l] + 1.0) * gammas[l];
            }
            d[(2 * l, 2 * m)] = v;
            d[(2 * l + 1, 2 * m + 1)] = v;
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub delta: f64,
    pub kappa: f64,
    pub g1: f64,
    pub g2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub n1: f64,
    pub n2: f64,
    pub n_molecules: u32,
    pub m_split: u32,
    pub rotation: f64,
    pub omega_eff1: f64,
    pub omega_eff2: f64,
    pub gamma_eff1: f64,
    pub gamma_eff2: f64,
    pub coupling_re: f64,
    pub coupling_im: f64,
    pub coupling_abs: f64,
    pub exchange1_re: f64,
    pub exchange1_im: f64,
    pub exchange2_re: f64,
    pub exchange2_im: f64,
    pub kappa_over_omega: f64,
    pub coupling_over_kappa: f64,
    pub gamma_over_kappa: f64,
    pub regime_ok: bool,
    pub full_abscissa: f64,
    pub reduced_abscissa: f64,
    /// `max |λ_full - λ_red| / |λ_full|` over matched slow eigenvalues.
    pub eigen_deviation: f64,
    /// Same, restricted to real parts (decay rates).
    pub decay_deviation: f64,
    /// `max |V_red - V_full| / max |V_full|` over the vibrational block.
    pub covariance_deviation: f64,
    pub en_full: f64,
    pub en_reduced: f64,
    pub en_deviation: f64,
}

/// Slow eigenvalues of the full drift: the four least damped.
fn slow_eigenvalues(a: &Matrix6<f64>) -> Result<Vec<Complex64>, PointError> {
    let mut ev = dynamics::eigenvalues(a)?;
    ev.sort_by(|x, y| y.re.total_cmp(&x.re));
    ev.truncate(4);
    Ok(ev)
}

/// Greedy nearest-neighbour pairing of reduced to full eigenvalues.
fn matched_deviation(full: &[Complex64], reduced: &[Complex64]) -> (f64, f64) {
    let mut used = vec![false; full.len()];
    let (mut eig, mut decay) = (0.0f64, 0.0f64);
    for r in reduced {
        let (j, f) = full
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|a, b| (a.1 - r).norm().total_cmp(&(b.1 - r).norm()))
            .expect("as many full as reduced eigenvalues");
        used[j] = true;
        eig = eig.max((f - r).norm() / f.norm());
        decay = decay.max((f.re - r.re).abs() / f.re.abs());
    }
    (eig, decay)
}

pub fn compare_with_full(p: &ScaledParams, ss: &SteadyState) -> Result<ComparisonReport, PointError> {
    let eff = effective_params(ss, p);
    let full_a = build_drift(ss, p);
    let full_v: CovarianceMatrix = dynamics::solve_lyapunov(&full_a, &build_diffusion(p))?;
    let red_a = reduced_drift(&eff);
    let red_v = dynamics::lyapunov(&red_a, &reduced_diffusion(&eff, p))?;

    let full_slow = slow_eigenvalues(&full_a.0)?;
    let red_ev = dynamics::eigenvalues(&red_a)?;
    let (eigen_deviation, decay_deviation) = matched_deviation(&full_slow, &red_ev);

    let block = reduce(&full_v, ModePair::B1B2).full;
    let covariance_deviation = (red_v - block).amax() / block.amax();
    let en_full = negativity_from_eta(eta_minus(&block)?);
    let en_reduced = negativity_from_eta(eta_minus(&red_v)?);
    let en_deviation = if en_full > 1e-12 {
        (en_reduced - en_full).abs() / en_full
    } else if en_reduced > 1e-12 {
        f64::INFINITY
    } else {
        0.0
    };

    Ok(ComparisonReport {
        delta: ss.delta,
        kappa: p.kappa,
        g1: eff.real_couplings[0],
        g2: eff.real_couplings[1],
        gamma1: p.gamma1,
        gamma2: p.gamma2,
        n1: p.n1,
        n2: p.n2,
        n_molecules: p.n_molecules,
        m_split: p.m_split,
        rotation: eff.rotation,
        omega_eff1: eff.frequencies[0],
        omega_eff2: eff.frequencies[1],
        gamma_eff1: eff.decays[0],
        gamma_eff2: eff.decays[1],
        coupling_re: eff.coupling.re,
        coupling_im: eff.coupling.im,
        coupling_abs: eff.coupling.norm(),
        exchange1_re: eff.exchange[0].re,
        exchange1_im: eff.exchange[0].im,
        exchange2_re: eff.exchange[1].re,
        exchange2_im: eff.exchange[1].im,
        kappa_over_omega: eff.regime.kappa_over_omega,
        coupling_over_kappa: eff.regime.coupling_over_kappa,
        gamma_over_kappa: eff.regime.gamma_over_kappa,
        regime_ok: eff.regime.satisfied(),
        full_abscissa: dynamics::spectral_abscissa(&full_a.0)?,
        reduced_abscissa: dynamics::spectral_abscissa(&red_a)?,
        eigen_deviation,
        decay_deviation,
        covariance_deviation,
        en_full,
        en_reduced,
        en_deviation,
    })
}
