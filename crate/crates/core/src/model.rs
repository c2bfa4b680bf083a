//! Physical parameters of the cavity + molecule ensemble, conversion to the
//! dimensionless frame where the vibrational frequency is one, and the two
//! routes to the single-photon optomechanical coupling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::ModelError;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J / K.
pub const K_B: f64 = 1.380_649e-23;
/// Vacuum permittivity, F / m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

const THZ: f64 = 1e12;
const GHZ: f64 = 1e9;

/// Cavity, molecules and drive in laboratory units.
///
/// Frequencies and rates are ordinary frequencies (the `/2π` is already
/// taken): THz for everything except `g_v`, which is in GHz. The drive
/// amplitude and the effective detuning are given directly in units of the
/// vibrational frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    /// Cavity resonance, THz. Only used in laser-detuning mode.
    pub nu_p: f64,
    /// Vibrational frequency, THz.
    pub nu_v: f64,
    /// Drive frequency, THz. Only used in laser-detuning mode.
    pub nu_l: f64,
    /// Cavity amplitude decay rate, THz.
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Single-photon coupling, GHz (signed).
    pub g_v: f64,
    /// Drive amplitude in units of the vibrational frequency.
    pub omega: f64,
    /// Drive phase in radians.
    #[serde(default)]
    pub drive_phase: f64,
    /// Effective detuning in units of the vibrational frequency.
    #[serde(default)]
    pub delta: f64,
    /// Total number of molecules.
    pub n_molecules: u32,
    /// Molecules assigned to the first collective mode.
    #[serde(default)]
    pub m_split: u32,
    /// When set, overrides `m_split` with `round(m_fraction * n_molecules)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_fraction: Option<f64>,
    /// Temperature in K; used for any occupation that is not given explicitly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<f64>,
}

impl SystemSpec {
    /// Number of molecules in the first collective mode after applying
    /// `m_fraction`.
    pub fn effective_m(&self) -> u32 {
        match self.m_fraction {
            Some(f) => (f * self.n_molecules as f64).round().max(0.0) as u32,
            None => self.m_split,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("nu_p", self.nu_p),
            ("nu_v", self.nu_v),
            ("nu_l", self.nu_l),
            ("kappa", self.kappa),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::invalid(field, format!("must be finite and > 0, got {value}")));
            }
        }
        for (field, value) in [("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ModelError::invalid(field, format!("must be finite and >= 0, got {value}")));
            }
        }
        for (field, value) in [
            ("g_v", self.g_v),
            ("omega", self.omega),
            ("drive_phase", self.drive_phase),
            ("delta", self.delta),
        ] {
            if !value.is_finite() {
                return Err(ModelError::invalid(field, "must be finite"));
            }
        }
        if self.n_molecules == 0 {
            return Err(ModelError::invalid("n_molecules", "must be >= 1"));
        }
        if let Some(f) = self.m_fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(ModelError::invalid("m_fraction", format!("must lie in [0, 1], got {f}")));
            }
        }
        if self.effective_m() > self.n_molecules {
            return Err(ModelError::invalid(
                "m_split",
                format!("M = {} exceeds N = {}", self.effective_m(), self.n_molecules),
            ));
        }
        if let Some(t) = self.temperature {
            if !(t.is_finite() && t >= 0.0) {
                return Err(ModelError::invalid("temperature", format!("must be >= 0, got {t}")));
            }
        }
        for (field, value) in [("n1", self.n1), ("n2", self.n2)] {
            match value {
                Some(n) if !(n.is_finite() && n >= 0.0) => {
                    return Err(ModelError::invalid(field, format!("must be >= 0, got {n}")));
                }
                None if self.temperature.is_none() => {
                    return Err(ModelError::invalid(field, "no occupation and no temperature given"));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Dimensionless working parameters; every rate is in units of the
/// vibrational frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledParams {
    /// Effective detuning.
    pub delta: f64,
    /// Bare drive detuning `(ω_p - ω_l) / ω_v`.
    pub delta_p: f64,
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub g_v: f64,
    /// Complex drive amplitude `Ω e^{iφ}`.
    pub drive: Complex64,
    /// Collective couplings `g_v √M` and `g_v √(N-M)`.
    pub g1: f64,
    pub g2: f64,
    pub n1: f64,
    pub n2: f64,
    pub n_molecules: u32,
    pub m_split: u32,
}

impl ScaledParams {
    /// Vibrational frequency in the scaled frame.
    pub const OMEGA_V: f64 = 1.0;

    pub fn gammas(&self) -> [f64; 2] {
        [self.gamma1, self.gamma2]
    }

    pub fn collective(&self) -> [f64; 2] {
        [self.g1, self.g2]
    }

    pub fn occupations(&self) -> [f64; 2] {
        [self.n1, self.n2]
    }

    /// Rebuilds the collective couplings after `g_v`, `n_molecules` or
    /// `m_split` were edited in place.
    pub fn with_split(mut self, n_molecules: u32, m_split: u32) -> Self {
        self.n_molecules = n_molecules;
        self.m_split = m_split;
        self.g1 = self.g_v * (m_split as f64).sqrt();
        self.g2 = self.g_v * ((n_molecules - m_split) as f64).sqrt();
        self
    }
}

/// Bose-Einstein occupation of a mode at frequency `nu` (THz) and
/// temperature `t` (K).
pub fn thermal_occupation(nu: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = 2.0 * PI * HBAR * nu * THZ / (K_B * t);
    1.0 / x.exp_m1()
}

pub fn scale(spec: &SystemSpec) -> Result<ScaledParams, ModelError> {
    spec.validate()?;
    let unit = spec.nu_v;
    let occupation = |explicit: Option<f64>| {
        explicit.unwrap_or_else(|| thermal_occupation(spec.nu_v, spec.temperature.unwrap_or(0.0)))
    };
    let g_v = spec.g_v * GHZ / (spec.nu_v * THZ);
    let base = ScaledParams {
        delta: spec.delta,
        delta_p: (spec.nu_p - spec.nu_l) / unit,
        kappa: spec.kappa / unit,
        gamma1: spec.gamma1 / unit,
        gamma2: spec.gamma2 / unit,
        g_v,
        drive: Complex64::from_polar(spec.omega, spec.drive_phase),
        g1: 0.0,
        g2: 0.0,
        n1: occupation(spec.n1),
        n2: occupation(spec.n2),
        n_molecules: spec.n_molecules,
        m_split: spec.effective_m(),
    };
    Ok(base.with_split(spec.n_molecules, spec.effective_m()))
}

/// Parameters of the single-molecule picture behind the coupling constant.
///
/// Frequencies here are angular frequencies in rad/s; `field_coupling` and
/// the microscopic coupling follow the same convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicroscopicSpec {
    /// Franck-Condon factor.
    pub lambda: f64,
    /// Shifted electronic gap, rad/s.
    pub omega_e_tilde: f64,
    /// Raman transition dipole, C m.
    pub mu: f64,
    /// Effective vibrational mass, amu.
    pub mass_amu: f64,
    /// Raman polarizability derivative, F m.
    pub raman_derivative: f64,
    /// Cavity mode volume, μm³.
    pub mode_volume_um3: f64,
}

impl MicroscopicSpec {
    pub fn mass_kg(&self) -> f64 {
        self.mass_amu * AMU
    }

    pub fn mode_volume_m3(&self) -> f64 {
        self.mode_volume_um3 * 1e-18
    }

    /// Electronic-field coupling `f = μ √(ħω_p / 2ε₀V_p) / ħ` in rad/s.
    pub fn field_coupling(&self, omega_p: f64) -> f64 {
        self.mu * (HBAR * omega_p / (2.0 * EPS0 * self.mode_volume_m3())).sqrt() / HBAR
    }
}

/// Coupling from the Raman polarizability derivative; returns `g_v / 2π` in
/// GHz for `nu_p`, `nu_v` in THz.
pub fn coupling_phenomenological(spec: &MicroscopicSpec, nu_p: f64, nu_v: f64) -> Result<f64, ModelError> {
    if !(spec.mass_amu > 0.0) {
        return Err(ModelError::invalid("mass_amu", "must be > 0"));
    }
    if !(spec.mode_volume_um3 > 0.0) {
        return Err(ModelError::invalid("mode_volume_um3", "must be > 0"));
    }
    if !(nu_v > 0.0) {
        return Err(ModelError::invalid("nu_v", "must be > 0"));
    }
    let omega_p = 2.0 * PI * nu_p * THZ;
    let omega_v = 2.0 * PI * nu_v * THZ;
    let x_zpf = (HBAR / (2.0 * spec.mass_kg() * omega_v)).sqrt();
    let g = -omega_p * spec.raman_derivative * x_zpf / (EPS0 * spec.mode_volume_m3());
    Ok(g / (2.0 * PI * GHZ))
}

/// Relative size below which a resonance denominator counts as a pole.
pub const POLE_TOLERANCE: f64 = 1e-9;

/// The resonance bracket `M(v)^{-1}` of the off-resonant Raman coupling.
pub fn resonance_bracket(omega_e_tilde: f64, omega_v: f64, omega_p: f64) -> Result<f64, ModelError> {
    let p2 = omega_p * omega_p;
    let scale = p2.max(omega_e_tilde * omega_e_tilde).max(f64::MIN_POSITIVE);
    let sum = omega_v + omega_e_tilde;
    let diff = omega_v - omega_e_tilde;
    let denominators = [sum * sum - p2, diff * diff - p2, omega_e_tilde * omega_e_tilde - p2];
    for d in denominators {
        if d.abs() < POLE_TOLERANCE * scale {
            return Err(ModelError::ResonancePole { denominator: d });
        }
    }
    Ok(sum / denominators[0] - diff / denominators[1] - 2.0 * omega_e_tilde / denominators[2])
}

/// Single-photon coupling from the electronic picture,
/// `g_v = -2λ f² M(v)^{-1}`, in the frequency unit of the inputs.
pub fn coupling_microscopic(
    lambda: f64,
    f: f64,
    omega_e_tilde: f64,
    omega_v: f64,
    omega_p: f64,
) -> Result<f64, ModelError> {
    let bracket = resonance_bracket(omega_e_tilde, omega_v, omega_p)?;
    Ok(-2.0 * lambda * f * f * bracket)
}

/// Isotropic Raman tensor element `λ|μ|² / (M(v) ħ) · √(2mω_v/ħ)` in SI
/// units (`mass` in kg, `omega_v` in rad/s, `resonance` in s).
pub fn raman_tensor_element(lambda: f64, mu: f64, resonance: f64, mass: f64, omega_v: f64) -> Result<f64, ModelError> {
    if resonance == 0.0 || !resonance.is_finite() {
        return Err(ModelError::ZeroDenominator("M(v)"));
    }
    if !(mass > 0.0) {
        return Err(ModelError::invalid("mass", "must be > 0"));
    }
    if !(omega_v > 0.0) {
        return Err(ModelError::invalid("omega_v", "must be > 0"));
    }
    Ok(lambda * mu * mu / (resonance * HBAR) * (2.0 * mass * omega_v / HBAR).sqrt())
}
