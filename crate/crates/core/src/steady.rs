//! Classical steady state of the driven cavity and the collective
//! vibrations, and the linearized couplings built from it.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;

use crate::error::SteadyStateError;
use crate::model::ScaledParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which solution of the bistable mean-field problem a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Effective detuning given directly; no self-consistency involved.
    Direct,
    /// The unique solution of a monostable laser-detuning problem.
    Single,
    Low,
    Middle,
    High,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Direct => "direct",
            Branch::Single => "single",
            Branch::Low => "low",
            Branch::Middle => "middle",
            Branch::High => "high",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    /// Mean cavity amplitude.
    pub cavity: Complex64,
    /// Mean amplitudes of the two collective vibrations.
    pub vibrations: [Complex64; 2],
    /// Effective detuning.
    pub delta: f64,
    /// Bare drive detuning.
    pub delta_p: f64,
    /// Linearized couplings `g_l <a>`.
    pub couplings: [Complex64; 2],
    pub branch: Branch,
}

impl SteadyState {
    /// Middle branches of a bistable response are expected to be unstable;
    /// the drift-matrix analysis decides.
    pub fn expected_unstable(&self) -> bool {
        self.branch == Branch::Middle
    }

    pub fn intensity(&self) -> f64 {
        self.cavity.norm_sqr()
    }
}

fn cavity_amplitude(drive: Complex64, delta: f64, kappa: f64) -> Complex64 {
    -I * drive / (I * delta + kappa)
}

fn vibration_amplitudes(p: &ScaledParams, intensity: f64) -> [Complex64; 2] {
    let g = p.collective();
    let gamma = p.gammas();
    [0, 1].map(|l| -I * g[l] * intensity / (I * ScaledParams::OMEGA_V + gamma[l]))
}

/// Static radiation-pressure shift `Σ_l g_l (<B_l> + <B_l>*)`.
fn detuning_shift(p: &ScaledParams, vibrations: &[Complex64; 2]) -> f64 {
    let g = p.collective();
    (0..2).map(|l| 2.0 * g[l] * vibrations[l].re).sum()
}

fn assemble(p: &ScaledParams, delta: f64, delta_p: f64, branch: Branch) -> SteadyState {
    let cavity = cavity_amplitude(p.drive, delta, p.kappa);
    let vibrations = vibration_amplitudes(p, cavity.norm_sqr());
    let mut ss = SteadyState {
        cavity,
        vibrations,
        delta,
        delta_p,
        couplings: [Complex64::new(0.0, 0.0); 2],
        branch,
    };
    ss.couplings = linearized_couplings(&ss, p);
    ss
}

/// Steady state with the effective detuning `p.delta` treated as the
/// independent variable. The bare detuning is back-computed.
pub fn solve_effective_detuning(p: &ScaledParams) -> SteadyState {
    let mut ss = assemble(p, p.delta, 0.0, Branch::Direct);
    ss.delta_p = p.delta - detuning_shift(p, &ss.vibrations);
    ss
}

/// Coefficient `η` of the Kerr-like shift `Δ = Δ_p - η |<a>|²`.
pub fn kerr_coefficient(p: &ScaledParams) -> f64 {
    let w = ScaledParams::OMEGA_V;
    p.collective()
        .iter()
        .zip(p.gammas())
        .map(|(g, gamma)| 2.0 * g * g * w / (gamma * gamma + w * w))
        .sum()
}

/// Residual of the intensity cubic `I[(Δ_p - ηI)² + κ²] - |Ω|²`.
pub fn intensity_cubic(intensity: f64, delta_p: f64, eta: f64, kappa: f64, drive_sq: f64) -> f64 {
    let d = delta_p - eta * intensity;
    intensity * (d * d + kappa * kappa) - drive_sq
}

fn intensity_cubic_derivative(intensity: f64, delta_p: f64, eta: f64, kappa: f64) -> f64 {
    let d = delta_p - eta * intensity;
    d * d + kappa * kappa - 2.0 * eta * intensity * d
}

const IMAG_TOLERANCE: f64 = 1e-6;
const POLISH_TOLERANCE: f64 = 1e-14;
const MERGE_TOLERANCE: f64 = 1e-10;

/// All steady states compatible with a bare drive detuning `delta_p`,
/// ascending in cavity intensity.
pub fn solve_laser_detuning(p: &ScaledParams, delta_p: f64) -> Result<Vec<SteadyState>, SteadyStateError> {
    let eta = kerr_coefficient(p);
    let drive_sq = p.drive.norm_sqr();
    let kappa = p.kappa;

    let mut roots: Vec<f64> = if eta == 0.0 || drive_sq == 0.0 {
        vec![drive_sq / (delta_p * delta_p + kappa * kappa)]
    } else {
        // Monic form of η²I³ - 2Δ_pηI² + (Δ_p² + κ²)I - |Ω|².
        let c2 = -2.0 * delta_p / eta;
        let c1 = (delta_p * delta_p + kappa * kappa) / (eta * eta);
        let c0 = -drive_sq / (eta * eta);
        let companion = Matrix3::new(-c2, -c1, -c0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let eig = companion.complex_eigenvalues();
        let mut real = Vec::new();
        for z in eig.iter() {
            if z.im.abs() <= IMAG_TOLERANCE * z.re.abs().max(1.0) {
                real.push(polish(z.re, delta_p, eta, kappa, drive_sq)?);
            }
        }
        if real.is_empty() {
            return Err(SteadyStateError::Companion);
        }
        real
    };

    roots.retain(|r| *r >= 0.0);
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOLERANCE * b.abs().max(1.0));
    if roots.is_empty() {
        return Err(SteadyStateError::Companion);
    }

    let tags: &[Branch] = match roots.len() {
        1 => &[Branch::Single],
        2 => &[Branch::Low, Branch::High],
        _ => &[Branch::Low, Branch::Middle, Branch::High],
    };
    Ok(roots
        .iter()
        .zip(tags)
        .map(|(&intensity, &branch)| assemble(p, delta_p - eta * intensity, delta_p, branch))
        .collect())
}

fn polish(start: f64, delta_p: f64, eta: f64, kappa: f64, drive_sq: f64) -> Result<f64, SteadyStateError> {
    let scale = |x: f64| {
        let d = delta_p - eta * x;
        drive_sq.max(x.abs() * (d * d + kappa * kappa)).max(f64::MIN_POSITIVE)
    };
    let mut x = start;
    for _ in 0..100 {
        let f = intensity_cubic(x, delta_p, eta, kappa, drive_sq);
        if f.abs() <= POLISH_TOLERANCE * scale(x) {
            return Ok(x);
        }
        let df = intensity_cubic_derivative(x, delta_p, eta, kappa);
        if df == 0.0 {
            break;
        }
        let next = x - f / df;
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    let residual = intensity_cubic(x, delta_p, eta, kappa, drive_sq);
    // Double roots at a fold converge only linearly; accept the best estimate
    // if it is at the level of roundoff in the evaluation.
    if residual.abs() <= 1e-9 * scale(x) {
        Ok(x)
    } else {
        Err(SteadyStateError::RootPolish { estimate: x, residual })
    }
}

/// `G_l = g_l <a>` for both collective modes.
pub fn linearized_couplings(ss: &SteadyState, p: &ScaledParams) -> [Complex64; 2] {
    p.collective().map(|g| g * ss.cavity)
}
