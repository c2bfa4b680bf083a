//! Single-point evaluation: scale, steady state, drift and diffusion,
//! stability, Lyapunov solve and entanglement.

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, build_diffusion, build_drift, CovarianceMatrix, Stability};
use crate::entanglement::{log_negativity, EntanglementReport, ModePair};
use crate::error::PointError;
use crate::model::{scale, ScaledParams, SystemSpec};
use crate::steady::{solve_effective_detuning, solve_laser_detuning, SteadyState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The effective detuning `delta` is the control parameter.
    #[default]
    Effective,
    /// The bare detuning `(nu_p - nu_l) / nu_v` is the control parameter.
    Laser,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub params: ScaledParams,
    pub steady: SteadyState,
    pub stability: Stability,
    /// Only present for stable points.
    pub covariance: Option<CovarianceMatrix>,
    /// Relative Lyapunov residual of the returned covariance.
    pub residual: Option<f64>,
    pub entanglement: Vec<EntanglementReport>,
    pub error: Option<PointError>,
}

impl PointResult {
    pub fn negativity(&self, pair: ModePair) -> Option<f64> {
        self.entanglement.iter().find(|r| r.pair == pair).map(|r| r.log_negativity)
    }
}

/// Fluctuation analysis around a given steady state.
pub fn analyze(p: &ScaledParams, steady: SteadyState, pairs: &[ModePair]) -> PointResult {
    let mut out = PointResult {
        params: *p,
        steady,
        stability: Stability { stable: false, abscissa: f64::NAN, marginal: false },
        covariance: None,
        residual: None,
        entanglement: Vec::new(),
        error: None,
    };
    let a = build_drift(&steady, p);
    out.stability = match dynamics::stability(&a) {
        Ok(s) => s,
        Err(e) => {
            out.error = Some(e.into());
            return out;
        }
    };
    if !out.stability.stable {
        return out;
    }
    let q = build_diffusion(p);
    let v = match dynamics::solve_lyapunov(&a, &q) {
        Ok(v) => v,
        Err(e) => {
            out.error = Some(e.into());
            return out;
        }
    };
    out.residual = Some(dynamics::lyapunov_residual(&a.0, &v.0, &q.0));
    for &pair in pairs {
        match log_negativity(&v, pair) {
            Ok(r) => out.entanglement.push(r),
            Err(e) => {
                out.error = Some(e.into());
                break;
            }
        }
    }
    out.covariance = Some(v);
    out
}

/// All steady states of `p` for the given mode (one in effective mode).
pub fn steady_states(p: &ScaledParams, mode: Mode) -> Result<Vec<SteadyState>, PointError> {
    match mode {
        Mode::Effective => Ok(vec![solve_effective_detuning(p)]),
        Mode::Laser => Ok(solve_laser_detuning(p, p.delta_p)?),
    }
}

pub fn evaluate_scaled(p: &ScaledParams, mode: Mode, pairs: &[ModePair]) -> Result<Vec<PointResult>, PointError> {
    Ok(steady_states(p, mode)?.into_iter().map(|ss| analyze(p, ss, pairs)).collect())
}

/// Full pipeline for one laboratory-unit parameter set.
pub fn evaluate(spec: &SystemSpec, mode: Mode, pairs: &[ModePair]) -> Result<Vec<PointResult>, PointError> {
    evaluate_scaled(&scale(spec)?, mode, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::Branch;

    fn spec() -> SystemSpec {
        SystemSpec {
            nu_p: 312.0,
            nu_v: 30.0,
            nu_l: 300.0,
            kappa: 10.0,
            gamma1: 0.003,
            gamma2: 0.003,
            g_v: 30.0,
            omega: 16.0,
            drive_phase: 0.0,
            delta: 0.4,
            n_molecules: 100,
            m_split: 0,
            m_fraction: None,
            temperature: None,
            n1: Some(0.01),
            n2: Some(0.01),
        }
    }

    #[test]
    fn stable_point_has_all_pairs() {
        let out = evaluate(&spec(), Mode::Effective, &ModePair::ALL).unwrap();
        assert_eq!(out.len(), 1);
        let r = &out[0];
        assert!(r.stability.stable);
        assert!(r.error.is_none());
        assert_eq!(r.entanglement.len(), 3);
        assert!(r.residual.unwrap() < 1e-10);
        assert!(r.negativity(ModePair::CavityB2).unwrap() > 0.1);
        // With M = 0 the first collective mode is decoupled.
        assert!(r.negativity(ModePair::CavityB1).unwrap() < 1e-12);
    }

    #[test]
    fn unstable_point_has_no_covariance() {
        let mut s = spec();
        s.delta = -0.4;
        let r = &evaluate(&s, Mode::Effective, &ModePair::ALL).unwrap()[0];
        assert!(!r.stability.stable);
        assert!(r.covariance.is_none() && r.entanglement.is_empty() && r.error.is_none());
    }

    #[test]
    fn invalid_spec_is_a_point_error() {
        let mut s = spec();
        s.kappa = -1.0;
        assert!(matches!(evaluate(&s, Mode::Effective, &ModePair::ALL), Err(PointError::Model(_))));
    }

    #[test]
    fn laser_mode_reproduces_effective_mode() {
        let eff = &evaluate(&spec(), Mode::Effective, &ModePair::ALL).unwrap()[0];
        let mut s = spec();
        // Choose ν_l so that the bare detuning equals the back-computed one.
        s.nu_l = s.nu_p - eff.steady.delta_p * s.nu_v;
        let laser = evaluate(&s, Mode::Laser, &ModePair::ALL).unwrap();
        let hit = laser
            .iter()
            .find(|r| (r.steady.delta - 0.4).abs() < 1e-8)
            .expect("a branch with the same effective detuning");
        assert_ne!(hit.steady.branch, Branch::Direct);
        for pair in ModePair::ALL {
            let (a, b) = (eff.negativity(pair).unwrap(), hit.negativity(pair).unwrap());
            assert!((a - b).abs() < 1e-6, "{pair}: {a} vs {b}");
        }
    }
}
