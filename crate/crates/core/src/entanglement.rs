//! Two-mode reductions of the covariance matrix and the logarithmic
//! negativity of each bipartition.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::dynamics::CovarianceMatrix;
use crate::error::EntanglementError;

/// Tiny negative radicands (relative to Σ²) are treated as roundoff.
pub const RADICAND_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModePair {
    #[serde(rename = "a_b1", alias = "A_B1")]
    CavityB1,
    #[serde(rename = "a_b2", alias = "A_B2")]
    CavityB2,
    #[serde(rename = "b1_b2", alias = "B1_B2")]
    B1B2,
}

impl ModePair {
    pub const ALL: [ModePair; 3] = [ModePair::CavityB1, ModePair::CavityB2, ModePair::B1B2];

    /// Rows/columns of the full covariance kept by the reduction
    /// (zero-based, first mode then second mode).
    pub fn indices(self) -> [usize; 4] {
        match self {
            ModePair::CavityB1 => [0, 1, 4, 5],
            ModePair::CavityB2 => [2, 3, 4, 5],
            ModePair::B1B2 => [0, 1, 2, 3],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModePair::CavityB1 => "a_b1",
            ModePair::CavityB2 => "a_b2",
            ModePair::B1B2 => "b1_b2",
        }
    }
}

impl fmt::Display for ModePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModePair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a_b1" => Ok(ModePair::CavityB1),
            "a_b2" => Ok(ModePair::CavityB2),
            "b1_b2" => Ok(ModePair::B1B2),
            other => Err(format!("unknown mode pair `{other}` (expected a_b1, a_b2 or b1_b2)")),
        }
    }
}

/// A two-mode covariance split into its local and correlation blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCovariance {
    pub full: Matrix4<f64>,
}

impl ReducedCovariance {
    pub fn new(full: Matrix4<f64>) -> Self {
        ReducedCovariance { full }
    }

    pub fn first(&self) -> Matrix2<f64> {
        self.full.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn second(&self) -> Matrix2<f64> {
        self.full.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn correlation(&self) -> Matrix2<f64> {
        self.full.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// `Σ = det V_C + det V_D - 2 det V_CD`.
    pub fn sigma(&self) -> f64 {
        self.first().determinant() + self.second().determinant() - 2.0 * self.correlation().determinant()
    }
}

pub fn reduce(v: &CovarianceMatrix, pair: ModePair) -> ReducedCovariance {
    let idx = pair.indices();
    ReducedCovariance::new(Matrix4::from_fn(|i, j| v.0[(idx[i], idx[j])]))
}

/// Smallest symplectic eigenvalue of the partially transposed two-mode
/// covariance, from its closed form in `Σ` and `det V`.
pub fn eta_minus(v4: &Matrix4<f64>) -> Result<f64, EntanglementError> {
    let reduced = ReducedCovariance::new(*v4);
    let sigma = reduced.sigma();
    let det = v4.determinant();
    let mut radicand = sigma * sigma - 4.0 * det;
    if radicand < 0.0 {
        if radicand < -RADICAND_TOLERANCE * (sigma * sigma).max(1.0) {
            return Err(EntanglementError::Unphysical { radicand });
        }
        radicand = 0.0;
    }
    let inner = (sigma - radicand.sqrt()).max(0.0);
    Ok((inner / 2.0).sqrt())
}

/// `max(0, -ln 2η⁻)`.
pub fn negativity_from_eta(eta: f64) -> f64 {
    (-(2.0 * eta).ln()).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub pair: ModePair,
    pub eta_minus: f64,
    pub log_negativity: f64,
    pub sigma: f64,
    pub det_first: f64,
    pub det_second: f64,
    pub det_correlation: f64,
    /// Reports are only produced from a solved (hence stable) covariance.
    pub stable: bool,
}

pub fn log_negativity(v: &CovarianceMatrix, pair: ModePair) -> Result<EntanglementReport, EntanglementError> {
    let reduced = reduce(v, pair);
    let eta = eta_minus(&reduced.full)?;
    Ok(EntanglementReport {
        pair,
        eta_minus: eta,
        log_negativity: negativity_from_eta(eta),
        sigma: reduced.sigma(),
        det_first: reduced.first().determinant(),
        det_second: reduced.second().determinant(),
        det_correlation: reduced.correlation().determinant(),
        stable: true,
    })
}
