//! Tolerances. Every threshold used by the library lives here.

use serde::{Deserialize, Serialize};

/// Relative threshold for "this component vanishes": `ZERO_REL * (1 + magnitude)`.
pub const ZERO_REL: f64 = 1e-9;
/// Relative threshold for sign verdicts in [`crate::positivity`].
pub const SIGN_REL: f64 = 1e-7;
/// Jacobi identity and `d² = 0` on structure constants.
pub const JACOBI: f64 = 1e-10;
/// Round trip structure equations -> brackets -> structure equations.
pub const DUALIZE_ROUNDTRIP: f64 = 1e-12;
/// Slice conditions along invariant flows.
pub const SLICE_PERSIST: f64 = 1e-8;
/// Residual allowed when decomposing the Hopf HCF tangent.
pub const ODE_CONSISTENCY: f64 = 1e-8;
/// Bismut flatness kept along a flow started at a flat metric.
pub const FLAT_PERSIST: f64 = 1e-7;
/// Smallest sample budget accepted by the classification harness.
pub const MIN_SAMPLES: usize = 50;

/// Overridable tolerance bundle (the CLI exposes these).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub zero_rel: f64,
    pub sign_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_rel: ZERO_REL,
            sign_rel: SIGN_REL,
        }
    }
}

impl Tolerances {
    /// Absolute zero threshold for a tensor whose largest entry is `magnitude`.
    pub fn zero_threshold(&self, magnitude: f64) -> f64 {
        self.zero_rel * (1.0 + magnitude)
    }
}

pub fn zero_threshold(magnitude: f64) -> f64 {
    Tolerances::default().zero_threshold(magnitude)
}
