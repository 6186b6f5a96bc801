//! Index computations for symplectic paths and loops.
//!
//! All indices are carried as [`IndexValue`], which stores twice the index so
//! that half-integers stay exact. The standard normalization counts
//! counterclockwise rotation positively (`CZ(t -> e^{t J0 S}) = sign(S)/2`);
//! the canonical one is its negative.

mod crossing;
mod degree;
mod maslov;
mod spectral;
mod winding;

use serde::{Deserialize, Serialize};

pub use crossing::{cz_rs, cz_rs_detailed, rs_index, rs_index_detailed, RsOutcome};
pub use degree::cz_degree_sp2;
pub use maslov::maslov_loop;
pub(crate) use maslov::unwrap_phase;
pub use spectral::{
    loop_operator_matrix, loop_operator_spectral_flow, loop_operator_spectral_flow_fn,
    spectral_flow_fn, spectral_flow_matrix, LoopSpectralFlow, SF_CALIBRATION,
};
pub use winding::{cz_winding, WindingInterval};

use crate::linalg::{self, Mat};
use crate::path::SymplecticPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Standard,
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct IndexValue {
    pub doubled: i64,
    pub normalization: Normalization,
}

impl IndexValue {
    pub fn standard_doubled(doubled: i64) -> Self {
        Self {
            doubled,
            normalization: Normalization::Standard,
        }
    }

    pub fn standard(value: i64) -> Self {
        Self::standard_doubled(2 * value)
    }

    pub fn in_normalization(self, normalization: Normalization) -> Self {
        if normalization == self.normalization {
            self
        } else {
            Self {
                doubled: -self.doubled,
                normalization,
            }
        }
    }

    pub fn canonical(self) -> Self {
        self.in_normalization(Normalization::Canonical)
    }

    pub fn value(self) -> f64 {
        self.doubled as f64 / 2.0
    }

    /// The index as an integer, if it is one.
    pub fn integer(self) -> Option<i64> {
        (self.doubled % 2 == 0).then_some(self.doubled / 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub t: f64,
    pub kernel_dim: usize,
    pub signature: i64,
    pub is_endpoint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingReport {
    pub crossings: Vec<Crossing>,
    /// Twice the weighted signature sum.
    pub total_doubled: i64,
}

/// Tuning shared by the index algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexOptions {
    /// Relative singular-value threshold for membership in the Maslov cycle.
    pub tol: f64,
    /// Seed of the perturbation sequence used for irregular crossings.
    pub seed: u64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self { tol: 1e-7, seed: 0 }
    }
}

/// `sign det(I - Psi(1))`, or 0 when the endpoint is on the Maslov cycle.
pub fn endpoint_determinant_sign(path: &SymplecticPath, tol: f64) -> i32 {
    let dim = path.dim();
    let a = Mat::identity(dim, dim) - path.end();
    let scale = linalg::max_abs(path.end()).max(1.0);
    if linalg::smallest_singular_value(&a) < tol * scale {
        return 0;
    }
    if a.determinant() > 0.0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_is_negative_standard() {
        let v = IndexValue::standard_doubled(3);
        assert_eq!(v.canonical().doubled, -3);
        assert_eq!(v.canonical().canonical(), v.canonical());
        assert_eq!(v.in_normalization(Normalization::Standard), v);
        assert_eq!(v.integer(), None);
        assert_eq!(IndexValue::standard(2).integer(), Some(2));
    }
}
