//! Tolerance and cap bundles threaded through the pipelines.

use serde::{Deserialize, Serialize};

/// Numerical tolerances. Defaults sit two orders of magnitude above
/// double-precision accumulation error at the dimensions this crate targets
/// (n <= 16 dense, n <= 101 monomial), and every one of them can be
/// overridden per run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Tolerances {
    /// Unitarity residual accepted when admitting a dense matrix.
    pub eps_unit: f64,
    /// Eigenvalue clustering width for spectral decompositions.
    pub eps_spec: f64,
    /// Commutator norm below which two elements count as commuting.
    pub eps_comm: f64,
    /// Identification distance for tolerant-mode set equality.
    pub eps_eq: f64,
    /// Off-block mass accepted by block-subgroup membership tests.
    pub eps_block: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_unit: 1e-8,
            eps_spec: 1e-6,
            eps_comm: 1e-6,
            eps_eq: 1e-6,
            eps_block: 1e-6,
        }
    }
}

/// Size and depth caps. `CapExceeded` is an explicit, testable outcome, not a
/// panic.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of elements in any product or power set.
    pub product: usize,
    /// Maximum group order accepted by closure computations.
    pub closure: usize,
    /// Largest |A| on which the triple-enumeration finder is attempted.
    pub solymosi_elems: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            product: 2_000_000,
            closure: 2_000_000,
            solymosi_elems: 400,
        }
    }
}
