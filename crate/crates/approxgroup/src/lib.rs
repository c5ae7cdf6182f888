//! Finite sets of unitary matrices, approximate-group certificates, and the
//! decomposition pipeline that exhibits such sets as almost abelian.
//!
//! The crate is organised around a handful of layers:
//!
//! * [`linalg`] — complex matrix arithmetic over `U_n(C)`: Hilbert-Schmidt
//!   geometry, exact monomial (generalized permutation) matrices, and spectral
//!   decomposition of normal matrices by joint Jacobi sweeps.
//! * [`sets`] — deduplicated finite sets of unitary elements under an exact or
//!   tolerance-based equality regime, product sets, and the approximate-group
//!   and control certificates.
//! * [`jordan`] — the finite-subgroup pipeline: closures, near-identity
//!   subsets, large centralizers and the abelian-subgroup recursion.
//! * [`structure`] — centralizer finders for approximate groups, the
//!   block-subgroup induction, root tori and the normalizer quotient bound.
//! * [`growth`] — word-ball growth profiles and virtual-abelianness detection.
//! * [`besicovitch`] — the weak Besicovitch property as executable geometry.
//! * [`families`] — named exact test families (symmetric, dihedral,
//!   quaternion, clock-and-shift Heisenberg, diagonal, random pairs).
//!
//! All values are immutable after construction and every operation is a pure
//! function, so the API is safe to drive from multiple threads.

pub mod besicovitch;
pub mod error;
pub mod families;
pub mod growth;
pub mod jordan;
pub mod linalg;
pub mod sets;
pub mod structure;
pub mod tol;

pub use error::Error;
pub use linalg::{Complex64, DenseMatrix, MonomialMatrix, PhaseFrac, SpectralDecomposition, UnitaryElement};
pub use sets::{ApproxCertificate, ControlCertificate, ControlOutcome, EqualityRegime, MatrixSet};
pub use tol::Tolerances;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
