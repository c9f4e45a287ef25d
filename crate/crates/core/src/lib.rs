//! Fock-space machinery and correlation measures for finite many-fermion
//! states.
//!
//! The central quantity is the *nonfreeness* of a fermion state: the entropy
//! of the state relative to the unique free (quasifree) state with the same
//! 1-particle statistics. For a pure state it coincides with the
//! particle-hole symmetric correlation entropy of the natural occupation
//! probabilities; for mixed, number-conserving states it is computed either
//! from the occupation spectrum and the von Neumann entropy, or directly as
//! a quantum relative entropy against the explicitly assembled free state.
//!
//! Modules:
//! - [`fock`]: occupation-number basis, creator/annihilator actions with
//!   exact sign bookkeeping, Slater-determinant expansion, mode bipartitions.
//! - [`states`]: pure states, ensembles, number-block density operators,
//!   tensor products and subsystem restriction (fermionic partial trace).
//! - [`spectra`]: 1-particle density matrices, natural occupations, von
//!   Neumann and relative entropy, Hermitian matrix square roots.
//! - [`nonfreeness`](mod@nonfreeness): free-state construction and the
//!   correlation measures.
//! - [`models`]: named example states (Slater frames, double Slater
//!   superpositions, Heisenberg ground states) and seeded random ensembles.
//!
//! All entropies are returned in bits (base-2 logarithms); multiply by
//! `ln 2` for nats.

pub mod eigen;
pub mod error;
pub mod fock;
pub mod models;
pub mod nonfreeness;
pub mod spectra;
pub mod states;

pub use error::{NonfreeError, Result};
pub use fock::{binomial, Bipartition, ModeCount, Occupation, OrbitalMatrix, Sector};
pub use models::{
    double_slater, heisenberg_ground_fermionic, random_state, slater_state, Geometry,
    LatticeSpec, RandomKind,
};
pub use nonfreeness::{
    build_free_state, corr_fidelity_bits, free_state_entropy_bits, nonfreeness,
    nonfreeness_pure, nonfreeness_pure_report, nonfreeness_rank2, NonfreenessOptions,
    NonfreenessReport,
};
pub use spectra::{
    matrix_sqrt, natural_spectrum, one_pdm, one_pdm_pure, relative_entropy_bits,
    von_neumann_entropy_bits, NaturalSpectrum, OnePdm,
};
pub use states::{DensityOperator, Ensemble, PureState};

/// Largest mode count for pipelines that never materialize dense
/// density-operator blocks (pure-state amplitudes only).
pub const MAX_MODES_PURE: usize = 16;

/// Largest mode count for which dense per-sector density-operator blocks
/// may be materialized (largest block is C(12,6) = 924).
pub const MAX_MODES_DENSE: usize = 12;

/// Validation and comparison tolerances used throughout the crate.
///
/// Dense double-precision eigensolves at the supported dimensions hold
/// residuals near 1e-12, so validation thresholds sit two to four orders
/// of magnitude above that.
pub mod tol {
    /// Unit-norm / unit-trace validation.
    pub const NORM: f64 = 1e-10;
    /// Hermiticity validation.
    pub const HERM: f64 = 1e-10;
    /// Allowed negative eigenvalue excursion for positive semidefiniteness.
    pub const PSD: f64 = 1e-10;
    /// Cross-module equality comparisons.
    pub const CMP: f64 = 1e-9;
    /// Orbital-column orthonormality.
    pub const ORTH: f64 = 1e-8;
    /// Occupation eigenvalues may leave [0, 1] by at most this much before
    /// clipping turns into an error.
    pub const SPECTRUM: f64 = 1e-8;
    /// Weights below this contribute zero to entropy sums (0 log 0 = 0).
    pub const ZERO: f64 = 1e-14;
    /// Largest eigenvector weight allowed outside the range of the
    /// reference state before relative entropy is declared infinite.
    pub const KERNEL: f64 = 1e-12;
    /// Matrix square root reconstruction.
    pub const SQRT: f64 = 1e-10;
    /// Agreement between the entropy-difference and relative-entropy
    /// routes to nonfreeness.
    pub const CROSS_CHECK: f64 = 1e-8;
    /// Occupations above this count toward the rank of the 1-PDM.
    pub const RANK: f64 = 1e-12;
    /// Ground-level gaps below this are reported as degenerate.
    pub const DEGENERACY: f64 = 1e-8;
}
