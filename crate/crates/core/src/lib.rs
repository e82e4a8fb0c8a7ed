//! Local detection of nonclassical system-environment correlations.
//!
//! A bipartite state `ρ` on `H_S ⊗ H_E` is dephased locally in the eigenbasis
//! of its open-system marginal, giving `ρ' = (Φ ⊗ I)ρ`. The Hilbert-Schmidt
//! distance `δ(ρ) = ‖ρ − ρ'‖` vanishes exactly for classically correlated
//! (zero-discord) states, and after a unitary evolution `U` the reduced
//! distance `‖Tr_E{U(ρ − ρ')U†}‖` acts as a witness that needs only local
//! access to the open system.
//!
//! The crate provides:
//!
//! - [`matcore`]: dense complex matrices, partial traces and a Jacobi
//!   eigensolver for Hermitian matrices.
//! - [`states`]: bipartite density matrices, Schmidt decomposition, purity,
//!   concurrence and random-state generators.
//! - [`dephasing`]: the local dephasing map, the classicality test and the
//!   discord measure `δ(ρ)`.
//! - [`randmat`]: seeded Ginibre and Haar sampling, level-spectrum ensembles
//!   and structured evolutions `W e^{-iDt} W†`.
//! - [`witness`]: the witness itself, Haar-averaged Monte Carlo estimators,
//!   the closed-form Haar average and the twirling map `Λ_AB`.
//! - [`experiment`]: the configuration format and run driver behind the
//!   `discord-witness` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

#![forbid(unsafe_code)]

pub mod dephasing;
pub mod experiment;
pub mod matcore;
pub mod montecarlo;
pub mod randmat;
pub mod states;
pub mod witness;

pub use num_complex::Complex64;

pub use dephasing::{
    dephase_local, dephase_total, discord_delta, eigenbasis_of_marginal, is_classical,
    DephasingBasis, CLASSICALITY_TOL,
};
pub use matcore::{
    conj_by_unitary, eig_hermitian, hs_inner, hs_norm, partial_trace_env, partial_trace_sys,
    tensor, ComplexMatrix, HermitianEigensystem,
};
pub use montecarlo::McEstimate;
pub use randmat::{RngHandle, SpectrumEnsemble, SpectrumKind, StructuredEvolution};
pub use states::{BipartiteState, SchmidtDecomposition};
pub use witness::twirl::TwirlConstants;

/// Errors raised by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid probability table: {0}")]
    InvalidProbabilities(String),

    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("explicit spectrum ensemble requires {dim} levels, got {found}")]
    MissingLevels { dim: usize, found: usize },

    #[error("Monte Carlo estimate needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("dimension {0} is too small for this operation")]
    DimensionTooSmall(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration:\n{}", format_config_errors(.0))]
    Config(Vec<experiment::ConfigError>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_config_errors(errors: &[experiment::ConfigError]) -> String {
    errors
        .iter()
        .map(|e| format!("  - {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T> = std::result::Result<T, Error>;
