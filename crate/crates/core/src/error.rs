use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integration failure: unitarity defect {defect:.3e} exceeds 1e-9")]
    IntegrationFailure { defect: f64 },

    /// Ω vanishes: every state is cyclic and the recurrent basis is ambiguous.
    #[error("degenerate invariant: effective Rabi frequency {omega_eff:.3e} is zero")]
    DegenerateInvariant { omega_eff: f64 },

    #[error("state is not cyclic: cyclicity defect {defect:.3e}")]
    NonCyclic { defect: f64 },

    /// Zero detuning: the dynamical phases of conjugate loops coincide.
    #[error("resonant loop (zero detuning): dynamical-phase comparison is vacuous")]
    ResonantDegenerate,

    #[error("loops do not share a recurrent basis: overlap {overlap:.9}")]
    MismatchedRecurrentBasis { overlap: f64 },
}
