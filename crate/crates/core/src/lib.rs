//! Lewis–Riesenfeld invariants, cyclic evolutions and their phases for a spin
//! in a rotating field, plus checks that compare a loop with its conjugate and
//! time-reversed partners.

pub mod claims;
pub mod error;
pub mod linalg;
pub mod model;
pub mod phases;
pub mod propagation;

pub use claims::{ClaimChecker, ClaimId, ClaimResult, GateReport, Tolerances, Verdict};
pub use error::{Error, Result};
pub use linalg::{ComplexScalar, HermitianDecomp, Ket2, Ket4, Mat2, Mat4};
pub use model::{
    ConjugateKind, ConjugateRule, InvariantDecomposition, LoopParameter, LoopSpec, Sector,
    TwoQubitSpec,
};
pub use phases::{Branch, CyclicState, PhaseReport};
pub use propagation::{PropagatorResult, PulseAxis, SequenceElement, SequenceSpec, Spin};
