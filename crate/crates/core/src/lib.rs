//! Random, periodic and averaged dynamical decoupling of a finite bipartite
//! system, with the Zeno and decoupling error bounds that go with it.
//!
//! Operators are dense complex matrices; maps on operators act on
//! row-vectorized matrices, `vec(ABC) = (A ⊗ Cᵀ) vec(B)`. System 1 is
//! decoupled by pulses `V ⊗ 𝟙₂`; system 2 is the bath.

pub mod bounds;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod protocol;
pub mod rng;

pub use bounds::{Bound, BoundInputs};
pub use channel::{ChoiState, QuantumChannel, Subsystem, Superoperator};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, Spectrum, C64};
pub use model::{reference_model, BipartiteModel, PauliDecomposition};
pub use montecarlo::{Ensemble, EstimateReport, Statistic};
pub use protocol::{DecouplingSet, TerminalPulse, TrajectorySample, ZenoVariant};
