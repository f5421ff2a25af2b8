//! Benchmarks for the decoupling library live in `benches/`; this crate has
//! no library code of its own beyond shared fixtures.

use zeno_dd_core::protocol::DecouplingSet;
use zeno_dd_core::{reference_model, Ensemble};

/// Reference model, uniform Pauli pulses, both fixed inputs `|0⟩⟨0|`.
pub fn reference_ensemble() -> Ensemble {
    Ensemble::ground(reference_model(), DecouplingSet::pauli())
}
