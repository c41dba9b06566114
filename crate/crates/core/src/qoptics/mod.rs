//! Quantum-optical side: harmonic-mode displacements, conditioned field
//! states, and their Wigner function, fidelities and linear entropy.

mod displacement;
pub mod fock;
mod state;
mod wigner;

pub use displacement::{
    aggregate_displacement, mode_displacement, Component, DisplacementAccumulator, DisplacementMeta, KDisplacement,
    ModeDisplacements,
};
pub use state::{
    coherent_overlap, condition_full, condition_ir, fidelity, linear_entropy, Branch, ConditionedState, Reference,
    ReducedState, StateError,
};
pub use wigner::{wigner, wigner_reduced, wigner_value, WignerGrid, WignerMap, DEFAULT_PADDING, SUPPORT_MARGIN};
