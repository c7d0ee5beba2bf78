//! Dense complex linear algebra, composite spaces and superoperators.
//!
//! Conventions used everywhere in the crate:
//! * subsystem order is charger ⊗ battery, so a joint index is
//!   `charger_index · d + battery_level`;
//! * superoperators act on column-stacked vectors (see [`vectorize`]).

mod density;
mod matrix;
mod sparse;
mod superop;

pub use density::{partial_trace, tensor_product, DensityMatrix, DEFAULT_TOLERANCE};
pub use matrix::{ComplexMatrix, C64, I, ONE, ZERO};
pub use sparse::SparseMatrix;
pub use superop::{
    dissipator_apply, innovation_apply, unvectorize, vectorize, vectorize_generator, Generator,
    GeneratorTerm, Superoperator,
};

pub(crate) use matrix::faer_sequential;
