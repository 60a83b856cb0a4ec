//! Quantum implementations: models, the witness library and psd-rank bounds.

pub mod factor;
pub mod library;
pub mod model;
pub mod psd;

pub use library::{witness_library, LibraryEntry};
pub use model::{verify_model, Complex, Evaluation, QuantumModel, Real};
pub use psd::{
    classical_dim, kernel_rule, psd_bounds, psd_lower, psd_upper, psd_upper_certified, quantum_dim_bounds,
    qubit_screen, scaled_submatrix, scaled_submatrix_bound, trace_saturation_rule, Embedding, NumericWitness,
    PsdBounds,
};
