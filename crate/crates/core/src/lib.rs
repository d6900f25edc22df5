//! Connection matrices of combinatorial multivector fields on simplicial
//! complexes, computed over GF(2) by a sparse column/row reduction of the
//! filtered boundary matrix.
//!
//! The usual entry point is [`compute_connection_matrix`]; [`oracle`] holds
//! slow, independent checks of its output.

pub mod admissible;
pub mod connection;
pub mod format;
pub mod generate;
pub mod gf2;
pub mod morse;
pub mod mvfield;
pub mod oracle;
pub mod par;
pub mod pipeline;
pub mod simplicial;
pub mod sweep;

pub use admissible::{AdmissibleBasis, FilteredBoundaryMatrix, IntraOrder, TieBreak};
pub use connection::{ConnectionMatrix, ReduceOptions, ReductionState};
pub use gf2::{DenseGF2Matrix, SparseGF2Matrix};
pub use morse::MorseDecomposition;
pub use mvfield::MultivectorField;
pub use par::Execution;
pub use pipeline::{compute_connection_matrix, PipelineError, PipelineOptions, PipelineOutput};
pub use simplicial::{Simplex, SimplicialComplex};
