//! Dense complex linear algebra and elementary state operations.
//!
//! Subsystem convention: dims are listed left to right, which is also the
//! tensor-factor order and the most-significant-first digit order of a
//! flattened row-major index.

mod matrix;
pub mod ops;
pub mod random;
pub mod spectrum;
mod state;

pub use matrix::{kron, kron_all, ComplexMatrix};
pub use ops::{dephase, max_entangled, partial_trace, weyl};
pub use random::haar_unitary;
pub use spectrum::{hermitian_eigenvalues, shannon_entropy, von_neumann_entropy};
pub use state::{DensityMatrix, PureState, Tolerance};

pub(crate) use state::check_subsystems;

pub type C64 = num_complex::Complex64;
