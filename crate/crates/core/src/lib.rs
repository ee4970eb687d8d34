//! Numerical toolkit for one-shot quantum capacity quantities.
//!
//! The crate is organised bottom-up:
//!
//! * [`qmat`]: dense complex matrices, pure and mixed states, partial traces,
//!   Hermitian spectra and entropies, Weyl operators and Haar sampling.
//! * [`channels`]: Kraus-operator channels, flagged mixtures, the erasure and
//!   rocket channels, and the helper isometries used for environment-assisted
//!   communication.
//! * [`infomeasures`]: coherent information, mutual information, Holevo χ and
//!   private information.
//! * [`experiments`]: end-to-end checks of the two non-convexity constructions
//!   (private capacity, environment-assisted classical capacity), the region
//!   scan and the non-convexity functional.
//!
//! Data-parallel loops go through [`Exec`]; with the `parallel` feature
//! (default) they run on rayon, otherwise every loop is sequential.

pub mod channels;
pub mod error;
pub mod experiments;
pub mod infomeasures;
pub mod par;
pub mod qmat;

pub use error::{QcapError, Result};
pub use par::Exec;
pub use qmat::{ComplexMatrix, DensityMatrix, PureState, Tolerance, C64};
