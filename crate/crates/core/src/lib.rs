//! Distribution-alignment transfer learning: classical kernel DDA baselines,
//! a dense statevector simulator, a variational cascade classifier and a
//! variational generalized eigensolver, plus classical checks of the
//! spectral constructions behind the fault-tolerant variant.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod data_io;
pub mod error;
pub mod kernel_dda;
pub mod linalg;
pub mod optim;
pub mod qblas_oracle;
pub mod qsim;
pub mod vq_classifier;
pub mod vqtf;

pub use error::{Error, Result};
