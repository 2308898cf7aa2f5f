//! Dense classical oracles for the universal-computer transfer construction.
//!
//! Each quantum subroutine is replaced by its exact linear-algebra effect:
//! phase estimation plus a controlled rotation becomes a spectral filter,
//! the swap test becomes an absolute overlap and the minimum search becomes
//! an exhaustive argmin.

mod qknn;
mod reference;
mod resources;
mod spectral;

pub use qknn::{fidelity_distance, qknn_predict};
pub use reference::{
    offset_encode, qblas_tf_reference, qpca_directions, QblasConfig, QblasIteration, QblasOutcome, QpcaSelection,
};
pub use resources::{condition_number, resource_report, ComplexityReport, StageCost};
pub use spectral::{default_gamma, denman_beavers, spectral_rebuild, SpectralBuild, SpectralKind};
