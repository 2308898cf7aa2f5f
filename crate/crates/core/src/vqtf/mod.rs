//! Variational generalized eigensolver and the transfer loop built on it.

mod hamiltonian;
mod pipeline;
mod solver;

pub use hamiltonian::{build_hamiltonians, embed_pair, HamiltonianPair};
pub use pipeline::{
    diagnostics, diagnostics_jsonl, vqtf_fit_predict, vqtf_fit_predict_observed, DiagnosticRecord, Predictor,
    VqtfConfig, VqtfIteration, VqtfOutcome,
};
pub use solver::{
    eigenstate_loss, solve_eigenstates, solve_eigenstates_from, DeflationMode, DeflationSet, EigenSolution,
    EigenSolverConfig, LevelReport,
};
