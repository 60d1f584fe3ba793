//! Learning graph topology from smooth graph signals, with support for
//! partially observed node sets and numerical verification of the
//! associated sampling and stability bounds.

pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod laplacian;
pub mod observe;
pub mod signal;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
pub use eval::{mix_seed, run_trial, GraphSpec, TrialConfig, TrialResult};
pub use graph::Graph;
pub use laplacian::{build_laplacian, eigendecompose, LaplacianMatrix, Spectrum};
pub use observe::ObservationMask;
pub use signal::{GraphFilter, SignalMatrix};
pub use solver::{solve_gl_sigrep, SolveResult, SolverConfig};
