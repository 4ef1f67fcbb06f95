//! Entanglement dynamics of bipartite quantum states under local open-system
//! evolution.
//!
//! A pure two-qubit state `|chi>` whose second half passes through a channel
//! `L` ends up with concurrence `C(chi) * C[(I (x) L)|phi+><phi+|]`: the
//! channel's effect is captured by a single number, the concurrence of its
//! Choi state. This crate computes the measures involved, simulates Kraus
//! channels, and checks the factorization law and its upper-bound variants
//! (mixed states, two-sided noise, G-concurrence in `d x d`) numerically.
//!
//! Modules, bottom-up:
//! - [`linalg`]: dense complex matrices and a Jacobi Hermitian eigensolver.
//! - [`quantum`]: states, Kraus channels, Choi states, filters.
//! - [`measures`]: concurrence, Wootters' formula, G-concurrence, PPT test.
//! - [`evolution`]: benchmark factors, factorization law and bounds.
//! - [`montecarlo`]: Haar sampling, noise sweeps, histograms, summaries.
//! - [`io`]: JSON state and channel files.

pub mod error;
pub mod evolution;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod montecarlo;
pub mod quantum;

pub use error::{Error, Result};
pub use evolution::{EvolutionReport, GConcurrenceReport};
pub use io::StateSpec;
pub use linalg::{Complex, ComplexMatrix, Side};
pub use measures::{Concurrence, GConcurrence};
pub use montecarlo::{ExperimentConfig, Histogram, SampleRecord};
pub use quantum::{DensityMatrix, FilterOperation, PureState, QuantumChannel};
