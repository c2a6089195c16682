//! Open-quantum-system toolkit: density matrices, Kraus channels and their
//! Choi matrices, Lindblad evolution, and Monte Carlo dephasing by classical
//! noise.
//!
//! Conventions: ħ = 1; qubit basis index 0 is `|↑⟩` and 1 is `|↓⟩`, so
//! `σz = diag(1, −1)` and `σ₋ = |↓⟩⟨↑|`. For a bipartite space the
//! composite index of `|i⟩_A|j⟩_B` is `i·dim_b + j`.

pub mod channel;
pub mod eigen;
pub mod error;
pub mod io;
pub mod lindblad;
pub mod matrix;
pub mod noise;
pub mod random;
pub mod state;

pub use channel::{ChoiMatrix, KrausChannel};
pub use error::{Error, Result};
pub use lindblad::{evolve, Lindbladian, ModelKind, ModelSpec, Schedule};
pub use matrix::{BipartiteIndex, ComplexMatrix, Subsystem, C64};
pub use noise::{NoiseProcess, TrajectoryConfig, VisibilityCurve};
pub use state::{DensityMatrix, Separability};
