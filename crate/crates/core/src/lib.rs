//! Wavepacket propagation on a uniform 1D grid with de Broglie-Bohm
//! trajectory analysis (atomic units, `hbar = m = 1`).
//!
//! The pipeline is: build a [`Grid`] and a Gaussian packet, propagate it
//! through a [`PotentialSpec`] with [`propagate`], decompose snapshots into
//! amplitude and phase, derive the quantum potential and velocity field, and
//! integrate trajectories. [`simulate`] and [`run`] wire everything together
//! from a [`RunConfig`].

pub mod analysis;
pub mod bohmian;
pub mod config;
pub mod error;
pub mod field;
pub mod grid;
pub mod output;
pub mod potential;
pub mod propagator;
pub mod simulation;
pub mod stencil;

pub use analysis::{Diagnostics, Moments, ScatteringReport};
pub use bohmian::{FieldDerived, QuantumPotentialStencil, TrajectoryEnsemble};
pub use config::{load_config, RunConfig, Scenario};
pub use error::{Error, Result};
pub use field::{gaussian_packet, polar_decompose, ComplexField, GaussianParams, PolarField};
pub use grid::Grid;
pub use output::{run, RunSummary};
pub use potential::PotentialSpec;
pub use propagator::{propagate, Laplacian, PropagationSchedule, Scheme, SnapshotSet};
pub use simulation::{simulate, Simulation};
