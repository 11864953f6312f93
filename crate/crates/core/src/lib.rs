//! Optimal prediction for underresolved dynamical systems.
//!
//! The crate follows one pipeline on a small Hamiltonian model:
//!
//! * [`model`]: the full vector field, its Hamiltonian and the conditional
//!   expectation closure of the resolved components,
//! * [`sampler`]: exact draws from the canonical measure, unconditional or
//!   conditioned on the resolved variables,
//! * [`integrator`]: fixed-step RK4 on a uniform grid,
//! * [`ensemble`]: the conditional ensemble mean ("truth"),
//! * [`reduced`]: Galerkin and first-order optimal prediction,
//! * [`kernel`]: Monte-Carlo estimation of the equilibrium memory kernel,
//! * [`memory`]: the non-Markovian prediction equation.
//!
//! [`io`] holds the CSV formats shared by the command-line tool.

pub mod ensemble;
pub mod error;
pub mod integrator;
pub mod io;
pub mod kernel;
pub mod memory;
pub mod model;
pub mod quadrature;
pub mod reduced;
pub mod sampler;
pub mod stats;

pub use ensemble::{ensemble_truth, EnsembleStats};
pub use error::{Error, Result};
pub use integrator::{integrate, rk4_step, Trajectory};
pub use kernel::{estimate_k0, frozen_kernel, KernelMeta, KernelTable};
pub use memory::{Forcing, HistoryBuffer, MemoryModel, SignConvention};
pub use model::{CoupledOscillators, Model, ModelParams, PhasePoint, ResolvedPoint};
pub use reduced::{ReducedKind, ReducedSystem};
pub use sampler::{sample_conditional, sample_equilibrium, RngState};

/// Version string recorded in output file headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
