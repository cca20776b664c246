//! Simulator and fluid-limit solver for community bail fund balance
//! processes.
//!
//! The crate is organised bottom-up:
//!
//! * [`dist`] and [`params`]: distributions, the truncated mean `H`, model
//!   parameters and presets;
//! * [`path`]: càdlàg step paths and the Skorokhod reflection map;
//! * [`stream`] and [`simulate`]: seeded primitives and the exact event loop
//!   for all eight model variants;
//! * [`fluid`]: closed-form, reflected and Volterra fluid limits;
//! * [`analysis`]: Monte Carlo harnesses (convergence, ordering, compensators,
//!   moments), parallel over replications via [`exec`].

pub mod analysis;
pub mod dist;
pub mod error;
pub mod exec;
pub mod fluid;
pub mod numfmt;
pub mod params;
pub mod path;
pub mod quad;
pub mod simulate;
pub mod stream;

pub use dist::DistSpec;
pub use error::{Error, Result};
pub use exec::Execution;
pub use fluid::{FluidCurve, FluidModel};
pub use params::{ModelParams, ScalingSpec};
pub use path::{CadlagPath, EventKind, PathEvent};
pub use simulate::{simulate, simulate_coupled, ModelKind, SimulationResult};
pub use stream::{generate_stream, EventStream};
