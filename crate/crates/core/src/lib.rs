//! Thermodynamic formalism on subshifts of finite type.
//!
//! Pressure and unique equilibrium states of locally constant potentials,
//! maximizing measures and zero-temperature diagnostics, and solvers that
//! walk the ray `t -> psi + t phi` to realize prescribed entropies and
//! pressures by equilibrium states.
//!
//! ```
//! use thermoform::{potentials::fixed_point_potential, paths, sft::Sft};
//!
//! let sft = Sft::full_shift(2).unwrap();
//! let phi = fixed_point_potential(&sft, 0).unwrap();
//! let report = paths::solve_intermediate_entropy(&sft, &phi, 0.3).unwrap();
//! assert!(report.residual <= 1e-8);
//! ```

pub mod cli;
pub mod config;
mod edges;
pub mod ergopt;
pub mod error;
pub mod paths;
pub mod potentials;
pub mod sft;
pub mod spectral;
pub mod transfer;

pub use error::{Error, ErrorKind, Result};
