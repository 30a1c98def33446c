//! Numerical simulator for interacting driven-dissipative bosonic systems.
//!
//! The crate is organized bottom-up:
//!
//! - [`fock`]: truncated Fock spaces and sparse bosonic operators.
//! - [`lindblad`]: vectorized Lindblad generators, steady states, time
//!   evolution and Heisenberg-picture moment derivatives.
//! - [`dimer`]: the gain/loss dimer with density-dependent hopping, at the
//!   exact, mean-field, semiclassical and Langevin levels, plus the
//!   gain-saturation comparison model.
//! - [`ssh`]: the driven-dissipative SSH chain with Kerr interactions: edge
//!   modes, chiral dissipator identities, limit cycles, self-consistent mean
//!   field and edge-mode Fock-state stabilization.

pub mod dimer;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod ode;
pub mod sparse;
pub mod ssh;
pub mod stats;

pub use error::{Error, Result};
pub use fock::{annihilation, compose, creation, number, product, FockSpace, SparseOperator};
pub use lindblad::{
    build_liouvillian, evolve, expectation, moment_rhs, steady_state, DensityMatrix, Liouvillian,
    SteadyStateOptions,
};
pub use num_complex::Complex64 as C64;
