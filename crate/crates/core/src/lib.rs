//! Desk-scale simulator and solver for single-laser-pulse trapped-ion
//! quantum logic.
//!
//! The crate computes Fock-state-dependent Rabi frequencies from Laguerre
//! closed forms, solves for "magic" Lamb-Dicke parameters at which one
//! carrier pulse realizes a reduced controlled-NOT between an ion's motional
//! and internal qubits, composes the three-pulse general two-ion CN, and
//! verifies the gates against their truth tables and target unitaries with
//! both exact rotating-wave propagators and a brute-force time-dependent
//! integrator.

pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod expm;
pub mod magic;
pub mod schema;
pub mod sequence;
pub mod specfun;

pub use coupling::CouplingContext;
pub use dynamics::{JointSpace, Propagator, Pulse, StateVector};
pub use error::{Error, Result};
pub use magic::MagicEntry;
pub use sequence::Schedule;
