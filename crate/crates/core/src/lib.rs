//! Driven, coupled, dissipative qubits: Lindblad dynamics, steady states and
//! the negativity of their entanglement.
//!
//! Basis ordering is `{↑↑, ↑↓, ↓↑, ↓↓}` for two qubits (qubit 0 is the most
//! significant bit, `↑` is bit value 0). Time is measured in units of `1/Ω`
//! for the reference drive `Ω = 1`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod steady;

pub use dynamics::{evolve, InitialState, Route, Trajectory};
pub use entanglement::{negativity, two_qubit_negativity, NegativityScale};
pub use error::{Error, Result};
pub use linalg::{DensityMatrix, Tolerances};
pub use model::{build_liouvillian, Liouvillian, Parameter, SystemParams};
pub use steady::{steady_state, SteadyStateResult};
