//! Constant-depth circuits built from parity-restricted phase gates:
//! simulation, gate catalog, constructions and exact analysis.

pub mod analysis;
pub mod bits;
pub mod circuit;
pub mod constructions;
pub mod error;
pub mod fsets;
pub mod gates;
pub mod statevector;

pub use circuit::{Circuit, CircuitBuilder};
pub use error::{Error, Result};
pub use gates::{GateInstance, GateKind};
pub use statevector::{BitPredicate, DenseOperator, StateVector};
