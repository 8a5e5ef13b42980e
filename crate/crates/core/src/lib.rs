//! Pulse-level compiler and simulator for NMR quantum information processing
//! with transition-selective pulses.
//!
//! - [`qstate`]: dense complex matrices, state vectors and density matrices.
//! - [`pulse`]: selective rotation pulses, sequences and the pulse-program text format.
//! - [`gates`]: ideal gate matrices (conditional phase, Hadamard, QFT, SWAP, ...).
//! - [`synth`]: lowering of gates to pulse programs, with verification.
//! - [`algorithms`]: Grover search, QFT and pseudo-pure preparation drivers.
//! - [`cli`]: the `nmrqip` command-line front end.

pub mod algorithms;
pub mod angle;
pub mod cli;
pub mod error;
pub mod gates;
pub mod json;
pub mod pulse;
pub mod qstate;
pub mod synth;

pub use error::{Error, Result};
pub use gates::{ConditionPattern, Gate};
pub use pulse::{Axis, Control, PulseSequence, PulseSpec};
pub use qstate::{ComplexMatrix, DensityMatrix, QuantumState, StateVector, C64};
