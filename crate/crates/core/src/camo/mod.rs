// SPDX-License-Identifier: Apache-2.0
//! Camouflaging: gate selection, function sets and keyed netlists.
//!
//! A camouflaged gate becomes a keyed cell whose key code indexes the
//! function set's ordered member list (`ceil(log2 k)` bits, little-endian
//! within the cell's span). Codes past the end of the list are invalid; the
//! SAT encoding excludes them explicitly so simulation and CNF agree.

mod function;
mod key;
mod lock;
mod select;

use thiserror::Error;

use crate::netlist::GateKind;

pub use function::{key_width, ArityClass, FunctionSet, TruthTable};
pub use key::Key;
pub use lock::{camouflage, placement_for, Camouflaged, KeyCell, LockedCircuit, LockedGate, LockedOp, Placement};
pub use select::{eligible_gates, select_gates, SelectionRecord, SELECTION_ALGORITHM};

#[derive(Debug, Error, PartialEq)]
pub enum CamoError {
    #[error("fraction {0} outside (0, 1]")]
    FractionOutOfRange(f64),
    #[error("circuit has no gates eligible for camouflaging")]
    NoEligibleGates,
    #[error("circuit contains flip-flops; strip them first")]
    Sequential,
    #[error("gate {0} is not eligible for camouflaging")]
    IneligibleGate(usize),
    #[error("gate {gate} ({kind}) cannot be protected by function set `{set}`")]
    Incompatible { gate: usize, kind: GateKind, set: String },
    #[error("unknown function-set preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid function set: {0}")]
    InvalidFunctionSet(String),
    #[error("key has {got} bits, expected {expected}")]
    KeyLength { expected: usize, got: usize },
    #[error("key code {code} is not a valid member index for gate {gate}")]
    InvalidKeyCode { gate: usize, code: usize },
    #[error("input has {got} bits, expected {expected}")]
    InputWidth { expected: usize, got: usize },
    #[error("malformed key string `{0}`")]
    BadKeyString(String),
    #[error("malformed locked netlist: {0}")]
    MalformedLocked(String),
}
