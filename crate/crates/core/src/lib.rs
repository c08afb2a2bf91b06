// SPDX-License-Identifier: Apache-2.0
//! Camouflaging workbench for polymorphic GSHE primitives.
//!
//! - [`netlist`]: BENCH netlists, evaluation, flip-flop stripping.
//! - [`camo`]: gate selection, function sets, keyed netlists.
//! - [`sat`]: CNF encoding, DIP-based and Double-DIP attacks, key verification.
//! - [`oracle`]: deterministic and stochastic black-box chips.
//! - [`device`]: GSHE switch power, energy, delay sampling, minority logic.
//! - [`timing`]: static timing and delay-aware hybrid replacement.
//! - [`campaign`]: experiment matrices with CSV output.

pub mod camo;
pub mod campaign;
pub mod device;
pub mod netlist;
pub mod oracle;
pub mod sat;
pub mod timing;
