// SPDX-License-Identifier: Apache-2.0
//! CNF encoding, oracle-guided attacks and key verification.

mod attack;
pub mod encode;
pub mod solver;
mod verify;

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camo::{CamoError, Key};
use crate::oracle::OracleError;

pub use attack::{build_miter, double_dip_attack, run_attack, sat_attack};
pub use solver::{Cadical, ClauseSink, Cnf, Lit, SatSolver, SolveResult};
pub use verify::{equivalent, verify_key, EXHAUSTIVE_LIMIT};

/// Matches the 48-hour limit of the reference runtime study.
pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(172_800);
/// Variables beyond this count are treated as solver resource exhaustion.
pub const DEFAULT_MAX_VARS: usize = 134_217_724;

#[derive(Debug, Error, PartialEq)]
pub enum AttackError {
    #[error("oracle has {oracle_in} inputs / {oracle_out} outputs, locked netlist has {locked_in} / {locked_out}")]
    Interface {
        oracle_in: usize,
        oracle_out: usize,
        locked_in: usize,
        locked_out: usize,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Camo(#[from] CamoError),
    #[error("reference has {got} inputs/outputs, locked netlist has {expected}")]
    ReferenceMismatch { expected: String, got: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackStatus {
    KeyRecovered,
    Timeout,
    Inconsistent,
    SolverFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equivalent,
    Inequivalent,
    Unchecked,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AttackVariant {
    #[default]
    SingleDip,
    DoubleDip,
}

macro_rules! kebab_display {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let s = serde_json::to_value(self).expect("unit enum");
                f.write_str(s.as_str().expect("unit enum"))
            }
        }
    )*};
}
kebab_display!(AttackStatus, Verdict, AttackVariant);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limits {
    pub time_budget: Duration,
    pub dip_budget: Option<usize>,
    pub max_vars: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            time_budget: DEFAULT_TIME_BUDGET,
            dip_budget: None,
            max_vars: DEFAULT_MAX_VARS,
        }
    }
}

impl Limits {
    pub fn with_time(seconds: f64) -> Limits {
        Limits {
            time_budget: Duration::from_secs_f64(seconds),
            ..Limits::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub status: AttackStatus,
    pub key: Option<Key>,
    pub dips: usize,
    pub seconds: f64,
    pub verified: Verdict,
    pub variant: AttackVariant,
    /// Of the DIPs, how many came from the two-pair search.
    pub double_dips: usize,
    pub solver: String,
    pub vars: usize,
    pub clauses: usize,
}
