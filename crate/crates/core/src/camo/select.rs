// SPDX-License-Identifier: Apache-2.0
//! Seeded, replayable choice of which gates to protect.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CamoError;
use crate::netlist::{Circuit, GateKind};

/// Identifier of the sampling procedure: `ChaCha8Rng::seed_from_u64(seed)`
/// (rand_chacha 0.9) drives a partial Fisher-Yates shuffle over the eligible
/// ids in ascending order, swapping position `i` with `i + next_u64() % (n - i)`.
/// The chosen ids are reported sorted.
pub const SELECTION_ALGORITHM: &str = "chacha8-seed_from_u64/fisher-yates-mod/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub benchmark: String,
    pub seed: u64,
    pub fraction: f64,
    pub algorithm: String,
    pub gate_ids: Vec<usize>,
}

impl SelectionRecord {
    /// Record for an externally chosen gate set (e.g. timing-driven).
    pub fn from_gates(circuit: &Circuit, mut gate_ids: Vec<usize>, algorithm: &str) -> SelectionRecord {
        gate_ids.sort_unstable();
        gate_ids.dedup();
        let eligible = eligible_gates(circuit).len().max(1);
        SelectionRecord {
            benchmark: circuit.name().to_string(),
            seed: 0,
            fraction: gate_ids.len() as f64 / eligible as f64,
            algorithm: algorithm.to_string(),
            gate_ids,
        }
    }

    /// Short digest of the gate ids, for auditing that several runs protect
    /// the same gates.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for id in &self.gate_ids {
            h.update((*id as u64).to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Combinational gates of arity at most two, excluding constants.
pub fn eligible_gates(circuit: &Circuit) -> Vec<usize> {
    circuit
        .gates()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.kind.is_combinational() && !matches!(g.kind, GateKind::Const0 | GateKind::Const1))
        .map(|(id, _)| id)
        .collect()
}

pub fn select_gates(circuit: &Circuit, fraction: f64, seed: u64) -> Result<SelectionRecord, CamoError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CamoError::FractionOutOfRange(fraction));
    }
    if !circuit.is_combinational() {
        return Err(CamoError::Sequential);
    }
    let mut pool = eligible_gates(circuit);
    if pool.is_empty() {
        return Err(CamoError::NoEligibleGates);
    }
    let n = pool.len();
    let count = ((fraction * n as f64).round() as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let j = i + (rng.next_u64() % (n - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut gate_ids = pool[..count].to_vec();
    gate_ids.sort_unstable();
    Ok(SelectionRecord {
        benchmark: circuit.name().to_string(),
        seed,
        fraction,
        algorithm: SELECTION_ALGORITHM.to_string(),
        gate_ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::random::{random_circuit, RandomSpec};

    fn circuit() -> Circuit {
        random_circuit(&mut ChaCha8Rng::seed_from_u64(1), &RandomSpec::new(6, 3, 50), "sel")
    }

    #[test]
    fn full_fraction_selects_everything() {
        let c = circuit();
        let r = select_gates(&c, 1.0, 3).unwrap();
        assert_eq!(r.gate_ids, eligible_gates(&c));
    }

    #[test]
    fn deterministic() {
        let c = circuit();
        assert_eq!(select_gates(&c, 0.1, 42).unwrap(), select_gates(&c, 0.1, 42).unwrap());
        assert_ne!(
            select_gates(&c, 0.5, 1).unwrap().gate_ids,
            select_gates(&c, 0.5, 2).unwrap().gate_ids
        );
    }

    #[test]
    fn count_is_rounded_fraction() {
        let c = circuit();
        let n = eligible_gates(&c).len();
        for f in [0.05, 0.1, 0.33, 0.5] {
            let r = select_gates(&c, f, 7).unwrap();
            assert_eq!(r.gate_ids.len(), (f * n as f64).round() as usize);
        }
    }

    #[test]
    fn fraction_range() {
        let c = circuit();
        assert!(matches!(select_gates(&c, 0.0, 1), Err(CamoError::FractionOutOfRange(_))));
        assert!(matches!(select_gates(&c, 1.5, 1), Err(CamoError::FractionOutOfRange(_))));
        assert!(matches!(select_gates(&c, f64::NAN, 1), Err(CamoError::FractionOutOfRange(_))));
    }

    #[test]
    fn no_eligible_gates() {
        let c = crate::netlist::parse_bench("INPUT(a)\nOUTPUT(y)\nOUTPUT(a)\ny = CONST1()\n", "k").unwrap();
        assert_eq!(select_gates(&c, 0.5, 1).unwrap_err(), CamoError::NoEligibleGates);
    }

    #[test]
    fn json_round_trip_preserves_record() {
        let r = select_gates(&circuit(), 0.3, 11).unwrap();
        let back: SelectionRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
