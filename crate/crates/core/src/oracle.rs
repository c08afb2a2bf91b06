// SPDX-License-Identifier: Apache-2.0
//! Black-box chips answering input/output queries.
//!
//! A [`ChipOracle`] evaluates its reference circuit gate by gate. Gates listed
//! in the accuracy map invert their output with probability `1 - p` on every
//! query; each such gate draws from its own ChaCha stream (stream index = gate
//! id) so the noise on one gate does not depend on which others are noisy.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::Circuit;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("query has {got} bits, oracle expects {expected}")]
    Width { expected: usize, got: usize },
    #[error("accuracy {p} for gate {gate} outside (0, 1]")]
    Accuracy { gate: usize, p: f64 },
    #[error("gate {0} does not exist in the reference circuit")]
    UnknownGate(usize),
    #[error("reference circuit contains flip-flops")]
    Sequential,
}

/// Anything an attack can query.
pub trait Oracle {
    fn input_width(&self) -> usize;
    fn output_width(&self) -> usize;
    fn query(&mut self, input: &[bool]) -> Result<Vec<bool>, OracleError>;
    /// Number of queries served so far.
    fn queries(&self) -> usize;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    Deterministic,
    Stochastic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub index: usize,
    #[serde(with = "bitstring")]
    pub input: Vec<bool>,
    #[serde(with = "bitstring")]
    pub output: Vec<bool>,
}

mod bitstring {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        let text: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        s.serialize_str(&text)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let text = String::deserialize(d)?;
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(serde::de::Error::custom(format!("bad bit `{c}`"))),
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ChipOracle {
    reference: Circuit,
    accuracy: BTreeMap<usize, f64>,
    seed: u64,
    streams: HashMap<usize, ChaCha8Rng>,
    log: Vec<QueryRecord>,
}

impl ChipOracle {
    pub fn deterministic(reference: Circuit) -> Result<ChipOracle, OracleError> {
        ChipOracle::stochastic(reference, BTreeMap::new(), 0)
    }

    pub fn stochastic(reference: Circuit, accuracy: BTreeMap<usize, f64>, seed: u64) -> Result<ChipOracle, OracleError> {
        if !reference.is_combinational() {
            return Err(OracleError::Sequential);
        }
        for (&gate, &p) in &accuracy {
            if gate >= reference.gates().len() {
                return Err(OracleError::UnknownGate(gate));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(OracleError::Accuracy { gate, p });
            }
        }
        // Entries with p = 1 never flip; drop them so the mode is exact.
        let accuracy = accuracy.into_iter().filter(|&(_, p)| p < 1.0).collect();
        Ok(ChipOracle {
            reference,
            accuracy,
            seed,
            streams: HashMap::new(),
            log: Vec::new(),
        })
    }

    /// One global accuracy on the given gates (typically the camouflaged ones).
    pub fn uniform(reference: Circuit, gates: &[usize], p: f64, seed: u64) -> Result<ChipOracle, OracleError> {
        let map = gates.iter().map(|&g| (g, p)).collect();
        ChipOracle::stochastic(reference, map, seed)
    }

    pub fn mode(&self) -> OracleMode {
        if self.accuracy.is_empty() {
            OracleMode::Deterministic
        } else {
            OracleMode::Stochastic
        }
    }

    pub fn reference(&self) -> &Circuit {
        &self.reference
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn accuracy(&self, gate: usize) -> f64 {
        self.accuracy.get(&gate).copied().unwrap_or(1.0)
    }

    pub fn replay(&self) -> &[QueryRecord] {
        &self.log
    }

    pub fn export_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.log {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    fn flip(&mut self, gate: usize) -> bool {
        let Some(&p) = self.accuracy.get(&gate) else {
            return false;
        };
        let seed = self.seed;
        let rng = self.streams.entry(gate).or_insert_with(|| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(gate as u64);
            r
        });
        rng.random::<f64>() >= p
    }

    fn evaluate_noisy(&mut self, input: &[bool]) -> Vec<bool> {
        let mut values = vec![false; self.reference.num_nets()];
        for (n, &v) in self.reference.inputs().iter().zip(input) {
            values[n.index()] = v;
        }
        for i in 0..self.reference.topo_order().len() {
            let id = self.reference.topo_order()[i];
            let g = self.reference.gate(id);
            let a = g.fanin.first().is_some_and(|n| values[n.index()]);
            let b = g.fanin.get(1).is_some_and(|n| values[n.index()]);
            let out = g.output.index();
            let v = g.kind.eval(a, b);
            values[out] = v ^ self.flip(id);
        }
        self.reference.outputs().iter().map(|n| values[n.index()]).collect()
    }
}

impl Oracle for ChipOracle {
    fn input_width(&self) -> usize {
        self.reference.inputs().len()
    }

    fn output_width(&self) -> usize {
        self.reference.outputs().len()
    }

    fn query(&mut self, input: &[bool]) -> Result<Vec<bool>, OracleError> {
        if input.len() != self.input_width() {
            return Err(OracleError::Width {
                expected: self.input_width(),
                got: input.len(),
            });
        }
        let output = if self.accuracy.is_empty() {
            self.reference.evaluate(input).expect("width checked")
        } else {
            self.evaluate_noisy(input)
        };
        self.log.push(QueryRecord {
            index: self.log.len(),
            input: input.to_vec(),
            output: output.clone(),
        });
        Ok(output)
    }

    fn queries(&self) -> usize {
        self.log.len()
    }
}

/// Fraction of uniformly random patterns on which a fresh stochastic oracle
/// answers exactly like its reference.
pub fn pattern_accuracy(
    reference: &Circuit,
    accuracy: &BTreeMap<usize, f64>,
    seed: u64,
    samples: usize,
) -> Result<f64, OracleError> {
    let mut oracle = ChipOracle::stochastic(reference.clone(), accuracy.clone(), seed)?;
    let mut inputs = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = reference.inputs().len();
    let mut correct = 0usize;
    for _ in 0..samples {
        let x: Vec<bool> = (0..n).map(|_| inputs.next_u32() & 1 == 1).collect();
        let got = oracle.evaluate_noisy(&x);
        if got == reference.evaluate(&x).expect("width checked") {
            correct += 1;
        }
    }
    Ok(correct as f64 / samples.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_bench, random::{random_circuit, RandomSpec}};

    fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
        (0..n).map(|_| rng.next_u32() & 1 == 1).collect()
    }

    #[test]
    fn unit_accuracy_equals_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_circuit(&mut rng, &RandomSpec::new(12, 5, 60), "r");
        let all: Vec<usize> = (0..c.gates().len()).collect();
        let mut o = ChipOracle::uniform(c.clone(), &all, 1.0, 9).unwrap();
        assert_eq!(o.mode(), OracleMode::Deterministic);
        for _ in 0..1000 {
            let x = random_bits(&mut rng, 12);
            assert_eq!(o.query(&x).unwrap(), c.evaluate(&x).unwrap());
        }
        assert_eq!(o.replay().len(), 1000);
    }

    #[test]
    fn single_gate_flip_rate() {
        let c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = NAND(a, b)", "g").unwrap();
        let mut o = ChipOracle::uniform(c, &[0], 0.95, 1).unwrap();
        let n = 100_000;
        let correct = (0..n).filter(|_| o.query(&[true, false]).unwrap() == vec![true]).count();
        let rate = correct as f64 / n as f64;
        assert!((rate - 0.95).abs() <= 0.005, "rate {rate}");
    }

    #[test]
    fn cascaded_inverters_cancel_errors() {
        let c = parse_bench("INPUT(a)\nOUTPUT(y)\nm = NOT(a)\ny = NOT(m)", "inv2").unwrap();
        let mut o = ChipOracle::uniform(c, &[0, 1], 0.9, 2).unwrap();
        let n = 100_000;
        let correct = (0..n).filter(|_| o.query(&[true]).unwrap() == vec![true]).count();
        let rate = correct as f64 / n as f64;
        assert!((rate - (0.81 + 0.01)).abs() <= 0.01, "rate {rate}");
    }

    #[test]
    fn seed_determinism_and_stream_isolation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = random_circuit(&mut rng, &RandomSpec::new(8, 4, 40), "r");
        let queries: Vec<Vec<bool>> = (0..200).map(|_| random_bits(&mut rng, 8)).collect();
        let run = |gates: &[usize]| {
            let mut o = ChipOracle::uniform(c.clone(), gates, 0.8, 77).unwrap();
            for q in &queries {
                o.query(q).unwrap();
            }
            o.replay().to_vec()
        };
        assert_eq!(run(&[1, 5, 9]), run(&[1, 5, 9]));
        let mut a = ChipOracle::uniform(c.clone(), &[3], 0.5, 4).unwrap();
        let mut b = ChipOracle::uniform(c.clone(), &[3, 7], 0.5, 4).unwrap();
        let fa: Vec<bool> = (0..64).map(|_| a.flip(3)).collect();
        let fb: Vec<bool> = (0..64).map(|_| b.flip(3)).collect();
        assert_eq!(fa, fb);
    }

    #[test]
    fn fresh_log_is_empty_and_width_checked() {
        let c = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)", "i").unwrap();
        let mut o = ChipOracle::deterministic(c).unwrap();
        assert!(o.replay().is_empty());
        assert_eq!(
            o.query(&[true, false]),
            Err(OracleError::Width { expected: 1, got: 2 })
        );
        assert!(o.replay().is_empty());
    }

    #[test]
    fn rejects_bad_accuracy() {
        let c = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)", "i").unwrap();
        assert!(matches!(
            ChipOracle::uniform(c.clone(), &[0], 0.0, 0),
            Err(OracleError::Accuracy { .. })
        ));
        assert_eq!(
            ChipOracle::uniform(c, &[4], 0.9, 0).unwrap_err(),
            OracleError::UnknownGate(4)
        );
    }

    #[test]
    fn jsonl_export_round_trips() {
        let c = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = XOR(a, b)", "x").unwrap();
        let mut o = ChipOracle::deterministic(c).unwrap();
        o.query(&[true, false]).unwrap();
        o.query(&[true, true]).unwrap();
        let mut buf = Vec::new();
        o.export_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"index":0,"input":"10","output":"1"}"#);
        let back: QueryRecord = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(back, o.replay()[1]);
    }

    #[test]
    fn pattern_accuracy_of_exact_chip_is_one() {
        let c = parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)", "i").unwrap();
        assert_eq!(pattern_accuracy(&c, &BTreeMap::new(), 0, 100).unwrap(), 1.0);
    }
}
