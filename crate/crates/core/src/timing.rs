// SPDX-License-Identifier: Apache-2.0
//! Static timing and slack-driven hybrid CMOS/GSHE replacement.
//!
//! Delays are held as integer femtoseconds so the no-overhead check after
//! replacement is an exact comparison.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camo::{eligible_gates, SelectionRecord};
use crate::netlist::{Circuit, Driver, GateKind};

pub const HYBRID_ALGORITHM: &str = "greedy-max-slack/recompute/v1";

#[derive(Debug, Error, PartialEq)]
pub enum TimingError {
    #[error("circuit contains flip-flops; strip them first")]
    Sequential,
    #[error("delay for {0} must be positive")]
    NonPositiveDelay(String),
    #[error("target fraction {0} outside (0, 1]")]
    Fraction(f64),
}

/// Gate delays in seconds, as read from and written to JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelayModel {
    pub cmos_default: f64,
    pub cmos: BTreeMap<GateKind, f64>,
    pub gshe: f64,
}

impl Default for DelayModel {
    fn default() -> Self {
        DelayModel {
            cmos_default: 0.02e-9,
            cmos: BTreeMap::new(),
            gshe: 1.55e-9,
        }
    }
}

fn to_fs(seconds: f64) -> u64 {
    (seconds * 1e15).round() as u64
}

impl DelayModel {
    pub fn validate(&self) -> Result<(), TimingError> {
        let all = std::iter::once(("default".to_string(), self.cmos_default))
            .chain(std::iter::once(("gshe".to_string(), self.gshe)))
            .chain(self.cmos.iter().map(|(k, &v)| (k.to_string(), v)));
        for (name, v) in all {
            if !(v.is_finite() && to_fs(v) > 0) {
                return Err(TimingError::NonPositiveDelay(name));
            }
        }
        Ok(())
    }

    pub fn cmos_fs(&self, kind: GateKind) -> u64 {
        to_fs(*self.cmos.get(&kind).unwrap_or(&self.cmos_default))
    }

    pub fn gshe_fs(&self) -> u64 {
        to_fs(self.gshe)
    }

    /// Every CMOS delay multiplied by `k`.
    pub fn scaled_cmos(&self, k: f64) -> DelayModel {
        DelayModel {
            cmos_default: self.cmos_default * k,
            cmos: self.cmos.iter().map(|(&g, &v)| (g, v * k)).collect(),
            gshe: self.gshe,
        }
    }
}

/// Per-gate timing, indexed by gate id, in femtoseconds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingReport {
    pub delay_fs: Vec<u64>,
    pub arrival_fs: Vec<u64>,
    pub required_fs: Vec<u64>,
    pub slack_fs: Vec<u64>,
    pub critical_fs: u64,
    /// Gate ids from an input to an output.
    pub critical_path: Vec<usize>,
}

impl TimingReport {
    pub fn critical_seconds(&self) -> f64 {
        self.critical_fs as f64 * 1e-15
    }
}

pub fn analyze(circuit: &Circuit, model: &DelayModel) -> Result<TimingReport, TimingError> {
    analyze_with(circuit, model, &[])
}

/// As [`analyze`], with the listed gates given the GSHE delay.
pub fn analyze_with(circuit: &Circuit, model: &DelayModel, gshe: &[usize]) -> Result<TimingReport, TimingError> {
    if !circuit.is_combinational() {
        return Err(TimingError::Sequential);
    }
    model.validate()?;
    let n = circuit.gates().len();
    let mut delay: Vec<u64> = circuit.gates().iter().map(|g| model.cmos_fs(g.kind)).collect();
    for &g in gshe {
        delay[g] = model.gshe_fs();
    }
    let net_arrival = |arrival: &[u64], net| match circuit.driver(net) {
        Driver::Gate(g) => arrival[g],
        _ => 0,
    };
    let mut arrival = vec![0u64; n];
    for &id in circuit.topo_order() {
        let g = circuit.gate(id);
        let start = g.fanin.iter().map(|&f| net_arrival(&arrival, f)).max().unwrap_or(0);
        arrival[id] = start + delay[id];
    }
    let critical = circuit
        .outputs()
        .iter()
        .map(|&o| net_arrival(&arrival, o))
        .max()
        .unwrap_or(0);

    let fanouts = circuit.fanouts();
    let mut is_po = vec![false; n];
    for &o in circuit.outputs() {
        if let Driver::Gate(g) = circuit.driver(o) {
            is_po[g] = true;
        }
    }
    let mut required = vec![critical; n];
    for &id in circuit.topo_order().iter().rev() {
        let mut r = critical;
        for &f in &fanouts[circuit.gate(id).output.index()] {
            r = r.min(required[f] - delay[f]);
        }
        if is_po[id] {
            r = r.min(critical);
        }
        required[id] = r;
    }
    let slack: Vec<u64> = (0..n).map(|i| required[i] - arrival[i]).collect();

    let mut path = Vec::new();
    let end = circuit
        .outputs()
        .iter()
        .filter_map(|&o| match circuit.driver(o) {
            Driver::Gate(g) if arrival[g] == critical => Some(g),
            _ => None,
        })
        .min();
    let mut cur = end;
    while let Some(g) = cur {
        path.push(g);
        let want = arrival[g] - delay[g];
        cur = circuit
            .gate(g)
            .fanin
            .iter()
            .filter_map(|&f| match circuit.driver(f) {
                Driver::Gate(p) if arrival[p] == want && want > 0 => Some(p),
                _ => None,
            })
            .min();
    }
    path.reverse();
    Ok(TimingReport {
        delay_fs: delay,
        arrival_fs: arrival,
        required_fs: required,
        slack_fs: slack,
        critical_fs: critical,
        critical_path: path,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplacePolicy {
    pub max_count: Option<usize>,
    /// Stop once `round(fraction × eligible)` gates are replaced.
    pub target_fraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridResult {
    pub selection: SelectionRecord,
    pub before: TimingReport,
    pub after: TimingReport,
    pub eligible: usize,
}

impl HybridResult {
    pub fn replaced_fraction(&self) -> f64 {
        self.selection.gate_ids.len() as f64 / self.eligible.max(1) as f64
    }
}

/// Repeatedly turns the gate with the most slack into a GSHE gate, provided
/// the slack absorbs the extra delay, recomputing timing after each step.
/// Ties go to the lowest gate id.
pub fn hybrid_replace(circuit: &Circuit, model: &DelayModel, policy: ReplacePolicy) -> Result<HybridResult, TimingError> {
    if let Some(f) = policy.target_fraction {
        if !(f > 0.0 && f <= 1.0) {
            return Err(TimingError::Fraction(f));
        }
    }
    let eligible = eligible_gates(circuit);
    let mut limit = policy.max_count.unwrap_or(usize::MAX);
    if let Some(f) = policy.target_fraction {
        limit = limit.min((f * eligible.len() as f64).round() as usize);
    }
    let before = analyze(circuit, model)?;
    let mut chosen: Vec<usize> = Vec::new();
    let mut replaced = vec![false; circuit.gates().len()];
    let mut report = before.clone();
    while chosen.len() < limit {
        let gshe = model.gshe_fs();
        let best = eligible
            .iter()
            .copied()
            .filter(|&g| !replaced[g])
            .filter(|&g| report.delay_fs[g] + report.slack_fs[g] >= gshe)
            .max_by(|&a, &b| report.slack_fs[a].cmp(&report.slack_fs[b]).then(b.cmp(&a)));
        let Some(g) = best else { break };
        replaced[g] = true;
        chosen.push(g);
        report = analyze_with(circuit, model, &chosen)?;
    }
    debug_assert!(report.critical_fs <= before.critical_fs);
    Ok(HybridResult {
        selection: SelectionRecord::from_gates(circuit, chosen, HYBRID_ALGORITHM),
        before,
        after: report,
        eligible: eligible.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_bench, random::{random_circuit, RandomSpec}, NetId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit() -> DelayModel {
        DelayModel {
            cmos_default: 1e-9,
            cmos: BTreeMap::new(),
            gshe: 3e-9,
        }
    }

    #[test]
    fn chain_of_three() {
        let c = parse_bench("INPUT(a)\nOUTPUT(y)\nb = NOT(a)\nc = NOT(b)\ny = NOT(c)", "chain").unwrap();
        let r = analyze(&c, &unit()).unwrap();
        assert_eq!(r.critical_fs, 3_000_000);
        assert!(r.slack_fs.iter().all(|&s| s == 0));
        assert_eq!(r.critical_path, vec![0, 1, 2]);
        let h = hybrid_replace(&c, &unit(), ReplacePolicy::default()).unwrap();
        assert!(h.selection.gate_ids.is_empty());
    }

    #[test]
    fn side_branch_slack() {
        // y = AND(AND(a,b), AND(c,d)) is depth 2; z = NOT(e) is a depth-1 output.
        let c = parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nINPUT(e)\nOUTPUT(y)\nOUTPUT(z)\n\
             p = AND(a, b)\nq = AND(c, d)\ny = AND(p, q)\nz = NOT(e)",
            "tree",
        )
        .unwrap();
        let r = analyze(&c, &unit()).unwrap();
        assert_eq!(r.critical_fs, 2_000_000);
        assert_eq!(r.slack_fs, vec![0, 0, 0, 1_000_000]);
    }

    #[test]
    fn off_critical_gate_is_replaced() {
        let c = parse_bench(
            "INPUT(a)\nINPUT(e)\nOUTPUT(y)\nOUTPUT(z)\nb = NOT(a)\nc = NOT(b)\nd = NOT(c)\ny = NOT(d)\nz = NOT(e)",
            "t",
        )
        .unwrap();
        let h = hybrid_replace(&c, &unit(), ReplacePolicy::default()).unwrap();
        assert_eq!(h.selection.gate_ids, vec![4]);
        assert_eq!(h.after.critical_fs, h.before.critical_fs);
        assert_eq!(h.selection.algorithm, HYBRID_ALGORITHM);
    }

    /// Longest path to every net by recursion over all paths.
    fn brute_arrival(c: &Circuit, d: &[u64], net: NetId) -> u64 {
        match c.driver(net) {
            Driver::Gate(g) => d[g] + c.gate(g).fanin.iter().map(|&f| brute_arrival(c, d, f)).max().unwrap_or(0),
            _ => 0,
        }
    }

    #[test]
    fn arrivals_match_path_enumeration() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_circuit(&mut rng, &RandomSpec::new(5, 3, 20), "r");
            let mut m = unit();
            m.cmos.insert(GateKind::Xor, 2.5e-9);
            m.cmos.insert(GateKind::Inv, 0.5e-9);
            let r = analyze(&c, &m).unwrap();
            for (id, g) in c.gates().iter().enumerate() {
                assert_eq!(r.arrival_fs[id], brute_arrival(&c, &r.delay_fs, g.output));
            }
            let crit = c.outputs().iter().map(|&o| brute_arrival(&c, &r.delay_fs, o)).max().unwrap();
            assert_eq!(r.critical_fs, crit);
            assert!(r.critical_path.iter().all(|&g| r.slack_fs[g] == 0));
        }
    }

    #[test]
    fn replacement_never_slows_the_circuit_and_is_deterministic() {
        for seed in 0..6 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_circuit(&mut rng, &RandomSpec::new(12, 6, 200), "r");
            let h = hybrid_replace(&c, &unit(), ReplacePolicy::default()).unwrap();
            let again = hybrid_replace(&c, &unit(), ReplacePolicy::default()).unwrap();
            assert_eq!(h.selection.gate_ids, again.selection.gate_ids);
            let check = analyze_with(&c, &unit(), &h.selection.gate_ids).unwrap();
            assert!(check.critical_fs <= h.before.critical_fs);
            let mut slower = unit();
            slower.gshe = 5e-9;
            let fewer = hybrid_replace(&c, &slower, ReplacePolicy::default()).unwrap();
            assert!(fewer.selection.gate_ids.len() <= h.selection.gate_ids.len());
            let capped = hybrid_replace(&c, &unit(), ReplacePolicy { max_count: Some(2), target_fraction: None }).unwrap();
            assert!(capped.selection.gate_ids.len() <= 2);
        }
    }

    #[test]
    fn model_json_and_validation() {
        let m: DelayModel = serde_json::from_str(r#"{"cmos": {"NAND": 1e-11}, "gshe": 2e-9}"#).unwrap();
        assert_eq!(m.cmos_fs(GateKind::Nand), 10_000);
        assert_eq!(m.cmos_fs(GateKind::Nor), 20_000);
        assert_eq!(m.gshe_fs(), 2_000_000);
        let bad = DelayModel { gshe: 0.0, ..DelayModel::default() };
        assert!(bad.validate().is_err());
    }
}
