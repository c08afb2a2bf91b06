// SPDX-License-Identifier: Apache-2.0
//! Key-controlled netlists derived from a circuit, a selection and a function set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CamoError, FunctionSet, Key, SelectionRecord, TruthTable};
use crate::netlist::{Circuit, CircuitBuilder, GateKind, NetId};

/// How a selected gate was turned into a keyed cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// The cell takes the gate's place.
    Substitute,
    /// The cell takes the gate's place and feeds a fixed inverter.
    Inverted,
    /// One-input gate: the cell sees the same signal on both inputs.
    Tied,
    /// Tied, followed by a fixed inverter.
    TiedInverted,
    /// The gate is kept and a keyed one-input stage is inserted after it.
    Series,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyCell {
    /// Id of the protected gate in the original circuit.
    pub gate: usize,
    pub key_offset: usize,
    pub key_width: usize,
    pub members: Vec<TruthTable>,
    pub placement: Placement,
}

impl KeyCell {
    pub fn decode(&self, key: &Key) -> Result<TruthTable, CamoError> {
        let code = key.code(self.key_offset, self.key_width);
        self.members.get(code).copied().ok_or(CamoError::InvalidKeyCode {
            gate: self.gate,
            code,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LockedOp {
    Fixed(GateKind),
    /// Index into [`LockedCircuit::cells`].
    Keyed(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockedGate {
    pub op: LockedOp,
    pub fanin: Vec<NetId>,
    pub output: NetId,
}

/// The attacker-visible netlist: structure plus candidate functions per
/// cell, never the correct key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LockedCircuit {
    pub benchmark: String,
    pub set: FunctionSet,
    pub selection: SelectionRecord,
    net_names: Vec<String>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    /// Topologically ordered.
    gates: Vec<LockedGate>,
    cells: Vec<KeyCell>,
    key_len: usize,
}

/// Result of camouflaging: the public netlist and the secret key.
#[derive(Clone, Debug)]
pub struct Camouflaged {
    pub locked: LockedCircuit,
    pub correct_key: Key,
}

impl LockedCircuit {
    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn gates(&self) -> &[LockedGate] {
        &self.gates
    }

    pub fn cells(&self) -> &[KeyCell] {
        &self.cells
    }

    pub fn key_len(&self) -> usize {
        self.key_len
    }

    pub fn num_nets(&self) -> usize {
        self.net_names.len()
    }

    pub fn net_name(&self, n: NetId) -> &str {
        &self.net_names[n.index()]
    }

    /// Checks internal consistency; used after deserializing untrusted files.
    pub fn validate(&self) -> Result<(), CamoError> {
        let bad = |m: String| Err(CamoError::MalformedLocked(m));
        let n = self.net_names.len();
        let mut defined = vec![false; n];
        for &i in &self.inputs {
            if i.index() >= n || defined[i.index()] {
                return bad(format!("input net {} invalid or repeated", i.0));
            }
            defined[i.index()] = true;
        }
        let mut span = 0;
        for (ci, c) in self.cells.iter().enumerate() {
            if c.members.is_empty() || c.key_offset != span || c.key_width != super::function::key_width(c.members.len()) {
                return bad(format!("cell {ci} has an inconsistent key span"));
            }
            span += c.key_width;
        }
        if span != self.key_len {
            return bad("key length does not match cells".into());
        }
        let mut used = vec![false; self.cells.len()];
        for g in &self.gates {
            let arity = match g.op {
                LockedOp::Fixed(k) if k == GateKind::Dff => return bad("flip-flop in locked netlist".into()),
                LockedOp::Fixed(k) => k.arity(),
                LockedOp::Keyed(c) => {
                    if c >= self.cells.len() || used[c] {
                        return bad(format!("keyed gate refers to bad cell {c}"));
                    }
                    used[c] = true;
                    2
                }
            };
            if g.fanin.len() != arity {
                return bad("gate arity mismatch".into());
            }
            if g.fanin.iter().any(|f| f.index() >= n || !defined[f.index()]) {
                return bad("gate reads an undefined net or is out of order".into());
            }
            if g.output.index() >= n || defined[g.output.index()] {
                return bad("net driven twice".into());
            }
            defined[g.output.index()] = true;
        }
        if used.iter().any(|u| !u) {
            return bad("cell without keyed gate".into());
        }
        if self.outputs.iter().any(|o| o.index() >= n || !defined[o.index()]) {
            return bad("undefined output".into());
        }
        Ok(())
    }

    pub fn check_key(&self, key: &Key) -> Result<(), CamoError> {
        if key.len() != self.key_len {
            return Err(CamoError::KeyLength {
                expected: self.key_len,
                got: key.len(),
            });
        }
        for c in &self.cells {
            c.decode(key)?;
        }
        Ok(())
    }

    /// Bit-parallel simulation under `key`; returns every net's word.
    pub fn simulate(&self, key: &Key, inputs: &[u64]) -> Result<Vec<u64>, CamoError> {
        self.check_key(key)?;
        if inputs.len() != self.inputs.len() {
            return Err(CamoError::InputWidth {
                expected: self.inputs.len(),
                got: inputs.len(),
            });
        }
        let tables: Vec<TruthTable> = self.cells.iter().map(|c| c.decode(key).unwrap()).collect();
        let mut v = vec![0u64; self.net_names.len()];
        for (n, &w) in self.inputs.iter().zip(inputs) {
            v[n.index()] = w;
        }
        for g in &self.gates {
            let a = g.fanin.first().map_or(0, |n| v[n.index()]);
            let b = g.fanin.get(1).map_or(0, |n| v[n.index()]);
            v[g.output.index()] = match g.op {
                LockedOp::Fixed(k) => k.eval_word(a, b),
                LockedOp::Keyed(c) => tables[c].eval_word(a, b),
            };
        }
        Ok(v)
    }

    pub fn evaluate(&self, key: &Key, input: &[bool]) -> Result<Vec<bool>, CamoError> {
        let words: Vec<u64> = input.iter().map(|&b| b as u64).collect();
        let v = self.simulate(key, &words)?;
        Ok(self.outputs.iter().map(|o| v[o.index()] & 1 == 1).collect())
    }

    /// Replaces every keyed cell by the concrete function `key` selects.
    pub fn decode(&self, key: &Key) -> Result<Circuit, CamoError> {
        self.check_key(key)?;
        let mut b = CircuitBuilder::new(self.benchmark.clone());
        for name in &self.net_names {
            b.net(name);
        }
        for &i in &self.inputs {
            let name = self.net_name(i).to_string();
            b.input(&name);
        }
        for &o in &self.outputs {
            let name = self.net_name(o).to_string();
            b.output(&name);
        }
        for g in &self.gates {
            match g.op {
                LockedOp::Fixed(k) => b.gate(k, &g.fanin, g.output),
                LockedOp::Keyed(c) => {
                    let t = self.cells[c].decode(key)?;
                    emit_table(&mut b, t, g.fanin[0], g.fanin[1], g.output);
                }
            }
        }
        Ok(b.build().expect("decoding preserves well-formedness"))
    }

    /// All functions the cell for original gate `gate` may take.
    pub fn cell_for_gate(&self, gate: usize) -> Option<&KeyCell> {
        self.cells.iter().find(|c| c.gate == gate)
    }
}

/// Standard-cell realization of a two-input table.
fn emit_table(b: &mut CircuitBuilder, t: TruthTable, a: NetId, bn: NetId, out: NetId) {
    use GateKind::*;
    let base = b.name_of(out).to_string();
    match t.id() {
        0 => b.gate(Const0, &[], out),
        15 => b.gate(Const1, &[], out),
        1 => b.gate(Nor, &[a, bn], out),
        6 => b.gate(Xor, &[a, bn], out),
        7 => b.gate(Nand, &[a, bn], out),
        8 => b.gate(And, &[a, bn], out),
        9 => b.gate(Xnor, &[a, bn], out),
        14 => b.gate(Or, &[a, bn], out),
        12 => b.gate(Buf, &[a], out),
        3 => b.gate(Inv, &[a], out),
        10 => b.gate(Buf, &[bn], out),
        5 => b.gate(Inv, &[bn], out),
        id => {
            // 2: !a & b, 4: a & !b, 11: !a | b, 13: a | !b
            let (inverted_a, kind) = match id {
                2 => (true, And),
                4 => (false, And),
                11 => (true, Or),
                13 => (false, Or),
                _ => unreachable!(),
            };
            let n = b.fresh_net(&format!("{base}__inv"));
            if inverted_a {
                b.gate(Inv, &[a], n);
                b.gate(kind, &[n, bn], out);
            } else {
                b.gate(Inv, &[bn], n);
                b.gate(kind, &[a, n], out);
            }
        }
    }
}

/// Chooses how a gate of kind `kind` is protected by `set` and which member
/// the correct key selects.
pub fn placement_for(kind: GateKind, set: &FunctionSet) -> Option<(Placement, usize)> {
    let table = TruthTable::of_kind(kind)?;
    match kind.arity() {
        2 => {
            if let Some(i) = set.position(table) {
                return Some((Placement::Substitute, i));
            }
            if let Some(i) = set.position(table.complement()) {
                return Some((Placement::Inverted, i));
            }
        }
        1 => {
            let want = table.tied();
            let matches = |t: &TruthTable, w: (bool, bool)| t.tied() == w;
            if let Some(i) = set.position(table) {
                return Some((Placement::Tied, i));
            }
            if let Some(i) = set.members().iter().position(|t| matches(t, want)) {
                return Some((Placement::Tied, i));
            }
            let inv = (!want.0, !want.1);
            if let Some(i) = set.members().iter().position(|t| matches(t, inv)) {
                return Some((Placement::TiedInverted, i));
            }
        }
        _ => return None,
    }
    if set.supports_series_insertion() {
        return Some((Placement::Series, set.position(TruthTable::BUF_A).unwrap()));
    }
    None
}

pub fn camouflage(circuit: &Circuit, selection: &SelectionRecord, set: &FunctionSet) -> Result<Camouflaged, CamoError> {
    if !circuit.is_combinational() {
        return Err(CamoError::Sequential);
    }
    let eligible = super::eligible_gates(circuit);
    let mut chosen: BTreeMap<usize, (Placement, usize)> = BTreeMap::new();
    for &id in &selection.gate_ids {
        if eligible.binary_search(&id).is_err() {
            return Err(CamoError::IneligibleGate(id));
        }
        let kind = circuit.gate(id).kind;
        let p = placement_for(kind, set).ok_or_else(|| CamoError::Incompatible {
            gate: id,
            kind,
            set: set.name().to_string(),
        })?;
        chosen.insert(id, p);
    }

    // Key spans follow ascending gate id.
    let width = set.key_width();
    let mut cell_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cells = Vec::with_capacity(chosen.len());
    let mut correct = Key::zeros(width * chosen.len());
    for (i, (&gate, &(placement, code))) in chosen.iter().enumerate() {
        cell_of.insert(gate, i);
        correct.set_code(i * width, width, code);
        cells.push(KeyCell {
            gate,
            key_offset: i * width,
            key_width: width,
            members: set.members().to_vec(),
            placement,
        });
    }

    let mut net_names: Vec<String> = circuit.net_names().to_vec();
    let mut taken: std::collections::HashSet<String> = net_names.iter().cloned().collect();
    let mut fresh = |base: &str, net_names: &mut Vec<String>| -> NetId {
        let mut k = 0;
        loop {
            let cand = format!("{base}__camo{k}");
            if taken.insert(cand.clone()) {
                net_names.push(cand);
                return NetId(net_names.len() as u32 - 1);
            }
            k += 1;
        }
    };

    let mut gates = Vec::with_capacity(circuit.gates().len() + chosen.len());
    for &id in circuit.topo_order() {
        let g = circuit.gate(id);
        let Some(&cell) = cell_of.get(&id) else {
            gates.push(LockedGate {
                op: LockedOp::Fixed(g.kind),
                fanin: g.fanin.clone(),
                output: g.output,
            });
            continue;
        };
        let keyed = LockedOp::Keyed(cell);
        let base = circuit.net_name(g.output).to_string();
        match cells[cell].placement {
            Placement::Substitute => gates.push(LockedGate {
                op: keyed,
                fanin: g.fanin.clone(),
                output: g.output,
            }),
            Placement::Tied => gates.push(LockedGate {
                op: keyed,
                fanin: vec![g.fanin[0], g.fanin[0]],
                output: g.output,
            }),
            Placement::Inverted | Placement::TiedInverted => {
                let mid = fresh(&base, &mut net_names);
                let fanin = if cells[cell].placement == Placement::Inverted {
                    g.fanin.clone()
                } else {
                    vec![g.fanin[0], g.fanin[0]]
                };
                gates.push(LockedGate { op: keyed, fanin, output: mid });
                gates.push(LockedGate {
                    op: LockedOp::Fixed(GateKind::Inv),
                    fanin: vec![mid],
                    output: g.output,
                });
            }
            Placement::Series => {
                let mid = fresh(&base, &mut net_names);
                gates.push(LockedGate {
                    op: LockedOp::Fixed(g.kind),
                    fanin: g.fanin.clone(),
                    output: mid,
                });
                gates.push(LockedGate {
                    op: keyed,
                    fanin: vec![mid, mid],
                    output: g.output,
                });
            }
        }
    }

    let locked = LockedCircuit {
        benchmark: circuit.name().to_string(),
        set: set.clone(),
        selection: selection.clone(),
        net_names,
        inputs: circuit.inputs().to_vec(),
        outputs: circuit.outputs().to_vec(),
        gates,
        key_len: correct.len(),
        cells,
    };
    Ok(Camouflaged {
        locked,
        correct_key: correct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camo::select_gates;
    use crate::netlist::parse_bench;

    fn single(kind: &str) -> Circuit {
        parse_bench(&format!("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = {kind}(a, b)\n"), "one").unwrap()
    }

    fn lock_all(c: &Circuit, set: &str) -> Camouflaged {
        let sel = select_gates(c, 1.0, 0).unwrap();
        camouflage(c, &sel, &FunctionSet::preset(set).unwrap()).unwrap()
    }

    fn equivalent(c: &Circuit, d: &Circuit) -> bool {
        c.truth_tables().unwrap() == d.truth_tables().unwrap()
    }

    #[test]
    fn nand_full_set() {
        let c = single("NAND");
        let cam = lock_all(&c, "gshe16");
        assert_eq!(cam.locked.key_len(), 4);
        assert_eq!(cam.locked.cells()[0].decode(&cam.correct_key).unwrap(), TruthTable::NAND);
        assert_eq!(cam.correct_key.code(0, 4), 0b0111);
    }

    #[test]
    fn nand_two_member_set() {
        let c = single("NAND");
        let sel = select_gates(&c, 1.0, 0).unwrap();
        let set = FunctionSet::new("nandnor", vec![TruthTable::NAND, TruthTable::NOR]).unwrap();
        let cam = camouflage(&c, &sel, &set).unwrap();
        assert_eq!(cam.locked.key_len(), 1);
        let mut wrong = cam.correct_key.clone();
        wrong.flip(0);
        assert!(equivalent(&c, &cam.locked.decode(&cam.correct_key).unwrap()));
        assert!(!equivalent(&c, &cam.locked.decode(&wrong).unwrap()));
    }

    #[test]
    fn and_with_invbuf_uses_series_stage() {
        let c = single("AND");
        let cam = lock_all(&c, "invbuf2");
        assert_eq!(cam.locked.cells()[0].placement, Placement::Series);
        assert_eq!(cam.locked.cells()[0].decode(&cam.correct_key).unwrap(), TruthTable::BUF_A);
        let d = cam.locked.decode(&cam.correct_key).unwrap();
        for p in 0..4u32 {
            let v = [p & 1 == 1, p & 2 == 2];
            assert_eq!(d.evaluate(&v).unwrap(), c.evaluate(&v).unwrap());
        }
    }

    #[test]
    fn complement_and_tied_placements() {
        let set = FunctionSet::preset("lookalike3").unwrap();
        assert_eq!(placement_for(GateKind::And, &set), Some((Placement::Inverted, 0)));
        assert_eq!(placement_for(GateKind::Or, &set), Some((Placement::Inverted, 1)));
        assert_eq!(placement_for(GateKind::Inv, &set), Some((Placement::Tied, 0)));
        assert_eq!(placement_for(GateKind::Buf, &set), Some((Placement::TiedInverted, 0)));
        let quad = FunctionSet::preset("quad4").unwrap();
        assert_eq!(placement_for(GateKind::Xor, &quad), None);
    }

    #[test]
    fn incompatible_gate_is_an_error() {
        let c = single("XOR");
        let sel = select_gates(&c, 1.0, 0).unwrap();
        let err = camouflage(&c, &sel, &FunctionSet::preset("quad4").unwrap()).unwrap_err();
        assert!(matches!(err, CamoError::Incompatible { gate: 0, .. }));
    }

    #[test]
    fn every_kind_and_preset_round_trips() {
        for kind in ["AND", "NAND", "OR", "NOR", "XOR", "XNOR"] {
            for set in FunctionSet::PRESETS {
                let c = single(kind);
                let sel = select_gates(&c, 1.0, 0).unwrap();
                let Ok(cam) = camouflage(&c, &sel, &FunctionSet::preset(set).unwrap()) else {
                    continue;
                };
                assert!(equivalent(&c, &cam.locked.decode(&cam.correct_key).unwrap()), "{kind}/{set}");
                cam.locked.validate().unwrap();
            }
        }
        for kind in ["NOT", "BUFF"] {
            let c = parse_bench(&format!("INPUT(a)\nOUTPUT(y)\ny = {kind}(a)\n"), "u").unwrap();
            for set in FunctionSet::PRESETS {
                let cam = lock_all(&c, set);
                assert!(equivalent(&c, &cam.locked.decode(&cam.correct_key).unwrap()), "{kind}/{set}");
            }
        }
    }

    #[test]
    fn decode_full_set_code_seven_is_nand() {
        let c = single("XOR");
        let cam = lock_all(&c, "gshe16");
        let mut k = Key::zeros(4);
        k.set_code(0, 4, 0b0111);
        let d = cam.locked.decode(&k).unwrap();
        assert!(equivalent(&d, &single("NAND")));
    }

    #[test]
    fn decode_rejects_invalid_code() {
        let c = single("NAND");
        let cam = lock_all(&c, "lookalike3");
        let mut k = Key::zeros(2);
        k.set_code(0, 2, 3);
        assert!(matches!(cam.locked.decode(&k), Err(CamoError::InvalidKeyCode { code: 3, .. })));
        assert!(matches!(cam.locked.decode(&Key::zeros(3)), Err(CamoError::KeyLength { .. })));
    }

    #[test]
    fn decode_realizes_all_sixteen_functions() {
        let c = single("AND");
        let cam = lock_all(&c, "gshe16");
        for t in TruthTable::all() {
            let mut k = Key::zeros(4);
            k.set_code(0, 4, t.id() as usize);
            let d = cam.locked.decode(&k).unwrap();
            for p in 0..4usize {
                let (a, b) = (p >> 1 & 1 == 1, p & 1 == 1);
                assert_eq!(d.evaluate(&[a, b]).unwrap(), vec![t.eval(a, b)], "{t}");
                assert_eq!(cam.locked.evaluate(&k, &[a, b]).unwrap(), vec![t.eval(a, b)]);
            }
        }
    }

    #[test]
    fn locked_json_round_trip() {
        let c = single("NOR");
        let cam = lock_all(&c, "dwm8");
        let text = serde_json::to_string(&cam.locked).unwrap();
        let back: LockedCircuit = serde_json::from_str(&text).unwrap();
        back.validate().unwrap();
        assert_eq!(back, cam.locked);
    }
}
