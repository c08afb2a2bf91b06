// SPDX-License-Identifier: Apache-2.0
//! Gate-level netlists: representation, evaluation and flip-flop stripping.
//!
//! A [`Circuit`] is immutable once built. Nets are interned integers with the
//! original names kept in a side table; gates are stored in source order and a
//! deterministic topological order is computed at construction.

mod bench;
pub mod random;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bench::{parse_bench, write_bench};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unsupported gate kind `{kind}`")]
    UnsupportedKind { line: usize, kind: String },
    #[error("undefined net `{0}`")]
    UndefinedNet(String),
    #[error("net `{0}` is defined more than once")]
    DuplicateDefinition(String),
    #[error("gate driving `{net}`: {kind} expects {expected} inputs, got {got}")]
    Arity {
        net: String,
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("combinational cycle through net `{0}`")]
    Cycle(String),
    #[error("circuit contains flip-flops; strip them first")]
    Sequential,
    #[error("assignment has {got} bits, circuit has {expected} inputs")]
    WidthMismatch { expected: usize, got: usize },
}

/// Interned net identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NetId(pub u32);

impl NetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Inv,
    Buf,
    Dff,
    Const0,
    Const1,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Inv,
        GateKind::Buf,
        GateKind::Dff,
        GateKind::Const0,
        GateKind::Const1,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Const0 | GateKind::Const1 => 0,
            GateKind::Inv | GateKind::Buf | GateKind::Dff => 1,
            _ => 2,
        }
    }

    /// Canonical BENCH keyword.
    pub fn bench_name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Inv => "NOT",
            GateKind::Buf => "BUFF",
            GateKind::Dff => "DFF",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }

    /// Case-insensitive lookup accepting the common BENCH aliases.
    pub fn from_name(name: &str) -> Option<GateKind> {
        let kind = match name.to_ascii_uppercase().as_str() {
            "AND" => GateKind::And,
            "NAND" => GateKind::Nand,
            "OR" => GateKind::Or,
            "NOR" => GateKind::Nor,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "NOT" | "INV" => GateKind::Inv,
            "BUF" | "BUFF" => GateKind::Buf,
            "DFF" => GateKind::Dff,
            "CONST0" | "GND" => GateKind::Const0,
            "CONST1" | "VDD" => GateKind::Const1,
            _ => return None,
        };
        Some(kind)
    }

    /// Evaluates 64 patterns at once. `a`/`b` are ignored beyond the arity.
    #[inline]
    pub fn eval_word(self, a: u64, b: u64) -> u64 {
        match self {
            GateKind::And => a & b,
            GateKind::Nand => !(a & b),
            GateKind::Or => a | b,
            GateKind::Nor => !(a | b),
            GateKind::Xor => a ^ b,
            GateKind::Xnor => !(a ^ b),
            GateKind::Inv => !a,
            GateKind::Buf | GateKind::Dff => a,
            GateKind::Const0 => 0,
            GateKind::Const1 => !0,
        }
    }

    pub fn eval(self, a: bool, b: bool) -> bool {
        self.eval_word(a as u64, b as u64) & 1 == 1
    }

    pub fn is_combinational(self) -> bool {
        self != GateKind::Dff
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.bench_name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub fanin: Vec<NetId>,
    pub output: NetId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Driver {
    Input(usize),
    Gate(usize),
    /// Interned but neither driven nor read.
    Floating,
}

#[derive(Clone, Debug)]
pub struct Circuit {
    name: String,
    net_names: Vec<String>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    gates: Vec<Gate>,
    drivers: Vec<Driver>,
    order: Vec<usize>,
}

impl Circuit {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    /// Gates in source order; a gate's id is its index here.
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, id: usize) -> &Gate {
        &self.gates[id]
    }

    pub fn num_nets(&self) -> usize {
        self.net_names.len()
    }

    pub fn net_name(&self, net: NetId) -> &str {
        &self.net_names[net.index()]
    }

    pub fn net_names(&self) -> &[String] {
        &self.net_names
    }

    pub fn find_net(&self, name: &str) -> Option<NetId> {
        self.net_names
            .iter()
            .position(|n| n == name)
            .map(|i| NetId(i as u32))
    }

    pub fn driver(&self, net: NetId) -> Driver {
        self.drivers[net.index()]
    }

    /// Gate ids in topological order (flip-flop outputs act as sources).
    pub fn topo_order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_combinational(&self) -> bool {
        self.gates.iter().all(|g| g.kind.is_combinational())
    }

    pub fn num_flip_flops(&self) -> usize {
        self.gates.iter().filter(|g| g.kind == GateKind::Dff).count()
    }

    /// Fanout gate ids of every net.
    pub fn fanouts(&self) -> Vec<Vec<usize>> {
        let mut fo = vec![Vec::new(); self.num_nets()];
        for (id, g) in self.gates.iter().enumerate() {
            for &n in &g.fanin {
                if !fo[n.index()].contains(&id) {
                    fo[n.index()].push(id);
                }
            }
        }
        fo
    }

    /// Bit-parallel simulation. `inputs[i]` holds 64 patterns for input `i`;
    /// returns the value word of every net.
    pub fn simulate(&self, inputs: &[u64]) -> Result<Vec<u64>, NetlistError> {
        self.check_width(inputs.len())?;
        if !self.is_combinational() {
            return Err(NetlistError::Sequential);
        }
        let mut values = vec![0u64; self.num_nets()];
        for (net, &w) in self.inputs.iter().zip(inputs) {
            values[net.index()] = w;
        }
        for &id in &self.order {
            let g = &self.gates[id];
            let a = g.fanin.first().map_or(0, |n| values[n.index()]);
            let b = g.fanin.get(1).map_or(0, |n| values[n.index()]);
            values[g.output.index()] = g.kind.eval_word(a, b);
        }
        Ok(values)
    }

    /// Output words for 64 parallel patterns.
    pub fn eval_words(&self, inputs: &[u64]) -> Result<Vec<u64>, NetlistError> {
        let values = self.simulate(inputs)?;
        Ok(self.outputs.iter().map(|n| values[n.index()]).collect())
    }

    pub fn evaluate(&self, assignment: &[bool]) -> Result<Vec<bool>, NetlistError> {
        let words: Vec<u64> = assignment.iter().map(|&b| b as u64).collect();
        Ok(self
            .eval_words(&words)?
            .into_iter()
            .map(|w| w & 1 == 1)
            .collect())
    }

    fn check_width(&self, got: usize) -> Result<(), NetlistError> {
        if got != self.inputs.len() {
            return Err(NetlistError::WidthMismatch {
                expected: self.inputs.len(),
                got,
            });
        }
        Ok(())
    }

    /// Turns every flip-flop into a primary output (its data input) and a
    /// primary input (its output), then removes it.
    pub fn strip_flip_flops(&self) -> Circuit {
        if self.is_combinational() {
            return self.clone();
        }
        let mut b = CircuitBuilder::new(self.name.clone());
        for n in &self.net_names {
            b.net(n);
        }
        for &i in &self.inputs {
            b.inputs.push(i);
        }
        for &o in &self.outputs {
            b.outputs.push(o);
        }
        let mut pseudo_outputs = Vec::new();
        for g in &self.gates {
            if g.kind == GateKind::Dff {
                b.inputs.push(g.output);
                pseudo_outputs.push(g.fanin[0]);
            } else {
                b.gates.push(g.clone());
            }
        }
        b.outputs.extend(pseudo_outputs);
        b.build().expect("stripping preserves well-formedness")
    }

    /// Exhaustive truth table of every output, one `Vec<u64>` per output with
    /// bit `p` of word `p / 64` being the value under input pattern `p`
    /// (input `i` is bit `i` of `p`). Intended for circuits with few inputs.
    pub fn truth_tables(&self) -> Result<Vec<Vec<u64>>, NetlistError> {
        let n = self.inputs.len();
        assert!(n <= 30, "exhaustive enumeration over {n} inputs");
        let patterns = 1usize << n;
        let words = patterns.div_ceil(64);
        let mut tables = vec![vec![0u64; words]; self.outputs.len()];
        for w in 0..words {
            let stimulus = exhaustive_word(n, w);
            for (t, v) in tables.iter_mut().zip(self.eval_words(&stimulus)?) {
                t[w] = v;
            }
        }
        if patterns < 64 {
            let mask = (1u64 << patterns) - 1;
            for t in &mut tables {
                t[0] &= mask;
            }
        }
        Ok(tables)
    }
}

/// Input stimulus for word `w` of an exhaustive enumeration over `n` inputs:
/// pattern `p = 64 * w + lane`, input `i` takes bit `i` of `p`.
pub fn exhaustive_word(n: usize, w: usize) -> Vec<u64> {
    (0..n)
        .map(|i| {
            if i < 6 {
                const LANES: [u64; 6] = [
                    0xAAAA_AAAA_AAAA_AAAA,
                    0xCCCC_CCCC_CCCC_CCCC,
                    0xF0F0_F0F0_F0F0_F0F0,
                    0xFF00_FF00_FF00_FF00,
                    0xFFFF_0000_FFFF_0000,
                    0xFFFF_FFFF_0000_0000,
                ];
                LANES[i]
            } else if (w >> (i - 6)) & 1 == 1 {
                !0
            } else {
                0
            }
        })
        .collect()
}

/// Name-preserving structural isomorphism: same input/output name sequences
/// and, for every net name, the same driver kind and fanin names.
pub fn isomorphic(a: &Circuit, b: &Circuit) -> bool {
    let names = |c: &Circuit, nets: &[NetId]| -> Vec<String> {
        nets.iter().map(|&n| c.net_name(n).to_string()).collect()
    };
    if names(a, a.inputs()) != names(b, b.inputs()) || names(a, a.outputs()) != names(b, b.outputs())
    {
        return false;
    }
    if a.gates().len() != b.gates().len() {
        return false;
    }
    let signature = |c: &Circuit| -> HashMap<String, (GateKind, Vec<String>)> {
        c.gates()
            .iter()
            .map(|g| {
                (
                    c.net_name(g.output).to_string(),
                    (g.kind, names(c, &g.fanin)),
                )
            })
            .collect()
    };
    signature(a) == signature(b)
}

/// Incremental construction with validation deferred to [`CircuitBuilder::build`].
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    name: String,
    names: Vec<String>,
    index: HashMap<String, NetId>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        CircuitBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Interns `name`, returning the existing id if already known.
    pub fn net(&mut self, name: &str) -> NetId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = NetId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn name_of(&self, net: NetId) -> &str {
        &self.names[net.index()]
    }

    pub fn has_net(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// A net name not yet in use, derived from `base`.
    pub fn fresh_net(&mut self, base: &str) -> NetId {
        let mut k = 0usize;
        loop {
            let candidate = format!("{base}_{k}");
            if !self.index.contains_key(&candidate) {
                return self.net(&candidate);
            }
            k += 1;
        }
    }

    pub fn input(&mut self, name: &str) -> NetId {
        let id = self.net(name);
        self.inputs.push(id);
        id
    }

    pub fn output(&mut self, name: &str) -> NetId {
        let id = self.net(name);
        self.outputs.push(id);
        id
    }

    pub fn gate(&mut self, kind: GateKind, fanin: &[NetId], output: NetId) {
        self.gates.push(Gate {
            kind,
            fanin: fanin.to_vec(),
            output,
        });
    }

    /// Convenience for tests and generators: `out = kind(fanin...)` by name.
    pub fn gate_named(&mut self, kind: GateKind, fanin: &[&str], output: &str) -> NetId {
        let fanin: Vec<NetId> = fanin.iter().map(|n| self.net(n)).collect();
        let out = self.net(output);
        self.gate(kind, &fanin, out);
        out
    }

    pub fn build(self) -> Result<Circuit, NetlistError> {
        let n = self.names.len();
        let mut drivers: Vec<Option<Driver>> = vec![None; n];
        for (i, &net) in self.inputs.iter().enumerate() {
            if drivers[net.index()].is_some() {
                return Err(NetlistError::DuplicateDefinition(self.names[net.index()].clone()));
            }
            drivers[net.index()] = Some(Driver::Input(i));
        }
        for (id, g) in self.gates.iter().enumerate() {
            if g.fanin.len() != g.kind.arity() {
                return Err(NetlistError::Arity {
                    net: self.names[g.output.index()].clone(),
                    kind: g.kind,
                    expected: g.kind.arity(),
                    got: g.fanin.len(),
                });
            }
            if drivers[g.output.index()].is_some() {
                return Err(NetlistError::DuplicateDefinition(
                    self.names[g.output.index()].clone(),
                ));
            }
            drivers[g.output.index()] = Some(Driver::Gate(id));
        }
        let used = self
            .gates
            .iter()
            .flat_map(|g| g.fanin.iter())
            .chain(self.outputs.iter());
        for &net in used {
            if drivers[net.index()].is_none() {
                return Err(NetlistError::UndefinedNet(self.names[net.index()].clone()));
            }
        }
        let drivers: Vec<Driver> = drivers
            .into_iter()
            .map(|d| d.unwrap_or(Driver::Floating))
            .collect();
        let order = topo_order(&self.gates, &drivers, &self.names)?;
        Ok(Circuit {
            name: self.name,
            net_names: self.names,
            inputs: self.inputs,
            outputs: self.outputs,
            gates: self.gates,
            drivers,
            order,
        })
    }
}

fn topo_order(gates: &[Gate], drivers: &[Driver], names: &[String]) -> Result<Vec<usize>, NetlistError> {
    let mut pending = vec![0usize; gates.len()];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
    for (id, g) in gates.iter().enumerate() {
        if g.kind == GateKind::Dff {
            continue;
        }
        for &n in &g.fanin {
            if let Driver::Gate(src) = drivers[n.index()] {
                if gates[src].kind != GateKind::Dff {
                    pending[id] += 1;
                    succ[src].push(id);
                }
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..gates.len()).filter(|&i| pending[i] == 0).collect();
    let mut order = Vec::with_capacity(gates.len());
    while let Some(id) = queue.pop_front() {
        order.push(id);
        for &s in &succ[id] {
            pending[s] -= 1;
            if pending[s] == 0 {
                queue.push_back(s);
            }
        }
    }
    if order.len() != gates.len() {
        let stuck = (0..gates.len()).find(|&i| pending[i] > 0).unwrap();
        return Err(NetlistError::Cycle(names[gates[stuck].output.index()].clone()));
    }
    Ok(order)
}
