// SPDX-License-Identifier: Apache-2.0
//! Tseitin encoding of plain and keyed netlists.
//!
//! Signals may be constants, so copies of the circuit with a fixed input
//! pattern (the per-DIP agreement constraints) collapse to the key-dependent
//! logic only.

use std::ops::Not;

use super::solver::{ClauseSink, Cnf, Lit};
use crate::camo::{LockedCircuit, LockedOp};
use crate::netlist::{Circuit, GateKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signal {
    Const(bool),
    Lit(Lit),
}

impl Not for Signal {
    type Output = Signal;
    fn not(self) -> Signal {
        match self {
            Signal::Const(b) => Signal::Const(!b),
            Signal::Lit(l) => Signal::Lit(!l),
        }
    }
}

impl Signal {
    pub fn fresh<S: ClauseSink>(s: &mut S) -> Signal {
        Signal::Lit(s.new_var())
    }

    /// Value under a model, given a literal evaluator.
    pub fn value(self, lit_value: impl Fn(Lit) -> bool) -> bool {
        match self {
            Signal::Const(b) => b,
            Signal::Lit(l) => lit_value(l),
        }
    }
}

/// Adds a clause over signals: satisfied constants drop the clause, false
/// constants drop the literal. An all-false clause becomes the contradiction
/// `v ∧ ¬v` over a fresh variable, so no clause is ever empty.
pub fn clause<S: ClauseSink>(s: &mut S, lits: &[Signal]) {
    let mut out = Vec::with_capacity(lits.len());
    for &l in lits {
        match l {
            Signal::Const(true) => return,
            Signal::Const(false) => {}
            Signal::Lit(l) => {
                if out.contains(&!l) {
                    return;
                }
                if !out.contains(&l) {
                    out.push(l);
                }
            }
        }
    }
    if out.is_empty() {
        let v = s.new_var();
        s.add_clause(&[v]);
        s.add_clause(&[!v]);
    } else {
        s.add_clause(&out);
    }
}

pub fn and2<S: ClauseSink>(s: &mut S, a: Signal, b: Signal) -> Signal {
    match (a, b) {
        (Signal::Const(false), _) | (_, Signal::Const(false)) => Signal::Const(false),
        (Signal::Const(true), x) | (x, Signal::Const(true)) => x,
        _ if a == b => a,
        _ if a == !b => Signal::Const(false),
        _ => {
            let o = Signal::fresh(s);
            clause(s, &[!o, a]);
            clause(s, &[!o, b]);
            clause(s, &[o, !a, !b]);
            o
        }
    }
}

pub fn or2<S: ClauseSink>(s: &mut S, a: Signal, b: Signal) -> Signal {
    !and2(s, !a, !b)
}

pub fn xor2<S: ClauseSink>(s: &mut S, a: Signal, b: Signal) -> Signal {
    match (a, b) {
        (Signal::Const(c), x) | (x, Signal::Const(c)) => {
            if c {
                !x
            } else {
                x
            }
        }
        _ if a == b => Signal::Const(false),
        _ if a == !b => Signal::Const(true),
        _ => {
            let o = Signal::fresh(s);
            clause(s, &[!o, a, b]);
            clause(s, &[!o, !a, !b]);
            clause(s, &[o, !a, b]);
            clause(s, &[o, a, !b]);
            o
        }
    }
}

/// `sel ? hi : lo`.
pub fn mux<S: ClauseSink>(s: &mut S, sel: Signal, hi: Signal, lo: Signal) -> Signal {
    match sel {
        Signal::Const(true) => return hi,
        Signal::Const(false) => return lo,
        _ => {}
    }
    if hi == lo {
        return hi;
    }
    match (hi, lo) {
        (Signal::Const(true), Signal::Const(false)) => return sel,
        (Signal::Const(false), Signal::Const(true)) => return !sel,
        (Signal::Const(true), _) => return or2(s, sel, lo),
        (Signal::Const(false), _) => return and2(s, !sel, lo),
        (_, Signal::Const(true)) => return or2(s, !sel, hi),
        (_, Signal::Const(false)) => return and2(s, sel, hi),
        _ => {}
    }
    let o = Signal::fresh(s);
    clause(s, &[!sel, !hi, o]);
    clause(s, &[!sel, hi, !o]);
    clause(s, &[sel, !lo, o]);
    clause(s, &[sel, lo, !o]);
    clause(s, &[!hi, !lo, o]);
    clause(s, &[hi, lo, !o]);
    o
}

pub fn gate<S: ClauseSink>(s: &mut S, kind: GateKind, a: Signal, b: Signal) -> Signal {
    match kind {
        GateKind::And => and2(s, a, b),
        GateKind::Nand => !and2(s, a, b),
        GateKind::Or => or2(s, a, b),
        GateKind::Nor => !or2(s, a, b),
        GateKind::Xor => xor2(s, a, b),
        GateKind::Xnor => !xor2(s, a, b),
        GateKind::Inv => !a,
        GateKind::Buf => a,
        GateKind::Const0 => Signal::Const(false),
        GateKind::Const1 => Signal::Const(true),
        GateKind::Dff => panic!("flip-flops must be stripped before encoding"),
    }
}

/// Output of a keyed cell: `rows[2a + b]`.
pub fn lut<S: ClauseSink>(s: &mut S, rows: &[Signal; 4], a: Signal, b: Signal) -> Signal {
    if a == b {
        return mux(s, a, rows[3], rows[0]);
    }
    if a == !b {
        return mux(s, a, rows[2], rows[1]);
    }
    let lo = mux(s, b, rows[1], rows[0]);
    let hi = mux(s, b, rows[3], rows[2]);
    mux(s, a, hi, lo)
}

/// One copy of the key: its bits plus, per cell, the four truth-table rows
/// as functions of those bits.
#[derive(Clone, Debug)]
pub struct KeyVars {
    pub bits: Vec<Lit>,
    pub rows: Vec<[Signal; 4]>,
}

impl KeyVars {
    pub fn declare<S: ClauseSink>(s: &mut S, locked: &LockedCircuit) -> KeyVars {
        let bits: Vec<Lit> = (0..locked.key_len()).map(|_| s.new_var()).collect();
        let mut rows = Vec::with_capacity(locked.cells().len());
        for cell in locked.cells() {
            let span = &bits[cell.key_offset..cell.key_offset + cell.key_width];
            let k = cell.members.len();
            let code_lits = |code: usize| -> Vec<Signal> {
                // Literals that are all true exactly when the span holds `code`.
                span.iter()
                    .enumerate()
                    .map(|(j, &l)| Signal::Lit(if code >> j & 1 == 1 { l } else { !l }))
                    .collect()
            };
            for code in k..1 << cell.key_width {
                let neg: Vec<Signal> = code_lits(code).into_iter().map(|x| !x).collect();
                clause(s, &neg);
            }
            let mut cell_rows = [Signal::Const(false); 4];
            for (r, slot) in cell_rows.iter_mut().enumerate() {
                let f: Vec<bool> = cell.members.iter().map(|t| t.row(r)).collect();
                *slot = if f.iter().all(|&v| v == f[0]) {
                    Signal::Const(f[0])
                } else if let Some(sig) = (0..cell.key_width).find_map(|j| {
                    if (0..k).all(|c| f[c] == (c >> j & 1 == 1)) {
                        Some(Signal::Lit(span[j]))
                    } else if (0..k).all(|c| f[c] != (c >> j & 1 == 1)) {
                        Some(Signal::Lit(!span[j]))
                    } else {
                        None
                    }
                }) {
                    sig
                } else {
                    let t = Signal::fresh(s);
                    for (code, &v) in f.iter().enumerate() {
                        let mut c: Vec<Signal> = code_lits(code).into_iter().map(|x| !x).collect();
                        c.push(if v { t } else { !t });
                        clause(s, &c);
                    }
                    t
                };
            }
            rows.push(cell_rows);
        }
        KeyVars { bits, rows }
    }
}

/// Encodes the keyed netlist; returns the signal of every net.
pub fn encode_locked<S: ClauseSink>(
    s: &mut S,
    locked: &LockedCircuit,
    inputs: &[Signal],
    key: &KeyVars,
) -> Vec<Signal> {
    assert_eq!(inputs.len(), locked.inputs().len());
    let mut nets = vec![Signal::Const(false); locked.num_nets()];
    for (n, &sig) in locked.inputs().iter().zip(inputs) {
        nets[n.index()] = sig;
    }
    for g in locked.gates() {
        let a = g.fanin.first().map_or(Signal::Const(false), |n| nets[n.index()]);
        let b = g.fanin.get(1).map_or(Signal::Const(false), |n| nets[n.index()]);
        nets[g.output.index()] = match g.op {
            LockedOp::Fixed(k) => gate(s, k, a, b),
            LockedOp::Keyed(c) => lut(s, &key.rows[c], a, b),
        };
    }
    nets
}

pub fn locked_outputs(locked: &LockedCircuit, nets: &[Signal]) -> Vec<Signal> {
    locked.outputs().iter().map(|o| nets[o.index()]).collect()
}

/// Encodes a plain combinational circuit; returns the signal of every net.
pub fn encode_circuit<S: ClauseSink>(s: &mut S, circuit: &Circuit, inputs: &[Signal]) -> Vec<Signal> {
    assert_eq!(inputs.len(), circuit.inputs().len());
    let mut nets = vec![Signal::Const(false); circuit.num_nets()];
    for (n, &sig) in circuit.inputs().iter().zip(inputs) {
        nets[n.index()] = sig;
    }
    for &id in circuit.topo_order() {
        let g = circuit.gate(id);
        let a = g.fanin.first().map_or(Signal::Const(false), |n| nets[n.index()]);
        let b = g.fanin.get(1).map_or(Signal::Const(false), |n| nets[n.index()]);
        nets[g.output.index()] = gate(s, g.kind, a, b);
    }
    nets
}

/// Pairwise XORs of two output vectors.
pub fn differences<S: ClauseSink>(s: &mut S, a: &[Signal], b: &[Signal]) -> Vec<Signal> {
    a.iter().zip(b).map(|(&x, &y)| xor2(s, x, y)).collect()
}

/// Asserts `sig == value` (possibly an empty clause).
pub fn assert_value<S: ClauseSink>(s: &mut S, sig: Signal, value: bool) {
    clause(s, &[if value { sig } else { !sig }]);
}

/// A standalone CNF fragment for one copy of a keyed netlist.
#[derive(Clone, Debug)]
pub struct Fragment {
    pub cnf: Cnf,
    pub inputs: Vec<Signal>,
    pub key: KeyVars,
    /// Signal of every net of the locked netlist.
    pub nets: Vec<Signal>,
}

/// Encodes one copy with fresh input and key variables; variable names carry
/// `@tag` so several copies can be told apart in a DIMACS dump.
pub fn tseitin(locked: &LockedCircuit, tag: u32) -> Fragment {
    let mut cnf = Cnf::default();
    let inputs: Vec<Signal> = locked.inputs().iter().map(|_| Signal::fresh(&mut cnf)).collect();
    let key = KeyVars::declare(&mut cnf, locked);
    let nets = encode_locked(&mut cnf, locked, &inputs, &key);
    let mut names = Vec::new();
    for (i, b) in key.bits.iter().enumerate() {
        names.push((b.var(), format!("key[{i}]@{tag}")));
    }
    for (n, sig) in nets.iter().enumerate() {
        if let Signal::Lit(l) = sig {
            let name = locked.net_name(crate::netlist::NetId(n as u32));
            let prefix = if l.is_negated() { "~" } else { "" };
            names.push((l.var(), format!("{prefix}{name}@{tag}")));
        }
    }
    names.sort();
    cnf.names = names;
    Fragment { cnf, inputs, key, nets }
}
