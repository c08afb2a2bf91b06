// SPDX-License-Identifier: Apache-2.0
//! Seeded random combinational circuits.

use rand::Rng;

use super::{Circuit, CircuitBuilder, GateKind, NetId};

#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub inputs: usize,
    pub outputs: usize,
    pub gates: usize,
    pub kinds: Vec<GateKind>,
    /// Fanins are drawn from the most recent `window` nets, which controls
    /// depth: small windows give deep, narrow logic.
    pub window: usize,
}

impl RandomSpec {
    pub fn new(inputs: usize, outputs: usize, gates: usize) -> Self {
        RandomSpec {
            inputs,
            outputs,
            gates,
            kinds: vec![
                GateKind::And,
                GateKind::Nand,
                GateKind::Or,
                GateKind::Nor,
                GateKind::Xor,
                GateKind::Xnor,
                GateKind::Inv,
                GateKind::Buf,
            ],
            window: usize::MAX,
        }
    }
}

/// Generates an acyclic circuit. Nets nobody reads are folded into the
/// outputs with extra two-input gates, so every gate lies in some output cone
/// and the final gate count may exceed `spec.gates`.
pub fn random_circuit<R: Rng>(rng: &mut R, spec: &RandomSpec, name: &str) -> Circuit {
    assert!(spec.inputs > 0 && spec.outputs > 0 && !spec.kinds.is_empty());
    let mut b = CircuitBuilder::new(name);
    let mut nets: Vec<NetId> = (0..spec.inputs).map(|i| b.input(&format!("x{i}"))).collect();
    let mut unread: Vec<bool> = vec![true; spec.inputs];
    let two_input: Vec<GateKind> = spec.kinds.iter().copied().filter(|k| k.arity() == 2).collect();

    let pick = |rng: &mut R, nets: &[NetId], unread: &mut [bool], window: usize| -> NetId {
        let lo = nets.len().saturating_sub(window);
        // Prefer unread nets so little logic dangles.
        let fresh: Vec<usize> = (lo..nets.len()).filter(|&i| unread[i]).collect();
        let idx = if !fresh.is_empty() && rng.random_bool(0.6) {
            fresh[rng.random_range(0..fresh.len())]
        } else {
            rng.random_range(lo..nets.len())
        };
        unread[idx] = false;
        nets[idx]
    };

    for g in 0..spec.gates {
        let kind = spec.kinds[rng.random_range(0..spec.kinds.len())];
        let mut fanin = Vec::with_capacity(2);
        for _ in 0..kind.arity() {
            fanin.push(pick(rng, &nets, &mut unread, spec.window));
        }
        if fanin.len() == 2 && fanin[0] == fanin[1] && nets.len() > 1 {
            // Avoid degenerate self-paired gates.
            let alt = nets[rng.random_range(0..nets.len())];
            if alt != fanin[0] {
                fanin[1] = alt;
            }
        }
        let out = b.net(&format!("n{g}"));
        b.gate(kind, &fanin, out);
        nets.push(out);
        unread.push(true);
    }

    // Outputs are the last `outputs` nets; unread internal nets are merged in.
    let k = spec.outputs.min(nets.len());
    let mut outs: Vec<NetId> = nets[nets.len() - k..].to_vec();
    for i in 0..nets.len() - k {
        if unread[i] && i >= spec.inputs && !two_input.is_empty() {
            let slot = rng.random_range(0..outs.len());
            let kind = two_input[rng.random_range(0..two_input.len())];
            let merged = b.fresh_net("m");
            b.gate(kind, &[outs[slot], nets[i]], merged);
            outs[slot] = merged;
        }
    }
    while outs.len() < spec.outputs {
        outs.push(nets[rng.random_range(0..nets.len())]);
    }
    for o in outs {
        let name = b.names[o.index()].clone();
        b.output(&name);
    }
    b.build().expect("generator emits well-formed circuits")
}
