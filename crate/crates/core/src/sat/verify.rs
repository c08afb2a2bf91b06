// SPDX-License-Identifier: Apache-2.0
//! Functional equivalence of a decoded netlist against its reference.

use super::encode::{clause, differences, encode_circuit, Signal};
use super::solver::{Cadical, SatSolver, SolveResult};
use super::{AttackError, Verdict};
use crate::camo::{Key, LockedCircuit};
use crate::netlist::{exhaustive_word, Circuit};

/// Input counts up to this are checked by full enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 24;

pub fn verify_key(locked: &LockedCircuit, key: &Key, reference: &Circuit) -> Result<Verdict, AttackError> {
    locked.check_key(key)?;
    let (n, m) = (locked.inputs().len(), locked.outputs().len());
    if reference.inputs().len() != n || reference.outputs().len() != m {
        return Err(AttackError::ReferenceMismatch {
            expected: format!("{n}/{m}"),
            got: format!("{}/{}", reference.inputs().len(), reference.outputs().len()),
        });
    }
    if n <= EXHAUSTIVE_LIMIT {
        let words = if n <= 6 { 1 } else { 1usize << (n - 6) };
        let outs = |v: &[u64], nets: &[crate::netlist::NetId]| -> Vec<u64> {
            nets.iter().map(|o| v[o.index()]).collect()
        };
        for w in 0..words {
            let x = exhaustive_word(n, w);
            let got = locked.simulate(key, &x)?;
            let want = reference.simulate(&x).expect("widths checked");
            if outs(&got, locked.outputs()) != outs(&want, reference.outputs()) {
                return Ok(Verdict::Inequivalent);
            }
        }
        return Ok(Verdict::Equivalent);
    }
    Ok(equivalent(&locked.decode(key)?, reference))
}

/// SAT miter of two plain circuits with matching input and output order.
pub fn equivalent(a: &Circuit, b: &Circuit) -> Verdict {
    assert_eq!(a.inputs().len(), b.inputs().len());
    assert_eq!(a.outputs().len(), b.outputs().len());
    let mut s = Cadical::default();
    let x: Vec<Signal> = a.inputs().iter().map(|_| Signal::fresh(&mut s)).collect();
    let na = encode_circuit(&mut s, a, &x);
    let nb = encode_circuit(&mut s, b, &x);
    let oa: Vec<Signal> = a.outputs().iter().map(|o| na[o.index()]).collect();
    let ob: Vec<Signal> = b.outputs().iter().map(|o| nb[o.index()]).collect();
    let d = differences(&mut s, &oa, &ob);
    clause(&mut s, &d);
    match s.solve(&[]) {
        SolveResult::Unsat => Verdict::Equivalent,
        SolveResult::Sat => Verdict::Inequivalent,
        SolveResult::Unknown => Verdict::Unchecked,
    }
}
