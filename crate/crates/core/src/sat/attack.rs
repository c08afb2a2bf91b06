// SPDX-License-Identifier: Apache-2.0
//! DIP-based oracle-guided attacks.
//!
//! The solver holds two (or four) key copies over shared inputs. Each oracle
//! answer adds one constant-input copy of the netlist per key copy, pinned to
//! the observed outputs; key variables persist across iterations so learned
//! clauses carry over.

use std::time::Instant;

use super::encode::{
    assert_value, clause, differences, encode_locked, locked_outputs, KeyVars, Signal,
};
use super::solver::{Cadical, ClauseSink, Cnf, Lit, SatSolver, SolveResult};
use super::{AttackError, AttackResult, AttackStatus, AttackVariant, Limits, Verdict};
use crate::camo::{Key, LockedCircuit};
use crate::oracle::Oracle;

/// Two key copies over shared inputs whose outputs must differ somewhere.
pub fn build_miter(locked: &LockedCircuit) -> Cnf {
    let mut cnf = Cnf::default();
    let x: Vec<Signal> = locked.inputs().iter().map(|_| Signal::fresh(&mut cnf)).collect();
    let k1 = KeyVars::declare(&mut cnf, locked);
    let k2 = KeyVars::declare(&mut cnf, locked);
    let o1 = encode_locked(&mut cnf, locked, &x, &k1);
    let o2 = encode_locked(&mut cnf, locked, &x, &k2);
    let d = differences(
        &mut cnf,
        &locked_outputs(locked, &o1),
        &locked_outputs(locked, &o2),
    );
    clause(&mut cnf, &d);
    cnf
}

pub fn sat_attack(
    locked: &LockedCircuit,
    oracle: &mut dyn Oracle,
    limits: &Limits,
) -> Result<AttackResult, AttackError> {
    run_attack(locked, oracle, limits, AttackVariant::SingleDip)
}

pub fn double_dip_attack(
    locked: &LockedCircuit,
    oracle: &mut dyn Oracle,
    limits: &Limits,
) -> Result<AttackResult, AttackError> {
    run_attack(locked, oracle, limits, AttackVariant::DoubleDip)
}

struct Engine<'a> {
    locked: &'a LockedCircuit,
    solver: Cadical,
    x: Vec<Signal>,
    keys: Vec<KeyVars>,
}

impl Engine<'_> {
    fn copy(&mut self, inputs: &[Signal], k: usize) -> Vec<Signal> {
        let nets = encode_locked(&mut self.solver, self.locked, inputs, &self.keys[k]);
        locked_outputs(self.locked, &nets)
    }

    /// Clauses `act → (some output of copies i and j differs)`.
    fn disagree(&mut self, act: Lit, i: &[Signal], j: &[Signal]) {
        let mut d = differences(&mut self.solver, i, j);
        d.push(Signal::Lit(!act));
        clause(&mut self.solver, &d);
    }

    fn agree(&mut self, act: Lit, i: &[Signal], j: &[Signal]) {
        for d in differences(&mut self.solver, i, j) {
            clause(&mut self.solver, &[Signal::Lit(!act), !d]);
        }
    }

    fn keys_differ(&mut self, act: Lit, i: usize, j: usize) {
        let a: Vec<Signal> = self.keys[i].bits.iter().map(|&l| Signal::Lit(l)).collect();
        let b: Vec<Signal> = self.keys[j].bits.iter().map(|&l| Signal::Lit(l)).collect();
        self.disagree(act, &a, &b);
    }

    fn pin(&mut self, dip: &[bool], response: &[bool]) {
        let ins: Vec<Signal> = dip.iter().map(|&b| Signal::Const(b)).collect();
        for k in 0..self.keys.len() {
            let outs = self.copy(&ins, k);
            for (&o, &r) in outs.iter().zip(response) {
                assert_value(&mut self.solver, o, r);
            }
        }
    }

    fn dip(&self) -> Vec<bool> {
        self.x
            .iter()
            .map(|s| s.value(|l| self.solver.value(l)))
            .collect()
    }
}

pub fn run_attack(
    locked: &LockedCircuit,
    oracle: &mut dyn Oracle,
    limits: &Limits,
    variant: AttackVariant,
) -> Result<AttackResult, AttackError> {
    if oracle.input_width() != locked.inputs().len() || oracle.output_width() != locked.outputs().len() {
        return Err(AttackError::Interface {
            oracle_in: oracle.input_width(),
            oracle_out: oracle.output_width(),
            locked_in: locked.inputs().len(),
            locked_out: locked.outputs().len(),
        });
    }
    let start = Instant::now();
    let deadline = start.checked_add(limits.time_budget);
    let mut solver = Cadical::new(deadline);
    let x: Vec<Signal> = locked.inputs().iter().map(|_| Signal::fresh(&mut solver)).collect();
    let copies = match variant {
        AttackVariant::SingleDip => 2,
        AttackVariant::DoubleDip => 4,
    };
    let keys = (0..copies).map(|_| KeyVars::declare(&mut solver, locked)).collect();
    let mut e = Engine { locked, solver, x, keys };

    let x = e.x.clone();
    let outs: Vec<Vec<Signal>> = (0..copies).map(|k| e.copy(&x, k)).collect();
    let act1 = e.solver.new_var();
    e.disagree(act1, &outs[0], &outs[1]);
    // Two pairs, each internally disagreeing, agreeing across pairs, with
    // distinct keys across pairs: any response rules out a whole pair.
    let act2 = if copies == 4 {
        let act2 = e.solver.new_var();
        e.disagree(act2, &outs[0], &outs[1]);
        e.disagree(act2, &outs[2], &outs[3]);
        e.agree(act2, &outs[0], &outs[2]);
        e.agree(act2, &outs[1], &outs[3]);
        e.keys_differ(act2, 0, 2);
        e.keys_differ(act2, 1, 3);
        Some(act2)
    } else {
        None
    };

    let mut dips = 0usize;
    let mut double_dips = 0usize;
    let mut two_pair = act2.is_some();
    let status = loop {
        if e.solver.num_vars() > limits.max_vars {
            break Some(AttackStatus::SolverFailure);
        }
        let (result, from_pair) = if two_pair {
            let a = act2.expect("four copies");
            (e.solver.solve(&[!act1, a]), true)
        } else {
            let mut assume = vec![act1];
            assume.extend(act2.map(|a| !a));
            (e.solver.solve(&assume), false)
        };
        match result {
            SolveResult::Unknown => break Some(AttackStatus::Timeout),
            SolveResult::Unsat if from_pair => two_pair = false,
            SolveResult::Unsat => break None,
            SolveResult::Sat => {
                if limits.dip_budget.is_some_and(|b| dips >= b) {
                    break Some(AttackStatus::Timeout);
                }
                let dip = e.dip();
                let response = oracle.query(&dip)?;
                dips += 1;
                double_dips += from_pair as usize;
                e.pin(&dip, &response);
            }
        }
    };

    let mut key = None;
    let status = match status {
        Some(s) => s,
        None => {
            let mut assume = vec![!act1];
            assume.extend(act2.map(|a| !a));
            match e.solver.solve(&assume) {
                SolveResult::Sat => {
                    let bits = e.keys[0].bits.iter().map(|&l| e.solver.value(l)).collect();
                    key = Some(Key::new(bits));
                    AttackStatus::KeyRecovered
                }
                SolveResult::Unsat => AttackStatus::Inconsistent,
                SolveResult::Unknown => AttackStatus::Timeout,
            }
        }
    };
    Ok(AttackResult {
        status,
        key,
        dips,
        seconds: start.elapsed().as_secs_f64(),
        verified: Verdict::Unchecked,
        variant,
        double_dips,
        solver: e.solver.identity(),
        vars: e.solver.num_vars(),
        clauses: e.solver.num_clauses(),
    })
}
