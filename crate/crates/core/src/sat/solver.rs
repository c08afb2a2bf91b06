// SPDX-License-Identifier: Apache-2.0
//! Incremental solver contract and its CaDiCaL backing.

use std::fmt::Write;
use std::ops::Not;
use std::time::Instant;

/// DIMACS-style literal: variable `v >= 1` as `v` or `-v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn positive(var: u32) -> Lit {
        assert!(var >= 1 && var <= i32::MAX as u32);
        Lit(var as i32)
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_negated(self) -> bool {
        self.0 < 0
    }

    pub fn dimacs(self) -> i32 {
        self.0
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

/// Anything clauses can be written into.
pub trait ClauseSink {
    fn new_var(&mut self) -> Lit;
    fn add_clause(&mut self, lits: &[Lit]);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
    /// Interrupted (deadline) or otherwise undecided.
    Unknown,
}

/// Declare variables, add clauses, solve under assumptions, read the model.
pub trait SatSolver: ClauseSink {
    fn solve(&mut self, assumptions: &[Lit]) -> SolveResult;
    /// Model value after a `Sat` answer.
    fn value(&self, lit: Lit) -> bool;
    fn num_vars(&self) -> usize;
    fn num_clauses(&self) -> usize;
    fn identity(&self) -> String;
}

struct Deadline(Option<Instant>);

impl cadical::Callbacks for Deadline {
    fn terminate(&mut self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }
}

pub struct Cadical {
    inner: cadical::Solver<Deadline>,
    vars: i32,
    clauses: usize,
}

impl Cadical {
    pub fn new(deadline: Option<Instant>) -> Cadical {
        let mut inner = cadical::Solver::<Deadline>::new();
        inner.set_callbacks(Some(Deadline(deadline)));
        Cadical {
            inner,
            vars: 0,
            clauses: 0,
        }
    }
}

impl Default for Cadical {
    fn default() -> Self {
        Cadical::new(None)
    }
}

impl ClauseSink for Cadical {
    fn new_var(&mut self) -> Lit {
        self.vars += 1;
        Lit(self.vars)
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        self.clauses += 1;
        self.inner.add_clause(lits.iter().map(|l| l.0));
    }
}

impl SatSolver for Cadical {
    fn solve(&mut self, assumptions: &[Lit]) -> SolveResult {
        match self.inner.solve_with(assumptions.iter().map(|l| l.0)) {
            Some(true) => SolveResult::Sat,
            Some(false) => SolveResult::Unsat,
            None => SolveResult::Unknown,
        }
    }

    fn value(&self, lit: Lit) -> bool {
        self.inner.value(lit.0).unwrap_or(false)
    }

    fn num_vars(&self) -> usize {
        self.vars as usize
    }

    fn num_clauses(&self) -> usize {
        self.clauses
    }

    fn identity(&self) -> String {
        format!("cadical {}", self.inner.signature())
    }
}

/// Recorded clause database, for export and brute-force inspection.
#[derive(Clone, Debug, Default)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// Optional variable names emitted as DIMACS comments.
    pub names: Vec<(u32, String)>,
}

impl ClauseSink for Cnf {
    fn new_var(&mut self) -> Lit {
        self.num_vars += 1;
        Lit(self.num_vars as i32)
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        self.clauses.push(lits.to_vec());
    }
}

impl Cnf {
    /// `assignment[v - 1]` is the value of variable `v`.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|l| assignment[l.var() as usize - 1] != l.is_negated())
        })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        for (v, name) in &self.names {
            writeln!(out, "c {v} {name}").unwrap();
        }
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len()).unwrap();
        for c in &self.clauses {
            for l in c {
                write!(out, "{} ", l.0).unwrap();
            }
            out.push_str("0\n");
        }
        out
    }

    /// Replays the recorded clauses into a solver with a fresh variable range.
    pub fn load_into<S: ClauseSink>(&self, solver: &mut S) -> Vec<Lit> {
        let vars: Vec<Lit> = (0..self.num_vars).map(|_| solver.new_var()).collect();
        let map = |l: &Lit| {
            let v = vars[l.var() as usize - 1];
            if l.is_negated() {
                !v
            } else {
                v
            }
        };
        for c in &self.clauses {
            let mapped: Vec<Lit> = c.iter().map(map).collect();
            solver.add_clause(&mapped);
        }
        vars
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cadical_incremental_with_assumptions() {
        let mut s = Cadical::default();
        let a = s.new_var();
        let b = s.new_var();
        s.add_clause(&[a, b]);
        assert_eq!(s.solve(&[!a]), SolveResult::Sat);
        assert!(s.value(b));
        assert_eq!(s.solve(&[!a, !b]), SolveResult::Unsat);
        s.add_clause(&[!b]);
        assert_eq!(s.solve(&[]), SolveResult::Sat);
        assert!(s.value(a));
        s.add_clause(&[]);
        assert_eq!(s.solve(&[]), SolveResult::Unsat);
    }

    #[test]
    fn expired_deadline_yields_unknown_on_hard_instance() {
        // Pigeonhole 9 into 8 is out of reach for an already-expired budget.
        let mut s = Cadical::new(Some(Instant::now()));
        let (p, h) = (9, 8);
        let x: Vec<Vec<Lit>> = (0..p).map(|_| (0..h).map(|_| s.new_var()).collect()).collect();
        for row in &x {
            s.add_clause(row);
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    s.add_clause(&[!x[a][j], !x[b][j]]);
                }
            }
        }
        assert_eq!(s.solve(&[]), SolveResult::Unknown);
    }

    #[test]
    fn dimacs_export() {
        let mut c = Cnf::default();
        let a = c.new_var();
        let b = c.new_var();
        c.add_clause(&[a, !b]);
        assert_eq!(c.to_dimacs(), "p cnf 2 1\n1 -2 0\n");
        assert!(c.satisfied_by(&[true, true]));
        assert!(!c.satisfied_by(&[false, true]));
    }
}
