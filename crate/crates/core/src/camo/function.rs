// SPDX-License-Identifier: Apache-2.0
//! Two-input truth tables and the function sets a primitive can cloak.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::CamoError;
use crate::netlist::GateKind;

/// A two-input Boolean function; bit `2a + b` holds `f(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TruthTable(u8);

impl TruthTable {
    pub const FALSE: TruthTable = TruthTable(0);
    pub const NOR: TruthTable = TruthTable(1);
    pub const INV_A: TruthTable = TruthTable(3);
    pub const INV_B: TruthTable = TruthTable(5);
    pub const XOR: TruthTable = TruthTable(6);
    pub const NAND: TruthTable = TruthTable(7);
    pub const AND: TruthTable = TruthTable(8);
    pub const XNOR: TruthTable = TruthTable(9);
    pub const BUF_B: TruthTable = TruthTable(10);
    pub const BUF_A: TruthTable = TruthTable(12);
    pub const OR: TruthTable = TruthTable(14);
    pub const TRUE: TruthTable = TruthTable(15);

    pub fn new(id: u8) -> Option<TruthTable> {
        (id < 16).then_some(TruthTable(id))
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = TruthTable> {
        (0..16).map(TruthTable)
    }

    /// Row `2a + b` of the table.
    pub fn row(self, row: usize) -> bool {
        self.0 >> row & 1 == 1
    }

    pub fn eval(self, a: bool, b: bool) -> bool {
        self.row(2 * a as usize + b as usize)
    }

    pub fn eval_word(self, a: u64, b: u64) -> u64 {
        let rows = [!a & !b, !a & b, a & !b, a & b];
        rows.iter()
            .enumerate()
            .filter(|&(r, _)| self.row(r))
            .fold(0, |acc, (_, &m)| acc | m)
    }

    pub fn complement(self) -> TruthTable {
        TruthTable(!self.0 & 0xF)
    }

    /// The function seen when both inputs carry the same signal: `(f(0,0), f(1,1))`.
    pub fn tied(self) -> (bool, bool) {
        (self.row(0), self.row(3))
    }

    pub fn depends_on_a(self) -> bool {
        self.row(0) != self.row(2) || self.row(1) != self.row(3)
    }

    pub fn depends_on_b(self) -> bool {
        self.row(0) != self.row(1) || self.row(2) != self.row(3)
    }

    /// Table of a netlist gate. One-input gates embed as functions of `A`.
    pub fn of_kind(kind: GateKind) -> Option<TruthTable> {
        Some(match kind {
            GateKind::And => Self::AND,
            GateKind::Nand => Self::NAND,
            GateKind::Or => Self::OR,
            GateKind::Nor => Self::NOR,
            GateKind::Xor => Self::XOR,
            GateKind::Xnor => Self::XNOR,
            GateKind::Inv => Self::INV_A,
            GateKind::Buf => Self::BUF_A,
            GateKind::Const0 => Self::FALSE,
            GateKind::Const1 => Self::TRUE,
            GateKind::Dff => return None,
        })
    }

    pub fn label(self) -> &'static str {
        const LABELS: [&str; 16] = [
            "FALSE", "NOR", "NOT_A_AND_B", "INV_A", "A_AND_NOT_B", "INV_B", "XOR", "NAND", "AND", "XNOR",
            "BUF_B", "NOT_A_OR_B", "BUF_A", "A_OR_NOT_B", "OR", "TRUE",
        ];
        LABELS[self.0 as usize]
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.label(), self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArityClass {
    OneInput,
    TwoInput,
    Mixed,
}

/// Ordered, duplicate-free list of functions a camouflaged cell may implement.
/// A cell's key code is the index into `members`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSet {
    name: String,
    members: Vec<TruthTable>,
}

impl FunctionSet {
    /// Preset names in increasing order of expected attack effort.
    pub const PRESETS: [&'static str; 7] = ["invbuf2", "lookalike3", "quad4", "sinw4", "lut6", "dwm8", "gshe16"];

    pub fn new(name: impl Into<String>, members: Vec<TruthTable>) -> Result<FunctionSet, CamoError> {
        let name = name.into();
        if members.is_empty() {
            return Err(CamoError::InvalidFunctionSet(format!("`{name}` has no members")));
        }
        for (i, m) in members.iter().enumerate() {
            if members[..i].contains(m) {
                return Err(CamoError::InvalidFunctionSet(format!("`{name}` lists {m} twice")));
            }
        }
        Ok(FunctionSet { name, members })
    }

    pub fn preset(name: &str) -> Result<FunctionSet, CamoError> {
        use TruthTable as T;
        let members = match name {
            "invbuf2" => vec![T::INV_A, T::BUF_A],
            "lookalike3" => vec![T::NAND, T::NOR, T::XOR],
            "quad4" => vec![T::AND, T::OR, T::NAND, T::NOR],
            "sinw4" => vec![T::NAND, T::NOR, T::XOR, T::XNOR],
            "lut6" => vec![T::NAND, T::NOR, T::XOR, T::XNOR, T::AND, T::OR],
            "dwm8" => vec![T::NAND, T::NOR, T::XOR, T::XNOR, T::AND, T::OR, T::INV_A, T::BUF_A],
            "gshe16" => T::all().collect(),
            other => return Err(CamoError::UnknownPreset(other.to_string())),
        };
        FunctionSet::new(name, members)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &[TruthTable] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, t: TruthTable) -> Option<usize> {
        self.members.iter().position(|&m| m == t)
    }

    pub fn contains(&self, t: TruthTable) -> bool {
        self.position(t).is_some()
    }

    /// Key bits per cell: `ceil(log2 |members|)`.
    pub fn key_width(&self) -> usize {
        key_width(self.members.len())
    }

    pub fn arity_class(&self) -> ArityClass {
        let one = |t: &TruthTable| !(t.depends_on_a() && t.depends_on_b());
        if self.members.iter().all(one) {
            ArityClass::OneInput
        } else if self.members.iter().any(one) {
            ArityClass::Mixed
        } else {
            ArityClass::TwoInput
        }
    }

    /// Whether gates outside the set can still be protected by a keyed
    /// INV/BUF stage inserted after them.
    pub fn supports_series_insertion(&self) -> bool {
        self.contains(TruthTable::INV_A) && self.contains(TruthTable::BUF_A)
    }
}

pub fn key_width(members: usize) -> usize {
    assert!(members > 0);
    (usize::BITS - (members - 1).leading_zeros()) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convention_ids() {
        let expect = [
            (GateKind::Nand, 7),
            (GateKind::And, 8),
            (GateKind::Xor, 6),
            (GateKind::Xnor, 9),
            (GateKind::Or, 14),
            (GateKind::Nor, 1),
            (GateKind::Const0, 0),
            (GateKind::Const1, 15),
            (GateKind::Buf, 12),
            (GateKind::Inv, 3),
        ];
        for (k, id) in expect {
            assert_eq!(TruthTable::of_kind(k).unwrap().id(), id, "{k}");
        }
        assert_eq!(TruthTable::BUF_B.id(), 10);
        assert_eq!(TruthTable::INV_B.id(), 5);
    }

    #[test]
    fn table_matches_gate_semantics() {
        for k in GateKind::ALL.into_iter().filter(|k| k.is_combinational()) {
            let t = TruthTable::of_kind(k).unwrap();
            for a in [false, true] {
                for b in [false, true] {
                    assert_eq!(t.eval(a, b), k.eval(a, b), "{k} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn word_eval_matches_scalar() {
        for t in TruthTable::all() {
            let w = t.eval_word(0b1100, 0b1010);
            for lane in 0..4 {
                let (a, b) = (0b1100 >> lane & 1 == 1, 0b1010 >> lane & 1 == 1);
                assert_eq!(w >> lane & 1 == 1, t.eval(a, b));
            }
        }
    }

    #[test]
    fn key_widths() {
        for (k, w) in [(1, 0), (2, 1), (3, 2), (4, 2), (6, 3), (8, 3), (16, 4)] {
            assert_eq!(key_width(k), w, "k={k}");
        }
    }

    #[test]
    fn presets_are_valid_and_sized() {
        let sizes = [2, 3, 4, 4, 6, 8, 16];
        for (name, size) in FunctionSet::PRESETS.iter().zip(sizes) {
            assert_eq!(FunctionSet::preset(name).unwrap().len(), size, "{name}");
        }
    }

    #[test]
    fn duplicate_members_rejected() {
        assert!(FunctionSet::new("dup", vec![TruthTable::AND, TruthTable::AND]).is_err());
        assert!(FunctionSet::new("empty", vec![]).is_err());
    }

    #[test]
    fn arity_classes() {
        assert_eq!(FunctionSet::preset("invbuf2").unwrap().arity_class(), ArityClass::OneInput);
        assert_eq!(FunctionSet::preset("lut6").unwrap().arity_class(), ArityClass::TwoInput);
        assert_eq!(FunctionSet::preset("dwm8").unwrap().arity_class(), ArityClass::Mixed);
    }
}
