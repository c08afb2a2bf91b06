// SPDX-License-Identifier: Apache-2.0
//! ISCAS-style BENCH reader and writer.

use std::fmt::Write;

use super::{Circuit, CircuitBuilder, GateKind, NetId, NetlistError};

/// Parses BENCH text. Gates with more than two inputs are decomposed into
/// balanced two-input trees; the root carries any output inversion.
pub fn parse_bench(text: &str, name: &str) -> Result<Circuit, NetlistError> {
    let mut b = CircuitBuilder::new(name);
    let mut defined: Vec<(usize, String)> = Vec::new();
    let mut pending: Vec<(usize, GateKind, Vec<String>, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |msg: &str| NetlistError::Syntax {
            line: line_no,
            msg: msg.to_string(),
        };
        if let Some((lhs, rhs)) = line.split_once('=') {
            let out = lhs.trim();
            if !valid_name(out) {
                return Err(syntax("invalid net name on left-hand side"));
            }
            let (kind_name, args) = call(rhs.trim()).ok_or_else(|| syntax("expected KIND(args)"))?;
            let kind = GateKind::from_name(kind_name).ok_or_else(|| NetlistError::UnsupportedKind {
                line: line_no,
                kind: kind_name.to_string(),
            })?;
            let args = split_args(args).ok_or_else(|| syntax("invalid argument list"))?;
            defined.push((line_no, out.to_string()));
            pending.push((line_no, kind, args, out.to_string()));
        } else {
            let (kw, args) = call(line).ok_or_else(|| syntax("expected INPUT(..), OUTPUT(..) or assignment"))?;
            let args = split_args(args).ok_or_else(|| syntax("invalid argument list"))?;
            if args.len() != 1 {
                return Err(syntax("INPUT/OUTPUT take exactly one net"));
            }
            match kw.to_ascii_uppercase().as_str() {
                "INPUT" => {
                    defined.push((line_no, args[0].clone()));
                    b.input(&args[0]);
                }
                "OUTPUT" => {
                    b.output(&args[0]);
                }
                _ => return Err(syntax("unknown declaration")),
            }
        }
    }

    // Declared names first so every referenced name is known before any
    // decomposition helper nets are minted.
    let mut seen = std::collections::HashSet::new();
    for (_, n) in &defined {
        if !seen.insert(n.as_str()) {
            return Err(NetlistError::DuplicateDefinition(n.clone()));
        }
    }
    for (_, _, args, out) in &pending {
        b.net(out);
        for a in args {
            if !seen.contains(a.as_str()) {
                return Err(NetlistError::UndefinedNet(a.clone()));
            }
        }
    }

    for (_, kind, args, out) in pending {
        let fanin: Vec<NetId> = args.iter().map(|a| b.net(a)).collect();
        let out = b.net(&out);
        add_decomposed(&mut b, kind, fanin, out);
    }
    b.build()
}

fn add_decomposed(b: &mut CircuitBuilder, kind: GateKind, fanin: Vec<NetId>, out: NetId) {
    let wide = matches!(
        kind,
        GateKind::And | GateKind::Nand | GateKind::Or | GateKind::Nor | GateKind::Xor | GateKind::Xnor
    );
    if !wide || fanin.len() <= 2 {
        // Arity errors surface from the builder.
        b.gate(kind, &fanin, out);
        return;
    }
    let inner = match kind {
        GateKind::Nand => GateKind::And,
        GateKind::Nor => GateKind::Or,
        GateKind::Xnor => GateKind::Xor,
        k => k,
    };
    let base = b.names[out.index()].clone();
    let mut layer = fanin;
    while layer.len() > 2 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        for pair in layer.chunks(2) {
            if pair.len() == 2 {
                let t = b.fresh_net(&format!("{base}__t"));
                b.gate(inner, pair, t);
                next.push(t);
            } else {
                next.push(pair[0]);
            }
        }
        layer = next;
    }
    b.gate(kind, &layer, out);
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | ',' | '=' | '#'))
}

fn call(s: &str) -> Option<(&str, &str)> {
    let open = s.find('(')?;
    let close = s.rfind(')')?;
    if close < open || !s[close + 1..].trim().is_empty() {
        return None;
    }
    let head = s[..open].trim();
    if head.is_empty() || !head.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    Some((head, &s[open + 1..close]))
}

fn split_args(s: &str) -> Option<Vec<String>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',')
        .map(|a| {
            let a = a.trim();
            valid_name(a).then(|| a.to_string())
        })
        .collect()
}

pub fn write_bench(circuit: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "# {}", circuit.name()).unwrap();
    writeln!(
        out,
        "# {} inputs, {} outputs, {} gates",
        circuit.inputs().len(),
        circuit.outputs().len(),
        circuit.gates().len()
    )
    .unwrap();
    for &i in circuit.inputs() {
        writeln!(out, "INPUT({})", circuit.net_name(i)).unwrap();
    }
    for &o in circuit.outputs() {
        writeln!(out, "OUTPUT({})", circuit.net_name(o)).unwrap();
    }
    for g in circuit.gates() {
        let args: Vec<&str> = g.fanin.iter().map(|&n| circuit.net_name(n)).collect();
        writeln!(
            out,
            "{} = {}({})",
            circuit.net_name(g.output),
            g.kind.bench_name(),
            args.join(", ")
        )
        .unwrap();
    }
    out
}
