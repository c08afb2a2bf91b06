// SPDX-License-Identifier: Apache-2.0
//! The bundled benchmark netlists parse, round-trip and behave as described
//! in benchmarks/README.md.

use std::path::PathBuf;

use gshe_camo::netlist::random::{random_circuit, RandomSpec};
use gshe_camo::netlist::{isomorphic, parse_bench, write_bench, Circuit, GateKind};
use gshe_camo::sat::{equivalent, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn load(name: &str) -> Circuit {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks").join(format!("{name}.bench"));
    let text = std::fs::read_to_string(&path).unwrap();
    parse_bench(&text, name).unwrap()
}

#[test]
fn every_fixture_parses() {
    let expect = [
        ("c432", 36, 7),
        ("c432g", 36, 7),
        ("c880", 60, 26),
        ("c7552", 207, 108),
        ("s27", 4, 1),
        ("s38584", 12, 278),
        ("ex1010", 10, 10),
    ];
    for (name, pi, po) in expect {
        let c = load(name);
        assert_eq!((c.inputs().len(), c.outputs().len()), (pi, po), "{name}");
        assert!(!c.gates().is_empty());
    }
}

#[test]
fn c7552_round_trips() {
    let c = load("c7552");
    let again = parse_bench(&write_bench(&c), "c7552").unwrap();
    assert!(isomorphic(&c, &again));
    assert_eq!(again.gates().len(), c.gates().len());
}

#[test]
fn sequential_fixtures_strip_to_combinational() {
    for name in ["s27", "s38584"] {
        let c = load(name);
        let ff = c.num_flip_flops();
        assert!(ff > 0 && !c.is_combinational());
        let s = c.strip_flip_flops();
        assert!(s.is_combinational(), "{name}");
        assert_eq!(s.num_flip_flops(), 0);
        assert_eq!(s.inputs().len(), c.inputs().len() + ff, "{name}");
        assert_eq!(s.outputs().len(), c.outputs().len() + ff, "{name}");
        assert_eq!(s.gates().len(), c.gates().len() - ff);
    }
    assert_eq!(load("s38584").num_flip_flops(), 1159);
}

#[test]
fn synthesized_c432_matches_original() {
    let (a, b) = (load("c432"), load("c432g"));
    assert!(a.gates().iter().any(|g| g.kind == GateKind::Xor));
    assert!(b
        .gates()
        .iter()
        .all(|g| matches!(g.kind, GateKind::Nand | GateKind::Nor | GateKind::Inv | GateKind::Buf)));
    assert_eq!(equivalent(&a, &b), Verdict::Equivalent);
}

#[test]
fn ex1010_stand_in_regenerates() {
    let mut spec = RandomSpec::new(10, 10, 500);
    spec.kinds = vec![GateKind::And, GateKind::Nand, GateKind::Or, GateKind::Nor, GateKind::Inv, GateKind::Buf];
    let c = random_circuit(&mut ChaCha8Rng::seed_from_u64(1), &spec, "ex1010");
    assert!(isomorphic(&c, &load("ex1010")));
}
