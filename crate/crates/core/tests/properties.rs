// SPDX-License-Identifier: Apache-2.0
//! Randomized invariants across netlist, camouflaging, encoding and attack.

use gshe_camo::camo::{camouflage, select_gates, Camouflaged, FunctionSet, Key};
use gshe_camo::netlist::random::{random_circuit, RandomSpec};
use gshe_camo::netlist::{Circuit, GateKind};
use gshe_camo::oracle::ChipOracle;
use gshe_camo::sat::encode::{encode_locked, locked_outputs, KeyVars, Signal};
use gshe_camo::sat::{run_attack, verify_key, AttackStatus, AttackVariant, Cadical, Limits, SatSolver, SolveResult, Verdict};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, inputs: usize, gates: usize, set: &str, fraction: f64) -> Option<(Circuit, Camouflaged)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = RandomSpec::new(inputs, 3, gates);
    if set == "quad4" {
        spec.kinds.retain(|k| !matches!(k, GateKind::Xor | GateKind::Xnor));
    }
    let c = random_circuit(&mut rng, &spec, "p");
    let sel = select_gates(&c, fraction, seed).ok()?;
    let cam = camouflage(&c, &sel, &FunctionSet::preset(set).ok()?).ok()?;
    Some((c, cam))
}

fn random_key(cam: &Camouflaged, rng: &mut ChaCha8Rng) -> Key {
    let mut k = Key::zeros(cam.locked.key_len());
    for cell in cam.locked.cells() {
        k.set_code(cell.key_offset, cell.key_width, rng.random_range(0..cell.members.len()));
    }
    k
}

fn set_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(FunctionSet::PRESETS.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn encoding_agrees_with_simulation(seed in any::<u64>(), set in set_name(), gates in 4usize..40) {
        let Some((_, cam)) = instance(seed, 5, gates, set, 0.5) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
        let key = random_key(&cam, &mut rng);
        let x: Vec<bool> = (0..5).map(|_| rng.random()).collect();

        let mut s = Cadical::default();
        let xs: Vec<Signal> = x.iter().map(|_| Signal::fresh(&mut s)).collect();
        let kv = KeyVars::declare(&mut s, &cam.locked);
        let nets = encode_locked(&mut s, &cam.locked, &xs, &kv);
        let outs = locked_outputs(&cam.locked, &nets);
        let mut assume = Vec::new();
        for (sig, &b) in xs.iter().zip(&x) {
            if let Signal::Lit(l) = *sig {
                assume.push(if b { l } else { !l });
            }
        }
        for (&l, &b) in kv.bits.iter().zip(key.bits()) {
            assume.push(if b { l } else { !l });
        }
        prop_assert_eq!(s.solve(&assume), SolveResult::Sat);
        let got: Vec<bool> = outs.iter().map(|o| o.value(|l| s.value(l))).collect();
        prop_assert_eq!(got, cam.locked.evaluate(&key, &x).unwrap());
    }

    #[test]
    fn correct_key_is_equivalent(seed in any::<u64>(), set in set_name(), inputs in 2usize..12, fraction in 0.05f64..1.0) {
        let Some((c, cam)) = instance(seed, inputs, 30, set, fraction) else { return Ok(()) };
        prop_assert_eq!(verify_key(&cam.locked, &cam.correct_key, &c).unwrap(), Verdict::Equivalent);
    }

    #[test]
    fn attack_recovers_equivalent_key(seed in any::<u64>(), set in set_name(), double in any::<bool>()) {
        let Some((c, cam)) = instance(seed, 6, 25, set, 0.3) else { return Ok(()) };
        let mut oracle = ChipOracle::deterministic(c.clone()).unwrap();
        let variant = if double { AttackVariant::DoubleDip } else { AttackVariant::SingleDip };
        let r = run_attack(&cam.locked, &mut oracle, &Limits::default(), variant).unwrap();
        prop_assert_eq!(r.status, AttackStatus::KeyRecovered);
        let key = r.key.unwrap();
        prop_assert_eq!(verify_key(&cam.locked, &key, &c).unwrap(), Verdict::Equivalent);
    }
}
