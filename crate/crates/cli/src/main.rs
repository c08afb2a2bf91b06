// SPDX-License-Identifier: Apache-2.0
//! `gshe-camo` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 solver failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gshe_camo::camo::{camouflage, select_gates, FunctionSet, Key, LockedCircuit, SelectionRecord};
use gshe_camo::campaign::{run_campaign, CampaignConfig};
use gshe_camo::device::{device_metrics, DeviceParams};
use gshe_camo::netlist::{parse_bench, write_bench, Circuit};
use gshe_camo::oracle::{pattern_accuracy, ChipOracle, Oracle};
use gshe_camo::sat::{encode::tseitin, run_attack, verify_key, AttackStatus, AttackVariant, Limits, Verdict};
use gshe_camo::timing::{analyze, hybrid_replace, DelayModel, ReplacePolicy};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gshe-camo", version, about = "Camouflage netlists with polymorphic GSHE gates and attack them")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Solver time budget in seconds.
    #[arg(long = "timeout-s", global = true)]
    timeout_s: Option<f64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    SingleDip,
    DoubleDip,
}

impl From<VariantArg> for AttackVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::SingleDip => AttackVariant::SingleDip,
            VariantArg::DoubleDip => AttackVariant::DoubleDip,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Select gates and write the keyed netlist plus a separate secret key file.
    Camouflage {
        bench: PathBuf,
        #[arg(long, default_value = "sinw4")]
        set: String,
        #[arg(long, default_value_t = 0.1)]
        fraction: f64,
        /// Reuse a selection (e.g. from `hybridize`) instead of sampling one.
        #[arg(long)]
        selection: Option<PathBuf>,
    },
    /// Attack a keyed netlist using the original netlist as a black-box chip.
    Attack {
        locked: PathBuf,
        /// Netlist the oracle chip evaluates.
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, value_enum, default_value = "single-dip")]
        variant: VariantArg,
        /// Per-gate accuracy of the camouflaged gates inside the chip.
        #[arg(long, default_value_t = 1.0)]
        accuracy: f64,
        #[arg(long)]
        dip_budget: Option<usize>,
        /// Write the oracle query log as JSON lines.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write one copy of the keyed netlist as DIMACS CNF.
        #[arg(long)]
        dimacs: Option<PathBuf>,
    },
    /// Check a key against the reference netlist; exit 1 if inequivalent.
    Verify {
        locked: PathBuf,
        /// Key file written by `camouflage` or `attack`, or a `len:hex` string.
        #[arg(long)]
        key: String,
        #[arg(long)]
        reference: PathBuf,
    },
    /// Query a (possibly noisy) chip with random patterns.
    OracleSim {
        bench: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        accuracy: f64,
        /// Noisy gate ids; all eligible gates when absent.
        #[arg(long, value_delimiter = ',')]
        gates: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1000)]
        queries: usize,
    },
    /// Power, energy, conductances and delay statistics as JSON.
    DeviceMetrics {
        /// JSON overrides of the device parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Static timing report.
    Sta {
        bench: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Replace off-critical gates by GSHE gates; writes a selection record.
    Hybridize {
        bench: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        max_count: Option<usize>,
        #[arg(long)]
        target_fraction: Option<f64>,
    },
    /// Run an experiment matrix from a JSON config.
    Campaign {
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

/// Contents of the secret key file. Only `camouflage` writes it and only
/// `verify` reads it.
#[derive(Serialize, Deserialize)]
struct KeyFile {
    benchmark: String,
    key: Key,
}

#[derive(Serialize)]
struct AttackReport<'a> {
    benchmark: &'a str,
    set: &'a str,
    fraction: f64,
    seed: u64,
    accuracy: f64,
    #[serde(flatten)]
    result: &'a gshe_camo::sat::AttackResult,
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("bench");
    let c = parse_bench(&text, name).with_context(|| format!("parsing {}", path.display()))?;
    Ok(c.strip_flip_flops())
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}

fn limits(common: &Common, dip_budget: Option<usize>) -> Limits {
    let mut l = common.timeout_s.map_or_else(Limits::default, Limits::with_time);
    l.dip_budget = dip_budget;
    l
}

fn run(cli: Cli) -> Result<ExitCode> {
    let common = &cli.common;
    let out = common.out.as_deref();
    match cli.cmd {
        Cmd::Camouflage { bench, set, fraction, selection } => {
            let c = load_circuit(&bench)?;
            let set = FunctionSet::preset(&set)?;
            let sel = match selection {
                Some(p) => load_json::<SelectionRecord>(&p)?,
                None => select_gates(&c, fraction, common.seed)?,
            };
            let cam = camouflage(&c, &sel, &set)?;
            let dir = out.unwrap_or(Path::new("."));
            fs::create_dir_all(dir)?;
            fs::write(dir.join("locked.json"), serde_json::to_string_pretty(&cam.locked)?)?;
            fs::write(dir.join("selection.json"), serde_json::to_string_pretty(&sel)?)?;
            fs::write(dir.join("reference.bench"), write_bench(&c))?;
            let secret = KeyFile {
                benchmark: c.name().to_string(),
                key: cam.correct_key,
            };
            fs::write(dir.join("key.secret.json"), serde_json::to_string_pretty(&secret)?)?;
            println!(
                "{}",
                json!({"benchmark": c.name(), "set": set.name(), "selected": sel.gate_ids.len(),
                       "key_bits": cam.locked.key_len(), "gates_digest": sel.digest()})
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Attack { locked, oracle, variant, accuracy, dip_budget, log, dimacs } => {
            let locked: LockedCircuit = load_json(&locked)?;
            locked.validate()?;
            let chip = load_circuit(&oracle)?;
            if let Some(p) = dimacs {
                fs::write(&p, tseitin(&locked, 0).cnf.to_dimacs())?;
            }
            let mut o = ChipOracle::uniform(chip, &locked.selection.gate_ids, accuracy, common.seed)?;
            let r = run_attack(&locked, &mut o, &limits(common, dip_budget), variant.into())?;
            if let Some(p) = log {
                o.export_jsonl(fs::File::create(&p)?)?;
            }
            let report = AttackReport {
                benchmark: &locked.benchmark,
                set: locked.set.name(),
                fraction: locked.selection.fraction,
                seed: common.seed,
                accuracy,
                result: &r,
            };
            emit(out, &serde_json::to_string_pretty(&report)?)?;
            Ok(if r.status == AttackStatus::SolverFailure {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            })
        }
        Cmd::Verify { locked, key, reference } => {
            let locked: LockedCircuit = load_json(&locked)?;
            let reference = load_circuit(&reference)?;
            let key = if Path::new(&key).exists() {
                let v: serde_json::Value = load_json(Path::new(&key))?;
                let hex = v["key"].as_str().context("key file has no `key` string")?;
                Key::from_hex(hex)?
            } else {
                Key::from_hex(&key)?
            };
            let verdict = verify_key(&locked, &key, &reference)?;
            emit(out, &json!({"verified": verdict}).to_string())?;
            Ok(match verdict {
                Verdict::Equivalent => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            })
        }
        Cmd::OracleSim { bench, accuracy, gates, queries } => {
            let c = load_circuit(&bench)?;
            let gates = gates.unwrap_or_else(|| gshe_camo::camo::eligible_gates(&c));
            let mut o = ChipOracle::uniform(c.clone(), &gates, accuracy, common.seed)?;
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            let n = o.input_width();
            for _ in 0..queries {
                let x: Vec<bool> = (0..n).map(|_| rng.next_u32() & 1 == 1).collect();
                o.query(&x)?;
            }
            let mismatches = o
                .replay()
                .iter()
                .filter(|q| c.evaluate(&q.input).expect("width") != q.output)
                .count();
            if let Some(p) = out {
                o.export_jsonl(fs::File::create(p)?)?;
            }
            let map: BTreeMap<usize, f64> = gates.iter().map(|&g| (g, accuracy)).collect();
            let fresh = pattern_accuracy(&c, &map, common.seed, queries.max(1))?;
            eprintln!(
                "{}",
                json!({"queries": queries, "noisy_gates": gates.len(), "per_gate_accuracy": accuracy,
                       "pattern_accuracy": 1.0 - mismatches as f64 / queries.max(1) as f64,
                       "pattern_accuracy_fresh": fresh})
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::DeviceMetrics { params, samples } => {
            let p = match params {
                Some(path) => load_json::<DeviceParams>(&path)?,
                None => DeviceParams::default(),
            };
            let m = device_metrics(&p, samples, common.seed)?;
            emit(out, &serde_json::to_string_pretty(&m)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sta { bench, model } => {
            let c = load_circuit(&bench)?;
            let model = match model {
                Some(p) => load_json(&p)?,
                None => DelayModel::default(),
            };
            let r = analyze(&c, &model)?;
            let path: Vec<&str> = r.critical_path.iter().map(|&g| c.net_name(c.gate(g).output)).collect();
            let zero = r.slack_fs.iter().filter(|&&s| s == 0).count();
            emit(
                out,
                &serde_json::to_string_pretty(&json!({
                    "benchmark": c.name(), "gates": c.gates().len(),
                    "critical_ns": r.critical_fs as f64 * 1e-6,
                    "critical_path": path, "zero_slack_gates": zero,
                    "max_slack_ns": r.slack_fs.iter().max().copied().unwrap_or(0) as f64 * 1e-6,
                }))?,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Hybridize { bench, model, max_count, target_fraction } => {
            let c = load_circuit(&bench)?;
            let model = match model {
                Some(p) => load_json(&p)?,
                None => DelayModel::default(),
            };
            let h = hybrid_replace(&c, &model, ReplacePolicy { max_count, target_fraction })?;
            if let Some(p) = out {
                fs::write(p, serde_json::to_string_pretty(&h.selection)?)?;
            }
            println!(
                "{}",
                json!({"benchmark": c.name(), "replaced": h.selection.gate_ids.len(),
                       "eligible": h.eligible, "replaced_fraction": h.replaced_fraction(),
                       "critical_before_ns": h.before.critical_fs as f64 * 1e-6,
                       "critical_after_ns": h.after.critical_fs as f64 * 1e-6})
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Campaign { config, workers } => {
            let mut cfg: CampaignConfig = load_json(&config)?;
            if workers.is_some() {
                cfg.workers = workers;
            }
            if let Some(o) = out {
                cfg.out_dir = o.to_path_buf();
            }
            if let Some(t) = common.timeout_s {
                cfg.time_budget_s = t;
            }
            let s = run_campaign(&cfg)?;
            eprintln!(
                "{} rows ({} resumed), {} solver failures, {} inequivalent keys -> {}",
                s.rows.len(),
                s.resumed,
                s.solver_failures,
                s.inequivalent,
                cfg.out_dir.join(gshe_camo::campaign::RESULTS).display()
            );
            Ok(if s.solver_failures > 0 {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
