// SPDX-License-Identifier: Apache-2.0
//! Experiment matrices: benchmarks × function sets × fractions × seeds.
//!
//! The selection for a (benchmark, fraction, seed) triple is drawn once and
//! shared by every function set. Finished cells are appended to
//! `manifest.jsonl` as they complete, so an interrupted campaign resumes by
//! skipping them; `results.csv` is rewritten in matrix order at the end.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camo::{camouflage, select_gates, CamoError, FunctionSet, SelectionRecord};
use crate::netlist::{parse_bench, Circuit, NetlistError};
use crate::oracle::ChipOracle;
use crate::sat::{run_attack, verify_key, AttackStatus, AttackVariant, Limits, Verdict, DEFAULT_MAX_VARS};

pub const CSV_SCHEMA: &str = "gshe-camo-campaign/v1";
pub const MANIFEST: &str = "manifest.jsonl";
pub const RESULTS: &str = "results.csv";

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid campaign config: {0}")]
    Config(String),
    #[error("cannot read benchmark {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("benchmark {path}: {source}")]
    Parse { path: PathBuf, source: NetlistError },
    #[error("benchmark {path}: {source}")]
    Select { path: PathBuf, source: CamoError },
    #[error("output directory: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn default_sets() -> Vec<String> {
    FunctionSet::PRESETS.iter().map(|s| s.to_string()).collect()
}

fn default_accuracy() -> f64 {
    1.0
}

fn default_time() -> f64 {
    crate::sat::DEFAULT_TIME_BUDGET.as_secs_f64()
}

fn default_max_vars() -> usize {
    DEFAULT_MAX_VARS
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub benchmarks: Vec<PathBuf>,
    #[serde(default = "default_sets")]
    pub sets: Vec<String>,
    pub fractions: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub variant: AttackVariant,
    /// Per-gate accuracy of the camouflaged gates in the oracle; 1 is exact.
    #[serde(default = "default_accuracy")]
    pub accuracy: f64,
    #[serde(default = "default_time")]
    pub time_budget_s: f64,
    #[serde(default)]
    pub dip_budget: Option<usize>,
    #[serde(default = "default_max_vars")]
    pub max_vars: usize,
    #[serde(default = "default_true")]
    pub verify: bool,
    /// Worker threads; machine parallelism when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), CampaignError> {
        let bad = |m: String| Err(CampaignError::Config(m));
        if self.benchmarks.is_empty() {
            return bad("no benchmarks".into());
        }
        if self.sets.is_empty() || self.fractions.is_empty() || self.seeds.is_empty() {
            return bad("sets, fractions and seeds must be nonempty".into());
        }
        for s in &self.sets {
            if FunctionSet::preset(s).is_err() {
                return bad(format!("unknown function set `{s}`"));
            }
        }
        for &f in &self.fractions {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("fraction {f} outside (0, 1]"));
            }
        }
        let mut seen = HashSet::new();
        for s in &self.seeds {
            if !seen.insert(s) {
                return bad(format!("duplicate seed {s}"));
            }
        }
        if !(self.accuracy > 0.0 && self.accuracy <= 1.0) {
            return bad(format!("accuracy {} outside (0, 1]", self.accuracy));
        }
        if !(self.time_budget_s.is_finite() && self.time_budget_s >= 0.0) {
            return bad(format!("time budget {} invalid", self.time_budget_s));
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        Ok(())
    }

    fn limits(&self) -> Limits {
        Limits {
            time_budget: std::time::Duration::from_secs_f64(self.time_budget_s),
            dip_budget: self.dip_budget,
            max_vars: self.max_vars,
        }
    }
}

/// One CSV row. `seconds` is the only column that varies between reruns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema: String,
    pub benchmark: String,
    pub set: String,
    pub set_size: usize,
    pub fraction: f64,
    pub seed: u64,
    pub variant: AttackVariant,
    pub accuracy: f64,
    pub selected: usize,
    pub gates_digest: String,
    pub key_bits: usize,
    /// An attack status, or `incompatible` when the set cannot realize a
    /// selected gate.
    pub status: String,
    pub dips: usize,
    pub double_dips: usize,
    pub seconds: f64,
    pub verified: Verdict,
    pub recovered_key: String,
    pub solver: String,
}

impl ResultRow {
    fn cell_id(&self) -> String {
        cell_id(&self.benchmark, &self.set, self.fraction, self.seed, self.variant, self.accuracy)
    }
}

fn cell_id(bench: &str, set: &str, fraction: f64, seed: u64, variant: AttackVariant, accuracy: f64) -> String {
    format!("{bench}|{set}|{fraction}|{seed}|{variant}|{accuracy}")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CampaignSummary {
    pub rows: Vec<ResultRow>,
    /// Cells skipped because the manifest already held them.
    pub resumed: usize,
    pub solver_failures: usize,
    pub inequivalent: usize,
}

struct Cell {
    index: usize,
    bench: usize,
    set: String,
    fraction: f64,
    seed: u64,
    selection: usize,
}

fn load_benchmark(path: &Path) -> Result<Circuit, CampaignError> {
    let text = fs::read_to_string(path).map_err(|source| CampaignError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("bench");
    let c = parse_bench(&text, name).map_err(|source| CampaignError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(c.strip_flip_flops())
}

fn read_manifest(path: &Path) -> Result<BTreeMap<String, ResultRow>, CampaignError> {
    let mut done = BTreeMap::new();
    if !path.exists() {
        return Ok(done);
    }
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ResultRow>(&line) {
            Ok(row) if row.schema == CSV_SCHEMA => {
                done.insert(row.cell_id(), row);
            }
            Ok(_) => return Err(CampaignError::Manifest(format!("line {}: schema mismatch", i + 1))),
            // A torn last line from an interrupted run is dropped.
            Err(_) => {}
        }
    }
    Ok(done)
}

fn run_cell(cfg: &CampaignConfig, circuit: &Circuit, selection: &SelectionRecord, cell: &Cell) -> ResultRow {
    let set = FunctionSet::preset(&cell.set).expect("validated");
    let mut row = ResultRow {
        schema: CSV_SCHEMA.to_string(),
        benchmark: circuit.name().to_string(),
        set: cell.set.clone(),
        set_size: set.members().len(),
        fraction: cell.fraction,
        seed: cell.seed,
        variant: cfg.variant,
        accuracy: cfg.accuracy,
        selected: selection.gate_ids.len(),
        gates_digest: selection.digest(),
        key_bits: 0,
        status: String::new(),
        dips: 0,
        double_dips: 0,
        seconds: 0.0,
        verified: Verdict::Unchecked,
        recovered_key: String::new(),
        solver: String::new(),
    };
    let cam = match camouflage(circuit, selection, &set) {
        Ok(c) => c,
        Err(CamoError::Incompatible { .. }) => {
            row.status = "incompatible".into();
            return row;
        }
        Err(e) => panic!("camouflage failed on validated input: {e}"),
    };
    // Only the public netlist goes to the attacker.
    let locked = cam.locked;
    row.key_bits = locked.key_len();
    let mut oracle = ChipOracle::uniform(circuit.clone(), &selection.gate_ids, cfg.accuracy, cell.seed)
        .expect("accuracy validated");
    let r = run_attack(&locked, &mut oracle, &cfg.limits(), cfg.variant).expect("widths agree by construction");
    row.status = r.status.to_string();
    row.dips = r.dips;
    row.double_dips = r.double_dips;
    row.seconds = r.seconds;
    row.solver = r.solver;
    if let Some(key) = &r.key {
        row.recovered_key = key.to_hex();
        if cfg.verify {
            row.verified = verify_key(&locked, key, circuit).expect("recovered keys are valid");
        }
    }
    row
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignSummary, CampaignError> {
    cfg.validate()?;
    let circuits: Vec<Circuit> = cfg.benchmarks.iter().map(|p| load_benchmark(p)).collect::<Result<_, _>>()?;
    let mut selections = Vec::new();
    let mut cells = Vec::new();
    for (b, c) in circuits.iter().enumerate() {
        for &fraction in &cfg.fractions {
            for &seed in &cfg.seeds {
                let sel = select_gates(c, fraction, seed).map_err(|source| CampaignError::Select {
                    path: cfg.benchmarks[b].clone(),
                    source,
                })?;
                selections.push(sel);
                for set in &cfg.sets {
                    cells.push(Cell {
                        index: cells.len(),
                        bench: b,
                        set: set.clone(),
                        fraction,
                        seed,
                        selection: selections.len() - 1,
                    });
                }
            }
        }
    }

    fs::create_dir_all(&cfg.out_dir)?;
    let manifest_path = cfg.out_dir.join(MANIFEST);
    let done = read_manifest(&manifest_path)?;
    let id_of = |c: &Cell| cell_id(circuits[c.bench].name(), &c.set, c.fraction, c.seed, cfg.variant, cfg.accuracy);
    let todo: Vec<&Cell> = cells.iter().filter(|c| !done.contains_key(&id_of(c))).collect();
    let resumed = cells.len() - todo.len();

    let mut manifest = OpenOptions::new().create(true).append(true).open(&manifest_path)?;
    let (tx, rx) = mpsc::channel::<(usize, ResultRow)>();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| CampaignError::Config(e.to_string()))?;
    let mut fresh: BTreeMap<usize, ResultRow> = BTreeMap::new();
    let mut write_err = None;
    std::thread::scope(|scope| {
        let circuits = &circuits;
        let selections = &selections;
        let todo = &todo;
        let pool = &pool;
        scope.spawn(move || {
            pool.install(|| {
                todo.par_iter().for_each_with(tx, |tx, cell| {
                    let row = run_cell(cfg, &circuits[cell.bench], &selections[cell.selection], cell);
                    let _ = tx.send((cell.index, row));
                });
            });
        });
        for (index, row) in rx {
            let line = serde_json::to_string(&row).expect("row serializes");
            if write_err.is_none() {
                if let Err(e) = writeln!(manifest, "{line}").and_then(|_| manifest.flush()) {
                    write_err = Some(e);
                }
            }
            fresh.insert(index, row);
        }
    });
    if let Some(e) = write_err {
        return Err(e.into());
    }

    let rows: Vec<ResultRow> = cells
        .iter()
        .map(|c| fresh.remove(&c.index).unwrap_or_else(|| done[&id_of(c)].clone()))
        .collect();
    let mut w = csv::Writer::from_path(cfg.out_dir.join(RESULTS))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    let solver_failures = rows.iter().filter(|r| r.status == AttackStatus::SolverFailure.to_string()).count();
    let inequivalent = rows.iter().filter(|r| r.verified == Verdict::Inequivalent).count();
    Ok(CampaignSummary {
        rows,
        resumed,
        solver_failures,
        inequivalent,
    })
}
