//! Running every (instance, setting) pair and aggregating the results.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{load_instance, Instance};
use crate::solver::{solve, ConflictMode, Settings, SolveStatus};

use super::shifted_geo_mean;

/// Shift for the time mean, in seconds.
pub const TIME_SHIFT: f64 = 1.0;
/// Shift for the node mean.
pub const NODE_SHIFT: f64 = 100.0;
/// Lower time thresholds of the `[t, tilim]` brackets.
pub const DEFAULT_BRACKETS: [f64; 3] = [0.0, 0.1, 1.0];

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// The first setting is the baseline for the quotients.
    pub settings: Vec<ConflictMode>,
    pub time_limit: Option<f64>,
    pub node_limit: Option<u64>,
    pub seed: u64,
    pub brackets: Vec<f64>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            settings: ConflictMode::ALL.to_vec(),
            time_limit: None,
            node_limit: None,
            seed: 0,
            brackets: DEFAULT_BRACKETS.to_vec(),
            threads: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("no settings given")]
    NoSettings,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("cannot read corpus directory {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// One solver run. Unreadable instances get a single row with status `error`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub instance: String,
    pub setting: String,
    pub status: String,
    pub objective: Option<f64>,
    pub time_s: f64,
    pub nodes: u64,
    pub confs_glb: u64,
    pub confs_loc: u64,
    pub proofs_rejected: u64,
    pub lift_root: u64,
    pub lift_half: u64,
    pub lift_partial: u64,
    pub lift_none: u64,
    pub lp_iterations: u64,
}

impl RunRow {
    pub fn solved(&self) -> bool {
        self.status == SolveStatus::Optimal.as_str() || self.status == SolveStatus::Infeasible.as_str()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub instance: String,
    pub message: String,
}

/// Aggregate of one setting over a bracket.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingSummary {
    pub setting: String,
    pub instances: usize,
    pub solved: usize,
    pub time_sgm: f64,
    pub nodes_sgm: f64,
    pub time_q: f64,
    pub nodes_q: f64,
    pub confs_glb: u64,
    pub confs_loc: u64,
    pub proofs_rejected: u64,
    pub lift_root: u64,
    pub lift_half: u64,
    pub lift_partial: u64,
    pub lift_none: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bracket {
    /// `all` or `[t,tilim]`.
    pub label: String,
    /// `None` for `all`.
    pub min_time: Option<f64>,
    pub instances: Vec<String>,
    pub summaries: Vec<SettingSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub seed: u64,
    pub time_limit: Option<f64>,
    pub node_limit: Option<u64>,
    pub settings: Vec<String>,
    pub rows: Vec<RunRow>,
    pub warnings: Vec<Warning>,
    pub brackets: Vec<Bracket>,
}

impl BenchmarkReport {
    /// Rows of one setting, in instance order.
    pub fn rows_for(&self, setting: ConflictMode) -> impl Iterator<Item = &RunRow> {
        self.rows.iter().filter(move |r| r.setting == setting.as_str())
    }

    pub fn bracket(&self, label: &str) -> Option<&Bracket> {
        self.brackets.iter().find(|b| b.label == label)
    }
}

enum Source {
    Loaded(Instance),
    Failed { name: String, message: String },
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let io = |source| BenchError::Io { path: dir.display().to_string(), source };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every `*.json` file of `dir` and runs the suite on it.
pub fn run_suite(dir: &Path, config: &BenchConfig) -> Result<BenchmarkReport, BenchError> {
    let sources = instance_files(dir)?
        .into_iter()
        .map(|path| match load_instance(&path) {
            Ok(inst) => Source::Loaded(inst),
            Err(e) => Source::Failed {
                name: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                message: e.to_string(),
            },
        })
        .collect();
    run_sources(sources, config)
}

/// Runs the suite on instances already in memory.
pub fn run_instances(instances: Vec<Instance>, config: &BenchConfig) -> Result<BenchmarkReport, BenchError> {
    run_sources(instances.into_iter().map(Source::Loaded).collect(), config)
}

fn run_sources(sources: Vec<Source>, config: &BenchConfig) -> Result<BenchmarkReport, BenchError> {
    if config.settings.is_empty() {
        return Err(BenchError::NoSettings);
    }
    if sources.is_empty() {
        return Err(BenchError::EmptyCorpus);
    }
    let mut warnings = Vec::new();
    let mut error_rows = Vec::new();
    let mut jobs = Vec::new();
    for source in &sources {
        match source {
            Source::Loaded(inst) => {
                for (k, &mode) in config.settings.iter().enumerate() {
                    jobs.push((inst, k, mode));
                }
            }
            Source::Failed { name, message } => {
                warnings.push(Warning { instance: name.clone(), message: message.clone() });
                error_rows.push(error_row(name));
            }
        }
    }
    let run = || -> Vec<(String, usize, RunRow)> {
        jobs.par_iter()
            .map(|&(inst, k, mode)| (inst.name.clone(), k, run_one(inst, mode, config)))
            .collect()
    };
    let mut results = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| BenchError::Pool(e.to_string()))?
            .install(run),
        None => run(),
    };
    results.extend(error_rows.into_iter().map(|r| (r.instance.clone(), usize::MAX, r)));
    results.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let rows: Vec<RunRow> = results.into_iter().map(|r| r.2).collect();
    let settings: Vec<String> = config.settings.iter().map(|m| m.as_str().to_string()).collect();
    let brackets = brackets(&rows, &settings, config);
    Ok(BenchmarkReport {
        seed: config.seed,
        time_limit: config.time_limit,
        node_limit: config.node_limit,
        settings,
        rows,
        warnings,
        brackets,
    })
}

fn run_one(inst: &Instance, mode: ConflictMode, config: &BenchConfig) -> RunRow {
    let settings = Settings {
        time_limit: config.time_limit,
        node_limit: config.node_limit,
        seed: config.seed,
        ..Settings::with_conflict(mode)
    };
    match solve(inst, &settings) {
        Ok(r) => RunRow {
            instance: inst.name.clone(),
            setting: mode.as_str().to_string(),
            status: r.status.as_str().to_string(),
            objective: r.objective,
            time_s: r.time_s,
            nodes: r.nodes,
            confs_glb: r.stats.confs_glb,
            confs_loc: r.stats.confs_loc,
            proofs_rejected: r.stats.proofs_rejected,
            lift_root: r.stats.lift.root,
            lift_half: r.stats.lift.half,
            lift_partial: r.stats.lift.partial,
            lift_none: r.stats.lift.none,
            lp_iterations: r.lp_iterations,
        },
        Err(_) => RunRow { setting: mode.as_str().to_string(), ..error_row(&inst.name) },
    }
}

fn error_row(name: &str) -> RunRow {
    RunRow {
        instance: name.to_string(),
        setting: String::new(),
        status: "error".to_string(),
        objective: None,
        time_s: 0.0,
        nodes: 0,
        confs_glb: 0,
        confs_loc: 0,
        proofs_rejected: 0,
        lift_root: 0,
        lift_half: 0,
        lift_partial: 0,
        lift_none: 0,
        lp_iterations: 0,
    }
}

/// Instance names that have a non-error row for every setting.
fn complete_instances<'a>(rows: &'a [RunRow], settings: &[String]) -> Vec<&'a str> {
    let mut names: Vec<&str> = rows.iter().map(|r| r.instance.as_str()).collect();
    names.dedup();
    names
        .into_iter()
        .filter(|name| {
            settings.iter().all(|s| {
                rows.iter()
                    .any(|r| r.instance == *name && &r.setting == s && r.status != "error")
            })
        })
        .collect()
}

fn brackets(rows: &[RunRow], settings: &[String], config: &BenchConfig) -> Vec<Bracket> {
    let names = complete_instances(rows, settings);
    let row = |name: &str, setting: &str| {
        rows.iter()
            .find(|r| r.instance == name && r.setting == setting)
            .expect("complete instance has a row per setting")
    };
    let mut out = vec![summarize("all".to_string(), None, names.clone(), rows, settings)];
    for &t in &config.brackets {
        // all settings need at least t seconds and at least one solves
        let members: Vec<&str> = names
            .iter()
            .copied()
            .filter(|&name| {
                settings.iter().all(|s| row(name, s).time_s >= t) && settings.iter().any(|s| row(name, s).solved())
            })
            .collect();
        out.push(summarize(format!("[{t},tilim]"), Some(t), members, rows, settings));
    }
    out
}

fn summarize(label: String, min_time: Option<f64>, members: Vec<&str>, rows: &[RunRow], settings: &[String]) -> Bracket {
    let mut summaries: Vec<SettingSummary> = settings
        .iter()
        .map(|s| {
            let sel: Vec<&RunRow> = members
                .iter()
                .filter_map(|name| rows.iter().find(|r| r.instance == *name && &r.setting == s))
                .collect();
            let times: Vec<f64> = sel.iter().map(|r| r.time_s).collect();
            let nodes: Vec<f64> = sel.iter().map(|r| r.nodes as f64).collect();
            let total = |f: fn(&RunRow) -> u64| sel.iter().map(|r| f(r)).sum::<u64>();
            SettingSummary {
                setting: s.clone(),
                instances: sel.len(),
                solved: sel.iter().filter(|r| r.solved()).count(),
                time_sgm: shifted_geo_mean(&times, TIME_SHIFT).unwrap_or(0.0),
                nodes_sgm: shifted_geo_mean(&nodes, NODE_SHIFT).unwrap_or(0.0),
                time_q: 1.0,
                nodes_q: 1.0,
                confs_glb: total(|r| r.confs_glb),
                confs_loc: total(|r| r.confs_loc),
                proofs_rejected: total(|r| r.proofs_rejected),
                lift_root: total(|r| r.lift_root),
                lift_half: total(|r| r.lift_half),
                lift_partial: total(|r| r.lift_partial),
                lift_none: total(|r| r.lift_none),
            }
        })
        .collect();
    let (base_time, base_nodes) = (summaries[0].time_sgm, summaries[0].nodes_sgm);
    for s in &mut summaries {
        s.time_q = quotient(s.time_sgm, base_time, TIME_SHIFT);
        s.nodes_q = quotient(s.nodes_sgm, base_nodes, NODE_SHIFT);
    }
    Bracket { label, min_time, instances: members.iter().map(|s| s.to_string()).collect(), summaries }
}

/// `value / baseline`; falls back to the shifted ratio on a zero baseline.
fn quotient(value: f64, baseline: f64, shift: f64) -> f64 {
    if baseline > 0.0 {
        value / baseline
    } else {
        (value + shift) / (baseline + shift)
    }
}
