//! Executes a validated config and writes the report directory.
//!
//! Layout: `summary.json` (byte-for-byte deterministic for a fixed config
//! and seed), `timings.json` (wall-clock, not deterministic) and one CSV per
//! table under `<scenario>/`.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use stein_lab::units;

use crate::checks::{self, CheckOutcome, Ctx};
use crate::config::{Config, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot build thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
    Capacity,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub hard: bool,
    pub status: Status,
    pub worst_margin: Option<f64>,
    pub message: String,
    /// CSV paths relative to the output directory.
    pub tables: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub null_family: String,
    pub alt_family: String,
    pub eps: f64,
    pub n_max: usize,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub unit: &'static str,
    pub passed: bool,
    pub scenarios: Vec<ScenarioReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    Fail = 1,
    Config = 2,
    Capacity = 3,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
}

pub struct RunResult {
    pub summary: Summary,
    pub exit: Exit,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Per-check seed; splitmix64 finalizer over the scenario seed and check id.
pub fn check_seed(seed: u64, id: &str) -> u64 {
    let mut z = seed ^ fnv1a(id);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let io = |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

struct Task {
    scenario: usize,
    id: String,
    seed: u64,
}

pub fn run(config: &Config, out: &Path, opts: &RunOptions) -> Result<RunResult, RunError> {
    let tasks: Vec<Task> = config
        .scenarios
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            let seed = opts.seed.unwrap_or(s.seed);
            s.checks.iter().map(move |id| Task {
                scenario: i,
                id: id.clone(),
                seed: check_seed(seed, id),
            })
        })
        .collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let results: Vec<(Result<CheckOutcome, stein_lab::Error>, f64)> = pool.build()?.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                let check = checks::find(&t.id).expect("validated config");
                let ctx = Ctx {
                    scenario: &config.scenarios[t.scenario],
                    seed: t.seed,
                };
                let start = Instant::now();
                let r = (check.run)(&ctx);
                (r, start.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut scenarios: Vec<ScenarioReport> = config
        .scenarios
        .iter()
        .map(|s| ScenarioReport {
            name: s.name.clone(),
            null_family: s.null_family.kind_name().to_string(),
            alt_family: s.alt_family.kind_name().to_string(),
            eps: s.eps,
            n_max: s.n_max,
            seed: opts.seed.unwrap_or(s.seed),
            passed: true,
            checks: Vec::new(),
        })
        .collect();
    let mut timings: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let (mut any_fail, mut any_capacity) = (false, false);

    for (task, (result, secs)) in tasks.iter().zip(results) {
        let check = checks::find(&task.id).expect("validated config");
        let scen = &mut scenarios[task.scenario];
        timings.entry(scen.name.clone()).or_default().insert(task.id.clone(), secs);
        let report = match result {
            Ok(o) => {
                let mut paths = Vec::new();
                for t in &o.tables {
                    let rel = format!("{}/{}.csv", scen.name, t.name);
                    write_atomic(&out.join(&rel), &t.to_csv())?;
                    paths.push(rel);
                }
                CheckReport {
                    id: task.id.clone(),
                    hard: check.hard,
                    status: if o.passed { Status::Pass } else { Status::Fail },
                    worst_margin: o.worst_margin,
                    message: o.message,
                    tables: paths,
                }
            }
            Err(e) => CheckReport {
                id: task.id.clone(),
                hard: check.hard,
                status: if e.is_capacity() { Status::Capacity } else { Status::Error },
                worst_margin: None,
                message: e.to_string(),
                tables: Vec::new(),
            },
        };
        match report.status {
            Status::Capacity => {
                any_capacity = true;
                scen.passed = false;
            }
            Status::Fail | Status::Error if check.hard => {
                any_fail = true;
                scen.passed = false;
            }
            _ => {}
        }
        scen.checks.push(report);
    }

    let summary = Summary {
        tool: "stein-lab",
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        unit: units::unit(),
        passed: !any_fail && !any_capacity,
        scenarios,
    };
    let mut json = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    json.push(b'\n');
    write_atomic(&out.join("summary.json"), &json)?;
    let mut tj = serde_json::to_vec_pretty(&timings).expect("timings serialize");
    tj.push(b'\n');
    write_atomic(&out.join("timings.json"), &tj)?;

    let exit = if any_capacity {
        Exit::Capacity
    } else if any_fail {
        Exit::Fail
    } else {
        Exit::Pass
    };
    Ok(RunResult { summary, exit })
}
