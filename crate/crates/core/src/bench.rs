//! Experiment sweeps: instance grids, per-trial seeds, parallel execution and
//! CSV/JSONL output.
//!
//! Seeds are derived with [`derive_seed`], a SplitMix64 chain over
//! `(root, cell, trial)`. Cells are numbered in grid order: instance-major,
//! then strategy, then termination rule (the chain-search engine uses its
//! configuration list in place of strategies and has one termination column).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{run_gas_with, GasConfig};
use crate::grover::{Scaling, Strategy, TerminationRule, DEFAULT_LAMBDA};
use crate::instance::TspInstance;
use crate::lk::{run_lk, LkConfig};
use crate::oracle::{enumerate_good_states, held_karp_optimum, GoodStateSet};
use crate::record::{approximation_ratio, RunRecord};
use crate::tour::{greedy_tour, Tour};

/// Version tag carried in the first CSV column.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(splitmix64(root) ^ a) ^ b)`.
pub fn derive_seed(root: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(root) ^ a) ^ b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub sizes: Vec<usize>,
    pub per_size: usize,
    pub seed: u64,
    #[serde(default = "default_weights")]
    pub weight_range: (f64, f64),
}

fn default_weights() -> (f64, f64) {
    (1.0, 100.0)
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            sizes: vec![8, 10, 12],
            per_size: 5,
            seed: 7,
            weight_range: default_weights(),
        }
    }
}

/// Generates `per_size` instances for every size. Instance `k` of size `n`
/// uses seed `derive_seed(seed, n, k)` and is named `n{n}-{k}`.
pub fn generate_instances(spec: &InstanceSpec) -> Result<Vec<TspInstance>> {
    let mut out = Vec::with_capacity(spec.sizes.len() * spec.per_size);
    for &n in &spec.sizes {
        for k in 0..spec.per_size {
            let seed = derive_seed(spec.seed, n as u64, k as u64);
            let inst = TspInstance::generate_random(n, seed, spec.weight_range.0, spec.weight_range.1)?;
            out.push(inst.with_name(format!("n{n}-{k}")));
        }
    }
    Ok(out)
}

pub fn write_instances(dir: impl AsRef<Path>, instances: &[TspInstance]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    instances
        .iter()
        .map(|inst| {
            let path = dir.join(format!("{}.json", inst.name()));
            std::fs::write(&path, inst.to_json()?).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<TspInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|x| x == "json") {
        TspInstance::from_json(&text)
    } else {
        TspInstance::parse_tsplib(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Gas,
    Lk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub instances: InstanceSpec,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_terminations")]
    pub terminations: Vec<TerminationRule>,
    #[serde(default = "default_lk_configs")]
    pub lk_configs: Vec<LkConfig>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub root_seed: u64,
    /// Directory for good-state caches keyed by instance content hash.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

pub fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::original(), Strategy::FixedInterval, Strategy::Incremental]
}

pub fn default_terminations() -> Vec<TerminationRule> {
    vec![
        TerminationRule::rounds(Scaling::Constant { c: 5.0 }),
        TerminationRule::rounds(Scaling::LogLambda {
            power: 2,
            lambda: DEFAULT_LAMBDA,
        }),
        TerminationRule::rounds(Scaling::LogLambda {
            power: 4,
            lambda: DEFAULT_LAMBDA,
        }),
    ]
}

fn default_lk_configs() -> Vec<LkConfig> {
    vec![LkConfig::default(), LkConfig::cleaned()]
}

fn default_trials() -> usize {
    25
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instances: InstanceSpec::default(),
            engine: Engine::Gas,
            strategies: default_strategies(),
            terminations: default_terminations(),
            lk_configs: default_lk_configs(),
            trials: default_trials(),
            root_seed: 0,
            cache_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if self.instances.sizes.is_empty() || self.instances.per_size == 0 {
            return Err(Error::Parameter("no instances configured".into()));
        }
        match self.engine {
            Engine::Gas if self.strategies.is_empty() || self.terminations.is_empty() => {
                Err(Error::Parameter("gas sweeps need strategies and terminations".into()))
            }
            Engine::Lk if self.lk_configs.is_empty() => Err(Error::Parameter("lk sweeps need a config".into())),
            _ => self.strategies.iter().try_for_each(Strategy::validate),
        }
    }
}

/// One JSONL line: a run plus its grid coordinates and scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub cell: usize,
    pub trial: usize,
    pub instance: String,
    pub n: usize,
    pub strategy: String,
    pub termination: String,
    pub optimum: f64,
    pub greedy_cost: f64,
    pub ratio: f64,
    pub k_total: u64,
    pub record: RunRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: usize,
    pub trial: usize,
    pub instance: String,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct BenchOutput {
    pub records: Vec<BenchRecord>,
    pub failures: Vec<CellFailure>,
}

/// Per-instance data shared by all cells on that instance.
struct Prepared {
    instance: TspInstance,
    greedy: Tour,
    greedy_cost: f64,
    optimum: f64,
    good: Option<GoodStateSet>,
}

fn prepare(instance: TspInstance, engine: Engine, cache_dir: Option<&Path>) -> Result<Prepared> {
    let greedy = greedy_tour(&instance, 0)?;
    let greedy_cost = greedy.cost(&instance)?;
    let (_, optimum) = held_karp_optimum(&instance)?;
    let good = match engine {
        Engine::Gas => Some(load_or_enumerate(&instance, greedy_cost, cache_dir)?),
        Engine::Lk => None,
    };
    Ok(Prepared {
        instance,
        greedy,
        greedy_cost,
        optimum,
        good,
    })
}

/// Good states below `threshold`, through the cache directory when given.
pub fn load_or_enumerate(instance: &TspInstance, threshold: f64, cache_dir: Option<&Path>) -> Result<GoodStateSet> {
    let Some(dir) = cache_dir else {
        return enumerate_good_states(instance, threshold);
    };
    let path = dir.join(format!("{}.json", instance.content_hash()));
    if path.exists() {
        if let Some(set) = GoodStateSet::load(&path, instance)? {
            if set.threshold() == threshold {
                return Ok(set);
            }
        }
    }
    let set = enumerate_good_states(instance, threshold)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    set.save(&path, instance)?;
    Ok(set)
}

struct Task {
    cell: usize,
    trial: usize,
    instance: usize,
    variant: usize,
    termination: usize,
}

pub fn run_bench(config: &ExperimentConfig) -> Result<BenchOutput> {
    config.validate()?;
    let instances = generate_instances(&config.instances)?;
    run_bench_on(config, instances)
}

/// Runs the grid on explicit instances (the instance spec is ignored).
pub fn run_bench_on(config: &ExperimentConfig, instances: Vec<TspInstance>) -> Result<BenchOutput> {
    config.validate()?;
    let prepared: Vec<Prepared> = instances
        .into_iter()
        .map(|inst| prepare(inst, config.engine, config.cache_dir.as_deref()))
        .collect::<Result<_>>()?;

    let (variants, terminations) = match config.engine {
        Engine::Gas => (config.strategies.len(), config.terminations.len()),
        Engine::Lk => (config.lk_configs.len(), 1),
    };
    let mut tasks = Vec::new();
    let mut cell = 0;
    for instance in 0..prepared.len() {
        for variant in 0..variants {
            for termination in 0..terminations {
                for trial in 0..config.trials {
                    tasks.push(Task {
                        cell,
                        trial,
                        instance,
                        variant,
                        termination,
                    });
                }
                cell += 1;
            }
        }
    }

    let results: Vec<std::result::Result<BenchRecord, CellFailure>> = tasks
        .par_iter()
        .map(|task| {
            let prep = &prepared[task.instance];
            run_task(config, prep, task).map_err(|e| CellFailure {
                cell: task.cell,
                trial: task.trial,
                instance: prep.instance.name().to_string(),
                error: e.to_string(),
            })
        })
        .collect();

    let mut out = BenchOutput::default();
    for r in results {
        match r {
            Ok(rec) => out.records.push(rec),
            Err(f) => out.failures.push(f),
        }
    }
    out.records.sort_by_key(|r| (r.cell, r.trial));
    out.failures.sort_by_key(|f| (f.cell, f.trial));
    Ok(out)
}

fn run_task(config: &ExperimentConfig, prep: &Prepared, task: &Task) -> Result<BenchRecord> {
    let seed = derive_seed(config.root_seed, task.cell as u64, task.trial as u64);
    let (record, strategy, termination) = match config.engine {
        Engine::Gas => {
            let gas = GasConfig::new(config.strategies[task.variant], config.terminations[task.termination]);
            let good = prep.good.as_ref().expect("gas cells are prepared with good states");
            let rec = run_gas_with(&prep.instance, good, &prep.greedy, &gas, seed)?;
            (rec, gas.strategy.to_string(), gas.termination.to_string())
        }
        Engine::Lk => {
            let lk = &config.lk_configs[task.variant];
            let rec = run_lk(&prep.instance, &prep.greedy, lk, seed)?;
            let label = if lk.literal_mode { "lk-literal" } else { "lk-cleaned" };
            let budget = format!("budget:{}", lk.resolve(prep.instance.n())?.budget);
            (rec, label.to_string(), budget)
        }
    };
    Ok(BenchRecord {
        cell: task.cell,
        trial: task.trial,
        instance: prep.instance.name().to_string(),
        n: prep.instance.n(),
        strategy,
        termination,
        optimum: prep.optimum,
        greedy_cost: prep.greedy_cost,
        ratio: approximation_ratio(record.final_cost, prep.optimum)?,
        k_total: record.k_total,
        record,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ratio,
    Iterations,
}

impl Metric {
    pub fn of(&self, rec: &BenchRecord) -> f64 {
        match self {
            Metric::Ratio => rec.ratio,
            Metric::Iterations => rec.k_total as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub schema_version: u32,
    pub size: usize,
    pub strategy: String,
    pub termination: String,
    pub mean: f64,
    pub stddev: f64,
    pub trials: usize,
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_stddev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups by `(size, strategy, termination)` in first-appearance order of
/// strategy and termination within each size.
pub fn summarize(records: &[BenchRecord], metric: Metric) -> Vec<SummaryRow> {
    let mut order: Vec<(usize, String, String)> = Vec::new();
    let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for rec in records {
        let key = (rec.n, rec.strategy.clone(), rec.termination.clone());
        let idx = match order.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                order.push(key);
                order.len() - 1
            }
        };
        groups.entry((rec.n, idx)).or_default().push(metric.of(rec));
    }
    groups
        .into_iter()
        .map(|((size, idx), values)| {
            let (mean, stddev) = mean_stddev(&values);
            SummaryRow {
                schema_version: CSV_SCHEMA_VERSION,
                size,
                strategy: order[idx].1.clone(),
                termination: order[idx].2.clone(),
                mean,
                stddev,
                trials: values.len(),
            }
        })
        .collect()
}

/// Mean of `metric` per `(instance, strategy, termination)`.
pub fn per_instance_means(records: &[BenchRecord], metric: Metric) -> BTreeMap<(String, String, String), f64> {
    let mut acc: BTreeMap<(String, String, String), (f64, usize)> = BTreeMap::new();
    for rec in records {
        let e = acc
            .entry((rec.instance.clone(), rec.strategy.clone(), rec.termination.clone()))
            .or_default();
        e.0 += metric.of(rec);
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect()
}

pub fn write_summary_csv(path: impl AsRef<Path>, rows: &[SummaryRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Schema(format!("{other:?}")),
    })?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_summary_csv(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<SummaryRow>, _>>()?;
    if let Some(row) = rows.iter().find(|r| r.schema_version != CSV_SCHEMA_VERSION) {
        return Err(Error::Schema(format!(
            "unsupported CSV schema version {}",
            row.schema_version
        )));
    }
    Ok(rows)
}

pub fn write_jsonl(path: impl AsRef<Path>, records: &[BenchRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for rec in records {
        text.push_str(&serde_json::to_string(rec)?);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Writes `records.jsonl`, `summary_ratio.csv`, `summary_iters.csv` and,
/// when any trial failed, `failures.json`.
pub fn write_outputs(dir: impl AsRef<Path>, output: &BenchOutput) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_jsonl(dir.join("records.jsonl"), &output.records)?;
    write_summary_csv(
        dir.join("summary_ratio.csv"),
        &summarize(&output.records, Metric::Ratio),
    )?;
    write_summary_csv(
        dir.join("summary_iters.csv"),
        &summarize(&output.records, Metric::Iterations),
    )?;
    if !output.failures.is_empty() {
        let path = dir.join("failures.json");
        std::fs::write(&path, serde_json::to_string_pretty(&output.failures)?).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
