//! Benchmark harness comparing the direct and compiled approaches.
//!
//! Every instance gets `functions` random weightings whose literal weights
//! are drawn uniformly from `0..=l`. An operation counts as solved on an
//! instance when it finishes for all weightings within the timeout. The
//! compiled approach compiles each instance once; that time is reported
//! under the `compile` operation and excluded from the query times.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnf::{parse_dimacs, CnfFormula, Weighting};
use crate::compiler::{compile_with, CompileOptions};
use crate::ddnnf::DdnnfCircuit;
use crate::deadline::Deadline;
use crate::direct::{
    enumerate_direct, optimize_direct, sat_direct, topk_configs_direct, topk_values_direct, DirectOptions, TopKStop,
};
use crate::fm::{encode_fm, parse_fm};
use crate::queries::{count_models, enumerate_models, optimize, sample_uniform, topk_transform, TopKMode};
use crate::{Direction, Limit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BenchOp {
    Compile,
    Count,
    Sat,
    EnumK,
    SampleK,
    Opt,
    TopkValues,
    TopkConfigs,
}

impl BenchOp {
    pub const ALL: [BenchOp; 8] = [
        BenchOp::Compile,
        BenchOp::Count,
        BenchOp::Sat,
        BenchOp::EnumK,
        BenchOp::SampleK,
        BenchOp::Opt,
        BenchOp::TopkValues,
        BenchOp::TopkConfigs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchOp::Compile => "compile",
            BenchOp::Count => "count",
            BenchOp::Sat => "sat",
            BenchOp::EnumK => "enum-k",
            BenchOp::SampleK => "sample-k",
            BenchOp::Opt => "opt",
            BenchOp::TopkValues => "topk-values",
            BenchOp::TopkConfigs => "topk-configs",
        }
    }

    pub fn parse(s: &str) -> Option<BenchOp> {
        match s {
            "enum" => Some(BenchOp::EnumK),
            "sample" => Some(BenchOp::SampleK),
            _ => BenchOp::ALL.into_iter().find(|op| op.name() == s),
        }
    }

    /// Whether the approach offers this operation. Counting, sampling and
    /// compilation exist only on the compiled side.
    pub fn supports(self, approach: Approach) -> bool {
        match approach {
            Approach::Compiled => true,
            Approach::Direct => !matches!(self, BenchOp::Compile | BenchOp::Count | BenchOp::SampleK),
        }
    }
}

impl fmt::Display for BenchOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Approach {
    Direct,
    Compiled,
}

impl Approach {
    pub fn name(self) -> &'static str {
        match self {
            Approach::Direct => "direct",
            Approach::Compiled => "compiled",
        }
    }

    pub fn parse(s: &str) -> Option<Approach> {
        match s {
            "direct" => Some(Approach::Direct),
            "compiled" => Some(Approach::Compiled),
            _ => None,
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no readable instances in {}", .0.display())]
    EmptyCorpus(PathBuf),
    #[error("cannot read corpus {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub corpus: PathBuf,
    pub operations: Vec<BenchOp>,
    pub approaches: Vec<Approach>,
    pub k: usize,
    /// Upper bound of the literal weights.
    pub l: i64,
    pub functions: usize,
    pub timeout: Duration,
    pub seed: u64,
    pub dir: Direction,
}

impl BenchConfig {
    pub fn new(corpus: impl Into<PathBuf>) -> BenchConfig {
        BenchConfig {
            corpus: corpus.into(),
            operations: BenchOp::ALL.to_vec(),
            approaches: vec![Approach::Direct, Approach::Compiled],
            k: 10,
            l: 1_000_000,
            functions: 5,
            timeout: Duration::from_secs(10),
            seed: 0,
            dir: Direction::Min,
        }
    }

    fn check(&self) -> Result<(), BenchError> {
        if self.k == 0 {
            return Err(BenchError::Config("k must be at least 1".into()));
        }
        if self.timeout.is_zero() {
            return Err(BenchError::Config("timeout must be positive".into()));
        }
        if self.l < 1 {
            return Err(BenchError::Config("l must be at least 1".into()));
        }
        if self.functions == 0 {
            return Err(BenchError::Config("at least one weighting per instance is needed".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Timeout,
    Failed,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Timeout => "timeout",
            RunStatus::Failed => "failed",
        }
    }
}

/// One (instance, operation, approach) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub operation: BenchOp,
    pub approach: Approach,
    pub l: i64,
    pub status: RunStatus,
    pub seconds: f64,
    /// Approach-independent summary of the answer (counts, values), used to
    /// check that both approaches agree.
    pub digest: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub operation: BenchOp,
    pub approach: Approach,
    pub l: i64,
    pub runs: usize,
    pub success_rate: f64,
    /// Over successful runs only; `None` when nothing succeeded.
    pub mean_time_s: Option<f64>,
    pub max_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub records: Vec<RunRecord>,
    pub rows: Vec<ReportRow>,
}

impl BenchReport {
    pub fn row(&self, op: BenchOp, approach: Approach) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.operation == op && r.approach == approach)
    }

    /// (instance, operation) pairs where both approaches succeeded with
    /// different answers.
    pub fn disagreements(&self) -> Vec<(String, BenchOp)> {
        let mut out = Vec::new();
        for d in self.records.iter().filter(|r| r.approach == Approach::Direct) {
            let other = self.records.iter().find(|c| {
                c.approach == Approach::Compiled && c.instance == d.instance && c.operation == d.operation
            });
            if let Some(c) = other {
                if d.status == RunStatus::Ok && c.status == RunStatus::Ok && d.digest != c.digest {
                    out.push((d.instance.clone(), d.operation));
                }
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["instance", "operation", "approach", "l", "status", "seconds"])?;
        for r in &self.records {
            let seconds = if r.status == RunStatus::Ok {
                format!("{:.6}", r.seconds)
            } else {
                String::new()
            };
            out.write_record([
                r.instance.as_str(),
                r.operation.name(),
                r.approach.name(),
                &r.l.to_string(),
                r.status.name(),
                &seconds,
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |s| format!("{s:.4}"));
        writeln!(
            f,
            "{:<13} {:<9} {:>8} {:>5} {:>8} {:>10} {:>10}",
            "operation", "approach", "l", "runs", "success", "mean_s", "max_s"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<13} {:<9} {:>8} {:>5} {:>8.3} {:>10} {:>10}",
                r.operation.name(),
                r.approach.name(),
                r.l,
                r.runs,
                r.success_rate,
                opt(r.mean_time_s),
                opt(r.max_time_s)
            )?;
        }
        Ok(())
    }
}

/// Reads an instance: `.fm` files are encoded, `.cnf`/`.dimacs` parsed.
pub fn load_instance(path: &Path) -> Result<CnfFormula, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("fm") => parse_fm(&text).map(|fm| encode_fm(&fm).0).map_err(|e| e.to_string()),
        Some("cnf") | Some("dimacs") => parse_dimacs(&text).map_err(|e| e.to_string()),
        _ => Err("unknown instance extension".into()),
    }
}

fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let io = |e: std::io::Error| BenchError::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("fm") | Some("cnf") | Some("dimacs")
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

/// The weight functions of instance number `index`. Each instance draws
/// from its own ChaCha8 stream, so adding instances does not perturb the
/// weights of others.
pub fn weight_functions(seed: u64, index: u64, num_vars: u32, l: i64, count: usize) -> Vec<Weighting> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..count)
        .map(|_| {
            let pos = (0..num_vars).map(|_| rng.gen_range(0..=l)).collect();
            let neg = (0..num_vars).map(|_| rng.gen_range(0..=l)).collect();
            Weighting::from_vectors(pos, neg).expect("bounded weights")
        })
        .collect()
}

struct Instance<'a> {
    formula: &'a CnfFormula,
    circuit: Option<&'a DdnnfCircuit>,
    weights: &'a [Weighting],
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Runs one operation; returns its digest. Errors are reported as strings
/// and timeouts as `Err(None)`.
fn run_op(
    op: BenchOp,
    approach: Approach,
    inst: &Instance,
    cfg: &BenchConfig,
    deadline: Deadline,
) -> Result<String, Option<String>> {
    let direct = DirectOptions::with_deadline(deadline);
    let derr = |e: crate::direct::DirectError| if e.is_timeout() { None } else { Some(e.to_string()) };
    let qerr = |e: crate::queries::QueryError| Some(e.to_string());
    let dir = cfg.dir;
    let mut parts: Vec<String> = Vec::new();
    match approach {
        Approach::Direct => {
            let f = inst.formula;
            match op {
                BenchOp::Sat => parts.push(if sat_direct(f, &direct).map_err(derr)?.is_some() { "sat" } else { "unsat" }.into()),
                BenchOp::EnumK => parts.push(enumerate_direct(f, Limit::First(cfg.k), &direct).map_err(derr)?.len().to_string()),
                BenchOp::Opt => {
                    for w in inst.weights {
                        let r = optimize_direct(f, w, dir, &direct).map_err(derr)?;
                        parts.push(r.map_or("unsat".into(), |r| r.value.to_string()));
                    }
                }
                BenchOp::TopkValues => {
                    for w in inst.weights {
                        parts.push(join(topk_values_direct(f, w, cfg.k, dir, &direct).map_err(derr)?));
                    }
                }
                BenchOp::TopkConfigs => {
                    for w in inst.weights {
                        let r = topk_configs_direct(f, w, cfg.k, dir, TopKStop::KBest, &direct).map_err(derr)?;
                        parts.push(join(r.iter().map(|r| r.value)));
                    }
                }
                BenchOp::Compile | BenchOp::Count | BenchOp::SampleK => {
                    return Err(Some(format!("{op} is not offered by the direct approach")))
                }
            }
        }
        Approach::Compiled => {
            let c = inst.circuit.ok_or_else(|| Some("instance did not compile".to_string()))?;
            match op {
                BenchOp::Compile => parts.push(c.num_nodes().to_string()),
                BenchOp::Count => parts.push(count_models(c).to_string()),
                BenchOp::Sat => parts.push(
                    if enumerate_models(c, Limit::First(1)).map_err(qerr)?.next().is_some() { "sat" } else { "unsat" }.into(),
                ),
                BenchOp::EnumK => parts.push(enumerate_models(c, Limit::First(cfg.k)).map_err(qerr)?.count().to_string()),
                BenchOp::SampleK => parts.push(sample_uniform(c, cfg.k, cfg.seed).map_err(qerr)?.len().to_string()),
                BenchOp::Opt => {
                    for w in inst.weights {
                        let r = optimize(c, w, dir).map_err(qerr)?;
                        parts.push(r.map_or("unsat".into(), |r| r.value.to_string()));
                    }
                }
                BenchOp::TopkValues | BenchOp::TopkConfigs => {
                    let mode = if op == BenchOp::TopkValues { TopKMode::Values } else { TopKMode::Configurations };
                    for w in inst.weights {
                        parts.push(join(topk_transform(c, w, cfg.k, dir, mode).map_err(qerr)?.values()));
                    }
                }
            }
        }
    }
    if deadline.expired() {
        return Err(None);
    }
    Ok(parts.join(";"))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    cfg.check()?;
    let mut records = Vec::new();
    let mut loaded = 0usize;
    for (index, path) in corpus_files(&cfg.corpus)?.iter().enumerate() {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("?").to_string();
        let formula = match load_instance(path) {
            Ok(f) => f,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                continue;
            }
        };
        loaded += 1;
        let weights = weight_functions(cfg.seed, index as u64, formula.num_vars(), cfg.l, cfg.functions);
        let mut record = |operation, approach, result: Result<String, Option<String>>, seconds| {
            let (status, digest) = match result {
                Ok(d) => (RunStatus::Ok, Some(d)),
                Err(None) => (RunStatus::Timeout, None),
                Err(Some(e)) => {
                    log::warn!("{name}: {operation} ({approach}) failed: {e}");
                    (RunStatus::Failed, None)
                }
            };
            records.push(RunRecord {
                instance: name.clone(),
                operation,
                approach,
                l: cfg.l,
                status,
                seconds,
                digest,
            });
        };

        let mut circuit = None;
        if cfg.approaches.contains(&Approach::Compiled) {
            let opts = CompileOptions {
                deadline: Deadline::after(cfg.timeout),
                ..CompileOptions::default()
            };
            let (result, seconds) = timed(|| compile_with(&formula, &opts));
            let outcome = match result {
                Ok(c) if !opts.deadline.expired() => {
                    let nodes = c.num_nodes().to_string();
                    circuit = Some(c);
                    Ok(nodes)
                }
                Ok(_) | Err(crate::compiler::CompileError::Timeout(_)) => Err(None),
                Err(e) => Err(Some(e.to_string())),
            };
            if cfg.operations.contains(&BenchOp::Compile) {
                record(BenchOp::Compile, Approach::Compiled, outcome, seconds);
            }
        }
        let inst = Instance {
            formula: &formula,
            circuit: circuit.as_ref(),
            weights: &weights,
        };
        for &op in &cfg.operations {
            if op == BenchOp::Compile {
                continue;
            }
            for &approach in &cfg.approaches {
                if !op.supports(approach) {
                    continue;
                }
                if approach == Approach::Compiled && inst.circuit.is_none() {
                    record(op, approach, Err(None), 0.0);
                    continue;
                }
                let deadline = Deadline::after(cfg.timeout);
                let (result, seconds) = timed(|| run_op(op, approach, &inst, cfg, deadline));
                record(op, approach, result, seconds);
            }
        }
    }
    if loaded == 0 {
        return Err(BenchError::EmptyCorpus(cfg.corpus.clone()));
    }
    let rows = aggregate(&records);
    Ok(BenchReport { records, rows })
}

fn aggregate(records: &[RunRecord]) -> Vec<ReportRow> {
    let mut keys: Vec<(BenchOp, Approach, i64)> = records.iter().map(|r| (r.operation, r.approach, r.l)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(operation, approach, l)| {
            let runs: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.operation == operation && r.approach == approach && r.l == l)
                .collect();
            let ok: Vec<f64> = runs.iter().filter(|r| r.status == RunStatus::Ok).map(|r| r.seconds).collect();
            let mean = (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64);
            let max = ok.iter().copied().reduce(f64::max);
            ReportRow {
                operation,
                approach,
                l,
                runs: runs.len(),
                success_rate: ok.len() as f64 / runs.len() as f64,
                mean_time_s: mean,
                max_time_s: max,
            }
        })
        .collect()
}
