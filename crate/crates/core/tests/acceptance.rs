//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Built with `harness = false` so the lines always show.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use fmreason::bench::{run_bench, BenchConfig, BenchReport, RunStatus};
use fmreason::cnf::{brute_force_models, is_model, CnfFormula, Model, Var, Weighting};
use fmreason::compiler::compile;
use fmreason::ddnnf::{DdnnfCircuit, Node, Violation, ViolationKind};
use fmreason::direct::{count_direct, optimize_direct, topk_configs_direct, topk_values_direct, DirectOptions, TopKStop};
use fmreason::fixtures::{mobile_formula, MOBILE_DIMACS, MOBILE_NAMES, MOBILE_FM};
use fmreason::fm::{encode_fm, parse_fm, random_feature_model, RandomFmParams};
use fmreason::queries::{count_models, enumerate_models, optimize, sample_uniform, topk_transform, TopKMode};
use fmreason::script::run_script;
use fmreason::{Direction, Limit};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    if took > limit {
        Err(format!("took {took:.2?}, limit {limit:?}"))
    } else {
        Ok(took)
    }
}

fn mobile() -> (CnfFormula, Vec<String>) {
    let fm = parse_fm(MOBILE_FM).unwrap();
    let (f, names) = encode_fm(&fm);
    (f, names.names().to_vec())
}

struct Instance {
    label: String,
    raw: RawCnf,
    formula: CnfFormula,
    masks: Vec<u64>,
    circuit: DdnnfCircuit,
}

/// 200 random CNFs and 50 random feature models, all with at most 16 variables.
fn fuzz_corpus() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut raws: Vec<(String, RawCnf)> = Vec::new();
    for i in 0..200 {
        let n = rng.gen_range(1..=16u32);
        let m = rng.gen_range(0..=(3 * n as usize).min(60));
        raws.push((format!("cnf#{i}"), random_cnf_sized(&mut rng, n, m)));
    }
    for i in 0..50 {
        let n = rng.gen_range(2..=16usize);
        let constraints = rng.gen_range(0..=3);
        let fm = random_feature_model(&mut rng, RandomFmParams::new(n, constraints));
        raws.push((format!("fm#{i}"), RawCnf::from_formula(&encode_fm(&fm).0)));
    }
    raws.into_iter()
        .map(|(label, raw)| {
            let formula = raw.formula();
            let circuit = compile(&formula).unwrap();
            Instance {
                label,
                masks: oracle_masks(&raw),
                raw,
                formula,
                circuit,
            }
        })
        .collect()
}

fn weightings(seed: u64, n: u32) -> Vec<(i64, RawWeights)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [1, 100, 1_000_000]
        .into_iter()
        .flat_map(|l| (0..5).map(move |_| l))
        .map(|l| (l, RawWeights::random(&mut rng, n, l)))
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (f, names) = mobile();
    ensure!(f.num_vars() == 10 && f.num_clauses() == 19, "encoding has {} vars, {} clauses", f.num_vars(), f.num_clauses());
    let encoded = named(oracle_masks(&RawCnf::from_formula(&f)), &names);
    let mobile_names: Vec<String> = MOBILE_NAMES.iter().map(|s| s.to_string()).collect();
    let transcribed = named(oracle_masks(&RawCnf::from_formula(&mobile_formula())), &mobile_names);
    ensure!(encoded == transcribed, "model sets differ");
    ensure!(encoded == fm_configurations(&parse_fm(MOBILE_FM).unwrap()), "encoding disagrees with the diagram");
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("{} models equal over 2^10 assignments, {took:.2?}", encoded.len()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (f, _) = mobile();
    let oracle = oracle_masks(&RawCnf::from_formula(&f)).len();
    let compiled = count_models(&compile(&f).map_err(|e| e.to_string())?);
    let direct = count_direct(&f, None, &DirectOptions::default()).map_err(|e| e.to_string())?;
    let brute = brute_force_models(&f).map_err(|e| e.to_string())?.len();
    ensure!(oracle == 14, "oracle count {oracle}");
    ensure!(
        compiled == BigUint::from(14u32) && direct == BigUint::from(14u32) && brute == 14,
        "compiled {compiled}, direct {direct}, brute force {brute}"
    );
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("all counts 14, {took:.2?}"))
}

fn criterion_3(corpus: &[Instance]) -> Outcome {
    let start = Instant::now();
    let mut checks = 0;
    for (idx, inst) in corpus.iter().enumerate() {
        let oracle = BigUint::from(inst.masks.len());
        let compiled = count_models(&inst.circuit);
        let direct = count_direct(&inst.formula, Some(1 << 20), &DirectOptions::default()).map_err(|e| e.to_string())?;
        ensure!(compiled == oracle && direct == oracle, "{}: counts {compiled}/{direct}, oracle {oracle}", inst.label);
        for (i, (l, w)) in weightings(idx as u64, inst.raw.n).iter().enumerate() {
            let dir = if i % 2 == 0 { Direction::Min } else { Direction::Max };
            let weighting = w.weighting();
            let expected = oracle_optimum(&inst.masks, w, dir);
            let c = optimize(&inst.circuit, &weighting, dir).map_err(|e| e.to_string())?.map(|r| r.value);
            let d = optimize_direct(&inst.formula, &weighting, dir, &DirectOptions::default())
                .map_err(|e| e.to_string())?
                .map(|r| r.value);
            ensure!(
                c == expected && d == expected,
                "{} l={l} {dir}: compiled {c:?}, direct {d:?}, oracle {expected:?}",
                inst.label
            );
            checks += 1;
        }
    }
    let took = within(Duration::from_secs(300), start)?;
    let satisfiable = corpus.iter().filter(|i| !i.masks.is_empty()).count();
    let models: usize = corpus.iter().map(|i| i.masks.len()).sum();
    Ok(format!(
        "{} instances ({satisfiable} satisfiable, {models} models), {checks} optimizations exact, {took:.2?}",
        corpus.len()
    ))
}

fn criterion_4(corpus: &[Instance]) -> Outcome {
    let k = 10;
    let mut lists = 0;
    for (idx, inst) in corpus.iter().enumerate() {
        for (i, (l, w)) in weightings(idx as u64, inst.raw.n).iter().enumerate() {
            let dir = if i % 2 == 0 { Direction::Min } else { Direction::Max };
            let weighting = w.weighting();
            let opts = DirectOptions::default();
            let direct = topk_values_direct(&inst.formula, &weighting, k, dir, &opts).map_err(|e| e.to_string())?;
            let compiled = topk_transform(&inst.circuit, &weighting, k, dir, TopKMode::Values)
                .map_err(|e| e.to_string())?
                .values();
            ensure!(direct == compiled, "{} l={l}: values {direct:?} vs {compiled:?}", inst.label);
            ensure!(direct == oracle_topk_values(&inst.masks, w, k, dir), "{} l={l}: values off oracle", inst.label);

            let mut dc: Vec<i64> = topk_configs_direct(&inst.formula, &weighting, k, dir, TopKStop::KBest, &opts)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|r| r.value)
                .collect();
            let mut cc = topk_transform(&inst.circuit, &weighting, k, dir, TopKMode::Configurations)
                .map_err(|e| e.to_string())?
                .values();
            dc.sort_unstable();
            cc.sort_unstable();
            let mut oracle = oracle_topk_config_values(&inst.masks, w, k, dir);
            oracle.sort_unstable();
            ensure!(dc == cc && cc == oracle, "{} l={l}: configuration values {dc:?} vs {cc:?}", inst.label);
            lists += 2;
        }
    }
    let (f, _) = mobile();
    let w = Weighting::unit_positive(10).unwrap();
    let direct = topk_values_direct(&f, &w, 3, Direction::Min, &DirectOptions::default()).map_err(|e| e.to_string())?;
    let compiled = topk_transform(&compile(&f).unwrap(), &w, 3, Direction::Min, TopKMode::Values)
        .map_err(|e| e.to_string())?
        .values();
    let mobile_names: Vec<String> = MOBILE_NAMES.iter().map(|s| s.to_string()).collect();
    let expected: Vec<i64> = {
        // Unit positive weights: a configuration's value is its size.
        let mut sizes: Vec<i64> = named(oracle_masks(&RawCnf::from_formula(&mobile_formula())), &mobile_names)
            .iter()
            .map(|s| s.len() as i64)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        sizes.truncate(3);
        sizes
    };
    ensure!(expected == [4, 5, 6], "oracle gives {expected:?}");
    ensure!(direct == expected && compiled == expected, "mobile top-3: {direct:?} / {compiled:?}");
    Ok(format!("{lists} lists equal at k=10; mobile top-3 = {compiled:?}"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let f = mobile_formula();
    let circuit = compile(&f).map_err(|e| e.to_string())?;
    let samples = sample_uniform(&circuit, 10_000, 2024).map_err(|e| e.to_string())?;
    let masks = oracle_masks(&RawCnf::from_formula(&f));
    ensure!(masks.len() == 14, "oracle has {} models", masks.len());
    let mut counts = vec![0usize; masks.len()];
    for m in &samples {
        ensure!(is_model(&f, m), "sample {m} violates the formula");
        let i = masks.binary_search(&model_to_mask(m)).map_err(|_| format!("sample {m} not a model"))?;
        counts[i] += 1;
    }
    let chi2 = chi_square(&counts);
    ensure!(chi2 < 34.5, "chi-square {chi2:.2}");
    let worst = counts
        .iter()
        .map(|&c| (c as f64 / samples.len() as f64 - 1.0 / 14.0).abs())
        .fold(0.0, f64::max);
    ensure!(worst <= 0.02, "frequency deviation {worst:.4}");
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("chi-square {chi2:.2}, max deviation {worst:.4}, {took:.2?}"))
}

fn criterion_6(corpus: &[Instance]) -> Outcome {
    let mut prefixes = 0;
    for inst in corpus {
        let all: Vec<Model> = enumerate_models(&inst.circuit, Limit::All).map_err(|e| e.to_string())?.collect();
        let set: BTreeSet<u64> = all.iter().map(model_to_mask).collect();
        ensure!(set.len() == all.len(), "{}: duplicates", inst.label);
        ensure!(set == inst.masks.iter().copied().collect(), "{}: model set differs", inst.label);
        for k in [1, all.len() / 3, all.len() / 2, all.len().saturating_sub(1)] {
            if k == 0 || k >= all.len() {
                continue;
            }
            let first: Vec<Model> = enumerate_models(&inst.circuit, Limit::First(k)).unwrap().collect();
            ensure!(first[..] == all[..k], "{}: first {k} is not a prefix", inst.label);
            prefixes += 1;
        }
    }
    Ok(format!("{} circuits enumerated exactly, {prefixes} prefixes checked", corpus.len()))
}

/// Duplicates a child of an AND node: the node stops being decomposable.
fn break_and(c: &DdnnfCircuit, id: usize) -> Option<(DdnnfCircuit, Violation)> {
    let Node::And(children) = c.node(id) else { return None };
    let (pos, &dup) = children.iter().enumerate().find(|(_, &ch)| !c.vars(ch).is_empty())?;
    let mut nodes = c.nodes().to_vec();
    let mut mutated = children.clone();
    mutated[(pos + 1) % children.len()] = dup;
    nodes[id] = Node::And(mutated);
    let var = Var::new(c.vars(dup)[0]);
    let broken = DdnnfCircuit::new(nodes, c.root(), c.num_vars()).ok()?;
    Some((broken, Violation { node: id, kind: ViolationKind::Decomposability { var } }))
}

/// Makes a decision node branch on a variable that occurs below it.
fn break_decision(c: &DdnnfCircuit, id: usize) -> Option<(DdnnfCircuit, Violation)> {
    let Node::Decision { hi, lo, .. } = *c.node(id) else { return None };
    let var = Var::new(*c.vars(hi).first().or(c.vars(lo).first())?);
    let mut nodes = c.nodes().to_vec();
    nodes[id] = Node::Decision { var, hi, lo };
    let broken = DdnnfCircuit::new(nodes, c.root(), c.num_vars()).ok()?;
    Some((broken, Violation { node: id, kind: ViolationKind::DecisionForm { var } }))
}

fn criterion_7(corpus: &[Instance]) -> Outcome {
    let mut injected = 0;
    for inst in corpus {
        let report = inst.circuit.validate();
        ensure!(report.is_valid(), "{}: compiler output invalid: {report}", inst.label);
        let reachable = inst.circuit.reachable();
        for &id in &reachable {
            for mutation in [break_and(&inst.circuit, id), break_decision(&inst.circuit, id)] {
                let Some((broken, expected)) = mutation else { continue };
                let found = broken.validate().violations;
                ensure!(found == [expected], "{}: injected {expected}, found {found:?}", inst.label);
                injected += 1;
            }
        }
    }
    ensure!(injected > 100, "only {injected} mutations injected");
    Ok(format!("{} outputs valid, {injected} injected violations located", corpus.len()))
}

const DIRECT_SCRIPT: &str = "\
rep = load_cnf(\"mobile.cnf\")
w = new_weighting(10)
set_default_positive_weight(w,1)
set_default_negative_weight(w,0)
opt = optimize (rep,w,\"min\")
print get_weight(w,opt)
print opt
";

const COMPILED_SCRIPT: &str = "\
mobile = load_cnf(\"mobile.cnf\")
rep = compile(mobile)
print count(rep)
w = new_weighting(10)
set_default_positive_weight(w,1)
set_default_negative_weight(w,0)
opt = optimize (rep,w,\"min\")
print get_weight(w,opt)
print opt
";

fn script_output(dir: &Path, text: &str) -> Result<String, String> {
    let mut out = Vec::new();
    run_script(text, dir, &mut out).map_err(|e| e.to_string())?;
    String::from_utf8(out).map_err(|e| e.to_string())
}

fn size_of(model_line: &str) -> usize {
    model_line
        .split_whitespace()
        .filter_map(|t| t.parse::<i64>().ok())
        .filter(|&l| l > 0)
        .count()
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("mobile.cnf"), MOBILE_DIMACS).map_err(|e| e.to_string())?;
    let one = script_output(dir.path(), DIRECT_SCRIPT)?;
    ensure!(one == script_output(dir.path(), DIRECT_SCRIPT)?, "first script output differs between runs");
    let lines: Vec<&str> = one.lines().collect();
    ensure!(lines.len() == 2 && lines[0] == "4" && size_of(lines[1]) == 4, "first script printed {one:?}");
    let two = script_output(dir.path(), COMPILED_SCRIPT)?;
    ensure!(two == script_output(dir.path(), COMPILED_SCRIPT)?, "second script output differs between runs");
    let lines: Vec<&str> = two.lines().collect();
    ensure!(
        lines.len() == 3 && lines[0] == "14" && lines[1] == "4" && size_of(lines[2]) == 4,
        "second script printed {two:?}"
    );
    Ok(format!("printed 4 / {:?} and 14 / 4 / {:?}", one.lines().nth(1).unwrap(), lines[2]))
}

/// Everything but the time, plus the answer digest.
fn non_time_columns(r: &BenchReport) -> Vec<String> {
    r.records
        .iter()
        .map(|x| {
            format!(
                "{},{},{},{},{},{:?}",
                x.instance,
                x.operation.name(),
                x.approach.name(),
                x.l,
                x.status.name(),
                x.digest
            )
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut cfg = BenchConfig::new(&corpus);
    cfg.timeout = Duration::from_secs(10);
    cfg.seed = 7;
    let first = run_bench(&cfg).map_err(|e| e.to_string())?;
    for row in &first.rows {
        ensure!(
            row.success_rate == 1.0,
            "{} {}: success rate {}",
            row.operation.name(),
            row.approach.name(),
            row.success_rate
        );
    }
    ensure!(first.disagreements().is_empty(), "approaches disagree: {:?}", first.disagreements());

    let mut csv_bytes = Vec::new();
    first.write_csv(&mut csv_bytes).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(csv_bytes.as_slice());
    let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    ensure!(header == ["instance", "operation", "approach", "l", "status", "seconds"], "header {header:?}");
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        ensure!(rec.len() == 6, "row width {}", rec.len());
        ensure!(rec[3].parse::<i64>().is_ok(), "bad l `{}`", &rec[3]);
        match &rec[4] {
            "ok" => ensure!(rec[5].parse::<f64>().is_ok_and(|s| s >= 0.0), "bad seconds `{}`", &rec[5]),
            "timeout" | "failed" => ensure!(rec[5].is_empty(), "time recorded for a failed run"),
            other => return Err(format!("bad status `{other}`")),
        }
        rows += 1;
    }
    ensure!(rows == first.records.len(), "{rows} CSV rows for {} records", first.records.len());
    ensure!(first.records.iter().all(|r| r.status == RunStatus::Ok), "some run failed");

    let second = run_bench(&cfg).map_err(|e| e.to_string())?;
    ensure!(non_time_columns(&first) == non_time_columns(&second), "rerun changed non-time columns");
    Ok(format!("{} runs over {} rows all succeeded; rerun identical", first.records.len(), first.rows.len()))
}

fn main() {
    let started = Instant::now();
    let corpus = fuzz_corpus();
    let criteria: Vec<Criterion> = vec![
        ("mobile encoding equals the transcribed CNF", Box::new(criterion_1)),
        ("count agreement on the mobile model", Box::new(criterion_2)),
        ("fuzz equivalence of counts and optima", Box::new(|| criterion_3(&corpus))),
        ("top-k cross-check", Box::new(|| criterion_4(&corpus))),
        ("sampling uniformity", Box::new(criterion_5)),
        ("enumeration completeness and prefixes", Box::new(|| criterion_6(&corpus))),
        ("structural validation", Box::new(|| criterion_7(&corpus))),
        ("scripts end to end", Box::new(criterion_8)),
        ("bench harness", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed, {:.2?}", criteria.len() - failed, started.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
