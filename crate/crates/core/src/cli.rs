//! The `fmreason` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 analysis failure or timeout,
//! 3 unreadable or malformed input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_bench, Approach, BenchConfig, BenchOp};
use crate::cnf::{parse_dimacs, parse_weights, write_dimacs, CnfFormula, Weighting};
use crate::compiler::{compile_with, CompileError, CompileOptions};
use crate::ddnnf::{parse_c2d_nnf, parse_canonical, write_canonical, C2dMode, DdnnfCircuit};
use crate::deadline::Deadline;
use crate::direct::{
    enumerate_direct, optimize_direct, sat_direct, topk_configs_direct, topk_values_direct, DirectError,
    DirectOptions, TopKStop,
};
use crate::fm::{encode_fm, parse_fm};
use crate::queries::{
    count_models, enumerate_models, optimize, sample_uniform, topk_transform, QueryError, TopKEntries, TopKList,
    TopKMode,
};
use crate::script::{run_script, ScriptErrorKind};
use crate::{Direction, Limit};

pub const SEED_ENV: &str = "FMREASON_SEED";

#[derive(Debug, Parser)]
#[command(name = "fmreason", version, about = "Feature-model reasoning over CNF and Decision-DNNF")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode a feature model as DIMACS CNF
    Encode(Common),
    /// Compile CNF (or a feature model) into a canonical Decision-DNNF
    Compile(Common),
    /// Count configurations (compiled mode only)
    Count(Common),
    /// Find one configuration
    Sat(Common),
    /// Enumerate configurations (all unless --k is given)
    Enum(Common),
    /// Draw uniform samples (compiled mode only)
    Sample(Common),
    /// Find an optimal configuration
    Opt(Common),
    /// The k best distinct objective values
    TopkValues(Common),
    /// The k best configurations
    TopkConfigs(Common),
    /// Run a script
    Run(Common),
    /// Benchmark both approaches on a corpus directory given by --input
    Bench(BenchArgs),
    /// Check a circuit for decomposability and decision form
    Validate(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Input file: .fm, .cnf/.dimacs, .nnf (c2d) or .ddnnf (canonical)
    #[arg(long)]
    input: PathBuf,
    /// direct (CNF + SAT) or compiled (Decision-DNNF)
    #[arg(long, default_value = "compiled")]
    mode: String,
    #[arg(long)]
    k: Option<usize>,
    /// Weighting file; defaults to weight 1 per selected feature
    #[arg(long)]
    weights: Option<PathBuf>,
    /// min or max
    #[arg(long, default_value = "min")]
    dir: String,
    /// Defaults to $FMREASON_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Seconds
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated operations
    #[arg(long, value_delimiter = ',')]
    ops: Option<Vec<String>>,
    /// Comma-separated approaches
    #[arg(long, value_delimiter = ',')]
    approaches: Option<Vec<String>>,
    /// Weights are drawn from 0..=l
    #[arg(long, default_value_t = 1_000_000)]
    l: i64,
    /// Weightings per instance
    #[arg(long, default_value_t = 5)]
    functions: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Analysis(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Analysis(_) => 2,
            Failure::Input(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Analysis(m) | Failure::Input(m) => m,
        }
    }
}

impl From<DirectError> for Failure {
    fn from(e: DirectError) -> Self {
        if e.is_timeout() {
            Failure::Analysis("timeout".into())
        } else {
            Failure::Analysis(e.to_string())
        }
    }
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::WeightingSize { .. } => Failure::Input(e.to_string()),
            other => Failure::Analysis(other.to_string()),
        }
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Timeout(_) => Failure::Analysis("timeout".into()),
            other => Failure::Analysis(other.to_string()),
        }
    }
}

enum Loaded {
    Cnf(CnfFormula),
    Circuit(DdnnfCircuit),
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn extension(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = read(path)?;
    let bad = |e: &dyn std::fmt::Display| Failure::Input(format!("{}: {e}", path.display()));
    match extension(path) {
        "fm" => Ok(Loaded::Cnf(encode_fm(&parse_fm(&text).map_err(|e| bad(&e))?).0)),
        "cnf" | "dimacs" => Ok(Loaded::Cnf(parse_dimacs(&text).map_err(|e| bad(&e))?)),
        "nnf" => Ok(Loaded::Circuit(parse_c2d_nnf(&text, C2dMode::Strict).map_err(|e| bad(&e))?)),
        "ddnnf" => Ok(Loaded::Circuit(parse_canonical(&text).map_err(|e| bad(&e))?)),
        other => Err(Failure::Input(format!(
            "{}: unknown input type `.{other}` (expected .fm, .cnf, .dimacs, .nnf or .ddnnf)",
            path.display()
        ))),
    }
}

struct Ctx<'a> {
    args: &'a Common,
    deadline: Deadline,
}

impl Ctx<'_> {
    fn approach(&self) -> Result<Approach, Failure> {
        Approach::parse(&self.args.mode)
            .ok_or_else(|| Failure::Usage(format!("--mode must be direct or compiled, got `{}`", self.args.mode)))
    }

    fn dir(&self) -> Result<Direction, Failure> {
        Direction::parse(&self.args.dir)
            .ok_or_else(|| Failure::Usage(format!("--dir must be min or max, got `{}`", self.args.dir)))
    }

    fn k(&self, default: usize) -> Result<usize, Failure> {
        match self.args.k {
            Some(0) => Err(Failure::Usage("--k must be at least 1".into())),
            Some(k) => Ok(k),
            None => Ok(default),
        }
    }

    fn direct(&self) -> DirectOptions {
        DirectOptions::with_deadline(self.deadline)
    }

    fn cnf(&self) -> Result<CnfFormula, Failure> {
        match load(&self.args.input)? {
            Loaded::Cnf(f) => Ok(f),
            Loaded::Circuit(_) => Err(Failure::Usage("direct mode needs a .fm, .cnf or .dimacs input".into())),
        }
    }

    fn circuit(&self) -> Result<DdnnfCircuit, Failure> {
        match load(&self.args.input)? {
            Loaded::Circuit(c) => Ok(c),
            Loaded::Cnf(f) => {
                let opts = CompileOptions {
                    deadline: self.deadline,
                    ..CompileOptions::default()
                };
                Ok(compile_with(&f, &opts)?)
            }
        }
    }

    fn weights(&self, num_vars: u32) -> Result<Weighting, Failure> {
        let w = match &self.args.weights {
            Some(p) => parse_weights(&read(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
            None => Weighting::unit_positive(num_vars.max(1)).map_err(|e| Failure::Input(e.to_string()))?,
        };
        if w.num_vars() != num_vars {
            return Err(Failure::Input(format!(
                "weighting has {} variables but the input has {num_vars}",
                w.num_vars()
            )));
        }
        Ok(w)
    }

    fn seed(&self) -> Result<u64, Failure> {
        if let Some(s) = self.args.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
            Err(_) => Ok(0),
        }
    }
}

fn lines<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| format!("{x}\n")).collect()
}

fn run_command(command: &Command, stdout: &mut dyn Write) -> Result<String, Failure> {
    let common = match command {
        Command::Bench(b) => &b.common,
        Command::Encode(c)
        | Command::Compile(c)
        | Command::Count(c)
        | Command::Sat(c)
        | Command::Enum(c)
        | Command::Sample(c)
        | Command::Opt(c)
        | Command::TopkValues(c)
        | Command::TopkConfigs(c)
        | Command::Run(c)
        | Command::Validate(c) => c,
    };
    if !(common.timeout > 0.0 && common.timeout.is_finite()) {
        return Err(Failure::Usage("--timeout must be a positive number of seconds".into()));
    }
    let timeout = Duration::from_secs_f64(common.timeout);
    let ctx = Ctx {
        args: common,
        deadline: Deadline::after(timeout),
    };
    let approach = ctx.approach()?;
    match command {
        Command::Encode(_) => {
            if extension(&common.input) != "fm" {
                return Err(Failure::Usage("encode needs a .fm input".into()));
            }
            let fm = parse_fm(&read(&common.input)?).map_err(|e| Failure::Input(e.to_string()))?;
            let (f, names) = encode_fm(&fm);
            let mut out = String::new();
            for (i, n) in names.names().iter().enumerate() {
                out.push_str(&format!("c {} {n}\n", i + 1));
            }
            out.push_str(&write_dimacs(&f));
            Ok(out)
        }
        Command::Compile(_) => {
            let f = ctx.cnf()?;
            let opts = CompileOptions {
                deadline: ctx.deadline,
                ..CompileOptions::default()
            };
            let c = compile_with(&f, &opts)?;
            write_canonical(&c).map_err(|e| Failure::Analysis(e.to_string()))
        }
        Command::Count(_) => match approach {
            Approach::Direct => Err(Failure::Usage(
                "counting is only offered in compiled mode (use --mode compiled)".into(),
            )),
            Approach::Compiled => Ok(format!("{}\n", count_models(&ctx.circuit()?))),
        },
        Command::Sat(_) => {
            let m = match approach {
                Approach::Direct => sat_direct(&ctx.cnf()?, &ctx.direct())?,
                Approach::Compiled => enumerate_models(&ctx.circuit()?, Limit::First(1))?.next(),
            };
            Ok(match m {
                Some(m) => format!("SAT\n{m}\n"),
                None => "UNSAT\n".into(),
            })
        }
        Command::Enum(_) => {
            let limit = match common.k {
                None => Limit::All,
                Some(_) => Limit::First(ctx.k(1)?),
            };
            match approach {
                Approach::Direct => Ok(lines(enumerate_direct(&ctx.cnf()?, limit, &ctx.direct())?)),
                Approach::Compiled => {
                    // Stream straight to the output: the model set may be huge.
                    let c = ctx.circuit()?;
                    for m in enumerate_models(&c, limit)? {
                        writeln!(stdout, "{m}").map_err(|e| Failure::Analysis(e.to_string()))?;
                    }
                    Ok(String::new())
                }
            }
        }
        Command::Sample(_) => match approach {
            Approach::Direct => Err(Failure::Usage("sampling is only offered in compiled mode".into())),
            Approach::Compiled => {
                let c = ctx.circuit()?;
                Ok(lines(sample_uniform(&c, ctx.k(1)?, ctx.seed()?)?))
            }
        },
        Command::Opt(_) => {
            let dir = ctx.dir()?;
            let r = match approach {
                Approach::Direct => {
                    let f = ctx.cnf()?;
                    optimize_direct(&f, &ctx.weights(f.num_vars())?, dir, &ctx.direct())?
                }
                Approach::Compiled => {
                    let c = ctx.circuit()?;
                    optimize(&c, &ctx.weights(c.num_vars())?, dir)?
                }
            };
            Ok(match r {
                Some(r) => format!("{}\n{}\n", r.value, r.model),
                None => "UNSAT\n".into(),
            })
        }
        Command::TopkValues(_) | Command::TopkConfigs(_) => {
            let dir = ctx.dir()?;
            let k = ctx.k(10)?;
            let configs = matches!(command, Command::TopkConfigs(_));
            let list = match approach {
                Approach::Direct => {
                    let f = ctx.cnf()?;
                    let w = ctx.weights(f.num_vars())?;
                    let entries = if configs {
                        TopKEntries::Configurations(
                            topk_configs_direct(&f, &w, k, dir, TopKStop::KBest, &ctx.direct())?
                                .into_iter()
                                .map(|r| (r.value, r.model))
                                .collect(),
                        )
                    } else {
                        TopKEntries::Values(topk_values_direct(&f, &w, k, dir, &ctx.direct())?)
                    };
                    TopKList { dir, k, entries }
                }
                Approach::Compiled => {
                    let c = ctx.circuit()?;
                    let w = ctx.weights(c.num_vars())?;
                    let mode = if configs { TopKMode::Configurations } else { TopKMode::Values };
                    topk_transform(&c, &w, k, dir, mode)?
                }
            };
            Ok(list.to_string())
        }
        Command::Run(_) => {
            let text = read(&common.input)?;
            let base = common.input.parent().unwrap_or(Path::new("."));
            let mut out = Vec::new();
            let result = run_script(&text, base, &mut out);
            stdout
                .write_all(&out)
                .map_err(|e| Failure::Analysis(e.to_string()))?;
            match result {
                Ok(()) => Ok(String::new()),
                Err(e) => Err(match e.kind {
                    ScriptErrorKind::Analysis { .. } | ScriptErrorKind::Output(_) => Failure::Analysis(e.to_string()),
                    ScriptErrorKind::Unsupported { .. } => Failure::Usage(e.to_string()),
                    _ => Failure::Input(e.to_string()),
                }),
            }
        }
        Command::Bench(b) => {
            let mut cfg = BenchConfig::new(&common.input);
            cfg.timeout = timeout;
            cfg.seed = ctx.seed()?;
            cfg.k = ctx.k(10)?;
            cfg.dir = ctx.dir()?;
            cfg.l = b.l;
            cfg.functions = b.functions;
            if let Some(ops) = &b.ops {
                cfg.operations = ops
                    .iter()
                    .map(|s| BenchOp::parse(s).ok_or_else(|| Failure::Usage(format!("unknown operation `{s}`"))))
                    .collect::<Result<_, _>>()?;
            }
            if let Some(aps) = &b.approaches {
                cfg.approaches = aps
                    .iter()
                    .map(|s| Approach::parse(s).ok_or_else(|| Failure::Usage(format!("unknown approach `{s}`"))))
                    .collect::<Result<_, _>>()?;
            }
            let report = run_bench(&cfg).map_err(|e| match e {
                crate::bench::BenchError::Config(m) => Failure::Usage(m),
                other => Failure::Input(other.to_string()),
            })?;
            if let Some(path) = &common.out {
                let file = std::fs::File::create(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                report.write_csv(file).map_err(|e| Failure::Input(e.to_string()))?;
            }
            for (inst, op) in report.disagreements() {
                log::error!("{inst}: approaches disagree on {op}");
            }
            Ok(report.to_string())
        }
        Command::Validate(_) => {
            let text = read(&common.input)?;
            let parsed = match extension(&common.input) {
                "nnf" => parse_c2d_nnf(&text, C2dMode::Permissive),
                "ddnnf" => parse_canonical(&text),
                _ => return Err(Failure::Usage("validate needs a .nnf or .ddnnf input".into())),
            };
            match parsed {
                Ok(c) => {
                    let report = c.validate();
                    if report.is_valid() {
                        Ok("valid\n".into())
                    } else {
                        Err(Failure::Analysis(report.to_string()))
                    }
                }
                Err(crate::ddnnf::DdnnfError::Invalid(report)) => Err(Failure::Analysis(lines(
                    report.violations.iter().map(|v| v.to_string()),
                ))),
                Err(e) => Err(Failure::Input(e.to_string())),
            }
        }
    }
}

/// Runs the command line `args` (including the program name) and returns the
/// exit code.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let out_path = match &cli.command {
        Command::Bench(_) | Command::Run(_) | Command::Enum(_) => None,
        Command::Encode(c) | Command::Compile(c) => c.out.clone(),
        Command::Count(c)
        | Command::Sat(c)
        | Command::Sample(c)
        | Command::Opt(c)
        | Command::TopkValues(c)
        | Command::TopkConfigs(c)
        | Command::Validate(c) => c.out.clone(),
    };
    match run_command(&cli.command, stdout) {
        Ok(text) => {
            let written = match out_path {
                Some(p) => std::fs::write(&p, text).map_err(|e| format!("{}: {e}", p.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    3
                }
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message().trim_end());
            f.code()
        }
    }
}
