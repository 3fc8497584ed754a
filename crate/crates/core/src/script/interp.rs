use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use super::{parse_script, Expr, Script, StatementKind};
use crate::cnf::{parse_dimacs, write_weights, CnfFormula, Model, Var, Weighting};
use crate::compiler::compile;
use crate::ddnnf::{parse_c2d_nnf, parse_canonical, C2dMode, DdnnfCircuit};
use crate::direct::{
    enumerate_direct, optimize_direct, sat_direct, topk_configs_direct, topk_values_direct, DirectOptions, TopKStop,
};
use crate::fm::{encode_fm, parse_fm};
use crate::queries::{
    count_models, enumerate_models, optimize, sample_uniform, topk_transform, TopKEntries, TopKList, TopKMode,
};
use crate::{Direction, Limit};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuntimeValue {
    Cnf(Rc<CnfFormula>),
    Ddnnf(Rc<DdnnfCircuit>),
    Weighting(Weighting),
    Model(Model),
    /// Result of a satisfiability or optimization query without models.
    Unsat,
    Models(Vec<Model>),
    Values(Vec<i64>),
    TopK(TopKList),
    Integer(BigInt),
    Str(String),
}

impl RuntimeValue {
    pub fn type_name(&self) -> &'static str {
        match self {
            RuntimeValue::Cnf(_) => "cnf",
            RuntimeValue::Ddnnf(_) => "ddnnf",
            RuntimeValue::Weighting(_) => "weighting",
            RuntimeValue::Model(_) => "model",
            RuntimeValue::Unsat => "unsat",
            RuntimeValue::Models(_) => "model list",
            RuntimeValue::Values(_) => "value list",
            RuntimeValue::TopK(_) => "top-k list",
            RuntimeValue::Integer(_) => "integer",
            RuntimeValue::Str(_) => "string",
        }
    }
}

impl fmt::Display for RuntimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines = |f: &mut fmt::Formatter<'_>, items: Vec<String>| f.write_str(&items.join("\n"));
        match self {
            RuntimeValue::Cnf(c) => write!(f, "cnf {} variables {} clauses", c.num_vars(), c.num_clauses()),
            RuntimeValue::Ddnnf(c) => write!(f, "ddnnf {} nodes {} variables", c.num_nodes(), c.num_vars()),
            RuntimeValue::Weighting(w) => f.write_str(write_weights(w).trim_end()),
            RuntimeValue::Model(m) => write!(f, "{m}"),
            RuntimeValue::Unsat => f.write_str("UNSAT"),
            RuntimeValue::Models(ms) => lines(f, ms.iter().map(|m| m.to_string()).collect()),
            RuntimeValue::Values(vs) => lines(f, vs.iter().map(|v| v.to_string()).collect()),
            RuntimeValue::TopK(t) => f.write_str(t.to_string().trim_end()),
            RuntimeValue::Integer(i) => write!(f, "{i}"),
            RuntimeValue::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptErrorKind {
    #[error("syntax error: {0}")]
    Parse(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("cannot read {}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("undefined variable `{0}`")]
    UndefinedVariable(String),
    #[error("unknown function `{0}`")]
    UnknownBuiltin(String),
    #[error("`{name}` takes {expected} arguments, got {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("`{name}` argument {position}: expected {expected}, got {found}")]
    TypeMismatch {
        name: String,
        position: usize,
        expected: &'static str,
        found: &'static str,
    },
    #[error("`{name}` requires a compiled representation")]
    Unsupported { name: String },
    #[error("`{name}`: {message}")]
    Analysis { name: String, message: String },
    #[error("cannot write output: {0}")]
    Output(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ScriptError {
    pub line: usize,
    pub kind: ScriptErrorKind,
}

/// Executes scripts with one variable environment. Relative file names are
/// resolved against `base_dir`.
pub struct Interpreter {
    base_dir: PathBuf,
    env: HashMap<String, RuntimeValue>,
}

type Outcome = Result<RuntimeValue, ScriptErrorKind>;

struct Call<'a> {
    name: &'a str,
    args: Vec<RuntimeValue>,
}

impl Call<'_> {
    fn arity(&self, n: usize) -> Result<(), ScriptErrorKind> {
        if self.args.len() == n {
            Ok(())
        } else {
            Err(ScriptErrorKind::Arity {
                name: self.name.into(),
                expected: n,
                found: self.args.len(),
            })
        }
    }

    fn mismatch(&self, i: usize, expected: &'static str) -> ScriptErrorKind {
        ScriptErrorKind::TypeMismatch {
            name: self.name.into(),
            position: i + 1,
            expected,
            found: self.args[i].type_name(),
        }
    }

    fn analysis(&self, e: impl fmt::Display) -> ScriptErrorKind {
        ScriptErrorKind::Analysis {
            name: self.name.into(),
            message: e.to_string(),
        }
    }

    fn int(&self, i: usize) -> Result<i64, ScriptErrorKind> {
        match &self.args[i] {
            RuntimeValue::Integer(n) => n.to_i64().ok_or_else(|| self.analysis(format!("{n} is out of range"))),
            _ => Err(self.mismatch(i, "integer")),
        }
    }

    fn positive(&self, i: usize) -> Result<usize, ScriptErrorKind> {
        let n = self.int(i)?;
        if n < 1 {
            return Err(self.analysis(format!("expected a positive count, got {n}")));
        }
        Ok(n as usize)
    }

    fn str(&self, i: usize) -> Result<&str, ScriptErrorKind> {
        match &self.args[i] {
            RuntimeValue::Str(s) => Ok(s),
            _ => Err(self.mismatch(i, "string")),
        }
    }

    fn dir(&self, i: usize) -> Result<Direction, ScriptErrorKind> {
        let s = self.str(i)?;
        Direction::parse(s).ok_or_else(|| self.analysis(format!("direction must be \"min\" or \"max\", got {s:?}")))
    }

    fn weighting(&self, i: usize) -> Result<&Weighting, ScriptErrorKind> {
        match &self.args[i] {
            RuntimeValue::Weighting(w) => Ok(w),
            _ => Err(self.mismatch(i, "weighting")),
        }
    }

    fn model(&self, i: usize) -> Result<&Model, ScriptErrorKind> {
        match &self.args[i] {
            RuntimeValue::Model(m) => Ok(m),
            _ => Err(self.mismatch(i, "model")),
        }
    }

    fn rep(&self, i: usize) -> Result<Rep<'_>, ScriptErrorKind> {
        match &self.args[i] {
            RuntimeValue::Cnf(c) => Ok(Rep::Cnf(c)),
            RuntimeValue::Ddnnf(c) => Ok(Rep::Ddnnf(c)),
            _ => Err(self.mismatch(i, "cnf or ddnnf")),
        }
    }

    fn unsupported(&self) -> ScriptErrorKind {
        ScriptErrorKind::Unsupported { name: self.name.into() }
    }

    /// The weighting argument at `i`, checked against the representation's universe.
    fn weighting_for(&self, i: usize, rep: &Rep) -> Result<&Weighting, ScriptErrorKind> {
        let w = self.weighting(i)?;
        if w.num_vars() != rep.num_vars() {
            return Err(self.analysis(format!(
                "weighting has {} variables but the representation has {}",
                w.num_vars(),
                rep.num_vars()
            )));
        }
        Ok(w)
    }
}

enum Rep<'a> {
    Cnf(&'a CnfFormula),
    Ddnnf(&'a DdnnfCircuit),
}

impl Rep<'_> {
    fn num_vars(&self) -> u32 {
        match self {
            Rep::Cnf(c) => c.num_vars(),
            Rep::Ddnnf(c) => c.num_vars(),
        }
    }
}

fn model_or_unsat(m: Option<Model>) -> RuntimeValue {
    m.map_or(RuntimeValue::Unsat, RuntimeValue::Model)
}

impl Interpreter {
    pub fn new(base_dir: impl Into<PathBuf>) -> Interpreter {
        Interpreter {
            base_dir: base_dir.into(),
            env: HashMap::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&RuntimeValue> {
        self.env.get(name)
    }

    pub fn run(&mut self, script: &Script, out: &mut dyn Write) -> Result<(), ScriptError> {
        for st in &script.statements {
            let at = |kind| ScriptError { line: st.line, kind };
            match &st.kind {
                StatementKind::Assign { name, expr } => {
                    let v = self.eval(expr).map_err(at)?;
                    self.env.insert(name.clone(), v);
                }
                StatementKind::Print(expr) => {
                    let v = self.eval(expr).map_err(at)?;
                    writeln!(out, "{v}").map_err(|e| at(ScriptErrorKind::Output(e.to_string())))?;
                }
            }
        }
        Ok(())
    }

    fn eval(&self, e: &Expr) -> Outcome {
        match e {
            Expr::Int(n) => Ok(RuntimeValue::Integer(n.clone())),
            Expr::Str(s) => Ok(RuntimeValue::Str(s.clone())),
            Expr::Var(name) => self
                .env
                .get(name)
                .cloned()
                .ok_or_else(|| ScriptErrorKind::UndefinedVariable(name.clone())),
            Expr::Call { name, args } => {
                let args = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                self.call(&Call { name, args })
            }
        }
    }

    fn read(&self, c: &Call, i: usize) -> Result<(PathBuf, String), ScriptErrorKind> {
        let path = self.base_dir.join(c.str(i)?);
        match std::fs::read_to_string(&path) {
            Ok(text) => Ok((path, text)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(ScriptErrorKind::FileNotFound(path)),
            Err(e) => Err(ScriptErrorKind::Input {
                path,
                message: e.to_string(),
            }),
        }
    }

    fn call(&self, c: &Call) -> Outcome {
        let input_err = |path: PathBuf, e: &dyn fmt::Display| ScriptErrorKind::Input {
            path,
            message: e.to_string(),
        };
        let direct = DirectOptions::default();
        match c.name {
            "load_cnf" => {
                c.arity(1)?;
                let (path, text) = self.read(c, 0)?;
                let f = parse_dimacs(&text).map_err(|e| input_err(path, &e))?;
                Ok(RuntimeValue::Cnf(Rc::new(f)))
            }
            "load_fm" => {
                c.arity(1)?;
                let (path, text) = self.read(c, 0)?;
                let fm = parse_fm(&text).map_err(|e| input_err(path, &e))?;
                Ok(RuntimeValue::Cnf(Rc::new(encode_fm(&fm).0)))
            }
            "load_ddnnf" => {
                c.arity(1)?;
                let (path, text) = self.read(c, 0)?;
                let circuit = if path.extension().is_some_and(|e| e == "nnf") {
                    parse_c2d_nnf(&text, C2dMode::Strict)
                } else {
                    parse_canonical(&text)
                }
                .map_err(|e| input_err(path, &e))?;
                Ok(RuntimeValue::Ddnnf(Rc::new(circuit)))
            }
            "compile" => {
                c.arity(1)?;
                match c.rep(0)? {
                    Rep::Cnf(f) => Ok(RuntimeValue::Ddnnf(Rc::new(compile(f).map_err(|e| c.analysis(e))?))),
                    Rep::Ddnnf(_) => Err(c.mismatch(0, "cnf")),
                }
            }
            "count" => {
                c.arity(1)?;
                match c.rep(0)? {
                    Rep::Cnf(_) => Err(c.unsupported()),
                    Rep::Ddnnf(d) => Ok(RuntimeValue::Integer(BigInt::from(count_models(d)))),
                }
            }
            "sat" => {
                c.arity(1)?;
                match c.rep(0)? {
                    Rep::Cnf(f) => Ok(model_or_unsat(sat_direct(f, &direct).map_err(|e| c.analysis(e))?)),
                    Rep::Ddnnf(d) => {
                        let mut it = enumerate_models(d, Limit::First(1)).map_err(|e| c.analysis(e))?;
                        Ok(model_or_unsat(it.next()))
                    }
                }
            }
            "enumerate" => {
                c.arity(2)?;
                let limit = Limit::First(c.positive(1)?);
                let models = match c.rep(0)? {
                    Rep::Cnf(f) => enumerate_direct(f, limit, &direct).map_err(|e| c.analysis(e))?,
                    Rep::Ddnnf(d) => enumerate_models(d, limit).map_err(|e| c.analysis(e))?.collect(),
                };
                Ok(RuntimeValue::Models(models))
            }
            "sample" => {
                c.arity(3)?;
                let rep = c.rep(0)?;
                let k = c.positive(1)?;
                let seed = c.int(2)?;
                match rep {
                    Rep::Cnf(_) => Err(c.unsupported()),
                    Rep::Ddnnf(d) => Ok(RuntimeValue::Models(
                        sample_uniform(d, k, seed as u64).map_err(|e| c.analysis(e))?,
                    )),
                }
            }
            "new_weighting" => {
                c.arity(1)?;
                let n = c.positive(0)?;
                let n = u32::try_from(n).map_err(|_| c.analysis("too many variables"))?;
                Ok(RuntimeValue::Weighting(Weighting::new(n, 0, 0).map_err(|e| c.analysis(e))?))
            }
            "set_default_positive_weight" | "set_default_negative_weight" => {
                c.arity(2)?;
                let mut w = c.weighting(0)?.clone();
                let value = c.int(1)?;
                if c.name == "set_default_positive_weight" {
                    w.set_default_positive(value)
                } else {
                    w.set_default_negative(value)
                }
                .map_err(|e| c.analysis(e))?;
                Ok(RuntimeValue::Weighting(w))
            }
            "set_weight" => {
                c.arity(4)?;
                let mut w = c.weighting(0)?.clone();
                let var = c.int(1)?;
                let var = u32::try_from(var).ok().filter(|&v| v >= 1).ok_or_else(|| c.analysis(format!("bad variable {var}")))?;
                w.set_weight(Var::new(var), c.int(2)?, c.int(3)?).map_err(|e| c.analysis(e))?;
                Ok(RuntimeValue::Weighting(w))
            }
            "get_weight" => {
                c.arity(2)?;
                let w = c.weighting(0)?;
                let m = c.model(1)?;
                if m.num_vars() != w.num_vars() {
                    return Err(c.analysis(format!(
                        "model has {} variables but the weighting has {}",
                        m.num_vars(),
                        w.num_vars()
                    )));
                }
                Ok(RuntimeValue::Integer(BigInt::from(w.value(m))))
            }
            "optimize" => {
                c.arity(3)?;
                let rep = c.rep(0)?;
                let w = c.weighting_for(1, &rep)?;
                let dir = c.dir(2)?;
                let r = match rep {
                    Rep::Cnf(f) => optimize_direct(f, w, dir, &direct).map_err(|e| c.analysis(e))?,
                    Rep::Ddnnf(d) => optimize(d, w, dir).map_err(|e| c.analysis(e))?,
                };
                Ok(model_or_unsat(r.map(|r| r.model)))
            }
            "top_k_values" | "top_k_configs" => {
                c.arity(4)?;
                let rep = c.rep(0)?;
                let w = c.weighting_for(1, &rep)?;
                let k = c.positive(2)?;
                let dir = c.dir(3)?;
                let configs = c.name == "top_k_configs";
                let list = match rep {
                    Rep::Cnf(f) if configs => TopKList {
                        dir,
                        k,
                        entries: TopKEntries::Configurations(
                            topk_configs_direct(f, w, k, dir, TopKStop::KBest, &direct)
                                .map_err(|e| c.analysis(e))?
                                .into_iter()
                                .map(|r| (r.value, r.model))
                                .collect(),
                        ),
                    },
                    Rep::Cnf(f) => TopKList {
                        dir,
                        k,
                        entries: TopKEntries::Values(topk_values_direct(f, w, k, dir, &direct).map_err(|e| c.analysis(e))?),
                    },
                    Rep::Ddnnf(d) => {
                        let mode = if configs { TopKMode::Configurations } else { TopKMode::Values };
                        topk_transform(d, w, k, dir, mode).map_err(|e| c.analysis(e))?
                    }
                };
                Ok(match list.entries {
                    TopKEntries::Values(v) => RuntimeValue::Values(v),
                    _ => RuntimeValue::TopK(list),
                })
            }
            other => Err(ScriptErrorKind::UnknownBuiltin(other.into())),
        }
    }
}

/// Runs a parsed script with a fresh environment.
pub fn execute_script(script: &Script, base_dir: &Path, out: &mut dyn Write) -> Result<(), ScriptError> {
    Interpreter::new(base_dir).run(script, out)
}

/// Parses and runs `text`.
pub fn run_script(text: &str, base_dir: &Path, out: &mut dyn Write) -> Result<(), ScriptError> {
    let script = parse_script(text).map_err(|e| ScriptError {
        line: e.line,
        kind: ScriptErrorKind::Parse(e.message),
    })?;
    execute_script(&script, base_dir, out)
}
