//! Text formats: the repo-native canonical format and c2d's NNF output.
//!
//! Canonical:
//! ```text
//! ddnnf <num_nodes> <root_id> <num_vars>
//! T | F | L <lit> | A <count> <ids..> | D <var> <hi> <lo>
//! ```
//! one node per line in id order, comment lines starting with `c`.

use std::fmt::Write as _;

use super::{CircuitBuilder, DdnnfCircuit, DdnnfError, Node, NodeId, ViolationKind};
use crate::cnf::{Lit, Var};

fn syntax(line: usize, message: impl Into<String>) -> DdnnfError {
    DdnnfError::Syntax {
        line,
        message: message.into(),
    }
}

fn numbers<T: std::str::FromStr>(line: usize, fields: &[&str]) -> Result<Vec<T>, DdnnfError> {
    fields
        .iter()
        .map(|f| f.parse::<T>().map_err(|_| syntax(line, format!("bad number `{f}`"))))
        .collect()
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let fields: Vec<&str> = l.split_whitespace().collect();
        match fields.first() {
            None => None,
            Some(&"c") => None,
            Some(_) => Some((i + 1, fields)),
        }
    })
}

fn parse_lit(line: usize, s: &str) -> Result<Lit, DdnnfError> {
    let v: i64 = s.parse().map_err(|_| syntax(line, format!("bad literal `{s}`")))?;
    Lit::from_dimacs(v).ok_or_else(|| syntax(line, format!("bad literal `{s}`")))
}

fn counted_ids(line: usize, fields: &[&str]) -> Result<Vec<NodeId>, DdnnfError> {
    let Some((count, ids)) = fields.split_first() else {
        return Err(syntax(line, "missing child count"));
    };
    let count: usize = count.parse().map_err(|_| syntax(line, format!("bad count `{count}`")))?;
    if ids.len() != count {
        return Err(syntax(line, format!("expected {count} child ids, found {}", ids.len())));
    }
    numbers(line, ids)
}

/// Reads the canonical format. The circuit must be a valid Decision-DNNF.
pub fn parse_canonical(text: &str) -> Result<DdnnfCircuit, DdnnfError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| syntax(1, "missing `ddnnf` header"))?;
    if header.len() != 4 || header[0] != "ddnnf" {
        return Err(syntax(hline, "expected `ddnnf <num_nodes> <root_id> <num_vars>`"));
    }
    let num_nodes: usize = numbers(hline, &header[1..2])?[0];
    let root: usize = numbers(hline, &header[2..3])?[0];
    let num_vars: u32 = numbers(hline, &header[3..4])?[0];
    if num_nodes == 0 {
        return Err(DdnnfError::Header("a circuit needs at least one node".into()));
    }
    let mut nodes = Vec::with_capacity(num_nodes);
    for (line, fields) in lines {
        let args = &fields[1..];
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(syntax(line, format!("`{}` takes {n} arguments", fields[0])))
            }
        };
        let node = match fields[0] {
            "T" => {
                arity(0)?;
                Node::True
            }
            "F" => {
                arity(0)?;
                Node::False
            }
            "L" => {
                arity(1)?;
                Node::Lit(parse_lit(line, args[0])?)
            }
            "A" => Node::And(counted_ids(line, args)?),
            "D" => {
                arity(3)?;
                let v: Vec<u32> = numbers(line, &args[..1])?;
                let ids: Vec<NodeId> = numbers(line, &args[1..])?;
                if v[0] == 0 {
                    return Err(syntax(line, "decision variable must be positive"));
                }
                Node::Decision {
                    var: Var::new(v[0]),
                    hi: ids[0],
                    lo: ids[1],
                }
            }
            other => return Err(syntax(line, format!("unknown node kind `{other}`"))),
        };
        nodes.push(node);
    }
    if nodes.len() != num_nodes {
        return Err(DdnnfError::Header(format!(
            "header declares {num_nodes} nodes, found {}",
            nodes.len()
        )));
    }
    DdnnfCircuit::new_validated(nodes, root, num_vars)
}

/// Writes the canonical format. Only strict circuits are representable.
pub fn write_canonical(c: &DdnnfCircuit) -> Result<String, DdnnfError> {
    let mut out = String::new();
    writeln!(out, "ddnnf {} {} {}", c.num_nodes(), c.root(), c.num_vars()).unwrap();
    for (id, node) in c.nodes().iter().enumerate() {
        match node {
            Node::True => out.push_str("T\n"),
            Node::False => out.push_str("F\n"),
            Node::Lit(l) => writeln!(out, "L {l}").unwrap(),
            Node::And(children) => {
                write!(out, "A {}", children.len()).unwrap();
                for ch in children {
                    write!(out, " {ch}").unwrap();
                }
                out.push('\n');
            }
            Node::Decision { var, hi, lo } => writeln!(out, "D {var} {hi} {lo}").unwrap(),
            Node::Or(_) => return Err(DdnnfError::NotDecision { node: id }),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum C2dMode {
    /// Every OR node must be a binary decision.
    #[default]
    Strict,
    /// Keep non-decision OR nodes; the result only supports counting and
    /// consistency.
    Permissive,
}

/// If `id` is the literal on `x` or an AND with such a literal child, the
/// literal's polarity and the remainder.
fn split_on(b: &mut CircuitBuilder, id: NodeId, x: Var) -> Option<(bool, NodeId)> {
    match b.node(id).clone() {
        Node::Lit(l) if l.var() == x => Some((l.is_positive(), b.true_node())),
        Node::And(children) => {
            let pos = children
                .iter()
                .position(|&c| matches!(b.node(c), Node::Lit(l) if l.var() == x))?;
            let Node::Lit(l) = *b.node(children[pos]) else {
                unreachable!()
            };
            let rest: Vec<NodeId> = children
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != pos)
                .map(|(_, &c)| c)
                .collect();
            Some((l.is_positive(), b.and(rest)))
        }
        _ => None,
    }
}

/// Reads c2d's NNF output. The last node is the root. Binary OR nodes whose
/// branches conjoin `x` and `-x` on their decision variable become decision
/// nodes.
pub fn parse_c2d_nnf(text: &str, mode: C2dMode) -> Result<DdnnfCircuit, DdnnfError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| syntax(1, "missing `nnf` header"))?;
    if header.len() != 4 || header[0] != "nnf" {
        return Err(syntax(hline, "expected `nnf <num_nodes> <num_edges> <num_vars>`"));
    }
    let counts: Vec<usize> = numbers(hline, &header[1..])?;
    let (num_nodes, num_edges) = (counts[0], counts[1]);
    let num_vars = u32::try_from(counts[2]).map_err(|_| DdnnfError::Header("too many variables".into()))?;

    let mut b = CircuitBuilder::new();
    let mut map: Vec<NodeId> = Vec::with_capacity(num_nodes);
    let mut edges = 0usize;
    for (line, fields) in lines {
        let args = &fields[1..];
        let resolve = |map: &Vec<NodeId>, ids: Vec<NodeId>| -> Result<Vec<NodeId>, DdnnfError> {
            ids.into_iter()
                .map(|i| {
                    map.get(i).copied().ok_or(DdnnfError::DanglingChild {
                        node: map.len(),
                        child: i,
                    })
                })
                .collect()
        };
        let id = match fields[0] {
            "L" => {
                if args.len() != 1 {
                    return Err(syntax(line, "`L` takes one literal"));
                }
                let l = parse_lit(line, args[0])?;
                if l.var().index() > num_vars {
                    return Err(DdnnfError::VarOutOfRange {
                        node: map.len(),
                        var: l.var().index(),
                        num_vars,
                    });
                }
                b.lit(l)
            }
            "A" => {
                let ids = counted_ids(line, args)?;
                edges += ids.len();
                let ids = resolve(&map, ids)?;
                b.and(ids)
            }
            "O" => {
                let Some((var, rest)) = args.split_first() else {
                    return Err(syntax(line, "`O` needs a decision variable"));
                };
                let var: u32 = var.parse().map_err(|_| syntax(line, format!("bad variable `{var}`")))?;
                let ids = counted_ids(line, rest)?;
                edges += ids.len();
                let ids = resolve(&map, ids)?;
                or_node(&mut b, map.len(), var, ids, mode)?
            }
            other => return Err(syntax(line, format!("unknown node kind `{other}`"))),
        };
        map.push(id);
    }
    if map.len() != num_nodes {
        return Err(DdnnfError::Header(format!(
            "header declares {num_nodes} nodes, found {}",
            map.len()
        )));
    }
    if edges != num_edges {
        log::warn!("nnf header declares {num_edges} edges, found {edges}");
    }
    let root = *map.last().ok_or_else(|| DdnnfError::Header("empty circuit".into()))?;
    let c = b.finish(root, num_vars)?;
    let report = c.validate();
    let fatal = report
        .violations
        .iter()
        .any(|v| mode == C2dMode::Strict || v.kind != ViolationKind::NonDecisionOr);
    if fatal {
        return Err(DdnnfError::Invalid(report));
    }
    Ok(c)
}

fn or_node(
    b: &mut CircuitBuilder,
    node: usize,
    var: u32,
    ids: Vec<NodeId>,
    mode: C2dMode,
) -> Result<NodeId, DdnnfError> {
    if ids.is_empty() {
        return Ok(b.false_node());
    }
    if var > 0 && ids.len() == 2 {
        let x = Var::new(var);
        if let (Some((p0, r0)), Some((p1, r1))) = (split_on(b, ids[0], x), split_on(b, ids[1], x)) {
            if p0 != p1 {
                let (hi, lo) = if p0 { (r0, r1) } else { (r1, r0) };
                return Ok(b.decision(x, hi, lo));
            }
        }
    }
    match mode {
        C2dMode::Strict => Err(DdnnfError::NotDecision { node }),
        C2dMode::Permissive => Ok(b.or(ids)),
    }
}
