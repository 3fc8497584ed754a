use std::fmt::Write;

use super::{CnfError, CnfFormula, Lit};

/// Parses DIMACS CNF text.
///
/// Comment lines (`c ...`) are skipped. A clause-count mismatch against the
/// header is logged and tolerated; literals beyond the declared variable count
/// are fatal.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let mut formula: Option<CnfFormula> = None;
    let mut declared_clauses = 0usize;
    let mut current: Vec<Lit> = Vec::new();
    let mut seen_clauses = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if formula.is_some() {
                return Err(CnfError::Syntax {
                    line: line_no,
                    message: "duplicate header".into(),
                });
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(CnfError::Syntax {
                    line: line_no,
                    message: format!("malformed header `{line}`"),
                });
            }
            let parse = |s: &str| {
                s.parse::<u64>().map_err(|_| CnfError::Syntax {
                    line: line_no,
                    message: format!("invalid number `{s}` in header"),
                })
            };
            let n = parse(fields[2])?;
            let n = u32::try_from(n)
                .ok()
                .filter(|&n| n < u32::MAX >> 1)
                .ok_or_else(|| CnfError::Syntax {
                    line: line_no,
                    message: "variable count too large".into(),
                })?;
            declared_clauses = parse(fields[3])? as usize;
            formula = Some(CnfFormula::new(n));
            continue;
        }
        let f = formula.as_mut().ok_or(CnfError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| CnfError::Syntax {
                line: line_no,
                message: format!("invalid literal `{tok}`"),
            })?;
            if v == 0 {
                f.add_clause(current.drain(..))?;
                seen_clauses += 1;
                continue;
            }
            if v.unsigned_abs() > u64::from(f.num_vars()) {
                return Err(CnfError::LiteralOutOfRange {
                    lit: v,
                    num_vars: f.num_vars(),
                });
            }
            current.extend(Lit::from_dimacs(v));
        }
    }
    let mut f = formula.ok_or(CnfError::MissingHeader)?;
    if !current.is_empty() {
        // Final clause without terminating 0.
        f.add_clause(current.drain(..))?;
        seen_clauses += 1;
    }
    if seen_clauses != declared_clauses {
        log::warn!(
            "DIMACS header declares {declared_clauses} clauses, found {seen_clauses}"
        );
    }
    Ok(f)
}

/// Renders a formula as DIMACS CNF. The header counts the stored clauses.
pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses()).unwrap();
    for clause in f.clauses() {
        for lit in clause {
            write!(out, "{} ", lit).unwrap();
        }
        out.push_str("0\n");
    }
    out
}
