use std::collections::HashMap;
use std::fmt::Write;

use super::{
    ConstraintKind, CrossTreeConstraint, Feature, FeatureId, FeatureModel, FmError, Group,
    GroupKind, Relation,
};

const INDENT: usize = 2;

enum Frame {
    Feature(FeatureId),
    Group(usize),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> FmError {
    FmError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Parses the indentation-based feature-model text format.
///
/// ```text
/// Root
///   Child [mandatory]
///     <alt>
///       A
///       B
/// constraints:
///   A => !Other
/// ```
pub fn parse_fm(text: &str) -> Result<FeatureModel, FmError> {
    let mut features: Vec<Feature> = Vec::new();
    let mut groups: Vec<Group> = Vec::new();
    let mut names: HashMap<String, FeatureId> = HashMap::new();
    let mut pending_constraints: Vec<(usize, ConstraintKind, String, String)> = Vec::new();
    // (depth, frame); depth of the line that opened the frame.
    let mut stack: Vec<(usize, Frame)> = Vec::new();
    let mut in_constraints = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed_end = raw.trim_end();
        let content = trimmed_end.trim_start();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let indent = trimmed_end.len() - content.len();
        if trimmed_end[..indent].contains('\t') {
            return Err(syntax(line_no, 1, "tabs are not allowed in indentation"));
        }
        if indent % INDENT != 0 {
            return Err(syntax(line_no, indent + 1, "indentation must be a multiple of 2 spaces"));
        }
        let depth = indent / INDENT;

        if depth == 0 && content == "constraints:" {
            if features.is_empty() {
                return Err(syntax(line_no, 1, "constraints section before the root feature"));
            }
            in_constraints = true;
            continue;
        }
        if in_constraints {
            if depth != 1 {
                return Err(syntax(line_no, indent + 1, "constraints must be indented one level"));
            }
            pending_constraints.push(parse_constraint(content, line_no, indent + 1)?);
            continue;
        }

        if content == "<alt>" || content == "<or>" {
            let kind = if content == "<alt>" {
                GroupKind::Alternative
            } else {
                GroupKind::Or
            };
            while stack.last().is_some_and(|(d, _)| *d >= depth) {
                close_frame(&mut stack, &groups, &features)?;
            }
            match stack.last() {
                Some((d, Frame::Feature(parent))) if *d + 1 == depth => {
                    groups.push(Group {
                        parent: *parent,
                        kind,
                        members: Vec::new(),
                    });
                    stack.push((depth, Frame::Group(groups.len() - 1)));
                }
                Some((_, Frame::Group(_))) => {
                    return Err(syntax(line_no, indent + 1, "a group cannot directly contain a group"));
                }
                _ => return Err(syntax(line_no, indent + 1, "group has no parent feature")),
            }
            continue;
        }

        let (name, tag, tag_col) = split_feature_line(content, line_no, indent)?;
        if names.contains_key(name) {
            return Err(FmError::DuplicateFeature(name.to_string()));
        }
        let id = FeatureId(features.len());
        if depth == 0 {
            if !features.is_empty() {
                return Err(syntax(line_no, 1, "only one root feature is allowed"));
            }
            if tag.is_some() {
                return Err(syntax(line_no, tag_col, "the root feature takes no tag"));
            }
            features.push(Feature {
                name: name.to_string(),
                parent: None,
                relation: Relation::Root,
            });
            names.insert(name.to_string(), id);
            stack.push((0, Frame::Feature(id)));
            continue;
        }
        while stack.last().is_some_and(|(d, _)| *d >= depth) {
            close_frame(&mut stack, &groups, &features)?;
        }
        let (parent, relation) = match stack.last() {
            Some((d, Frame::Feature(p))) if *d + 1 == depth => {
                let relation = match tag {
                    None | Some("optional") => Relation::Optional,
                    Some("mandatory") => Relation::Mandatory,
                    Some(other) => {
                        return Err(syntax(line_no, tag_col, format!("unknown tag `[{other}]`")))
                    }
                };
                (*p, relation)
            }
            Some((d, Frame::Group(g))) if *d + 1 == depth => {
                if tag.is_some() {
                    return Err(syntax(line_no, tag_col, "group members take no tag"));
                }
                groups[*g].members.push(id);
                (groups[*g].parent, Relation::GroupMember)
            }
            _ => return Err(syntax(line_no, indent + 1, "indentation skips a level")),
        };
        features.push(Feature {
            name: name.to_string(),
            parent: Some(parent),
            relation,
        });
        names.insert(name.to_string(), id);
        stack.push((depth, Frame::Feature(id)));
    }
    while !stack.is_empty() {
        close_frame(&mut stack, &groups, &features)?;
    }
    if features.is_empty() {
        return Err(syntax(1, 1, "no root feature"));
    }

    let mut constraints = Vec::new();
    for (line_no, kind, lhs, rhs) in pending_constraints {
        let find = |n: &str| {
            names
                .get(n)
                .copied()
                .ok_or_else(|| FmError::UnknownFeature(n.to_string()))
        };
        let (lhs_id, rhs_id) = (find(&lhs)?, find(&rhs)?);
        if lhs_id == rhs_id {
            return Err(syntax(line_no, 1, format!("constraint relates `{lhs}` to itself")));
        }
        constraints.push(CrossTreeConstraint {
            kind,
            lhs: lhs_id,
            rhs: rhs_id,
        });
    }
    FeatureModel::new(features, groups, constraints)
}

fn close_frame(
    stack: &mut Vec<(usize, Frame)>,
    groups: &[Group],
    features: &[Feature],
) -> Result<(), FmError> {
    if let Some((_, Frame::Group(g))) = stack.pop() {
        if groups[g].members.is_empty() {
            return Err(FmError::EmptyGroup(features[groups[g].parent.0].name.clone()));
        }
    }
    Ok(())
}

fn split_feature_line(
    content: &str,
    line: usize,
    indent: usize,
) -> Result<(&str, Option<&str>, usize), FmError> {
    let (name, tag, tag_col) = match content.find('[') {
        Some(open) => {
            let rest = &content[open..];
            if !rest.ends_with(']') {
                return Err(syntax(line, indent + open + 1, "unterminated `[` tag"));
            }
            (content[..open].trim_end(), Some(&rest[1..rest.len() - 1]), indent + open + 1)
        }
        None => (content, None, 0),
    };
    if name.is_empty() {
        return Err(syntax(line, indent + 1, "missing feature name"));
    }
    if let Some(pos) = name.find(|c: char| c.is_whitespace() || "<>=!#".contains(c)) {
        return Err(syntax(line, indent + pos + 1, format!("invalid character in feature name `{name}`")));
    }
    Ok((name, tag.map(str::trim), tag_col))
}

fn parse_constraint(
    content: &str,
    line: usize,
    column: usize,
) -> Result<(usize, ConstraintKind, String, String), FmError> {
    let Some(arrow) = content.find("=>") else {
        return Err(syntax(line, column, "expected `A => B` or `A => !B`"));
    };
    let lhs = content[..arrow].trim();
    let rhs = content[arrow + 2..].trim();
    let (kind, rhs) = match rhs.strip_prefix('!') {
        Some(r) => (ConstraintKind::Excludes, r.trim()),
        None => (ConstraintKind::Requires, rhs),
    };
    let bad = |s: &str| s.is_empty() || s.contains(char::is_whitespace) || s.contains('!');
    if bad(lhs) || bad(rhs) {
        return Err(syntax(line, column, format!("malformed constraint `{content}`")));
    }
    Ok((line, kind, lhs.to_string(), rhs.to_string()))
}

/// Renders a model in the text format accepted by [`parse_fm`].
pub fn write_fm(fm: &FeatureModel) -> String {
    let mut out = String::new();
    write_feature(fm, fm.root(), 0, &mut out);
    if !fm.constraints().is_empty() {
        out.push_str("constraints:\n");
        for c in fm.constraints() {
            let neg = if c.kind == ConstraintKind::Excludes { "!" } else { "" };
            writeln!(
                out,
                "  {} => {}{}",
                fm.feature(c.lhs).name,
                neg,
                fm.feature(c.rhs).name
            )
            .unwrap();
        }
    }
    out
}

fn write_feature(fm: &FeatureModel, id: FeatureId, depth: usize, out: &mut String) {
    let f = fm.feature(id);
    let pad = " ".repeat(depth * INDENT);
    match f.relation {
        Relation::Root | Relation::GroupMember => writeln!(out, "{pad}{}", f.name),
        Relation::Mandatory => writeln!(out, "{pad}{} [mandatory]", f.name),
        Relation::Optional => writeln!(out, "{pad}{} [optional]", f.name),
    }
    .unwrap();
    let mut written_groups: Vec<*const Group> = Vec::new();
    for child in fm.children(id) {
        match fm.group_of(child) {
            None => write_feature(fm, child, depth + 1, out),
            Some(g) => {
                if written_groups.contains(&(g as *const Group)) {
                    continue;
                }
                written_groups.push(g);
                let opener = match g.kind {
                    GroupKind::Or => "<or>",
                    GroupKind::Alternative => "<alt>",
                };
                writeln!(out, "{pad}  {opener}").unwrap();
                for &m in &g.members {
                    write_feature(fm, m, depth + 2, out);
                }
            }
        }
    }
}
