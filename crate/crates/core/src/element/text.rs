//! Line-oriented element format.
//!
//! ```text
//! group z2.grp
//! map 0 -> 1 : a
//! map 1 -> 0 : id
//! ```
//!
//! `image <file>` in place of `group <file>` names the image group `q(H)` of
//! the group defined in that file.

use std::sync::Arc;

use super::{Entry, SymTreePair};
use crate::localgroup::LocalGroup;
use crate::parse::{column_of, ParseError};
use crate::trees::LeafAddress;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementHeader {
    Group(String),
    Image(String),
}

impl ElementHeader {
    pub fn path(&self) -> &str {
        match self {
            ElementHeader::Group(p) | ElementHeader::Image(p) => p,
        }
    }
}

#[derive(Debug, Clone)]
struct Row {
    line: usize,
    source: LeafAddress,
    target: LeafAddress,
    label: String,
    label_col: usize,
}

/// A parsed but not yet group-resolved element file.
#[derive(Debug, Clone)]
pub struct ElementText {
    pub header: Option<ElementHeader>,
    rows: Vec<Row>,
}

impl ElementText {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut header = None;
        let mut rows = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.split('#').next().unwrap_or("");
            let body = line.trim();
            if body.is_empty() {
                continue;
            }
            let mut words = body.split_whitespace();
            match words.next() {
                Some(kw @ ("group" | "image")) => {
                    let path: Vec<&str> = words.collect();
                    if path.is_empty() {
                        return Err(ParseError::new(line_no, line.len() + 1, "missing group file"));
                    }
                    if header.is_some() {
                        return Err(ParseError::new(line_no, 1, "duplicate group line"));
                    }
                    let path = path.join(" ");
                    header = Some(if kw == "group" {
                        ElementHeader::Group(path)
                    } else {
                        ElementHeader::Image(path)
                    });
                }
                Some("map") => rows.push(parse_map(line, line_no)?),
                Some(other) => {
                    return Err(ParseError::new(
                        line_no,
                        column_of(line, other, 0),
                        format!("unknown directive {other:?}"),
                    ))
                }
                None => unreachable!(),
            }
        }
        if rows.is_empty() {
            return Err(ParseError::new(1, 1, "no map lines"));
        }
        Ok(ElementText { header, rows })
    }

    /// Resolves labels against `group` and validates the tree pair.
    pub fn build(&self, group: &Arc<LocalGroup>) -> Result<SymTreePair, ParseError> {
        let mut entries = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            for addr in [&row.source, &row.target] {
                if let Some(&d) = addr.digits().iter().find(|&&d| d as usize >= group.arity()) {
                    return Err(ParseError::new(
                        row.line,
                        1,
                        format!("digit {d} out of range for arity {}", group.arity()),
                    ));
                }
            }
            let label = group
                .eval_word(&row.label)
                .map_err(|e| ParseError::new(row.line, row.label_col, e.to_string()))?;
            entries.push(Entry {
                source: row.source.clone(),
                target: row.target.clone(),
                label,
            });
        }
        let line = self.rows.first().map_or(1, |r| r.line);
        SymTreePair::from_entries(group, entries).map_err(|e| ParseError::new(line, 1, e.to_string()))
    }
}

fn parse_map(line: &str, line_no: usize) -> Result<Row, ParseError> {
    let body = line.trim_start();
    let offset = line.len() - body.len();
    let rest = &body["map".len()..];
    let (lhs, rhs) = rest
        .split_once("->")
        .ok_or_else(|| ParseError::new(line_no, offset + 4, "expected \"<leaf> -> <leaf> : <label>\""))?;
    let (target, label) = rhs
        .split_once(':')
        .ok_or_else(|| ParseError::new(line_no, column_of(line, rhs, 0), "missing ': <label>'"))?;
    let leaf = |s: &str| {
        LeafAddress::parse(s.trim()).map_err(|m| ParseError::new(line_no, column_of(line, s.trim(), offset), m))
    };
    let label_trim = label.trim();
    if label_trim.is_empty() {
        return Err(ParseError::new(line_no, line.len() + 1, "missing label"));
    }
    Ok(Row {
        line: line_no,
        source: leaf(lhs)?,
        target: leaf(target)?,
        label: label_trim.to_string(),
        label_col: column_of(line, label_trim, line.len() - label.len()),
    })
}

/// Parses element text and resolves it against `group`, ignoring the header.
pub fn parse_element(text: &str, group: &Arc<LocalGroup>) -> Result<SymTreePair, ParseError> {
    ElementText::parse(text)?.build(group)
}

impl SymTreePair {
    /// Text form with rows in domain-leaf order.
    pub fn to_text(&self, header: Option<&ElementHeader>) -> String {
        let mut out = String::new();
        match header {
            Some(ElementHeader::Group(p)) => out.push_str(&format!("group {p}\n")),
            Some(ElementHeader::Image(p)) => out.push_str(&format!("image {p}\n")),
            None => {}
        }
        for e in &self.entries {
            out.push_str(&format!(
                "map {} -> {} : {}\n",
                e.source,
                e.target,
                self.group.word(e.label)
            ));
        }
        out
    }
}
