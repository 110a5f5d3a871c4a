//! Newick parsing and serialization for time-calibrated trees.
//!
//! Branch length fields are interpreted either as time durations (parent to
//! child) or as absolute node ages (time before the effective present);
//! tip calendar times always come from a separate date map. Internal node
//! labels are accepted and ignored.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::tree::TimeTree;

/// Meaning of the `:number` annotation on tree nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchLengthUnits {
    /// Duration of the branch above the node, in calendar-time units.
    Durations,
    /// Absolute age of the node (time before the most recent tip).
    NodeAges,
}

/// Largest tolerated disagreement between a supplied tip date and the date
/// implied by root-anchored path lengths.
pub const DATE_TOLERANCE: f64 = 1e-6;

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

#[derive(Debug)]
struct RawNode {
    label: Option<String>,
    length: Option<f64>,
    children: Vec<RawNode>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::NewickParse {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!(
                "expected '{}', found {}",
                byte as char,
                match self.peek() {
                    Some(b) => format!("'{}'", b as char),
                    None => "end of input".into(),
                }
            ))
        }
    }

    fn parse_tree(&mut self) -> Result<RawNode> {
        self.skip_ws();
        let node = self.parse_node()?;
        self.expect(b';')?;
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return self.err("trailing content after ';'");
        }
        Ok(node)
    }

    fn parse_node(&mut self) -> Result<RawNode> {
        self.skip_ws();
        let children = if self.peek() == Some(b'(') {
            self.pos += 1;
            let mut kids = vec![self.parse_node()?];
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(b',') => {
                        self.pos += 1;
                        kids.push(self.parse_node()?);
                    }
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(b) => {
                        return self.err(format!("expected ',' or ')', found '{}'", b as char))
                    }
                    None => return self.err("unbalanced parentheses: input ended inside a clade"),
                }
            }
            kids
        } else {
            Vec::new()
        };

        let label = self.parse_label()?;
        let length = self.parse_length()?;

        if children.is_empty() && label.is_none() {
            return self.err("tip without a label");
        }
        Ok(RawNode {
            label,
            length,
            children,
        })
    }

    fn parse_label(&mut self) -> Result<Option<String>> {
        self.skip_ws();
        let start = self.pos;
        while let Some(b) = self.peek() {
            match b {
                b'(' | b')' | b',' | b':' | b';' | b' ' | b'\t' | b'\n' | b'\r' => break,
                _ => self.pos += 1,
            }
        }
        if self.pos == start {
            Ok(None)
        } else {
            Ok(Some(
                std::str::from_utf8(&self.bytes[start..self.pos])
                    .map_err(|_| Error::NewickParse {
                        offset: start,
                        message: "label is not valid UTF-8".into(),
                    })?
                    .to_string(),
            ))
        }
    }

    fn parse_length(&mut self) -> Result<Option<f64>> {
        self.skip_ws();
        if self.peek() != Some(b':') {
            return Ok(None);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while let Some(b) = self.peek() {
            match b {
                b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E' => self.pos += 1,
                _ => break,
            }
        }
        if self.pos == start {
            return self.err("missing branch length after ':'");
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(Error::NewickParse {
                offset: start,
                message: format!("invalid branch length '{text}'"),
            }),
        }
    }
}

/// Parse a rooted binary Newick tree and calibrate it with tip dates.
///
/// Every tip name must appear in `dates` (decimal calendar years). Tip times
/// are taken verbatim from `dates`; internal node times are derived from the
/// root-anchored path lengths, with the root time anchored at the first tip
/// in file order. A tip whose supplied date disagrees with its path-implied
/// date by more than [`DATE_TOLERANCE`] is a calibration error.
pub fn parse_newick(
    text: &str,
    dates: &BTreeMap<String, f64>,
    units: BranchLengthUnits,
) -> Result<TimeTree> {
    let raw = Parser::new(text).parse_tree()?;

    // Flatten the raw tree: assign tip ids in file order, then internal ids
    // in post-order so the root receives the final id.
    let mut tips: Vec<(String, Option<f64>)> = Vec::new();
    collect_tips(&raw, &mut tips)?;
    let n_tips = tips.len();
    if n_tips < 2 {
        return Err(Error::TreeShape(format!(
            "fewer than 2 tips ({n_tips}) in Newick input"
        )));
    }

    let n_nodes = 2 * n_tips - 1;
    let mut parent: Vec<Option<usize>> = vec![None; n_nodes];
    let mut length: Vec<Option<f64>> = vec![None; n_nodes];
    let mut labels: Vec<String> = tips.iter().map(|(l, _)| l.clone()).collect();
    let mut next_tip = 0usize;
    let mut next_internal = n_tips;
    let root_id = assign_ids(
        &raw,
        &mut parent,
        &mut length,
        &mut labels,
        &mut next_tip,
        &mut next_internal,
        n_tips,
    )?;
    debug_assert_eq!(root_id, n_nodes - 1);

    for (name, _) in &tips {
        if !dates.contains_key(name) {
            return Err(Error::Calibration {
                tip: name.clone(),
                supplied: f64::NAN,
                implied: f64::NAN,
            });
        }
    }

    let node_time = match units {
        BranchLengthUnits::Durations => times_from_durations(&parent, &length, &labels, dates, n_tips)?,
        BranchLengthUnits::NodeAges => times_from_ages(&parent, &length, &labels, dates, n_tips)?,
    };

    TimeTree::from_parts(parent, node_time, labels[..n_tips].to_vec())
}

fn collect_tips(node: &RawNode, tips: &mut Vec<(String, Option<f64>)>) -> Result<()> {
    if node.children.is_empty() {
        let label = node.label.clone().expect("tips always carry a label");
        if tips.iter().any(|(l, _)| *l == label) {
            return Err(Error::TreeShape(format!("duplicate tip label '{label}'")));
        }
        tips.push((label, node.length));
    } else {
        if node.children.len() != 2 {
            return Err(Error::TreeShape(format!(
                "non-binary node with {} children",
                node.children.len()
            )));
        }
        for child in &node.children {
            collect_tips(child, tips)?;
        }
    }
    Ok(())
}

fn assign_ids(
    node: &RawNode,
    parent: &mut [Option<usize>],
    length: &mut [Option<f64>],
    labels: &mut Vec<String>,
    next_tip: &mut usize,
    next_internal: &mut usize,
    n_tips: usize,
) -> Result<usize> {
    if node.children.is_empty() {
        let id = *next_tip;
        *next_tip += 1;
        length[id] = node.length;
        return Ok(id);
    }
    let mut child_ids = Vec::with_capacity(2);
    for child in &node.children {
        child_ids.push(assign_ids(
            child,
            parent,
            length,
            labels,
            next_tip,
            next_internal,
            n_tips,
        )?);
    }
    let id = *next_internal;
    *next_internal += 1;
    labels.push(String::new());
    length[id] = node.length;
    for c in child_ids {
        parent[c] = Some(id);
    }
    Ok(id)
}

fn times_from_durations(
    parent: &[Option<usize>],
    length: &[Option<f64>],
    labels: &[String],
    dates: &BTreeMap<String, f64>,
    n_tips: usize,
) -> Result<Vec<f64>> {
    let n_nodes = parent.len();
    let root = n_nodes - 1;

    for (i, len) in length.iter().enumerate().take(n_nodes - 1) {
        match len {
            None => {
                return Err(Error::NewickParse {
                    offset: 0,
                    message: format!("missing branch length on node {i}"),
                })
            }
            Some(l) if *l <= 0.0 => {
                return Err(Error::TreeShape(format!(
                    "zero or negative branch length {l} on node {i}"
                )))
            }
            _ => {}
        }
    }

    // Depth of each node below the root, in time units.
    let mut depth = vec![0.0f64; n_nodes];
    let mut order: Vec<usize> = (0..n_nodes).collect();
    // Parents always have larger ids than their children is not guaranteed
    // here, so compute depths by repeated parent-chasing.
    for node in order.drain(..) {
        let mut d = 0.0;
        let mut cur = node;
        while let Some(p) = parent[cur] {
            d += length[cur].unwrap();
            cur = p;
        }
        depth[node] = d;
    }

    // Anchor the root at the first tip, then check every other tip.
    let root_time = dates[&labels[0]] - depth[0];
    for tip in 0..n_tips {
        let implied = root_time + depth[tip];
        let supplied = dates[&labels[tip]];
        if (implied - supplied).abs() > DATE_TOLERANCE {
            return Err(Error::Calibration {
                tip: labels[tip].clone(),
                supplied,
                implied,
            });
        }
    }

    let mut node_time = vec![0.0f64; n_nodes];
    for node in 0..n_nodes {
        node_time[node] = if node < n_tips {
            dates[&labels[node]]
        } else if node == root {
            root_time
        } else {
            root_time + depth[node]
        };
    }
    Ok(node_time)
}

fn times_from_ages(
    parent: &[Option<usize>],
    length: &[Option<f64>],
    labels: &[String],
    dates: &BTreeMap<String, f64>,
    n_tips: usize,
) -> Result<Vec<f64>> {
    let n_nodes = parent.len();
    // Ages are relative to the most recent supplied tip date.
    let present = (0..n_tips)
        .map(|t| dates[&labels[t]])
        .fold(f64::NEG_INFINITY, f64::max);

    let mut node_time = vec![0.0f64; n_nodes];
    for node in 0..n_nodes {
        let age = length[node].ok_or_else(|| Error::NewickParse {
            offset: 0,
            message: format!("missing node age on node {node}"),
        })?;
        if age < 0.0 {
            return Err(Error::TreeShape(format!(
                "negative node age {age} on node {node}"
            )));
        }
        node_time[node] = present - age;
    }
    for tip in 0..n_tips {
        let supplied = dates[&labels[tip]];
        if (node_time[tip] - supplied).abs() > DATE_TOLERANCE {
            return Err(Error::Calibration {
                tip: labels[tip].clone(),
                supplied,
                implied: node_time[tip],
            });
        }
        node_time[tip] = supplied;
    }
    Ok(node_time)
}

/// Serialize a tree to Newick with branch lengths as time durations.
///
/// Lengths use shortest round-trip float formatting, so
/// parse → serialize → parse preserves node times to machine precision.
pub fn serialize_newick(tree: &TimeTree) -> String {
    let mut out = String::new();
    write_node(tree, tree.root(), &mut out);
    out.push(';');
    out
}

fn write_node(tree: &TimeTree, node: usize, out: &mut String) {
    if let Some((a, b)) = tree.children(node) {
        out.push('(');
        write_node(tree, a, out);
        out.push(',');
        write_node(tree, b, out);
        out.push(')');
    } else {
        out.push_str(tree.tip_label(node));
    }
    if let Some(span) = tree.branch_span(node) {
        out.push(':');
        out.push_str(&format!("{span}"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dates(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(n, d)| (n.to_string(), *d)).collect()
    }

    #[test]
    fn three_taxon_times() {
        let d = dates(&[("A", 2000.0), ("B", 2000.0), ("C", 2000.0)]);
        let tree = parse_newick("((A:1,B:1):1,C:2);", &d, BranchLengthUnits::Durations).unwrap();
        assert_eq!(tree.n_tips(), 3);
        assert!((tree.time(tree.root()) - 1998.0).abs() < 1e-12);
        // The internal node joining A and B sits at 1999.
        let ab = tree.parent(0).unwrap();
        assert!((tree.time(ab) - 1999.0).abs() < 1e-12);
    }

    #[test]
    fn staggered_tips() {
        let d = dates(&[("A", 2005.0), ("B", 2001.0), ("C", 1999.0)]);
        let tree =
            parse_newick("((A:7,B:3):1,C:2);", &d, BranchLengthUnits::Durations).unwrap();
        assert!((tree.time(tree.root()) - 1997.0).abs() < 1e-12);
    }

    #[test]
    fn single_tip_is_shape_error() {
        let d = dates(&[("A", 2000.0)]);
        let err = parse_newick("(A:0.5);", &d, BranchLengthUnits::Durations).unwrap_err();
        assert!(matches!(err, Error::TreeShape(_)), "{err}");
    }

    #[test]
    fn unbalanced_parens_reports_offset() {
        let d = dates(&[("A", 2000.0), ("B", 2000.0)]);
        let err = parse_newick("((A:1,B:1;", &d, BranchLengthUnits::Durations).unwrap_err();
        match err {
            Error::NewickParse { offset, .. } => assert!(offset > 0),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn missing_length_is_parse_error() {
        let d = dates(&[("A", 2000.0), ("B", 2000.0)]);
        let err = parse_newick("(A:1,B);", &d, BranchLengthUnits::Durations).unwrap_err();
        assert!(matches!(err, Error::NewickParse { .. }), "{err}");
    }

    #[test]
    fn non_binary_is_shape_error() {
        let d = dates(&[("A", 2000.0), ("B", 2000.0), ("C", 2000.0)]);
        let err = parse_newick("(A:1,B:1,C:1);", &d, BranchLengthUnits::Durations).unwrap_err();
        assert!(matches!(err, Error::TreeShape(_)), "{err}");
    }

    #[test]
    fn inconsistent_dates_are_calibration_error() {
        let d = dates(&[("A", 2000.0), ("B", 1990.0)]);
        let err = parse_newick("(A:1,B:1);", &d, BranchLengthUnits::Durations).unwrap_err();
        assert!(matches!(err, Error::Calibration { .. }), "{err}");
    }

    #[test]
    fn duplicate_tip_rejected() {
        let d = dates(&[("A", 2000.0)]);
        let err = parse_newick("(A:1,A:1);", &d, BranchLengthUnits::Durations).unwrap_err();
        assert!(matches!(err, Error::TreeShape(_)), "{err}");
    }

    #[test]
    fn node_ages_mode() {
        let d = dates(&[("A", 2005.0), ("B", 2001.0)]);
        let tree = parse_newick("(A:0,B:4):10;", &d, BranchLengthUnits::NodeAges).unwrap();
        assert!((tree.time(tree.root()) - 1995.0).abs() < 1e-12);
        assert_eq!(tree.time(0), 2005.0);
        assert_eq!(tree.time(1), 2001.0);
    }

    #[test]
    fn roundtrip_preserves_times() {
        // Node ids may renumber across a round trip, so compare tip times by
        // label and internal times through label-pair MRCAs.
        let d = dates(&[("A", 2005.0), ("B", 2001.0), ("C", 1999.0)]);
        let tree =
            parse_newick("((A:7,B:3):1,C:2);", &d, BranchLengthUnits::Durations).unwrap();
        let text = serialize_newick(&tree);
        let again = parse_newick(&text, &d, BranchLengthUnits::Durations).unwrap();

        let tip_of = |t: &crate::tree::TimeTree, name: &str| {
            (0..t.n_tips()).find(|&i| t.tip_label(i) == name).unwrap()
        };
        for name in ["A", "B", "C"] {
            let (a, b) = (tip_of(&tree, name), tip_of(&again, name));
            assert!((tree.time(a) - again.time(b)).abs() < 1e-10);
        }
        for (x, y) in [("A", "B"), ("A", "C"), ("B", "C")] {
            let m0 = tree.mrca(tip_of(&tree, x), tip_of(&tree, y));
            let m1 = again.mrca(tip_of(&again, x), tip_of(&again, y));
            assert!((tree.time(m0) - again.time(m1)).abs() < 1e-10);
        }
    }
}
