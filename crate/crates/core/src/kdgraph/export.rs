//! Edge-list TSV and DOT serialisation of named graphs.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::graph::Graph;
use crate::{Error, Result};

/// A node of a DOT export.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DotNode {
    pub name: String,
    /// Total number of reviews written by the user.
    pub reviews: Option<usize>,
    pub label: Option<String>,
}

/// Writes `a <TAB> b <TAB> weight` lines. Each pair is reordered so that
/// `a <= b` and the lines are sorted lexicographically.
pub fn write_edge_tsv<W: Write>(edges: &[(String, String, u32)], w: &mut W) -> Result<()> {
    for (a, b, weight) in normalise(edges) {
        writeln!(w, "{a}\t{b}\t{weight}")?;
    }
    Ok(())
}

fn normalise(edges: &[(String, String, u32)]) -> Vec<(&str, &str, u32)> {
    let mut out: Vec<_> = edges
        .iter()
        .map(|(a, b, w)| if a <= b { (a.as_str(), b.as_str(), *w) } else { (b.as_str(), a.as_str(), *w) })
        .collect();
    out.sort();
    out
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Undirected DOT graph. Nodes carry `reviews` and `class` attributes when
/// known, edges carry the weight as `weight` and `label`. Output is sorted.
pub fn write_dot<W: Write>(
    name: &str,
    nodes: &[DotNode],
    edges: &[(String, String, u32)],
    w: &mut W,
) -> Result<()> {
    writeln!(w, "graph {} {{", quote(name))?;
    let mut nodes: Vec<&DotNode> = nodes.iter().collect();
    nodes.sort_by(|a, b| a.name.cmp(&b.name));
    for node in nodes {
        let mut attrs = Vec::new();
        if let Some(reviews) = node.reviews {
            attrs.push(format!("reviews={reviews}"));
            // area grows with the review count
            attrs.push(format!("width={:.2}", 0.3 + 0.1 * (reviews as f64).sqrt()));
        }
        if let Some(label) = &node.label {
            attrs.push(format!("class={}", quote(label)));
        }
        if attrs.is_empty() {
            writeln!(w, "  {};", quote(&node.name))?;
        } else {
            writeln!(w, "  {} [{}];", quote(&node.name), attrs.join(", "))?;
        }
    }
    for (a, b, weight) in normalise(edges) {
        writeln!(w, "  {} -- {} [weight={weight}, label=\"{weight}\"];", quote(a), quote(b))?;
    }
    writeln!(w, "}}")?;
    Ok(())
}

/// Graph read back from an edge-list TSV; vertex `i` is `names[i]`, names
/// sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedGraph {
    pub names: Vec<String>,
    pub graph: Graph,
}

/// Reads `a <TAB> b [<TAB> weight]` lines; a missing weight means 1. Blank
/// lines and lines starting with `#` are ignored.
pub fn read_edge_tsv<R: BufRead>(source: R) -> Result<NamedGraph> {
    let mut raw = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let weight = match fields.as_slice() {
            [_, _] => 1,
            [_, _, w] => w
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("line {}: bad weight {w:?}", i + 1)))?,
            _ => return Err(Error::parse(format!("line {}: expected 2 or 3 tab-separated fields", i + 1))),
        };
        raw.push((fields[0].to_owned(), fields[1].to_owned(), weight));
    }
    let mut ids: BTreeMap<&str, u32> = BTreeMap::new();
    for (a, b, _) in &raw {
        ids.insert(a, 0);
        ids.insert(b, 0);
    }
    for (i, id) in ids.values_mut().enumerate() {
        *id = i as u32;
    }
    let edges: Vec<_> = raw.iter().map(|(a, b, w)| (ids[a.as_str()], ids[b.as_str()], *w)).collect();
    let names: Vec<String> = ids.keys().map(|s| s.to_string()).collect();
    Ok(NamedGraph {
        graph: Graph::from_weighted_edges(names.len(), edges),
        names,
    })
}
