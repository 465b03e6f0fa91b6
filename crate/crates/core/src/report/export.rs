use std::collections::BTreeSet;
use std::io::Write;
use std::str::FromStr;

use super::{GroupListing, LabelFile};
use crate::ingest::ReviewStore;
use crate::kdgraph::export::{write_dot, write_edge_tsv, DotNode};
use crate::kdgraph::KdGraph;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    Tsv,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dot" | "gv" => Ok(GraphFormat::Dot),
            "tsv" => Ok(GraphFormat::Tsv),
            _ => Err(Error::config(format!("unknown graph format {s:?}"))),
        }
    }
}

/// Writes the union of the subgraphs induced by each group. Weights are the
/// graph's own (see its [`WeightMode`](crate::kdgraph::WeightMode)); DOT
/// nodes carry the user's review count and label.
pub fn export_group_graph<W: Write>(
    store: &ReviewStore,
    graph: &KdGraph,
    groups: &[GroupListing],
    labels: Option<&LabelFile>,
    format: GraphFormat,
    w: &mut W,
) -> Result<()> {
    let mut nodes: BTreeSet<&str> = BTreeSet::new();
    let mut edges: BTreeSet<(String, String, u32)> = BTreeSet::new();
    for group in groups {
        let vertices: Vec<(&str, Option<u32>)> = group
            .members
            .iter()
            .map(|m| (m.as_str(), store.user_id(m).and_then(|u| graph.vertex(u))))
            .collect();
        for (i, &(a, va)) in vertices.iter().enumerate() {
            nodes.insert(a);
            for &(b, vb) in &vertices[i + 1..] {
                if let (Some(va), Some(vb)) = (va, vb) {
                    if let Some(weight) = graph.graph().weight(va, vb) {
                        let (a, b) = if a <= b { (a, b) } else { (b, a) };
                        edges.insert((a.to_owned(), b.to_owned(), weight));
                    }
                }
            }
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    match format {
        GraphFormat::Tsv => write_edge_tsv(&edges, w),
        GraphFormat::Dot => {
            let nodes: Vec<DotNode> = nodes
                .into_iter()
                .map(|name| DotNode {
                    name: name.to_owned(),
                    reviews: store.user_id(name).map(|u| store.review_count(u)),
                    label: labels.and_then(|l| l.label(name)).map(str::to_owned),
                })
                .collect();
            let p = graph.params();
            write_dot(&format!("kd_{}_{}", p.k, p.d), &nodes, &edges, w)
        }
    }
}
