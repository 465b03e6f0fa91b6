use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::GroupKind;
use crate::clique::maximal_clique_histogram;
use crate::ingest::{ReviewStore, UserId};
use crate::kdgraph::{kd_parameter_sweep_with, BuildOptions, KdGraph, KdParams, WeightMode};
use crate::quasiclique::{maximal_pseudo_clique_histogram, QuasiParams};
use crate::{Error, Result};

/// Grid of group counts: one row per `(k, d)` graph, one column per size.
///
/// `exact` counts maximal groups of exactly that size; `at_least` counts
/// maximal groups of that size or larger. Every requested cell is present,
/// zeros included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    pub kind: GroupKind,
    pub params: Vec<KdParams>,
    pub sizes: Vec<usize>,
    pub exact: BTreeMap<(KdParams, usize), u64>,
    pub at_least: BTreeMap<(KdParams, usize), u64>,
}

#[derive(Serialize, Deserialize)]
struct ExactRow {
    k: u32,
    d: u32,
    size: usize,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct CumulativeRow {
    k: u32,
    d: u32,
    min_size: usize,
    count: u64,
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::parse(format!("csv: {other:?}")),
    }
}

impl CountTable {
    pub fn exact(&self, params: KdParams, size: usize) -> u64 {
        self.exact.get(&(params, size)).copied().unwrap_or(0)
    }

    pub fn at_least(&self, params: KdParams, size: usize) -> u64 {
        self.at_least.get(&(params, size)).copied().unwrap_or(0)
    }

    /// `k,d,size,count`, sorted by `(k, d, size)`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (&(p, size), &count) in &self.exact {
            out.serialize(ExactRow { k: p.k, d: p.d, size, count }).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// `k,d,min_size,count`, sorted by `(k, d, min_size)`.
    pub fn write_cumulative_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (&(p, min_size), &count) in &self.at_least {
            out.serialize(CumulativeRow { k: p.k, d: p.d, min_size, count }).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads back the two CSV files written by [`write_csv`](Self::write_csv)
    /// and [`write_cumulative_csv`](Self::write_cumulative_csv).
    pub fn from_csv<R1: Read, R2: Read>(kind: GroupKind, exact: R1, cumulative: R2) -> Result<CountTable> {
        let mut table = CountTable {
            kind,
            params: Vec::new(),
            sizes: Vec::new(),
            exact: BTreeMap::new(),
            at_least: BTreeMap::new(),
        };
        let mut params = BTreeSet::new();
        let mut sizes = BTreeSet::new();
        for row in csv::Reader::from_reader(exact).deserialize::<ExactRow>() {
            let row = row.map_err(csv_err)?;
            let p = KdParams::new(row.k, row.d)?;
            params.insert(p);
            sizes.insert(row.size);
            if table.exact.insert((p, row.size), row.count).is_some() {
                return Err(Error::parse(format!("duplicate cell {p} size {}", row.size)));
            }
        }
        for row in csv::Reader::from_reader(cumulative).deserialize::<CumulativeRow>() {
            let row = row.map_err(csv_err)?;
            let p = KdParams::new(row.k, row.d)?;
            if table.at_least.insert((p, row.min_size), row.count).is_some() {
                return Err(Error::parse(format!("duplicate cell {p} min_size {}", row.min_size)));
            }
        }
        table.params = params.into_iter().collect();
        table.sizes = sizes.into_iter().collect();
        for &p in &table.params {
            for &s in &table.sizes {
                if !table.exact.contains_key(&(p, s)) || !table.at_least.contains_key(&(p, s)) {
                    return Err(Error::parse(format!("missing cell {p} size {s}")));
                }
            }
        }
        if table.at_least.len() != table.exact.len() {
            return Err(Error::parse("cumulative table has cells outside the exact grid"));
        }
        Ok(table)
    }

    /// Aligned text table with one column per `(k, d)` graph, exact rows
    /// first and cumulative (`>=`) rows after.
    pub fn render_text(&self) -> String {
        let label = |prefix: &str, s: usize| format!("{prefix}{s}-{}", self.kind.name());
        let mut rows: Vec<(String, Vec<String>)> = Vec::new();
        rows.push((
            "(k,d)-graph".to_string(),
            self.params.iter().map(|p| format!("{},{}", p.k, p.d)).collect(),
        ));
        for &s in &self.sizes {
            rows.push((label("", s), self.params.iter().map(|&p| self.exact(p, s).to_string()).collect()));
        }
        for &s in &self.sizes {
            rows.push((label(">=", s), self.params.iter().map(|&p| self.at_least(p, s).to_string()).collect()));
        }
        let first = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let widths: Vec<usize> = (0..self.params.len())
            .map(|c| rows.iter().map(|r| r.1[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        if let Some(theta) = self.kind.theta() {
            let _ = writeln!(out, "theta = {theta}");
        }
        for (i, (name, cells)) in rows.iter().enumerate() {
            let _ = write!(out, "{name:<first$}");
            for (cell, w) in cells.iter().zip(&widths) {
                let _ = write!(out, "  {cell:>w$}");
            }
            out.push('\n');
            if i == 0 || i == self.sizes.len() {
                let total = first + widths.iter().map(|w| w + 2).sum::<usize>();
                out.push_str(&"-".repeat(total));
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableSpec {
    pub ks: Vec<u32>,
    pub ds: Vec<u32>,
    pub sizes: Vec<usize>,
    pub kind: GroupKind,
    /// Size cap for the pseudo-clique walk.
    pub quasi_max_size: Option<usize>,
    pub build: BuildOptions,
}

impl TableSpec {
    pub fn new(ks: Vec<u32>, ds: Vec<u32>, sizes: Vec<usize>, kind: GroupKind) -> Self {
        TableSpec {
            ks,
            ds,
            sizes,
            kind,
            quasi_max_size: None,
            build: BuildOptions::default(),
        }
    }
}

/// A count table together with per-graph statistics and the results of the
/// monotonicity checks.
#[derive(Clone, Debug)]
pub struct TableRun {
    pub table: CountTable,
    pub edges: BTreeMap<KdParams, usize>,
    /// Largest maximal group found in each graph (0 when none reaches the
    /// smallest requested size).
    pub largest: BTreeMap<KdParams, usize>,
    pub violations: Vec<String>,
}

pub fn build_count_table(store: &ReviewStore, spec: &TableSpec) -> Result<CountTable> {
    Ok(run_count_table(store, spec)?.table)
}

/// Sweeps the `(k, d)` grid, enumerates maximal groups in every graph and
/// fills the table. Edge-set inclusion between neighbouring grid points and
/// the monotonicity of the largest group size are checked on the way.
pub fn run_count_table(store: &ReviewStore, spec: &TableSpec) -> Result<TableRun> {
    let mut sizes = spec.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let Some(&min_size) = sizes.first() else {
        return Err(Error::config("count table needs at least one size"));
    };
    if min_size == 0 {
        return Err(Error::config("group sizes start at 1"));
    }
    let quasi = match spec.kind {
        GroupKind::Clique => None,
        GroupKind::QuasiClique(theta) => Some(QuasiParams::new(theta, min_size.max(2), spec.quasi_max_size)?),
    };
    let graphs = kd_parameter_sweep_with(store, &spec.ks, &spec.ds, WeightMode::Unweighted, &spec.build)?;

    let mut table = CountTable {
        kind: spec.kind,
        params: graphs.keys().copied().collect(),
        sizes: sizes.clone(),
        exact: BTreeMap::new(),
        at_least: BTreeMap::new(),
    };
    let mut edges = BTreeMap::new();
    let mut largest = BTreeMap::new();
    for (&params, graph) in &graphs {
        let hist = match quasi {
            None => maximal_clique_histogram(graph.graph(), min_size),
            Some(q) => maximal_pseudo_clique_histogram(graph.graph(), q),
        };
        for &s in &sizes {
            table.exact.insert((params, s), hist.get(&s).copied().unwrap_or(0));
            table.at_least.insert((params, s), hist.range(s..).map(|(_, c)| c).sum());
        }
        edges.insert(params, graph.edge_count());
        largest.insert(params, hist.keys().next_back().copied().unwrap_or(0));
    }

    let mut violations = check_sweep_monotonicity(&graphs);
    if spec.quasi_max_size.is_none() {
        violations.extend(check_table_monotonicity(&largest));
    }
    Ok(TableRun {
        table,
        edges,
        largest,
        violations,
    })
}

/// Neighbouring grid points `(k, d)`/`(k', d')` in each direction.
fn grid_steps(params: &[KdParams]) -> Vec<(KdParams, KdParams)> {
    let ks: BTreeSet<u32> = params.iter().map(|p| p.k).collect();
    let ds: BTreeSet<u32> = params.iter().map(|p| p.d).collect();
    let have: BTreeSet<KdParams> = params.iter().copied().collect();
    let mut steps = Vec::new();
    for &p in params {
        // (stricter, looser): larger k or smaller d is stricter
        if let Some(&k_lo) = ks.range(..p.k).next_back() {
            let looser = KdParams { k: k_lo, d: p.d };
            if have.contains(&looser) {
                steps.push((p, looser));
            }
        }
        if let Some(&d_hi) = ds.range(p.d + 1..).next() {
            let looser = KdParams { k: p.k, d: d_hi };
            if have.contains(&looser) {
                steps.push((p, looser));
            }
        }
    }
    steps
}

/// Every edge of a stricter graph must be an edge of the looser neighbour.
pub fn check_sweep_monotonicity(graphs: &BTreeMap<KdParams, KdGraph>) -> Vec<String> {
    let params: Vec<KdParams> = graphs.keys().copied().collect();
    let mut out = Vec::new();
    for (strict, loose) in grid_steps(&params) {
        let loose_edges: BTreeSet<(UserId, UserId)> = graphs[&loose].user_edges().map(|(a, b, _)| (a, b)).collect();
        let missing = graphs[&strict]
            .user_edges()
            .filter(|&(a, b, _)| !loose_edges.contains(&(a, b)))
            .count();
        if missing > 0 {
            out.push(format!("{missing} edges of {strict} are missing from {loose}"));
        }
    }
    out
}

/// The largest maximal group cannot shrink when the graph gains edges.
pub fn check_table_monotonicity(largest: &BTreeMap<KdParams, usize>) -> Vec<String> {
    let params: Vec<KdParams> = largest.keys().copied().collect();
    grid_steps(&params)
        .into_iter()
        .filter(|(strict, loose)| largest[loose] < largest[strict])
        .map(|(strict, loose)| {
            format!(
                "largest group shrinks from {} in {strict} to {} in {loose}",
                largest[&strict], largest[&loose]
            )
        })
        .collect()
}
