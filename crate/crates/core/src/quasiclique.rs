//! Pseudo-clique (quasi-clique) enumeration by reverse search.
//!
//! A vertex set is a pseudo-clique when its edge density, the number of
//! induced edges over `|S|(|S|-1)/2`, is at least `θ`. Removing a vertex of
//! minimum induced degree never lowers the density, so every pseudo-clique
//! `S` has a pseudo-clique parent `S \ {v}` where `v` is the minimum-degree
//! vertex of `G[S]` (largest id on ties). The parent relation forms a tree
//! over all pseudo-cliques rooted at the singletons; a depth-first walk that
//! only accepts children whose parent is the current set visits every
//! pseudo-clique exactly once.
//!
//! All density comparisons are exact integer cross-multiplications.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::graph::{Graph, VertexSet};
use crate::{Error, Result};

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Non-negative rational number in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    /// Panics when `den == 0`.
    pub fn new(num: u64, den: u64) -> Ratio {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.num) * u128::from(other.den)).cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Density threshold in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Theta(Ratio);

impl Theta {
    pub fn new(num: u64, den: u64) -> Result<Theta> {
        if den == 0 || num == 0 || num > den {
            return Err(Error::config(format!("theta {num}/{den} is not in (0, 1]")));
        }
        Ok(Theta(Ratio::new(num, den)))
    }

    pub fn ratio(&self) -> Ratio {
        self.0
    }

    /// Whether a set of `size` vertices with `edges` induced edges is dense
    /// enough. Sets of at most one vertex always are.
    pub fn admits(&self, edges: u64, size: u64) -> bool {
        if size <= 1 {
            return true;
        }
        2 * u128::from(edges) * u128::from(self.0.den)
            >= u128::from(self.0.num) * u128::from(size) * u128::from(size - 1)
    }

    /// Smallest edge count that makes a `size`-vertex set dense enough.
    pub fn min_edges(&self, size: u64) -> u64 {
        if size <= 1 {
            return 0;
        }
        let need = u128::from(self.0.num) * u128::from(size) * u128::from(size - 1);
        let per = 2 * u128::from(self.0.den);
        need.div_ceil(per) as u64
    }
}

impl Default for Theta {
    fn default() -> Self {
        Theta(Ratio::new(9, 10))
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // exact decimal when one exists, otherwise a fraction
        let Ratio { num, den } = self.0;
        if den == 1 {
            return write!(f, "{num}");
        }
        let mut scale = 1u64;
        for places in 1..=18usize {
            scale *= 10;
            if scale.is_multiple_of(den) {
                let scaled = num * (scale / den);
                return write!(f, "{}.{:0places$}", scaled / scale, scaled % scale);
            }
        }
        write!(f, "{num}/{den}")
    }
}

impl FromStr for Theta {
    type Err = Error;

    /// Accepts exact decimals (`0.9`, `1`, `.85`) and fractions (`9/10`).
    fn from_str(s: &str) -> Result<Theta> {
        let s = s.trim();
        let bad = || Error::config(format!("cannot parse theta {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            return Theta::new(n, d);
        }
        let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
        if (whole.is_empty() && frac.is_empty())
            || frac.len() > 18
            || !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let whole: u64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        let frac_val: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = whole
            .checked_mul(den)
            .and_then(|w| w.checked_add(frac_val))
            .ok_or_else(bad)?;
        Theta::new(num, den)
    }
}

/// Edge density of the subgraph induced by `set`; 1 for sets of at most one
/// vertex.
pub fn density(graph: &Graph, set: &VertexSet) -> Ratio {
    let s = set.len() as u64;
    if s <= 1 {
        return Ratio::new(1, 1);
    }
    Ratio::new(graph.induced_edge_count(set.as_slice()) as u64, s * (s - 1) / 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuasiParams {
    pub theta: Theta,
    pub min_size: usize,
    pub max_size: Option<usize>,
}

impl QuasiParams {
    pub fn new(theta: Theta, min_size: usize, max_size: Option<usize>) -> Result<Self> {
        if min_size < 2 {
            return Err(Error::config("pseudo-clique min_size must be at least 2"));
        }
        if let Some(max) = max_size {
            if max < min_size {
                return Err(Error::config(format!("max_size {max} is below min_size {min_size}")));
            }
        }
        Ok(QuasiParams {
            theta,
            min_size,
            max_size,
        })
    }
}

impl Default for QuasiParams {
    fn default() -> Self {
        QuasiParams {
            theta: Theta::default(),
            min_size: 7,
            max_size: None,
        }
    }
}

/// Per-walk state: the current set and every vertex's degree into it.
struct Walker<'g> {
    graph: &'g Graph,
    params: QuasiParams,
    maximal_only: bool,
    in_set: Vec<bool>,
    deg_in: Vec<u32>,
    members: Vec<u32>,
    edges: u64,
    stamp: Vec<u64>,
    epoch: u64,
}

impl<'g> Walker<'g> {
    fn new(graph: &'g Graph, params: QuasiParams, maximal_only: bool) -> Self {
        let n = graph.n();
        Walker {
            graph,
            params,
            maximal_only,
            in_set: vec![false; n],
            deg_in: vec![0; n],
            members: Vec::new(),
            edges: 0,
            stamp: vec![0; n],
            epoch: 0,
        }
    }

    fn add(&mut self, v: u32) {
        self.edges += u64::from(self.deg_in[v as usize]);
        self.in_set[v as usize] = true;
        self.members.push(v);
        for &w in self.graph.neighbors(v) {
            self.deg_in[w as usize] += 1;
        }
    }

    fn remove(&mut self, v: u32) {
        let last = self.members.pop();
        debug_assert_eq!(last, Some(v));
        self.in_set[v as usize] = false;
        for &w in self.graph.neighbors(v) {
            self.deg_in[w as usize] -= 1;
        }
        self.edges -= u64::from(self.deg_in[v as usize]);
    }

    /// Vertices outside the set whose addition keeps the density at or
    /// above θ, ascending. With `first_only` stops after one hit.
    fn extensions(&mut self, first_only: bool) -> Vec<u32> {
        let s = self.members.len() as u64;
        let need = self.params.theta.min_edges(s + 1).saturating_sub(self.edges);
        let mut out = Vec::new();
        if need == 0 {
            // even a vertex with no neighbour in the set qualifies
            for u in 0..self.graph.n() as u32 {
                if !self.in_set[u as usize] {
                    out.push(u);
                    if first_only {
                        break;
                    }
                }
            }
            return out;
        }
        self.epoch += 1;
        for &m in &self.members {
            for &u in self.graph.neighbors(m) {
                let ui = u as usize;
                if !self.in_set[ui] && self.stamp[ui] != self.epoch && u64::from(self.deg_in[ui]) >= need {
                    self.stamp[ui] = self.epoch;
                    out.push(u);
                    if first_only {
                        return out;
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Whether the current set is the parent of `set ∪ {u}`, i.e. `u` is
    /// the minimum-degree vertex of the extended set with the largest id
    /// among those of minimum degree.
    fn is_parent_of(&self, u: u32, min_member_deg: u32) -> bool {
        let du = self.deg_in[u as usize];
        if du > min_member_deg + 1 {
            return false;
        }
        self.members.iter().all(|&w| {
            let dw = self.deg_in[w as usize];
            if dw > du {
                return true;
            }
            let dw = dw + u32::from(self.graph.has_edge(w, u));
            dw > du || (dw == du && w < u)
        })
    }

    fn visit(&mut self, emit: &mut impl FnMut(VertexSet)) {
        let s = self.members.len();
        debug_assert!(self.params.theta.admits(self.edges, s as u64));
        if s >= self.params.min_size && (!self.maximal_only || self.extensions(true).is_empty()) {
            emit(VertexSet::new(self.members.clone()));
        }
        if self.params.max_size == Some(s) {
            return;
        }
        let min_member_deg = self.members.iter().map(|&w| self.deg_in[w as usize]).min().unwrap_or(0);
        for u in self.extensions(false) {
            if self.is_parent_of(u, min_member_deg) {
                self.add(u);
                self.visit(emit);
                self.remove(u);
            }
        }
    }

    fn walk_root(&mut self, root: u32, emit: &mut impl FnMut(VertexSet)) {
        self.add(root);
        self.visit(emit);
        self.remove(root);
    }
}

/// Calls `emit` for every pseudo-clique (or only the maximal ones) within
/// the size bounds, each exactly once.
pub fn for_each_pseudo_clique(
    graph: &Graph,
    params: QuasiParams,
    maximal_only: bool,
    mut emit: impl FnMut(VertexSet),
) {
    let mut walker = Walker::new(graph, params, maximal_only);
    for root in 0..graph.n() as u32 {
        walker.walk_root(root, &mut emit);
    }
}

fn par_collect(graph: &Graph, params: QuasiParams, maximal_only: bool) -> Vec<VertexSet> {
    let mut out: Vec<VertexSet> = (0..graph.n() as u32)
        .into_par_iter()
        .map_init(
            || Walker::new(graph, params, maximal_only),
            |walker, root| {
                let mut found = Vec::new();
                walker.walk_root(root, &mut |s| found.push(s));
                found
            },
        )
        .flatten_iter()
        .collect();
    out.sort();
    out
}

/// Every vertex set with `min_size ≤ |S| ≤ max_size` and density ≥ θ,
/// sorted.
pub fn pseudo_cliques(graph: &Graph, params: QuasiParams) -> Vec<VertexSet> {
    par_collect(graph, params, false)
}

/// The pseudo-cliques that no single added vertex keeps at density ≥ θ
/// (regardless of `max_size`), sorted.
pub fn maximal_pseudo_cliques(graph: &Graph, params: QuasiParams) -> Vec<VertexSet> {
    par_collect(graph, params, true)
}

/// Size histogram of the maximal pseudo-cliques, computed in parallel
/// without materialising them.
pub fn maximal_pseudo_clique_histogram(graph: &Graph, params: QuasiParams) -> BTreeMap<usize, u64> {
    (0..graph.n() as u32)
        .into_par_iter()
        .fold(
            || (Walker::new(graph, params, true), BTreeMap::new()),
            |(mut walker, mut hist), root| {
                walker.walk_root(root, &mut |s: VertexSet| *hist.entry(s.len()).or_insert(0u64) += 1);
                (walker, hist)
            },
        )
        .map(|(_, hist)| hist)
        .reduce(BTreeMap::new, crate::clique::merge_histograms)
}

pub use crate::clique::clique_size_histogram as quasiclique_size_histogram;
