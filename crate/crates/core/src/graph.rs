//! Compact undirected graph used by the enumeration algorithms.

use std::fmt;

/// Sorted, duplicate-free set of graph-local vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSet(Vec<u32>);

impl VertexSet {
    /// Sorts and deduplicates `vertices`.
    pub fn new(mut vertices: Vec<u32>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        VertexSet(vertices)
    }

    /// Wraps an already strictly increasing vector.
    pub fn from_sorted(vertices: Vec<u32>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        VertexSet(vertices)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Undirected simple graph in CSR form: per-vertex sorted neighbour arrays
/// with a parallel array of integer edge weights.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<u32>,
}

impl Graph {
    /// Unweighted graph (all weights 1). Self-loops are dropped and repeated
    /// edges collapse.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        Self::from_weighted_edges(n, edges.into_iter().map(|(u, v)| (u, v, 1)))
    }

    /// Self-loops are dropped; for a repeated edge the first weight wins.
    ///
    /// Panics if an endpoint is `>= n`.
    pub fn from_weighted_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32, u32)>) -> Self {
        let mut arcs: Vec<(u32, u32, u32)> = Vec::new();
        for (u, v, w) in edges {
            assert!((u as usize) < n && (v as usize) < n, "edge ({u},{v}) out of range for n={n}");
            if u != v {
                arcs.push((u, v, w));
                arcs.push((v, u, w));
            }
        }
        arcs.sort_by_key(|&(u, v, _)| (u, v));
        arcs.dedup_by_key(|&mut (u, v, _)| (u, v));

        let mut offsets = vec![0usize; n + 1];
        for &(u, _, _) in &arcs {
            offsets[u as usize + 1] += 1;
        }
        for i in 1..=n {
            offsets[i] += offsets[i - 1];
        }
        Graph {
            offsets,
            neighbors: arcs.iter().map(|a| a.1).collect(),
            weights: arcs.iter().map(|a| a.2).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn weights(&self, v: u32) -> &[u32] {
        &self.weights[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn weight(&self, u: u32, v: u32) -> Option<u32> {
        let i = self.neighbors(u).binary_search(&v).ok()?;
        Some(self.weights(u)[i])
    }

    /// Edges `(u, v, weight)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        (0..self.n() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .zip(self.weights(u))
                .filter(move |(&v, _)| u < v)
                .map(move |(&v, &w)| (u, v, w))
        })
    }

    /// Number of edges inside `set`.
    pub fn induced_edge_count(&self, set: &[u32]) -> usize {
        set.iter()
            .map(|&u| set.iter().filter(|&&v| u < v && self.has_edge(u, v)).count())
            .sum()
    }

    /// Vertices ordered by repeatedly removing a minimum-degree vertex
    /// (smallest id on ties), together with the graph's degeneracy.
    pub fn degeneracy_order(&self) -> (Vec<u32>, usize) {
        let n = self.n();
        let mut degree: Vec<usize> = (0..n as u32).map(|v| self.degree(v)).collect();
        let max_deg = degree.iter().copied().max().unwrap_or(0);
        // buckets as BTreeSets keep the tie-break deterministic
        let mut buckets = vec![std::collections::BTreeSet::new(); max_deg + 1];
        for v in 0..n {
            buckets[degree[v]].insert(v as u32);
        }
        let mut removed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut degeneracy = 0;
        let mut lo = 0;
        for _ in 0..n {
            while buckets[lo].is_empty() {
                lo += 1;
            }
            let v = buckets[lo].pop_first().expect("non-empty bucket");
            degeneracy = degeneracy.max(lo);
            removed[v as usize] = true;
            order.push(v);
            for &w in self.neighbors(v) {
                let w = w as usize;
                if !removed[w] {
                    buckets[degree[w]].remove(&(w as u32));
                    degree[w] -= 1;
                    buckets[degree[w]].insert(w as u32);
                    lo = lo.min(degree[w]);
                }
            }
        }
        (order, degeneracy)
    }
}
