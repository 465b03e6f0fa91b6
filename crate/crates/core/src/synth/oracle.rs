//! Exhaustive reference answers for small instances.
//!
//! These deliberately share no code with the production algorithms: graphs
//! are re-encoded as adjacency bitmasks and every vertex subset is tested
//! against the plain definitions.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::graph::{Graph, VertexSet};
use crate::ingest::{ReviewStore, UserId, VenueId};
use crate::quasiclique::Theta;
use crate::{Error, Result};

/// Largest graph the subset oracles accept.
pub const ORACLE_LIMIT: usize = 16;

fn masks(graph: &Graph) -> Result<Vec<u32>> {
    let n = graph.n();
    if n > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge { n, limit: ORACLE_LIMIT });
    }
    let mut adj = vec![0u32; n];
    for (u, v, _) in graph.edges() {
        adj[u as usize] |= 1 << v;
        adj[v as usize] |= 1 << u;
    }
    Ok(adj)
}

fn members(mask: u32) -> VertexSet {
    VertexSet::new((0..32).filter(|i| mask & (1 << i) != 0).collect())
}

fn is_clique(adj: &[u32], mask: u32) -> bool {
    (0..adj.len()).filter(|&v| mask & (1 << v) != 0).all(|v| mask & !(1 << v) & !adj[v] == 0)
}

fn edges_in(adj: &[u32], mask: u32) -> u64 {
    let twice: u32 = (0..adj.len())
        .filter(|&v| mask & (1 << v) != 0)
        .map(|v| (adj[v] & mask).count_ones())
        .sum();
    u64::from(twice / 2)
}

fn dense(theta: Theta, edges: u64, size: u64) -> bool {
    if size <= 1 {
        return true;
    }
    let r = theta.ratio();
    // edges / C(size, 2) >= num / den
    u128::from(edges) * 2 * u128::from(r.denom()) >= u128::from(r.numer()) * u128::from(size * (size - 1))
}

/// Maximal cliques with at least `min_size` vertices.
pub fn oracle_maximal_cliques(graph: &Graph, min_size: usize) -> Result<BTreeSet<VertexSet>> {
    let adj = masks(graph)?;
    let n = adj.len();
    let mut out = BTreeSet::new();
    for mask in 1u32..(1u32 << n) {
        if (mask.count_ones() as usize) < min_size || !is_clique(&adj, mask) {
            continue;
        }
        let extendable = (0..n).any(|w| mask & (1 << w) == 0 && mask & !adj[w] == 0);
        if !extendable {
            out.insert(members(mask));
        }
    }
    Ok(out)
}

/// Every clique (maximal or not) with size in `[min_size, max_size]`.
pub fn oracle_all_cliques(graph: &Graph, min_size: usize, max_size: Option<usize>) -> Result<BTreeSet<VertexSet>> {
    let adj = masks(graph)?;
    let max = max_size.unwrap_or(usize::MAX);
    Ok((1u32..(1u32 << adj.len()))
        .filter(|&m| (min_size..=max).contains(&(m.count_ones() as usize)) && is_clique(&adj, m))
        .map(members)
        .collect())
}

/// Vertex sets with size in `[min_size, max_size]` and density ≥ θ.
pub fn oracle_pseudo_cliques(
    graph: &Graph,
    theta: Theta,
    min_size: usize,
    max_size: Option<usize>,
) -> Result<BTreeSet<VertexSet>> {
    let adj = masks(graph)?;
    let max = max_size.unwrap_or(usize::MAX);
    Ok((1u32..(1u32 << adj.len()))
        .filter(|&m| {
            let s = m.count_ones() as usize;
            (min_size..=max).contains(&s) && dense(theta, edges_in(&adj, m), s as u64)
        })
        .map(members)
        .collect())
}

/// Pseudo-cliques in the size range with no dense single-vertex extension
/// (of any size).
pub fn oracle_maximal_pseudo_cliques(
    graph: &Graph,
    theta: Theta,
    min_size: usize,
    max_size: Option<usize>,
) -> Result<BTreeSet<VertexSet>> {
    let adj = masks(graph)?;
    let n = adj.len();
    let max = max_size.unwrap_or(usize::MAX);
    let mut out = BTreeSet::new();
    for m in 1u32..(1u32 << n) {
        let s = m.count_ones() as usize;
        if !(min_size..=max).contains(&s) || !dense(theta, edges_in(&adj, m), s as u64) {
            continue;
        }
        let extendable = (0..n)
            .filter(|&w| m & (1 << w) == 0)
            .any(|w| dense(theta, edges_in(&adj, m | (1 << w)), s as u64 + 1));
        if !extendable {
            out.insert(members(m));
        }
    }
    Ok(out)
}

/// G(n, p) random graph.
pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Qualifying venues of every user pair, found by comparing every pair of
/// reviews of every venue. Quadratic; for small stores only.
pub fn oracle_pair_venue_counts(store: &ReviewStore, d: u32) -> BTreeMap<(UserId, UserId), u32> {
    let mut venues_of: BTreeMap<(UserId, UserId), BTreeSet<VenueId>> = BTreeMap::new();
    let reviews: Vec<_> = store.reviews().collect();
    for a in &reviews {
        for b in &reviews {
            if a.venue == b.venue && a.user < b.user && a.date.0.abs_diff(b.date.0) <= d {
                venues_of.entry((a.user, b.user)).or_default().insert(a.venue);
            }
        }
    }
    venues_of.into_iter().map(|(pair, v)| (pair, v.len() as u32)).collect()
}

/// Edge set `(smaller user, larger user)` of the `(k, d)` graph by brute force.
pub fn oracle_kd_edges(store: &ReviewStore, k: u32, d: u32) -> BTreeSet<(UserId, UserId)> {
    oracle_pair_venue_counts(store, d)
        .into_iter()
        .filter(|&(_, c)| c >= k)
        .map(|(pair, _)| pair)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k5_has_one_maximal_clique() {
        let k5 = Graph::from_edges(5, (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v))));
        let out = oracle_maximal_cliques(&k5, 1).unwrap();
        assert_eq!(out.into_iter().collect::<Vec<_>>(), vec![VertexSet::new((0..5).collect())]);
    }

    #[test]
    fn five_cycle_maximal_cliques_are_edges() {
        let c5 = Graph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5)));
        let out = oracle_maximal_cliques(&c5, 1).unwrap();
        assert_eq!(out.len(), 5);
        assert!(out.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn refuses_large_graphs() {
        let g = Graph::from_edges(17, []);
        assert!(matches!(oracle_maximal_cliques(&g, 1), Err(Error::OracleTooLarge { n: 17, .. })));
        assert!(oracle_pseudo_cliques(&Graph::from_edges(16, []), Theta::default(), 2, Some(2)).is_ok());
    }

    #[test]
    fn pseudo_clique_oracle_boundary() {
        let k5e = Graph::from_edges(
            5,
            (0..5u32).flat_map(|u| (u + 1..5).map(move |v| (u, v))).filter(|&e| e != (0, 1)),
        );
        let out = oracle_maximal_pseudo_cliques(&k5e, Theta::default(), 2, None).unwrap();
        assert_eq!(out.into_iter().collect::<Vec<_>>(), vec![VertexSet::new((0..5).collect())]);
    }
}
