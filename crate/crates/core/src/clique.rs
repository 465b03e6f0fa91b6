//! Maximal clique enumeration.
//!
//! Bron–Kerbosch with pivoting, driven from a degeneracy ordering: the
//! top level visits vertices in that order with candidates restricted to
//! later neighbours, which bounds the candidate set of every branch by the
//! graph's degeneracy.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::graph::{Graph, VertexSet};

/// Sorted intersection of two ascending slices.
pub(crate) fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn intersect_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

struct Search<'g, F> {
    graph: &'g Graph,
    min_size: usize,
    emit: F,
}

impl<F: FnMut(VertexSet)> Search<'_, F> {
    fn expand(&mut self, r: &mut Vec<u32>, mut p: Vec<u32>, mut x: Vec<u32>) {
        if p.is_empty() {
            if x.is_empty() && r.len() >= self.min_size {
                (self.emit)(VertexSet::new(r.clone()));
            }
            return;
        }
        if r.len() + p.len() < self.min_size {
            return;
        }
        // pivot maximises |P ∩ N(u)| over P ∪ X, smallest id on ties
        let mut pivot = u32::MAX;
        let mut best = 0usize;
        for &u in p.iter().chain(&x) {
            let score = intersect_len(&p, self.graph.neighbors(u));
            if pivot == u32::MAX || score > best || (score == best && u < pivot) {
                pivot = u;
                best = score;
            }
        }
        let pivot_nbrs = self.graph.neighbors(pivot);
        let candidates: Vec<u32> = p
            .iter()
            .copied()
            .filter(|w| pivot_nbrs.binary_search(w).is_err())
            .collect();
        for w in candidates {
            let nbrs = self.graph.neighbors(w);
            let np = intersect(&p, nbrs);
            let nx = intersect(&x, nbrs);
            r.push(w);
            self.expand(r, np, nx);
            r.pop();
            let i = p.binary_search(&w).expect("candidate drawn from P");
            p.remove(i);
            let i = x.binary_search(&w).expect_err("P and X are disjoint");
            x.insert(i, w);
        }
    }
}

/// Positions of each vertex in the degeneracy order.
fn order_positions(graph: &Graph) -> (Vec<u32>, Vec<usize>) {
    let (order, _) = graph.degeneracy_order();
    let mut pos = vec![0usize; graph.n()];
    for (i, &v) in order.iter().enumerate() {
        pos[v as usize] = i;
    }
    (order, pos)
}

fn root_branch<F: FnMut(VertexSet)>(graph: &Graph, pos: &[usize], v: u32, search: &mut Search<'_, F>) {
    let here = pos[v as usize];
    let (later, earlier): (Vec<u32>, Vec<u32>) = graph
        .neighbors(v)
        .iter()
        .partition(|&&w| pos[w as usize] > here);
    search.expand(&mut vec![v], later, earlier);
}

/// Calls `emit` once for every maximal clique with at least `min_size`
/// vertices. Order follows the degeneracy ordering and is deterministic.
pub fn for_each_maximal_clique(graph: &Graph, min_size: usize, emit: impl FnMut(VertexSet)) {
    let (order, pos) = order_positions(graph);
    let mut search = Search {
        graph,
        min_size,
        emit,
    };
    for v in order {
        root_branch(graph, &pos, v, &mut search);
    }
}

/// Parallel variant: top-level branches run on the rayon pool and `emit`
/// may be called from several threads in any order.
pub fn par_for_each_maximal_clique(graph: &Graph, min_size: usize, emit: impl Fn(VertexSet) + Sync) {
    let (order, pos) = order_positions(graph);
    order.par_iter().for_each(|&v| {
        let mut search = Search {
            graph,
            min_size,
            emit: &emit,
        };
        root_branch(graph, &pos, v, &mut search);
    });
}

/// All maximal cliques of at least `min_size` vertices, sorted.
pub fn maximal_cliques(graph: &Graph, min_size: usize) -> Vec<VertexSet> {
    let (order, pos) = order_positions(graph);
    let mut out: Vec<VertexSet> = order
        .par_iter()
        .flat_map_iter(|&v| {
            let mut found = Vec::new();
            let mut search = Search {
                graph,
                min_size,
                emit: |c| found.push(c),
            };
            root_branch(graph, &pos, v, &mut search);
            found
        })
        .collect();
    out.sort();
    out
}

/// Number of sets per exact size.
pub fn clique_size_histogram<I>(cliques: I) -> BTreeMap<usize, u64>
where
    I: IntoIterator,
    I::Item: std::borrow::Borrow<VertexSet>,
{
    let mut hist = BTreeMap::new();
    for c in cliques {
        *hist.entry(std::borrow::Borrow::<VertexSet>::borrow(&c).len()).or_insert(0) += 1;
    }
    hist
}

/// Size histogram of the maximal cliques with at least `min_size` vertices,
/// computed in parallel without materialising the cliques.
pub fn maximal_clique_histogram(graph: &Graph, min_size: usize) -> BTreeMap<usize, u64> {
    let (order, pos) = order_positions(graph);
    order
        .par_iter()
        .fold(BTreeMap::new, |mut hist, &v| {
            let mut search = Search {
                graph,
                min_size,
                emit: |c: VertexSet| *hist.entry(c.len()).or_insert(0u64) += 1,
            };
            root_branch(graph, &pos, v, &mut search);
            hist
        })
        .reduce(BTreeMap::new, merge_histograms)
}

pub(crate) fn merge_histograms(
    mut a: BTreeMap<usize, u64>,
    b: BTreeMap<usize, u64>,
) -> BTreeMap<usize, u64> {
    for (size, count) in b {
        *a.entry(size).or_insert(0) += count;
    }
    a
}

pub fn is_clique(graph: &Graph, set: &[u32]) -> bool {
    set.iter()
        .enumerate()
        .all(|(i, &u)| set[i + 1..].iter().all(|&v| graph.has_edge(u, v)))
}

/// True when no vertex outside `set` is adjacent to every member.
pub fn is_maximal_clique(graph: &Graph, set: &[u32]) -> bool {
    let Some(&first) = set.first() else {
        return graph.n() == 0;
    };
    is_clique(graph, set)
        && graph
            .neighbors(first)
            .iter()
            .filter(|w| !set.contains(w))
            .all(|&w| !set.iter().all(|&u| graph.has_edge(u, w)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: u32) -> Graph {
        Graph::from_edges(n as usize, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    fn sets(v: &[&[u32]]) -> Vec<VertexSet> {
        let mut out: Vec<_> = v.iter().map(|s| VertexSet::new(s.to_vec())).collect();
        out.sort();
        out
    }

    #[test]
    fn complete_graph_has_one_clique() {
        assert_eq!(maximal_cliques(&complete(5), 1), sets(&[&[0, 1, 2, 3, 4]]));
        assert_eq!(clique_size_histogram(maximal_cliques(&complete(5), 1)), BTreeMap::from([(5, 1)]));
    }

    #[test]
    fn five_cycle_gives_its_edges() {
        let g = Graph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5)));
        assert_eq!(
            maximal_cliques(&g, 2),
            sets(&[&[0, 1], &[1, 2], &[2, 3], &[3, 4], &[0, 4]])
        );
    }

    #[test]
    fn two_disjoint_triangles() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let hist = clique_size_histogram(maximal_cliques(&g, 1));
        assert_eq!(hist, BTreeMap::from([(3, 2)]));
        assert_eq!(maximal_clique_histogram(&g, 1), hist);
    }

    #[test]
    fn isolated_vertices_and_empty_graphs() {
        assert!(maximal_cliques(&Graph::default(), 1).is_empty());
        let g = Graph::from_edges(3, [(0, 1)]);
        assert_eq!(maximal_cliques(&g, 1), sets(&[&[0, 1], &[2]]));
        assert_eq!(maximal_cliques(&g, 2), sets(&[&[0, 1]]));
    }

    #[test]
    fn min_size_filters_without_losing_large_cliques() {
        // K4 plus a pendant edge from vertex 3
        let mut edges: Vec<(u32, u32)> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
        edges.push((3, 4));
        let g = Graph::from_edges(5, edges);
        assert_eq!(maximal_cliques(&g, 3), sets(&[&[0, 1, 2, 3]]));
        assert_eq!(maximal_cliques(&g, 2).len(), 2);
        assert!(maximal_cliques(&g, 5).is_empty());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = Graph::from_edges(
            8,
            [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (5, 3), (6, 7), (1, 3), (0, 3)],
        );
        let mut seq = Vec::new();
        for_each_maximal_clique(&g, 1, |c| seq.push(c));
        seq.sort();
        let par = std::sync::Mutex::new(Vec::new());
        par_for_each_maximal_clique(&g, 1, |c| par.lock().unwrap().push(c));
        let mut par = par.into_inner().unwrap();
        par.sort();
        assert_eq!(seq, par);
        assert_eq!(seq, maximal_cliques(&g, 1));
        for c in &seq {
            assert!(is_maximal_clique(&g, c.as_slice()), "{c}");
        }
    }
}
