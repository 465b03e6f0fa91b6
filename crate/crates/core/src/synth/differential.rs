//! Differential suite: enumeration output against the exhaustive oracles on
//! seeded random graphs.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::oracle;
use crate::clique::maximal_cliques;
use crate::graph::{Graph, VertexSet};
use crate::quasiclique::{maximal_pseudo_cliques, pseudo_cliques, QuasiParams, Theta};
use crate::Result;

#[derive(Clone, Copy, Debug)]
pub struct DiffConfig {
    pub seed: u64,
    /// Random graphs per check.
    pub graphs: usize,
    pub max_clique_n: usize,
    pub max_quasi_n: usize,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig {
            seed: 0,
            graphs: 300,
            max_clique_n: 12,
            max_quasi_n: 10,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub mismatches: usize,
    pub first_failure: Option<String>,
}

impl CheckResult {
    fn new(name: &str) -> Self {
        CheckResult {
            name: name.to_owned(),
            ..Default::default()
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.mismatches += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.cases > 0
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {} ({} cases, {} mismatches)", self.name, self.cases, self.mismatches)?;
        if let Some(first) = &self.first_failure {
            write!(f, " first: {first}")?;
        }
        Ok(())
    }
}

fn describe(graph: &Graph) -> String {
    let edges: Vec<String> = graph.edges().map(|(u, v, _)| format!("{u}-{v}")).collect();
    format!("n={} edges=[{}]", graph.n(), edges.join(","))
}

/// Random `(n, p)` pairs cycling through the requested probabilities.
pub fn random_cases(seed: u64, count: usize, max_n: usize, probs: &[f64]) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(1..=max_n);
            oracle::random_graph(n, probs[i % probs.len()], &mut rng)
        })
        .collect()
}

/// Every subset of size in `[min, max]` of each set.
pub fn expand_subsets(sets: &[VertexSet], min: usize, max: Option<usize>) -> BTreeSet<VertexSet> {
    let mut out = BTreeSet::new();
    for set in sets {
        let items = set.as_slice();
        for mask in 1u32..(1u32 << items.len()) {
            let size = mask.count_ones() as usize;
            if size >= min && max.is_none_or(|m| size <= m) {
                let chosen = (0..items.len()).filter(|i| mask & (1 << i) != 0).map(|i| items[i]).collect();
                out.insert(VertexSet::from_sorted(chosen));
            }
        }
    }
    out
}

pub fn check_cliques(config: &DiffConfig) -> Result<CheckResult> {
    let mut check = CheckResult::new("maximal cliques vs exhaustive oracle");
    for (i, g) in random_cases(config.seed, config.graphs, config.max_clique_n, &[0.3, 0.5, 0.8])
        .iter()
        .enumerate()
    {
        let min_size = 1 + i % 3;
        let want = oracle::oracle_maximal_cliques(g, min_size)?;
        let got: BTreeSet<_> = maximal_cliques(g, min_size).into_iter().collect();
        check.record(got == want, || format!("{} min_size={min_size}", describe(g)));
    }
    Ok(check)
}

pub fn check_pseudo_cliques(config: &DiffConfig) -> Result<CheckResult> {
    let mut check = CheckResult::new("pseudo-cliques and maximal pseudo-cliques vs exhaustive oracle");
    let thetas: [Theta; 3] = ["0.8".parse()?, "0.9".parse()?, "1".parse()?];
    let graphs = random_cases(config.seed ^ 0x9e37, config.graphs, config.max_quasi_n, &[0.4, 0.6, 0.9]);
    for (i, g) in graphs.iter().enumerate() {
        for theta in thetas {
            let min_size = 2 + i % 3;
            let max_size = (i % 4 == 3).then_some(min_size + 2);
            let params = QuasiParams::new(theta, min_size, max_size)?;
            let want = oracle::oracle_pseudo_cliques(g, theta, min_size, max_size)?;
            let got = pseudo_cliques(g, params);
            let unique = got.windows(2).all(|w| w[0] != w[1]);
            let got: BTreeSet<_> = got.into_iter().collect();
            check.record(unique && got == want, || format!("all, {} theta={theta} {params:?}", describe(g)));
            let want = oracle::oracle_maximal_pseudo_cliques(g, theta, min_size, max_size)?;
            let got: BTreeSet<_> = maximal_pseudo_cliques(g, params).into_iter().collect();
            check.record(got == want, || format!("maximal, {} theta={theta} {params:?}", describe(g)));
        }
    }
    Ok(check)
}

pub fn check_theta_one(config: &DiffConfig) -> Result<CheckResult> {
    let mut check = CheckResult::new("pseudo-cliques at theta=1 vs subsets of maximal cliques");
    let theta: Theta = "1".parse()?;
    let graphs = random_cases(config.seed ^ 0x51ed, config.graphs, config.max_quasi_n, &[0.3, 0.5, 0.8]);
    for (i, g) in graphs.iter().enumerate() {
        let min_size = 2 + i % 2;
        let max_size = (i % 3 == 2).then_some(4);
        let from_cliques = expand_subsets(&maximal_cliques(g, 1), min_size, max_size);
        let got: BTreeSet<_> = pseudo_cliques(g, QuasiParams::new(theta, min_size, max_size)?)
            .into_iter()
            .collect();
        check.record(got == from_cliques, || describe(g));
    }
    Ok(check)
}

/// Runs the three checks.
pub fn run(config: &DiffConfig) -> Result<Vec<CheckResult>> {
    Ok(vec![check_cliques(config)?, check_pseudo_cliques(config)?, check_theta_one(config)?])
}
