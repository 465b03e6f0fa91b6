use std::collections::BTreeSet;

use cliquescout::clique::{is_clique, maximal_cliques};
use cliquescout::kdgraph::{build_kd_graph, kd_parameter_sweep, qualifying_venues};
use cliquescout::report::{check_sweep_monotonicity, export_group_graph, flag_groups, FlagOptions, GraphFormat, GroupKind};
use cliquescout::synth::oracle::{oracle_kd_edges, oracle_pair_venue_counts};
use cliquescout::synth::{self, PlantedGroupSpec, SynthConfig};
use cliquescout::{KdGraph, KdParams, ReviewStore, UserId, WeightMode};

fn small_store(seed: u64) -> ReviewStore {
    synth::generate(&SynthConfig {
        seed,
        n_users: 200,
        n_venues: 40,
        background_reviews: 1500,
        span_days: 120,
        groups: vec![PlantedGroupSpec {
            members: 5,
            venues: 4,
            spread: 3,
        }],
        ..Default::default()
    })
    .unwrap()
    .to_store()
    .unwrap()
}

fn edge_set(g: &KdGraph) -> BTreeSet<(UserId, UserId)> {
    g.user_edges().map(|(a, b, _)| (a, b)).collect()
}

#[test]
fn build_matches_brute_force_oracle() {
    for seed in 0..5 {
        let store = small_store(seed);
        for (k, d) in [(3, 5), (1, 0), (2, 10), (4, 3)] {
            let g = build_kd_graph(&store, KdParams::new(k, d).unwrap(), WeightMode::Unweighted).unwrap();
            assert_eq!(edge_set(&g), oracle_kd_edges(&store, k, d), "seed {seed} ({k},{d})");
        }
    }
}

#[test]
fn co_review_weights_match_oracle_counts() {
    let store = small_store(9);
    let counts = oracle_pair_venue_counts(&store, 5);
    let g = build_kd_graph(&store, KdParams::new(2, 5).unwrap(), WeightMode::CoReviewCount).unwrap();
    assert!(g.edge_count() > 0);
    for (a, b, w) in g.user_edges() {
        assert_eq!(w, counts[&(a, b)]);
        assert!(w >= 2);
        assert_eq!(qualifying_venues(&store, a, b, 5), w);
        assert_eq!(qualifying_venues(&store, b, a, 5), w);
    }
}

#[test]
fn adjacency_is_symmetric() {
    let store = small_store(3);
    let g = build_kd_graph(&store, KdParams::new(2, 6).unwrap(), WeightMode::CoReviewCount).unwrap();
    let graph = g.graph();
    for u in 0..graph.n() as u32 {
        for (&v, &w) in graph.neighbors(u).iter().zip(graph.weights(u)) {
            assert_ne!(u, v);
            assert_eq!(graph.weight(v, u), Some(w));
        }
    }
}

#[test]
fn sweep_equals_independent_builds_and_is_monotone() {
    for seed in 20..30 {
        let store = small_store(seed);
        let ks = [1, 2, 3];
        let ds = [0, 4, 9];
        let sweep = kd_parameter_sweep(&store, &ks, &ds, WeightMode::CoReviewCount).unwrap();
        assert_eq!(sweep.len(), 9);
        for (&params, g) in &sweep {
            let direct = build_kd_graph(&store, params, WeightMode::CoReviewCount).unwrap();
            assert_eq!(g, &direct, "seed {seed} {params}");
        }
        assert!(check_sweep_monotonicity(&sweep).is_empty());
        for &k in &ks[1..] {
            for &d in &ds {
                let strict = edge_set(&sweep[&KdParams { k, d }]);
                let loose = edge_set(&sweep[&KdParams { k: k - 1, d }]);
                assert!(strict.is_subset(&loose));
            }
        }
    }
}

#[test]
fn friend_intersection_weights_match_set_intersection() {
    let data = synth::generate(&SynthConfig {
        seed: 17,
        n_users: 150,
        n_venues: 60,
        background_reviews: 600,
        friends_per_user: 25,
        groups: vec![PlantedGroupSpec {
            members: 11,
            venues: 6,
            spread: 5,
        }],
        ..Default::default()
    })
    .unwrap();
    let store = data.to_store().unwrap();
    let g = build_kd_graph(&store, KdParams::new(6, 5).unwrap(), WeightMode::FriendIntersection).unwrap();
    let groups = flag_groups(&store, &g, GroupKind::Clique, 11, &FlagOptions::default()).unwrap();
    assert_eq!(groups.len(), 1);

    let friends_of = |name: &str| -> BTreeSet<&str> {
        let u = data.users.as_ref().unwrap().iter().find(|u| u.user_id == name).unwrap();
        u.friends.iter().map(String::as_str).collect()
    };
    let mut tsv = Vec::new();
    export_group_graph(&store, &g, &groups, None, GraphFormat::Tsv, &mut tsv).unwrap();
    let text = String::from_utf8(tsv).unwrap();
    assert_eq!(text.lines().count(), 55);
    let mut nonzero = 0;
    for line in text.lines() {
        let f: Vec<&str> = line.split('\t').collect();
        let expected = friends_of(f[0]).intersection(&friends_of(f[1])).count();
        assert_eq!(f[2].parse::<usize>().unwrap(), expected, "{line}");
        nonzero += usize::from(expected > 0);
    }
    assert!(nonzero > 0, "oracle intersections are all empty; the check would be vacuous");
}

#[test]
fn cliques_survive_looser_parameters() {
    let store = small_store(44);
    let sweep = kd_parameter_sweep(&store, &[2, 3], &[3, 7], WeightMode::Unweighted).unwrap();
    let strict = &sweep[&KdParams { k: 3, d: 3 }];
    let cliques = maximal_cliques(strict.graph(), 3);
    assert!(!cliques.is_empty());
    for loose in [(2, 3), (3, 7), (2, 7)] {
        let loose = &sweep[&KdParams { k: loose.0, d: loose.1 }];
        for c in &cliques {
            let mapped: Vec<u32> = c.iter().map(|v| loose.vertex(strict.user(v)).unwrap()).collect();
            let mut sorted = mapped.clone();
            sorted.sort_unstable();
            assert!(is_clique(loose.graph(), &sorted));
        }
    }
}
