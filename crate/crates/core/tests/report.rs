use std::collections::BTreeSet;

use cliquescout::clique::maximal_clique_histogram;
use cliquescout::kdgraph::build_kd_graph;
use cliquescout::quasiclique::maximal_pseudo_clique_histogram;
use cliquescout::report::{
    annotate, build_count_table, flag_groups, read_labels, run_count_table, validate_listing, CountTable,
    FlagOptions, GroupKind, TableSpec,
};
use cliquescout::synth::oracle::oracle_maximal_cliques;
use cliquescout::synth::{self, PlantedGroupSpec, SynthConfig, SynthData};
use cliquescout::{Graph, KdParams, QuasiParams, Theta, WeightMode};

fn planted(seed: u64, groups: &[(usize, usize, u32)]) -> SynthData {
    synth::generate(&SynthConfig {
        seed,
        n_users: 500,
        n_venues: 150,
        background_reviews: 4000,
        groups: groups
            .iter()
            .map(|&(members, venues, spread)| PlantedGroupSpec { members, venues, spread })
            .collect(),
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn planted_ten_group_fills_only_its_cell() {
    let data = planted(1, &[(10, 6, 5)]);
    let store = data.to_store().unwrap();
    let table = build_count_table(
        &store,
        &TableSpec::new(vec![6], vec![5], vec![9, 10, 11], GroupKind::Clique),
    )
    .unwrap();
    let p = KdParams::new(6, 5).unwrap();
    assert!(table.exact(p, 10) >= 1);
    assert_eq!(table.exact(p, 11), 0);

    // oracle on the planted subgraph: the members form one maximal clique
    let g = build_kd_graph(&store, p, WeightMode::Unweighted).unwrap();
    let members: Vec<u32> = data.groups[0]
        .members
        .iter()
        .map(|m| g.vertex(store.user_id(m).unwrap()).unwrap())
        .collect();
    let sub = Graph::from_edges(
        members.len(),
        (0..members.len()).flat_map(|i| (i + 1..members.len()).map(move |j| (i, j))).filter_map(|(i, j)| {
            g.graph().has_edge(members[i], members[j]).then_some((i as u32, j as u32))
        }),
    );
    let oracle = oracle_maximal_cliques(&sub, 1).unwrap();
    assert_eq!(oracle.len(), 1);
    assert_eq!(oracle.first().unwrap().len(), 10);
}

#[test]
fn clique_histogram_tops_out_at_planted_size() {
    let data = planted(2, &[(10, 7, 4)]);
    let store = data.to_store().unwrap();
    let g = build_kd_graph(&store, KdParams::new(6, 5).unwrap(), WeightMode::Unweighted).unwrap();
    let hist = maximal_clique_histogram(g.graph(), 1);
    assert_eq!(hist.keys().next_back(), Some(&10));
    assert!(hist[&10] >= 1);
}

#[test]
fn quasi_histogram_tops_out_at_planted_size() {
    let data = planted(3, &[(9, 6, 5)]);
    let store = data.to_store().unwrap();
    let g = build_kd_graph(&store, KdParams::new(6, 5).unwrap(), WeightMode::Unweighted).unwrap();
    let hist = maximal_pseudo_clique_histogram(g.graph(), QuasiParams::new(Theta::default(), 7, None).unwrap());
    assert_eq!(hist.keys().next_back(), Some(&9));
}

#[test]
fn planted_eleven_group_is_flagged_with_evidence() {
    let data = planted(4, &[(11, 6, 5)]);
    let store = data.to_store().unwrap();
    let g = build_kd_graph(&store, KdParams::new(6, 5).unwrap(), WeightMode::Unweighted).unwrap();
    let listings = flag_groups(&store, &g, GroupKind::Clique, 9, &FlagOptions::default()).unwrap();
    assert_eq!(listings.len(), 1);
    let l = &listings[0];
    assert_eq!(l.members, data.groups[0].members);
    assert_eq!(l.pairs.len(), 55);
    assert!(l.pairs.iter().all(|p| p.count >= 6));
    let planted_venues: BTreeSet<&str> = data.groups[0].venues.iter().map(String::as_str).collect();
    for pair in &l.pairs {
        let listed: BTreeSet<&str> = pair.venues.iter().map(|v| v.venue.as_str()).collect();
        assert!(planted_venues.is_subset(&listed));
    }
    assert!(validate_listing(&store, l).is_empty());
}

#[test]
fn two_planted_triangles_give_two_listings() {
    let data = planted(5, &[(3, 4, 2), (3, 4, 2)]);
    let store = data.to_store().unwrap();
    let g = build_kd_graph(&store, KdParams::new(4, 2).unwrap(), WeightMode::Unweighted).unwrap();
    let listings = flag_groups(&store, &g, GroupKind::Clique, 3, &FlagOptions::default()).unwrap();
    let got: BTreeSet<Vec<String>> = listings.iter().map(|l| l.members.clone()).collect();
    let truth: BTreeSet<Vec<String>> = data.groups.iter().map(|g| g.members.clone()).collect();
    assert_eq!(got, truth);
}

#[test]
fn scout_fraction_equals_planted_over_flagged() {
    let data = planted(6, &[(11, 6, 5), (8, 6, 5)]);
    let store = data.to_store().unwrap();
    let g = build_kd_graph(&store, KdParams::new(6, 5).unwrap(), WeightMode::Unweighted).unwrap();
    let listings = flag_groups(&store, &g, GroupKind::Clique, 3, &FlagOptions::default()).unwrap();
    let mut csv = String::from("user_id,label\n");
    for m in &data.groups[0].members {
        csv.push_str(&format!("{m},scout\n"));
    }
    let labels = read_labels(csv.as_bytes()).unwrap();
    let stats = annotate(&store, &labels, &listings, None);
    let flagged: BTreeSet<&String> = listings.iter().flat_map(|l| &l.members).collect();
    assert_eq!(flagged.len(), 19);
    assert_eq!(stats.flagged.fraction("scout"), 11.0 / flagged.len() as f64);
}

#[test]
fn table_csv_round_trips_on_real_run() {
    let data = planted(7, &[(11, 6, 5), (9, 7, 3)]);
    let store = data.to_store().unwrap();
    let spec = TableSpec::new(vec![5, 6, 7], vec![3, 5, 8], vec![8, 9, 10, 11], GroupKind::QuasiClique(Theta::default()));
    let run = run_count_table(&store, &spec).unwrap();
    assert!(run.violations.is_empty(), "{:?}", run.violations);
    let (mut exact, mut cumulative) = (Vec::new(), Vec::new());
    run.table.write_csv(&mut exact).unwrap();
    run.table.write_cumulative_csv(&mut cumulative).unwrap();
    let back = CountTable::from_csv(run.table.kind, exact.as_slice(), cumulative.as_slice()).unwrap();
    assert_eq!(back, run.table);
    assert_eq!(run.table.at_least(KdParams::new(6, 5).unwrap(), 11), 1);
}
