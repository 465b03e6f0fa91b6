use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{GroupKind, KindRepr};
use crate::clique::maximal_cliques;
use crate::graph::VertexSet;
use crate::ingest::{DayNumber, ReviewStore, UserId};
use crate::kdgraph::{qualifying_evidence, qualifying_venues, KdGraph, KdParams};
use crate::quasiclique::{maximal_pseudo_cliques, QuasiParams};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VenueDates {
    pub venue: String,
    pub date_u: String,
    pub date_v: String,
}

/// Evidence for one member pair: the qualifying venues with the closest
/// review dates of both users.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEvidence {
    pub u: String,
    pub v: String,
    /// Number of qualifying venues (`>= k` exactly when the pair is an edge).
    pub count: u32,
    pub venues: Vec<VenueDates>,
    /// True when `venues` was cut at the evidence cap.
    #[serde(default)]
    pub truncated: bool,
}

/// One flagged group, serialised as a JSON line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupListing {
    #[serde(flatten)]
    kind: KindRepr,
    pub k: u32,
    pub d: u32,
    pub size: usize,
    /// External user ids, sorted.
    pub members: Vec<String>,
    pub pairs: Vec<PairEvidence>,
}

impl GroupListing {
    pub fn kind(&self) -> Result<GroupKind> {
        self.kind.clone().try_into()
    }

    pub fn params(&self) -> Result<KdParams> {
        KdParams::new(self.k, self.d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlagOptions {
    /// Venues listed per pair; `None` lists all.
    pub evidence_cap: Option<usize>,
    /// Size cap for the pseudo-clique walk.
    pub quasi_max_size: Option<usize>,
}

impl Default for FlagOptions {
    fn default() -> Self {
        FlagOptions {
            evidence_cap: Some(50),
            quasi_max_size: None,
        }
    }
}

/// Lists every maximal group of at least `min_size` members in `graph`
/// with per-pair venue and date evidence. Sorted by size (largest first),
/// then members.
pub fn flag_groups(
    store: &ReviewStore,
    graph: &KdGraph,
    kind: GroupKind,
    min_size: usize,
    options: &FlagOptions,
) -> Result<Vec<GroupListing>> {
    let sets: Vec<VertexSet> = match kind {
        GroupKind::Clique => maximal_cliques(graph.graph(), min_size.max(1)),
        GroupKind::QuasiClique(theta) => maximal_pseudo_cliques(
            graph.graph(),
            QuasiParams::new(theta, min_size.max(2), options.quasi_max_size)?,
        ),
    };
    let params = graph.params();
    let mut listings: Vec<GroupListing> = sets
        .iter()
        .map(|set| {
            let mut members: Vec<(String, UserId)> = set
                .iter()
                .map(|v| {
                    let user = graph.user(v);
                    (store.user_name(user).to_owned(), user)
                })
                .collect();
            members.sort();
            let mut pairs = Vec::new();
            for (i, (name_u, u)) in members.iter().enumerate() {
                for (name_v, v) in &members[i + 1..] {
                    let evidence = qualifying_evidence(store, *u, *v, params.d);
                    let count = evidence.len() as u32;
                    let cap = options.evidence_cap.unwrap_or(usize::MAX);
                    let mut venues: Vec<VenueDates> = evidence
                        .iter()
                        .map(|e| VenueDates {
                            venue: store.venue_name(e.venue).to_owned(),
                            date_u: e.date_u.to_string(),
                            date_v: e.date_v.to_string(),
                        })
                        .collect();
                    venues.sort_by(|a, b| a.venue.cmp(&b.venue));
                    let truncated = venues.len() > cap;
                    venues.truncate(cap);
                    pairs.push(PairEvidence {
                        u: name_u.clone(),
                        v: name_v.clone(),
                        count,
                        venues,
                        truncated,
                    });
                }
            }
            GroupListing {
                kind: kind.into(),
                k: params.k,
                d: params.d,
                size: members.len(),
                members: members.into_iter().map(|m| m.0).collect(),
                pairs,
            }
        })
        .collect();
    listings.sort_by(|a, b| b.size.cmp(&a.size).then_with(|| a.members.cmp(&b.members)));
    Ok(listings)
}

pub fn write_listings<W: Write>(listings: &[GroupListing], w: &mut W) -> Result<()> {
    for listing in listings {
        serde_json::to_writer(&mut *w, listing).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_listings<R: BufRead>(source: R) -> Result<Vec<GroupListing>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let listing: GroupListing =
            serde_json::from_str(&line).map_err(|e| Error::parse(format!("group listing line {}: {e}", i + 1)))?;
        listing.kind()?;
        out.push(listing);
    }
    Ok(out)
}

fn has_review(store: &ReviewStore, user: UserId, venue: &str, date: &str) -> bool {
    let (Some(venue), Some(date)) = (store.venue_id(venue), DayNumber::parse(date)) else {
        return false;
    };
    store.user_index().reviews(user).binary_search(&(venue, date)).is_ok()
}

/// Re-checks a listing against the store: every quoted review exists, every
/// quoted venue satisfies the day window, pair counts match a fresh count,
/// and the group meets its own definition (all pairs adjacent for a clique,
/// density at least θ for a quasi-clique). Returns the problems found.
pub fn validate_listing(store: &ReviewStore, listing: &GroupListing) -> Vec<String> {
    let mut problems = Vec::new();
    let (kind, params) = match (listing.kind(), listing.params()) {
        (Ok(kind), Ok(params)) => (kind, params),
        (Err(e), _) | (_, Err(e)) => return vec![e.to_string()],
    };
    if listing.size != listing.members.len() {
        problems.push(format!("size {} but {} members", listing.size, listing.members.len()));
    }
    let expected_pairs = listing.members.len() * listing.members.len().saturating_sub(1) / 2;
    if listing.pairs.len() != expected_pairs {
        problems.push(format!("{} pairs listed, expected {expected_pairs}", listing.pairs.len()));
    }
    let mut adjacent = 0u64;
    for pair in &listing.pairs {
        let (Some(u), Some(v)) = (store.user_id(&pair.u), store.user_id(&pair.v)) else {
            problems.push(format!("pair {}-{} names an unknown user", pair.u, pair.v));
            continue;
        };
        if !listing.members.contains(&pair.u) || !listing.members.contains(&pair.v) {
            problems.push(format!("pair {}-{} is not inside the group", pair.u, pair.v));
        }
        let fresh = qualifying_venues(store, u, v, params.d);
        if fresh != pair.count {
            problems.push(format!("pair {}-{}: count {} but store gives {fresh}", pair.u, pair.v, pair.count));
        }
        if pair.venues.len() > pair.count as usize || (!pair.truncated && pair.venues.len() != pair.count as usize) {
            problems.push(format!("pair {}-{}: {} venues listed for count {}", pair.u, pair.v, pair.venues.len(), pair.count));
        }
        for e in &pair.venues {
            if !has_review(store, u, &e.venue, &e.date_u) || !has_review(store, v, &e.venue, &e.date_v) {
                problems.push(format!("pair {}-{}: no such reviews at {} ({} / {})", pair.u, pair.v, e.venue, e.date_u, e.date_v));
                continue;
            }
            let gap = DayNumber::parse(&e.date_u)
                .zip(DayNumber::parse(&e.date_v))
                .map(|(a, b)| a.gap(b));
            if gap.is_none_or(|g| g > params.d) {
                problems.push(format!("pair {}-{}: venue {} dates are more than {} days apart", pair.u, pair.v, e.venue, params.d));
            }
        }
        if pair.count >= params.k {
            adjacent += 1;
        } else if kind == GroupKind::Clique {
            problems.push(format!("pair {}-{} has {} qualifying venues, below k={}", pair.u, pair.v, pair.count, params.k));
        }
    }
    if let GroupKind::QuasiClique(theta) = kind {
        if !theta.admits(adjacent, listing.members.len() as u64) {
            problems.push(format!("density {adjacent}/{expected_pairs} is below theta {theta}"));
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::StoreBuilder;
    use crate::kdgraph::{build_kd_graph, WeightMode};

    fn two_triangles() -> ReviewStore {
        let mut b = StoreBuilder::new();
        for (group, base) in [("a", 0), ("b", 100)] {
            for venue in 0..2 {
                for m in 0..3 {
                    b.push(&format!("{group}{m}"), &format!("{group}v{venue}"), DayNumber(base + venue * 20 + m), None);
                }
            }
        }
        b.finish().0
    }

    #[test]
    fn disjoint_triangles_give_two_listings() {
        let store = two_triangles();
        let graph = build_kd_graph(&store, KdParams::new(2, 2).unwrap(), WeightMode::Unweighted).unwrap();
        let listings = flag_groups(&store, &graph, GroupKind::Clique, 3, &FlagOptions::default()).unwrap();
        assert_eq!(listings.len(), 2);
        assert_eq!(listings[0].members, ["a0", "a1", "a2"]);
        for l in &listings {
            assert_eq!(l.pairs.len(), 3);
            assert!(l.pairs.iter().all(|p| p.count == 2 && p.venues.len() == 2));
            assert!(validate_listing(&store, l).is_empty(), "{:?}", validate_listing(&store, l));
        }
    }

    #[test]
    fn no_groups_gives_empty_output() {
        let store = two_triangles();
        let graph = build_kd_graph(&store, KdParams::new(3, 2).unwrap(), WeightMode::Unweighted).unwrap();
        assert!(flag_groups(&store, &graph, GroupKind::Clique, 3, &FlagOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn listings_round_trip_and_tampering_is_caught() {
        let store = two_triangles();
        let graph = build_kd_graph(&store, KdParams::new(2, 2).unwrap(), WeightMode::Unweighted).unwrap();
        let listings = flag_groups(&store, &graph, GroupKind::Clique, 3, &FlagOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_listings(&listings, &mut buf).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        assert!(line.starts_with(r#"{"kind":"clique","k":2,"d":2,"size":3,"members":["a0","a1","a2"],"pairs":[{"u":"a0","v":"a1","count":2,"venues":[{"venue":"av0","date_u":"1970-01-01","date_v":"1970-01-02"}"#), "{line}");
        let back = read_listings(buf.as_slice()).unwrap();
        assert_eq!(back, listings);

        let mut forged = back[0].clone();
        forged.pairs[0].venues[0].date_v = "1970-01-09".into();
        assert!(!validate_listing(&store, &forged).is_empty());
        let mut forged = back[0].clone();
        forged.pairs[1].count = 7;
        assert!(!validate_listing(&store, &forged).is_empty());
        let mut forged = back[0].clone();
        forged.d = 0;
        assert!(!validate_listing(&store, &forged).is_empty());
    }

    #[test]
    fn evidence_cap_truncates() {
        let store = two_triangles();
        let graph = build_kd_graph(&store, KdParams::new(2, 2).unwrap(), WeightMode::Unweighted).unwrap();
        let options = FlagOptions {
            evidence_cap: Some(1),
            ..Default::default()
        };
        let listings = flag_groups(&store, &graph, GroupKind::Clique, 3, &options).unwrap();
        assert!(listings[0].pairs.iter().all(|p| p.truncated && p.venues.len() == 1 && p.count == 2));
        assert!(validate_listing(&store, &listings[0]).is_empty());
    }
}
