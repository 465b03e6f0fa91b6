//! `(k, d)` reviewer similarity graphs.
//!
//! Two users are adjacent when they reviewed at least `k` common venues with
//! review dates at most `d` days apart at each of those venues. Each venue
//! counts once per pair no matter how many review pairs qualify.

pub mod export;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::ingest::{DayNumber, ReviewStore, UserId, VenueId};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KdParams {
    /// Minimum number of qualifying venues.
    pub k: u32,
    /// Maximum day gap between the two reviews of a venue, inclusive.
    pub d: u32,
}

impl KdParams {
    pub fn new(k: u32, d: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("k must be at least 1"));
        }
        Ok(KdParams { k, d })
    }
}

impl fmt::Display for KdParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.d)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// Every edge weighs 1.
    #[default]
    Unweighted,
    /// Number of qualifying venues.
    CoReviewCount,
    /// Size of the intersection of the two users' friend lists.
    FriendIntersection,
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "unweighted" | "none" => Ok(WeightMode::Unweighted),
            "co-review-count" | "co-review" | "count" => Ok(WeightMode::CoReviewCount),
            "friend-intersection" | "friends" => Ok(WeightMode::FriendIntersection),
            _ => Err(Error::config(format!("unknown weight mode {s:?}"))),
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::Unweighted => "unweighted",
            WeightMode::CoReviewCount => "co-review-count",
            WeightMode::FriendIntersection => "friend-intersection",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    /// Largest number of in-window review pairs a single venue may produce.
    pub pair_budget: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            pair_budget: 100_000_000,
        }
    }
}

/// Reviewer similarity graph. Only users with at least one edge become
/// vertices; vertex `i` is the `i`-th smallest such [`UserId`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KdGraph {
    params: KdParams,
    mode: WeightMode,
    users: Vec<UserId>,
    graph: Graph,
}

impl KdGraph {
    pub fn params(&self) -> KdParams {
        self.params
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.users.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn user(&self, vertex: u32) -> UserId {
        self.users[vertex as usize]
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn vertex(&self, user: UserId) -> Option<u32> {
        self.users.binary_search(&user).ok().map(|i| i as u32)
    }

    /// Edges as `(user, user, weight)` with the smaller user id first.
    pub fn user_edges(&self) -> impl Iterator<Item = (UserId, UserId, u32)> + '_ {
        self.graph
            .edges()
            .map(|(u, v, w)| (self.users[u as usize], self.users[v as usize], w))
    }

    /// Edges by external user id, each pair ordered lexicographically and
    /// the list sorted.
    pub fn named_edges(&self, store: &ReviewStore) -> Vec<(String, String, u32)> {
        let mut edges: Vec<_> = self
            .user_edges()
            .map(|(a, b, w)| {
                let (a, b) = (store.user_name(a), store.user_name(b));
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                (a.to_owned(), b.to_owned(), w)
            })
            .collect();
        edges.sort();
        edges
    }
}

fn pair_key(a: UserId, b: UserId) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    (u64::from(lo.0) << 32) | u64::from(hi.0)
}

fn split_key(key: u64) -> (UserId, UserId) {
    (UserId((key >> 32) as u32), UserId(key as u32))
}

/// Walks both users' reviews venue by venue and reports, for every venue
/// where some pair of their reviews lies within `d` days, the pair with the
/// smallest gap (earliest such pair on ties).
fn for_each_qualifying_venue(
    store: &ReviewStore,
    u: UserId,
    v: UserId,
    d: u32,
    mut f: impl FnMut(VenueId, DayNumber, DayNumber),
) {
    if u == v {
        return;
    }
    let index = store.user_index();
    let (a, b) = (index.reviews(u), index.reviews(v));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (va, vb) = (a[i].0, b[j].0);
        if va < vb {
            i += 1;
            continue;
        }
        if vb < va {
            j += 1;
            continue;
        }
        let venue = va;
        let ie = i + a[i..].partition_point(|r| r.0 == venue);
        let je = j + b[j..].partition_point(|r| r.0 == venue);
        let mut best: Option<(u32, DayNumber, DayNumber)> = None;
        let (mut p, mut q) = (i, j);
        // both day lists are ascending: advance the earlier one
        while p < ie && q < je {
            let (da, db) = (a[p].1, b[q].1);
            let gap = da.gap(db);
            if best.is_none_or(|(g, _, _)| gap < g) {
                best = Some((gap, da, db));
            }
            if da <= db {
                p += 1;
            } else {
                q += 1;
            }
        }
        if let Some((gap, da, db)) = best {
            if gap <= d {
                f(venue, da, db);
            }
        }
        i = ie;
        j = je;
    }
}

/// Number of venues both users reviewed with some pair of reviews at most
/// `d` days apart. Unknown users and `u == v` give 0.
pub fn qualifying_venues(store: &ReviewStore, u: UserId, v: UserId, d: u32) -> u32 {
    let mut count = 0;
    for_each_qualifying_venue(store, u, v, d, |_, _, _| count += 1);
    count
}

/// One qualifying venue of a user pair with the closest pair of review dates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VenueEvidence {
    pub venue: VenueId,
    pub date_u: DayNumber,
    pub date_v: DayNumber,
}

/// Qualifying venues of `(u, v)` in ascending venue id order.
pub fn qualifying_evidence(store: &ReviewStore, u: UserId, v: UserId, d: u32) -> Vec<VenueEvidence> {
    let mut out = Vec::new();
    for_each_qualifying_venue(store, u, v, d, |venue, date_u, date_v| {
        out.push(VenueEvidence { venue, date_u, date_v })
    });
    out
}

/// Number of `(i, j)`, `i < j`, with `days[j] - days[i] <= d` in a sorted
/// day column.
fn window_pair_count(days: &[DayNumber], d: u32) -> u64 {
    let mut end = 0;
    let mut total = 0u64;
    for (i, day) in days.iter().enumerate() {
        end = end.max(i + 1);
        while end < days.len() && days[end].0.abs_diff(day.0) <= d {
            end += 1;
        }
        total += (end - i - 1) as u64;
    }
    total
}

fn check_budget(store: &ReviewStore, venue: VenueId, d: u32, options: &BuildOptions) -> Result<()> {
    let (_, days) = store.venue_columns(venue);
    let pairs = window_pair_count(days, d);
    if pairs > options.pair_budget {
        return Err(Error::PairBudget {
            venue: store.venue_name(venue).to_owned(),
            pairs,
            budget: options.pair_budget,
        });
    }
    Ok(())
}

/// Calls `f(pair, gap)` for every in-window pair of reviews by different
/// users of one venue.
fn venue_window_pairs(store: &ReviewStore, venue: VenueId, d: u32, mut f: impl FnMut(u64, u32)) {
    let (users, days) = store.venue_columns(venue);
    for i in 0..users.len() {
        for j in i + 1..users.len() {
            let gap = days[i].gap(days[j]);
            if gap > d {
                break;
            }
            if users[i] != users[j] {
                f(pair_key(users[i], users[j]), gap);
            }
        }
    }
}

fn check_mode(store: &ReviewStore, mode: WeightMode) -> Result<()> {
    if mode == WeightMode::FriendIntersection && !store.has_friend_data() {
        return Err(Error::config(
            "friend-intersection weights need a user file with friend lists",
        ));
    }
    Ok(())
}

fn sorted_intersection_len(a: &[UserId], b: &[UserId]) -> u32 {
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

/// Builds the graph from `(pair key, qualifying venue count)` entries,
/// which must already satisfy the `k` threshold.
fn assemble(store: &ReviewStore, params: KdParams, mode: WeightMode, edges: &[(u64, u32)]) -> KdGraph {
    let mut users: Vec<UserId> = edges
        .iter()
        .flat_map(|&(key, _)| {
            let (a, b) = split_key(key);
            [a, b]
        })
        .collect();
    users.sort_unstable();
    users.dedup();
    let local = |u: UserId| users.binary_search(&u).expect("endpoint collected above") as u32;
    let weighted = edges.iter().map(|&(key, count)| {
        let (a, b) = split_key(key);
        let weight = match mode {
            WeightMode::Unweighted => 1,
            WeightMode::CoReviewCount => count,
            WeightMode::FriendIntersection => {
                sorted_intersection_len(store.friends(a), store.friends(b))
            }
        };
        (local(a), local(b), weight)
    });
    let graph = Graph::from_weighted_edges(users.len(), weighted.collect::<Vec<_>>());
    KdGraph {
        params,
        mode,
        users,
        graph,
    }
}

pub fn build_kd_graph(store: &ReviewStore, params: KdParams, mode: WeightMode) -> Result<KdGraph> {
    build_kd_graph_with(store, params, mode, &BuildOptions::default())
}

/// Sliding-window join: every review is paired with the later reviews of
/// the same venue at most `d` days after it, each venue contributes each
/// user pair once, and pairs seen at `k` or more venues become edges.
pub fn build_kd_graph_with(
    store: &ReviewStore,
    params: KdParams,
    mode: WeightMode,
    options: &BuildOptions,
) -> Result<KdGraph> {
    KdParams::new(params.k, params.d)?;
    check_mode(store, mode)?;
    let per_venue: Vec<Vec<u64>> = (0..store.n_venues() as u32)
        .into_par_iter()
        .map(|v| {
            let venue = VenueId(v);
            check_budget(store, venue, params.d, options)?;
            let mut keys = Vec::new();
            venue_window_pairs(store, venue, params.d, |key, _| keys.push(key));
            keys.sort_unstable();
            keys.dedup();
            Ok(keys)
        })
        .collect::<Result<_>>()?;
    let mut keys: Vec<u64> = per_venue.into_iter().flatten().collect();
    keys.par_sort_unstable();

    let mut edges = Vec::new();
    for run in keys.chunk_by(|a, b| a == b) {
        if run.len() as u64 >= u64::from(params.k) {
            edges.push((run[0], run.len() as u32));
        }
    }
    Ok(assemble(store, params, mode, &edges))
}

/// Builds every `(k, d)` graph of the grid `ks × ds` from one join at the
/// largest `d`: for each pair and venue the smallest qualifying gap is kept,
/// and each grid cell thresholds those gaps.
pub fn kd_parameter_sweep(
    store: &ReviewStore,
    ks: &[u32],
    ds: &[u32],
    mode: WeightMode,
) -> Result<BTreeMap<KdParams, KdGraph>> {
    kd_parameter_sweep_with(store, ks, ds, mode, &BuildOptions::default())
}

pub fn kd_parameter_sweep_with(
    store: &ReviewStore,
    ks: &[u32],
    ds: &[u32],
    mode: WeightMode,
    options: &BuildOptions,
) -> Result<BTreeMap<KdParams, KdGraph>> {
    if ks.is_empty() || ds.is_empty() {
        return Err(Error::config("parameter sweep needs non-empty k and d lists"));
    }
    let mut ks = ks.to_vec();
    let mut ds = ds.to_vec();
    ks.sort_unstable();
    ks.dedup();
    ds.sort_unstable();
    ds.dedup();
    for &k in &ks {
        KdParams::new(k, 0)?;
    }
    check_mode(store, mode)?;
    let d_max = *ds.last().expect("non-empty");

    let per_venue: Vec<Vec<(u64, u32)>> = (0..store.n_venues() as u32)
        .into_par_iter()
        .map(|v| {
            let venue = VenueId(v);
            check_budget(store, venue, d_max, options)?;
            let mut gaps = Vec::new();
            venue_window_pairs(store, venue, d_max, |key, gap| gaps.push((key, gap)));
            gaps.sort_unstable();
            // sorted by (pair, gap): the first entry of a pair has its minimum gap
            gaps.dedup_by_key(|e| e.0);
            Ok(gaps)
        })
        .collect::<Result<_>>()?;
    let mut gaps: Vec<(u64, u32)> = per_venue.into_iter().flatten().collect();
    gaps.par_sort_unstable();

    let mut edges: Vec<Vec<(u64, u32)>> = vec![Vec::new(); ks.len() * ds.len()];
    for run in gaps.chunk_by(|a, b| a.0 == b.0) {
        let key = run[0].0;
        for (di, &d) in ds.iter().enumerate() {
            let count = run.partition_point(|&(_, gap)| gap <= d) as u32;
            for (ki, &k) in ks.iter().enumerate() {
                if count >= k {
                    edges[ki * ds.len() + di].push((key, count));
                }
            }
        }
    }

    let mut out = BTreeMap::new();
    for (ki, &k) in ks.iter().enumerate() {
        for (di, &d) in ds.iter().enumerate() {
            let params = KdParams { k, d };
            out.insert(params, assemble(store, params, mode, &edges[ki * ds.len() + di]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::StoreBuilder;

    fn day(n: i32) -> DayNumber {
        DayNumber(16_000 + n)
    }

    #[test]
    fn same_dates_zero_gap() {
        let mut b = StoreBuilder::new();
        for v in ["A", "B", "C"] {
            b.push("u", v, day(1), None);
            b.push("v", v, day(1), None);
        }
        let (store, _) = b.finish();
        let (u, v) = (store.user_id("u").unwrap(), store.user_id("v").unwrap());
        assert_eq!(qualifying_venues(&store, u, v, 0), 3);
    }

    #[test]
    fn any_qualifying_pair_counts_the_venue_once() {
        let mut b = StoreBuilder::new();
        b.push("u", "A", day(10), None);
        b.push("v", "A", day(16), None);
        b.push("v", "A", day(14), None);
        let (store, _) = b.finish();
        let (u, v) = (store.user_id("u").unwrap(), store.user_id("v").unwrap());
        assert_eq!(qualifying_venues(&store, u, v, 5), 1);
        assert_eq!(qualifying_venues(&store, v, u, 5), 1);
        assert_eq!(qualifying_venues(&store, u, v, 3), 0);
        assert_eq!(qualifying_venues(&store, u, v, 4), 1, "gap rule is inclusive");
        let ev = qualifying_evidence(&store, u, v, 5);
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].date_u, ev[0].date_v), (day(10), day(14)));
        assert_eq!(qualifying_venues(&store, u, UserId(77), 5), 0);
        assert_eq!(qualifying_venues(&store, u, u, 5), 0);
    }

    #[test]
    fn single_user_store_gives_empty_graph() {
        let mut b = StoreBuilder::new();
        for v in 0..10 {
            b.push("solo", &format!("v{v}"), day(v), None);
        }
        let (store, _) = b.finish();
        let g = build_kd_graph(&store, KdParams::new(1, 100).unwrap(), WeightMode::Unweighted).unwrap();
        assert_eq!((g.n(), g.edge_count()), (0, 0));
    }

    #[test]
    fn eleven_users_six_venues_form_a_complete_graph() {
        let mut b = StoreBuilder::new();
        for v in 0..6 {
            for u in 0..11 {
                b.push(&format!("u{u:02}"), &format!("v{v}"), day(v * 30 + (u % 6)), None);
            }
        }
        let (store, _) = b.finish();
        let g = build_kd_graph(&store, KdParams::new(6, 5).unwrap(), WeightMode::CoReviewCount).unwrap();
        assert_eq!(g.n(), 11);
        assert_eq!(g.edge_count(), 55);
        assert!(g.user_edges().all(|(_, _, w)| w == 6));
        let g = build_kd_graph(&store, KdParams::new(7, 5).unwrap(), WeightMode::Unweighted).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn friend_weights_need_friend_data() {
        let (store, _) = StoreBuilder::new().finish();
        let err = build_kd_graph(&store, KdParams::new(1, 1).unwrap(), WeightMode::FriendIntersection).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(KdParams::new(0, 1).is_err());
    }

    #[test]
    fn pair_budget_names_the_venue() {
        let mut b = StoreBuilder::new();
        for u in 0..20 {
            b.push(&format!("u{u}"), "mega", day(0), None);
        }
        b.push("x", "small", day(0), None);
        let (store, _) = b.finish();
        let options = BuildOptions { pair_budget: 100 };
        let err = build_kd_graph_with(&store, KdParams::new(1, 0).unwrap(), WeightMode::Unweighted, &options)
            .unwrap_err();
        match err {
            Error::PairBudget { venue, pairs, .. } => {
                assert_eq!(venue, "mega");
                assert_eq!(pairs, 190);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn window_pair_count_matches_quadratic_count() {
        let days: Vec<DayNumber> = [0, 0, 1, 3, 7, 8, 8, 20].into_iter().map(DayNumber).collect();
        for d in 0..25 {
            let brute = (0..days.len())
                .flat_map(|i| (i + 1..days.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| days[i].gap(days[j]) <= d)
                .count() as u64;
            assert_eq!(window_pair_count(&days, d), brute, "d={d}");
        }
    }

    #[test]
    fn weight_mode_parses() {
        assert_eq!("co_review_count".parse::<WeightMode>().unwrap(), WeightMode::CoReviewCount);
        assert_eq!("friend-intersection".parse::<WeightMode>().unwrap(), WeightMode::FriendIntersection);
        assert!("cosine".parse::<WeightMode>().is_err());
    }
}
