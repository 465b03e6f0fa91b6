use std::collections::{BTreeMap, BTreeSet};

use cliquescout::ingest::{
    ingest_reviews, read_store, write_store, DayNumber, ErrorBudget, IngestOptions, ReviewStore,
};
use cliquescout::synth::{self, SynthConfig};
use proptest::prelude::*;

fn ndjson(rows: &[(u8, u8, i32, Option<u8>)]) -> String {
    rows.iter()
        .map(|&(u, v, day, stars)| {
            let date = DayNumber(day).to_string();
            match stars {
                Some(s) => format!(r#"{{"user_id":"u{u}","business_id":"v{v}","date":"{date}","stars":{s}}}"#),
                None => format!(r#"{{"user_id":"u{u}","business_id":"v{v}","date":"{date}"}}"#),
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn triples(store: &ReviewStore) -> Vec<(String, String, i32)> {
    store
        .reviews()
        .map(|r| (store.user_name(r.user).to_owned(), store.venue_name(r.venue).to_owned(), r.date.0))
        .collect()
}

fn assert_venue_grouped(store: &ReviewStore) {
    for venue in store.venues() {
        let (users, days) = store.venue_columns(venue);
        let keys: Vec<(i32, u32)> = days.iter().zip(users).map(|(d, u)| (d.0, u.0)).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "venue {} not sorted or has duplicates", store.venue_name(venue));
    }
    assert_eq!(store.venues().map(|v| store.venue_columns(v).0.len()).sum::<usize>(), store.n_reviews());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ingest_keeps_exactly_the_distinct_triples(
        rows in prop::collection::vec((0u8..12, 0u8..6, 14_000i32..14_040, prop::option::of(1u8..=5)), 0..120)
    ) {
        let (store, stats) = ingest_reviews(ndjson(&rows).as_bytes(), &IngestOptions::default()).unwrap();
        let expected: BTreeSet<(String, String, i32)> =
            rows.iter().map(|&(u, v, d, _)| (format!("u{u}"), format!("v{v}"), d)).collect();
        let got = triples(&store);
        prop_assert_eq!(got.len(), expected.len());
        prop_assert_eq!(got.iter().cloned().collect::<BTreeSet<_>>(), expected);
        prop_assert_eq!(stats.lines_read, rows.len() as u64);
        prop_assert_eq!(stats.records_kept + stats.duplicates_dropped, rows.len() as u64);
        assert_venue_grouped(&store);
        for r in store.reviews() {
            prop_assert!(r.stars.is_none_or(|s| (1..=5).contains(&s)));
        }
    }

    #[test]
    fn invalid_lines_are_counted_and_skipped(
        lines in prop::collection::vec(
            prop_oneof![
                (0u8..8, 0u8..4, 15_000i32..15_010).prop_map(|(u, v, d)| ndjson(&[(u, v, d, None)])),
                Just("not json".to_string()),
                Just(r#"{"user_id":"x","business_id":"y","date":"2012-13-01"}"#.to_string()),
                Just(r#"{"user_id":"x","business_id":"y","date":"2012-01-01","stars":9}"#.to_string()),
                Just(r#"{"user_id":"x","date":"2012-01-01"}"#.to_string()),
                Just("".to_string()),
            ],
            0..60,
        )
    ) {
        let text = lines.join("\n");
        let (store, stats) = ingest_reviews(text.as_bytes(), &IngestOptions {
            budget: ErrorBudget::unlimited(),
            ..Default::default()
        }).unwrap();
        let blank = lines.iter().filter(|l| l.is_empty()).count() as u64;
        let bad = lines.iter().filter(|l| !l.is_empty() && !l.starts_with(r#"{"user_id":"u"#)).count() as u64;
        prop_assert_eq!(stats.lines_read, lines.len() as u64 - blank);
        prop_assert_eq!(stats.lines_skipped, bad);
        prop_assert_eq!(stats.lines_read, stats.records_kept + stats.duplicates_dropped + stats.lines_skipped);
        prop_assert_eq!(store.n_reviews() as u64, stats.records_kept);
        assert_venue_grouped(&store);
    }

    #[test]
    fn store_file_round_trips(
        rows in prop::collection::vec((0u8..30, 0u8..10, -400i32..400, prop::option::of(1u8..=5)), 0..80)
    ) {
        let (store, _) = ingest_reviews(ndjson(&rows).as_bytes(), &IngestOptions::default()).unwrap();
        let mut bytes = Vec::new();
        write_store(&store, &mut bytes).unwrap();
        let back = read_store(bytes.as_slice()).unwrap();
        prop_assert_eq!(&back, &store);
        let mut again = Vec::new();
        write_store(&back, &mut again).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn day_numbers_round_trip(day in -700_000i32..2_900_000) {
        let d = DayNumber(day);
        prop_assert_eq!(DayNumber::parse(&d.to_string()), Some(d));
    }
}

#[test]
fn hundred_thousand_reviews_are_grouped_and_round_trip() {
    let data = synth::generate(&SynthConfig {
        seed: 11,
        n_users: 20_000,
        n_venues: 5_000,
        background_reviews: 100_000,
        ..Default::default()
    })
    .unwrap();
    let store = data.to_store().unwrap();
    assert_venue_grouped(&store);
    let expected: BTreeSet<(String, String, i32)> = data
        .reviews
        .iter()
        .map(|r| (r.user_id.clone(), r.business_id.clone(), DayNumber::parse(&r.date).unwrap().0))
        .collect();
    assert_eq!(store.n_reviews(), expected.len());
    assert_eq!(triples(&store).into_iter().collect::<BTreeSet<_>>(), expected);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.csct");
    cliquescout::ingest::save_store(&store, &path).unwrap();
    let first = std::fs::read(&path).unwrap();
    let loaded = cliquescout::ingest::load_store(&path).unwrap();
    assert_eq!(loaded, store);
    cliquescout::ingest::save_store(&loaded, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn friend_lists_match_sorted_deduplicated_oracle() {
    let data = synth::generate(&SynthConfig {
        seed: 5,
        n_users: 1000,
        n_venues: 50,
        background_reviews: 2000,
        friends_per_user: 8,
        ..Default::default()
    })
    .unwrap();
    let users = data.users.as_ref().unwrap();
    // each user line twice, friends repeated within the line
    let mut lines = Vec::new();
    for u in users {
        let doubled: Vec<&String> = u.friends.iter().chain(u.friends.iter().take(2)).collect();
        lines.push(serde_json::json!({"user_id": u.user_id, "friends": doubled}).to_string());
        lines.push(serde_json::json!({"user_id": u.user_id, "friends": u.friends.join(", ")}).to_string());
    }
    let mut reviews = Vec::new();
    data.write_reviews(&mut reviews).unwrap();
    let options = IngestOptions {
        budget: ErrorBudget::strict(),
        ..Default::default()
    };
    let (mut store, _) = ingest_reviews(reviews.as_slice(), &options).unwrap();
    let stats = store.ingest_users(lines.join("\n").as_bytes(), &options).unwrap();
    assert_eq!(stats.records_kept, 1000);
    assert_eq!(stats.duplicates_dropped, 1000);

    let oracle: BTreeMap<&str, BTreeSet<&str>> = users
        .iter()
        .map(|u| (u.user_id.as_str(), u.friends.iter().map(String::as_str).collect()))
        .collect();
    for (name, expected) in oracle {
        let id = store.user_id(name).unwrap();
        let friends: Vec<&str> = store.friends(id).iter().map(|&f| store.user_name(f)).collect();
        let mut sorted_ids: Vec<u32> = store.friends(id).iter().map(|f| f.0).collect();
        let before = sorted_ids.clone();
        sorted_ids.sort_unstable();
        sorted_ids.dedup();
        assert_eq!(before, sorted_ids, "friend ids of {name} not sorted and unique");
        assert_eq!(friends.into_iter().collect::<BTreeSet<_>>(), expected);
    }
}

#[test]
fn malformed_lines_within_budget_are_skipped() {
    let mut text = String::new();
    for i in 0..2000 {
        if i % 1000 == 7 {
            text.push_str("{\"user_id\": \"broken\n");
        } else {
            text.push_str(&format!(
                "{{\"user_id\":\"u{}\",\"business_id\":\"v{}\",\"date\":\"2012-03-{:02}\"}}\n",
                i % 97,
                i % 13,
                1 + i % 28
            ));
        }
    }
    let (_, stats) = ingest_reviews(text.as_bytes(), &IngestOptions::default()).unwrap();
    assert_eq!(stats.lines_skipped, 2);
    assert_eq!(stats.lines_read, 2000);
    let strict = IngestOptions {
        budget: ErrorBudget::strict(),
        ..Default::default()
    };
    assert!(ingest_reviews(text.as_bytes(), &strict).is_err());
}
