//! Review ingestion and the venue-grouped [`ReviewStore`].

mod format;
mod ndjson;

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use chrono::{Datelike, NaiveDate};

pub use format::{load_store, read_store, save_store, write_store, STORE_MAGIC, STORE_VERSION};
pub use ndjson::{
    ingest_reviews, ErrorBudget, IngestOptions, IngestStats, ReviewSchema, UserSchema,
};

/// Interned reviewer id, dense in `0..n_users`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub u32);

/// Interned venue id, dense in `0..n_venues`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VenueId(pub u32);

/// Days since 1970-01-01 (UTC calendar dates, no time of day).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DayNumber(pub i32);

// chrono counts days from 0001-01-01 (day 1); 1970-01-01 is day 719_163.
const UNIX_EPOCH_FROM_CE: i32 = 719_163;

impl DayNumber {
    /// Parses exactly `YYYY-MM-DD`.
    pub fn parse(s: &str) -> Option<DayNumber> {
        let b = s.as_bytes();
        if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
            return None;
        }
        let digits = |r: std::ops::Range<usize>| -> Option<u32> {
            let mut acc = 0u32;
            for &c in &b[r] {
                if !c.is_ascii_digit() {
                    return None;
                }
                acc = acc * 10 + u32::from(c - b'0');
            }
            Some(acc)
        };
        let year = digits(0..4)?;
        let month = digits(5..7)?;
        let day = digits(8..10)?;
        let date = NaiveDate::from_ymd_opt(year as i32, month, day)?;
        Some(DayNumber(date.num_days_from_ce() - UNIX_EPOCH_FROM_CE))
    }

    pub fn to_date(self) -> Option<NaiveDate> {
        NaiveDate::from_num_days_from_ce_opt(self.0.checked_add(UNIX_EPOCH_FROM_CE)?)
    }

    pub fn gap(self, other: DayNumber) -> u32 {
        self.0.abs_diff(other.0)
    }
}

impl fmt::Display for DayNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_date() {
            Some(date) => write!(f, "{}", date.format("%Y-%m-%d")),
            None => write!(f, "day{}", self.0),
        }
    }
}

/// One review record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Review {
    pub user: UserId,
    pub venue: VenueId,
    pub date: DayNumber,
    /// 1..=5 when present.
    pub stars: Option<u8>,
}

/// Bidirectional map between external string ids and dense integer ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Interner {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    pub(crate) fn from_names(names: Vec<String>) -> Result<Self, String> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i as u32).is_some() {
                return Err(format!("duplicate external id {name:?}"));
            }
        }
        Ok(Interner { names, index })
    }

    pub(crate) fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = u32::try_from(self.names.len()).expect("more than u32::MAX interned ids");
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub(crate) fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub(crate) fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub(crate) fn names(&self) -> &[String] {
        &self.names
    }

    pub(crate) fn len(&self) -> usize {
        self.names.len()
    }
}

/// Deduplicated reviews grouped by venue, each group sorted by
/// `(date, user)`, with interned user and venue tables.
///
/// Immutable once built (friend data may be attached before sharing); safe
/// to share across threads.
#[derive(Debug, Default)]
pub struct ReviewStore {
    pub(crate) users: Interner,
    pub(crate) venues: Interner,
    /// `None` until a user file has been ingested; then one sorted,
    /// deduplicated list per user.
    pub(crate) friends: Option<Vec<Vec<UserId>>>,
    /// `n_venues + 1` offsets into the review columns.
    pub(crate) venue_offsets: Vec<usize>,
    pub(crate) review_user: Vec<UserId>,
    pub(crate) review_day: Vec<DayNumber>,
    /// 0 when absent.
    pub(crate) review_stars: Vec<u8>,
    user_index: OnceLock<UserIndex>,
}

impl PartialEq for ReviewStore {
    fn eq(&self, other: &Self) -> bool {
        self.users == other.users
            && self.venues == other.venues
            && self.friends == other.friends
            && self.venue_offsets == other.venue_offsets
            && self.review_user == other.review_user
            && self.review_day == other.review_day
            && self.review_stars == other.review_stars
    }
}

impl Eq for ReviewStore {}

/// One review of a venue as seen from the venue group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VenueReview {
    pub user: UserId,
    pub date: DayNumber,
}

impl ReviewStore {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_venues(&self) -> usize {
        self.venues.len()
    }

    pub fn n_reviews(&self) -> usize {
        self.review_user.len()
    }

    pub fn is_empty(&self) -> bool {
        self.review_user.is_empty()
    }

    pub fn user_id(&self, external: &str) -> Option<UserId> {
        self.users.get(external).map(UserId)
    }

    pub fn venue_id(&self, external: &str) -> Option<VenueId> {
        self.venues.get(external).map(VenueId)
    }

    pub fn user_name(&self, user: UserId) -> &str {
        self.users.name(user.0)
    }

    pub fn venue_name(&self, venue: VenueId) -> &str {
        self.venues.name(venue.0)
    }

    pub fn has_friend_data(&self) -> bool {
        self.friends.is_some()
    }

    /// Sorted friend list, empty when no friend data is attached.
    pub fn friends(&self, user: UserId) -> &[UserId] {
        self.friends
            .as_ref()
            .and_then(|f| f.get(user.0 as usize))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn venues(&self) -> impl Iterator<Item = VenueId> {
        (0..self.n_venues() as u32).map(VenueId)
    }

    /// Column slices `(users, days)` of one venue group.
    pub fn venue_columns(&self, venue: VenueId) -> (&[UserId], &[DayNumber]) {
        let range = self.venue_offsets[venue.0 as usize]..self.venue_offsets[venue.0 as usize + 1];
        (&self.review_user[range.clone()], &self.review_day[range])
    }

    pub fn venue_reviews(&self, venue: VenueId) -> impl Iterator<Item = VenueReview> + '_ {
        let (users, days) = self.venue_columns(venue);
        users
            .iter()
            .zip(days)
            .map(|(&user, &date)| VenueReview { user, date })
    }

    pub fn reviews(&self) -> impl Iterator<Item = Review> + '_ {
        self.venues().flat_map(move |venue| {
            let range = self.venue_offsets[venue.0 as usize]..self.venue_offsets[venue.0 as usize + 1];
            range.map(move |i| Review {
                user: self.review_user[i],
                venue,
                date: self.review_day[i],
                stars: match self.review_stars[i] {
                    0 => None,
                    s => Some(s),
                },
            })
        })
    }

    /// Per-user view of the reviews, built on first use.
    pub fn user_index(&self) -> &UserIndex {
        self.user_index.get_or_init(|| UserIndex::build(self))
    }

    pub fn review_count(&self, user: UserId) -> usize {
        self.user_index().reviews(user).len()
    }

    /// Attaches friend lists read from newline-delimited JSON. Friends that
    /// are not yet known are interned as new users.
    pub fn ingest_users<R: std::io::BufRead>(
        &mut self,
        source: R,
        options: &IngestOptions,
    ) -> crate::Result<IngestStats> {
        let stats = ndjson::ingest_users_into(self, source, options)?;
        self.user_index = OnceLock::new();
        Ok(stats)
    }

    pub(crate) fn intern_user(&mut self, external: &str) -> UserId {
        let id = UserId(self.users.intern(external));
        if let Some(friends) = self.friends.as_mut() {
            friends.resize_with(self.users.len(), Vec::new);
        }
        id
    }

    /// Checks the structural invariants; used after loading from disk.
    pub(crate) fn validate(&self) -> Result<(), String> {
        let n_users = self.n_users() as u32;
        if self.venue_offsets.len() != self.n_venues() + 1 {
            return Err("venue offset table has the wrong length".into());
        }
        if self.venue_offsets.first() != Some(&0)
            || self.venue_offsets.last() != Some(&self.review_user.len())
            || self.venue_offsets.windows(2).any(|w| w[0] > w[1])
        {
            return Err("venue offsets are not a monotone partition of the reviews".into());
        }
        if self.review_day.len() != self.review_user.len()
            || self.review_stars.len() != self.review_user.len()
        {
            return Err("review columns have different lengths".into());
        }
        if self.review_user.iter().any(|u| u.0 >= n_users) {
            return Err("review references an unknown user".into());
        }
        if self.review_stars.iter().any(|&s| s > 5) {
            return Err("star rating out of range".into());
        }
        for venue in self.venues() {
            let (users, days) = self.venue_columns(venue);
            let sorted = days
                .iter()
                .zip(users)
                .zip(days.iter().zip(users).skip(1))
                .all(|(a, b)| a < b);
            if !sorted {
                return Err(format!(
                    "venue {} is not strictly sorted by (date, user)",
                    self.venue_name(venue)
                ));
            }
        }
        if let Some(friends) = &self.friends {
            if friends.len() != self.n_users() {
                return Err("friend table length differs from user table".into());
            }
            for list in friends {
                if list.windows(2).any(|w| w[0] >= w[1]) || list.iter().any(|u| u.0 >= n_users) {
                    return Err("friend list is unsorted or references an unknown user".into());
                }
            }
        }
        Ok(())
    }
}

/// Accumulates raw reviews and produces a [`ReviewStore`].
#[derive(Debug, Default)]
pub struct StoreBuilder {
    users: Interner,
    venues: Interner,
    rows: Vec<Row>,
}

#[derive(Clone, Copy, Debug)]
struct Row {
    venue: u32,
    day: i32,
    user: u32,
    stars: u8,
}

impl StoreBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, user: &str, venue: &str, date: DayNumber, stars: Option<u8>) {
        let user = self.users.intern(user);
        let venue = self.venues.intern(venue);
        self.rows.push(Row {
            venue,
            day: date.0,
            user,
            stars: stars.unwrap_or(0),
        });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sorts, drops exact `(user, venue, date)` duplicates (the first
    /// occurrence wins) and returns the store with the number of dropped rows.
    pub fn finish(self) -> (ReviewStore, u64) {
        let StoreBuilder {
            users,
            venues,
            mut rows,
        } = self;
        // stable, so the first occurrence of a duplicate stays first
        rows.sort_by_key(|r| (r.venue, r.day, r.user));
        let before = rows.len();
        rows.dedup_by_key(|r| (r.venue, r.day, r.user));
        let dropped = (before - rows.len()) as u64;

        let mut venue_offsets = vec![0usize; venues.len() + 1];
        for r in &rows {
            venue_offsets[r.venue as usize + 1] += 1;
        }
        for i in 1..venue_offsets.len() {
            venue_offsets[i] += venue_offsets[i - 1];
        }
        let store = ReviewStore {
            users,
            venues,
            friends: None,
            venue_offsets,
            review_user: rows.iter().map(|r| UserId(r.user)).collect(),
            review_day: rows.iter().map(|r| DayNumber(r.day)).collect(),
            review_stars: rows.iter().map(|r| r.stars).collect(),
            user_index: OnceLock::new(),
        };
        (store, dropped)
    }
}

/// Reviews regrouped by user, each list sorted by `(venue, date)`.
#[derive(Debug)]
pub struct UserIndex {
    offsets: Vec<usize>,
    entries: Vec<(VenueId, DayNumber)>,
}

impl UserIndex {
    fn build(store: &ReviewStore) -> Self {
        let mut offsets = vec![0usize; store.n_users() + 1];
        for u in &store.review_user {
            offsets[u.0 as usize + 1] += 1;
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        let mut cursor = offsets.clone();
        let mut entries = vec![(VenueId(0), DayNumber(0)); store.n_reviews()];
        // venues ascending, dates ascending within a venue: a counting sort
        // by user keeps every user's list sorted by (venue, date)
        for venue in store.venues() {
            for r in store.venue_reviews(venue) {
                let slot = &mut cursor[r.user.0 as usize];
                entries[*slot] = (venue, r.date);
                *slot += 1;
            }
        }
        UserIndex { offsets, entries }
    }

    pub fn reviews(&self, user: UserId) -> &[(VenueId, DayNumber)] {
        let u = user.0 as usize;
        if u + 1 >= self.offsets.len() {
            return &[];
        }
        &self.entries[self.offsets[u]..self.offsets[u + 1]]
    }
}
