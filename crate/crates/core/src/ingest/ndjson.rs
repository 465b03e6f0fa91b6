//! Newline-delimited JSON readers for review and user records.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::{DayNumber, ReviewStore, StoreBuilder, UserId};
use crate::{Error, Result};

/// Field names of a review record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReviewSchema {
    pub user: String,
    pub venue: String,
    pub date: String,
    pub stars: String,
}

impl Default for ReviewSchema {
    fn default() -> Self {
        ReviewSchema {
            user: "user_id".into(),
            venue: "business_id".into(),
            date: "date".into(),
            stars: "stars".into(),
        }
    }
}

/// Field names of a user record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct UserSchema {
    pub user: String,
    pub friends: String,
}

impl Default for UserSchema {
    fn default() -> Self {
        UserSchema {
            user: "user_id".into(),
            friends: "friends".into(),
        }
    }
}

/// Fraction of read lines that may be skipped before ingestion fails.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBudget {
    pub max_skip_fraction: f64,
}

impl ErrorBudget {
    pub const fn fraction(max_skip_fraction: f64) -> Self {
        ErrorBudget { max_skip_fraction }
    }

    pub const fn strict() -> Self {
        Self::fraction(0.0)
    }

    pub const fn unlimited() -> Self {
        Self::fraction(1.0)
    }

    pub fn allowed(&self, lines_read: u64) -> u64 {
        (self.max_skip_fraction.clamp(0.0, 1.0) * lines_read as f64).floor() as u64
    }
}

impl Default for ErrorBudget {
    fn default() -> Self {
        Self::fraction(0.001)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IngestOptions {
    pub reviews: ReviewSchema,
    pub users: UserSchema,
    pub budget: ErrorBudget,
    /// Accept `YYYY-MM-DD hh:mm:ss` timestamps by dropping the time of day.
    pub allow_datetime: bool,
}

/// Line accounting. Blank lines are not counted.
///
/// `lines_read == records_kept + duplicates_dropped + lines_skipped`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub lines_read: u64,
    pub records_kept: u64,
    pub duplicates_dropped: u64,
    pub lines_skipped: u64,
    /// Line number (1-based) and reason of the last skipped line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_failure: Option<(u64, String)>,
}

impl IngestStats {
    fn skip(&mut self, line_no: u64, reason: String) {
        self.lines_skipped += 1;
        self.last_failure = Some((line_no, reason));
    }

    fn check_budget(&self, budget: &ErrorBudget) -> Result<()> {
        let allowed = budget.allowed(self.lines_read);
        if self.lines_skipped > allowed {
            let (last_line, reason) = self.last_failure.clone().unwrap_or_default();
            return Err(Error::ErrorBudgetExceeded {
                skipped: self.lines_skipped,
                lines_read: self.lines_read,
                allowed,
                last_line,
                reason,
            });
        }
        Ok(())
    }
}

/// Calls `f` with each non-blank line and its 1-based line number.
fn for_each_line<R: BufRead>(
    mut source: R,
    mut f: impl FnMut(u64, std::result::Result<&str, String>),
) -> Result<()> {
    let mut buf = Vec::with_capacity(4096);
    let mut line_no = 0u64;
    loop {
        buf.clear();
        if source.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        line_no += 1;
        let line = match std::str::from_utf8(&buf) {
            Ok(s) => s.trim(),
            Err(e) => {
                f(line_no, Err(format!("invalid UTF-8: {e}")));
                continue;
            }
        };
        if !line.is_empty() {
            f(line_no, Ok(line));
        }
    }
}

type Fields<'a> = HashMap<String, &'a RawValue>;

fn string_field(fields: &Fields<'_>, name: &str) -> std::result::Result<String, String> {
    let raw = fields
        .get(name)
        .ok_or_else(|| format!("missing field {name:?}"))?;
    serde_json::from_str::<String>(raw.get()).map_err(|_| format!("field {name:?} is not a string"))
}

fn parse_date(raw: &str, allow_datetime: bool) -> Option<DayNumber> {
    if allow_datetime && raw.len() > 10 {
        let (date, rest) = raw.split_at(10);
        if rest.starts_with(' ') || rest.starts_with('T') {
            return DayNumber::parse(date);
        }
    }
    DayNumber::parse(raw)
}

fn parse_stars(fields: &Fields<'_>, name: &str) -> std::result::Result<Option<u8>, String> {
    let Some(raw) = fields.get(name) else {
        return Ok(None);
    };
    let value: Option<f64> =
        serde_json::from_str(raw.get()).map_err(|_| format!("field {name:?} is not a number"))?;
    match value {
        None => Ok(None),
        Some(v) if v.fract() == 0.0 && (1.0..=5.0).contains(&v) => Ok(Some(v as u8)),
        Some(v) => Err(format!("stars {v} outside 1..=5")),
    }
}

type ParsedReview = (String, String, DayNumber, Option<u8>);

fn parse_review(line: &str, options: &IngestOptions) -> std::result::Result<ParsedReview, String> {
    let fields: Fields<'_> = serde_json::from_str(line).map_err(|e| format!("invalid JSON object: {e}"))?;
    let schema = &options.reviews;
    let user = string_field(&fields, &schema.user)?;
    let venue = string_field(&fields, &schema.venue)?;
    let date_raw = string_field(&fields, &schema.date)?;
    let date = parse_date(&date_raw, options.allow_datetime)
        .ok_or_else(|| format!("unparseable date {date_raw:?}"))?;
    let stars = parse_stars(&fields, &schema.stars)?;
    Ok((user, venue, date, stars))
}

/// Reads reviews from newline-delimited JSON.
///
/// Malformed lines are skipped and counted; if more than the error budget
/// allows were skipped the whole ingest fails, naming the last bad line.
pub fn ingest_reviews<R: BufRead>(
    source: R,
    options: &IngestOptions,
) -> Result<(ReviewStore, IngestStats)> {
    let mut builder = StoreBuilder::new();
    let mut stats = IngestStats::default();
    for_each_line(source, |line_no, line| {
        stats.lines_read += 1;
        match line.and_then(|l| parse_review(l, options)) {
            Ok((user, venue, date, stars)) => builder.push(&user, &venue, date, stars),
            Err(reason) => stats.skip(line_no, reason),
        }
    })?;
    stats.check_budget(&options.budget)?;
    let parsed = builder.len() as u64;
    let (store, dropped) = builder.finish();
    stats.duplicates_dropped = dropped;
    stats.records_kept = parsed - dropped;
    Ok((store, stats))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FriendField {
    List(Vec<String>),
    // some dataset releases store friends as one comma-separated string
    Joined(String),
    Null(()),
}

fn parse_user(line: &str, schema: &UserSchema) -> std::result::Result<(String, Vec<String>), String> {
    let fields: Fields<'_> = serde_json::from_str(line).map_err(|e| format!("invalid JSON object: {e}"))?;
    let user = string_field(&fields, &schema.user)?;
    let friends = match fields.get(schema.friends.as_str()) {
        None => Vec::new(),
        Some(raw) => match serde_json::from_str::<FriendField>(raw.get()) {
            Ok(FriendField::List(list)) => list,
            Ok(FriendField::Joined(s)) if s.trim() == "None" => Vec::new(),
            Ok(FriendField::Joined(s)) => s
                .split(',')
                .map(str::trim)
                .filter(|f| !f.is_empty())
                .map(str::to_owned)
                .collect(),
            Ok(FriendField::Null(())) => Vec::new(),
            Err(_) => return Err(format!("field {:?} is not a list of strings", schema.friends)),
        },
    };
    Ok((user, friends))
}

pub(super) fn ingest_users_into<R: BufRead>(
    store: &mut ReviewStore,
    source: R,
    options: &IngestOptions,
) -> Result<IngestStats> {
    let mut parsed = Vec::new();
    let mut stats = IngestStats::default();
    for_each_line(source, |line_no, line| {
        stats.lines_read += 1;
        match line.and_then(|l| parse_user(l, &options.users)) {
            Ok(record) => parsed.push(record),
            Err(reason) => stats.skip(line_no, reason),
        }
    })?;
    stats.check_budget(&options.budget)?;

    if store.friends.is_none() {
        store.friends = Some(vec![Vec::new(); store.n_users()]);
    }
    let mut seen = vec![false; store.n_users()];
    for (user, friends) in parsed {
        let id = store.intern_user(&user);
        let friend_ids: Vec<UserId> = friends.iter().map(|f| store.intern_user(f)).collect();
        seen.resize(store.n_users(), false);
        if std::mem::replace(&mut seen[id.0 as usize], true) {
            // repeated user line: friend lists are merged
            stats.duplicates_dropped += 1;
        } else {
            stats.records_kept += 1;
        }
        let list = &mut store.friends.as_mut().expect("initialised above")[id.0 as usize];
        list.extend(friend_ids);
        list.sort_unstable();
        list.dedup();
    }
    Ok(stats)
}
