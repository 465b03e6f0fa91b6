//! Synthetic review streams with planted coordinated groups.
//!
//! Output is the same newline-delimited JSON the ingest module reads, so a
//! generated dataset exercises the whole pipeline.

pub mod differential;
pub mod oracle;

use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::{ingest_reviews, DayNumber, ErrorBudget, IngestOptions, ReviewStore};
use crate::{Error, Result};

/// A coordinated group: `members` users who all review the same `venues`
/// venues, the dates at each venue lying within `spread` days.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedGroupSpec {
    pub members: usize,
    pub venues: usize,
    pub spread: u32,
}

impl std::str::FromStr for PlantedGroupSpec {
    type Err = Error;

    /// `MEMBERSxVENUESxSPREAD`, e.g. `11x6x5`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(['x', 'X', ':']).collect();
        let bad = || Error::config(format!("planted group {s:?} is not MEMBERSxVENUESxSPREAD"));
        let [m, v, d] = parts.as_slice() else {
            return Err(bad());
        };
        Ok(PlantedGroupSpec {
            members: m.trim().parse().map_err(|_| bad())?,
            venues: v.trim().parse().map_err(|_| bad())?,
            spread: d.trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_users: usize,
    pub n_venues: usize,
    /// Number of uniformly drawn background reviews.
    pub background_reviews: usize,
    /// First calendar day of the generated period.
    pub start_date: String,
    pub span_days: u32,
    /// Random friends per user; 0 means no user file is produced.
    pub friends_per_user: usize,
    pub groups: Vec<PlantedGroupSpec>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_users: 1000,
            n_venues: 200,
            background_reviews: 5000,
            start_date: "2010-01-01".into(),
            span_days: 1500,
            friends_per_user: 0,
            groups: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthReview {
    pub user_id: String,
    pub business_id: String,
    pub date: String,
    pub stars: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthUser {
    pub user_id: String,
    pub friends: Vec<String>,
}

/// Ground truth for one planted group, by external id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedGroup {
    pub members: Vec<String>,
    pub venues: Vec<String>,
    pub spread: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthData {
    pub reviews: Vec<SynthReview>,
    /// Present when friend lists were requested.
    pub users: Option<Vec<SynthUser>>,
    pub groups: Vec<PlantedGroup>,
}

pub fn user_name(i: usize) -> String {
    format!("u{i:07}")
}

pub fn venue_name(i: usize) -> String {
    format!("b{i:06}")
}

impl SynthConfig {
    fn validate(&self) -> Result<DayNumber> {
        let start = DayNumber::parse(&self.start_date)
            .ok_or_else(|| Error::Infeasible(format!("start date {:?} is not YYYY-MM-DD", self.start_date)))?;
        if self.span_days == 0 {
            return Err(Error::Infeasible("span_days must be positive".into()));
        }
        if self.background_reviews > 0 && (self.n_users == 0 || self.n_venues == 0) {
            return Err(Error::Infeasible("background reviews need users and venues".into()));
        }
        let planted: usize = self.groups.iter().map(|g| g.members).sum();
        if planted > self.n_users {
            return Err(Error::Infeasible(format!(
                "planted groups need {planted} distinct users, only {} exist",
                self.n_users
            )));
        }
        if self.friends_per_user > 0 && self.friends_per_user >= self.n_users {
            return Err(Error::Infeasible("friends_per_user must be below n_users".into()));
        }
        for g in &self.groups {
            if g.venues > self.n_venues {
                return Err(Error::Infeasible(format!(
                    "planted group needs {} venues, only {} exist",
                    g.venues, self.n_venues
                )));
            }
            if g.spread >= self.span_days {
                return Err(Error::Infeasible(format!(
                    "spread of {} days does not fit in a {}-day span",
                    g.spread, self.span_days
                )));
            }
        }
        Ok(start)
    }
}

/// Generates the dataset. Deterministic for a fixed configuration.
pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    let start = config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let date = |offset: u32| DayNumber(start.0 + offset as i32).to_string();

    let planted: usize = config.groups.iter().map(|g| g.members).sum();
    let mut chosen = sample(&mut rng, config.n_users, planted).into_vec().into_iter();
    let mut reviews = Vec::new();
    let mut groups = Vec::new();
    for spec in &config.groups {
        let mut members: Vec<usize> = chosen.by_ref().take(spec.members).collect();
        members.sort_unstable();
        let mut venues = sample(&mut rng, config.n_venues, spec.venues).into_vec();
        venues.sort_unstable();
        for &venue in &venues {
            let anchor = rng.gen_range(0..config.span_days - spec.spread);
            for &member in &members {
                let offset = anchor + rng.gen_range(0..=spec.spread);
                reviews.push(SynthReview {
                    user_id: user_name(member),
                    business_id: venue_name(venue),
                    date: date(offset),
                    stars: rng.gen_range(1..=5),
                });
            }
        }
        groups.push(PlantedGroup {
            members: members.into_iter().map(user_name).collect(),
            venues: venues.into_iter().map(venue_name).collect(),
            spread: spec.spread,
        });
    }

    for _ in 0..config.background_reviews {
        let user = rng.gen_range(0..config.n_users);
        let venue = rng.gen_range(0..config.n_venues);
        let offset = rng.gen_range(0..config.span_days);
        reviews.push(SynthReview {
            user_id: user_name(user),
            business_id: venue_name(venue),
            date: date(offset),
            stars: rng.gen_range(1..=5),
        });
    }

    let users = (config.friends_per_user > 0).then(|| {
        (0..config.n_users)
            .map(|u| {
                let mut friends: Vec<usize> = sample(&mut rng, config.n_users - 1, config.friends_per_user)
                    .into_iter()
                    .map(|f| if f >= u { f + 1 } else { f })
                    .collect();
                friends.sort_unstable();
                SynthUser {
                    user_id: user_name(u),
                    friends: friends.into_iter().map(user_name).collect(),
                }
            })
            .collect()
    });

    Ok(SynthData {
        reviews,
        users,
        groups,
    })
}

impl SynthData {
    pub fn write_reviews<W: Write>(&self, w: &mut W) -> Result<()> {
        for r in &self.reviews {
            serde_json::to_writer(&mut *w, r).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_users<W: Write>(&self, w: &mut W) -> Result<()> {
        for u in self.users.iter().flatten() {
            serde_json::to_writer(&mut *w, u).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Ground truth as a JSON document `{"groups": [...]}`.
    pub fn write_truth<W: Write>(&self, w: &mut W) -> Result<()> {
        #[derive(Serialize)]
        struct Truth<'a> {
            groups: &'a [PlantedGroup],
        }
        serde_json::to_writer_pretty(&mut *w, &Truth { groups: &self.groups }).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    /// Runs the generated files through the regular ingest path.
    pub fn to_store(&self) -> Result<ReviewStore> {
        let options = IngestOptions {
            budget: ErrorBudget::strict(),
            ..Default::default()
        };
        let mut buf = Vec::new();
        self.write_reviews(&mut buf)?;
        let (mut store, _) = ingest_reviews(buf.as_slice(), &options)?;
        if self.users.is_some() {
            buf.clear();
            self.write_users(&mut buf)?;
            store.ingest_users(buf.as_slice(), &options)?;
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdgraph::qualifying_venues;

    fn fig1_config() -> SynthConfig {
        SynthConfig {
            seed: 42,
            n_users: 300,
            n_venues: 80,
            background_reviews: 1500,
            groups: vec![PlantedGroupSpec {
                members: 11,
                venues: 6,
                spread: 5,
            }],
            ..Default::default()
        }
    }

    #[test]
    fn planted_pairs_all_qualify() {
        let data = generate(&fig1_config()).unwrap();
        let store = data.to_store().unwrap();
        let group = &data.groups[0];
        assert_eq!(group.members.len(), 11);
        let ids: Vec<_> = group.members.iter().map(|m| store.user_id(m).unwrap()).collect();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                assert!(qualifying_venues(&store, a, b, 5) >= 6);
            }
        }
    }

    #[test]
    fn nothing_planted_nothing_generated() {
        let config = SynthConfig {
            background_reviews: 0,
            ..Default::default()
        };
        let store = generate(&config).unwrap().to_store().unwrap();
        assert!(store.is_empty());
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let mut config = fig1_config();
        config.friends_per_user = 5;
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert_eq!(a, b);
        let (mut ba, mut bb) = (Vec::new(), Vec::new());
        crate::ingest::write_store(&a.to_store().unwrap(), &mut ba).unwrap();
        crate::ingest::write_store(&b.to_store().unwrap(), &mut bb).unwrap();
        assert_eq!(ba, bb);
        config.seed += 1;
        assert_ne!(generate(&config).unwrap(), a);
    }

    #[test]
    fn infeasible_configs_are_refused() {
        let mut c = fig1_config();
        c.groups[0].spread = c.span_days;
        assert!(matches!(generate(&c), Err(Error::Infeasible(_))));
        let mut c = fig1_config();
        c.groups[0].venues = 81;
        assert!(matches!(generate(&c), Err(Error::Infeasible(_))));
        let mut c = fig1_config();
        c.groups[0].members = 301;
        assert!(matches!(generate(&c), Err(Error::Infeasible(_))));
    }

    #[test]
    fn friend_lists_exclude_self() {
        let config = SynthConfig {
            n_users: 20,
            friends_per_user: 19,
            background_reviews: 10,
            ..Default::default()
        };
        let data = generate(&config).unwrap();
        for u in data.users.as_ref().unwrap() {
            assert_eq!(u.friends.len(), 19);
            assert!(!u.friends.contains(&u.user_id));
        }
    }

    #[test]
    fn group_spec_parses() {
        assert_eq!(
            "11x6x5".parse::<PlantedGroupSpec>().unwrap(),
            PlantedGroupSpec { members: 11, venues: 6, spread: 5 }
        );
        assert!("11x6".parse::<PlantedGroupSpec>().is_err());
    }
}
