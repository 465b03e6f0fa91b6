//! TOML run configuration. Every key is optional; command-line flags win.
//!
//! ```toml
//! store = "work/yelp.csct"
//! reviews = "yelp_academic_dataset_review.json"
//! users = "yelp_academic_dataset_user.json"
//! output = "work/out"
//! k = [3, 4, 5, 6]
//! d = [5, 6, 8]
//! sizes = [9, 10, 11]
//! theta = "0.9"
//! min_size = 9
//! weight = "co-review-count"
//! threads = 4
//! seed = 7
//! max_skip_fraction = 0.001
//!
//! [schema.reviews]
//! user = "user_id"
//! venue = "business_id"
//! date = "date"
//! stars = "stars"
//!
//! [schema.users]
//! user = "user_id"
//! friends = "friends"
//!
//! [synth]
//! n_users = 1000
//! groups = [{ members = 11, venues = 6, spread = 5 }]
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cliquescout::ingest::{ReviewSchema, UserSchema};
use cliquescout::synth::SynthConfig;
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
    #[default]
    #[serde(skip)]
    Empty,
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
            OneOrMany::Empty => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub reviews: Option<ReviewSchema>,
    pub users: Option<UserSchema>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub store: Option<PathBuf>,
    pub reviews: Option<PathBuf>,
    pub users: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub groups: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    #[serde(default)]
    pub k: OneOrMany<u32>,
    #[serde(default)]
    pub d: OneOrMany<u32>,
    #[serde(default)]
    pub sizes: OneOrMany<usize>,
    pub theta: Option<String>,
    pub kind: Option<String>,
    pub min_size: Option<usize>,
    pub max_size: Option<usize>,
    pub weight: Option<String>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub max_skip_fraction: Option<f64>,
    pub pair_budget: Option<u64>,
    #[serde(default)]
    pub schema: Schema,
    pub synth: Option<SynthConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}
