//! Count tables, flagged-group listings, label statistics and graph exports.

mod annotate;
mod export;
mod groups;
mod table;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::quasiclique::Theta;
use crate::{Error, Result};

pub use annotate::{annotate, read_labels, AnnotationStats, GroupComposition, LabelFile, PopulationStats};
pub use export::{export_group_graph, GraphFormat};
pub use groups::{
    flag_groups, read_listings, validate_listing, write_listings, FlagOptions, GroupListing, PairEvidence,
    VenueDates,
};
pub use table::{
    build_count_table, check_sweep_monotonicity, check_table_monotonicity, run_count_table, CountTable, TableRun,
    TableSpec,
};

/// What kind of dense group is enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// Maximal cliques.
    Clique,
    /// Maximal pseudo-cliques of density at least θ.
    QuasiClique(Theta),
}

impl GroupKind {
    pub fn name(&self) -> &'static str {
        match self {
            GroupKind::Clique => "clique",
            GroupKind::QuasiClique(_) => "quasiclique",
        }
    }

    pub fn theta(&self) -> Option<Theta> {
        match self {
            GroupKind::Clique => None,
            GroupKind::QuasiClique(theta) => Some(*theta),
        }
    }

    /// Parses `clique` or `quasiclique` (θ supplied separately).
    pub fn parse(kind: &str, theta: Option<Theta>) -> Result<GroupKind> {
        match kind.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "clique" | "cliques" => Ok(GroupKind::Clique),
            "quasiclique" | "quasicliques" | "pseudoclique" | "pseudocliques" => {
                Ok(GroupKind::QuasiClique(theta.unwrap_or_default()))
            }
            _ => Err(Error::config(format!("unknown group kind {kind:?}"))),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Clique => f.write_str("clique"),
            GroupKind::QuasiClique(theta) => write!(f, "quasiclique(theta={theta})"),
        }
    }
}

/// Serialised form `{"kind": "...", "theta": "0.9"}` flattened into listings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct KindRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<String>,
}

impl From<GroupKind> for KindRepr {
    fn from(kind: GroupKind) -> Self {
        KindRepr {
            kind: kind.name().to_owned(),
            theta: kind.theta().map(|t| t.to_string()),
        }
    }
}

impl TryFrom<KindRepr> for GroupKind {
    type Error = Error;

    fn try_from(repr: KindRepr) -> Result<Self> {
        let theta = repr.theta.as_deref().map(Theta::from_str).transpose()?;
        GroupKind::parse(&repr.kind, theta)
    }
}
