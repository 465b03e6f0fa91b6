use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::GroupListing;
use crate::ingest::ReviewStore;
use crate::{Error, Result};

/// External user id → label (e.g. `scout`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelFile {
    pub labels: BTreeMap<String, String>,
}

impl LabelFile {
    pub fn label(&self, user: &str) -> Option<&str> {
        self.labels.get(user).map(String::as_str)
    }
}

#[derive(Deserialize)]
struct LabelRow {
    user_id: String,
    label: String,
}

/// Reads a CSV with header `user_id,label`. Repeating a user with the same
/// label is harmless; conflicting labels are an error.
pub fn read_labels<R: Read>(source: R) -> Result<LabelFile> {
    let mut labels = BTreeMap::new();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    for (i, row) in reader.deserialize::<LabelRow>().enumerate() {
        let row = row.map_err(|e| Error::parse(format!("label file row {}: {e}", i + 1)))?;
        if let Some(previous) = labels.insert(row.user_id.clone(), row.label.clone()) {
            if previous != row.label {
                return Err(Error::parse(format!(
                    "user {} has two labels: {previous:?} and {:?}",
                    row.user_id, row.label
                )));
            }
        }
    }
    Ok(LabelFile { labels })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PopulationStats {
    pub users: usize,
    pub unlabeled: usize,
    pub counts: BTreeMap<String, usize>,
    pub fractions: BTreeMap<String, f64>,
}

impl PopulationStats {
    fn from_users<'a>(users: impl IntoIterator<Item = &'a str>, labels: &LabelFile) -> Self {
        let mut stats = PopulationStats::default();
        for user in users {
            stats.users += 1;
            match labels.label(user) {
                Some(l) => *stats.counts.entry(l.to_owned()).or_insert(0) += 1,
                None => stats.unlabeled += 1,
            }
        }
        stats.fractions = stats
            .counts
            .iter()
            .map(|(l, &c)| (l.clone(), c as f64 / stats.users as f64))
            .collect();
        stats
    }

    /// Share of users carrying `label`; 0 when absent or empty.
    pub fn fraction(&self, label: &str) -> f64 {
        self.fractions.get(label).copied().unwrap_or(0.0)
    }

    pub fn labeled_fraction(&self) -> f64 {
        if self.users == 0 {
            0.0
        } else {
            (self.users - self.unlabeled) as f64 / self.users as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupComposition {
    pub members: Vec<String>,
    pub counts: BTreeMap<String, usize>,
    pub unlabeled: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnotationStats {
    /// Label-file users missing from the store (ignored).
    pub unknown_labeled_users: usize,
    /// Distinct users appearing in any flagged group.
    pub flagged: PopulationStats,
    /// All vertices of the graph, when supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<PopulationStats>,
    pub groups: Vec<GroupComposition>,
}

/// Label shares among flagged users, optionally among all graph users, and
/// the label mix of every group.
pub fn annotate(
    store: &ReviewStore,
    labels: &LabelFile,
    groups: &[GroupListing],
    graph_users: Option<&[String]>,
) -> AnnotationStats {
    let unknown_labeled_users = labels.labels.keys().filter(|u| store.user_id(u).is_none()).count();
    let known = LabelFile {
        labels: labels
            .labels
            .iter()
            .filter(|(u, _)| store.user_id(u).is_some())
            .map(|(u, l)| (u.clone(), l.clone()))
            .collect(),
    };
    let flagged: BTreeSet<&str> = groups.iter().flat_map(|g| g.members.iter().map(String::as_str)).collect();
    let groups = groups
        .iter()
        .map(|g| {
            let stats = PopulationStats::from_users(g.members.iter().map(String::as_str), &known);
            GroupComposition {
                members: g.members.clone(),
                counts: stats.counts,
                unlabeled: stats.unlabeled,
            }
        })
        .collect();
    AnnotationStats {
        unknown_labeled_users,
        flagged: PopulationStats::from_users(flagged, &known),
        graph: graph_users.map(|users| {
            let distinct: BTreeSet<&str> = users.iter().map(String::as_str).collect();
            PopulationStats::from_users(distinct, &known)
        }),
        groups,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{DayNumber, StoreBuilder};

    fn store() -> ReviewStore {
        let mut b = StoreBuilder::new();
        for u in ["a", "b", "c", "d"] {
            b.push(u, "v", DayNumber(0), None);
        }
        b.finish().0
    }

    fn listing(members: &[&str]) -> GroupListing {
        let line = serde_json::json!({
            "kind": "clique", "k": 1, "d": 0, "size": members.len(),
            "members": members, "pairs": []
        });
        serde_json::from_value(line).unwrap()
    }

    #[test]
    fn all_flagged_scouts() {
        let labels = read_labels("user_id,label\na,scout\nb,scout\n".as_bytes()).unwrap();
        let stats = annotate(&store(), &labels, &[listing(&["a", "b"])], None);
        assert_eq!(stats.flagged.fraction("scout"), 1.0);
        assert_eq!(stats.groups[0].counts["scout"], 2);
    }

    #[test]
    fn empty_label_file() {
        let labels = read_labels("user_id,label\n".as_bytes()).unwrap();
        let stats = annotate(&store(), &labels, &[listing(&["a", "b"])], None);
        assert_eq!(stats.flagged.fraction("scout"), 0.0);
        assert_eq!(stats.flagged.labeled_fraction(), 0.0);
        assert_eq!(stats.unknown_labeled_users, 0);
    }

    #[test]
    fn both_populations_and_unknown_users() {
        let labels = read_labels("user_id,label\na,scout\nc,scout\nzz,scout\n".as_bytes()).unwrap();
        let graph: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let stats = annotate(&store(), &labels, &[listing(&["a", "b"]), listing(&["b", "c"])], Some(&graph));
        assert_eq!(stats.unknown_labeled_users, 1);
        assert_eq!(stats.flagged.users, 3);
        assert!((stats.flagged.fraction("scout") - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(stats.graph.as_ref().unwrap().fraction("scout"), 0.5);
    }

    #[test]
    fn conflicting_labels_are_rejected() {
        assert!(read_labels("user_id,label\na,scout\na,regular\n".as_bytes()).is_err());
        assert!(read_labels("user_id,label\na,scout\na,scout\n".as_bytes()).is_ok());
        assert!(read_labels("nope\n1\n".as_bytes()).is_err());
    }
}
