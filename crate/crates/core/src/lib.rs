//! Detection of coordinated reviewer groups.
//!
//! The pipeline ingests newline-delimited JSON reviews into a compact
//! [`ReviewStore`], joins reviews of the same venue inside a day window to
//! build a `(k, d)` reviewer similarity graph ([`KdGraph`]), and enumerates
//! maximal cliques ([`clique`]) and density-`θ` pseudo-cliques
//! ([`quasiclique`]) in it. [`report`] turns the enumeration output into count
//! tables, evidence listings, label statistics and graph exports, and
//! [`synth`] generates stores with planted groups plus exhaustive oracles.

pub mod clique;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod kdgraph;
pub mod quasiclique;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{Graph, VertexSet};
pub use ingest::{DayNumber, Review, ReviewStore, UserId, VenueId};
pub use kdgraph::{KdGraph, KdParams, WeightMode};
pub use quasiclique::{QuasiParams, Theta};
