//! Randomness index for undirected networks.
//!
//! A graph is embedded by the relative frequencies of its six connected
//! induced 4-node motifs. That point is compared with the closed-form
//! Erdős–Rényi point at the same density (the randomness index) or with an
//! atlas of simulated model embeddings (classification). The [`tseries`]
//! module turns multivariate time series into a per-window index series.
//!
//! ```
//! use netrand::{compute_rfp, randomness_index, Graph};
//!
//! let k5 = Graph::complete(5);
//! assert_eq!(compute_rfp(&k5).unwrap().0, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
//! assert_eq!(randomness_index(&k5).unwrap(), 0.0);
//! ```

pub mod analytic;
pub mod classifier;
pub mod error;
pub mod generators;
pub mod graph;
pub mod motif;
pub mod rng;
pub mod synthetic;
pub mod tseries;

pub use analytic::{critical_point, expected_motif_frequency, ErParams};
pub use classifier::{
    build_atlas, classify, classify_refined, randomness_index, Atlas, Classification, ModelLabel,
    RefinedClassification, RefinedClassifier, RefinedLabel,
};
pub use error::{Error, ErrorKind, Result};
pub use generators::{gen_er, gen_ws, ring_lattice, WsParams};
pub use graph::{Graph, GraphBuilder, Tetrad};
pub use motif::{
    census_oracle, classify_signature, compute_rfp, motif_census, relative_frequency_point, MotifClass,
    MotifCounts, Rfp,
};
pub use rng::Seed;
pub use tseries::{ri_series, RiConfig, RiPoint, RiSeries, SeriesMatrix};
