//! Fully dynamic k-median and (k,p)-clustering in general metric spaces.
//!
//! Points are peeled into nested layers by repeated sampling: each layer
//! samples a handful of centers, keeps the closest fraction of the remaining
//! points as covered, and hands the rest down. Insertions and deletions are
//! absorbed lazily and a layer is rebuilt only once enough updates pile up
//! against it. The layers induce a small weighted instance that a local-search
//! solver turns into `k` centers on demand.
//!
//! ```
//! use dynmedian::{DistanceOracle, DynamicClusterer, DynamicParams, Point};
//!
//! let mut clusterer = DynamicClusterer::empty(DynamicParams::new(2, 4), DistanceOracle::euclidean()).unwrap();
//! for i in 0..20u64 {
//!     clusterer.insert(Point::new(i, vec![(i % 2) as f64 * 100.0 + i as f64 * 0.01])).unwrap();
//! }
//! assert!(clusterer.integrity_check().is_ok());
//! let answer = clusterer.query(2, 1.0, 7).unwrap();
//! assert_eq!(answer.solution.centers.len(), 2);
//! ```

pub mod cover;
pub mod dynamic;
pub mod error;
pub mod integrity;
pub mod metric;
pub mod oracle;
pub mod solver;

pub use cover::{almost_cover, static_algo, CenterSampler, CoverResult, ScriptedSampler, StaticParams, UniformSampler};
pub use dynamic::{DynamicClusterer, DynamicParams, Layer, SlackMode};
pub use error::{ClusterError, Result};
pub use integrity::{IntegrityReport, Violation};
pub use metric::{DistanceOracle, Point, PointId};
pub use solver::{
    cost_assignment, cost_set, cost_weighted, weighted_solve, QueryResult, Solution, SolverConfig, WeightedInstance,
};
