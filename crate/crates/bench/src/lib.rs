//! Sliding-window experiments for the `dynmedian` clustering engine: dataset
//! ingestion, update streams, periodic static recomputation as a baseline, and
//! per-update metrics.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod stream;

pub use dataset::{load_dataset, SyntheticSpec};
pub use error::{BenchError, Result};
pub use experiment::{
    run_experiment, run_on_points, Baseline, ExperimentConfig, OffsetMode, RunOutput, Source, Summary,
};
pub use metrics::{write_csv, MetricsRow, Op};
pub use stream::{sliding_window_stream, Update, UpdateKind};
