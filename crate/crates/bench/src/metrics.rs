//! Per-update metrics rows and their CSV form.

use std::io::Write;

use serde::Serialize;

pub const HEADER: [&str; 8] = [
    "update_index",
    "op",
    "wall_nanos",
    "distance_evals_delta",
    "t",
    "n",
    "solution_cost",
    "centers",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Insert,
    Delete,
    Query,
    /// Static recompute of the current live set, priced like a query.
    Baseline,
}

/// `solution_cost` and `centers` are only set for queries and baselines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub update_index: u64,
    pub op: Op,
    pub wall_nanos: u64,
    pub distance_evals_delta: u64,
    pub t: usize,
    pub n: usize,
    pub solution_cost: Option<f64>,
    pub centers: Option<usize>,
}

/// Writes the header and then one line per row, in order.
pub fn write_csv<W: Write>(rows: &[MetricsRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
