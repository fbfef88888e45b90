//! Sliding-window update order.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateKind {
    Insert,
    Delete,
}

/// One update of a stream; `point` indexes the loaded point list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Update {
    pub step: usize,
    pub kind: UpdateKind,
    pub point: usize,
}

/// Step `i` deletes point `i - window` if it was inserted and inserts point `i` if it
/// exists. Runs until every point has been inserted and deleted once, so the stream
/// has `2n` updates. Deleting first keeps at most `window` points live at all times.
pub fn sliding_window_stream(n: usize, window: usize) -> Vec<Update> {
    assert!(window >= 1, "window must be at least 1");
    let mut out = Vec::with_capacity(2 * n);
    for step in 0..n + window {
        if step >= window && step - window < n {
            out.push(Update {
                step,
                kind: UpdateKind::Delete,
                point: step - window,
            });
        }
        if step < n {
            out.push(Update {
                step,
                kind: UpdateKind::Insert,
                point: step,
            });
        }
    }
    out
}
