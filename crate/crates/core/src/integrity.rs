//! Structural and metric invariants of a [`DynamicClusterer`], checked on demand.
//!
//! Distances here are evaluated without touching the oracle's counter.

use std::collections::HashMap;
use std::fmt;

use crate::dynamic::{ClusterId, DynamicClusterer};
use crate::metric::PointId;

const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `U_1` differs from the live set, or `U_{i+1}` differs from `U_i \ C_i`.
    Nesting { layer: usize, detail: String },
    /// A live point is covered by no layer or by more than one.
    Partition { point: PointId, covering_layers: usize },
    /// A cluster record is inconsistent (center outside its members, empty, stale index).
    ClusterRecord {
        layer: usize,
        cluster: ClusterId,
        detail: String,
    },
    /// `n*_i > tau * n_i`.
    Slack {
        layer: usize,
        updates: usize,
        baseline: usize,
        tau: f64,
    },
    /// `|U_{i+1}| > (1 - beta (1 - epsilon)) |U_i|`.
    Shrink {
        layer: usize,
        size: usize,
        next: usize,
        bound: f64,
    },
    /// Two members of a cluster (or a member and its center) farther apart than `2 rho nu_i`.
    Radius {
        layer: usize,
        cluster: ClusterId,
        a: PointId,
        b: PointId,
        distance: f64,
        limit: f64,
    },
    /// More layers than the logarithmic bound allows.
    LayerCount { t: usize, bound: usize },
}

impl Violation {
    /// Short name of the violated invariant.
    pub fn invariant(&self) -> &'static str {
        match self {
            Violation::Nesting { .. } => "nesting",
            Violation::Partition { .. } => "partition",
            Violation::ClusterRecord { .. } => "cluster-record",
            Violation::Slack { .. } => "slack",
            Violation::Shrink { .. } => "shrink",
            Violation::Radius { .. } => "radius",
            Violation::LayerCount { .. } => "layer-count",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Nesting { layer, detail } => write!(f, "nesting violated at layer {layer}: {detail}"),
            Violation::Partition { point, covering_layers } => {
                write!(
                    f,
                    "partition violated: point {point} covered by {covering_layers} layers"
                )
            }
            Violation::ClusterRecord { layer, cluster, detail } => {
                write!(
                    f,
                    "cluster-record violated at layer {layer}, cluster {cluster}: {detail}"
                )
            }
            Violation::Slack {
                layer,
                updates,
                baseline,
                tau,
            } => {
                write!(
                    f,
                    "slack violated at layer {layer}: n* = {updates} > {tau} * {baseline}"
                )
            }
            Violation::Shrink {
                layer,
                size,
                next,
                bound,
            } => {
                write!(
                    f,
                    "shrink violated at layer {layer}: |U_next| = {next} > {bound} (|U| = {size})"
                )
            }
            Violation::Radius {
                layer,
                cluster,
                a,
                b,
                distance,
                limit,
            } => write!(
                f,
                "radius violated at layer {layer}, cluster {cluster}: d({a}, {b}) = {distance} > {limit}"
            ),
            Violation::LayerCount { t, bound } => write!(f, "layer-count violated: t = {t} > {bound}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntegrityReport {
    pub violations: Vec<Violation>,
}

impl IntegrityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for IntegrityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// `max(1, ceil(log_{1/(1-beta_star)}(n / ((1 - tau) threshold))) + 1)`.
///
/// The layer above the terminal one held more than `threshold` points when built and
/// has since lost at most a `tau` fraction, while each layer keeps at most a
/// `1 - beta_star` fraction of the one above it.
pub fn layer_count_bound(n: usize, threshold: usize, beta_star: f64, tau: f64) -> usize {
    if n == 0 {
        return 1;
    }
    let floor = (1.0 - tau) * threshold as f64;
    let ratio = n as f64 / floor;
    if ratio <= 1.0 {
        return 1;
    }
    let levels = ratio.ln() / (1.0 / (1.0 - beta_star)).ln();
    let levels = (levels - 1e-9).ceil().max(0.0) as usize;
    (levels + 1).max(1)
}

impl DynamicClusterer {
    /// Verifies nesting, partition, cluster records, the slack invariant, the
    /// per-layer shrink bound, the `2 rho nu_i` cluster diameter and the layer-count
    /// bound. An empty report means every invariant holds.
    pub fn integrity_check(&self) -> IntegrityReport {
        let mut out = Vec::new();
        let params = &self.params;
        let tau = params.tau();
        let rho = self.oracle.rho();
        let layers = &self.layers;

        let first = &layers[0];
        if first.members.len() != self.points.len() || first.members.iter().any(|id| !self.points.contains_key(id)) {
            out.push(Violation::Nesting {
                layer: 1,
                detail: format!("U_1 has {} points, {} are live", first.members.len(), self.points.len()),
            });
        }

        let mut covering: HashMap<PointId, usize> = HashMap::with_capacity(self.points.len());
        for (pos, layer) in layers.iter().enumerate() {
            let i = pos + 1;
            for &p in layer.cluster_of.keys() {
                *covering.entry(p).or_default() += 1;
                if !layer.members.contains(&p) {
                    out.push(Violation::Nesting {
                        layer: i,
                        detail: format!("covered point {p} is not in U_{i}"),
                    });
                }
            }
            if pos + 1 == layers.len() {
                if layer.covered_len() != layer.members.len() {
                    out.push(Violation::Nesting {
                        layer: i,
                        detail: "terminal layer does not cover all its points".into(),
                    });
                }
            } else {
                let next = &layers[pos + 1];
                let expected = layer.members.len() - layer.covered_len().min(layer.members.len());
                let consistent = next.members.len() == expected
                    && next
                        .members
                        .iter()
                        .all(|p| layer.members.contains(p) && !layer.is_covered(*p));
                if !consistent {
                    out.push(Violation::Nesting {
                        layer: i + 1,
                        detail: format!("U_{} is not U_{i} minus C_{i}", i + 1),
                    });
                }
                let bound = (1.0 - params.beta_star()) * layer.members.len() as f64;
                if next.members.len() as f64 > bound * (1.0 + REL_TOL) {
                    out.push(Violation::Shrink {
                        layer: i,
                        size: layer.members.len(),
                        next: next.members.len(),
                        bound,
                    });
                }
            }
            if layer.updates as f64 > tau * layer.baseline as f64 + 1e-9 {
                out.push(Violation::Slack {
                    layer: i,
                    updates: layer.updates,
                    baseline: layer.baseline,
                    tau,
                });
            }

            let limit = 2.0 * rho * layer.radius;
            for c in layer.clusters.values() {
                if c.members.is_empty() {
                    out.push(Violation::ClusterRecord {
                        layer: i,
                        cluster: c.id,
                        detail: "empty cluster".into(),
                    });
                    continue;
                }
                if !c.members.contains(&c.center) {
                    out.push(Violation::ClusterRecord {
                        layer: i,
                        cluster: c.id,
                        detail: format!("center {} is not a member", c.center),
                    });
                }
                if let Some(m) = c.members.iter().find(|m| layer.cluster_of.get(m) != Some(&c.id)) {
                    out.push(Violation::ClusterRecord {
                        layer: i,
                        cluster: c.id,
                        detail: format!("member {m} is indexed under another cluster"),
                    });
                }
                let members: Vec<_> = c.members.iter().filter_map(|m| self.points.get(m)).collect();
                let center = self.points.get(&c.center);
                'pairs: for (ai, a) in members.iter().enumerate() {
                    let others = members[ai + 1..].iter().copied().chain(center);
                    for b in others {
                        let d = self.oracle.dissimilarity_unmetered(a, b);
                        if d > limit * (1.0 + REL_TOL) + 1e-12 {
                            out.push(Violation::Radius {
                                layer: i,
                                cluster: c.id,
                                a: a.id,
                                b: b.id,
                                distance: d,
                                limit,
                            });
                            break 'pairs;
                        }
                    }
                }
            }
        }
        let cluster_total: usize = layers.iter().flat_map(|l| l.clusters.values()).map(|c| c.size()).sum();
        let indexed_total: usize = layers.iter().map(|l| l.covered_len()).sum();
        if cluster_total != indexed_total {
            out.push(Violation::ClusterRecord {
                layer: 0,
                cluster: 0,
                detail: format!("{cluster_total} cluster members but {indexed_total} indexed points"),
            });
        }

        let mut ids: Vec<&PointId> = self.points.keys().collect();
        ids.sort_unstable();
        for id in ids {
            let n = covering.get(id).copied().unwrap_or(0);
            if n != 1 {
                out.push(Violation::Partition {
                    point: *id,
                    covering_layers: n,
                });
            }
        }
        if covering.keys().any(|p| !self.points.contains_key(p)) {
            let mut dead: Vec<PointId> = covering
                .keys()
                .filter(|p| !self.points.contains_key(p))
                .copied()
                .collect();
            dead.sort_unstable();
            for p in dead {
                out.push(Violation::Partition {
                    point: p,
                    covering_layers: covering[&p],
                });
            }
        }

        let bound = layer_count_bound(self.points.len(), params.last_layer_threshold, params.beta_star(), tau);
        if layers.len() > bound {
            out.push(Violation::LayerCount { t: layers.len(), bound });
        }
        IntegrityReport { violations: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::DynamicParams;
    use crate::metric::{DistanceOracle, Point};

    fn cloud(n: usize) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let a = i as f64 * 0.7;
                Point::new(
                    i as u64,
                    vec![a.sin() * (1.0 + (i % 7) as f64), a.cos() * (i % 13) as f64],
                )
            })
            .collect()
    }

    #[test]
    fn fresh_structure_is_clean() {
        let s = DynamicClusterer::preprocess(
            cloud(300),
            DynamicParams::new(3, 12).with_seed(4),
            DistanceOracle::euclidean(),
        )
        .unwrap();
        let before = s.oracle().evaluations();
        let report = s.integrity_check();
        assert!(report.is_ok(), "{report}");
        assert_eq!(s.oracle().evaluations(), before);
    }

    #[test]
    fn corrupted_center_is_reported() {
        let mut s = DynamicClusterer::preprocess(
            cloud(300),
            DynamicParams::new(3, 12).with_seed(4),
            DistanceOracle::euclidean(),
        )
        .unwrap();
        let layer = &mut s.layers_mut()[0];
        let cluster = layer.clusters.values_mut().find(|c| c.size() >= 2).unwrap();
        cluster.center = PointId(999_999);
        let report = s.integrity_check();
        assert!(
            report.violations.iter().any(|v| v.invariant() == "cluster-record"),
            "{report}"
        );
    }

    #[test]
    fn far_center_breaks_radius() {
        let mut s = DynamicClusterer::preprocess(
            cloud(300),
            DynamicParams::new(3, 12).with_seed(4),
            DistanceOracle::euclidean(),
        )
        .unwrap();
        // point the first layer's widest cluster at a member of a distant layer-1 cluster
        let layer = &mut s.layers_mut()[0];
        let ids: Vec<ClusterId> = layer.clusters.keys().copied().collect();
        let far = *layer.clusters[ids.last().unwrap()].members.iter().next().unwrap();
        let c = layer.clusters.get_mut(&ids[0]).unwrap();
        c.members.insert(far);
        c.center = far;
        let report = s.integrity_check();
        assert!(!report.is_ok());
    }

    #[test]
    fn slack_and_partition_faults() {
        let mut s = DynamicClusterer::preprocess(
            cloud(200),
            DynamicParams::new(3, 12).with_seed(8),
            DistanceOracle::euclidean(),
        )
        .unwrap();
        s.layers_mut()[0].updates = 1_000;
        let victim = *s.layers_mut()[0].cluster_of.keys().next().unwrap();
        s.layers_mut()[0].cluster_of.remove(&victim);
        let names: Vec<&str> = s.integrity_check().violations.iter().map(|v| v.invariant()).collect();
        assert!(names.contains(&"slack"));
        assert!(names.contains(&"partition"));
    }

    #[test]
    fn layer_bound_values() {
        assert_eq!(layer_count_bound(0, 10, 0.4, 0.1), 1);
        assert_eq!(layer_count_bound(9, 10, 0.4, 0.1), 1);
        // 200 / 20 with beta* = beta = 0.5 and no slack: ceil(log2 10) + 1
        assert_eq!(layer_count_bound(200, 20, 0.5, 0.0), 5);
        assert_eq!(layer_count_bound(160, 20, 0.5, 0.0), 4);
    }
}
