//! The fully dynamic layered structure.
//!
//! Layer `i` holds the points `U_i` that were not captured by layers `1..i`, a set of
//! clusters covering `C_i ⊆ U_i`, and the counters `n_i` (size of `U_i` at its last
//! rebuild) and `n*_i` (updates to `U_i` since then). Insertions land in every `U_i` and
//! become singleton clusters of the last layer; deletions detach the point from its
//! cluster, promoting a co-member when the center leaves. Once some layer has absorbed
//! `tau * n_i` updates, that layer and everything below it is rebuilt from scratch.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use indexmap::IndexSet;

use crate::cover::{almost_cover, identity_cover, k_prime, CenterSampler, CoverResult, UniformSampler};
use crate::error::{ClusterError, Result};
use crate::metric::{DistanceOracle, Point, PointId};

pub type ClusterId = u64;

/// A cluster of one layer: the points assigned to `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRecord {
    pub id: ClusterId,
    pub center: PointId,
    pub members: BTreeSet<PointId>,
}

impl ClusterRecord {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// How the slack `tau` is derived from `epsilon` and `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlackMode {
    /// `tau = epsilon * beta`.
    #[default]
    Standard,
    /// `tau = epsilon * beta / (beta * (1 + epsilon) + 1)`, a tighter slack.
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicParams {
    pub beta: f64,
    pub epsilon: f64,
    /// Centers sampled per layer (`phi`).
    pub sample_size: usize,
    pub last_layer_threshold: usize,
    pub k: usize,
    pub seed: u64,
    pub slack: SlackMode,
}

impl DynamicParams {
    /// `beta = 0.5`, `epsilon = 0.2`, threshold equal to the sample size.
    pub fn new(k: usize, sample_size: usize) -> Self {
        DynamicParams {
            beta: 0.5,
            epsilon: 0.2,
            sample_size,
            last_layer_threshold: sample_size,
            k,
            seed: 0,
            slack: SlackMode::Standard,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_threshold(mut self, threshold: usize) -> Self {
        self.last_layer_threshold = threshold;
        self
    }

    pub fn with_slack(mut self, slack: SlackMode) -> Self {
        self.slack = slack;
        self
    }

    pub fn tau(&self) -> f64 {
        match self.slack {
            SlackMode::Standard => self.epsilon * self.beta,
            SlackMode::Strict => self.epsilon * self.beta / (self.beta * (1.0 + self.epsilon) + 1.0),
        }
    }

    /// Guaranteed per-layer capture fraction under slack: `beta * (1 - epsilon)`.
    pub fn beta_star(&self) -> f64 {
        self.beta * (1.0 - self.epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(ClusterError::InvalidParameter(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(ClusterError::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.sample_size == 0 {
            return Err(ClusterError::InvalidParameter("sample size must be at least 1".into()));
        }
        if self.last_layer_threshold < self.sample_size {
            return Err(ClusterError::InvalidParameter(format!(
                "last layer threshold {} is below the sample size {}",
                self.last_layer_threshold, self.sample_size
            )));
        }
        if self.k == 0 {
            return Err(ClusterError::InvalidParameter("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// One level of the hierarchy.
#[derive(Debug, Clone)]
pub struct Layer {
    pub(crate) index: usize,
    pub(crate) members: IndexSet<PointId>,
    pub(crate) clusters: BTreeMap<ClusterId, ClusterRecord>,
    pub(crate) cluster_of: HashMap<PointId, ClusterId>,
    pub(crate) radius: f64,
    pub(crate) baseline: usize,
    pub(crate) updates: usize,
    next_cluster: ClusterId,
}

impl Layer {
    fn from_cover(index: usize, members: &[PointId], cover: &CoverResult) -> Self {
        let mut grouped: BTreeMap<PointId, BTreeSet<PointId>> = BTreeMap::new();
        for (&x, &c) in &cover.assignment {
            grouped.entry(c).or_default().insert(x);
        }
        let mut layer = Layer {
            index,
            members: members.iter().copied().collect(),
            clusters: BTreeMap::new(),
            cluster_of: HashMap::with_capacity(cover.assignment.len()),
            radius: cover.radius,
            baseline: members.len(),
            updates: 0,
            next_cluster: 0,
        };
        for (center, cluster_members) in grouped {
            layer.add_cluster(center, cluster_members);
        }
        layer
    }

    fn add_cluster(&mut self, center: PointId, members: BTreeSet<PointId>) {
        let id = self.next_cluster;
        self.next_cluster += 1;
        for &m in &members {
            self.cluster_of.insert(m, id);
        }
        self.clusters.insert(id, ClusterRecord { id, center, members });
    }

    /// 1-based position in the hierarchy.
    pub fn index(&self) -> usize {
        self.index
    }

    /// `U_i`.
    pub fn members(&self) -> &IndexSet<PointId> {
        &self.members
    }

    /// `S_i`, ascending.
    pub fn centers(&self) -> Vec<PointId> {
        let mut c: Vec<PointId> = self.clusters.values().map(|c| c.center).collect();
        c.sort_unstable();
        c
    }

    /// Size of `C_i`.
    pub fn covered_len(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn is_covered(&self, id: PointId) -> bool {
        self.cluster_of.contains_key(&id)
    }

    pub fn clusters(&self) -> impl Iterator<Item = &ClusterRecord> {
        self.clusters.values()
    }

    pub fn cluster_of(&self, id: PointId) -> Option<&ClusterRecord> {
        self.cluster_of.get(&id).and_then(|c| self.clusters.get(c))
    }

    /// `nu_i`: the coverage radius chosen when the layer was built.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `n_i`.
    pub fn baseline_size(&self) -> usize {
        self.baseline
    }

    /// `n*_i`.
    pub fn updates_since_rebuild(&self) -> usize {
        self.updates
    }
}

/// Dynamic k-median / (k,p)-clustering state.
pub struct DynamicClusterer {
    pub(crate) params: DynamicParams,
    pub(crate) oracle: DistanceOracle,
    pub(crate) points: HashMap<PointId, Point>,
    pub(crate) layers: Vec<Layer>,
    sampler: Box<dyn CenterSampler + Send>,
    dim: Option<usize>,
    k_prime: usize,
    rebuilds: u64,
}

impl std::fmt::Debug for DynamicClusterer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DynamicClusterer")
            .field("params", &self.params)
            .field("oracle", &self.oracle)
            .field("len", &self.points.len())
            .field("t", &self.layers.len())
            .field("k_prime", &self.k_prime)
            .finish()
    }
}

impl DynamicClusterer {
    /// An empty structure: a single empty layer.
    pub fn empty(params: DynamicParams, oracle: DistanceOracle) -> Result<Self> {
        let sampler = Box::new(UniformSampler::new(params.seed));
        Self::empty_with_sampler(params, oracle, sampler)
    }

    pub fn empty_with_sampler(
        params: DynamicParams,
        oracle: DistanceOracle,
        sampler: Box<dyn CenterSampler + Send>,
    ) -> Result<Self> {
        params.validate()?;
        let k_prime = k_prime(params.k, 0);
        Ok(DynamicClusterer {
            params,
            oracle,
            points: HashMap::new(),
            layers: vec![Layer::from_cover(1, &[], &identity_cover(&[]))],
            sampler,
            dim: None,
            k_prime,
            rebuilds: 0,
        })
    }

    /// Builds the layers for an initial point set.
    pub fn preprocess(points: Vec<Point>, params: DynamicParams, oracle: DistanceOracle) -> Result<Self> {
        let sampler = Box::new(UniformSampler::new(params.seed));
        Self::preprocess_with_sampler(points, params, oracle, sampler)
    }

    pub fn preprocess_with_sampler(
        points: Vec<Point>,
        params: DynamicParams,
        oracle: DistanceOracle,
        sampler: Box<dyn CenterSampler + Send>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(ClusterError::Empty("point set"));
        }
        let mut state = Self::empty_with_sampler(params, oracle, sampler)?;
        let mut order = Vec::with_capacity(points.len());
        for p in points {
            state.admit(&p)?;
            order.push(p.id);
            state.points.insert(p.id, p);
        }
        state.layers[0].members = order.into_iter().collect();
        state.construct_from_layer(1)?;
        Ok(state)
    }

    fn admit(&mut self, p: &Point) -> Result<()> {
        p.validate()?;
        if self.points.contains_key(&p.id) {
            return Err(ClusterError::DuplicatePoint(p.id));
        }
        match self.dim {
            Some(d) if d != p.dim() => {
                return Err(ClusterError::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                })
            }
            _ => self.dim = Some(p.dim()),
        }
        Ok(())
    }

    pub fn params(&self) -> &DynamicParams {
        &self.params
    }

    pub fn oracle(&self) -> &DistanceOracle {
        &self.oracle
    }

    /// Number of layers `t`.
    pub fn t(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.points.contains_key(&id)
    }

    pub fn point(&self, id: PointId) -> Option<&Point> {
        self.points.get(&id)
    }

    /// Live points in ascending id order.
    pub fn points(&self) -> Vec<&Point> {
        let mut pts: Vec<&Point> = self.points.values().collect();
        pts.sort_unstable_by_key(|p| p.id);
        pts
    }

    /// `k'` as frozen at the most recent reconstruction.
    pub fn k_prime(&self) -> usize {
        self.k_prime
    }

    /// Number of reconstructions triggered so far (preprocessing excluded).
    pub fn rebuild_count(&self) -> u64 {
        self.rebuilds
    }

    /// Discards layers `i..=t` and rebuilds them from the current `U_i`.
    pub fn construct_from_layer(&mut self, i: usize) -> Result<()> {
        let t = self.layers.len();
        if i == 0 || i > t {
            return Err(ClusterError::LayerOutOfRange { index: i, layers: t });
        }
        let mut remaining: Vec<PointId> = self.layers[i - 1].members.iter().copied().collect();
        self.layers.truncate(i - 1);
        self.k_prime = k_prime(self.params.k, self.points.len());
        let mut index = i;
        while remaining.len() > self.params.last_layer_threshold {
            let universe: Vec<&Point> = remaining.iter().map(|id| &self.points[id]).collect();
            let cover = almost_cover(
                &self.oracle,
                &universe,
                self.params.sample_size,
                self.params.beta,
                self.sampler.as_mut(),
            )?;
            self.layers.push(Layer::from_cover(index, &remaining, &cover));
            remaining.retain(|id| !cover.assignment.contains_key(id));
            index += 1;
        }
        self.layers
            .push(Layer::from_cover(index, &remaining, &identity_cover(&remaining)));
        Ok(())
    }

    /// Adds `x` to every layer and makes it its own center in the last layer.
    /// Returns the layer a triggered rebuild started from, if any.
    pub fn insert(&mut self, x: Point) -> Result<Option<usize>> {
        self.admit(&x)?;
        let id = x.id;
        self.points.insert(id, x);
        for layer in &mut self.layers {
            layer.members.insert(id);
            layer.updates += 1;
        }
        let last = self.layers.last_mut().expect("at least one layer");
        last.add_cluster(id, BTreeSet::from([id]));
        Ok(self.rebuild())
    }

    /// Removes a point. A deleted center hands its cluster to the smallest-id co-member.
    /// Returns the removed point and the layer a triggered rebuild started from, if any.
    pub fn delete(&mut self, id: PointId) -> Result<(Point, Option<usize>)> {
        let point = self.points.remove(&id).ok_or(ClusterError::UnknownPoint(id))?;
        for layer in &mut self.layers {
            if !layer.members.swap_remove(&id) {
                continue;
            }
            layer.updates += 1;
            let Some(cid) = layer.cluster_of.remove(&id) else {
                continue;
            };
            let cluster = layer
                .clusters
                .get_mut(&cid)
                .expect("cluster_of points at a live cluster");
            cluster.members.remove(&id);
            match cluster.members.first() {
                None => {
                    layer.clusters.remove(&cid);
                }
                Some(&next) if cluster.center == id => cluster.center = next,
                Some(_) => {}
            }
        }
        Ok((point, self.rebuild()))
    }

    /// Rebuilds from the first layer whose update count reached `tau * n_i`.
    pub fn rebuild(&mut self) -> Option<usize> {
        let tau = self.params.tau();
        let violating = self
            .layers
            .iter()
            .position(|l| l.updates as f64 >= tau * l.baseline as f64 - 1e-9)?;
        self.construct_from_layer(violating + 1)
            .expect("rebuilding from an existing layer cannot fail");
        self.rebuilds += 1;
        Some(violating + 1)
    }

    /// Center currently serving `id`.
    pub fn assignment_of(&self, id: PointId) -> Result<PointId> {
        if !self.points.contains_key(&id) {
            return Err(ClusterError::UnknownPoint(id));
        }
        self.layers
            .iter()
            .find_map(|l| l.cluster_of(id))
            .map(|c| c.center)
            .ok_or(ClusterError::Unassigned(id))
    }

    /// The full assignment `sigma`.
    pub fn assignment(&self) -> BTreeMap<PointId, PointId> {
        self.layers
            .iter()
            .flat_map(|l| l.clusters.values())
            .flat_map(|c| c.members.iter().map(move |&m| (m, c.center)))
            .collect()
    }

    /// One tab-separated line per layer: index, |U_i|, |S_i|, |C_i|, nu_i, n_i, n*_i.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for l in &self.layers {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                l.index,
                l.members.len(),
                l.clusters.len(),
                l.covered_len(),
                l.radius,
                l.baseline,
                l.updates
            );
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn layers_mut(&mut self) -> &mut Vec<Layer> {
        &mut self.layers
    }
}
