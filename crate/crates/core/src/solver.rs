//! Query path: the weighted instance extracted from an assignment, cost evaluation,
//! and a static weighted (k,p)-clustering solver (weighted D^p seeding followed by
//! single-swap local search).

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamic::DynamicClusterer;
use crate::error::{ClusterError, Result};
use crate::metric::{check_power, DistanceOracle, Point, PointId};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoint {
    pub point: Point,
    pub weight: u64,
}

/// Centers of an assignment, each weighted by the number of points it serves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedInstance {
    pub entries: Vec<WeightedPoint>,
}

impl WeightedInstance {
    /// Every point with weight 1.
    pub fn unit(points: &[&Point]) -> Self {
        WeightedInstance {
            entries: points
                .iter()
                .map(|p| WeightedPoint {
                    point: (*p).clone(),
                    weight: 1,
                })
                .collect(),
        }
    }

    /// Weights `|sigma^{-1}(c)|` for every center `c` of `assignment`.
    pub fn from_assignment(points: &[&Point], assignment: &BTreeMap<PointId, PointId>) -> Result<Self> {
        let by_id: HashMap<PointId, &Point> = points.iter().map(|p| (p.id, *p)).collect();
        let mut weights: BTreeMap<PointId, u64> = BTreeMap::new();
        for p in points {
            let c = assignment.get(&p.id).ok_or(ClusterError::Unassigned(p.id))?;
            *weights.entry(*c).or_default() += 1;
        }
        let entries = weights
            .into_iter()
            .map(|(c, weight)| {
                let point = by_id.get(&c).ok_or(ClusterError::UnknownPoint(c))?;
                Ok(WeightedPoint {
                    point: (*point).clone(),
                    weight,
                })
            })
            .collect::<Result<_>>()?;
        Ok(WeightedInstance { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    pub fn ids(&self) -> Vec<PointId> {
        self.entries.iter().map(|e| e.point.id).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Ascending.
    pub centers: Vec<PointId>,
    pub cost: f64,
}

/// `sum_{x in points} d(x, centers)^p`.
pub fn cost_set(oracle: &DistanceOracle, centers: &[&Point], points: &[&Point], p: f64) -> Result<f64> {
    check_power(p)?;
    if points.is_empty() {
        return Ok(0.0);
    }
    if centers.is_empty() {
        return Err(ClusterError::Empty("center set"));
    }
    Ok(points.iter().map(|x| min_dissimilarity(oracle, x, centers, p)).sum())
}

fn min_dissimilarity(oracle: &DistanceOracle, x: &Point, centers: &[&Point], p: f64) -> f64 {
    centers
        .iter()
        .map(|c| oracle.dissimilarity_pow(x, c, p))
        .fold(f64::INFINITY, f64::min)
}

/// `sum_x d(x, sigma(x))^p` over `points`.
pub fn cost_assignment(
    oracle: &DistanceOracle,
    points: &[&Point],
    assignment: &BTreeMap<PointId, PointId>,
    p: f64,
) -> Result<f64> {
    check_power(p)?;
    let by_id: HashMap<PointId, &Point> = points.iter().map(|q| (q.id, *q)).collect();
    points.iter().try_fold(0.0, |acc, x| {
        let c = assignment.get(&x.id).ok_or(ClusterError::Unassigned(x.id))?;
        let center = by_id.get(c).ok_or(ClusterError::UnknownPoint(*c))?;
        Ok(acc + oracle.dissimilarity_pow(x, center, p))
    })
}

/// `sum_x w(x) d(x, centers)^p` over the instance. Every center must be an instance point.
pub fn cost_weighted(oracle: &DistanceOracle, centers: &[PointId], inst: &WeightedInstance, p: f64) -> Result<f64> {
    check_power(p)?;
    if centers.is_empty() {
        return Err(ClusterError::Empty("center set"));
    }
    let by_id: HashMap<PointId, &Point> = inst.entries.iter().map(|e| (e.point.id, &e.point)).collect();
    let chosen: Vec<&Point> = centers
        .iter()
        .map(|c| by_id.get(c).copied().ok_or(ClusterError::NotInInstance(*c)))
        .collect::<Result<_>>()?;
    Ok(inst
        .entries
        .iter()
        .map(|e| e.weight as f64 * min_dissimilarity(oracle, &e.point, &chosen, p))
        .sum())
}

/// Local search settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// A swap is taken only if it lowers the cost below `(1 - delta / k)` times the current cost.
    pub delta: f64,
    /// Instances up to this size get a precomputed dissimilarity table.
    pub table_limit: usize,
    /// Upper bound on accepted swaps; zero returns the seeding unchanged.
    pub max_swaps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            delta: 0.01,
            table_limit: 4096,
            max_swaps: usize::MAX,
        }
    }
}

/// Pairwise dissimilarities of the instance, precomputed or on demand.
struct Dissim<'a> {
    points: Vec<&'a Point>,
    table: Option<Vec<f64>>,
    oracle: &'a DistanceOracle,
    p: f64,
}

impl<'a> Dissim<'a> {
    fn new(oracle: &'a DistanceOracle, inst: &'a WeightedInstance, p: f64, table_limit: usize) -> Self {
        let points: Vec<&Point> = inst.entries.iter().map(|e| &e.point).collect();
        let n = points.len();
        let table = (n <= table_limit).then(|| {
            let mut t = vec![0.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let d = oracle.dissimilarity_pow(points[i], points[j], p);
                    t[i * n + j] = d;
                    t[j * n + i] = d;
                }
            }
            t
        });
        Dissim {
            points,
            table,
            oracle,
            p,
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        match &self.table {
            Some(t) => t[i * self.points.len() + j],
            None => self.oracle.dissimilarity_pow(self.points[i], self.points[j], self.p),
        }
    }
}

/// Nearest and second-nearest center of every instance point.
struct Nearest {
    first: Vec<(usize, f64)>,
    second: Vec<f64>,
}

impl Nearest {
    fn compute(d: &Dissim<'_>, centers: &[usize]) -> Self {
        let n = d.points.len();
        let mut first = Vec::with_capacity(n);
        let mut second = Vec::with_capacity(n);
        for x in 0..n {
            let (mut b1, mut d1, mut d2) = (usize::MAX, f64::INFINITY, f64::INFINITY);
            for (slot, &c) in centers.iter().enumerate() {
                let v = d.get(x, c);
                if v < d1 {
                    d2 = d1;
                    d1 = v;
                    b1 = slot;
                } else if v < d2 {
                    d2 = v;
                }
            }
            first.push((b1, d1));
            second.push(d2);
        }
        Nearest { first, second }
    }

    fn cost(&self, weights: &[f64]) -> f64 {
        self.first.iter().zip(weights).map(|(&(_, d), w)| w * d).sum()
    }
}

/// Approximate weighted (k,p)-clustering of `inst`.
///
/// Seeds `k` centers by weighted D^p sampling, then repeatedly swaps one center for a
/// non-center while that improves the weighted cost by more than a `delta / k`
/// fraction. Deterministic for a given seed.
pub fn weighted_solve(
    oracle: &DistanceOracle,
    inst: &WeightedInstance,
    k: usize,
    p: f64,
    seed: u64,
    config: &SolverConfig,
) -> Result<Solution> {
    check_power(p)?;
    if k == 0 {
        return Err(ClusterError::InvalidParameter("k must be at least 1".into()));
    }
    if inst.is_empty() {
        return Err(ClusterError::Empty("weighted instance"));
    }
    let n = inst.len();
    if n <= k {
        let mut centers = inst.ids();
        centers.sort_unstable();
        return Ok(Solution { centers, cost: 0.0 });
    }
    let weights: Vec<f64> = inst.entries.iter().map(|e| e.weight as f64).collect();
    let d = Dissim::new(oracle, inst, p, config.table_limit);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_centers(&d, &weights, k, &mut rng);
    let mut near = Nearest::compute(&d, &centers);
    let mut cost = near.cost(&weights);

    let mut is_center = vec![false; n];
    for &c in &centers {
        is_center[c] = true;
    }
    let factor = 1.0 - config.delta / k as f64;
    let mut since_improvement = 0;
    let mut candidate = 0;
    let mut swaps = 0;
    // eager first-improvement sweep; stop after a full cycle without a swap
    while since_improvement < n && cost > 0.0 && swaps < config.max_swaps {
        let c = candidate;
        candidate = (candidate + 1) % n;
        since_improvement += 1;
        if is_center[c] {
            continue;
        }
        let (slot, delta) = best_removal(&d, &weights, &near, centers.len(), c);
        let new_cost = cost + delta;
        if new_cost < cost * factor {
            is_center[centers[slot]] = false;
            is_center[c] = true;
            centers[slot] = c;
            near = Nearest::compute(&d, &centers);
            cost = near.cost(&weights);
            since_improvement = 0;
            swaps += 1;
        }
    }
    let mut ids: Vec<PointId> = centers.iter().map(|&c| d.points[c].id).collect();
    ids.sort_unstable();
    Ok(Solution { centers: ids, cost })
}

/// Cost change of adding `candidate` and removing the best existing center.
fn best_removal(d: &Dissim<'_>, weights: &[f64], near: &Nearest, slots: usize, candidate: usize) -> (usize, f64) {
    // loss[m]: extra cost of removing center m given the candidate is added
    let mut loss = vec![0.0; slots];
    let mut shared = 0.0;
    for (x, (&(m, d1), &d2)) in near.first.iter().zip(&near.second).enumerate() {
        let w = weights[x];
        let dc = d.get(x, candidate);
        if dc < d1 {
            shared += w * (dc - d1);
        } else if dc < d2 {
            loss[m] += w * (dc - d1);
        } else {
            loss[m] += w * (d2 - d1);
        }
    }
    let (slot, extra) = loss.iter().enumerate().fold(
        (0, f64::INFINITY),
        |best, (i, &v)| if v < best.1 { (i, v) } else { best },
    );
    (slot, shared + extra)
}

fn seed_centers(d: &Dissim<'_>, weights: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = weights.len();
    let first = sample_proportional(weights, rng).unwrap_or(0);
    let mut centers = vec![first];
    let mut closest: Vec<f64> = (0..n).map(|x| d.get(x, first)).collect();
    while centers.len() < k {
        let scores: Vec<f64> = closest.iter().zip(weights).map(|(c, w)| c * w).collect();
        let Some(next) = sample_proportional(&scores, rng) else {
            // every point coincides with a center
            break;
        };
        centers.push(next);
        for (x, c) in closest.iter_mut().enumerate() {
            *c = c.min(d.get(x, next));
        }
    }
    centers
}

fn sample_proportional(scores: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: f64 = scores.iter().sum();
    if !total.is_finite() || total <= 0.0 {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &s) in scores.iter().enumerate() {
        if s <= 0.0 {
            continue;
        }
        acc += s;
        last = Some(i);
        if target < acc {
            return Some(i);
        }
    }
    last
}

/// Answer to a query against a dynamic structure.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    /// Centers with their cost over the full live point set.
    pub solution: Solution,
    /// Cost of the centers on the weighted instance.
    pub weighted_cost: f64,
    /// Size of the extracted weighted instance.
    pub instance_size: usize,
}

impl DynamicClusterer {
    /// Centers `sigma(U)` weighted by the number of points each serves.
    pub fn weighted_instance(&self) -> Result<WeightedInstance> {
        if self.points.is_empty() {
            return Err(ClusterError::Empty("clustering"));
        }
        let entries = self
            .layers
            .iter()
            .flat_map(|l| l.clusters.values())
            .map(|c| WeightedPoint {
                point: self.points[&c.center].clone(),
                weight: c.size() as u64,
            })
            .collect();
        Ok(WeightedInstance { entries })
    }

    /// Solves the weighted instance only, without evaluating the result on the full set.
    pub fn solve(&self, k: usize, p: f64, seed: u64, config: &SolverConfig) -> Result<Solution> {
        let inst = self.weighted_instance()?;
        weighted_solve(&self.oracle, &inst, k, p, seed, config)
    }

    /// Extracts the weighted instance, solves it, and prices the centers on all live points.
    pub fn query(&self, k: usize, p: f64, seed: u64) -> Result<QueryResult> {
        self.query_with(k, p, seed, &SolverConfig::default())
    }

    pub fn query_with(&self, k: usize, p: f64, seed: u64, config: &SolverConfig) -> Result<QueryResult> {
        let inst = self.weighted_instance()?;
        let weighted = weighted_solve(&self.oracle, &inst, k, p, seed, config)?;
        let points = self.points();
        let centers: Vec<&Point> = weighted.centers.iter().map(|c| &self.points[c]).collect();
        let cost = cost_set(&self.oracle, &centers, &points, p)?;
        Ok(QueryResult {
            solution: Solution {
                centers: weighted.centers,
                cost,
            },
            weighted_cost: weighted.cost,
            instance_size: inst.len(),
        })
    }

    /// `sum_x d(x, sigma(x))^p` for the maintained assignment.
    pub fn assignment_cost(&self, p: f64) -> Result<f64> {
        check_power(p)?;
        let mut total = 0.0;
        for c in self.layers.iter().flat_map(|l| l.clusters.values()) {
            let center = &self.points[&c.center];
            for m in &c.members {
                total += self.oracle.dissimilarity_pow(&self.points[m], center, p);
            }
        }
        Ok(total)
    }
}
