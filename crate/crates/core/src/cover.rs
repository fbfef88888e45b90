//! Static successive sampling: the almost-cover step and the layered static
//! algorithm that repeatedly peels covered points off the remaining set.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ClusterError, Result};
use crate::metric::{nearest, DistanceOracle, Point, PointId};

/// Source of the uniform-with-replacement center samples.
pub trait CenterSampler {
    /// Draws `count` ids from `population`, independently and with replacement.
    fn sample(&mut self, population: &[PointId], count: usize) -> Vec<PointId>;
}

/// Seeded uniform sampler.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    rng: ChaCha8Rng,
}

impl UniformSampler {
    pub fn new(seed: u64) -> Self {
        UniformSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl CenterSampler for UniformSampler {
    fn sample(&mut self, population: &[PointId], count: usize) -> Vec<PointId> {
        if population.is_empty() {
            return Vec::new();
        }
        (0..count)
            .map(|_| population[self.rng.random_range(0..population.len())])
            .collect()
    }
}

/// Replays fixed samples, one entry per call, then falls back to a uniform sampler.
#[derive(Debug, Clone)]
pub struct ScriptedSampler {
    script: VecDeque<Vec<PointId>>,
    fallback: UniformSampler,
}

impl ScriptedSampler {
    pub fn new<I, S>(script: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = u64>,
    {
        ScriptedSampler {
            script: script
                .into_iter()
                .map(|s| s.into_iter().map(PointId).collect())
                .collect(),
            fallback: UniformSampler::new(0),
        }
    }
}

impl CenterSampler for ScriptedSampler {
    fn sample(&mut self, population: &[PointId], count: usize) -> Vec<PointId> {
        match self.script.pop_front() {
            Some(ids) => ids,
            None => self.fallback.sample(population, count),
        }
    }
}

/// `max(k, ceil(log2(n + 2)))`.
pub fn k_prime(k: usize, n: usize) -> usize {
    let log = ((n + 2) as f64).log2().ceil() as usize;
    k.max(log)
}

/// Number of points a `beta`-fraction cover of `n` points must capture: `ceil(beta * n)`,
/// clamped to `1..=n`.
pub fn coverage_target(beta: f64, n: usize) -> usize {
    let raw = beta * n as f64;
    // absorb representation error such as 0.1 * 30 = 3.0000000000000004
    let target = (raw - 1e-9 * raw.max(1.0)).ceil() as usize;
    target.clamp(1, n.max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticParams {
    pub beta: f64,
    /// Centers sampled per layer.
    pub sample_size: usize,
    /// A layer with at most this many points becomes the terminal layer.
    pub last_layer_threshold: usize,
    pub k: usize,
    pub seed: u64,
}

impl StaticParams {
    /// Threshold defaults to the sample size.
    pub fn new(k: usize, sample_size: usize, beta: f64, seed: u64) -> Self {
        StaticParams {
            beta,
            sample_size,
            last_layer_threshold: sample_size,
            k,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(ClusterError::InvalidParameter(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
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

/// Output of one almost-cover step.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverResult {
    /// Sampled centers, deduplicated, ascending.
    pub centers: Vec<PointId>,
    /// Covered points in input order.
    pub covered: Vec<PointId>,
    /// Nearest center of every covered point.
    pub assignment: BTreeMap<PointId, PointId>,
    pub radius: f64,
}

/// The least radius `r` such that the balls of radius `r` around `centers` capture at
/// least a `beta` fraction of `universe`, i.e. the `ceil(beta |U|)`-th smallest
/// distance to `centers`.
pub fn nu_beta(oracle: &DistanceOracle, centers: &[&Point], universe: &[&Point], beta: f64) -> Result<f64> {
    if centers.is_empty() {
        return Err(ClusterError::Empty("center set"));
    }
    if universe.is_empty() {
        return Err(ClusterError::Empty("point set"));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(ClusterError::InvalidParameter(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    let mut dists: Vec<f64> = universe
        .iter()
        .map(|u| nearest(oracle, u, centers).map_or(f64::INFINITY, |(d, _)| d))
        .collect();
    Ok(order_statistic(&mut dists, coverage_target(beta, universe.len())))
}

/// `rank`-th smallest value (1-based).
pub(crate) fn order_statistic(values: &mut [f64], rank: usize) -> f64 {
    let (_, v, _) = values.select_nth_unstable_by(rank - 1, f64::total_cmp);
    *v
}

/// Samples `sample_size` centers from `universe` with replacement, picks the
/// `beta`-coverage radius and assigns every point inside it to its nearest
/// sampled center (ties to the smallest id).
///
/// Costs `|centers| * |universe|` distance evaluations.
pub fn almost_cover(
    oracle: &DistanceOracle,
    universe: &[&Point],
    sample_size: usize,
    beta: f64,
    sampler: &mut dyn CenterSampler,
) -> Result<CoverResult> {
    if universe.is_empty() {
        return Err(ClusterError::Empty("point set"));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(ClusterError::InvalidParameter(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    let ids: Vec<PointId> = universe.iter().map(|p| p.id).collect();
    let sampled: BTreeSet<PointId> = sampler.sample(&ids, sample_size).into_iter().collect();
    if sampled.is_empty() {
        return Err(ClusterError::InvalidParameter("sampler returned no centers".into()));
    }
    let by_id: HashMap<PointId, &Point> = universe.iter().map(|p| (p.id, *p)).collect();
    let centers: Vec<&Point> = sampled
        .iter()
        .map(|id| {
            by_id
                .get(id)
                .copied()
                .ok_or_else(|| ClusterError::InvalidParameter(format!("sampled center {id} is not in the point set")))
        })
        .collect::<Result<_>>()?;

    let nearest_center: Vec<(f64, PointId)> = universe
        .iter()
        .map(|u| nearest(oracle, u, &centers).expect("centers nonempty"))
        .collect();
    let mut dists: Vec<f64> = nearest_center.iter().map(|&(d, _)| d).collect();
    let radius = order_statistic(&mut dists, coverage_target(beta, universe.len()));

    let mut covered = Vec::new();
    let mut assignment = BTreeMap::new();
    for (u, &(d, c)) in universe.iter().zip(&nearest_center) {
        if d <= radius {
            covered.push(u.id);
            assignment.insert(u.id, c);
        }
    }
    Ok(CoverResult {
        centers: sampled.into_iter().collect(),
        covered,
        assignment,
        radius,
    })
}

/// One level of the static hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticLayer {
    /// The points still unassigned when this layer was built.
    pub members: Vec<PointId>,
    pub cover: CoverResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticOutput {
    pub layers: Vec<StaticLayer>,
    /// Center of every input point.
    pub assignment: BTreeMap<PointId, PointId>,
    pub k_prime: usize,
}

impl StaticOutput {
    pub fn t(&self) -> usize {
        self.layers.len()
    }

    /// Union of all layers' centers.
    pub fn centers(&self) -> BTreeSet<PointId> {
        self.layers
            .iter()
            .flat_map(|l| l.cover.centers.iter().copied())
            .collect()
    }
}

/// Terminal layer: every remaining point is its own center at radius zero.
pub(crate) fn identity_cover(members: &[PointId]) -> CoverResult {
    let mut centers = members.to_vec();
    centers.sort_unstable();
    CoverResult {
        centers,
        covered: members.to_vec(),
        assignment: members.iter().map(|&x| (x, x)).collect(),
        radius: 0.0,
    }
}

/// Runs almost-cover on the remaining points until at most `last_layer_threshold`
/// remain, then makes each remaining point its own center.
pub fn static_algo(
    oracle: &DistanceOracle,
    points: &[&Point],
    params: &StaticParams,
    sampler: &mut dyn CenterSampler,
) -> Result<StaticOutput> {
    params.validate()?;
    if points.is_empty() {
        return Err(ClusterError::Empty("point set"));
    }
    let mut remaining: Vec<&Point> = points.to_vec();
    let mut layers = Vec::new();
    while remaining.len() > params.last_layer_threshold {
        let cover = almost_cover(oracle, &remaining, params.sample_size, params.beta, sampler)?;
        let members = remaining.iter().map(|p| p.id).collect();
        remaining.retain(|p| !cover.assignment.contains_key(&p.id));
        layers.push(StaticLayer { members, cover });
    }
    let members: Vec<PointId> = remaining.iter().map(|p| p.id).collect();
    layers.push(StaticLayer {
        cover: identity_cover(&members),
        members,
    });
    let assignment = layers
        .iter()
        .flat_map(|l| l.cover.assignment.iter().map(|(&x, &c)| (x, c)))
        .collect();
    Ok(StaticOutput {
        layers,
        assignment,
        k_prime: k_prime(params.k, points.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Vec<Point> {
        xs.iter()
            .enumerate()
            .map(|(i, &x)| Point::new(i as u64, vec![x]))
            .collect()
    }

    #[test]
    fn nu_beta_examples() {
        let o = DistanceOracle::euclidean();
        let u = line(&[0.0, 1.0, 2.0, 100.0]);
        let all: Vec<&Point> = u.iter().collect();
        assert_eq!(nu_beta(&o, &all, &all, 0.5).unwrap(), 0.0);
        assert_eq!(nu_beta(&o, &all[1..2], &all, 1.0).unwrap(), 99.0);
        assert_eq!(nu_beta(&o, &all[..1], &all, 0.5).unwrap(), 1.0);
        assert!(nu_beta(&o, &[], &all, 0.5).is_err());
        assert!(nu_beta(&o, &all, &[], 0.5).is_err());
    }

    #[test]
    fn coverage_target_rounding() {
        assert_eq!(coverage_target(0.5, 4), 2);
        assert_eq!(coverage_target(0.5, 5), 3);
        assert_eq!(coverage_target(0.1, 30), 3);
        assert_eq!(coverage_target(0.01, 3), 1);
        assert_eq!(coverage_target(1.0, 7), 7);
    }

    #[test]
    fn forced_cover() {
        let o = DistanceOracle::euclidean();
        let u = line(&[0.0, 1.0, 2.0, 100.0]);
        let all: Vec<&Point> = u.iter().collect();
        let mut sampler = ScriptedSampler::new([vec![0, 0, 0]]);
        let c = almost_cover(&o, &all, 3, 0.5, &mut sampler).unwrap();
        assert_eq!(c.centers, vec![PointId(0)]);
        assert_eq!(c.radius, 1.0);
        assert_eq!(c.covered, vec![PointId(0), PointId(1)]);
        assert!(c.assignment.values().all(|&s| s == PointId(0)));
    }

    #[test]
    fn full_sample_covers_with_identity() {
        let o = DistanceOracle::euclidean();
        let u = line(&[0.0, 1.0, 2.0, 100.0]);
        let all: Vec<&Point> = u.iter().collect();
        let mut sampler = ScriptedSampler::new([vec![3, 2, 1, 0, 2]]);
        let c = almost_cover(&o, &all, 5, 0.5, &mut sampler).unwrap();
        assert_eq!(c.radius, 0.0);
        assert_eq!(c.covered.len(), 4);
        assert!(c.assignment.iter().all(|(x, s)| x == s));
    }

    #[test]
    fn sampler_outside_population_is_rejected() {
        let o = DistanceOracle::euclidean();
        let u = line(&[0.0, 1.0]);
        let all: Vec<&Point> = u.iter().collect();
        let mut sampler = ScriptedSampler::new([vec![9]]);
        assert!(almost_cover(&o, &all, 1, 0.5, &mut sampler).is_err());
    }

    #[test]
    fn small_input_is_single_layer() {
        let o = DistanceOracle::euclidean();
        let u = line(&[0.0, 5.0, 9.0]);
        let all: Vec<&Point> = u.iter().collect();
        let out = static_algo(&o, &all, &StaticParams::new(2, 3, 0.5, 1), &mut UniformSampler::new(1)).unwrap();
        assert_eq!(out.t(), 1);
        assert!(out.assignment.iter().all(|(x, s)| x == s));
        assert_eq!(o.evaluations(), 0);
    }

    #[test]
    fn params_validation() {
        assert!(StaticParams::new(1, 4, 0.0, 0).validate().is_err());
        assert!(StaticParams::new(1, 4, 1.0, 0).validate().is_err());
        assert!(StaticParams::new(1, 0, 0.5, 0).validate().is_err());
        assert!(StaticParams::new(0, 4, 0.5, 0).validate().is_err());
        let mut p = StaticParams::new(1, 4, 0.5, 0);
        p.last_layer_threshold = 3;
        assert!(p.validate().is_err());
    }

    #[test]
    fn k_prime_values() {
        assert_eq!(k_prime(1, 0), 1);
        assert_eq!(k_prime(1, 6), 3);
        assert_eq!(k_prime(50, 2000), 50);
        assert_eq!(k_prime(5, 500), 9);
    }
}
