//! Exhaustive reference solvers for tiny instances. Exponential; guarded by size.

use itertools::Itertools;

use crate::cover::{coverage_target, order_statistic};
use crate::error::{ClusterError, Result};
use crate::metric::{check_power, DistanceOracle, Point};
use crate::solver::{Solution, WeightedInstance};

pub const MAX_POINTS: usize = 16;
pub const MAX_SUBSETS: u64 = 100_000;

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

fn guard(n: usize, k: usize) -> Result<()> {
    if n > MAX_POINTS || (k < n && binomial(n, k) > MAX_SUBSETS) {
        return Err(ClusterError::InstanceTooLarge { points: n, k });
    }
    Ok(())
}

/// Dense table of `d^p`, rows in ascending id order.
fn table(oracle: &DistanceOracle, points: &[&Point], p: f64) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| points.iter().map(|b| oracle.dissimilarity_pow(a, b, p)).collect())
        .collect()
}

/// Optimal weighted (k,p)-clustering with centers drawn from the instance.
/// Ties resolve to the lexicographically smallest id set.
pub fn brute_force_opt_weighted(
    oracle: &DistanceOracle,
    inst: &WeightedInstance,
    k: usize,
    p: f64,
) -> Result<Solution> {
    check_power(p)?;
    if k == 0 {
        return Err(ClusterError::InvalidParameter("k must be at least 1".into()));
    }
    if inst.is_empty() {
        return Err(ClusterError::Empty("instance"));
    }
    let mut entries: Vec<(&Point, f64)> = inst.entries.iter().map(|e| (&e.point, e.weight as f64)).collect();
    entries.sort_unstable_by_key(|(pt, _)| pt.id);
    let n = entries.len();
    if k >= n {
        return Ok(Solution {
            centers: entries.iter().map(|(pt, _)| pt.id).collect(),
            cost: 0.0,
        });
    }
    guard(n, k)?;
    let pts: Vec<&Point> = entries.iter().map(|(pt, _)| *pt).collect();
    let d = table(oracle, &pts, p);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for combo in (0..n).combinations(k) {
        let cost: f64 = (0..n)
            .map(|x| entries[x].1 * combo.iter().map(|&c| d[x][c]).fold(f64::INFINITY, f64::min))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, combo));
        }
    }
    let (cost, combo) = best.expect("at least one subset");
    Ok(Solution {
        centers: combo.into_iter().map(|i| pts[i].id).collect(),
        cost,
    })
}

/// `opt(U) = min_{|S| <= k} sum_x d(x, S)^p` by enumeration.
pub fn brute_force_opt(oracle: &DistanceOracle, points: &[&Point], k: usize, p: f64) -> Result<Solution> {
    brute_force_opt_weighted(oracle, &WeightedInstance::unit(points), k, p)
}

/// `mu_gamma(U)`: the smallest radius at which some `k` points of `U` capture a
/// `gamma` fraction of `U`, measured in the oracle's working dissimilarity.
pub fn brute_force_mu_gamma(oracle: &DistanceOracle, points: &[&Point], k: usize, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(ClusterError::InvalidParameter(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    if k == 0 {
        return Err(ClusterError::InvalidParameter("k must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(ClusterError::Empty("point set"));
    }
    let n = points.len();
    let rank = coverage_target(gamma, n);
    if rank <= k.min(n) {
        return Ok(0.0);
    }
    guard(n, k)?;
    let mut pts = points.to_vec();
    pts.sort_unstable_by_key(|p| p.id);
    let d = table(oracle, &pts, oracle.power());
    let mut best = f64::INFINITY;
    let mut dists = vec![0.0; n];
    for combo in (0..n).combinations(k) {
        for (x, slot) in dists.iter_mut().enumerate() {
            *slot = combo.iter().map(|&c| d[x][c]).fold(f64::INFINITY, f64::min);
        }
        best = best.min(order_statistic(&mut dists, rank));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PointId;
    use crate::solver::WeightedPoint;

    fn line(xs: &[f64]) -> Vec<Point> {
        xs.iter()
            .enumerate()
            .map(|(i, &x)| Point::new(i as u64, vec![x]))
            .collect()
    }

    #[test]
    fn opt_examples() {
        let o = DistanceOracle::euclidean();
        let u = line(&[0.0, 1.0, 10.0]);
        let all: Vec<&Point> = u.iter().collect();
        let s = brute_force_opt(&o, &all, 2, 1.0).unwrap();
        assert_eq!(s.cost, 1.0);
        assert_eq!(s.centers, vec![PointId(0), PointId(2)]);
        assert_eq!(brute_force_opt(&o, &all, 3, 1.0).unwrap().cost, 0.0);
        assert_eq!(brute_force_opt(&o, &all, 5, 1.0).unwrap().cost, 0.0);
    }

    #[test]
    fn one_median_matches_direct_scan() {
        let o = DistanceOracle::euclidean();
        let inst = WeightedInstance {
            entries: [(0.0, 5), (2.0, 1), (3.0, 1), (7.0, 4)]
                .iter()
                .enumerate()
                .map(|(i, &(x, w))| WeightedPoint {
                    point: Point::new(i as u64, vec![x]),
                    weight: w,
                })
                .collect(),
        };
        let direct = inst
            .entries
            .iter()
            .map(|c| {
                inst.entries
                    .iter()
                    .map(|e| e.weight as f64 * (e.point.coords[0] - c.point.coords[0]).abs())
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(brute_force_opt_weighted(&o, &inst, 1, 1.0).unwrap().cost, direct);
    }

    #[test]
    fn mu_gamma_examples() {
        let o = DistanceOracle::euclidean();
        let u = line(&[0.0, 1.0, 2.0, 100.0]);
        let all: Vec<&Point> = u.iter().collect();
        assert_eq!(brute_force_mu_gamma(&o, &all, 1, 0.75).unwrap(), 1.0);
        // ceil(0.5 * 4) = 2 <= k
        assert_eq!(brute_force_mu_gamma(&o, &all, 2, 0.5).unwrap(), 0.0);
        let lo = brute_force_mu_gamma(&o, &all, 1, 0.5).unwrap();
        let hi = brute_force_mu_gamma(&o, &all, 1, 1.0).unwrap();
        assert!(lo <= 1.0 && 1.0 <= hi);
        assert!(brute_force_mu_gamma(&o, &all, 1, 0.0).is_err());
    }

    #[test]
    fn guards() {
        let o = DistanceOracle::euclidean();
        let u: Vec<Point> = (0..17).map(|i| Point::new(i, vec![i as f64])).collect();
        let all: Vec<&Point> = u.iter().collect();
        assert_eq!(
            brute_force_opt(&o, &all, 2, 1.0).unwrap_err(),
            ClusterError::InstanceTooLarge { points: 17, k: 2 }
        );
        assert_eq!(binomial(16, 8), 12_870);
        assert_eq!(binomial(5, 0), 1);
    }
}
