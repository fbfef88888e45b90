mod common;

use common::{refs, uniform_cloud};
use dynmedian::oracle::brute_force_opt;
use dynmedian::solver::WeightedPoint;
use dynmedian::{
    cost_set, cost_weighted, weighted_solve, DistanceOracle, DynamicClusterer, DynamicParams, Point, SolverConfig,
    WeightedInstance,
};
use itertools::Itertools;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn weighted_cloud(seed: u64, count: usize) -> WeightedInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    WeightedInstance {
        entries: uniform_cloud(seed, 2, count)
            .into_iter()
            .map(|point| WeightedPoint {
                point,
                weight: rng.random_range(1..=9),
            })
            .collect(),
    }
}

/// Weighted optimum by plain enumeration with Euclidean distances computed here.
fn enumerate_opt(inst: &WeightedInstance, k: usize, p: f64) -> f64 {
    let pts = &inst.entries;
    let dist = |a: &Point, b: &Point| -> f64 {
        a.coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
            .powf(p)
    };
    (0..pts.len())
        .combinations(k)
        .map(|combo| {
            pts.iter()
                .map(|e| {
                    e.weight as f64
                        * combo
                            .iter()
                            .map(|&c| dist(&e.point, &pts[c].point))
                            .fold(f64::INFINITY, f64::min)
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn twenty_weighted_points_within_local_search_bound() {
    let o = DistanceOracle::euclidean();
    for seed in 0..50 {
        let inst = weighted_cloud(1000 + seed, 20);
        let opt = enumerate_opt(&inst, 3, 1.0);
        let sol = weighted_solve(&o, &inst, 3, 1.0, seed, &SolverConfig::default()).unwrap();
        assert!(sol.cost <= 5.5 * opt + 1e-9, "seed {seed}: {} vs opt {opt}", sol.cost);
        assert!(sol.centers.len() <= 3);
    }
}

#[test]
fn separated_blobs_match_brute_force() {
    let o = DistanceOracle::euclidean();
    let pts: Vec<Point> = [0.0, 0.5, 1.0, 50.0, 50.5, 51.0]
        .iter()
        .enumerate()
        .map(|(i, &x)| Point::new(i as u64, vec![x, 0.0]))
        .collect();
    let opt = brute_force_opt(&o, &refs(&pts), 2, 1.0).unwrap();
    for seed in 0..10 {
        let sol = weighted_solve(
            &o,
            &WeightedInstance::unit(&refs(&pts)),
            2,
            1.0,
            seed,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(sol.cost, opt.cost);
        assert_eq!(sol.centers, opt.centers);
    }
}

#[test]
fn repeated_queries_are_identical() {
    let pts = uniform_cloud(21, 2, 250);
    let s =
        DynamicClusterer::preprocess(pts, DynamicParams::new(4, 10).with_seed(2), DistanceOracle::euclidean()).unwrap();
    let a = s.query(4, 1.0, 99).unwrap();
    let b = s.query(4, 1.0, 99).unwrap();
    assert_eq!(a, b);
    let small = DynamicClusterer::preprocess(
        uniform_cloud(1, 2, 3),
        DynamicParams::new(4, 10),
        DistanceOracle::euclidean(),
    )
    .unwrap();
    assert_eq!(small.query(4, 1.0, 0).unwrap().solution.cost, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn local_search_never_worse_than_seeding(seed in 0u64..10_000, count in 2usize..60, k in 1usize..6, p in 1.0f64..3.0) {
        let o = DistanceOracle::euclidean();
        let inst = weighted_cloud(seed, count);
        let seeded = weighted_solve(&o, &inst, k, p, seed, &SolverConfig { max_swaps: 0, ..SolverConfig::default() }).unwrap();
        let full = weighted_solve(&o, &inst, k, p, seed, &SolverConfig::default()).unwrap();
        prop_assert!(full.cost <= seeded.cost);
        prop_assert!(full.centers.len() <= k);
        let recomputed = cost_weighted(&o, &full.centers, &inst, p).unwrap();
        prop_assert!((recomputed - full.cost).abs() <= 1e-9 * full.cost.max(1.0));
    }

    #[test]
    fn table_and_on_demand_agree(seed in 0u64..10_000, count in 2usize..40, k in 1usize..5) {
        let o = DistanceOracle::euclidean();
        let inst = weighted_cloud(seed, count);
        let a = weighted_solve(&o, &inst, k, 1.0, seed, &SolverConfig::default()).unwrap();
        let b = weighted_solve(&o, &inst, k, 1.0, seed, &SolverConfig { table_limit: 0, ..SolverConfig::default() }).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn unit_weights_price_like_cost_set(seed in 0u64..10_000, count in 1usize..50, centers in 1usize..6, p in 1.0f64..3.0) {
        let o = DistanceOracle::euclidean();
        let pts = uniform_cloud(seed, 3, count);
        let all = refs(&pts);
        let chosen: Vec<&Point> = all.iter().copied().take(centers).collect();
        let ids: Vec<_> = chosen.iter().map(|c| c.id).collect();
        let direct = cost_set(&o, &chosen, &all, p).unwrap();
        let weighted = cost_weighted(&o, &ids, &WeightedInstance::unit(&all), p).unwrap();
        prop_assert_eq!(direct.to_bits(), weighted.to_bits());
    }
}
