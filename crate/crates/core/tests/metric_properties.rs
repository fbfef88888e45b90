mod common;

use common::uniform_cloud;
use dynmedian::metric::rho_metric_check;
use dynmedian::{DistanceOracle, Point};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn powered_euclidean_is_a_rho_metric(seed in 0u64..100_000, dim in 1usize..6, p in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let pts = uniform_cloud(seed, dim, 30);
        let o = DistanceOracle::euclidean();
        let triples: Vec<(&Point, &Point, &Point)> = (0..28).map(|i| (&pts[i], &pts[i + 1], &pts[i + 2])).collect();
        prop_assert!(rho_metric_check(&o, &triples, p).unwrap());
    }

    #[test]
    fn symmetric_nonnegative_and_offset(seed in 0u64..100_000, offset in 0.0f64..5.0) {
        let pts = uniform_cloud(seed, 3, 2);
        let o = DistanceOracle::euclidean().with_offset(offset).unwrap();
        let ab = o.distance(&pts[0], &pts[1]).unwrap();
        let ba = o.distance(&pts[1], &pts[0]).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ab >= offset);
        let twin = Point::new(99, pts[0].coords.clone());
        prop_assert_eq!(o.distance(&pts[0], &twin).unwrap(), offset);
    }

    #[test]
    fn counter_matches_call_count(seed in 0u64..100_000, calls in 0usize..200) {
        let pts = uniform_cloud(seed, 2, 10);
        let o = DistanceOracle::euclidean();
        for c in 0..calls {
            let (a, b) = (c % 10, (c * 7 + 1) % 10);
            if a != b {
                o.distance(&pts[a], &pts[b]).unwrap();
            }
        }
        let expected = (0..calls).filter(|c| c % 10 != (c * 7 + 1) % 10).count() as u64;
        prop_assert_eq!(o.evaluations(), expected);
    }
}
