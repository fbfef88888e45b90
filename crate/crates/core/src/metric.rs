//! Points, instrumented distance evaluation and the set-level primitives built on it
//! (distance to a set, balls, relaxed triangle checks).
//!
//! Every algorithm in the crate measures closeness through [`DistanceOracle::dissimilarity`],
//! which is the base distance (plus an optional additive offset) raised to the oracle's power
//! `p`. With `p = 1` this is k-median over the base metric; with `p = 2` it is k-means. For
//! `p > 1` the dissimilarity only satisfies the triangle inequality up to a factor
//! `rho = 2^(p-1)`.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{ClusterError, Result};

/// Identifier of a point. Unique among the live points of a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u64);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for PointId {
    fn from(v: u64) -> Self {
        PointId(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub id: PointId,
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(id: impl Into<PointId>, coords: Vec<f64>) -> Self {
        Point { id: id.into(), coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Rejects NaN and infinite coordinates.
    pub fn validate(&self) -> Result<()> {
        if self.coords.iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(ClusterError::NonFiniteCoordinate(self.id))
        }
    }
}

/// Caller-supplied symmetric base metric.
pub type MetricFn = dyn Fn(&Point, &Point) -> f64 + Send + Sync;

#[derive(Clone)]
enum BaseMetric {
    Euclidean,
    Custom(Arc<MetricFn>),
}

/// The relaxation factor of the triangle inequality satisfied by `d^p`.
pub fn rho_for_power(p: f64) -> f64 {
    2f64.powf(p - 1.0)
}

/// Distance evaluation with an evaluation counter.
///
/// The counter increments once per base-metric evaluation, so it serves as a
/// hardware-independent cost measure. Pairs with the same id are at distance
/// zero and never reach the base metric.
pub struct DistanceOracle {
    base: BaseMetric,
    offset: f64,
    power: f64,
    evals: AtomicU64,
}

impl fmt::Debug for DistanceOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.base {
            BaseMetric::Euclidean => "euclidean",
            BaseMetric::Custom(_) => "custom",
        };
        f.debug_struct("DistanceOracle")
            .field("base", &base)
            .field("offset", &self.offset)
            .field("power", &self.power)
            .field("evals", &self.evaluations())
            .finish()
    }
}

impl Default for DistanceOracle {
    fn default() -> Self {
        Self::euclidean()
    }
}

impl DistanceOracle {
    pub fn euclidean() -> Self {
        Self::with_base(BaseMetric::Euclidean)
    }

    /// An oracle over a caller-supplied metric. The function must be symmetric,
    /// nonnegative and satisfy the triangle inequality.
    pub fn custom<F>(metric: F) -> Self
    where
        F: Fn(&Point, &Point) -> f64 + Send + Sync + 'static,
    {
        Self::with_base(BaseMetric::Custom(Arc::new(metric)))
    }

    fn with_base(base: BaseMetric) -> Self {
        DistanceOracle {
            base,
            offset: 0.0,
            power: 1.0,
            evals: AtomicU64::new(0),
        }
    }

    /// Adds `offset` to the distance of every pair of distinct points.
    pub fn with_offset(mut self, offset: f64) -> Result<Self> {
        if !offset.is_finite() || offset < 0.0 {
            return Err(ClusterError::InvalidOffset(offset));
        }
        self.offset = offset;
        Ok(self)
    }

    /// Sets the power `p` of the working dissimilarity `d^p`.
    pub fn with_power(mut self, power: f64) -> Result<Self> {
        check_power(power)?;
        self.power = power;
        Ok(self)
    }

    /// Same metric, offset and power with a zeroed counter.
    pub fn fresh(&self) -> Self {
        DistanceOracle {
            base: self.base.clone(),
            offset: self.offset,
            power: self.power,
            evals: AtomicU64::new(0),
        }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// `2^(p-1)` for the oracle's power.
    pub fn rho(&self) -> f64 {
        rho_for_power(self.power)
    }

    /// Number of base-metric evaluations so far.
    pub fn evaluations(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn reset_evaluations(&self) {
        self.evals.store(0, Ordering::Relaxed);
    }

    /// Base distance plus offset. Counts one evaluation for distinct ids.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        if x.dim() != y.dim() {
            return Err(ClusterError::DimensionMismatch {
                expected: x.dim(),
                found: y.dim(),
            });
        }
        Ok(self.eval(x, y, true))
    }

    /// `distance(x, y)^p`.
    pub fn powered_distance(&self, x: &Point, y: &Point, p: f64) -> Result<f64> {
        check_power(p)?;
        let d = self.distance(x, y)?;
        Ok(raise(d, p))
    }

    /// The working dissimilarity `distance(x, y)^power`. Counted.
    ///
    /// Callers guarantee equal dimensions; points entering a clustering are
    /// validated at the boundary.
    #[inline]
    pub fn dissimilarity(&self, x: &Point, y: &Point) -> f64 {
        raise(self.eval(x, y, true), self.power)
    }

    /// Like [`dissimilarity`](Self::dissimilarity) but with an explicit power.
    #[inline]
    pub(crate) fn dissimilarity_pow(&self, x: &Point, y: &Point, p: f64) -> f64 {
        raise(self.eval(x, y, true), p)
    }

    /// Uncounted dissimilarity, for verification code that must not perturb the counter.
    pub fn dissimilarity_unmetered(&self, x: &Point, y: &Point) -> f64 {
        raise(self.eval(x, y, false), self.power)
    }

    fn eval(&self, x: &Point, y: &Point, count: bool) -> f64 {
        if x.id == y.id {
            return 0.0;
        }
        debug_assert_eq!(x.dim(), y.dim(), "points {} and {} differ in dimension", x.id, y.id);
        if count {
            self.evals.fetch_add(1, Ordering::Relaxed);
        }
        let d = match &self.base {
            BaseMetric::Euclidean => euclidean(&x.coords, &y.coords),
            BaseMetric::Custom(f) => {
                let d = f(x, y);
                debug_assert!(
                    (d - f(y, x)).abs() <= 1e-9 * d.abs().max(1.0),
                    "custom metric is not symmetric on ({}, {})",
                    x.id,
                    y.id
                );
                d
            }
        };
        debug_assert!(d >= 0.0 && !d.is_nan(), "negative or NaN distance {d}");
        d + self.offset
    }
}

pub(crate) fn check_power(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(ClusterError::InvalidPower(p))
    }
}

#[inline]
pub(crate) fn raise(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}

#[inline]
fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance from `x` to the nearest point of `set`, with the id of that point.
/// Ties go to the smallest id.
pub fn dist_to_set(oracle: &DistanceOracle, x: &Point, set: &[&Point]) -> Result<(f64, PointId)> {
    nearest(oracle, x, set).ok_or(ClusterError::Empty("set"))
}

pub(crate) fn nearest(oracle: &DistanceOracle, x: &Point, set: &[&Point]) -> Option<(f64, PointId)> {
    let mut best: Option<(f64, PointId)> = None;
    for y in set {
        let d = oracle.dissimilarity(x, y);
        best = match best {
            Some((bd, bid)) if bd < d || (bd == d && bid < y.id) => Some((bd, bid)),
            _ => Some((d, y.id)),
        };
    }
    best
}

/// Ids of the points of `universe` within `radius` of `centers`.
pub fn ball(oracle: &DistanceOracle, centers: &[&Point], radius: f64, universe: &[&Point]) -> Vec<PointId> {
    universe
        .iter()
        .filter(|u| matches!(nearest(oracle, u, centers), Some((d, _)) if d <= radius))
        .map(|u| u.id)
        .collect()
}

/// True iff `d^p(x,y) <= 2^(p-1) (d^p(x,z) + d^p(z,y))` on every triple `(x, y, z)`.
pub fn rho_metric_check(oracle: &DistanceOracle, triples: &[(&Point, &Point, &Point)], p: f64) -> Result<bool> {
    check_power(p)?;
    let rho = rho_for_power(p);
    for (x, y, z) in triples {
        let xy = oracle.powered_distance(x, y, p)?;
        let xz = oracle.powered_distance(x, z, p)?;
        let zy = oracle.powered_distance(z, y, p)?;
        let bound = rho * (xz + zy);
        if xy > bound + 1e-12 * bound.max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}
