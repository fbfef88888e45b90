//! Runs a sliding-window stream against the dynamic structure, with optional
//! queries, integrity checks and a from-scratch static baseline.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use dynmedian::{
    cost_set, static_algo, weighted_solve, DistanceOracle, DynamicClusterer, DynamicParams, Point, PointId,
    SolverConfig, StaticParams, UniformSampler, WeightedInstance,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::{load_dataset, SyntheticSpec};
use crate::error::{BenchError, Result};
use crate::metrics::{MetricsRow, Op};
use crate::stream::{sliding_window_stream, UpdateKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Dataset(PathBuf),
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetMode {
    #[default]
    None,
    /// Adds `1 / n` to every distance, `n` the number of loaded points.
    InvN,
}

impl FromStr for OffsetMode {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(OffsetMode::None),
            "inv-n" => Ok(OffsetMode::InvN),
            _ => Err(BenchError::Config(format!("offset must be none or inv-n, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    #[default]
    None,
    /// Static recompute at every query point and after every `every` updates.
    Static { every: u64 },
}

impl FromStr for Baseline {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "none" {
            return Ok(Baseline::None);
        }
        s.strip_prefix("static:")
            .and_then(|q| q.parse::<u64>().ok())
            .filter(|&q| q > 0)
            .map(|every| Baseline::Static { every })
            .ok_or_else(|| BenchError::Config(format!("baseline must be none or static:<q> with q >= 1, got {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub source: Source,
    pub limit: Option<usize>,
    pub window: usize,
    pub k: usize,
    pub p: f64,
    pub phi: usize,
    pub beta: f64,
    pub epsilon: f64,
    pub queries: usize,
    pub offset: OffsetMode,
    pub baseline: Baseline,
    pub seed: u64,
    pub shuffle_seed: Option<u64>,
    /// Run the full integrity check after every update, not only at query points.
    pub check_every_update: bool,
}

impl ExperimentConfig {
    /// Defaults for everything except the source, window and `k`.
    pub fn new(source: Source, window: usize, k: usize) -> Self {
        ExperimentConfig {
            source,
            limit: None,
            window,
            k,
            p: 1.0,
            phi: 100,
            beta: 0.5,
            epsilon: 0.2,
            queries: 100,
            offset: OffsetMode::None,
            baseline: Baseline::None,
            seed: 0,
            shuffle_seed: None,
            check_every_update: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(BenchError::Config(m));
        if self.window == 0 {
            return fail("window must be at least 1".into());
        }
        if self.limit.is_some_and(|l| l < self.window) {
            return fail(format!(
                "limit {} is below the window {}",
                self.limit.unwrap_or(0),
                self.window
            ));
        }
        if !(self.p.is_finite() && self.p >= 1.0) {
            return fail(format!("p must be a finite real >= 1, got {}", self.p));
        }
        self.dynamic_params()
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))
    }

    fn dynamic_params(&self) -> DynamicParams {
        DynamicParams::new(self.k, self.phi)
            .with_beta(self.beta)
            .with_epsilon(self.epsilon)
            .with_seed(self.seed)
    }

    /// Loads or generates the points, truncates and optionally shuffles them.
    pub fn points(&self) -> Result<Vec<Point>> {
        let mut points = match &self.source {
            Source::Dataset(path) => load_dataset(path, self.limit)?,
            Source::Synthetic(spec) => {
                let mut pts = spec.generate(self.seed);
                pts.truncate(self.limit.unwrap_or(usize::MAX));
                pts
            }
        };
        if let Some(s) = self.shuffle_seed {
            points.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
            for (i, p) in points.iter_mut().enumerate() {
                p.id = PointId(i as u64);
            }
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseTotals {
    pub count: u64,
    pub wall_nanos: u64,
    pub distance_evals: u64,
    pub mean_distance_evals: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub points: usize,
    pub updates: u64,
    pub rebuilds: u64,
    pub integrity_checks: u64,
    pub max_layers: usize,
    pub phases: BTreeMap<String, PhaseTotals>,
    /// Distance evaluations per update, queries excluded.
    pub mean_update_distance_evals: f64,
    /// Median of dynamic query cost over baseline cost at shared query points
    /// with a nonzero baseline cost.
    pub median_cost_ratio: Option<f64>,
    pub timing_note: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<MetricsRow>,
    pub summary: Summary,
}

/// Query positions: after update `floor(j m / q)` for `j = 1..=q`, ascending.
pub fn query_positions(updates: u64, queries: usize) -> Vec<u64> {
    (1..=queries as u64).map(|j| j * updates / queries as u64).collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let points = config.points()?;
    run_on_points(config, points)
}

/// Runs the stream over already loaded points; the config's source is ignored.
pub fn run_on_points(config: &ExperimentConfig, points: Vec<Point>) -> Result<RunOutput> {
    config.validate()?;
    let mut oracle = DistanceOracle::euclidean();
    if config.offset == OffsetMode::InvN && !points.is_empty() {
        oracle = oracle.with_offset(1.0 / points.len() as f64)?;
    }
    let oracle = oracle.with_power(config.p)?;
    let mut state = DynamicClusterer::empty(config.dynamic_params(), oracle)?;

    let stream = sliding_window_stream(points.len(), config.window);
    let m = stream.len() as u64;
    let mut pending_queries = query_positions(m, config.queries).into_iter().peekable();
    let baseline_every = match config.baseline {
        Baseline::Static { every } => Some(every),
        Baseline::None => None,
    };

    let mut rows = Vec::with_capacity(stream.len() + 2 * config.queries);
    let mut checks = 0;
    let mut max_layers = 1;
    let mut query_number = 0u64;
    let mut ratios = Vec::new();
    let mut slots = points.into_iter().map(Some).collect::<Vec<_>>();

    let mut update_index = 0u64;
    loop {
        let mut query_cost = None;
        while pending_queries.next_if_eq(&update_index).is_some() {
            query_number += 1;
            let row = query_row(&state, config, update_index, query_number)?;
            query_cost = row.solution_cost;
            rows.push(row);
            if !config.check_every_update {
                check(&state, update_index, &mut checks)?;
            }
        }
        let periodic = baseline_every.is_some_and(|q| update_index > 0 && update_index.is_multiple_of(q));
        if baseline_every.is_some() && (query_cost.is_some() || periodic) {
            let row = baseline_row(&state, config, update_index)?;
            if let (Some(dynamic), Some(fresh)) = (query_cost, row.solution_cost) {
                if fresh > 0.0 {
                    ratios.push(dynamic / fresh);
                }
            }
            rows.push(row);
        }

        let Some(update) = stream.get(update_index as usize) else {
            break;
        };
        let before = state.oracle().evaluations();
        let started = Instant::now();
        let op = match update.kind {
            UpdateKind::Insert => {
                let point = slots[update.point].take().expect("each point is inserted once");
                state.insert(point)?;
                Op::Insert
            }
            UpdateKind::Delete => {
                state.delete(PointId(update.point as u64))?;
                Op::Delete
            }
        };
        let wall_nanos = started.elapsed().as_nanos() as u64;
        update_index += 1;
        max_layers = max_layers.max(state.t());
        rows.push(MetricsRow {
            update_index,
            op,
            wall_nanos,
            distance_evals_delta: state.oracle().evaluations() - before,
            t: state.t(),
            n: state.len(),
            solution_cost: None,
            centers: None,
        });
        if config.check_every_update {
            check(&state, update_index, &mut checks)?;
        }
    }

    let summary = summarize(
        config,
        &rows,
        slots.len(),
        state.rebuild_count(),
        checks,
        max_layers,
        ratios,
    );
    Ok(RunOutput { rows, summary })
}

fn check(state: &DynamicClusterer, update_index: u64, checks: &mut u64) -> Result<()> {
    *checks += 1;
    let report = state.integrity_check();
    if report.is_ok() {
        Ok(())
    } else {
        Err(BenchError::Invariant {
            update_index,
            report: report.to_string(),
        })
    }
}

/// Times instance extraction and the weighted solve; pricing on the full live set
/// uses a separate counter and is excluded.
fn query_row(
    state: &DynamicClusterer,
    config: &ExperimentConfig,
    update_index: u64,
    number: u64,
) -> Result<MetricsRow> {
    let before = state.oracle().evaluations();
    let started = Instant::now();
    let solution = if state.is_empty() {
        None
    } else {
        Some(state.solve(
            config.k,
            config.p,
            config.seed.wrapping_add(number),
            &SolverConfig::default(),
        )?)
    };
    let wall_nanos = started.elapsed().as_nanos() as u64;
    let distance_evals_delta = state.oracle().evaluations() - before;
    let (cost, centers) = match solution {
        None => (0.0, 0),
        Some(s) => {
            let live = state.points();
            let chosen: Vec<&Point> = s.centers.iter().filter_map(|&c| state.point(c)).collect();
            (
                cost_set(&state.oracle().fresh(), &chosen, &live, config.p)?,
                s.centers.len(),
            )
        }
    };
    Ok(MetricsRow {
        update_index,
        op: Op::Query,
        wall_nanos,
        distance_evals_delta,
        t: state.t(),
        n: state.len(),
        solution_cost: Some(cost),
        centers: Some(centers),
    })
}

/// Rebuilds a static hierarchy from scratch over the live set and solves its
/// weighted instance, on a fresh counter.
fn baseline_row(state: &DynamicClusterer, config: &ExperimentConfig, update_index: u64) -> Result<MetricsRow> {
    let oracle = state.oracle().fresh();
    let live = state.points();
    let started = Instant::now();
    let (t, cost, centers) = if live.is_empty() {
        (1, 0.0, 0)
    } else {
        let seed = config.seed ^ update_index.rotate_left(32);
        let params = StaticParams::new(config.k, config.phi, config.beta, seed);
        let layers = static_algo(&oracle, &live, &params, &mut UniformSampler::new(seed))?;
        let inst = WeightedInstance::from_assignment(&live, &layers.assignment)?;
        let solution = weighted_solve(&oracle, &inst, config.k, config.p, seed, &SolverConfig::default())?;
        let chosen: Vec<&Point> = solution.centers.iter().filter_map(|&c| state.point(c)).collect();
        let cost = cost_set(&oracle.fresh(), &chosen, &live, config.p)?;
        (layers.t(), cost, solution.centers.len())
    };
    Ok(MetricsRow {
        update_index,
        op: Op::Baseline,
        wall_nanos: started.elapsed().as_nanos() as u64,
        distance_evals_delta: oracle.evaluations(),
        t,
        n: live.len(),
        solution_cost: Some(cost),
        centers: Some(centers),
    })
}

fn summarize(
    config: &ExperimentConfig,
    rows: &[MetricsRow],
    points: usize,
    rebuilds: u64,
    integrity_checks: u64,
    max_layers: usize,
    mut ratios: Vec<f64>,
) -> Summary {
    let mut phases: BTreeMap<String, PhaseTotals> = BTreeMap::new();
    for row in rows {
        let name = serde_json::to_value(row.op).expect("op serializes");
        let entry = phases.entry(name.as_str().unwrap_or_default().to_string()).or_default();
        entry.count += 1;
        entry.wall_nanos += row.wall_nanos;
        entry.distance_evals += row.distance_evals_delta;
    }
    for p in phases.values_mut() {
        p.mean_distance_evals = p.distance_evals as f64 / p.count as f64;
    }
    let (updates, update_evals) = rows
        .iter()
        .filter(|r| matches!(r.op, Op::Insert | Op::Delete))
        .fold((0u64, 0u64), |(c, e), r| (c + 1, e + r.distance_evals_delta));
    ratios.sort_by(f64::total_cmp);
    Summary {
        config: config.clone(),
        points,
        updates,
        rebuilds,
        integrity_checks,
        max_layers,
        phases,
        mean_update_distance_evals: if updates == 0 { 0.0 } else { update_evals as f64 / updates as f64 },
        median_cost_ratio: median(&ratios),
        timing_note: "query time covers weighted-instance extraction and the weighted solve; pricing the answer on the live set is excluded",
    }
}

/// Median of sorted values; mean of the middle pair for even lengths.
pub fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(window: usize, count: usize) -> ExperimentConfig {
        let spec = SyntheticSpec {
            components: 3,
            dim: 2,
            count,
        };
        let mut c = ExperimentConfig::new(Source::Synthetic(spec), window, 2);
        c.phi = 4;
        c.queries = 5;
        c
    }

    #[test]
    fn parses_knobs() {
        assert_eq!("inv-n".parse::<OffsetMode>().unwrap(), OffsetMode::InvN);
        assert!("half".parse::<OffsetMode>().is_err());
        assert_eq!("static:25".parse::<Baseline>().unwrap(), Baseline::Static { every: 25 });
        assert_eq!("none".parse::<Baseline>().unwrap(), Baseline::None);
        for bad in ["static:0", "static:", "static:x", "periodic"] {
            assert!(bad.parse::<Baseline>().is_err(), "{bad}");
        }
    }

    #[test]
    fn validation() {
        assert!(small(10, 40).validate().is_ok());
        assert!(small(0, 40).validate().is_err());
        let mut c = small(10, 40);
        c.limit = Some(5);
        assert!(c.validate().is_err());
        c.limit = Some(10);
        assert!(c.validate().is_ok());
        c.beta = 1.5;
        assert!(matches!(c.validate(), Err(BenchError::Config(_))));
    }

    #[test]
    fn query_positions_even() {
        assert_eq!(query_positions(10, 4), vec![2, 5, 7, 10]);
        assert!(query_positions(10, 0).is_empty());
        assert_eq!(query_positions(2, 3), vec![0, 1, 2]);
    }

    #[test]
    fn zero_queries_run_no_solver() {
        let mut c = small(10, 40);
        c.queries = 0;
        let out = run_experiment(&c).unwrap();
        assert_eq!(out.rows.len(), 80);
        assert!(out.rows.iter().all(|r| r.solution_cost.is_none()));
        assert_eq!(out.summary.integrity_checks, 0);
        assert!(out.rows.windows(2).all(|w| w[0].update_index < w[1].update_index));
        assert!(out.rows.iter().all(|r| r.n <= 10));
    }

    #[test]
    fn queries_and_baselines_interleave() {
        let mut c = small(15, 60);
        c.baseline = Baseline::Static { every: 50 };
        c.offset = OffsetMode::InvN;
        let out = run_experiment(&c).unwrap();
        let queries: Vec<&MetricsRow> = out.rows.iter().filter(|r| r.op == Op::Query).collect();
        assert_eq!(queries.len(), 5);
        assert_eq!(
            queries.iter().map(|r| r.update_index).collect::<Vec<_>>(),
            vec![24, 48, 72, 96, 120]
        );
        // the last query sees an empty structure
        assert_eq!(queries[4].solution_cost, Some(0.0));
        let baselines = out.rows.iter().filter(|r| r.op == Op::Baseline).count();
        // 5 query points plus updates 50 and 100
        assert_eq!(baselines, 7);
        assert_eq!(out.summary.integrity_checks, 5);
        assert!(out.summary.median_cost_ratio.is_some());
        assert_eq!(out.summary.updates, 120);
        assert_eq!(out.summary.phases["query"].count, 5);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[1.0, 2.0, 9.0]), Some(2.0));
        assert_eq!(median(&[1.0, 2.0, 4.0, 9.0]), Some(3.0));
    }
}
