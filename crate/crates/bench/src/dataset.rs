//! Point sources: numeric text files and a seeded Gaussian-mixture generator.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use dynmedian::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Reads one point per line, fields separated by commas or whitespace. Blank lines
/// and lines starting with `#` are skipped. Ids follow row order from 0.
pub fn load_dataset(path: &Path, limit: Option<usize>) -> Result<Vec<Point>> {
    let text = fs::read_to_string(path).map_err(|source| BenchError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_rows(&text, limit).map_err(|(line, message)| BenchError::Malformed {
        path: path.to_path_buf(),
        line,
        message,
    })
}

/// Parses dataset text. Errors carry the 1-based line number.
pub fn parse_rows(text: &str, limit: Option<usize>) -> std::result::Result<Vec<Point>, (usize, String)> {
    let mut points = Vec::new();
    let mut dim = None;
    for (n, raw) in text.lines().enumerate() {
        if limit.is_some_and(|l| points.len() >= l) {
            break;
        }
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(|f| match f64::from_str(f) {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err((n + 1, format!("not a finite number: {f:?}"))),
            })
            .collect::<std::result::Result<Vec<f64>, _>>()?;
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err((n + 1, format!("expected {d} fields, found {}", coords.len())));
            }
            _ => {}
        }
        points.push(Point::new(points.len() as u64, coords));
    }
    Ok(points)
}

/// `g:<components>:<dim>:<count>`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub components: usize,
    pub dim: usize,
    pub count: usize,
}

impl FromStr for SyntheticSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            BenchError::Config(format!(
                "synthetic spec must look like g:<components>:<dim>:<count>, got {s:?}"
            ))
        };
        let fields: Vec<&str> = s.split(':').collect();
        let [kind, components, dim, count] = fields[..] else {
            return Err(bad());
        };
        if kind != "g" {
            return Err(bad());
        }
        let parse = |f: &str| f.parse::<usize>().ok().filter(|&v| v > 0).ok_or_else(bad);
        Ok(SyntheticSpec {
            components: parse(components)?,
            dim: parse(dim)?,
            count: parse(count)?,
        })
    }
}

impl SyntheticSpec {
    /// Unit-variance blobs around means drawn uniformly from `[0, 100)^dim`.
    pub fn generate(&self, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let means: Vec<Vec<f64>> = (0..self.components)
            .map(|_| (0..self.dim).map(|_| rng.random_range(0.0..100.0)).collect())
            .collect();
        let noise = Normal::new(0.0, 1.0).expect("unit normal");
        (0..self.count)
            .map(|i| {
                let mean = &means[rng.random_range(0..self.components)];
                Point::new(i as u64, mean.iter().map(|m| m + noise.sample(&mut rng)).collect())
            })
            .collect()
    }
}
