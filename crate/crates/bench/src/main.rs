use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use dynmedian_bench::{
    run_experiment, write_csv, Baseline, BenchError, ExperimentConfig, OffsetMode, Source, SyntheticSpec,
};

/// Sliding-window benchmark for the dynamic k-median structure.
///
/// Writes one CSV row per update, query and baseline recompute. With `--out`, a
/// run summary lands next to the CSV as `<stem>.summary.json`; otherwise the CSV
/// goes to stdout and the summary to stderr.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// Numeric text file, one point per line.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    dataset: Option<PathBuf>,
    /// Gaussian mixture `g:<components>:<dim>:<count>`.
    #[arg(long)]
    synthetic: Option<String>,
    /// Keep only the first N points.
    #[arg(long)]
    limit: Option<usize>,
    /// Sliding-window length.
    #[arg(long)]
    window: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Centers sampled per layer.
    #[arg(long, default_value_t = 100)]
    phi: usize,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    /// `none` or `inv-n`.
    #[arg(long, default_value = "none")]
    offset: String,
    /// `none` or `static:<q>`.
    #[arg(long, default_value = "none")]
    baseline: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shuffle the points before streaming them.
    #[arg(long)]
    shuffle_seed: Option<u64>,
    /// Check every invariant after each update rather than at query points only.
    #[arg(long)]
    check_every_update: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Args {
    fn config(&self) -> Result<ExperimentConfig, BenchError> {
        let source = match (&self.dataset, &self.synthetic) {
            (Some(path), _) => Source::Dataset(path.clone()),
            (None, Some(spec)) => Source::Synthetic(spec.parse::<SyntheticSpec>()?),
            (None, None) => return Err(BenchError::Config("one of --dataset or --synthetic is required".into())),
        };
        let mut config = ExperimentConfig::new(source, self.window, self.k);
        config.limit = self.limit;
        config.p = self.p;
        config.phi = self.phi;
        config.beta = self.beta;
        config.epsilon = self.epsilon;
        config.queries = self.queries;
        config.offset = self.offset.parse::<OffsetMode>()?;
        config.baseline = self.baseline.parse::<Baseline>()?;
        config.seed = self.seed;
        config.shuffle_seed = self.shuffle_seed;
        config.check_every_update = self.check_every_update;
        config.validate()?;
        Ok(config)
    }
}

fn write_to(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), BenchError> {
    let wrap = |source| BenchError::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    body(&mut w).and_then(|_| w.flush()).map_err(wrap)
}

fn run(args: &Args) -> Result<(), BenchError> {
    let config = args.config()?;
    let output = run_experiment(&config)?;
    let summary = serde_json::to_string_pretty(&output.summary).expect("summary serializes");
    match &args.out {
        Some(path) => {
            write_to(path, |w| write_csv(&output.rows, w).map_err(io::Error::from))?;
            write_to(&path.with_extension("summary.json"), |w| writeln!(w, "{summary}"))?;
        }
        None => {
            write_csv(&output.rows, io::stdout().lock()).map_err(|e| BenchError::Write {
                path: "<stdout>".into(),
                source: e.into(),
            })?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
