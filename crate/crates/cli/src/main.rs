//! Command-line front end for the segment / polyline k-means pipeline.
//!
//! Reads segments from CSV (`x1,y1,x2,y2[,w]`) or JSON, or polylines from a
//! JSON array of vertex arrays, runs the coreset-then-optimize pipeline,
//! and writes the result as JSON (to stdout or `--output`). Exit codes:
//! 0 success, 2 invalid input, 3 resource limit exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use segmeans_core::io::{self, InputFormat};
use segmeans_core::pipeline::{coreset_only, run_pipeline, PipelineConfig, DEFAULT_CORESET_CONSTANT};
use segmeans_core::{Error, PolylineSpace, SegmentSpace, ShapeSpace, Weighted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "segmeans",
    about = "k-means clustering of planar segments and polylines under the squared Hausdorff distance",
    version
)]
struct Args {
    /// Input file (CSV or JSON).
    input: PathBuf,

    /// Number of cluster centers.
    #[arg(long)]
    k: usize,

    /// Target relative error, in (0, 1/2).
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,

    /// Target failure probability, in (0, 1/2).
    #[arg(long, default_value_t = 0.25)]
    delta: f64,

    /// Segments per object; values above 1 switch to polyline input.
    #[arg(long, default_value_t = 1)]
    ell: usize,

    /// Master seed for all random choices.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Write the result JSON here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Render the clustering as an SVG.
    #[arg(long)]
    svg: Option<PathBuf>,

    /// Sampling constant in the coreset size bound.
    #[arg(long, default_value_t = DEFAULT_CORESET_CONSTANT)]
    coreset_constant: f64,

    /// Optimizer restarts per repetition.
    #[arg(long)]
    restarts: Option<usize>,

    /// Maximum alternating-minimization iterations.
    #[arg(long)]
    max_iters: Option<usize>,

    /// Pipeline repetitions (default derived from delta).
    #[arg(long)]
    repetitions: Option<usize>,

    /// Emit the coreset JSON and stop.
    #[arg(long)]
    coreset_only: bool,

    /// Write the winning repetition's optimizer trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ResourceLimit(_) => ExitCode::from(3),
                Error::Internal(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn config_from(args: &Args) -> Result<PipelineConfig, Error> {
    let mut cfg = PipelineConfig::new(args.k, args.epsilon, args.delta)?;
    cfg.ell = args.ell;
    cfg.seed = args.seed;
    cfg.coreset_constant = args.coreset_constant;
    cfg.repetitions = args.repetitions;
    if let Some(r) = args.restarts {
        cfg.optimizer.restarts = r;
    }
    if let Some(m) = args.max_iters {
        cfg.optimizer.max_iters = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(args: &Args, value: &serde_json::Value) -> Result<(), Error> {
    match &args.output {
        Some(path) => io::write_json(value, path),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn run(args: &Args) -> Result<(), Error> {
    let format = match args.format {
        Some(Format::Csv) => InputFormat::Csv,
        Some(Format::Json) => InputFormat::Json,
        None => InputFormat::from_path(&args.input),
    };
    let cfg = config_from(args)?;

    // Polyline mode: either requested via --ell or implied by a JSON file
    // whose top level is an array of vertex arrays.
    let polyline_mode = args.ell > 1
        || (format == InputFormat::Json && {
            let text = std::fs::read_to_string(&args.input)?;
            serde_json::from_str::<serde_json::Value>(&text)
                .map(|v| v.is_array())
                .unwrap_or(false)
        });

    if polyline_mode {
        if format == InputFormat::Csv {
            return Err(Error::invalid("CSV input is not supported for ell > 1"));
        }
        let space = PolylineSpace::new(args.ell)?;
        let items = io::load_polylines(&args.input)?;
        if args.coreset_only {
            let coreset = coreset_only(&space, &items, &cfg)?;
            return emit(args, &io::polyline_coreset_json(&coreset, &items));
        }
        let result = run_pipeline(&space, &items, &cfg)?;
        eprintln!(
            "cost {:.6} after {} repetitions in {:.2?}",
            result.cost,
            result.repetition_costs.len(),
            result.wall_clock
        );
        finish(args, &space, &items, &result)
    } else {
        let space = SegmentSpace;
        let items = io::load_segments(&args.input, format)?;
        if args.coreset_only {
            let coreset = coreset_only(&space, &items, &cfg)?;
            return emit(args, &io::segment_coreset_json(&coreset, &items));
        }
        let result = run_pipeline(&space, &items, &cfg)?;
        eprintln!(
            "cost {:.6} after {} repetitions in {:.2?}",
            result.cost,
            result.repetition_costs.len(),
            result.wall_clock
        );
        finish(args, &space, &items, &result)
    }
}

fn finish<S: ShapeSpace>(
    args: &Args,
    space: &S,
    items: &[Weighted<S::Object>],
    result: &segmeans_core::PipelineResult<S::Object>,
) -> Result<(), Error> {
    if let Some(path) = &args.trace {
        io::write_trace(space, result, path)?;
    }
    if let Some(path) = &args.svg {
        io::emit_svg(space, items, result, path)?;
    }
    emit(args, &result.to_json(space))
}
