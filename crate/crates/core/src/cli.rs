//! Command-line front end. Exit codes: 0 success, 2 usage or input error,
//! 3 tracking failure (partial output is still written).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::baseline::{run_algorithm, Algorithm};
use crate::config::{canonical, Config};
use crate::io::{self, INIT_POINTS};
use crate::mask::Mask;
use crate::metrics::{aggregate, confusion, VideoSummary};
use crate::phantom::{generate, preset, PhantomSpec};
use crate::tracker::TrackError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TRACKING: i32 = 3;

/// Env var capping the number of concurrent tracking sessions in a sweep.
pub const THREADS_ENV: &str = "ADPAC_THREADS";

pub const SWEEP_HEADER: &str = "value,mean_dice,mean_sensitivity,mean_specificity";

#[derive(Debug, Parser)]
#[command(name = "adpac", version, about = "Adaptive polar active contour tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic vessel video with ground truth.
    Phantom {
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        preset: Option<String>,
        /// key=value phantom manifest instead of a preset.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        frames: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Track a contour through a directory of frames.
    Track {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        init: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "adpac")]
        algo: String,
        /// Output prefix; writes PREFIX.contours.jsonl and PREFIX.diagnostics.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score tracked contours against reference masks.
    Eval {
        #[arg(long)]
        contours: PathBuf,
        #[arg(long)]
        masks: PathBuf,
        /// Metrics CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Track and score a preset phantom for each value of one parameter.
    Sweep {
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, default_value = "good-oval")]
        preset: String,
        #[arg(long, default_value_t = 100)]
        frames: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "adpac")]
        algo: String,
        /// Sweep CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

fn tracking(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_TRACKING,
        message: message.to_string(),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Phantom {
            preset,
            spec,
            frames,
            seed,
            out,
        } => cmd_phantom(preset.as_deref(), spec.as_deref(), frames, seed, &out),
        Command::Track {
            frames,
            init,
            config,
            algo,
            out,
        } => cmd_track(&frames, &init, config.as_deref(), &algo, &out),
        Command::Eval { contours, masks, out } => cmd_eval(&contours, &masks, out.as_deref()),
        Command::Sweep {
            param,
            values,
            preset,
            frames,
            seed,
            config,
            algo,
            out,
        } => cmd_sweep(&param, &values, &preset, frames, seed, config.as_deref(), &algo, out.as_deref()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("adpac: {}", f.message);
            f.code
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    match path {
        Some(p) => Config::load(p).map_err(usage),
        None => Ok(Config::default()),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_phantom(
    name: Option<&str>,
    spec_file: Option<&Path>,
    frames: usize,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), Failure> {
    let mut spec = match (name, spec_file) {
        (Some(n), _) => preset(n).map_err(usage)?,
        (None, Some(p)) => PhantomSpec::load_manifest(p).map_err(usage)?,
        (None, None) => return Err(usage("need --preset or --spec")),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    if frames == 0 {
        return Err(usage("--frames must be at least 1"));
    }
    let video = generate(&spec, frames).map_err(usage)?;
    io::write_phantom(out, &spec, &video).map_err(usage)?;
    eprintln!("wrote {frames} frames to {}", out.display());
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_track(frames: &Path, init: &Path, config: Option<&Path>, algo: &str, out: &Path) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let algo: Algorithm = algo.parse().map_err(usage)?;
    let outline = io::read_init(init).map_err(usage)?;
    let video = io::load_frames(frames).map_err(usage)?;
    let result = match run_algorithm(algo, video, &outline, &cfg.adpac, &cfg.classic) {
        Ok(r) => r,
        Err(e @ (TrackError::InvalidInit(_) | TrackError::InvalidParams(_))) => return Err(usage(e)),
        Err(e) => return Err(tracking(e)),
    };
    io::write_contours(&with_suffix(out, ".contours.jsonl"), &result.contours).map_err(usage)?;
    io::write_diagnostics(&with_suffix(out, ".diagnostics.csv"), &result.reports).map_err(usage)?;
    match result.error {
        Some((frame, e)) => Err(tracking(format!(
            "frame {frame}: {e}; kept {} tracked frames",
            result.contours.len()
        ))),
        None => Ok(()),
    }
}

fn score(contours: &[crate::contour::PolarContour], masks: &[Mask]) -> Result<VideoSummary, Failure> {
    if contours.len() != masks.len() {
        return Err(usage(format!("{} contours but {} masks", contours.len(), masks.len())));
    }
    let per_frame = contours
        .iter()
        .zip(masks)
        .map(|(c, m)| {
            let a = c.rasterize(m.width(), m.height()).map_err(usage)?;
            confusion(&a, m).map_err(usage)
        })
        .collect::<Result<Vec<_>, _>>()?;
    aggregate(&per_frame).map_err(usage)
}

fn cmd_eval(contours: &Path, masks: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let contours = io::read_contours(contours).map_err(usage)?;
    let masks = io::load_masks(masks).map_err(usage)?;
    let summary = score(&contours, &masks)?;
    emit(out, &summary.to_csv())?;
    eprintln!(
        "frames={} mean_dice={:.4} min_dice={:.4} mean_sensitivity={:.4} mean_specificity={:.4}",
        summary.frames.len(),
        summary.dice.mean,
        summary.dice.min,
        summary.sensitivity.mean,
        summary.specificity.mean
    );
    Ok(())
}

/// One row of a sweep: the value as given plus the three mean scores.
pub fn sweep_row(value: &str, s: &VideoSummary) -> String {
    format!("{value},{:.6},{:.6},{:.6}", s.dice.mean, s.sensitivity.mean, s.specificity.mean)
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(usage)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    param: &str,
    values: &str,
    name: &str,
    frames: usize,
    seed: Option<u64>,
    config: Option<&Path>,
    algo: &str,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if canonical(param).is_none() {
        return Err(usage(format!("unknown parameter `{param}`")));
    }
    let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(usage("--values is empty"));
    }
    let base = load_config(config)?;
    let configs = values
        .iter()
        .map(|v| {
            let mut c = base;
            c.set(param, v).map_err(usage)?;
            c.validate().map_err(usage)?;
            Ok(c)
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let algo: Algorithm = algo.parse().map_err(usage)?;
    let mut spec = preset(name).map_err(usage)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if frames == 0 {
        return Err(usage("--frames must be at least 1"));
    }
    // one realization shared by every value
    let video = generate(&spec, frames).map_err(usage)?;
    let outline = spec.outline(0, INIT_POINTS, |_| 0.0);
    let rows = thread_pool()?.install(|| {
        configs
            .par_iter()
            .map(|c| {
                let r = run_algorithm(algo, video.frames.clone(), &outline, &c.adpac, &c.classic).map_err(tracking)?;
                if let Some((frame, e)) = r.error {
                    return Err(tracking(format!("frame {frame}: {e}")));
                }
                score(&r.contours, &video.masks)
            })
            .collect::<Vec<_>>()
    });
    let mut csv = format!("{SWEEP_HEADER}\n");
    for (v, row) in values.iter().zip(rows) {
        csv.push_str(&sweep_row(v, &row?));
        csv.push('\n');
    }
    emit(out, &csv)
}
