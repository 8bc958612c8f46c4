//! File formats: initial outlines, contour streams, diagnostics and
//! phantom directories.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::{ContourError, ContourRecord, Point, PolarContour};
use crate::image::{list_frames, Frame, ImageError};
use crate::mask::Mask;
use crate::phantom::{Phantom, PhantomSpec};
use crate::tracker::FrameReport;

/// Vertices written to a phantom's `init.json`.
pub const INIT_POINTS: usize = 24;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(io_err(path))
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

/// `{"points": [[x, y], …]}` in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitFile {
    pub points: Vec<[f64; 2]>,
}

impl InitFile {
    pub fn from_points(points: &[Point]) -> Self {
        Self {
            points: points.iter().map(|p| [p.x, p.y]).collect(),
        }
    }

    pub fn to_points(&self) -> Vec<Point> {
        self.points.iter().map(|p| Point::new(p[0], p[1])).collect()
    }
}

pub fn read_init(path: &Path) -> Result<Vec<Point>, IoError> {
    let text = read(path)?;
    let init: InitFile = serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        line: source.line(),
        source,
    })?;
    Ok(init.to_points())
}

pub fn write_init(path: &Path, points: &[Point]) -> Result<(), IoError> {
    let text = serde_json::to_string(&InitFile::from_points(points)).expect("plain data serializes");
    write(path, &(text + "\n"))
}

/// One JSON object per line, frames numbered from 1.
pub fn contours_jsonl(contours: &[PolarContour]) -> String {
    let mut out = String::new();
    for (i, c) in contours.iter().enumerate() {
        out.push_str(&serde_json::to_string(&ContourRecord::new(i + 1, c)).expect("plain data serializes"));
        out.push('\n');
    }
    out
}

pub fn write_contours(path: &Path, contours: &[PolarContour]) -> Result<(), IoError> {
    write(path, &contours_jsonl(contours))
}

pub fn read_contours(path: &Path) -> Result<Vec<PolarContour>, IoError> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ContourRecord = serde_json::from_str(line).map_err(|source| IoError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(rec.to_contour()?);
    }
    Ok(out)
}

pub fn diagnostics_csv(reports: &[FrameReport]) -> String {
    let mut out = String::from(FrameReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn write_diagnostics(path: &Path, reports: &[FrameReport]) -> Result<(), IoError> {
    write(path, &diagnostics_csv(reports))
}

/// Writes `frames/`, `masks/`, `truth.jsonl`, `manifest.txt` and an
/// `init.json` outline of the first true contour under `dir`.
pub fn write_phantom(dir: &Path, spec: &PhantomSpec, phantom: &Phantom) -> Result<(), IoError> {
    let (frames, masks) = (dir.join("frames"), dir.join("masks"));
    for d in [&frames, &masks] {
        std::fs::create_dir_all(d).map_err(io_err(d))?;
    }
    for (i, (f, m)) in phantom.frames.iter().zip(&phantom.masks).enumerate() {
        f.save_pgm(&frames.join(format!("frame_{:04}.pgm", i + 1)))?;
        m.save_pgm(&masks.join(format!("mask_{:04}.pgm", i + 1)))?;
    }
    write_contours(&dir.join("truth.jsonl"), &phantom.truth)?;
    write(&dir.join("manifest.txt"), &spec.to_manifest())?;
    write_init(&dir.join("init.json"), &spec.outline(0, INIT_POINTS, |_| 0.0))
}

fn listed(dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    let paths = list_frames(dir)?;
    if paths.is_empty() {
        return Err(IoError::Format {
            path: dir.to_path_buf(),
            reason: "no PGM or PNG images".into(),
        });
    }
    Ok(paths)
}

pub fn load_frames(dir: &Path) -> Result<Vec<Frame>, IoError> {
    listed(dir)?.iter().map(|p| Frame::load(p).map_err(IoError::from)).collect()
}

pub fn load_masks(dir: &Path) -> Result<Vec<Mask>, IoError> {
    listed(dir)?.iter().map(|p| Mask::load(p).map_err(IoError::from)).collect()
}
