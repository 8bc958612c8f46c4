//! Frame-by-frame tracking: initial smoothing of a manual outline, then per
//! frame point-count update, recentering, weight adaptation and gradient
//! descent to equilibrium.

use std::time::Instant;

use thiserror::Error;

use crate::adaptation::{apply_forgetting, cap_weights, limit_stiffness, spatial_weights, AdaptationConfig};
use crate::contour::{point_in_polygon, update_point_count, ContourError, Point, PolarContour};
use crate::energy::{
    gd_step, total_energy, total_gradient, LocalWeights, SectorIndex, StepParams, TermScales, WeightSet,
};
use crate::image::{compute_gradients, Frame, GradientField};

/// Iterations between refreshes of the sector means during one minimization.
pub const DEFAULT_STATS_REFRESH: usize = 10;

#[derive(Debug, Error)]
pub enum TrackError {
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("invalid initial outline: {0}")]
    InvalidInit(String),
    #[error("non-finite gradient at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("frame size {got:?} differs from the first frame {expected:?}")]
    FrameSize { expected: (usize, usize), got: (usize, usize) },
    #[error("no frames to track")]
    EmptyVideo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdPacParams {
    pub scales: TermScales,
    pub step: StepParams,
    pub adaptation: AdaptationConfig,
    /// Target spacing between contour points, px.
    pub spacing: f64,
    /// Equilibrium threshold on the largest radius change, px.
    pub tol: f64,
    pub max_iters: usize,
    /// Search radius as a multiple of the largest radius.
    pub r_factor: f64,
    /// Sign of the contraction gradient; +1 shrinks.
    pub contraction_sign: f64,
    pub stats_refresh: usize,
    /// Fraction of the explicit-step stability limit the smoothness weights
    /// may use; see [`limit_stiffness`]. Infinite keeps them as adapted.
    pub step_safety: f64,
}

impl Default for AdPacParams {
    fn default() -> Self {
        Self {
            scales: TermScales::default(),
            step: StepParams::default(),
            adaptation: AdaptationConfig::default(),
            spacing: 10.0,
            tol: 1e-4,
            max_iters: 5000,
            r_factor: 1.5,
            contraction_sign: 1.0,
            stats_refresh: DEFAULT_STATS_REFRESH,
            step_safety: 0.9,
        }
    }
}

impl AdPacParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        let bad = |msg: &str| Err(TrackError::InvalidParams(msg.to_string()));
        let s = &self.scales;
        let all = [s.curvature, s.continuity, s.edge, s.region, s.intensity, s.contraction];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return bad("term scales must be finite and non-negative");
        }
        if !(self.step.base > 0.0 && self.step.base.is_finite()) || !(self.step.radial_gain >= 0.0) {
            return bad("step sizes need base > 0 and radial gain >= 0");
        }
        if !(self.adaptation.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.adaptation.cap_ratio >= 1.0) {
            return bad("cap_ratio must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.adaptation.forgetting) {
            return bad("forgetting factor must lie in [0, 1]");
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return bad("spacing must be positive");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.r_factor > 1.0 && self.r_factor.is_finite()) {
            return bad("r_factor must exceed 1");
        }
        if self.contraction_sign != 1.0 && self.contraction_sign != -1.0 {
            return bad("contraction_sign must be +1 or -1");
        }
        if self.stats_refresh == 0 {
            return bad("stats_refresh must be at least 1");
        }
        if !(self.step_safety > 0.0) {
            return bad("step_safety must be positive");
        }
        Ok(())
    }
}

/// How per-point weights evolve between frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Spatial adaptation every frame, blended by the forgetting factor.
    Adaptive,
    /// Frame-1 adapted weights reused for every frame.
    Frozen,
    /// The same uniform per-term weight at every point and frame.
    Uniform,
}

impl WeightMode {
    pub fn from_config(cfg: &AdaptationConfig) -> Self {
        match (cfg.spatial, cfg.temporal) {
            (true, true) => Self::Adaptive,
            (true, false) => Self::Frozen,
            (false, _) => Self::Uniform,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub contour: PolarContour,
    pub iterations: usize,
    /// Largest radius change of the last step.
    pub max_dr: f64,
    pub search_radius: f64,
    /// Search-radius growths plus empty-region fallbacks.
    pub warnings: usize,
}

impl MinimizeOutcome {
    pub fn converged(&self, tol: f64) -> bool {
        self.max_dr < tol
    }
}

/// Gradient descent from `start` until the largest radius change drops
/// below `params.tol` or `params.max_iters` steps have been taken.
///
/// The center is fixed, so the pixel-to-sector table is built once; sector
/// means refresh every `params.stats_refresh` steps, areas and boundary
/// intensities every step.
pub fn minimize(
    frame: &Frame,
    field: &GradientField,
    start: &PolarContour,
    weights: &WeightSet,
    reference: Option<&[f64]>,
    search_radius: f64,
    params: &AdPacParams,
) -> Result<MinimizeOutcome, TrackError> {
    let mut contour = start.clone();
    let mut stiff = weights.clone();
    limit_stiffness(&mut stiff.local, contour.radii(), &stiff.scales, params.step, params.step_safety);
    let weights = &stiff;
    let mut radius = search_radius.max(params.r_factor * contour.max_radius());
    let mut index = SectorIndex::new(frame, &contour, radius);
    let mut warnings = 0;
    let mut means = None;
    let mut max_dr = f64::INFINITY;
    let mut iterations = 0;
    while iterations < params.max_iters {
        if iterations % params.stats_refresh == 0 || means.is_none() {
            let m = index.region_means(contour.radii());
            warnings += m.2;
            means = Some(m);
        }
        let (u, v, _) = means.as_ref().expect("means computed above");
        let stats = crate::energy::SectorStats::from_means(frame, &contour, radius, u.clone(), v.clone(), 0);
        let grad = total_gradient(frame, field, &contour, weights, &stats, reference, params.contraction_sign);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(TrackError::NonFinite { iteration: iterations + 1 });
        }
        let next = gd_step(contour.radii(), &grad, params.step);
        max_dr = next
            .iter()
            .zip(contour.radii())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        contour = contour.with_radii(next)?;
        iterations += 1;
        if contour.max_radius() > radius {
            radius = params.r_factor * contour.max_radius();
            index = SectorIndex::new(frame, &contour, radius);
            means = None;
            warnings += 1;
        }
        if max_dr < params.tol {
            break;
        }
    }
    debug_assert!(max_dr < params.tol || iterations == params.max_iters);
    Ok(MinimizeOutcome {
        contour,
        iterations,
        max_dr,
        search_radius: radius,
        warnings,
    })
}

/// Per-frame diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    /// 1-based frame number.
    pub frame: usize,
    pub iterations: usize,
    pub max_dr: f64,
    pub energy: f64,
    pub warnings: usize,
    pub seconds: f64,
}

impl FrameReport {
    pub const CSV_HEADER: &'static str = "frame,iters,max_dr,warnings";

    pub fn csv_row(&self) -> String {
        format!("{},{},{:.6e},{}", self.frame, self.iterations, self.max_dr, self.warnings)
    }
}

/// Everything carried from one frame to the next.
#[derive(Debug, Clone)]
pub struct TrackerState {
    pub contour: PolarContour,
    pub weights: WeightSet,
    pub search_radius: f64,
    /// Intensities of the last frame at the last contour's points.
    pub reference: Vec<f64>,
    /// 1-based index of the last processed frame.
    pub frame_index: usize,
    pub warnings: usize,
    pub failures: usize,
    /// Uniform per-term weights used for smoothing and the non-adaptive mode.
    pub uniform: [f64; 5],
    /// Weights adapted on the frame-1 result; frozen mode resamples these
    /// rather than the previous frame's, so interpolation does not compound.
    pub initial: LocalWeights,
    frame: Frame,
    field: GradientField,
}

impl TrackerState {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn field(&self) -> &GradientField {
        &self.field
    }
}

/// Harmonic mean: the uniform weight that normalises the mean gradient
/// magnitude rather than each point's.
fn typical(values: &[f64]) -> f64 {
    values.len() as f64 / values.iter().map(|v| 1.0 / v).sum::<f64>()
}

fn uniform_weights(n: usize, values: &[f64; 5]) -> LocalWeights {
    LocalWeights {
        curvature: vec![values[0]; n],
        continuity: vec![values[1]; n],
        edge: vec![values[2]; n],
        region: vec![values[3]; n],
        intensity: vec![values[4]; n],
    }
}

fn adapted(frame: &Frame, field: &GradientField, contour: &PolarContour, radius: f64, cfg: &AdaptationConfig) -> LocalWeights {
    let stats = SectorIndex::new(frame, contour, radius).stats(frame, contour);
    let mut w = spatial_weights(frame, field, contour, &stats, cfg.epsilon);
    cap_weights(&mut w, cfg.cap_ratio);
    w
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Checks a manual outline and returns its vertex mean.
pub fn validate_outline(points: &[Point]) -> Result<Point, TrackError> {
    let bad = |m: String| Err(TrackError::InvalidInit(m));
    if points.len() < 3 {
        return bad(format!("need at least 3 points, got {}", points.len()));
    }
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return bad("non-finite coordinate".into());
    }
    let n = points.len();
    let area2: f64 = (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum();
    if area2.abs() < 1e-9 {
        return bad("degenerate polygon (zero area)".into());
    }
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n]) {
                return bad(format!("edges {i} and {j} intersect"));
            }
        }
    }
    let c = Point::new(
        points.iter().map(|p| p.x).sum::<f64>() / n as f64,
        points.iter().map(|p| p.y).sum::<f64>() / n as f64,
    );
    if !point_in_polygon(points, c) {
        return bad("vertex mean lies outside the polygon".into());
    }
    Ok(c)
}

/// Converts a manual outline of frame 1 to a polar contour and smooths it
/// with weights adapted on the raw polygon, intensities pinned to those at
/// the manual points. The result seeds the adapted weights, the reference
/// intensities and the search radius.
pub fn init_from_manual(
    points: &[Point],
    frame: Frame,
    params: &AdPacParams,
) -> Result<(TrackerState, FrameReport), TrackError> {
    params.validate()?;
    let start = Instant::now();
    let center = validate_outline(points)?;
    let n = points.len();
    let perimeter: f64 = (0..n).map(|i| points[i].distance(points[(i + 1) % n])).sum();
    let count = update_point_count(perimeter, params.spacing)?;
    let raw = PolarContour::from_polygon(points, center, count)?;
    let field = compute_gradients(&frame);
    let radius = params.r_factor * raw.max_radius();

    let seed = adapted(&frame, &field, &raw, radius, &params.adaptation);
    let uniform = [
        typical(&seed.curvature),
        typical(&seed.continuity),
        typical(&seed.edge),
        typical(&seed.region),
        typical(&seed.intensity),
    ];
    let smoothing = WeightSet {
        local: match WeightMode::from_config(&params.adaptation) {
            WeightMode::Uniform => uniform_weights(count, &uniform),
            _ => seed,
        },
        scales: params.scales,
    };
    // the outline is trusted, so its own intensities anchor the smoothing
    let manual: Vec<f64> = raw.points().iter().map(|p| frame.sample(p.x, p.y)).collect();
    let out = minimize(&frame, &field, &raw, &smoothing, Some(&manual), radius, params)?;
    let contour = out.contour;
    let search_radius = params.r_factor * contour.max_radius();
    let local = match WeightMode::from_config(&params.adaptation) {
        WeightMode::Uniform => uniform_weights(contour.len(), &uniform),
        _ => adapted(&frame, &field, &contour, search_radius, &params.adaptation),
    };
    let weights = WeightSet {
        local,
        scales: params.scales,
    };
    let stats = SectorIndex::new(&frame, &contour, search_radius).stats(&frame, &contour);
    let energy = total_energy(&frame, &field, &contour, &weights, &stats, None);
    let reference = contour.points().iter().map(|p| frame.sample(p.x, p.y)).collect();
    let report = FrameReport {
        frame: 1,
        iterations: out.iterations,
        max_dr: out.max_dr,
        energy,
        warnings: out.warnings,
        seconds: start.elapsed().as_secs_f64(),
    };
    let initial = weights.local.clone();
    let state = TrackerState {
        contour,
        weights,
        search_radius,
        reference,
        frame_index: 1,
        warnings: out.warnings,
        failures: 0,
        uniform,
        initial,
        frame,
        field,
    };
    Ok((state, report))
}

/// Processes the next frame. On failure the state keeps its contour, the
/// frame counter advances and the error is returned.
pub fn track_frame(state: &mut TrackerState, frame: Frame, params: &AdPacParams) -> Result<FrameReport, TrackError> {
    let start = Instant::now();
    state.frame_index += 1;
    let expected = (state.frame.width(), state.frame.height());
    let got = (frame.width(), frame.height());
    if expected != got {
        state.failures += 1;
        return Err(TrackError::FrameSize { expected, got });
    }
    let field = compute_gradients(&frame);
    let mut warnings = 0;

    let count = update_point_count(state.contour.perimeter(), params.spacing)?;
    let resampled = state.contour.recenter_resample(count)?;
    warnings += resampled.non_star_rays;
    let prior = resampled.contour;
    let radius = params.r_factor * prior.max_radius();

    let prev_local = state.weights.local.resampled(count);
    let local = match WeightMode::from_config(&params.adaptation) {
        WeightMode::Adaptive => {
            let fresh = adapted(&state.frame, &state.field, &prior, radius, &params.adaptation);
            apply_forgetting(params.adaptation.forgetting, &fresh, &prev_local)
        }
        WeightMode::Frozen => state.initial.resampled(count),
        WeightMode::Uniform => uniform_weights(count, &state.uniform),
    };
    let weights = WeightSet {
        local,
        scales: params.scales,
    };
    let reference: Vec<f64> = prior.points().iter().map(|p| state.frame.sample(p.x, p.y)).collect();

    let out = match minimize(&frame, &field, &prior, &weights, Some(&reference), radius, params) {
        Ok(out) => out,
        Err(e) => {
            state.failures += 1;
            return Err(e);
        }
    };
    warnings += out.warnings;

    let contour = out.contour;
    let search_radius = params.r_factor * contour.max_radius();
    let stats = SectorIndex::new(&frame, &contour, search_radius).stats(&frame, &contour);
    let energy = total_energy(&frame, &field, &contour, &weights, &stats, Some(&reference));
    state.reference = contour.points().iter().map(|p| frame.sample(p.x, p.y)).collect();
    state.contour = contour;
    state.weights = weights;
    state.search_radius = search_radius;
    state.warnings += warnings;
    state.frame = frame;
    state.field = field;
    Ok(FrameReport {
        frame: state.frame_index,
        iterations: out.iterations,
        max_dr: out.max_dr,
        energy,
        warnings,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Contours and diagnostics of a tracked video. `error` holds the failure
/// that stopped tracking early, if any; results up to it are kept.
#[derive(Debug, Default)]
pub struct TrackResult {
    pub contours: Vec<PolarContour>,
    pub reports: Vec<FrameReport>,
    pub error: Option<(usize, TrackError)>,
}

/// Tracks a whole video, frame 1 being initialised from `outline`.
pub fn track_video<I>(frames: I, outline: &[Point], params: &AdPacParams) -> Result<TrackResult, TrackError>
where
    I: IntoIterator<Item = Frame>,
{
    let mut frames = frames.into_iter();
    let first = frames.next().ok_or(TrackError::EmptyVideo)?;
    let (mut state, report) = init_from_manual(outline, first, params)?;
    let mut result = TrackResult {
        contours: vec![state.contour.clone()],
        reports: vec![report],
        error: None,
    };
    for frame in frames {
        match track_frame(&mut state, frame, params) {
            Ok(report) => {
                result.contours.push(state.contour.clone());
                result.reports.push(report);
            }
            Err(e) => {
                result.error = Some((state.frame_index, e));
                break;
            }
        }
    }
    Ok(result)
}
