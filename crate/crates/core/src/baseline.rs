//! Comparison algorithms: the classic polar snake with a Hilbert-transform
//! edge energy, and the two Ad-PAC ablations.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::contour::{Point, PolarContour, MIN_RADIUS};
use crate::image::Frame;
use crate::tracker::{track_video, validate_outline, AdPacParams, FrameReport, TrackError, TrackResult};

/// Rays whose largest Hilbert magnitude falls below this are featureless.
pub const FEATURELESS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicPolarParams {
    /// Second-difference weight.
    pub alpha: f64,
    /// First-difference weight.
    pub beta: f64,
    /// Edge weight.
    pub gamma: f64,
    /// Half-width of the per-ray search window, px.
    pub window: f64,
    /// Spacing of candidate radii inside the window, px.
    pub resolution: f64,
    /// Samples per ray profile, center to search radius.
    pub samples: usize,
    /// Number of rays.
    pub points: usize,
    pub r_factor: f64,
    pub max_sweeps: usize,
}

impl Default for ClassicPolarParams {
    fn default() -> Self {
        Self {
            alpha: 0.002,
            beta: 0.002,
            gamma: 1.0,
            window: 2.0,
            resolution: 0.5,
            samples: 128,
            points: 64,
            r_factor: 1.5,
            max_sweeps: 200,
        }
    }
}

impl ClassicPolarParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        let bad = |m: &str| Err(TrackError::InvalidParams(m.to_string()));
        if [self.alpha, self.beta, self.gamma].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("classic weights must be finite and non-negative");
        }
        if !(self.window >= 0.0) || !(self.resolution > 0.0) {
            return bad("window must be non-negative and resolution positive");
        }
        if self.samples < 2 || self.points < crate::contour::MIN_POINTS {
            return bad("need at least 2 ray samples and 4 rays");
        }
        if !(self.r_factor > 1.0) || self.max_sweeps == 0 {
            return bad("r_factor must exceed 1 and max_sweeps be at least 1");
        }
        Ok(())
    }
}

/// Discrete Hilbert transform through the analytic signal. The input is
/// padded to a power of two by repeating its last sample.
pub fn hilbert(signal: &[f64]) -> Vec<f64> {
    let m = signal.len();
    if m == 0 {
        return Vec::new();
    }
    let len = m.next_power_of_two();
    let last = signal[m - 1];
    let mut buf: Vec<Complex<f64>> = (0..len)
        .map(|i| Complex::new(if i < m { signal[i] } else { last }, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        let h = if k == 0 || (len.is_multiple_of(2) && k == len / 2) {
            1.0
        } else if k < len.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *z *= h;
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf[..m].iter().map(|z| z.im / len as f64).collect()
}

/// Intensity profiles along each ray from the center out to `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayProfiles {
    pub center: Point,
    /// Distance between consecutive samples, px.
    pub step: f64,
    pub values: Vec<Vec<f64>>,
}

impl RayProfiles {
    pub fn sample(frame: &Frame, center: Point, rays: usize, radius: f64, samples: usize) -> Self {
        let step = radius / (samples - 1) as f64;
        let values = (0..rays)
            .map(|n| {
                let (s, c) = (2.0 * std::f64::consts::PI * n as f64 / rays as f64).sin_cos();
                (0..samples)
                    .map(|k| {
                        let r = k as f64 * step;
                        frame.sample(center.x + r * c, center.y + r * s)
                    })
                    .collect()
            })
            .collect();
        Self { center, step, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_radius(&self) -> f64 {
        self.values.first().map_or(0.0, |v| (v.len() - 1) as f64 * self.step)
    }
}

/// Per-ray external cost `1 − |f̂|/max|f̂|`, 1 everywhere on featureless rays.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCost {
    step: f64,
    cost: Vec<Vec<f64>>,
}

impl EdgeCost {
    pub fn new(profiles: &RayProfiles) -> Self {
        let cost = profiles
            .values
            .iter()
            .map(|p| {
                let mag: Vec<f64> = hilbert(p).into_iter().map(f64::abs).collect();
                let max = mag.iter().copied().fold(0.0, f64::max);
                if max < FEATURELESS {
                    vec![1.0; mag.len()]
                } else {
                    mag.iter().map(|m| 1.0 - m / max).collect()
                }
            })
            .collect();
        Self {
            step: profiles.step,
            cost,
        }
    }

    /// Linearly interpolated cost on ray `n` at distance `r`.
    pub fn at(&self, n: usize, r: f64) -> f64 {
        let row = &self.cost[n];
        let t = (r / self.step).clamp(0.0, (row.len() - 1) as f64);
        let i = (t.floor() as usize).min(row.len() - 2);
        let f = t - i as f64;
        row[i] * (1.0 - f) + row[i + 1] * f
    }
}

fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

fn curvature_term(r: &[f64], j: isize) -> f64 {
    let n = r.len();
    let d = r[wrap(j, n)] - 2.0 * r[wrap(j + 1, n)] + r[wrap(j + 2, n)];
    d * d
}

fn continuity_term(r: &[f64], j: isize) -> f64 {
    let n = r.len();
    let d = r[wrap(j, n)] - r[wrap(j + 1, n)];
    d * d
}

fn energy_with(radii: &[f64], cost: &EdgeCost, p: &ClassicPolarParams) -> f64 {
    (0..radii.len())
        .map(|i| {
            let j = i as isize;
            p.alpha * curvature_term(radii, j) + p.beta * continuity_term(radii, j) + p.gamma * cost.at(i, radii[i])
        })
        .sum()
}

/// Total classic energy of `radii` on the given ray profiles.
pub fn classic_energy(radii: &[f64], profiles: &RayProfiles, p: &ClassicPolarParams) -> f64 {
    energy_with(radii, &EdgeCost::new(profiles), p)
}

/// Terms of the total energy that depend on ray `i`.
fn local_energy(radii: &[f64], i: usize, cost: &EdgeCost, p: &ClassicPolarParams) -> f64 {
    let j = i as isize;
    let curv: f64 = (j - 2..=j).map(|k| curvature_term(radii, k)).sum();
    let cont: f64 = (j - 1..=j).map(|k| continuity_term(radii, k)).sum();
    p.alpha * curv + p.beta * cont + p.gamma * cost.at(i, radii[i])
}

#[derive(Debug, Clone)]
pub struct ClassicOutcome {
    pub contour: PolarContour,
    pub sweeps: usize,
    /// Total energy after each sweep, starting with the initial energy.
    pub energies: Vec<f64>,
    /// Largest radius change of the last sweep.
    pub max_dr: f64,
}

/// Greedy coordinate search: each radius in turn takes the candidate in its
/// window with the lowest energy, neighbours fixed, until a sweep changes
/// nothing or `max_sweeps` sweeps have run.
pub fn classic_minimize(frame: &Frame, init: &PolarContour, p: &ClassicPolarParams) -> Result<ClassicOutcome, TrackError> {
    p.validate()?;
    let n = init.len();
    let radius = p.r_factor * init.max_radius();
    let profiles = RayProfiles::sample(frame, init.center(), n, radius, p.samples);
    let cost = EdgeCost::new(&profiles);
    let mut radii = init.radii().to_vec();
    let steps = (p.window / p.resolution).floor() as isize;
    let mut energies = vec![energy_with(&radii, &cost, p)];
    let mut sweeps = 0;
    let mut max_dr = 0.0;
    while sweeps < p.max_sweeps {
        sweeps += 1;
        max_dr = 0.0f64;
        for i in 0..n {
            let current = radii[i];
            let mut best = (local_energy(&radii, i, &cost, p), current);
            for k in -steps..=steps {
                let r = current + k as f64 * p.resolution;
                if k == 0 || r < MIN_RADIUS || r > radius {
                    continue;
                }
                radii[i] = r;
                let e = local_energy(&radii, i, &cost, p);
                // strict improvement keeps the sweep monotone and terminating
                if e < best.0 - 1e-12 {
                    best = (e, r);
                }
            }
            radii[i] = best.1;
            max_dr = max_dr.max((best.1 - current).abs());
        }
        energies.push(energy_with(&radii, &cost, p));
        if max_dr == 0.0 {
            break;
        }
    }
    Ok(ClassicOutcome {
        contour: init.with_radii(radii)?,
        sweeps,
        energies,
        max_dr,
    })
}

/// Tracks a video with the classic snake: frame 1 starts from the outline,
/// later frames from the previous contour recentered on its centroid.
pub fn classic_track_video<I>(frames: I, outline: &[Point], p: &ClassicPolarParams) -> Result<TrackResult, TrackError>
where
    I: IntoIterator<Item = Frame>,
{
    p.validate()?;
    let center = validate_outline(outline)?;
    let mut frames = frames.into_iter().peekable();
    if frames.peek().is_none() {
        return Err(TrackError::EmptyVideo);
    }
    let mut contour = PolarContour::from_polygon(outline, center, p.points)?;
    let mut result = TrackResult::default();
    let mut size = None;
    for (k, frame) in frames.enumerate() {
        let start = Instant::now();
        let got = (frame.width(), frame.height());
        if let Some(expected) = size {
            if expected != got {
                result.error = Some((k + 1, TrackError::FrameSize { expected, got }));
                break;
            }
        }
        size = Some(got);
        if k > 0 {
            contour = contour.recenter_resample(p.points)?.contour;
        }
        let out = classic_minimize(&frame, &contour, p)?;
        contour = out.contour;
        result.reports.push(FrameReport {
            frame: k + 1,
            iterations: out.sweeps,
            max_dr: out.max_dr,
            energy: *out.energies.last().expect("initial energy is always recorded"),
            warnings: 0,
            seconds: start.elapsed().as_secs_f64(),
        });
        result.contours.push(contour.clone());
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    /// Uniform weights at every point and frame.
    NoAdaptation,
    /// Frame-1 adapted weights frozen for the rest of the video.
    NoTemporal,
}

impl FromStr for Ablation {
    type Err = TrackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no-adaptation" => Ok(Self::NoAdaptation),
            "no-temporal" => Ok(Self::NoTemporal),
            other => Err(TrackError::InvalidParams(format!(
                "unknown ablation `{other}` (expected no-adaptation or no-temporal)"
            ))),
        }
    }
}

pub fn make_ablation(variant: Ablation, params: &AdPacParams) -> AdPacParams {
    let mut p = *params;
    match variant {
        Ablation::NoAdaptation => p.adaptation.spatial = false,
        Ablation::NoTemporal => {
            p.adaptation.spatial = true;
            p.adaptation.temporal = false;
        }
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    AdPac,
    /// Ad-PAC without parameter adaptation.
    AdPacNoSpatial,
    AdPacNoTemporal,
    ClassicPac,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::AdPac, Self::AdPacNoSpatial, Self::AdPacNoTemporal, Self::ClassicPac];

    pub fn name(self) -> &'static str {
        match self {
            Self::AdPac => "adpac",
            Self::AdPacNoSpatial => "adpac-nospatial",
            Self::AdPacNoTemporal => "adpac-notemporal",
            Self::ClassicPac => "classic-pac",
        }
    }

    /// Tracker parameters this variant runs with; `None` for the classic snake.
    pub fn adpac_params(self, params: &AdPacParams) -> Option<AdPacParams> {
        match self {
            Self::AdPac => Some(*params),
            Self::AdPacNoSpatial => Some(make_ablation(Ablation::NoAdaptation, params)),
            Self::AdPacNoTemporal => Some(make_ablation(Ablation::NoTemporal, params)),
            Self::ClassicPac => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = TrackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| TrackError::InvalidParams(format!("unknown algorithm `{s}`")))
    }
}

/// Runs `algo` over a video.
pub fn run_algorithm<I>(
    algo: Algorithm,
    frames: I,
    outline: &[Point],
    params: &AdPacParams,
    classic: &ClassicPolarParams,
) -> Result<TrackResult, TrackError>
where
    I: IntoIterator<Item = Frame>,
{
    match algo.adpac_params(params) {
        Some(p) => track_video(frames, outline, &p),
        None => classic_track_video(frames, outline, classic),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hilbert_of_cosine_is_sine() {
        let m = 256;
        for k in [1, 5, 17] {
            let w = 2.0 * PI * k as f64 / m as f64;
            let x: Vec<f64> = (0..m).map(|s| (w * s as f64).cos()).collect();
            let h = hilbert(&x);
            for (s, v) in h.iter().enumerate() {
                assert!((v.abs() - (w * s as f64).sin().abs()).abs() < 1e-6, "k={k} s={s}");
            }
        }
    }

    #[test]
    fn hilbert_of_constant_vanishes() {
        for m in [100, 128] {
            let h = hilbert(&vec![0.7; m]);
            assert!(h.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn constant_radii_have_no_internal_energy() {
        let frame = Frame::from_fn(64, 64, |_, _| 0.5).unwrap();
        let c = PolarContour::circle(Point::new(32.0, 32.0), 10.0, 16).unwrap();
        let p = ClassicPolarParams::default();
        let prof = RayProfiles::sample(&frame, c.center(), 16, 15.0, 32);
        // a flat image is featureless on every ray, so the energy is exactly γ·N
        assert_eq!(classic_energy(c.radii(), &prof, &p), p.gamma * 16.0);
        let q = ClassicPolarParams { gamma: 0.0, ..p };
        assert_eq!(classic_energy(c.radii(), &prof, &q), 0.0);
    }

    #[test]
    fn zero_window_leaves_contour() {
        let frame = Frame::from_fn(64, 64, |x, y| ((x as f64 - 30.0).hypot(y as f64 - 30.0) > 12.0) as u8 as f64).unwrap();
        let c = PolarContour::circle(Point::new(32.0, 32.0), 8.0, 16).unwrap();
        let p = ClassicPolarParams {
            window: 0.0,
            ..Default::default()
        };
        let out = classic_minimize(&frame, &c, &p).unwrap();
        assert_eq!(out.contour.radii(), c.radii());
        assert_eq!(out.sweeps, 1);
    }

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("snake".parse::<Algorithm>().is_err());
        assert!("no-spatial".parse::<Ablation>().is_err());
        let p = AdPacParams::default();
        let u = make_ablation(Ablation::NoAdaptation, &p);
        assert!(!u.adaptation.spatial);
        let f = make_ablation(Ablation::NoTemporal, &p);
        assert!(f.adaptation.spatial && !f.adaptation.temporal);
    }
}
