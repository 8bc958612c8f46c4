//! Synthetic vessel videos with exact ground truth.
//!
//! A dark lumen bounded by a bright wall ring sits on a mid-grey
//! background. The lumen boundary is a star-shaped polar curve whose scale
//! oscillates over time; multiplicative gamma speckle and an optional
//! shadow wedge degrade the image.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use thiserror::Error;

use crate::contour::{Point, PolarContour};
use crate::image::Frame;
use crate::mask::Mask;

/// Angular samples of the ground-truth contour.
pub const TRUTH_POINTS: usize = 360;

pub const PRESETS: [&str; 4] = ["good-oval", "average-apices", "poor-shadow", "high-variation"];

#[derive(Debug, Error)]
pub enum PhantomError {
    #[error("unknown preset `{0}` (expected one of good-oval, average-apices, poor-shadow, high-variation)")]
    UnknownPreset(String),
    #[error("invalid phantom spec: {0}")]
    Invalid(String),
    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub order: u32,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shadow {
    /// Direction of the wedge axis from the vessel center, radians.
    pub angle: f64,
    /// Full angular width, radians.
    pub width: f64,
    /// Intensity multiplier inside the wedge.
    pub attenuation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub center: Point,
    pub base_radius: f64,
    /// Vertical over horizontal semi-axis; area is kept at `π·base²`.
    pub aspect: f64,
    pub harmonics: Vec<Harmonic>,
    /// Relative amplitude of the radius oscillation.
    pub oscillation: f64,
    /// Oscillation period, frames.
    pub period: f64,
    pub lumen: f64,
    pub wall: f64,
    pub background: f64,
    pub wall_thickness: f64,
    /// Width of the smoothed intensity transitions, px.
    pub edge_softness: f64,
    /// Variance of the unit-mean gamma speckle; 0 disables it.
    pub noise: f64,
    pub shadow: Option<Shadow>,
    /// Translation of the center per frame, px.
    pub drift: (f64, f64),
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            width: 380,
            height: 365,
            center: Point::new(190.0, 182.0),
            base_radius: 40.0,
            aspect: 1.0,
            harmonics: Vec::new(),
            oscillation: 0.0,
            period: 50.0,
            lumen: 0.08,
            wall: 0.85,
            background: 0.45,
            wall_thickness: 8.0,
            edge_softness: 1.5,
            noise: 0.0,
            shadow: None,
            drift: (0.0, 0.0),
            seed: 0,
        }
    }
}

/// Spec for one of [`PRESETS`].
pub fn preset(name: &str) -> Result<PhantomSpec, PhantomError> {
    let base = PhantomSpec::default();
    let spec = match name {
        "good-oval" => PhantomSpec {
            aspect: 0.7,
            oscillation: 0.05,
            period: 50.0,
            noise: 0.05,
            ..base
        },
        "average-apices" => PhantomSpec {
            aspect: 0.8,
            harmonics: vec![Harmonic {
                order: 3,
                amplitude: 0.12,
                phase: 0.4,
            }],
            oscillation: 0.1,
            period: 40.0,
            noise: 0.12,
            wall: 0.7,
            ..base
        },
        "poor-shadow" => PhantomSpec {
            aspect: 0.75,
            harmonics: vec![Harmonic {
                order: 2,
                amplitude: 0.05,
                phase: 1.0,
            }],
            oscillation: 0.3,
            period: 50.0,
            noise: 0.25,
            wall: 0.7,
            shadow: Some(Shadow {
                angle: 0.5 * PI,
                width: PI / 3.0,
                attenuation: 0.1,
            }),
            ..base
        },
        "high-variation" => PhantomSpec {
            aspect: 0.75,
            oscillation: 0.45,
            period: 60.0,
            noise: 0.08,
            ..base
        },
        other => return Err(PhantomError::UnknownPreset(other.to_string())),
    };
    Ok(spec)
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<(), PhantomError> {
        let bad = |m: &str| Err(PhantomError::Invalid(m.to_string()));
        if self.width < crate::image::MIN_FRAME_SIDE || self.height < crate::image::MIN_FRAME_SIDE {
            return bad("image too small");
        }
        for v in [self.lumen, self.wall, self.background] {
            if !(0.0..=1.0).contains(&v) {
                return bad("intensity levels must lie in [0, 1]");
            }
        }
        if !(0.0..1.0).contains(&self.oscillation) {
            return bad("oscillation must lie in [0, 1)");
        }
        if !(self.base_radius > 0.0) || !(self.aspect > 0.0) || !(self.period > 0.0) {
            return bad("base radius, aspect and period must be positive");
        }
        if !(self.noise >= 0.0) || !(self.wall_thickness >= 0.0) || !(self.edge_softness > 0.0) {
            return bad("noise and wall thickness must be non-negative, edge softness positive");
        }
        if let Some(s) = self.shadow {
            if !(0.0..=1.0).contains(&s.attenuation) || !(s.width >= 0.0) {
                return bad("shadow attenuation must lie in [0, 1]");
            }
        }
        // the boundary is star-shaped about the center iff the radius stays positive
        let min_shape = (0..3600)
            .map(|k| self.shape(2.0 * PI * k as f64 / 3600.0))
            .fold(f64::INFINITY, f64::min);
        if min_shape <= 0.05 {
            return bad("harmonics make the radius vanish; shape is not star-convex");
        }
        Ok(())
    }

    /// Angular shape factor: ellipse times harmonic modulation.
    pub fn shape(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let ellipse = 1.0 / (self.aspect * c * c + s * s / self.aspect).sqrt();
        let harm: f64 = self
            .harmonics
            .iter()
            .map(|h| h.amplitude * (h.order as f64 * theta + h.phase).cos())
            .sum();
        ellipse * (1.0 + harm)
    }

    /// Scale of the boundary at 0-based frame `t`.
    pub fn scale(&self, t: usize) -> f64 {
        self.base_radius * (1.0 + self.oscillation * (2.0 * PI * t as f64 / self.period).sin())
    }

    pub fn center_at(&self, t: usize) -> Point {
        Point::new(
            self.center.x + self.drift.0 * t as f64,
            self.center.y + self.drift.1 * t as f64,
        )
    }

    pub fn radius(&self, theta: f64, t: usize) -> f64 {
        self.scale(t) * self.shape(theta)
    }

    /// Ground-truth contour of 0-based frame `t`.
    pub fn truth(&self, t: usize) -> PolarContour {
        let radii = (0..TRUTH_POINTS)
            .map(|k| self.radius(2.0 * PI * k as f64 / TRUTH_POINTS as f64, t))
            .collect();
        PolarContour::new(self.center_at(t), radii).expect("validated spec has positive radii")
    }

    pub fn mask(&self, t: usize) -> Mask {
        self.truth(t)
            .rasterize(self.width, self.height)
            .expect("truth contour is valid")
    }

    /// Noise-free intensity at pixel `(x, y)` of frame `t`.
    pub fn clean_intensity(&self, x: f64, y: f64, t: usize) -> f64 {
        let c = self.center_at(t);
        let (dx, dy) = (x - c.x, y - c.y);
        let theta = dy.atan2(dx);
        let d = dx.hypot(dy) - self.radius(theta, t);
        let step = |u: f64| 0.5 * (1.0 + (u / self.edge_softness).tanh());
        let outer = step(d);
        let beyond = step(d - self.wall_thickness);
        let mut v = self.lumen * (1.0 - outer) + self.wall * (outer - beyond) + self.background * beyond;
        if let Some(s) = self.shadow {
            let off = (theta - s.angle + PI).rem_euclid(2.0 * PI) - PI;
            if off.abs() <= 0.5 * s.width {
                v *= s.attenuation;
            }
        }
        v
    }

    /// Frame `t`, quantised to 8 bits so it round-trips through PGM exactly.
    pub fn frame(&self, t: usize) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t as u64);
        let gamma = (self.noise > 0.0).then(|| Gamma::new(1.0 / self.noise, self.noise).expect("positive shape"));
        let mut bytes = Vec::with_capacity(self.width * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let mut v = self.clean_intensity(x as f64, y as f64, t);
                if let Some(g) = &gamma {
                    v *= g.sample(&mut rng);
                }
                bytes.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
            }
        }
        Frame::from_gray8(self.width, self.height, &bytes).expect("spec dimensions are valid")
    }

    /// A manual-style outline of frame `t`: `count` truth points, each
    /// pushed radially by `perturb(k)` pixels.
    pub fn outline(&self, t: usize, count: usize, perturb: impl Fn(usize) -> f64) -> Vec<Point> {
        let c = self.center_at(t);
        (0..count)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / count as f64;
                let r = self.radius(theta, t) + perturb(k);
                Point::new(c.x + r * theta.cos(), c.y + r * theta.sin())
            })
            .collect()
    }

    pub fn to_manifest(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k}={v}").expect("string write");
        kv("width", self.width.to_string());
        kv("height", self.height.to_string());
        kv("center_x", self.center.x.to_string());
        kv("center_y", self.center.y.to_string());
        kv("base_radius", self.base_radius.to_string());
        kv("aspect", self.aspect.to_string());
        let harm: Vec<String> = self
            .harmonics
            .iter()
            .map(|h| format!("{}:{}:{}", h.order, h.amplitude, h.phase))
            .collect();
        kv("harmonics", harm.join(";"));
        kv("oscillation", self.oscillation.to_string());
        kv("period", self.period.to_string());
        kv("lumen", self.lumen.to_string());
        kv("wall", self.wall.to_string());
        kv("background", self.background.to_string());
        kv("wall_thickness", self.wall_thickness.to_string());
        kv("edge_softness", self.edge_softness.to_string());
        kv("noise", self.noise.to_string());
        match self.shadow {
            Some(sh) => kv("shadow", format!("{}:{}:{}", sh.angle, sh.width, sh.attenuation)),
            None => kv("shadow", "none".into()),
        }
        kv("drift_x", self.drift.0.to_string());
        kv("drift_y", self.drift.1.to_string());
        kv("seed", self.seed.to_string());
        s
    }

    /// Parses a manifest; keys absent from `text` keep their defaults.
    pub fn from_manifest(text: &str) -> Result<Self, PhantomError> {
        let mut spec = PhantomSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| PhantomError::Manifest { line: i + 1, reason };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key=value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
            let int = |v: &str| v.parse::<u64>().map_err(|e| err(format!("{key}: {e}")));
            match key {
                "width" => spec.width = int(value)? as usize,
                "height" => spec.height = int(value)? as usize,
                "center_x" => spec.center.x = num(value)?,
                "center_y" => spec.center.y = num(value)?,
                "base_radius" => spec.base_radius = num(value)?,
                "aspect" => spec.aspect = num(value)?,
                "harmonics" => {
                    spec.harmonics = value
                        .split(';')
                        .filter(|s| !s.trim().is_empty())
                        .map(|h| {
                            let parts: Vec<&str> = h.split(':').collect();
                            if parts.len() != 3 {
                                return Err(err("harmonic must be order:amplitude:phase".into()));
                            }
                            Ok(Harmonic {
                                order: int(parts[0])? as u32,
                                amplitude: num(parts[1])?,
                                phase: num(parts[2])?,
                            })
                        })
                        .collect::<Result<_, _>>()?
                }
                "oscillation" => spec.oscillation = num(value)?,
                "period" => spec.period = num(value)?,
                "lumen" => spec.lumen = num(value)?,
                "wall" => spec.wall = num(value)?,
                "background" => spec.background = num(value)?,
                "wall_thickness" => spec.wall_thickness = num(value)?,
                "edge_softness" => spec.edge_softness = num(value)?,
                "noise" => spec.noise = num(value)?,
                "shadow" => {
                    spec.shadow = if value == "none" {
                        None
                    } else {
                        let p: Vec<&str> = value.split(':').collect();
                        if p.len() != 3 {
                            return Err(err("shadow must be angle:width:attenuation or none".into()));
                        }
                        Some(Shadow {
                            angle: num(p[0])?,
                            width: num(p[1])?,
                            attenuation: num(p[2])?,
                        })
                    }
                }
                "drift_x" => spec.drift.0 = num(value)?,
                "drift_y" => spec.drift.1 = num(value)?,
                "seed" => spec.seed = int(value)?,
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load_manifest(path: &Path) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        Ok(Self::from_manifest(&std::fs::read_to_string(path)?)?)
    }
}

/// Frames, masks and truth contours of a generated video.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub frames: Vec<Frame>,
    pub masks: Vec<Mask>,
    pub truth: Vec<PolarContour>,
}

pub fn generate(spec: &PhantomSpec, n_frames: usize) -> Result<Phantom, PhantomError> {
    spec.validate()?;
    let last = n_frames.saturating_sub(1);
    for t in [0, last] {
        let c = spec.center_at(t);
        let reach = spec.truth(t).max_radius() + spec.wall_thickness;
        if c.x - reach < 0.0 || c.y - reach < 0.0 || c.x + reach > spec.width as f64 || c.y + reach > spec.height as f64
        {
            return Err(PhantomError::Invalid(format!("vessel leaves the image by frame {}", t + 1)));
        }
    }
    use rayon::prelude::*;
    let frames = (0..n_frames).into_par_iter().map(|t| spec.frame(t)).collect();
    let truth: Vec<PolarContour> = (0..n_frames).map(|t| spec.truth(t)).collect();
    let masks = truth
        .iter()
        .map(|c| c.rasterize(spec.width, spec.height).expect("truth contour is valid"))
        .collect();
    Ok(Phantom { frames, masks, truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PhantomSpec {
        PhantomSpec {
            width: 120,
            height: 110,
            center: Point::new(60.0, 55.0),
            base_radius: 25.0,
            ..PhantomSpec::default()
        }
    }

    #[test]
    fn presets_table() {
        assert_eq!(preset("good-oval").unwrap().noise, 0.05);
        assert!(preset("good-oval").unwrap().shadow.is_none());
        assert_eq!(preset("poor-shadow").unwrap().shadow.unwrap().attenuation, 0.1);
        assert!(preset("high-variation").unwrap().oscillation >= 0.45);
        assert!(matches!(preset("nope"), Err(PhantomError::UnknownPreset(_))));
        for name in PRESETS {
            preset(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn seeded_frames_are_reproducible() {
        let spec = PhantomSpec { noise: 0.2, seed: 9, ..small() };
        assert_eq!(spec.frame(3), spec.frame(3));
        assert_ne!(spec.frame(3), spec.frame(4));
        let other = PhantomSpec { seed: 10, ..spec.clone() };
        assert_ne!(spec.frame(3), other.frame(3));
    }

    #[test]
    fn static_circle_area() {
        let spec = small();
        let p = generate(&spec, 3).unwrap();
        assert_eq!(p.frames[0], p.frames[2]);
        let area = p.masks[0].count() as f64;
        let expect = PI * 25.0 * 25.0;
        assert!((area - expect).abs() / expect < 0.02, "{area} vs {expect}");
    }

    #[test]
    fn oscillating_area_ratio() {
        let spec = PhantomSpec {
            oscillation: 0.3,
            period: 60.0,
            ..small()
        };
        let spec = PhantomSpec { base_radius: 20.0, ..spec };
        let areas: Vec<f64> = (0..60).map(|t| spec.mask(t).count() as f64).collect();
        let lo = areas.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = areas.iter().cloned().fold(0.0, f64::max);
        let target = (0.7f64 / 1.3).powi(2);
        assert!(((lo / hi) - target).abs() / target < 0.05, "{} vs {target}", lo / hi);
    }

    #[test]
    fn mask_is_rasterised_truth() {
        let spec = PhantomSpec {
            aspect: 0.7,
            harmonics: vec![Harmonic { order: 3, amplitude: 0.1, phase: 0.2 }],
            ..small()
        };
        let p = generate(&spec, 2).unwrap();
        for t in 0..2 {
            assert_eq!(p.masks[t], p.truth[t].rasterize(120, 110).unwrap());
        }
    }

    #[test]
    fn speckle_keeps_region_means() {
        let spec = PhantomSpec {
            width: 200,
            height: 200,
            center: Point::new(100.0, 100.0),
            base_radius: 30.0,
            noise: 0.12,
            seed: 3,
            ..PhantomSpec::default()
        };
        let clean = PhantomSpec { noise: 0.0, ..spec.clone() };
        let (f, g) = (spec.frame(0), clean.frame(0));
        // background region: far corner band
        let (mut a, mut b, mut n) = (0.0, 0.0, 0);
        for y in 0..200 {
            for x in 0..60 {
                a += f.get(x, y);
                b += g.get(x, y);
                n += 1;
            }
        }
        assert!(n >= 10_000);
        assert!((a / b - 1.0).abs() < 0.02, "{}", a / b);
    }

    #[test]
    fn rejects_bad_specs() {
        let spec = PhantomSpec {
            harmonics: vec![Harmonic { order: 2, amplitude: 1.2, phase: 0.0 }],
            ..small()
        };
        assert!(spec.validate().is_err());
        let spec = PhantomSpec { base_radius: 80.0, ..small() };
        assert!(generate(&spec, 1).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        for name in PRESETS {
            let mut spec = preset(name).unwrap();
            spec.seed = 77;
            let back = PhantomSpec::from_manifest(&spec.to_manifest()).unwrap();
            assert_eq!(back, spec);
        }
        assert!(PhantomSpec::from_manifest("bogus=1").is_err());
    }

    #[test]
    fn shadow_darkens_wedge() {
        let spec = PhantomSpec {
            shadow: Some(Shadow { angle: 0.5 * PI, width: PI / 3.0, attenuation: 0.1 }),
            ..small()
        };
        let below = spec.clean_intensity(60.0, 55.0 + 28.0, 0);
        let above = spec.clean_intensity(60.0, 55.0 - 28.0, 0);
        assert!((below - 0.1 * above).abs() < 1e-12);
    }
}
