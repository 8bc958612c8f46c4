//! Energy terms of the adaptive polar contour, their gradients with respect
//! to the radius vector, and the gradient-descent update.
//!
//! Six terms are combined:
//!
//! | term        | energy                                   | gradient               |
//! |-------------|------------------------------------------|------------------------|
//! | curvature   | `Σ αₙ |pₙ₊₁ − 2pₙ + pₙ₋₁|²`               | penta-diagonal `A·ρ`   |
//! | continuity  | `Σ βₙ |pₙ₊₁ − pₙ|²`                       | tri-diagonal `B·ρ`     |
//! | edge        | `−Σ γₙ |∇I(pₙ)|²`                         | radial derivative      |
//! | region      | `−Σ κₙ (uₙ − vₙ)²`                        | tri-diagonal `U·ρ`     |
//! | intensity   | `Σ ζₙ (I(pₙ) − I₀(pₙ))²`                  | radial derivative      |
//! | contraction | `−Σ ρₙ`                                   | constant               |
//!
//! Each term carries a per-point weight vector ([`LocalWeights`]) and a
//! global multiplier ([`TermScales`]).

use std::f64::consts::PI;

use crate::contour::{PolarContour, MIN_RADIUS};
use crate::image::{Frame, GradientField};

/// Sector areas below this are treated as singular in the region gradient.
pub const AREA_GUARD: f64 = 1e-6;

/// Per-point weights, one vector per spatially adapted term.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalWeights {
    pub curvature: Vec<f64>,
    pub continuity: Vec<f64>,
    pub edge: Vec<f64>,
    pub region: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl LocalWeights {
    pub fn uniform(n: usize, value: f64) -> Self {
        Self {
            curvature: vec![value; n],
            continuity: vec![value; n],
            edge: vec![value; n],
            region: vec![value; n],
            intensity: vec![value; n],
        }
    }

    pub fn len(&self) -> usize {
        self.curvature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curvature.is_empty()
    }

    pub fn vectors(&self) -> [&Vec<f64>; 5] {
        [&self.curvature, &self.continuity, &self.edge, &self.region, &self.intensity]
    }

    /// Every vector has the same length and only finite, non-negative entries.
    pub fn is_valid(&self) -> bool {
        let n = self.len();
        self.vectors()
            .iter()
            .all(|v| v.len() == n && v.iter().all(|w| w.is_finite() && *w >= 0.0))
    }

    /// Periodic linear re-interpolation of every vector to `n` points.
    pub fn resampled(&self, n: usize) -> Self {
        Self {
            curvature: resample_periodic(&self.curvature, n),
            continuity: resample_periodic(&self.continuity, n),
            edge: resample_periodic(&self.edge, n),
            region: resample_periodic(&self.region, n),
            intensity: resample_periodic(&self.intensity, n),
        }
    }
}

/// Linear interpolation of a periodic sequence sampled at uniform angles.
pub fn resample_periodic(values: &[f64], n: usize) -> Vec<f64> {
    let m = values.len();
    if m == n {
        return values.to_vec();
    }
    (0..n)
        .map(|k| {
            let pos = k as f64 * m as f64 / n as f64;
            let i = pos.floor() as usize % m;
            let t = pos - pos.floor();
            values[i] * (1.0 - t) + values[(i + 1) % m] * t
        })
        .collect()
}

/// Global multipliers of the six energy terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermScales {
    pub curvature: f64,
    pub continuity: f64,
    pub edge: f64,
    pub region: f64,
    pub intensity: f64,
    pub contraction: f64,
}

impl Default for TermScales {
    fn default() -> Self {
        Self {
            curvature: 1.0,
            continuity: 0.0,
            edge: 0.05,
            region: 0.8,
            intensity: 150.0,
            contraction: 0.0012,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    pub local: LocalWeights,
    pub scales: TermScales,
}

/// Local region statistics for each sector of the contour.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorStats {
    /// Mean intensity inside the contour within sector n.
    pub inside_mean: Vec<f64>,
    /// Mean intensity between the contour and the search radius.
    pub outside_mean: Vec<f64>,
    pub inside_area: Vec<f64>,
    pub outside_area: Vec<f64>,
    /// Intensity sampled at the contour point.
    pub boundary_intensity: Vec<f64>,
    /// Regions with no pixels, whose mean fell back to the frame mean.
    pub fallbacks: usize,
}

impl SectorStats {
    pub fn len(&self) -> usize {
        self.inside_mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inside_mean.is_empty()
    }

    /// Combines region means with the current contour's areas and boundary
    /// intensities.
    pub fn from_means(
        frame: &Frame,
        contour: &PolarContour,
        search_radius: f64,
        inside_mean: Vec<f64>,
        outside_mean: Vec<f64>,
        fallbacks: usize,
    ) -> Self {
        let n = contour.len();
        let wedge = 0.5 * contour.angle_step() * search_radius * search_radius;
        let inside_area: Vec<f64> = (0..n).map(|i| contour.sector_inside_area(i)).collect();
        let outside_area = inside_area.iter().map(|a| (wedge - a).max(0.0)).collect();
        let boundary_intensity = contour.points().iter().map(|p| frame.sample(p.x, p.y)).collect();
        Self {
            inside_mean,
            outside_mean,
            inside_area,
            outside_area,
            boundary_intensity,
            fallbacks,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct SectorPixel {
    sector: u32,
    chord: u32,
    sin_lead: f64,
    sin_trail: f64,
    radius: f64,
    value: f64,
}

/// Pixels within the search radius of a fixed center, bucketed by sector.
///
/// Built once per frame and contour size; region means for any radius
/// vector at that center are then a single pass over the cached pixels.
#[derive(Debug, Clone)]
pub struct SectorIndex {
    n: usize,
    center: (f64, f64),
    search_radius: f64,
    pixels: Vec<SectorPixel>,
    frame_mean: f64,
}

impl SectorIndex {
    pub fn new(frame: &Frame, contour: &PolarContour, search_radius: f64) -> Self {
        let n = contour.len();
        let c = contour.center();
        let phi = contour.angle_step();
        let (w, h) = (frame.width() as isize, frame.height() as isize);
        let x0 = ((c.x - search_radius).floor() as isize).clamp(0, w - 1);
        let x1 = ((c.x + search_radius).ceil() as isize).clamp(0, w - 1);
        let y0 = ((c.y - search_radius).floor() as isize).clamp(0, h - 1);
        let y1 = ((c.y + search_radius).ceil() as isize).clamp(0, h - 1);
        let r2 = search_radius * search_radius;
        let mut pixels = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 - c.x;
                let dy = y as f64 - c.y;
                let d2 = dx * dx + dy * dy;
                if d2 > r2 {
                    continue;
                }
                let theta = dy.atan2(dx).rem_euclid(2.0 * PI);
                let pos = theta / phi;
                let sector = ((pos + 0.5).floor() as usize) % n;
                let chord = (pos.floor() as usize) % n;
                let lead = theta - chord as f64 * phi;
                pixels.push(SectorPixel {
                    sector: sector as u32,
                    chord: chord as u32,
                    sin_lead: lead.sin(),
                    sin_trail: (phi - lead).sin(),
                    radius: d2.sqrt(),
                    value: frame.get(x as usize, y as usize),
                });
            }
        }
        Self {
            n,
            center: (c.x, c.y),
            search_radius,
            pixels,
            frame_mean: frame.raster().mean(),
        }
    }

    pub fn search_radius(&self) -> f64 {
        self.search_radius
    }

    /// Whether this index was built for `contour`'s center and size.
    pub fn matches(&self, contour: &PolarContour) -> bool {
        let c = contour.center();
        contour.len() == self.n && c.x == self.center.0 && c.y == self.center.1
    }

    /// Inside / outside mean intensity per sector. A pixel is inside when
    /// its distance from the center is at most the polygon boundary along
    /// its direction.
    pub fn region_means(&self, radii: &[f64]) -> (Vec<f64>, Vec<f64>, usize) {
        assert_eq!(radii.len(), self.n);
        let sin_step = (2.0 * PI / self.n as f64).sin();
        let mut sum_in = vec![0.0; self.n];
        let mut cnt_in = vec![0usize; self.n];
        let mut sum_out = vec![0.0; self.n];
        let mut cnt_out = vec![0usize; self.n];
        for p in &self.pixels {
            let a = p.chord as usize;
            let ra = radii[a];
            let rb = radii[(a + 1) % self.n];
            let denom = ra * p.sin_lead + rb * p.sin_trail;
            let boundary = if denom > 0.0 { ra * rb * sin_step / denom } else { ra };
            let s = p.sector as usize;
            if p.radius <= boundary {
                sum_in[s] += p.value;
                cnt_in[s] += 1;
            } else {
                sum_out[s] += p.value;
                cnt_out[s] += 1;
            }
        }
        let mut fallbacks = 0;
        let mut mean = |sum: &[f64], cnt: &[usize]| -> Vec<f64> {
            sum.iter()
                .zip(cnt)
                .map(|(s, &c)| {
                    if c == 0 {
                        fallbacks += 1;
                        self.frame_mean
                    } else {
                        s / c as f64
                    }
                })
                .collect()
        };
        let inside = mean(&sum_in, &cnt_in);
        let outside = mean(&sum_out, &cnt_out);
        (inside, outside, fallbacks)
    }

    pub fn stats(&self, frame: &Frame, contour: &PolarContour) -> SectorStats {
        let (u, v, fallbacks) = self.region_means(contour.radii());
        SectorStats::from_means(frame, contour, self.search_radius, u, v, fallbacks)
    }
}

/// Sector statistics of `contour` on `frame` for search radius `search_radius`.
pub fn sector_stats(frame: &Frame, contour: &PolarContour, search_radius: f64) -> SectorStats {
    SectorIndex::new(frame, contour, search_radius).stats(frame, contour)
}

/// Step sizes of the radius update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub base: f64,
    /// Extra step proportional to the radius.
    pub radial_gain: f64,
}

impl Default for StepParams {
    fn default() -> Self {
        Self {
            base: 1e-4,
            radial_gain: 1.0,
        }
    }
}

/// Applies a circulant banded matrix given as per-row coefficients for
/// column offsets `-K..=K` (`bands[i][K + d]` multiplies `ρ[i + d]`).
/// Overlapping bands on short contours accumulate.
pub fn banded_apply<const W: usize>(bands: &[[f64; W]], rho: &[f64]) -> Vec<f64> {
    let n = rho.len() as isize;
    let half = (W / 2) as isize;
    bands
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(k, coef)| coef * rho[(i as isize + k as isize - half).rem_euclid(n) as usize])
                .sum()
        })
        .collect()
}

fn at(v: &[f64], i: isize) -> f64 {
    v[i.rem_euclid(v.len() as isize) as usize]
}

pub fn curvature_energy(contour: &PolarContour, weights: &[f64]) -> f64 {
    let phi = contour.angle_step();
    let (c1, c2) = (phi.cos(), (2.0 * phi).cos());
    let r = contour.radii();
    (0..r.len() as isize)
        .map(|n| {
            let (rp, rc, rn) = (at(r, n - 1), at(r, n), at(r, n + 1));
            weights[n as usize]
                * (4.0 * rc * rc + rp * rp + rn * rn - 4.0 * rc * (rp + rn) * c1 + 2.0 * rp * rn * c2)
        })
        .sum()
}

/// Rows of the penta-diagonal curvature matrix.
pub fn curvature_matrix(n: usize, weights: &[f64]) -> Vec<[f64; 5]> {
    let phi = 2.0 * PI / n as f64;
    let (c1, c2) = (phi.cos(), (2.0 * phi).cos());
    (0..n as isize)
        .map(|i| {
            let (wp, wc, wn) = (at(weights, i - 1), at(weights, i), at(weights, i + 1));
            [
                2.0 * wp * c2,
                -4.0 * (wp + wc) * c1,
                2.0 * (wp + 4.0 * wc + wn),
                -4.0 * (wc + wn) * c1,
                2.0 * wn * c2,
            ]
        })
        .collect()
}

pub fn curvature_gradient(contour: &PolarContour, weights: &[f64]) -> Vec<f64> {
    banded_apply(&curvature_matrix(contour.len(), weights), contour.radii())
}

pub fn continuity_energy(contour: &PolarContour, weights: &[f64]) -> f64 {
    let c1 = contour.angle_step().cos();
    let r = contour.radii();
    (0..r.len() as isize)
        .map(|n| {
            let (rc, rn) = (at(r, n), at(r, n + 1));
            weights[n as usize] * (rc * rc - 2.0 * rc * rn * c1 + rn * rn)
        })
        .sum()
}

/// Rows of the tri-diagonal continuity matrix.
pub fn continuity_matrix(n: usize, weights: &[f64]) -> Vec<[f64; 3]> {
    let c1 = (2.0 * PI / n as f64).cos();
    (0..n as isize)
        .map(|i| {
            let (wp, wc) = (at(weights, i - 1), at(weights, i));
            [-2.0 * wp * c1, 2.0 * (wc + wp), -2.0 * wc * c1]
        })
        .collect()
}

pub fn continuity_gradient(contour: &PolarContour, weights: &[f64]) -> Vec<f64> {
    banded_apply(&continuity_matrix(contour.len(), weights), contour.radii())
}

pub fn edge_energy(contour: &PolarContour, field: &GradientField, weights: &[f64]) -> f64 {
    -contour
        .points()
        .iter()
        .zip(weights)
        .map(|(p, w)| w * field.gmag2.sample_bilinear(p.x, p.y))
        .sum::<f64>()
}

/// Radial derivative of the edge energy at each point.
pub fn edge_gradient(contour: &PolarContour, field: &GradientField, weights: &[f64]) -> Vec<f64> {
    (0..contour.len())
        .map(|i| {
            let p = contour.point(i);
            let (s, c) = contour.angle(i).sin_cos();
            -weights[i] * (field.gx.sample_bilinear(p.x, p.y) * c + field.gy.sample_bilinear(p.x, p.y) * s)
        })
        .collect()
}

pub fn variational_energy(stats: &SectorStats, weights: &[f64]) -> f64 {
    -stats
        .inside_mean
        .iter()
        .zip(&stats.outside_mean)
        .zip(weights)
        .map(|((u, v), w)| w * (u - v) * (u - v))
        .sum::<f64>()
}

/// Per-sector coefficient of the region gradient: `∂E/∂Aₙ · sin(φ₀/2)/4`.
///
/// Moving the boundary adds `Iₙ·dA` to the inside sum and removes it from
/// the outside one, so `∂(u−v)/∂A = (Iₙ−uₙ)/Aₙ + (Iₙ−vₙ)/Aₙᶜ`.
pub fn variational_coefficients(stats: &SectorStats, phi: f64, weights: &[f64]) -> Vec<f64> {
    let s = (0.5 * phi).sin();
    (0..stats.len())
        .map(|i| {
            let (a, ac) = (stats.inside_area[i], stats.outside_area[i]);
            if a < AREA_GUARD || ac < AREA_GUARD {
                return 0.0;
            }
            let (u, v, b) = (stats.inside_mean[i], stats.outside_mean[i], stats.boundary_intensity[i]);
            -0.5 * weights[i] * s * (u - v) * ((b - u) / a + (b - v) / ac)
        })
        .collect()
}

/// Rows of the tri-diagonal region matrix built from the sector coefficients.
pub fn variational_matrix(coef: &[f64]) -> Vec<[f64; 3]> {
    (0..coef.len() as isize)
        .map(|i| {
            let c = at(coef, i);
            [c + at(coef, i - 1), 4.0 * c, c + at(coef, i + 1)]
        })
        .collect()
}

pub fn variational_gradient(stats: &SectorStats, contour: &PolarContour, weights: &[f64]) -> Vec<f64> {
    let coef = variational_coefficients(stats, contour.angle_step(), weights);
    banded_apply(&variational_matrix(&coef), contour.radii())
}

pub fn intensity_energy(frame: &Frame, contour: &PolarContour, weights: &[f64], reference: &[f64]) -> f64 {
    contour
        .points()
        .iter()
        .zip(weights)
        .zip(reference)
        .map(|((p, w), r)| {
            let d = frame.sample(p.x, p.y) - r;
            w * d * d
        })
        .sum()
}

/// `ζᵢ (I(pᵢ) − I₀ᵢ) ∂I/∂r`, the intensity-energy gradient up to a factor 2.
pub fn intensity_gradient(
    frame: &Frame,
    field: &GradientField,
    contour: &PolarContour,
    weights: &[f64],
    reference: &[f64],
) -> Vec<f64> {
    (0..contour.len())
        .map(|i| {
            let p = contour.point(i);
            let (s, c) = contour.angle(i).sin_cos();
            let radial = field.ix.sample_bilinear(p.x, p.y) * c + field.iy.sample_bilinear(p.x, p.y) * s;
            weights[i] * (frame.sample(p.x, p.y) - reference[i]) * radial
        })
        .collect()
}

pub fn contraction_energy(contour: &PolarContour) -> f64 {
    -contour.radii().iter().sum::<f64>()
}

/// Individually weighted term gradients, before global scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct TermGradients {
    pub curvature: Vec<f64>,
    pub continuity: Vec<f64>,
    pub edge: Vec<f64>,
    pub region: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl TermGradients {
    /// Evaluates every term on one contour and frame. `reference == None`
    /// switches the intensity term off.
    pub fn evaluate(
        frame: &Frame,
        field: &GradientField,
        contour: &PolarContour,
        weights: &LocalWeights,
        stats: &SectorStats,
        reference: Option<&[f64]>,
    ) -> Self {
        let n = contour.len();
        Self {
            curvature: curvature_gradient(contour, &weights.curvature),
            continuity: continuity_gradient(contour, &weights.continuity),
            edge: edge_gradient(contour, field, &weights.edge),
            region: variational_gradient(stats, contour, &weights.region),
            intensity: match reference {
                Some(r) => intensity_gradient(frame, field, contour, &weights.intensity, r),
                None => vec![0.0; n],
            },
        }
    }

    /// `α·A·ρ + β·B·ρ + κ·U·ρ + γ·G + ζ·χ + sign·ν·1`.
    pub fn assemble(&self, scales: &TermScales, contraction_sign: f64) -> Vec<f64> {
        (0..self.curvature.len())
            .map(|i| {
                scales.curvature * self.curvature[i]
                    + scales.continuity * self.continuity[i]
                    + scales.region * self.region[i]
                    + scales.edge * self.edge[i]
                    + scales.intensity * self.intensity[i]
                    + contraction_sign * scales.contraction
            })
            .collect()
    }
}

/// Total energy gradient for one frame.
pub fn total_gradient(
    frame: &Frame,
    field: &GradientField,
    contour: &PolarContour,
    weights: &WeightSet,
    stats: &SectorStats,
    reference: Option<&[f64]>,
    contraction_sign: f64,
) -> Vec<f64> {
    TermGradients::evaluate(frame, field, contour, &weights.local, stats, reference)
        .assemble(&weights.scales, contraction_sign)
}

/// Total energy for one frame, consistent with [`total_gradient`] up to the
/// factor-2 and contraction-sign conventions noted on each term.
pub fn total_energy(
    frame: &Frame,
    field: &GradientField,
    contour: &PolarContour,
    weights: &WeightSet,
    stats: &SectorStats,
    reference: Option<&[f64]>,
) -> f64 {
    let (l, s) = (&weights.local, &weights.scales);
    s.curvature * curvature_energy(contour, &l.curvature)
        + s.continuity * continuity_energy(contour, &l.continuity)
        + s.edge * edge_energy(contour, field, &l.edge)
        + s.region * variational_energy(stats, &l.region)
        + reference.map_or(0.0, |r| s.intensity * intensity_energy(frame, contour, &l.intensity, r))
        + s.contraction * contraction_energy(contour)
}

/// `ρ − μ₁(1 + μ₂ρ) ⊙ ∇E`, floored at [`MIN_RADIUS`].
pub fn gd_step(radii: &[f64], gradient: &[f64], step: StepParams) -> Vec<f64> {
    assert_eq!(radii.len(), gradient.len());
    radii
        .iter()
        .zip(gradient)
        .map(|(r, g)| (r - step.base * (1.0 + step.radial_gain * r) * g).max(MIN_RADIUS))
        .collect()
}
