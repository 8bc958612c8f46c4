//! Polar contour representation and geometry.
//!
//! A [`PolarContour`] is a center plus `N` radii sampled at the uniform
//! angles `n · 2π/N`. Points only ever move along their ray, so the state
//! being optimized is just the radius vector. All index arithmetic wraps
//! modulo `N`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::Mask;
use crate::spline::PeriodicSpline;

/// Smallest point count a contour may have.
pub const MIN_POINTS: usize = 4;

/// Radii never drop below this after an update.
pub const MIN_RADIUS: f64 = 0.5;

/// Dense samples per knot interval used to bracket ray intersections.
const RAY_SAMPLES_PER_KNOT: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("a contour needs at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("radius {index} is {value}; radii must be finite and non-negative")]
    InvalidRadius { index: usize, value: f64 },
    #[error("center ({0}, {1}) is not finite")]
    InvalidCenter(f64, f64),
    #[error("point spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("perimeter must be positive, got {0}")]
    NonPositivePerimeter(f64),
    #[error("search radius {radius} is smaller than the largest contour radius {max_radius}")]
    SearchRadiusTooSmall { radius: f64, max_radius: f64 },
    #[error("cannot rasterize into an empty {0}x{1} image")]
    EmptyImage(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarContour {
    center: Point,
    radii: Vec<f64>,
}

impl PolarContour {
    pub fn new(center: Point, radii: Vec<f64>) -> Result<Self, ContourError> {
        if radii.len() < MIN_POINTS {
            return Err(ContourError::TooFewPoints(radii.len()));
        }
        if !center.x.is_finite() || !center.y.is_finite() {
            return Err(ContourError::InvalidCenter(center.x, center.y));
        }
        if let Some((index, &value)) = radii
            .iter()
            .enumerate()
            .find(|(_, r)| !r.is_finite() || **r < 0.0)
        {
            return Err(ContourError::InvalidRadius { index, value });
        }
        Ok(Self { center, radii })
    }

    pub fn circle(center: Point, radius: f64, n: usize) -> Result<Self, ContourError> {
        Self::new(center, vec![radius; n])
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Angular spacing `2π/N`.
    pub fn angle_step(&self) -> f64 {
        2.0 * PI / self.radii.len() as f64
    }

    pub fn angle(&self, n: usize) -> f64 {
        (n % self.len()) as f64 * self.angle_step()
    }

    /// Radius at a wrapped (possibly negative) index.
    pub fn radius(&self, n: isize) -> f64 {
        self.radii[n.rem_euclid(self.len() as isize) as usize]
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }

    /// Cartesian position of point `n` (index wraps).
    pub fn point(&self, n: usize) -> Point {
        let n = n % self.len();
        let (s, c) = self.angle(n).sin_cos();
        Point::new(self.center.x + self.radii[n] * c, self.center.y + self.radii[n] * s)
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|n| self.point(n)).collect()
    }

    /// Same angles and center, new radii.
    pub fn with_radii(&self, radii: Vec<f64>) -> Result<Self, ContourError> {
        Self::new(self.center, radii)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            center: Point::new(self.center.x + dx, self.center.y + dy),
            radii: self.radii.clone(),
        }
    }

    /// Length of the closed polygon through the contour points.
    pub fn perimeter(&self) -> f64 {
        let pts = self.points();
        let n = pts.len();
        (0..n).map(|i| pts[i].distance(pts[(i + 1) % n])).sum()
    }

    /// Shoelace area of the closed polygon.
    pub fn polygon_area(&self) -> f64 {
        let phi = self.angle_step();
        let n = self.len();
        0.5 * phi.sin() * (0..n).map(|i| self.radii[i] * self.radii[(i + 1) % n]).sum::<f64>()
    }

    /// Inside / outside areas of sector `n` for a search radius `search_radius`.
    ///
    /// The inside area is the kite spanned by the center, `p_n` and the two
    /// half-angle points at the mean radius of each neighbour pair.
    pub fn sector_area(&self, n: usize, search_radius: f64) -> Result<(f64, f64), ContourError> {
        let max_radius = self.max_radius();
        if search_radius < max_radius {
            return Err(ContourError::SearchRadiusTooSmall {
                radius: search_radius,
                max_radius,
            });
        }
        let inside = self.sector_inside_area(n);
        Ok((inside, 0.5 * self.angle_step() * search_radius * search_radius - inside))
    }

    pub(crate) fn sector_inside_area(&self, n: usize) -> f64 {
        let i = n as isize;
        let half = 0.5 * self.angle_step();
        0.25 * half.sin() * self.radius(i) * (self.radius(i + 1) + 2.0 * self.radius(i) + self.radius(i - 1))
    }

    /// Mean of the contour-point offsets from the current center.
    pub fn centroid(&self) -> Point {
        let n = self.len() as f64;
        let (sx, sy) = (0..self.len()).fold((0.0, 0.0), |(sx, sy), i| {
            let (s, c) = self.angle(i).sin_cos();
            (sx + self.radii[i] * c, sy + self.radii[i] * s)
        });
        Point::new(self.center.x + sx / n, self.center.y + sy / n)
    }

    /// Moves the center to [`centroid`](Self::centroid) and re-samples the
    /// boundary at `n_new` uniform angles about it.
    ///
    /// The boundary is the periodic cubic spline of `ρ(θ)` about the old
    /// center; each new ray is intersected with that curve.
    pub fn recenter_resample(&self, n_new: usize) -> Result<Resampled, ContourError> {
        if n_new < MIN_POINTS {
            return Err(ContourError::TooFewPoints(n_new));
        }
        let boundary = SplineBoundary::new(self);
        let new_center = self.centroid();
        let mut non_star_rays = 0;
        let mut radii = Vec::with_capacity(n_new);
        let step = 2.0 * PI / n_new as f64;
        for m in 0..n_new {
            let hits = boundary.ray_hits(new_center, m as f64 * step);
            if hits.len() > 1 {
                non_star_rays += 1;
            }
            let r = match hits.iter().copied().reduce(f64::max) {
                Some(r) => r,
                None => {
                    // Center fell outside the curve; fall back to the old center.
                    return self.resample_about_old_center(n_new, &boundary, non_star_rays + 1);
                }
            };
            radii.push(r.max(MIN_RADIUS));
        }
        Ok(Resampled {
            contour: PolarContour::new(new_center, radii)?,
            non_star_rays,
        })
    }

    /// Re-samples at `n_new` angles keeping the current center.
    pub fn resample(&self, n_new: usize) -> Result<PolarContour, ContourError> {
        if n_new < MIN_POINTS {
            return Err(ContourError::TooFewPoints(n_new));
        }
        let boundary = SplineBoundary::new(self);
        let step = 2.0 * PI / n_new as f64;
        let radii = (0..n_new)
            .map(|m| boundary.radius.eval(m as f64 * step).max(MIN_RADIUS))
            .collect();
        PolarContour::new(self.center, radii)
    }

    fn resample_about_old_center(
        &self,
        n_new: usize,
        boundary: &SplineBoundary,
        warnings: usize,
    ) -> Result<Resampled, ContourError> {
        let step = 2.0 * PI / n_new as f64;
        let radii = (0..n_new)
            .map(|m| boundary.radius.eval(m as f64 * step).max(MIN_RADIUS))
            .collect();
        Ok(Resampled {
            contour: PolarContour::new(self.center, radii)?,
            non_star_rays: warnings,
        })
    }

    /// Foreground mask of the closed polygon, pixel centers at integer
    /// coordinates, even-odd rule.
    pub fn rasterize(&self, width: usize, height: usize) -> Result<Mask, ContourError> {
        if width == 0 || height == 0 {
            return Err(ContourError::EmptyImage(width, height));
        }
        Ok(rasterize_polygon(&self.points(), width, height))
    }

    /// Converts a closed polygon to a polar contour with `n` rays about
    /// `center`, taking the farthest crossing on each ray.
    pub fn from_polygon(vertices: &[Point], center: Point, n: usize) -> Result<Self, ContourError> {
        if n < MIN_POINTS {
            return Err(ContourError::TooFewPoints(n));
        }
        let step = 2.0 * PI / n as f64;
        let radii = (0..n)
            .map(|m| {
                ray_polygon_hits(vertices, center, m as f64 * step)
                    .into_iter()
                    .reduce(f64::max)
                    .unwrap_or(MIN_RADIUS)
                    .max(MIN_RADIUS)
            })
            .collect();
        Self::new(center, radii)
    }
}

/// Output of [`PolarContour::recenter_resample`].
#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub contour: PolarContour,
    /// Rays that crossed the interpolated boundary more than once.
    pub non_star_rays: usize,
}

/// `⌈perimeter / spacing⌉`, clamped to at least [`MIN_POINTS`].
pub fn update_point_count(perimeter: f64, spacing: f64) -> Result<usize, ContourError> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(ContourError::NonPositiveSpacing(spacing));
    }
    if !(perimeter > 0.0) || !perimeter.is_finite() {
        return Err(ContourError::NonPositivePerimeter(perimeter));
    }
    Ok(((perimeter / spacing).ceil() as usize).max(MIN_POINTS))
}

struct SplineBoundary {
    center: Point,
    radius: PeriodicSpline,
    knots: usize,
}

impl SplineBoundary {
    fn new(c: &PolarContour) -> Self {
        Self {
            center: c.center,
            radius: PeriodicSpline::new(&c.radii, c.angle_step()),
            knots: c.len(),
        }
    }

    fn at(&self, theta: f64) -> Point {
        let r = self.radius.eval(theta);
        let (s, c) = theta.sin_cos();
        Point::new(self.center.x + r * c, self.center.y + r * s)
    }

    /// Distances from `origin` to every forward crossing of the ray at
    /// angle `psi` with the curve.
    fn ray_hits(&self, origin: Point, psi: f64) -> Vec<f64> {
        let (dy, dx) = psi.sin_cos();
        let side = |t: f64| {
            let p = self.at(t);
            dx * (p.y - origin.y) - dy * (p.x - origin.x)
        };
        let samples = self.knots * RAY_SAMPLES_PER_KNOT;
        let dt = 2.0 * PI / samples as f64;
        let mut hits = Vec::new();
        // half-sample offset keeps knot-aligned rays off the sample grid;
        // the last interval reuses the first value so the loop closes exactly
        let start = 0.5 * dt;
        let first = side(start);
        let mut t0 = start;
        let mut f0 = first;
        for k in 1..=samples {
            let t1 = start + k as f64 * dt;
            let f1 = if k == samples { first } else { side(t1) };
            if (f0 < 0.0) != (f1 < 0.0) {
                let root = bisect(&side, t0, t1, f0);
                let p = self.at(root);
                let along = dx * (p.x - origin.x) + dy * (p.y - origin.y);
                if along > 0.0 {
                    hits.push(p.distance(origin));
                }
            }
            t0 = t1;
            f0 = f1;
        }
        hits
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Distances along the ray from `origin` at angle `psi` to each polygon edge it crosses.
pub(crate) fn ray_polygon_hits(vertices: &[Point], origin: Point, psi: f64) -> Vec<f64> {
    let (dy, dx) = psi.sin_cos();
    let n = vertices.len();
    let mut hits = Vec::new();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let ex = b.x - a.x;
        let ey = b.y - a.y;
        let denom = dx * ey - dy * ex;
        if denom.abs() < 1e-12 {
            continue;
        }
        let wx = a.x - origin.x;
        let wy = a.y - origin.y;
        let t = (wx * ey - wy * ex) / denom;
        let s = (wx * dy - wy * dx) / denom;
        // closed and slightly widened: a ray through a vertex must not slip
        // between its two edges by rounding
        if t > 0.0 && (-1e-9..=1.0 + 1e-9).contains(&s) {
            hits.push(t);
        }
    }
    hits
}

/// Even-odd point-in-polygon test with the half-open edge convention used
/// by [`rasterize_polygon`].
pub fn point_in_polygon(vertices: &[Point], p: Point) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

pub(crate) fn rasterize_polygon(vertices: &[Point], width: usize, height: usize) -> Mask {
    let mut mask = Mask::new(width, height);
    let n = vertices.len();
    let (ymin, ymax) = vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
    if !(ymax >= 0.0) || ymin > (height - 1) as f64 {
        return mask;
    }
    let y_start = ymin.max(0.0).floor() as usize;
    let y_end = (ymax.ceil() as usize).min(height - 1);
    let mut crossings = Vec::with_capacity(8);
    for y in y_start..=y_end {
        let py = y as f64;
        crossings.clear();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            if (a.y > py) != (b.y > py) {
                crossings.push(a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        crossings.sort_by(|a, b| a.total_cmp(b));
        // pixel x is inside iff an odd number of crossings lie strictly right of it,
        // i.e. x falls in some [c_2j, c_2j+1)
        for pair in crossings.chunks_exact(2) {
            let x0 = pair[0].ceil().max(0.0);
            let mut x = x0 as usize;
            while x < width && (x as f64) < pair[1] {
                mask.set(x, y, true);
                x += 1;
            }
        }
    }
    mask
}

/// One line of a contour JSON-lines stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourRecord {
    pub frame: usize,
    pub center: [f64; 2],
    pub radii: Vec<f64>,
}

impl ContourRecord {
    pub fn new(frame: usize, contour: &PolarContour) -> Self {
        Self {
            frame,
            center: [contour.center.x, contour.center.y],
            radii: contour.radii.clone(),
        }
    }

    pub fn to_contour(&self) -> Result<PolarContour, ContourError> {
        PolarContour::new(Point::new(self.center[0], self.center[1]), self.radii.clone())
    }
}
