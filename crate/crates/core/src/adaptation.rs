//! Spatial and temporal adaptation of the per-point weights.
//!
//! Spatial weights are the reciprocal magnitudes of each term's gradient
//! on the previous segmentation, so every term contributes a unit push at
//! the previous equilibrium. Temporal smoothing blends them with the
//! weights used on the previous frame.

use crate::contour::PolarContour;
use crate::energy::{variational_coefficients, LocalWeights, SectorStats, StepParams, TermScales};
use crate::image::{Frame, GradientField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptationConfig {
    /// Denominator guard.
    pub epsilon: f64,
    /// Weight of the fresh estimate against the previous one.
    pub forgetting: f64,
    pub spatial: bool,
    pub temporal: bool,
    /// Adapted weights are clipped to this multiple of their median; near-zero
    /// reference gradients otherwise give weights that make the explicit
    /// step unstable. Infinite disables clipping.
    pub cap_ratio: f64,
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            forgetting: 0.5,
            spatial: true,
            temporal: true,
            cap_ratio: 10.0,
        }
    }
}

fn at(v: &[f64], i: isize) -> f64 {
    v[i.rem_euclid(v.len() as isize) as usize]
}

pub fn adapt_alpha(radii: &[f64], phi: f64, epsilon: f64) -> Vec<f64> {
    let (c1, c2) = (phi.cos(), (2.0 * phi).cos());
    (0..radii.len() as isize)
        .map(|n| {
            let b = 12.0 * at(radii, n) - 8.0 * (at(radii, n - 1) + at(radii, n + 1)) * c1
                + 2.0 * (at(radii, n - 2) + at(radii, n + 2)) * c2;
            1.0 / (epsilon + b.abs())
        })
        .collect()
}

pub fn adapt_beta(radii: &[f64], phi: f64, epsilon: f64) -> Vec<f64> {
    let c1 = phi.cos();
    (0..radii.len() as isize)
        .map(|n| {
            let b = 4.0 * at(radii, n) - 2.0 * (at(radii, n - 1) + at(radii, n + 1)) * c1;
            1.0 / (epsilon + b.abs())
        })
        .collect()
}

/// Edge weights from the directional derivative of `|∇I|²` at the
/// previous contour points.
pub fn adapt_gamma(field: &GradientField, contour: &PolarContour, epsilon: f64) -> Vec<f64> {
    (0..contour.len())
        .map(|n| {
            let p = contour.point(n);
            let (s, c) = contour.angle(n).sin_cos();
            let d = field.gx.sample_bilinear(p.x, p.y) * c + field.gy.sample_bilinear(p.x, p.y) * s;
            1.0 / (epsilon + d.abs())
        })
        .collect()
}

/// Region weights from the variational gradient evaluated with unit weights.
pub fn adapt_kappa(stats: &SectorStats, contour: &PolarContour, epsilon: f64) -> Vec<f64> {
    let n = contour.len();
    let iota = variational_coefficients(stats, contour.angle_step(), &vec![1.0; n]);
    let r = contour.radii();
    (0..n as isize)
        .map(|i| {
            let c = at(&iota, i);
            let g = (c + at(&iota, i - 1)) * at(r, i - 1) + 4.0 * c * at(r, i) + (c + at(&iota, i + 1)) * at(r, i + 1);
            1.0 / (epsilon + g.abs())
        })
        .collect()
}

/// Intensity weights: squared intensity at the previous contour points, so
/// dark (broken-edge) points barely constrain the contour.
pub fn adapt_zeta(frame: &Frame, contour: &PolarContour) -> Vec<f64> {
    contour
        .points()
        .iter()
        .map(|p| {
            let v = frame.sample(p.x, p.y);
            v * v
        })
        .collect()
}

/// All five spatial weight vectors for `contour` on the previous frame.
pub fn spatial_weights(
    frame: &Frame,
    field: &GradientField,
    contour: &PolarContour,
    stats: &SectorStats,
    epsilon: f64,
) -> LocalWeights {
    let phi = contour.angle_step();
    LocalWeights {
        curvature: adapt_alpha(contour.radii(), phi, epsilon),
        continuity: adapt_beta(contour.radii(), phi, epsilon),
        edge: adapt_gamma(field, contour, epsilon),
        region: adapt_kappa(stats, contour, epsilon),
        intensity: adapt_zeta(frame, contour),
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Clips every weight vector at `ratio` times its own median.
pub fn cap_weights(weights: &mut LocalWeights, ratio: f64) {
    if !ratio.is_finite() {
        return;
    }
    for v in [
        &mut weights.curvature,
        &mut weights.continuity,
        &mut weights.edge,
        &mut weights.region,
        &mut weights.intensity,
    ] {
        let cap = ratio * median(v);
        v.iter_mut().for_each(|w| *w = w.min(cap));
    }
}

/// Scales the curvature and continuity weights down wherever the explicit
/// step would amplify the alternating mode. The bound is Gershgorin's:
/// rows of the two matrices sum to at most `32α` and `8β`, and the step
/// at point n is `μ₁(1 + μ₂ρₙ)`, so the update is stable while
/// `μ₁(1 + μ₂ρₙ)(32·sα·αₙ + 8·sβ·βₙ) < 2`. `safety` is the fraction of that
/// limit allowed; infinite disables the check. Returns how many points
/// were scaled.
pub fn limit_stiffness(
    weights: &mut LocalWeights,
    radii: &[f64],
    scales: &TermScales,
    step: StepParams,
    safety: f64,
) -> usize {
    if !safety.is_finite() {
        return 0;
    }
    let mut scaled = 0;
    for (n, r) in radii.iter().enumerate() {
        let tau = step.base * (1.0 + step.radial_gain * r);
        let load = tau * (32.0 * scales.curvature * weights.curvature[n] + 8.0 * scales.continuity * weights.continuity[n]);
        if load > 2.0 * safety {
            let f = 2.0 * safety / load;
            weights.curvature[n] *= f;
            weights.continuity[n] *= f;
            scaled += 1;
        }
    }
    scaled
}

/// `ξ·fresh + (1 − ξ)·prev`, term by term.
pub fn apply_forgetting(xi: f64, fresh: &LocalWeights, prev: &LocalWeights) -> LocalWeights {
    assert_eq!(fresh.len(), prev.len(), "weights must be resampled to the same size");
    let blend = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(f, p)| xi * f + (1.0 - xi) * p).collect();
    LocalWeights {
        curvature: blend(&fresh.curvature, &prev.curvature),
        continuity: blend(&fresh.continuity, &prev.continuity),
        edge: blend(&fresh.edge, &prev.edge),
        region: blend(&fresh.region, &prev.region),
        intensity: blend(&fresh.intensity, &prev.intensity),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::Point;
    use crate::energy::{continuity_gradient, curvature_gradient, sector_stats, variational_gradient};
    use crate::image::compute_gradients;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn unit_circle_closed_forms() {
        let r = [1.0; 8];
        let phi = PI / 4.0;
        for a in adapt_alpha(&r, phi, 1e-4) {
            assert_abs_diff_eq!(a, 1.0 / (1e-4 + (12.0 - 16.0 * phi.cos()).abs()), epsilon = 1e-12);
            assert_abs_diff_eq!(a, 1.45710, epsilon = 5e-4);
        }
        for b in adapt_beta(&r, phi, 1e-4) {
            assert_abs_diff_eq!(b, 1.0 / (1e-4 + (4.0 - 4.0 * phi.cos()).abs()), epsilon = 1e-12);
            assert_abs_diff_eq!(b, 0.85346, epsilon = 1e-4);
        }
    }

    #[test]
    fn fixed_point_on_circles() {
        let eps = 1e-4;
        let c = PolarContour::circle(Point::new(0.0, 0.0), 1.0, 8).unwrap();
        let alpha = adapt_alpha(c.radii(), c.angle_step(), eps);
        let beta = adapt_beta(c.radii(), c.angle_step(), eps);
        for g in curvature_gradient(&c, &alpha).into_iter().chain(continuity_gradient(&c, &beta)) {
            assert!((0.98..=1.02).contains(&g.abs()), "{g}");
        }
        // in general the residual is ε / |bracket|
        for n in [8, 16, 64] {
            for r in [1.0, 10.0, 40.0] {
                let c = PolarContour::circle(Point::new(0.0, 0.0), r, n).unwrap();
                let phi = c.angle_step();
                let curv = (12.0 - 16.0 * phi.cos() + 4.0 * (2.0 * phi).cos()) * r;
                let cont = (4.0 - 4.0 * phi.cos()) * r;
                let alpha = adapt_alpha(c.radii(), phi, eps);
                let beta = adapt_beta(c.radii(), phi, eps);
                for g in curvature_gradient(&c, &alpha) {
                    assert!((g.abs() - 1.0).abs() <= eps / curv.abs() + 1e-9, "n={n} r={r} {g}");
                }
                for g in continuity_gradient(&c, &beta) {
                    assert!((g.abs() - 1.0).abs() <= eps / cont.abs() + 1e-9, "n={n} r={r} {g}");
                }
            }
        }
    }

    #[test]
    fn alpha_scales_inversely_with_radius() {
        let r: Vec<f64> = (0..12).map(|i| 5.0 + (i % 5) as f64).collect();
        let phi = 2.0 * PI / 12.0;
        let a = adapt_alpha(&r, phi, 1e-12);
        let scaled: Vec<f64> = r.iter().map(|v| v * 3.0).collect();
        let b = adapt_alpha(&scaled, phi, 1e-12);
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x / y, 3.0, epsilon = 1e-9);
        }
        // collinear neighbours still give a finite weight
        let beta = adapt_beta(&[2.0; 12], phi, 1e-4);
        assert!(beta.iter().all(|b| b.is_finite() && *b > 0.0));
    }

    fn disk_frame() -> Frame {
        Frame::from_fn(80, 80, |x, y| {
            let r = ((x as f64 - 40.0).powi(2) + (y as f64 - 40.0).powi(2)).sqrt();
            0.5 + 0.4 * ((r - 20.0) / 4.0).tanh()
        })
        .unwrap()
    }

    #[test]
    fn gamma_on_flat_and_edged_frames() {
        let flat = Frame::from_fn(40, 40, |_, _| 0.6).unwrap();
        let c = PolarContour::circle(Point::new(20.0, 20.0), 8.0, 10).unwrap();
        assert!(adapt_gamma(&compute_gradients(&flat), &c, 1e-4).iter().all(|&g| g == 1e4));

        let frame = disk_frame();
        let field = compute_gradients(&frame);
        let near = PolarContour::circle(Point::new(40.0, 40.0), 17.0, 16).unwrap();
        let far = PolarContour::circle(Point::new(40.0, 40.0), 8.0, 16).unwrap();
        let g_near = adapt_gamma(&field, &near, 1e-7);
        let g_far = adapt_gamma(&field, &far, 1e-7);
        for n in 0..16 {
            assert!(g_near[n] < g_far[n]);
            let p = near.point(n);
            let (s, c) = near.angle(n).sin_cos();
            let d = field.gx.sample_bilinear(p.x, p.y) * c + field.gy.sample_bilinear(p.x, p.y) * s;
            assert_abs_diff_eq!(g_near[n] * d.abs(), 1.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn kappa_fixed_point_and_flat_frame() {
        let flat = Frame::from_fn(60, 60, |_, _| 0.6).unwrap();
        let c = PolarContour::circle(Point::new(30.0, 30.0), 10.0, 16).unwrap();
        let stats = sector_stats(&flat, &c, 15.0);
        assert!(adapt_kappa(&stats, &c, 1e-4).iter().all(|&k| k == 1e4));

        let frame = disk_frame();
        let c = PolarContour::circle(Point::new(40.0, 40.0), 18.0, 32).unwrap();
        let stats = sector_stats(&frame, &c, 27.0);
        let kappa = adapt_kappa(&stats, &c, 1e-4);
        for g in variational_gradient(&stats, &c, &kappa) {
            assert!((g.abs() - 1.0).abs() <= 0.1, "{g}");
        }
    }

    #[test]
    fn zeta_is_squared_intensity() {
        let frame = Frame::from_fn(20, 20, |x, _| if x < 10 { 0.0 } else if x < 15 { 0.5 } else { 1.0 }).unwrap();
        let c = PolarContour::new(Point::new(10.0, 5.0), vec![8.0, 2.0, 8.0, 3.0]).unwrap();
        // points at x = 18, 10, 2, 10; x = 10 falls in the 0.5 band
        let z = adapt_zeta(&frame, &c);
        assert_eq!(z, vec![1.0, 0.25, 0.0, 0.25]);
        let c = PolarContour::new(Point::new(4.0, 5.0), vec![8.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(adapt_zeta(&frame, &c)[0], 0.25);
    }

    #[test]
    fn capping_at_median_multiple() {
        let mut w = LocalWeights::uniform(5, 1.0);
        w.curvature = vec![1.0, 2.0, 3.0, 100.0, 2.0];
        cap_weights(&mut w, 10.0);
        assert_eq!(w.curvature, vec![1.0, 2.0, 3.0, 20.0, 2.0]);
        assert_eq!(w.edge, vec![1.0; 5]);
        let mut v = w.clone();
        cap_weights(&mut v, f64::INFINITY);
        assert_eq!(v, w);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn forgetting_blends() {
        let fresh = LocalWeights::uniform(4, 2.0);
        let prev = LocalWeights::uniform(4, 1.0);
        assert_eq!(apply_forgetting(1.0, &fresh, &prev), fresh);
        assert_eq!(apply_forgetting(0.0, &fresh, &prev), prev);
        assert_eq!(apply_forgetting(0.5, &fresh, &prev), LocalWeights::uniform(4, 1.5));
    }
}
