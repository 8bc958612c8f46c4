//! Spatial weight adaptation: each term's weight is chosen so its gradient
//! magnitude is one at the reference contour, then blended over frames.

use adpac::adaptation::{adapt_alpha, adapt_beta, apply_forgetting, cap_weights, spatial_weights};
use adpac::contour::PolarContour;
use adpac::energy::{curvature_gradient, sector_stats, TermGradients};
use adpac::image::compute_gradients;
use adpac::phantom::preset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = preset("average-apices")?;
    let frame = spec.frame(0);
    let field = compute_gradients(&frame);
    let c: PolarContour = spec.truth(0).resample(26)?;
    let eps = 1e-4;

    let alpha = adapt_alpha(c.radii(), c.angle_step(), eps);
    let beta = adapt_beta(c.radii(), c.angle_step(), eps);
    let g = curvature_gradient(&c, &alpha);
    let worst = g.iter().map(|v| v.abs()).fold(0.0f64, |a, v| a.max((v - 1.0).abs()));
    println!(
        "alpha range {:.3}..{:.3}; |curvature gradient| off 1 by at most {worst:.3}",
        alpha.iter().copied().fold(f64::INFINITY, f64::min),
        alpha.iter().copied().fold(0.0, f64::max)
    );
    println!("beta[0..4] {:?}", &beta[..4]);

    let stats = sector_stats(&frame, &c, 1.5 * c.max_radius());
    // the closed form assumes neighbouring weights are close; where they
    // are not, capping at 10x the median keeps the terms comparable
    let raw = spatial_weights(&frame, &field, &c, &stats, eps);
    let mut w = raw.clone();
    cap_weights(&mut w, 10.0);
    for (label, lw) in [("raw", &raw), ("capped", &w)] {
        let t = TermGradients::evaluate(&frame, &field, &c, lw, &stats, None);
        for (name, v) in [("curvature", &t.curvature), ("edge", &t.edge), ("region", &t.region)] {
            let mean = v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64;
            println!("{label:>6} {name:>9}: mean |gradient| {mean:.3}");
        }
    }

    // the forgetting factor blends fresh weights with the previous frame's
    let prev = w.clone();
    let next = spatial_weights(&spec.frame(1), &compute_gradients(&spec.frame(1)), &c, &stats, eps);
    let blended = apply_forgetting(0.5, &next, &prev);
    println!("edge weight 0: prev {:.1} fresh {:.1} blended {:.1}", prev.edge[0], next.edge[0], blended.edge[0]);
    Ok(())
}
