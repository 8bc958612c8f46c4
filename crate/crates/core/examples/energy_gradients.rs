//! Energy terms and their analytic gradients on a synthetic dark disk,
//! checked against central differences of the energies.

use adpac::contour::{Point, PolarContour};
use adpac::energy::{
    continuity_energy, continuity_gradient, curvature_energy, curvature_gradient, edge_energy, edge_gradient,
    sector_stats, total_gradient, LocalWeights, TermScales, WeightSet,
};
use adpac::image::{compute_gradients, Frame};

fn central(f: impl Fn(&PolarContour) -> f64, c: &PolarContour, i: usize, h: f64) -> f64 {
    let bump = |d: f64| {
        let mut r = c.radii().to_vec();
        r[i] += d;
        c.with_radii(r).unwrap()
    };
    (f(&bump(h)) - f(&bump(-h))) / (2.0 * h)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let frame = Frame::from_fn(96, 96, |x, y| {
        let r = (x as f64 - 48.0).hypot(y as f64 - 48.0);
        0.5 + 0.4 * ((r - 26.0) / 8.0).tanh()
    })?;
    let field = compute_gradients(&frame);
    let n = 16;
    let radii = (0..n).map(|k| 20.0 + 1.5 * (3.0 * k as f64).sin()).collect();
    let c = PolarContour::new(Point::new(48.0, 48.0), radii)?;
    let w = vec![1.0; n];

    let ga = curvature_gradient(&c, &w);
    let gb = continuity_gradient(&c, &w);
    let ge = edge_gradient(&c, &field, &w);
    println!(" i   curvature (fd)          continuity (fd)        edge (fd, 1 px step)");
    for i in 0..4 {
        println!(
            "{i:2}  {:9.5} ({:9.5})  {:9.5} ({:9.5})  {:9.6} ({:9.6})",
            ga[i],
            central(|c| curvature_energy(c, &w), &c, i, 1e-4),
            gb[i],
            central(|c| continuity_energy(c, &w), &c, i, 1e-4),
            ge[i],
            central(|c| edge_energy(c, &field, &w), &c, i, 1.0),
        );
    }

    let stats = sector_stats(&frame, &c, 1.5 * c.max_radius());
    let ws = WeightSet {
        local: LocalWeights::uniform(n, 1.0),
        scales: TermScales::default(),
    };
    let g = total_gradient(&frame, &field, &c, &ws, &stats, None, 1.0);
    let mean = g.iter().sum::<f64>() / n as f64;
    println!("mean total gradient {mean:+.4} (positive shrinks)");
    Ok(())
}
