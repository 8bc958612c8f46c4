//! Polar contours: construction, geometry, point-count update, recentering
//! and rasterization.

use adpac::contour::{update_point_count, Point, PolarContour};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // an ellipse sampled at 32 angles about (60, 50)
    let center = Point::new(60.0, 50.0);
    let n = 32;
    let radii = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            1.0 / ((t.cos() / 30.0).powi(2) + (t.sin() / 18.0).powi(2)).sqrt()
        })
        .collect();
    let c = PolarContour::new(center, radii)?;
    println!("points {}  perimeter {:.2}  area {:.1}", c.len(), c.perimeter(), c.polygon_area());
    println!("exact ellipse area {:.1}", std::f64::consts::PI * 30.0 * 18.0);

    let (inside, outside) = c.sector_area(0, 1.5 * c.max_radius())?;
    println!("sector 0: inside {inside:.2} px², outside {outside:.2} px²");

    // spacing 10 px picks the point count for the next frame
    let n_next = update_point_count(c.perimeter(), 10.0)?;
    println!("next N at spacing 10: {n_next}");

    // the same outline seen from an off-center point, then recentered
    let off = PolarContour::from_polygon(&c.points(), Point::new(64.0, 52.0), n)?;
    let re = off.recenter_resample(n_next)?;
    println!(
        "recentered from ({:.1}, {:.1}) to ({:.2}, {:.2}); non-star rays {}",
        off.center().x,
        off.center().y,
        re.contour.center().x,
        re.contour.center().y,
        re.non_star_rays
    );

    let mask = c.rasterize(120, 100)?;
    println!("rasterized foreground {} px", mask.count());
    Ok(())
}
