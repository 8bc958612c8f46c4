//! Mean DICE against the contour point spacing Λ on one phantom
//! realization, in the CSV form the `sweep` command writes.

use adpac::cli::{sweep_row, SWEEP_HEADER};
use adpac::metrics::{aggregate, confusion};
use adpac::phantom::{generate, preset};
use adpac::tracker::{track_video, AdPacParams};
use rayon::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "good-oval".into());
    let spec = preset(&name)?;
    let video = generate(&spec, 100)?;
    let outline = spec.outline(0, 24, |_| 0.0);
    let spacings = [2.0, 5.0, 10.0, 20.0, 40.0];
    let rows: Vec<String> = spacings
        .par_iter()
        .map(|&spacing| {
            let params = AdPacParams { spacing, ..AdPacParams::default() };
            let r = track_video(video.frames.clone(), &outline, &params).expect("valid params");
            let scores: Vec<_> = r
                .contours
                .iter()
                .zip(&video.masks)
                .map(|(c, m)| confusion(&c.rasterize(spec.width, spec.height).unwrap(), m).unwrap())
                .collect();
            sweep_row(&spacing.to_string(), &aggregate(&scores).unwrap())
        })
        .collect();
    println!("{SWEEP_HEADER}");
    for r in rows {
        println!("{r}");
    }
    Ok(())
}
