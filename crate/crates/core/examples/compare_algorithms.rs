//! Ad-PAC, its two ablations and the classic polar snake on every preset.

use adpac::baseline::{run_algorithm, Algorithm, ClassicPolarParams};
use adpac::metrics::{aggregate, confusion};
use adpac::phantom::{generate, preset, PRESETS};
use adpac::tracker::AdPacParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let frames: usize = std::env::args().nth(1).map_or(Ok(60), |s| s.parse())?;
    let (params, classic) = (AdPacParams::default(), ClassicPolarParams::default());
    print!("{:>16}", "");
    for a in Algorithm::ALL {
        print!("{:>18}", a.name());
    }
    println!();
    for name in PRESETS {
        let spec = preset(name)?;
        let video = generate(&spec, frames)?;
        let outline = spec.outline(0, 24, |_| 0.0);
        print!("{name:>16}");
        for a in Algorithm::ALL {
            let r = run_algorithm(a, video.frames.clone(), &outline, &params, &classic)?;
            let scores = r
                .contours
                .iter()
                .zip(&video.masks)
                .map(|(c, m)| confusion(&c.rasterize(spec.width, spec.height).unwrap(), m).unwrap())
                .collect::<Vec<_>>();
            print!("{:>18.4}", aggregate(&scores)?.dice.mean);
        }
        println!();
    }
    Ok(())
}
