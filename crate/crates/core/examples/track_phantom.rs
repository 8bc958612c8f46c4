//! Tracks a preset phantom with Ad-PAC and scores every frame.
//!
//! Extra `key=value` arguments override phantom manifest keys, e.g.
//! cargo run --release --example track_phantom -- poor-shadow 100 noise=0.3

use adpac::metrics::{aggregate, confusion};
use adpac::phantom::{generate, preset, PhantomSpec};
use adpac::tracker::{track_video, AdPacParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let name = args.get(1).map_or("good-oval", String::as_str);
    let frames: usize = args.get(2).map_or(Ok(100), |s| s.parse())?;
    let mut manifest = preset(name)?.to_manifest();
    for kv in args.iter().skip(3) {
        manifest.push_str(kv);
        manifest.push('\n');
    }
    let spec = PhantomSpec::from_manifest(&manifest)?;
    let video = generate(&spec, frames)?;
    let outline = spec.outline(0, 24, |_| 0.0);

    let start = std::time::Instant::now();
    let result = track_video(video.frames.clone(), &outline, &AdPacParams::default())?;
    let seconds = start.elapsed().as_secs_f64();
    if let Some((frame, e)) = &result.error {
        println!("stopped at frame {frame}: {e}");
    }
    let scores = result
        .contours
        .iter()
        .zip(&video.masks)
        .map(|(c, m)| confusion(&c.rasterize(spec.width, spec.height)?, m).map_err(Into::into))
        .collect::<Result<Vec<_>, Box<dyn std::error::Error>>>()?;
    for (r, s) in result.reports.iter().zip(&scores).step_by(10) {
        println!(
            "frame {:3}  N {:3}  iters {:5}  dice {:.4}",
            r.frame,
            result.contours[r.frame - 1].len(),
            r.iterations,
            s.dice
        );
    }
    let sum = aggregate(&scores)?;
    println!(
        "{name}: mean dice {:.4}, min {:.4}, sensitivity {:.4}, specificity {:.4}, {:.1} ms/frame",
        sum.dice.mean,
        sum.dice.min,
        sum.sensitivity.mean,
        sum.specificity.mean,
        1e3 * seconds / frames as f64
    );
    Ok(())
}
