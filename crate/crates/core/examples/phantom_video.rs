//! Generates a preset phantom video and writes frames, masks, truth
//! contours, a manifest and an initial outline to a directory.
//!
//! cargo run --release --example phantom_video -- poor-shadow 50 /tmp/shadow

use adpac::io::write_phantom;
use adpac::phantom::{generate, preset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let name = args.get(1).map_or("good-oval", String::as_str);
    let frames: usize = args.get(2).map_or(Ok(50), |s| s.parse())?;
    let out = args.get(3).cloned().unwrap_or_else(|| format!("phantom-{name}"));

    let spec = preset(name)?;
    let video = generate(&spec, frames)?;
    let areas: Vec<usize> = video.masks.iter().map(|m| m.count()).collect();
    let (lo, hi) = (areas.iter().min().unwrap(), areas.iter().max().unwrap());
    println!("{name}: {frames} frames of {}x{}", spec.width, spec.height);
    println!("lumen area {lo}..{hi} px (ratio {:.2})", *lo as f64 / *hi as f64);
    write_phantom(std::path::Path::new(&out), &spec, &video)?;
    println!("wrote {out}/frames, {out}/masks, truth.jsonl, manifest.txt, init.json");
    Ok(())
}
