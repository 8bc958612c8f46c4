//! The file-based pipeline the CLI runs: phantom directory, key=value
//! config, tracking to JSON-lines contours and diagnostics, then scoring.

use std::path::Path;

use adpac::baseline::{run_algorithm, Algorithm};
use adpac::config::Config;
use adpac::io;
use adpac::metrics::{aggregate, confusion};
use adpac::phantom::{generate, preset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile_dir()?;
    let spec = preset("average-apices")?;
    io::write_phantom(&dir, &spec, &generate(&spec, 30)?)?;

    std::fs::write(dir.join("params.cfg"), "# spacing and forgetting\nΛ=8\nxi=0.5\n")?;
    let cfg = Config::load(&dir.join("params.cfg"))?;
    let frames = io::load_frames(&dir.join("frames"))?;
    let outline = io::read_init(&dir.join("init.json"))?;
    let result = run_algorithm(Algorithm::AdPac, frames, &outline, &cfg.adpac, &cfg.classic)?;
    io::write_contours(&dir.join("run.contours.jsonl"), &result.contours)?;
    io::write_diagnostics(&dir.join("run.diagnostics.csv"), &result.reports)?;

    let contours = io::read_contours(&dir.join("run.contours.jsonl"))?;
    let masks = io::load_masks(&dir.join("masks"))?;
    let per_frame = contours
        .iter()
        .zip(&masks)
        .map(|(c, m)| confusion(&c.rasterize(m.width(), m.height()).unwrap(), m).unwrap())
        .collect::<Vec<_>>();
    let summary = aggregate(&per_frame)?;
    std::fs::write(dir.join("run.metrics.csv"), summary.to_csv())?;
    println!("outputs in {}", dir.display());
    print!("{}", std::fs::read_to_string(dir.join("run.diagnostics.csv"))?.lines().take(4).map(|l| format!("{l}\n")).collect::<String>());
    println!("mean dice {:.4}", summary.dice.mean);
    Ok(())
}

fn tempfile_dir() -> std::io::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join(format!("adpac-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(Path::new(&dir).to_path_buf())
}
