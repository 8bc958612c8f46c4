//! The classic polar snake: Hilbert-transform edge cost along each ray and
//! a greedy windowed search, on one phantom frame.

use adpac::baseline::{classic_minimize, hilbert, ClassicPolarParams, EdgeCost, RayProfiles};
use adpac::contour::PolarContour;
use adpac::phantom::preset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // the Hilbert transform of a whole-period cosine is the matching sine
    let x: Vec<f64> = (0..64).map(|s| (2.0 * std::f64::consts::PI * 4.0 * s as f64 / 64.0).cos()).collect();
    let h = hilbert(&x);
    println!("H[cos](2) = {:.6}, sin = {:.6}", h[2], (std::f64::consts::PI * 16.0 / 64.0).sin());

    let spec = preset("good-oval")?;
    let frame = spec.frame(0);
    let p = ClassicPolarParams::default();
    let truth = spec.truth(0).resample(p.points)?;
    // start 6 px too small
    let start = PolarContour::circle(truth.center(), 34.0, p.points)?;
    let profiles = RayProfiles::sample(&frame, start.center(), p.points, 60.0, p.samples);
    let cost = EdgeCost::new(&profiles);
    println!("edge cost on ray 0 at r = 20, 47.8: {:.3}, {:.3}", cost.at(0, 20.0), cost.at(0, 47.8));

    let out = classic_minimize(&frame, &start, &p)?;
    let rms = (out
        .contour
        .radii()
        .iter()
        .zip(truth.radii())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / p.points as f64)
        .sqrt();
    println!(
        "{} sweeps, energy {:.3} -> {:.3}, radial rms to truth {rms:.2} px",
        out.sweeps,
        out.energies[0],
        out.energies.last().unwrap()
    );
    Ok(())
}
