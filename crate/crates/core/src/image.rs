//! Grayscale frames, Sobel gradient fields and bilinear sampling.

use std::path::{Path, PathBuf};

use thiserror::Error;

/// Minimum frame side length.
pub const MIN_FRAME_SIDE: usize = 8;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("frame is {width}x{height}; both sides must be at least {MIN_FRAME_SIDE}")]
    TooSmall { width: usize, height: usize },
    #[error("intensity {value} at ({x}, {y}) is outside [0, 1]")]
    OutOfRange { x: usize, y: usize, value: f64 },
}

/// Dense row-major grid of `f64` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "raster data does not match {width}x{height}");
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    #[inline]
    fn clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    /// Bilinear interpolation; coordinates outside the grid clamp to the border.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let xmax = (self.width - 1) as f64;
        let ymax = (self.height - 1) as f64;
        let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, xmax) };
        let y = if y.is_nan() { 0.0 } else { y.clamp(0.0, ymax) };
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (xi, yi) = (x0 as usize, y0 as usize);
        let x1 = (xi + 1).min(self.width - 1);
        let y1 = (yi + 1).min(self.height - 1);
        let top = self.get(xi, yi) * (1.0 - fx) + self.get(x1, yi) * fx;
        let bottom = self.get(xi, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

/// Normalized grayscale frame with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame(Raster);

impl Frame {
    pub fn new(raster: Raster) -> Result<Self, ImageError> {
        if raster.width < MIN_FRAME_SIDE || raster.height < MIN_FRAME_SIDE {
            return Err(ImageError::TooSmall {
                width: raster.width,
                height: raster.height,
            });
        }
        if let Some(i) = raster.data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(ImageError::OutOfRange {
                x: i % raster.width,
                y: i / raster.width,
                value: raster.data[i],
            });
        }
        Ok(Self(raster))
    }

    pub fn from_fn(width: usize, height: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self, ImageError> {
        Self::new(Raster::from_fn(width, height, f))
    }

    pub fn from_gray8(width: usize, height: usize, bytes: &[u8]) -> Result<Self, ImageError> {
        Self::new(Raster::from_vec(
            width,
            height,
            bytes.iter().map(|&b| f64::from(b) / 255.0).collect(),
        ))
    }

    /// Loads an 8-bit grayscale PGM or PNG and divides by 255.
    pub fn load(path: &Path) -> Result<Self, ImageError> {
        let (w, h, bytes) = read_gray8(path)?;
        Self::from_gray8(w, h, &bytes)
    }

    pub fn to_gray8(&self) -> Vec<u8> {
        self.0.data.iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8).collect()
    }

    pub fn save_pgm(&self, path: &Path) -> Result<(), ImageError> {
        write_gray8(path, self.width(), self.height(), &self.to_gray8())
    }

    pub fn raster(&self) -> &Raster {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn height(&self) -> usize {
        self.0.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0.get(x, y)
    }

    pub fn sample(&self, x: f64, y: f64) -> f64 {
        self.0.sample_bilinear(x, y)
    }
}

/// Sobel derivatives of a frame and of its squared gradient magnitude.
#[derive(Debug, Clone)]
pub struct GradientField {
    /// ∂I/∂x
    pub ix: Raster,
    /// ∂I/∂y
    pub iy: Raster,
    /// |∇I|²
    pub gmag2: Raster,
    /// ∂|∇I|²/∂x
    pub gx: Raster,
    /// ∂|∇I|²/∂y
    pub gy: Raster,
}

impl GradientField {
    pub fn width(&self) -> usize {
        self.ix.width
    }

    pub fn height(&self) -> usize {
        self.ix.height
    }
}

/// 3×3 Sobel derivatives with replicate padding, scaled by 1/8 so a unit
/// ramp gives 1. `x` grows rightwards, `y` downwards.
pub fn sobel(r: &Raster) -> (Raster, Raster) {
    let (w, h) = (r.width, r.height);
    let mut dx = Raster::zeros(w, h);
    let mut dy = Raster::zeros(w, h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |ox: isize, oy: isize| r.clamped(x + ox, y + oy);
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            dx.set(x as usize, y as usize, gx * 0.125);
            dy.set(x as usize, y as usize, gy * 0.125);
        }
    }
    (dx, dy)
}

pub fn compute_gradients(frame: &Frame) -> GradientField {
    let (ix, iy) = sobel(frame.raster());
    let gmag2 = Raster::from_vec(
        ix.width,
        ix.height,
        ix.data.iter().zip(&iy.data).map(|(a, b)| a * a + b * b).collect(),
    );
    let (gx, gy) = sobel(&gmag2);
    GradientField { ix, iy, gmag2, gx, gy }
}

pub(crate) fn read_gray8(path: &Path) -> Result<(usize, usize, Vec<u8>), ImageError> {
    let format_err = |reason: String| ImageError::Format {
        path: path.to_path_buf(),
        reason,
    };
    let bytes = std::fs::read(path).map_err(|source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let img = image::load_from_memory(&bytes).map_err(|e| format_err(e.to_string()))?;
    match img {
        image::DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            Ok((w as usize, h as usize, buf.into_raw()))
        }
        other => Err(format_err(format!(
            "expected 8-bit grayscale, found {:?}",
            other.color()
        ))),
    }
}

pub(crate) fn write_gray8(path: &Path, width: usize, height: usize, bytes: &[u8]) -> Result<(), ImageError> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(bytes);
    std::fs::write(path, out).map_err(|source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// PGM and PNG files in `dir`, sorted lexicographically by file name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>, ImageError> {
    let entries = std::fs::read_dir(dir).map_err(|source| ImageError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("png"))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalization() {
        let f = Frame::from_gray8(8, 8, &[0; 64]).unwrap();
        assert!(f.raster().as_slice().iter().all(|&v| v == 0.0));
        let f = Frame::from_gray8(8, 8, &[255; 64]).unwrap();
        assert!(f.raster().as_slice().iter().all(|&v| v == 1.0));
        let f = Frame::from_gray8(8, 8, &[128; 64]).unwrap();
        assert_abs_diff_eq!(f.get(3, 3), 0.50196, epsilon = 1e-5);
    }

    #[test]
    fn frame_invariants() {
        assert!(matches!(Frame::from_fn(7, 8, |_, _| 0.0), Err(ImageError::TooSmall { .. })));
        assert!(matches!(
            Frame::from_fn(8, 8, |x, _| x as f64),
            Err(ImageError::OutOfRange { x: 2, y: 0, .. })
        ));
    }

    #[test]
    fn pgm_and_png_io() {
        let dir = tempfile::tempdir().unwrap();
        let f = Frame::from_fn(9, 11, |x, y| ((x * 7 + y * 13) % 256) as f64 / 255.0).unwrap();
        let pgm = dir.path().join("a.pgm");
        f.save_pgm(&pgm).unwrap();
        assert_eq!(Frame::load(&pgm).unwrap(), f);

        let png = dir.path().join("b.png");
        image::GrayImage::from_raw(9, 11, f.to_gray8()).unwrap().save(&png).unwrap();
        assert_eq!(Frame::load(&png).unwrap(), f);

        let rgb = dir.path().join("c.png");
        image::RgbImage::new(8, 8).save(&rgb).unwrap();
        let err = Frame::load(&rgb).unwrap_err();
        assert!(matches!(err, ImageError::Format { .. }));
        assert!(err.to_string().contains("c.png"));

        let wide = dir.path().join("d.png");
        image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::new(8, 8).save(&wide).unwrap();
        assert!(matches!(Frame::load(&wide), Err(ImageError::Format { .. })));

        assert!(matches!(Frame::load(&dir.path().join("missing.pgm")), Err(ImageError::Io { .. })));
    }

    #[test]
    fn frame_listing_is_lexicographic() {
        let dir = tempfile::tempdir().unwrap();
        let f = Frame::from_fn(8, 8, |_, _| 0.5).unwrap();
        for name in ["000010.pgm", "000002.pgm", "000001.pgm"] {
            f.save_pgm(&dir.path().join(name)).unwrap();
        }
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let names: Vec<String> = list_frames(dir.path())
            .unwrap()
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["000001.pgm", "000002.pgm", "000010.pgm"]);
    }

    #[test]
    fn constant_image_has_zero_gradients() {
        let g = compute_gradients(&Frame::from_fn(12, 10, |_, _| 0.3).unwrap());
        for r in [&g.ix, &g.iy, &g.gmag2, &g.gx, &g.gy] {
            assert!(r.as_slice().iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn ramp_has_constant_interior_derivative() {
        let w = 20;
        let g = compute_gradients(&Frame::from_fn(w, 12, |x, _| x as f64 / (w - 1) as f64).unwrap());
        let expect = 1.0 / (w - 1) as f64;
        for y in 0..12 {
            for x in 1..w - 1 {
                assert_abs_diff_eq!(g.ix.get(x, y), expect, epsilon = 1e-12);
                assert_abs_diff_eq!(g.iy.get(x, y), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn step_edge_gradient_peaks_symmetrically() {
        // step between columns 9 and 10
        let f = Frame::from_fn(20, 12, |x, _| if x >= 10 { 1.0 } else { 0.0 }).unwrap();
        let g = compute_gradients(&f);
        let y = 6;
        // direct convolution: columns 9 and 10 each see the jump with weight (1+2+1)/8
        let row: Vec<f64> = (0..20).map(|x| g.gmag2.get(x, y)).collect();
        assert_abs_diff_eq!(row[9], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(row[10], 0.25, epsilon = 1e-12);
        for x in 0..20 {
            if x != 9 && x != 10 {
                assert_eq!(row[x], 0.0);
            }
            assert_abs_diff_eq!(row[x], row[19 - x], epsilon = 1e-12);
        }
        // derivative of gmag2 is antisymmetric about the edge
        assert_abs_diff_eq!(g.gx.get(8, y), -g.gx.get(11, y), epsilon = 1e-12);
        assert!(g.gx.get(8, y) > 0.0);
    }

    #[test]
    fn gradients_are_linear() {
        let mut seed = 17u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 33) as f64 / (1u64 << 31) as f64
        };
        let f = Frame::from_fn(16, 14, |_, _| 0.5 * next()).unwrap();
        let f2 = Frame::new(f.raster().scaled(2.0)).unwrap();
        let (a, b) = (compute_gradients(&f), compute_gradients(&f2));
        for (r1, r2, k) in [(&a.ix, &b.ix, 2.0), (&a.iy, &b.iy, 2.0), (&a.gmag2, &b.gmag2, 4.0), (&a.gx, &b.gx, 4.0)] {
            for (u, v) in r1.as_slice().iter().zip(r2.as_slice()) {
                assert_abs_diff_eq!(k * u, v, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn bilinear_sampling() {
        let r = Raster::from_fn(4, 3, |x, y| (x + 10 * y) as f64);
        assert_eq!(r.sample_bilinear(2.0, 1.0), 12.0);
        assert_abs_diff_eq!(r.sample_bilinear(1.5, 1.0), 11.5, epsilon = 1e-12);
        assert_eq!(r.sample_bilinear(-5.0, -5.0), r.get(0, 0));
        assert_eq!(r.sample_bilinear(99.0, 99.0), r.get(3, 2));
        assert_abs_diff_eq!(r.sample_bilinear(0.25, 0.5), 5.25, epsilon = 1e-12);
    }
}
