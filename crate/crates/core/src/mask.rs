//! Binary foreground masks and their PGM encoding (0 / 255).

use std::path::Path;

use crate::image::ImageError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    /// Number of foreground pixels.
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn to_gray8(&self) -> Vec<u8> {
        self.data.iter().map(|&b| if b { 255 } else { 0 }).collect()
    }

    /// Any nonzero pixel is foreground.
    pub fn from_gray8(width: usize, height: usize, bytes: &[u8]) -> Self {
        assert_eq!(bytes.len(), width * height);
        Self {
            width,
            height,
            data: bytes.iter().map(|&b| b != 0).collect(),
        }
    }

    pub fn save_pgm(&self, path: &Path) -> Result<(), ImageError> {
        crate::image::write_gray8(path, self.width, self.height, &self.to_gray8())
    }

    pub fn load(path: &Path) -> Result<Self, ImageError> {
        let (w, h, bytes) = crate::image::read_gray8(path)?;
        Ok(Self::from_gray8(w, h, &bytes))
    }
}
