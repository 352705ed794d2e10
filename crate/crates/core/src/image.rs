//! Grayscale rasters, boolean masks and 5x5 neighborhood extraction.
//!
//! Windows near the border are completed by replicate padding: an offset
//! that falls outside the image is clamped to the nearest edge pixel.

use crate::error::ImageError;

/// Half-width of the square analysis window.
pub const RADIUS: isize = 2;
/// Side length of the analysis window.
pub const SIDE: usize = 5;

/// 8-bit single-channel image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroDimension { width, height });
        }
        if pixels.len() != width * height {
            return Err(ImageError::BufferSize {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(row, col)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, ImageError> {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    /// Panics if the coordinates are outside the image.
    pub fn get(&self, row: usize, col: usize) -> u8 {
        assert!(row < self.height && col < self.width);
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        assert!(row < self.height && col < self.width);
        self.pixels[row * self.width + col] = value;
    }

    pub fn same_shape<T: Shaped>(&self, other: &T) -> bool {
        self.width == other.width() && self.height == other.height()
    }

    pub(crate) fn check_shape<T: Shaped>(&self, other: &T) -> Result<(), ImageError> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(ImageError::DimensionMismatch(
                self.width,
                self.height,
                other.width(),
                other.height(),
            ))
        }
    }

    /// Pixel at `(row + s, col + t)` with coordinates clamped to the border.
    #[inline]
    fn clamped(&self, row: usize, col: usize, s: isize, t: isize) -> u8 {
        let r = (row as isize + s).clamp(0, self.height as isize - 1) as usize;
        let c = (col as isize + t).clamp(0, self.width as isize - 1) as usize;
        self.pixels[r * self.width + c]
    }

    /// The 5x5 neighborhood centered on `(row, col)`.
    pub fn window_at(&self, row: usize, col: usize) -> Result<Window5, ImageError> {
        if row >= self.height || col >= self.width {
            return Err(ImageError::OutOfBounds {
                row,
                col,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.window_unchecked(row, col))
    }

    /// Same as [`GrayImage::window_at`] for coordinates already known to be valid.
    pub(crate) fn window_unchecked(&self, row: usize, col: usize) -> Window5 {
        let mut values = [0u8; SIDE * SIDE];
        let interior = row >= RADIUS as usize
            && col >= RADIUS as usize
            && row + (RADIUS as usize) < self.height
            && col + (RADIUS as usize) < self.width;
        if interior {
            for (dr, chunk) in values.chunks_exact_mut(SIDE).enumerate() {
                let start = (row + dr - RADIUS as usize) * self.width + col - RADIUS as usize;
                chunk.copy_from_slice(&self.pixels[start..start + SIDE]);
            }
        } else {
            for s in -RADIUS..=RADIUS {
                for t in -RADIUS..=RADIUS {
                    values[Window5::index(s, t)] = self.clamped(row, col, s, t);
                }
            }
        }
        Window5 { values }
    }
}

/// Free-function form of [`GrayImage::window_at`].
pub fn window_at(img: &GrayImage, row: usize, col: usize) -> Result<Window5, ImageError> {
    img.window_at(row, col)
}

/// Anything with raster dimensions.
pub trait Shaped {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
}

impl Shaped for GrayImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
}

/// A 5x5 block of intensities addressed by offsets `(s, t)` in `[-2, 2]`,
/// `s` along rows and `t` along columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window5 {
    values: [u8; SIDE * SIDE],
}

impl Window5 {
    /// Row-major values, `values[(s + 2) * 5 + (t + 2)]`.
    pub fn from_values(values: [u8; SIDE * SIDE]) -> Self {
        Self { values }
    }

    /// Window whose value at `(s, t)` is `f(s, t)`.
    pub fn from_fn(mut f: impl FnMut(isize, isize) -> u8) -> Self {
        let mut values = [0u8; SIDE * SIDE];
        for s in -RADIUS..=RADIUS {
            for t in -RADIUS..=RADIUS {
                values[Self::index(s, t)] = f(s, t);
            }
        }
        Self { values }
    }

    #[inline]
    pub(crate) const fn index(s: isize, t: isize) -> usize {
        ((s + RADIUS) as usize) * SIDE + (t + RADIUS) as usize
    }

    /// Panics if an offset lies outside `[-2, 2]`.
    #[inline]
    pub fn at(&self, s: isize, t: isize) -> u8 {
        assert!((-RADIUS..=RADIUS).contains(&s) && (-RADIUS..=RADIUS).contains(&t));
        self.values[Self::index(s, t)]
    }

    #[inline]
    pub fn center(&self) -> u8 {
        self.values[Self::index(0, 0)]
    }

    pub fn values(&self) -> &[u8; SIDE * SIDE] {
        &self.values
    }

    /// The 24 values surrounding the center.
    pub fn neighbors(&self) -> impl Iterator<Item = u8> + '_ {
        let center = Self::index(0, 0);
        self.values
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != center)
            .map(|(_, v)| *v)
    }
}

/// Boolean raster, `true` marking a pixel of interest (corrupted or flagged).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    flags: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, flags: Vec<bool>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroDimension { width, height });
        }
        if flags.len() != width * height {
            return Err(ImageError::BufferSize {
                expected: width * height,
                actual: flags.len(),
            });
        }
        Ok(Self {
            width,
            height,
            flags,
        })
    }

    pub fn empty_like<T: Shaped>(shape: &T) -> Self {
        Self {
            width: shape.width(),
            height: shape.height(),
            flags: vec![false; shape.width() * shape.height()],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.height && col < self.width);
        self.flags[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.height && col < self.width);
        self.flags[row * self.width + col] = value;
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    /// Marks every pixel that is set in `other` (in-place union).
    pub fn union_with(&mut self, other: &Mask) {
        assert_eq!((self.width, self.height), (other.width, other.height));
        for (a, b) in self.flags.iter_mut().zip(&other.flags) {
            *a |= *b;
        }
    }

    /// True if every pixel set in `other` is also set in `self`.
    pub fn is_superset_of(&self, other: &Mask) -> bool {
        self.flags
            .iter()
            .zip(&other.flags)
            .all(|(a, b)| *a || !*b)
    }

    /// `{0, 255}` rendering, 255 for set pixels.
    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.flags.iter().map(|f| if *f { 255 } else { 0 }).collect(),
        }
    }

    /// Inverse of [`Mask::to_image`]; any nonzero value counts as set.
    pub fn from_image(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            flags: img.pixels().iter().map(|v| *v != 0).collect(),
        }
    }
}

impl Shaped for Mask {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
}
