//! Impulse detection from all-neighbor directional weighted pixels.
//!
//! A pixel is flagged when it lies strictly outside the intensity range of
//! its 24 neighbors, or when the smallest of its four weighted direction indices
//! exceeds the threshold `T`.
//!
//! Direction indices are accumulated in half-units (weights 2, 1, 0.5 become
//! 4, 2, 1) so every value is an exact integer and comparisons against `T`
//! are bit-reproducible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ParamError;
use crate::image::{GrayImage, Mask, Window5};

/// Detector output, `true` for pixels classified noisy.
pub type NoiseMap = Mask;

/// One of the four seven-pixel paths through the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Main diagonal, `(-2,-2)` to `(2,2)`.
    Diagonal,
    /// Along the row.
    Horizontal,
    /// Anti-diagonal, `(2,-2)` to `(-2,2)`.
    AntiDiagonal,
    /// Along the column.
    Vertical,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Diagonal,
        Direction::Horizontal,
        Direction::AntiDiagonal,
        Direction::Vertical,
    ];

    /// 1-based index (1..=4).
    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn from_number(k: usize) -> Option<Self> {
        Self::ALL.get(k.checked_sub(1)?).copied()
    }

    /// The seven offsets of the path, center included, in path order.
    pub fn path(self) -> &'static [(isize, isize); 7] {
        &PATHS[self as usize]
    }

    /// The six offsets of the path with the center removed.
    pub fn offsets(self) -> &'static [(isize, isize); 6] {
        &OFFSETS[self as usize]
    }
}

const PATHS: [[(isize, isize); 7]; 4] = [
    [(-1, -2), (-2, -2), (-1, -1), (0, 0), (1, 1), (2, 2), (1, 2)],
    [(1, -2), (0, -2), (0, -1), (0, 0), (0, 1), (0, 2), (-1, 2)],
    [(2, -1), (2, -2), (1, -1), (0, 0), (-1, 1), (-2, 2), (-2, 1)],
    [(-2, -1), (-2, 0), (-1, 0), (0, 0), (1, 0), (2, 0), (2, 1)],
];

const OFFSETS: [[(isize, isize); 6]; 4] = {
    let mut out = [[(0, 0); 6]; 4];
    let mut k = 0;
    while k < 4 {
        let mut i = 0;
        let mut j = 0;
        while i < 7 {
            if !(PATHS[k][i].0 == 0 && PATHS[k][i].1 == 0) {
                out[k][j] = PATHS[k][i];
                j += 1;
            }
            i += 1;
        }
        k += 1;
    }
    out
};

/// Weight of the inner ring (`|s|, |t| <= 1`).
pub const INNER_WEIGHT: f64 = 2.0;
/// Weight of the far pixels on the straight part of a path.
pub const CORNER_WEIGHT: f64 = 1.0;
/// Weight of the two bent end pixels of a path.
pub const END_WEIGHT: f64 = 0.5;

/// Weight of offset `(s, t)` expressed in half-units.
pub const fn weight_halves(s: isize, t: isize) -> u32 {
    if s.abs() <= 1 && t.abs() <= 1 {
        4
    } else if is_end_offset(s, t) {
        1
    } else {
        2
    }
}

const fn is_end_offset(s: isize, t: isize) -> bool {
    // ±{(-1,-2), (1,-2), (2,-1), (-2,-1)}
    matches!(
        (s, t),
        (-1, -2) | (1, 2) | (1, -2) | (-1, 2) | (2, -1) | (-2, 1) | (-2, -1) | (2, 1)
    )
}

/// Weight of offset `(s, t)`.
pub fn weight(s: isize, t: isize) -> f64 {
    weight_halves(s, t) as f64 / 2.0
}

/// Per-direction weights in half-units, aligned with [`Direction::offsets`].
const WEIGHTS: [[u32; 6]; 4] = {
    let mut out = [[0; 6]; 4];
    let mut k = 0;
    while k < 4 {
        let mut i = 0;
        while i < 6 {
            out[k][i] = weight_halves(OFFSETS[k][i].0, OFFSETS[k][i].1);
            i += 1;
        }
        k += 1;
    }
    out
};

/// Window indices of each direction's six offsets.
const INDICES: [[usize; 6]; 4] = {
    let mut out = [[0; 6]; 4];
    let mut k = 0;
    while k < 4 {
        let mut i = 0;
        while i < 6 {
            out[k][i] = Window5::index(OFFSETS[k][i].0, OFFSETS[k][i].1);
            i += 1;
        }
        k += 1;
    }
    out
};

pub(crate) fn direction_values(w: &Window5, dir: Direction) -> [u8; 6] {
    let v = w.values();
    INDICES[dir as usize].map(|i| v[i])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    pub threshold: f64,
}

impl DetectionParams {
    pub fn new(threshold: f64) -> Result<Self, ParamError> {
        if !(threshold >= 0.0) || !threshold.is_finite() {
            return Err(ParamError::new(
                "threshold",
                format!("{threshold} must be a finite value >= 0"),
            ));
        }
        Ok(Self { threshold })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Noisy,
    NoiseFree,
}

/// Twice the direction index: exact integer form used for comparisons.
pub fn direction_index_halves(w: &Window5, dir: Direction) -> u32 {
    let center = w.center() as i32;
    let v = w.values();
    INDICES[dir as usize]
        .iter()
        .zip(&WEIGHTS[dir as usize])
        .map(|(&i, &wt)| wt * (v[i] as i32 - center).unsigned_abs())
        .sum()
}

/// Weighted sum of absolute differences between the center and the six
/// path pixels of `dir`.
pub fn direction_index(w: &Window5, dir: Direction) -> f64 {
    direction_index_halves(w, dir) as f64 / 2.0
}

pub fn min_direction_index_halves(w: &Window5) -> u32 {
    Direction::ALL
        .iter()
        .map(|d| direction_index_halves(w, *d))
        .min()
        .expect("four directions")
}

/// Smallest of the four direction indices.
pub fn min_direction_index(w: &Window5) -> f64 {
    min_direction_index_halves(w) as f64 / 2.0
}

/// Center strictly below the minimum or strictly above the maximum of its
/// 24 neighbors. A center equal to a neighbor extreme is inside the range,
/// so flat regions are left to the direction-index test.
pub fn is_extreme(w: &Window5) -> bool {
    let (lo, hi) = w
        .neighbors()
        .fold((u8::MAX, u8::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let c = w.center();
    c < lo || c > hi
}

pub fn classify_pixel(w: &Window5, params: &DetectionParams) -> Classification {
    if is_extreme(w) {
        return Classification::Noisy;
    }
    // exact: both sides are doubled, and doubling an f64 is lossless
    if min_direction_index_halves(w) as f64 > 2.0 * params.threshold {
        Classification::Noisy
    } else {
        Classification::NoiseFree
    }
}

/// Classifies every pixel of `img`; reads never see partial results.
pub fn detect(img: &GrayImage, params: &DetectionParams) -> NoiseMap {
    let width = img.width();
    let mut flags = vec![false; img.len()];
    flags
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(row, out)| {
            for (col, flag) in out.iter_mut().enumerate() {
                let w = img.window_unchecked(row, col);
                *flag = classify_pixel(&w, params) == Classification::Noisy;
            }
        });
    Mask::new(width, img.height(), flags).expect("shape of source image")
}
