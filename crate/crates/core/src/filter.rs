//! Minimum-variance directional restoration and the iterated
//! detect/restore loop.
//!
//! A flagged pixel is replaced by the value `x` that minimizes the spread
//! of the seven-pixel set formed by `x` and the six path pixels of the
//! direction with the smallest standard deviation. The spread
//! `f(x) = Σ (v - m)²` with `m` the mean of all seven values is a convex
//! quadratic whose minimum sits at the mean of the six path pixels.

use serde::{Deserialize, Serialize};

use crate::detector::{self, direction_values, DetectionParams, Direction, NoiseMap};
use crate::error::ParamError;
use crate::image::{GrayImage, Mask, Window5};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Number of detect/restore passes (`I`).
    pub iterations: u32,
    /// Detection threshold of the first pass (`T`).
    pub initial_threshold: f64,
    /// Multiplier applied to the threshold after every pass (`R`).
    pub decay: f64,
}

impl FilterParams {
    pub fn new(iterations: u32, initial_threshold: f64, decay: f64) -> Result<Self, ParamError> {
        let p = Self {
            iterations,
            initial_threshold,
            decay,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.iterations < 1 {
            return Err(ParamError::new("iterations", "must be at least 1"));
        }
        if !(self.initial_threshold > 0.0 && self.initial_threshold.is_finite()) {
            return Err(ParamError::new(
                "threshold",
                format!("{} must be finite and > 0", self.initial_threshold),
            ));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(ParamError::new(
                "decay",
                format!("{} is outside (0, 1]", self.decay),
            ));
        }
        Ok(())
    }

    /// Threshold used by each pass, `T·R^n` for `n = 0..I`.
    pub fn thresholds(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.iterations).scan(self.initial_threshold, |t, _| {
            let current = *t;
            *t *= self.decay;
            Some(current)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    /// 1-based pass number.
    pub iteration: u32,
    pub threshold: f64,
    pub flagged: usize,
    pub changed: usize,
}

#[derive(Debug, Clone)]
pub struct DenoiseOutput {
    pub restored: GrayImage,
    /// Union of every pass's detection map.
    pub ever_flagged: NoiseMap,
    /// Pixels whose value was altered by at least one restoration.
    pub ever_changed: Mask,
    pub stats: Vec<IterationStats>,
}

fn sum_and_sum_sq(values: &[u8; 6]) -> (i64, i64) {
    values.iter().fold((0, 0), |(s, q), v| {
        let v = *v as i64;
        (s + v, q + v * v)
    })
}

/// Population standard deviation of the six path pixels of `dir`.
pub fn direction_stddev(w: &Window5, dir: Direction) -> f64 {
    let (sum, sum_sq) = sum_and_sum_sq(&direction_values(w, dir));
    // 36·σ² = 6·Σv² − (Σv)², an exact integer
    let scaled = 6 * sum_sq - sum * sum;
    (scaled as f64 / 36.0).sqrt()
}

/// Direction whose six path pixels have the smallest spread; ties go to the
/// lowest-numbered direction.
pub fn best_direction(w: &Window5) -> Direction {
    Direction::ALL
        .iter()
        .copied()
        .min_by_key(|d| {
            let (sum, sum_sq) = sum_and_sum_sq(&direction_values(w, *d));
            6 * sum_sq - sum * sum
        })
        .expect("four directions")
}

/// Replacement value for the window center: the mean of the best
/// direction's six pixels, rounded half-up.
pub fn restore_pixel(w: &Window5) -> u8 {
    let (sum, _) = sum_and_sum_sq(&direction_values(w, best_direction(w)));
    ((sum + 3) / 6).clamp(0, 255) as u8
}

/// The spread `f(x)` of the seven-value set `{path pixels} ∪ {x}`.
pub fn restoration_objective(path: &[u8; 6], x: f64) -> f64 {
    let mean = (path.iter().map(|v| *v as f64).sum::<f64>() + x) / 7.0;
    path.iter()
        .map(|v| (*v as f64 - mean).powi(2))
        .sum::<f64>()
        + (x - mean).powi(2)
}

/// Runs `I` detect/restore passes over a working copy of `img`.
///
/// Each pass detects on a frozen snapshot of the working image, then sweeps
/// flagged pixels in raster order reading from the live copy, so a pixel
/// restored earlier in the sweep feeds the restorations that follow it.
pub fn denoise(img: &GrayImage, params: &FilterParams) -> DenoiseOutput {
    let mut working = img.clone();
    let mut ever_flagged = Mask::empty_like(img);
    let mut ever_changed = Mask::empty_like(img);
    let mut stats = Vec::with_capacity(params.iterations as usize);

    for (n, threshold) in params.thresholds().enumerate() {
        let map = detector::detect(&working, &DetectionParams { threshold });
        let mut flagged = 0;
        let mut changed = 0;
        for row in 0..working.height() {
            for col in 0..working.width() {
                if !map.get(row, col) {
                    continue;
                }
                flagged += 1;
                let value = restore_pixel(&working.window_unchecked(row, col));
                if value != working.get(row, col) {
                    working.set(row, col, value);
                    ever_changed.set(row, col, true);
                    changed += 1;
                }
            }
        }
        ever_flagged.union_with(&map);
        stats.push(IterationStats {
            iteration: n as u32 + 1,
            threshold,
            flagged,
            changed,
        });
    }

    DenoiseOutput {
        restored: working,
        ever_flagged,
        ever_changed,
        stats,
    }
}
