//! Impulse noise injection with a ground-truth corruption mask.
//!
//! Every pixel is selected independently with probability `p`. A selected
//! pixel receives either a uniform draw from `0..=255` (random-valued) or
//! one of `{0, 255}` with equal odds (fixed-valued). The mask records only
//! the pixels whose value actually changed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ParamError;
use crate::image::{GrayImage, Mask};
use crate::rng;

/// Ground-truth corruption flags.
pub type NoiseMask = Mask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ImpulseKind {
    #[default]
    RandomValued,
    FixedValued,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: ImpulseKind,
    pub probability: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: ImpulseKind, probability: f64, seed: u64) -> Result<Self, ParamError> {
        let spec = Self {
            kind,
            probability,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(ParamError::new(
                "probability",
                format!("{} is outside [0, 1]", self.probability),
            ));
        }
        Ok(())
    }
}

/// Corrupts `clean` according to `spec`.
///
/// Draws come from the noise stream of the seed (see [`crate::rng`]), one
/// selection draw per pixel in raster order followed by a value draw for
/// selected pixels only.
pub fn corrupt(clean: &GrayImage, spec: &NoiseSpec) -> (GrayImage, NoiseMask) {
    let p = spec.probability.clamp(0.0, 1.0);
    let mut rng = rng::stream(spec.seed, rng::NOISE_STREAM);
    let mut pixels = clean.pixels().to_vec();
    let mut flags = vec![false; pixels.len()];

    for (value, flag) in pixels.iter_mut().zip(flags.iter_mut()) {
        if !rng.random_bool(p) {
            continue;
        }
        let replacement = match spec.kind {
            ImpulseKind::RandomValued => rng.random::<u8>(),
            ImpulseKind::FixedValued => {
                if rng.random_bool(0.5) {
                    255
                } else {
                    0
                }
            }
        };
        *flag = replacement != *value;
        *value = replacement;
    }

    let noisy = GrayImage::new(clean.width(), clean.height(), pixels).expect("same shape");
    let mask = Mask::new(clean.width(), clean.height(), flags).expect("same shape");
    (noisy, mask)
}
