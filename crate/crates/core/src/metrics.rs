//! PSNR and detector quality measures against ground truth.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::detector::NoiseMap;
use crate::error::ImageError;
use crate::filter::{FilterParams, IterationStats};
use crate::image::GrayImage;
use crate::noise::NoiseMask;

/// Peak signal-to-noise ratio in dB, or `Identical` when the images match
/// exactly (zero MSE). `Identical` ranks above every finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Db(f64),
    Identical,
}

impl Psnr {
    /// Finite dB value, `None` for `Identical`.
    pub fn db(self) -> Option<f64> {
        match self {
            Psnr::Db(v) => Some(v),
            Psnr::Identical => None,
        }
    }

    /// dB value with `Identical` mapped to `+inf`.
    pub fn as_f64(self) -> f64 {
        self.db().unwrap_or(f64::INFINITY)
    }
}

impl PartialOrd for Psnr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Psnr::Identical, Psnr::Identical) => Some(Ordering::Equal),
            (Psnr::Identical, Psnr::Db(_)) => Some(Ordering::Greater),
            (Psnr::Db(_), Psnr::Identical) => Some(Ordering::Less),
            (Psnr::Db(a), Psnr::Db(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Db(v) => write!(f, "{v:.4}"),
            Psnr::Identical => f.write_str("inf"),
        }
    }
}

impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Psnr::Db(v) => s.serialize_f64(*v),
            Psnr::Identical => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Psnr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Psnr::Db(v)),
            Repr::Str(s) if s == "inf" => Ok(Psnr::Identical),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad psnr value {s:?}"))),
        }
    }
}

pub fn mse(reference: &GrayImage, test: &GrayImage) -> Result<f64, ImageError> {
    reference.check_shape(test)?;
    let sse: u64 = reference
        .pixels()
        .iter()
        .zip(test.pixels())
        .map(|(a, b)| {
            let d = (*a as i64 - *b as i64).unsigned_abs();
            d * d
        })
        .sum();
    Ok(sse as f64 / reference.len() as f64)
}

/// `10·log10(255² / MSE)`.
pub fn psnr(reference: &GrayImage, test: &GrayImage) -> Result<Psnr, ImageError> {
    let mse = mse(reference, test)?;
    if mse == 0.0 {
        return Ok(Psnr::Identical);
    }
    Ok(Psnr::Db(10.0 * (255.0 * 255.0 / mse).log10()))
}

/// Confusion counts of a detection map against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_negative: usize,
    pub false_positive: usize,
    pub true_negative: usize,
}

impl Confusion {
    pub fn new(truth: &NoiseMask, detected: &NoiseMap) -> Result<Self, ImageError> {
        if truth.width() != detected.width() || truth.height() != detected.height() {
            return Err(ImageError::DimensionMismatch(
                truth.width(),
                truth.height(),
                detected.width(),
                detected.height(),
            ));
        }
        let mut c = Confusion::default();
        for (t, d) in truth.flags().iter().zip(detected.flags()) {
            match (t, d) {
                (true, true) => c.true_positive += 1,
                (true, false) => c.false_negative += 1,
                (false, true) => c.false_positive += 1,
                (false, false) => c.true_negative += 1,
            }
        }
        Ok(c)
    }
}

/// Undetected corrupted pixels and wrongly flagged clean pixels.
pub fn miss_false(truth: &NoiseMask, detected: &NoiseMap) -> Result<(usize, usize), ImageError> {
    let c = Confusion::new(truth, detected)?;
    Ok((c.false_negative, c.false_positive))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// `100·TP/(TP+FN)`.
    pub sensitivity: f64,
    /// `100·TN/(TN+FP)`.
    pub specificity: f64,
    /// No corrupted pixels existed; sensitivity reported as 100.
    pub sensitivity_vacuous: bool,
    /// No clean pixels existed; specificity reported as 100.
    pub specificity_vacuous: bool,
}

fn pct(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (100.0, true)
    } else {
        (100.0 * num as f64 / den as f64, false)
    }
}

pub fn sensitivity_specificity(
    truth: &NoiseMask,
    detected: &NoiseMap,
) -> Result<Rates, ImageError> {
    let c = Confusion::new(truth, detected)?;
    let (sensitivity, sensitivity_vacuous) =
        pct(c.true_positive, c.true_positive + c.false_negative);
    let (specificity, specificity_vacuous) =
        pct(c.true_negative, c.true_negative + c.false_positive);
    Ok(Rates {
        sensitivity,
        specificity,
        sensitivity_vacuous,
        specificity_vacuous,
    })
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn ser_pct<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round2(*v))
}

/// One evaluated restoration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    #[serde(rename = "psnr_noisy_db")]
    pub psnr_noisy: Psnr,
    #[serde(rename = "psnr_restored_db")]
    pub psnr_restored: Psnr,
    pub miss: usize,
    #[serde(rename = "false")]
    pub false_positives: usize,
    #[serde(rename = "sensitivity_pct", serialize_with = "ser_pct")]
    pub sensitivity: f64,
    #[serde(rename = "specificity_pct", serialize_with = "ser_pct")]
    pub specificity: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sensitivity_vacuous: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub specificity_vacuous: bool,
    #[serde(rename = "params")]
    pub params_used: Option<FilterParams>,
    #[serde(rename = "iterations", default)]
    pub stats: Vec<IterationStats>,
}

impl EvaluationReport {
    /// Scores a restoration against the clean image and the true mask.
    pub fn evaluate(
        clean: &GrayImage,
        noisy: &GrayImage,
        restored: &GrayImage,
        truth: &NoiseMask,
        detected: &NoiseMap,
    ) -> Result<Self, ImageError> {
        let psnr_noisy = psnr(clean, noisy)?;
        let psnr_restored = psnr(clean, restored)?;
        let (miss, false_positives) = miss_false(truth, detected)?;
        let rates = sensitivity_specificity(truth, detected)?;
        Ok(Self {
            psnr_noisy,
            psnr_restored,
            miss,
            false_positives,
            sensitivity: rates.sensitivity,
            specificity: rates.specificity,
            sensitivity_vacuous: rates.sensitivity_vacuous,
            specificity_vacuous: rates.specificity_vacuous,
            params_used: None,
            stats: Vec::new(),
        })
    }

    pub fn with_run(mut self, params: FilterParams, stats: Vec<IterationStats>) -> Self {
        self.params_used = Some(params);
        self.stats = stats;
        self
    }
}
