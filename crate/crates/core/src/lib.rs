//! Random-valued impulse noise removal for 8-bit grayscale images.
//!
//! The pipeline has three stages:
//!
//! * [`detector`] flags pixels that sit at the extremes of their 5x5
//!   neighborhood or whose smallest weighted direction index exceeds a
//!   threshold,
//! * [`filter`] replaces flagged pixels with the mean of their
//!   minimum-variance direction and iterates with a decaying threshold,
//! * [`pso`] tunes the iteration count, threshold and decay by particle
//!   swarm search against a clean reference.
//!
//! [`noise`] produces corrupted test inputs with a ground-truth mask and
//! [`metrics`] scores the result.

pub mod cli;
pub mod detector;
pub mod error;
pub mod filter;
pub mod image;
pub mod metrics;
pub mod noise;
pub mod pgm;
pub mod pso;
pub mod rng;

pub use detector::{detect, DetectionParams, Direction, NoiseMap};
pub use error::{ImageError, ParamError, PgmError, PsoError};
pub use filter::{denoise, DenoiseOutput, FilterParams, IterationStats};
pub use image::{window_at, GrayImage, Mask, Window5};
pub use metrics::{psnr, EvaluationReport, Psnr};
pub use noise::{corrupt, ImpulseKind, NoiseMask, NoiseSpec};
pub use pgm::{load_pgm, save_pgm, PgmFormat};
pub use pso::{optimize, tune, OptimizationResult, SearchSpace, SwarmConfig};
