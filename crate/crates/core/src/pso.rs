//! Bounded particle swarm optimizer over three dimensions, and the
//! supervised tuner that uses it to pick `(I, T, R)` for the filter.
//!
//! Each iteration draws one inertia weight shared by the whole swarm, then
//! moves every particle with
//!
//! ```text
//! v' = h·v + ψp·rp·(pbest − x) + ψg·rg·(gbest − x)     (clamped to ±v_max)
//! x' = x + v'                                         (clamped to the box)
//! ```
//!
//! with `rp`, `rg` drawn per particle and per dimension. Personal and global
//! bests only ever move to strictly better fitness, so the recorded global
//! best history is non-decreasing.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ParamError, PsoError};
use crate::filter::{denoise, FilterParams};
use crate::image::GrayImage;
use crate::metrics::{psnr, Psnr};
use crate::rng;

pub const DIMS: usize = 3;
pub type Position = [f64; DIMS];

/// Fitness values the swarm can rank. Larger is better.
pub trait Fitness: Copy + PartialOrd + Send + Sync + std::fmt::Debug {
    /// `false` for values that must abort the search (NaN, infinities).
    fn is_valid(&self) -> bool;
    /// Scalar view used for stopping targets.
    fn to_f64(&self) -> f64;
}

impl Fitness for f64 {
    fn is_valid(&self) -> bool {
        self.is_finite()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Fitness for Psnr {
    fn is_valid(&self) -> bool {
        match self {
            Psnr::Db(v) => v.is_finite(),
            Psnr::Identical => true,
        }
    }
    fn to_f64(&self) -> f64 {
        self.as_f64()
    }
}

/// Closed box with a per-dimension velocity limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub low: Position,
    pub high: Position,
    pub v_max: Position,
}

impl SearchSpace {
    /// Velocity limit used when none is given, as a fraction of each range.
    pub const DEFAULT_VMAX_FRACTION: f64 = 0.25;

    pub fn new(low: Position, high: Position) -> Result<Self, ParamError> {
        let v_max = std::array::from_fn(|d| Self::DEFAULT_VMAX_FRACTION * (high[d] - low[d]));
        Self::with_v_max(low, high, v_max)
    }

    pub fn with_v_max(low: Position, high: Position, v_max: Position) -> Result<Self, ParamError> {
        let space = Self { low, high, v_max };
        space.validate()?;
        Ok(space)
    }

    /// `I ∈ [3, 6]`, `T ∈ [300, 1000]`, `R ∈ [0.6, 0.95]`.
    pub fn filter_default() -> Self {
        Self::new([3.0, 300.0, 0.6], [6.0, 1000.0, 0.95]).expect("valid default box")
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for d in 0..DIMS {
            if !(self.low[d].is_finite() && self.high[d].is_finite() && self.low[d] < self.high[d])
            {
                return Err(ParamError::new(
                    "bounds",
                    format!("dimension {d}: need finite low < high, got [{}, {}]", self.low[d], self.high[d]),
                ));
            }
            if !(self.v_max[d] > 0.0) {
                return Err(ParamError::new(
                    "v_max",
                    format!("dimension {d}: {} must be > 0", self.v_max[d]),
                ));
            }
        }
        Ok(())
    }

    pub fn range(&self, d: usize) -> f64 {
        self.high[d] - self.low[d]
    }

    pub fn clamp(&self, x: &Position) -> Position {
        std::array::from_fn(|d| x[d].clamp(self.low[d], self.high[d]))
    }

    pub fn contains(&self, x: &Position) -> bool {
        (0..DIMS).all(|d| x[d] >= self.low[d] && x[d] <= self.high[d])
    }

    pub fn center(&self) -> Position {
        std::array::from_fn(|d| 0.5 * (self.low[d] + self.high[d]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    pub swarm_size: usize,
    pub max_iterations: usize,
    /// Pull toward the personal best (`ψp`).
    pub cognitive: f64,
    /// Pull toward the global best (`ψg`).
    pub social: f64,
    /// Inertia weight drawn uniformly from `[low, high]` once per iteration.
    pub inertia: (f64, f64),
    pub seed: u64,
    /// Stop as soon as the global best reaches this value.
    pub target: Option<f64>,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            swarm_size: 8,
            max_iterations: 15,
            cognitive: 2.0,
            social: 2.0,
            inertia: (0.4, 0.9),
            seed: 0,
            target: None,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.swarm_size < 2 {
            return Err(ParamError::new("swarm_size", "need at least 2 particles"));
        }
        if self.max_iterations < 1 {
            return Err(ParamError::new("max_iterations", "must be at least 1"));
        }
        for (name, v) in [("cognitive", self.cognitive), ("social", self.social)] {
            if !(v > 1.0 && v <= 4.0) {
                return Err(ParamError::new(name, format!("{v} is outside (1, 4]")));
            }
        }
        let (lo, hi) = self.inertia;
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return Err(ParamError::new(
                "inertia",
                format!("[{lo}, {hi}] must satisfy 0 < low <= high < 1"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle<V> {
    pub position: Position,
    pub velocity: Position,
    pub best_position: Position,
    pub best_fitness: V,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult<V> {
    pub best_position: Position,
    pub best_fitness: V,
    /// Global best after initialization (entry 0) and after each iteration.
    pub history: Vec<V>,
    /// Fitness function calls made.
    pub evaluations: usize,
}

/// New velocity for `p`, each component clamped to `±space.v_max`.
pub fn velocity_update<V>(
    p: &Particle<V>,
    gbest: &Position,
    inertia: f64,
    r_p: &Position,
    r_g: &Position,
    cfg: &SwarmConfig,
    space: &SearchSpace,
) -> Position {
    std::array::from_fn(|d| {
        let v = inertia * p.velocity[d]
            + cfg.cognitive * r_p[d] * (p.best_position[d] - p.position[d])
            + cfg.social * r_g[d] * (gbest[d] - p.position[d]);
        v.clamp(-space.v_max[d], space.v_max[d])
    })
}

/// `x + v`, clamped into the box.
pub fn position_update<V>(p: &Particle<V>, velocity: &Position, space: &SearchSpace) -> Position {
    let moved: Position = std::array::from_fn(|d| p.position[d] + velocity[d]);
    space.clamp(&moved)
}

fn checked<V: Fitness>(x: &Position, f: V) -> Result<V, PsoError> {
    if f.is_valid() {
        Ok(f)
    } else {
        Err(PsoError::NonFiniteFitness { position: *x })
    }
}

/// Index of the best personal best; ties resolve to the lowest index.
fn leader<V: Fitness>(swarm: &[Particle<V>]) -> usize {
    let mut best = 0;
    for (i, p) in swarm.iter().enumerate().skip(1) {
        if p.best_fitness > swarm[best].best_fitness {
            best = i;
        }
    }
    best
}

/// Maximizes `fitness` over `space`.
///
/// Random draws are made sequentially from the PSO stream of `cfg.seed`;
/// fitness calls within an iteration run in parallel, and their results are
/// merged in particle order, so the outcome does not depend on scheduling.
/// A particle whose position did not change keeps its previous fitness.
pub fn optimize<V, F>(
    space: &SearchSpace,
    cfg: &SwarmConfig,
    fitness: F,
) -> Result<OptimizationResult<V>, PsoError>
where
    V: Fitness,
    F: Fn(&Position) -> V + Sync,
{
    space.validate()?;
    cfg.validate()?;
    let mut rng = rng::stream(cfg.seed, rng::PSO_STREAM);

    let starts: Vec<Position> = (0..cfg.swarm_size)
        .map(|_| std::array::from_fn(|d| rng.random_range(space.low[d]..=space.high[d])))
        .collect();
    let initial: Vec<V> = starts.par_iter().map(&fitness).collect();
    let mut evaluations = starts.len();
    let mut swarm = Vec::with_capacity(cfg.swarm_size);
    for (x, f) in starts.into_iter().zip(initial) {
        let f = checked(&x, f)?;
        swarm.push(Particle {
            position: x,
            velocity: [0.0; DIMS],
            best_position: x,
            best_fitness: f,
        });
    }
    let mut current: Vec<V> = swarm.iter().map(|p| p.best_fitness).collect();

    let lead = leader(&swarm);
    let mut gbest_position = swarm[lead].best_position;
    let mut gbest_fitness = swarm[lead].best_fitness;
    let mut history = vec![gbest_fitness];

    for _ in 0..cfg.max_iterations {
        if cfg.target.is_some_and(|t| gbest_fitness.to_f64() >= t) {
            break;
        }
        let inertia = rng.random_range(cfg.inertia.0..=cfg.inertia.1);
        let mut moved = Vec::with_capacity(swarm.len());
        for p in swarm.iter_mut() {
            let r_p: Position = std::array::from_fn(|_| rng.random::<f64>());
            let r_g: Position = std::array::from_fn(|_| rng.random::<f64>());
            let v = velocity_update(p, &gbest_position, inertia, &r_p, &r_g, cfg, space);
            let x = position_update(p, &v, space);
            moved.push(x != p.position);
            p.velocity = v;
            p.position = x;
        }

        let fresh: Vec<Option<V>> = swarm
            .par_iter()
            .zip(&moved)
            .map(|(p, m)| m.then(|| fitness(&p.position)))
            .collect();
        for ((p, f), cur) in swarm.iter_mut().zip(fresh).zip(current.iter_mut()) {
            if let Some(f) = f {
                evaluations += 1;
                *cur = checked(&p.position, f)?;
            }
            if *cur > p.best_fitness {
                p.best_fitness = *cur;
                p.best_position = p.position;
            }
        }

        let lead = leader(&swarm);
        if swarm[lead].best_fitness > gbest_fitness {
            gbest_fitness = swarm[lead].best_fitness;
            gbest_position = swarm[lead].best_position;
        }
        history.push(gbest_fitness);
    }

    Ok(OptimizationResult {
        best_position: gbest_position,
        best_fitness: gbest_fitness,
        history,
        evaluations,
    })
}

/// Filter parameters for a swarm position; the iteration count is rounded
/// to the nearest integer inside the box.
pub fn decode_params(x: &Position, space: &SearchSpace) -> FilterParams {
    let x = space.clamp(x);
    let lo = space.low[0].ceil().max(1.0);
    let hi = space.high[0].floor().max(lo);
    FilterParams {
        iterations: x[0].round().clamp(lo, hi) as u32,
        initial_threshold: x[1],
        decay: x[2],
    }
}

fn validate_filter_space(space: &SearchSpace) -> Result<(), ParamError> {
    space.validate()?;
    if space.low[0].ceil().max(1.0) > space.high[0].floor() {
        return Err(ParamError::new(
            "bounds",
            "iteration range must contain an integer >= 1",
        ));
    }
    if !(space.low[1] > 0.0) {
        return Err(ParamError::new("bounds", "threshold range must be > 0"));
    }
    if !(space.low[2] > 0.0 && space.high[2] <= 1.0) {
        return Err(ParamError::new("bounds", "decay range must lie in (0, 1]"));
    }
    Ok(())
}

/// Searches `(I, T, R)` maximizing the PSNR of the restored image against
/// the clean `reference`. Supervised: the reference is required.
pub fn tune(
    noisy: &GrayImage,
    reference: &GrayImage,
    space: &SearchSpace,
    cfg: &SwarmConfig,
) -> Result<(FilterParams, OptimizationResult<Psnr>), PsoError> {
    reference.check_shape(noisy)?;
    validate_filter_space(space)?;
    let result = optimize(space, cfg, |x| {
        let params = decode_params(x, space);
        let restored = denoise(noisy, &params).restored;
        psnr(reference, &restored).expect("shapes checked")
    })?;
    Ok((decode_params(&result.best_position, space), result))
}
