use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{GpPosterior, MultimodalTrajectoryDistribution, TrajectorySample};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Scalar;

/// Variance floor used when evaluating densities, so zero-variance modes
/// yield large finite log-densities instead of infinities.
pub const MIN_VARIANCE: f64 = 1e-12;

/// Sample `index` of the stream identified by `seed`.
///
/// Each sample owns an independent ChaCha stream, so the first `n` samples of
/// a larger batch are identical to a batch of `n`.
pub fn draw_sample<T: Scalar>(
    dist: &MultimodalTrajectoryDistribution<T>,
    seed: u64,
    index: u64,
) -> (TrajectorySample<T>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mode = pick_mode(dist, rng.random::<f64>());
    let post = &dist.modes[mode].posterior;
    let positions = post
        .mean
        .iter()
        .zip(&post.variance)
        .map(|(m, v)| {
            let zx: f64 = rng.sample(StandardNormal);
            let zy: f64 = rng.sample(StandardNormal);
            Vec2::new(m.x + v.x.sqrt() * T::of(zx), m.y + v.y.sqrt() * T::of(zy))
        })
        .collect();
    (TrajectorySample { positions, dt: post.grid.dt }, mode)
}

fn pick_mode<T: Scalar>(dist: &MultimodalTrajectoryDistribution<T>, u: f64) -> usize {
    let mut acc = 0.0;
    let last = dist.modes.len() - 1;
    for (i, m) in dist.modes.iter().enumerate() {
        acc += m.weight.as_f64();
        if u < acc && m.weight > T::zero() {
            return i;
        }
    }
    // Rounding can leave the cumulative sum just below one.
    (0..=last).rev().find(|&i| dist.modes[i].weight > T::zero()).unwrap_or(last)
}

/// Draw `n` trajectories, each tagged with the mode it came from.
pub fn sample_trajectories<T: Scalar>(
    dist: &MultimodalTrajectoryDistribution<T>,
    n: usize,
    seed: u64,
) -> Vec<(TrajectorySample<T>, usize)> {
    (0..n as u64).map(|i| draw_sample(dist, seed, i)).collect()
}

struct ModeTable<T> {
    log_weight: T,
    mean: Vec<Vec2<T>>,
    half_precision: Vec<Vec2<T>>,
    log_norm: T,
}

/// Precomputed per-mode constants for repeated density evaluation.
pub struct LogDensityTable<T> {
    modes: Vec<ModeTable<T>>,
    len: usize,
    dt: T,
}

impl<T: Scalar> LogDensityTable<T> {
    pub fn new(dist: &MultimodalTrajectoryDistribution<T>) -> Self {
        let floor = T::of(MIN_VARIANCE);
        let two_pi_ln = (T::of(2.0) * T::PI()).ln();
        let half = T::of(0.5);
        let modes = dist
            .modes
            .iter()
            .filter(|m| m.weight > T::zero())
            .map(|m| {
                let mut log_norm = T::zero();
                let half_precision = m
                    .posterior
                    .variance
                    .iter()
                    .map(|v| {
                        let vx = v.x.max(floor);
                        let vy = v.y.max(floor);
                        log_norm = log_norm - two_pi_ln - half * (vx.ln() + vy.ln());
                        Vec2::new(half / vx, half / vy)
                    })
                    .collect();
                ModeTable { log_weight: m.weight.ln(), mean: m.posterior.mean.clone(), half_precision, log_norm }
            })
            .collect::<Vec<_>>();
        let grid = dist.grid();
        Self { modes, len: grid.steps, dt: grid.dt }
    }

    pub fn check_grid(&self, traj: &TrajectorySample<T>) -> Result<()> {
        if traj.len() != self.len || !super::same_dt(traj.dt, self.dt) {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `log Σ_k w_k Π_t N(traj_t; mean_kt, var_kt)`, max-shifted.
    pub fn log_density(&self, traj: &TrajectorySample<T>) -> Result<T> {
        self.check_grid(traj)?;
        // Streaming log-sum-exp over modes.
        let mut max = T::neg_infinity();
        let mut sum = T::zero();
        for mode in &self.modes {
            let mut quad = T::zero();
            for ((p, m), hp) in traj.positions.iter().zip(&mode.mean).zip(&mode.half_precision) {
                let dx = p.x - m.x;
                let dy = p.y - m.y;
                quad = quad + dx * dx * hp.x + dy * dy * hp.y;
            }
            let term = mode.log_weight + mode.log_norm - quad;
            if term > max {
                sum = if max.is_finite() { sum * (max - term).exp() } else { T::zero() } + T::one();
                max = term;
            } else if term.is_finite() {
                sum = sum + (term - max).exp();
            }
        }
        if !max.is_finite() {
            return Ok(max);
        }
        Ok(max + sum.ln())
    }
}

/// Log-density of `traj` under the mixture's per-step independent marginals.
pub fn mixture_log_density<T: Scalar>(
    dist: &MultimodalTrajectoryDistribution<T>,
    traj: &TrajectorySample<T>,
) -> Result<T> {
    LogDensityTable::new(dist).log_density(traj)
}

/// Mode with the largest weight; ties go to the lowest index.
pub fn most_likely_mode<T: Scalar>(dist: &MultimodalTrajectoryDistribution<T>) -> (usize, &GpPosterior<T>) {
    let mut best = 0;
    for (i, m) in dist.modes.iter().enumerate().skip(1) {
        if m.weight > dist.modes[best].weight {
            best = i;
        }
    }
    (best, &dist.modes[best].posterior)
}
