//! Degraded operator-input channel.
//!
//! Each input is dropped, delayed and perturbed independently; the random
//! draws for an input depend only on the channel seed and the step the input
//! was issued at, so a given input's fate does not depend on the rest of the
//! stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::control::Command;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub drop_probability: f64,
    pub lag_steps: u64,
    /// Per-axis standard deviation of additive command noise, m/s.
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { drop_probability: 0.0, lag_steps: 0, noise_std: 0.0, seed: 0 }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(Error::OutOfRange { name: "drop".into(), reason: "must lie in [0, 1]".into() });
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::OutOfRange { name: "noise".into(), reason: "must be finite and >= 0".into() });
        }
        Ok(())
    }
}

/// An operator command stamped with the step it was issued at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedInput {
    pub issued_step: u64,
    pub command: Command<f64>,
}

/// An input that made it through the channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub delivered_step: u64,
    pub original: TimedInput,
    pub noisy_command: Command<f64>,
}

/// Fate of a single input: `None` if dropped.
pub fn transmit(input: TimedInput, cfg: &ChannelConfig) -> Option<Delivery> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, input.issued_step));
    let u: f64 = rng.random();
    if u < cfg.drop_probability {
        return None;
    }
    let nx: f64 = rng.sample(StandardNormal);
    let ny: f64 = rng.sample(StandardNormal);
    let noise = Vec2::new(nx, ny) * cfg.noise_std;
    Some(Delivery {
        delivered_step: input.issued_step + cfg.lag_steps,
        original: input,
        noisy_command: Command::from_velocity(input.command.velocity + noise),
    })
}

/// Pass a whole input stream through the channel, preserving order.
pub fn channel_apply(stream: &[TimedInput], cfg: &ChannelConfig) -> Vec<Delivery> {
    stream.iter().filter_map(|i| transmit(*i, cfg)).collect()
}

/// Confidence in an input of the given age: `1 / (1 + age/tau)`.
pub fn staleness_weight(age: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::BadTau(tau));
    }
    Ok(1.0 / (1.0 + age.max(0.0) / tau))
}

/// Observation noise multiplier for an input of the given age (`1/w`).
pub fn staleness_noise_scale(age: f64, tau: f64) -> Result<f64> {
    Ok(1.0 / staleness_weight(age, tau)?)
}
