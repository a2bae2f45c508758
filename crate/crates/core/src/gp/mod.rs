//! Gaussian-process trajectory models.
//!
//! Each agent's future path is a random function of time, with x and y
//! modelled as independent zero-mean GPs under a squared-exponential kernel.
//! Goal hypotheses turn one regression into a mixture: every hypothesis adds
//! a pseudo-observation at the end of the horizon and the resulting posteriors
//! are weighted by prior times marginal likelihood.

mod linalg;
mod mixture;
mod regression;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Scalar;

pub use mixture::{
    draw_sample, mixture_log_density, most_likely_mode, sample_trajectories, LogDensityTable, MIN_VARIANCE,
};
pub use regression::{
    condition_on_goal, condition_on_goal_scaled, fit_gp_posterior, log_marginal_likelihood, mode_weights,
    mode_weights_scaled, ModeWeights,
};

/// Squared-exponential kernel hyperparameters shared by both axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams<T> {
    /// Seconds.
    pub length_scale: T,
    /// Square meters.
    pub signal_variance: T,
    /// Square meters; scaled per sample by `noise_scale^2`.
    pub noise_variance: T,
}

impl<T: Scalar> KernelParams<T> {
    pub fn new(length_scale: T, signal_variance: T, noise_variance: T) -> Result<Self> {
        let k = Self { length_scale, signal_variance, noise_variance };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_scale > T::zero()) || !self.length_scale.is_finite() {
            return Err(Error::BadKernel("length_scale must be positive"));
        }
        if !(self.signal_variance > T::zero()) || !self.signal_variance.is_finite() {
            return Err(Error::BadKernel("signal_variance must be positive"));
        }
        if !(self.noise_variance >= T::zero()) || !self.noise_variance.is_finite() {
            return Err(Error::BadKernel("noise_variance must be non-negative"));
        }
        Ok(())
    }

    /// Prior covariance between two times.
    pub fn covariance(&self, a: T, b: T) -> T {
        let d = (a - b) / self.length_scale;
        self.signal_variance * (-(d * d) / T::of(2.0)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation<T> {
    pub time: T,
    pub position: Vec2<T>,
    /// 1 for fresh measurements, larger for stale ones.
    pub noise_scale: T,
}

/// Time-stamped position measurements of one agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet<T> {
    pub agent_id: String,
    pub samples: Vec<Observation<T>>,
}

impl<T: Scalar> ObservationSet<T> {
    pub fn new(agent_id: impl Into<String>) -> Self {
        Self { agent_id: agent_id.into(), samples: Vec::new() }
    }

    pub fn with_samples(agent_id: impl Into<String>, samples: Vec<Observation<T>>) -> Result<Self> {
        let set = Self { agent_id: agent_id.into(), samples };
        set.validate()?;
        Ok(set)
    }

    /// Append a fresh (`noise_scale = 1`) sample.
    pub fn push(&mut self, time: T, position: Vec2<T>) -> &mut Self {
        self.push_scaled(time, position, T::one())
    }

    pub fn push_scaled(&mut self, time: T, position: Vec2<T>, noise_scale: T) -> &mut Self {
        self.samples.push(Observation { time, position, noise_scale });
        self
    }

    pub fn last_time(&self) -> Option<T> {
        self.samples.last().map(|s| s.time)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Times strictly increasing, values finite, noise scales at least one.
    pub fn validate(&self) -> Result<()> {
        for w in self.samples.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(Error::BadTimes);
            }
        }
        for s in &self.samples {
            if !s.time.is_finite() || !s.position.is_finite() {
                return Err(Error::BadTimes);
            }
            if !(s.noise_scale >= T::one()) || !s.noise_scale.is_finite() {
                return Err(Error::OutOfRange { name: "noise_scale".into(), reason: "must be finite and >= 1".into() });
            }
        }
        Ok(())
    }
}

/// One route hypothesis for an agent: where it is heading.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeHypothesis<T> {
    pub goal: Vec2<T>,
    pub prior_weight: T,
    pub label: String,
}

impl<T: Scalar> ModeHypothesis<T> {
    pub fn new(label: impl Into<String>, goal: Vec2<T>, prior_weight: T) -> Self {
        Self { goal, prior_weight, label: label.into() }
    }
}

/// Check that prior weights lie in (0, 1] and sum to one.
pub fn validate_hypotheses<T: Scalar>(hyps: &[ModeHypothesis<T>]) -> Result<()> {
    if hyps.is_empty() {
        return Err(Error::NoHypotheses);
    }
    let mut sum = T::zero();
    for h in hyps {
        if !(h.prior_weight > T::zero() && h.prior_weight <= T::one()) {
            return Err(Error::BadWeights("prior weights must lie in (0, 1]"));
        }
        sum = sum + h.prior_weight;
    }
    if (sum - T::one()).abs() > T::of(1e-9).max(T::epsilon() * T::of(16.0)) {
        return Err(Error::BadWeights("prior weights must sum to 1"));
    }
    Ok(())
}

/// Evenly spaced prediction times `start, start + dt, ...` (`steps` points).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonGrid<T> {
    pub start: T,
    pub dt: T,
    pub steps: usize,
}

impl<T: Scalar> HorizonGrid<T> {
    pub fn new(start: T, dt: T, steps: usize) -> Self {
        Self { start, dt, steps }
    }

    /// Grid of `steps` points one `dt` apart, beginning one step after now.
    pub fn lookahead(dt: T, steps: usize) -> Self {
        Self::new(dt, dt, steps)
    }

    pub fn time(&self, index: usize) -> T {
        self.start + self.dt * T::of(index as f64)
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.steps).map(move |j| self.time(j))
    }

    pub fn end(&self) -> T {
        self.time(self.steps.saturating_sub(1))
    }

    pub fn matches(&self, other: &Self) -> bool {
        self.steps == other.steps && same_dt(self.dt, other.dt) && same_dt(self.start, other.start)
    }
}

pub(crate) fn same_dt<T: Scalar>(a: T, b: T) -> bool {
    (a - b).abs() <= T::of(1e-9) * a.abs().max(b.abs()).max(T::one())
}

/// Marginal posterior of one GP over the horizon grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpPosterior<T> {
    pub grid: HorizonGrid<T>,
    pub mean: Vec<Vec2<T>>,
    /// Per-step variance of x and y.
    pub variance: Vec<Vec2<T>>,
}

impl<T: Scalar> GpPosterior<T> {
    /// Shift every mean point by `offset`.
    pub fn translated(mut self, offset: Vec2<T>) -> Self {
        for m in &mut self.mean {
            *m += offset;
        }
        self
    }

    /// Posterior with no uncertainty, for scripted or test agents.
    pub fn deterministic(grid: HorizonGrid<T>, mean: Vec<Vec2<T>>) -> Self {
        let variance = vec![Vec2::zero(); mean.len()];
        Self { grid, mean, variance }
    }

    pub fn mean_trajectory(&self) -> TrajectorySample<T> {
        TrajectorySample { positions: self.mean.clone(), dt: self.grid.dt }
    }
}

/// One realization of an agent's path over the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample<T> {
    pub positions: Vec<Vec2<T>>,
    pub dt: T,
}

impl<T: Scalar> TrajectorySample<T> {
    pub fn new(positions: Vec<Vec2<T>>, dt: T) -> Self {
        Self { positions, dt }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.positions.iter().all(|p| p.is_finite())
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.len() == other.len() && same_dt(self.dt, other.dt)
    }

    /// Velocity needed to reach the first sample from `origin` in one step.
    pub fn first_step_velocity(&self, origin: Vec2<T>) -> Vec2<T> {
        match self.positions.first() {
            Some(p) => (*p - origin) * self.dt.recip(),
            None => Vec2::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode<T> {
    pub weight: T,
    pub posterior: GpPosterior<T>,
    pub hypothesis: ModeHypothesis<T>,
}

/// Weighted mixture of GP posteriors sharing one horizon grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultimodalTrajectoryDistribution<T> {
    pub modes: Vec<Mode<T>>,
}

impl<T: Scalar> MultimodalTrajectoryDistribution<T> {
    pub fn new(modes: Vec<Mode<T>>) -> Result<Self> {
        let dist = Self { modes };
        dist.validate()?;
        Ok(dist)
    }

    /// Single mode with weight one.
    pub fn unimodal(label: impl Into<String>, posterior: GpPosterior<T>) -> Self {
        let goal = posterior.mean.last().copied().unwrap_or_else(Vec2::zero);
        Self {
            modes: vec![Mode { weight: T::one(), posterior, hypothesis: ModeHypothesis::new(label, goal, T::one()) }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.modes.first().ok_or(Error::BadWeights("mixture needs at least one mode"))?;
        let mut sum = T::zero();
        for m in &self.modes {
            if !(m.weight >= T::zero() && m.weight <= T::one()) {
                return Err(Error::BadWeights("mode weights must lie in [0, 1]"));
            }
            if !m.posterior.grid.matches(&first.posterior.grid)
                || m.posterior.mean.len() != m.posterior.grid.steps
                || m.posterior.variance.len() != m.posterior.grid.steps
            {
                return Err(Error::GridMismatch);
            }
            if m.posterior.variance.iter().any(|v| !(v.x >= T::zero() && v.y >= T::zero())) {
                return Err(Error::BadWeights("variances must be non-negative"));
            }
            sum = sum + m.weight;
        }
        if (sum - T::one()).abs() > T::of(1e-9).max(T::epsilon() * T::of(16.0)) {
            return Err(Error::BadWeights("mode weights must sum to 1"));
        }
        Ok(())
    }

    pub fn grid(&self) -> HorizonGrid<T> {
        self.modes[0].posterior.grid
    }

    pub fn weights(&self) -> Vec<T> {
        self.modes.iter().map(|m| m.weight).collect()
    }
}
