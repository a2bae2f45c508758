//! Joint operator/autonomy/environment trajectory model and its MAP search.
//!
//! The joint density factors into one mixture per agent times two
//! interaction terms: a repulsive robot-obstacle factor and an attractive
//! robot-operator factor. Inference draws independent candidates from the
//! per-agent mixtures and keeps the best-scoring joint candidate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{draw_sample, LogDensityTable, MultimodalTrajectoryDistribution, TrajectorySample};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

/// Coupling parameters of the interaction factors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionParams<T> {
    /// Depth of the repulsive factor, in `[0, 1)`.
    pub safety_strength: T,
    /// Meters.
    pub safety_scale: T,
    /// Meters.
    pub agreement_scale: T,
    pub agreement_enabled: bool,
    pub safety_enabled: bool,
}

impl<T: Scalar> InteractionParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.safety_strength >= T::zero() && self.safety_strength < T::one()) {
            return Err(out_of_range("safety_strength", "must lie in [0, 1)"));
        }
        if !(self.safety_scale > T::zero()) || !self.safety_scale.is_finite() {
            return Err(out_of_range("safety_scale", "must be positive"));
        }
        if !(self.agreement_scale > T::zero()) || !self.agreement_scale.is_finite() {
            return Err(out_of_range("agreement_scale", "must be positive"));
        }
        Ok(())
    }

    /// Both couplings switched off.
    pub fn factorized(self) -> Self {
        Self { agreement_enabled: false, safety_enabled: false, ..self }
    }
}

fn out_of_range(name: &str, reason: &str) -> Error {
    Error::OutOfRange { name: name.into(), reason: reason.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointModel<T> {
    pub operator: MultimodalTrajectoryDistribution<T>,
    pub autonomy: MultimodalTrajectoryDistribution<T>,
    pub environment: Vec<MultimodalTrajectoryDistribution<T>>,
    pub params: InteractionParams<T>,
}

impl<T: Scalar> JointModel<T> {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.operator.validate()?;
        self.autonomy.validate()?;
        let grid = self.autonomy.grid();
        if !self.operator.grid().matches(&grid) {
            return Err(Error::GridMismatch);
        }
        for env in &self.environment {
            env.validate()?;
            if !env.grid().matches(&grid) {
                return Err(Error::GridMismatch);
            }
        }
        Ok(())
    }
}

/// One joint candidate and its score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointHypothesis<T> {
    pub operator_traj: TrajectorySample<T>,
    pub autonomy_traj: TrajectorySample<T>,
    pub environment_trajs: Vec<TrajectorySample<T>>,
    pub log_score: T,
    /// Mixture components the trajectories were drawn from.
    pub operator_mode: usize,
    pub autonomy_mode: usize,
    pub environment_modes: Vec<usize>,
}

fn floor<T: Scalar>() -> T {
    T::of(1e-300).max(T::min_positive_value())
}

/// `log Π_t Π_i (1 − α·exp(−‖r_t − o_it‖² / 2h²))`, each factor floored at 1e-300.
pub fn safety_coupling<T: Scalar>(
    robot: &TrajectorySample<T>,
    obstacles: &[TrajectorySample<T>],
    strength: T,
    scale: T,
) -> Result<T> {
    for o in obstacles {
        if !o.same_grid(robot) {
            return Err(Error::GridMismatch);
        }
    }
    let inv = (T::of(2.0) * scale * scale).recip();
    let f = floor::<T>();
    let mut total = T::zero();
    for o in obstacles {
        for (r, p) in robot.positions.iter().zip(&o.positions) {
            let factor = T::one() - strength * (-r.distance_sq(*p) * inv).exp();
            total = total + factor.max(f).ln();
        }
    }
    Ok(total)
}

/// `−Σ_t ‖r_t − h_t‖² / 2h_a²`.
pub fn agreement_coupling<T: Scalar>(
    robot: &TrajectorySample<T>,
    operator: &TrajectorySample<T>,
    scale: T,
) -> Result<T> {
    if !robot.same_grid(operator) {
        return Err(Error::GridMismatch);
    }
    let inv = (T::of(2.0) * scale * scale).recip();
    let sum: T = robot.positions.iter().zip(&operator.positions).map(|(r, h)| r.distance_sq(*h)).sum();
    Ok(-sum * inv)
}

/// Prepared densities for repeated scoring against one model.
pub struct JointScorer<'a, T> {
    model: &'a JointModel<T>,
    operator: LogDensityTable<T>,
    autonomy: LogDensityTable<T>,
    environment: Vec<LogDensityTable<T>>,
}

impl<'a, T: Scalar> JointScorer<'a, T> {
    pub fn new(model: &'a JointModel<T>) -> Self {
        Self {
            model,
            operator: LogDensityTable::new(&model.operator),
            autonomy: LogDensityTable::new(&model.autonomy),
            environment: model.environment.iter().map(LogDensityTable::new).collect(),
        }
    }

    pub fn score(
        &self,
        operator: &TrajectorySample<T>,
        autonomy: &TrajectorySample<T>,
        environment: &[TrajectorySample<T>],
    ) -> Result<T> {
        if environment.len() != self.environment.len() {
            return Err(Error::GridMismatch);
        }
        let p = &self.model.params;
        let mut score = self.operator.log_density(operator)? + self.autonomy.log_density(autonomy)?;
        for (table, traj) in self.environment.iter().zip(environment) {
            score = score + table.log_density(traj)?;
        }
        if p.safety_enabled {
            score = score + safety_coupling(autonomy, environment, p.safety_strength, p.safety_scale)?;
        }
        if p.agreement_enabled {
            score = score + agreement_coupling(autonomy, operator, p.agreement_scale)?;
        }
        Ok(score)
    }
}

/// Joint log-density of a hypothesis (up to the model's normalizer).
pub fn joint_log_score<T: Scalar>(model: &JointModel<T>, hyp: &JointHypothesis<T>) -> Result<T> {
    JointScorer::new(model).score(&hyp.operator_traj, &hyp.autonomy_traj, &hyp.environment_trajs)
}

const OPERATOR_STREAM: u64 = 0;
const AUTONOMY_STREAM: u64 = 1;
const ENVIRONMENT_STREAM: u64 = 2;

/// Candidate `index` of the sample-and-rank search for `seed`, unscored.
pub fn joint_candidate<T: Scalar>(model: &JointModel<T>, seed: u64, index: u64) -> JointHypothesis<T> {
    let (operator_traj, operator_mode) = draw_sample(&model.operator, derive_seed(seed, OPERATOR_STREAM), index);
    let (autonomy_traj, autonomy_mode) = draw_sample(&model.autonomy, derive_seed(seed, AUTONOMY_STREAM), index);
    let (environment_trajs, environment_modes) = model
        .environment
        .iter()
        .enumerate()
        .map(|(j, env)| draw_sample(env, derive_seed(seed, ENVIRONMENT_STREAM + j as u64), index))
        .unzip();
    JointHypothesis {
        operator_traj,
        autonomy_traj,
        environment_trajs,
        log_score: T::neg_infinity(),
        operator_mode,
        autonomy_mode,
        environment_modes,
    }
}

/// Approximate `argmax p(h, f^R, f | z)` by scoring `n_samples` independent
/// joint draws. Ties keep the lowest candidate index.
pub fn map_joint<T: Scalar>(model: &JointModel<T>, n_samples: usize, seed: u64) -> Result<JointHypothesis<T>> {
    if n_samples == 0 {
        return Err(out_of_range("n_samples", "must be at least 1"));
    }
    model.validate()?;
    let scorer = JointScorer::new(model);
    let mut best: Option<JointHypothesis<T>> = None;
    for i in 0..n_samples as u64 {
        let mut cand = joint_candidate(model, seed, i);
        cand.log_score = scorer.score(&cand.operator_traj, &cand.autonomy_traj, &cand.environment_trajs)?;
        let better = match &best {
            None => true,
            Some(b) => cand.log_score > b.log_score || (b.log_score.is_nan() && !cand.log_score.is_nan()),
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(best.expect("n_samples >= 1"))
}
