//! Shared-control laws.
//!
//! The classical family blends one operator command with one autonomy
//! command (`u_s = K_h·u_h + K_R·u_R`); switching and the collision-safeguarded
//! blend are variants of it. The generalized controller instead executes the
//! first step of the autonomy trajectory in the most likely joint hypothesis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::gp::{most_likely_mode, MultimodalTrajectoryDistribution};
use crate::joint::{map_joint, JointHypothesis, JointModel};
use crate::scalar::Scalar;
use crate::world::WorldState;

/// Planar velocity command.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Command<T> {
    pub velocity: Vec2<T>,
}

impl<T: Scalar> Command<T> {
    pub fn new(vx: T, vy: T) -> Self {
        Self { velocity: Vec2::new(vx, vy) }
    }

    pub fn from_velocity(velocity: Vec2<T>) -> Self {
        Self { velocity }
    }

    pub fn zero() -> Self {
        Self { velocity: Vec2::zero() }
    }

    /// Speed-limited copy; non-finite commands become zero.
    pub fn clamped(self, v_max: T) -> Self {
        if !self.velocity.is_finite() {
            return Self::zero();
        }
        Self { velocity: self.velocity.clamp_norm(v_max) }
    }

    pub fn speed(&self) -> T {
        self.velocity.norm()
    }
}

/// Operator and autonomy weighting factors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendGains<T> {
    pub k_h: T,
    pub k_r: T,
    /// When set, the gains must sum to one.
    #[serde(default = "yes")]
    pub convex: bool,
}

fn yes() -> bool {
    true
}

impl<T: Scalar> BlendGains<T> {
    pub fn convex(k_h: T, k_r: T) -> Result<Self> {
        let g = Self { k_h, k_r, convex: true };
        g.validate()?;
        Ok(g)
    }

    /// Any non-negative pair.
    pub fn general(k_h: T, k_r: T) -> Result<Self> {
        let g = Self { k_h, k_r, convex: false };
        g.validate()?;
        Ok(g)
    }

    pub fn operator_only() -> Self {
        Self { k_h: T::one(), k_r: T::zero(), convex: true }
    }

    pub fn autonomy_only() -> Self {
        Self { k_h: T::zero(), k_r: T::one(), convex: true }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = || Error::BadGains { k_h: self.k_h.as_f64(), k_r: self.k_r.as_f64() };
        if !(self.k_h >= T::zero() && self.k_r >= T::zero()) || !self.k_h.is_finite() || !self.k_r.is_finite() {
            return Err(bad());
        }
        if self.convex && (self.k_h + self.k_r - T::one()).abs() > T::of(1e-9).max(T::epsilon() * T::of(4.0)) {
            return Err(bad());
        }
        Ok(())
    }

    /// Scale the operator gain by a confidence weight in `[0, 1]`.
    ///
    /// Convex gains are renormalized; if both gains vanish the result is the
    /// all-zero general pair.
    pub fn discounted(self, confidence: T) -> Self {
        let k_h = self.k_h * confidence;
        if !self.convex {
            return Self { k_h, ..self };
        }
        let total = k_h + self.k_r;
        if total > T::zero() {
            Self { k_h: k_h / total, k_r: self.k_r / total, convex: true }
        } else {
            Self { k_h: T::zero(), k_r: T::zero(), convex: false }
        }
    }
}

/// `K_h·u_h + K_R·u_R`, speed-clamped.
pub fn linear_blend<T: Scalar>(u_h: Command<T>, u_r: Command<T>, gains: BlendGains<T>, v_max: T) -> Result<Command<T>> {
    gains.validate()?;
    let v = u_h.velocity * gains.k_h + u_r.velocity * gains.k_r;
    Ok(Command::from_velocity(v).clamped(v_max))
}

/// Full authority to the operator when engaged, otherwise to the autonomy.
pub fn switching_control<T: Scalar>(u_h: Command<T>, u_r: Command<T>, human_engaged: bool, v_max: T) -> Command<T> {
    let gains = if human_engaged { BlendGains::operator_only() } else { BlendGains::autonomy_only() };
    linear_blend(u_h, u_r, gains, v_max).expect("endpoint gains are valid")
}

/// Smallest clearance between the robot, moving at constant `command`, and the
/// visible obstacles moving at their current velocities, over `steps` future
/// steps. `+∞` when nothing is visible.
pub fn rollout_clearance(world: &WorldState, command: Command<f64>, dt: f64, steps: usize) -> f64 {
    let mut best = f64::INFINITY;
    for o in world.obstacles.iter().filter(|o| o.visible) {
        for j in 1..=steps {
            let t = dt * j as f64;
            let robot = world.robot.position + command.velocity * t;
            let obstacle = o.position + o.velocity * t;
            best = best.min(robot.distance(obstacle) - world.robot.radius - o.radius);
        }
    }
    best
}

/// Linear blend with a collision override.
///
/// The blended command is kept if its constant-velocity rollout stays at
/// least `margin` clear of every visible obstacle. Otherwise the autonomy
/// command is used if its own rollout is clear, else the robot stops. The
/// flag reports whether the blend was overridden.
pub fn safeguarded_blend(
    u_h: Command<f64>,
    u_r: Command<f64>,
    gains: BlendGains<f64>,
    world: &WorldState,
    margin: f64,
    v_max: f64,
    dt: f64,
    steps: usize,
) -> Result<(Command<f64>, bool)> {
    let candidate = linear_blend(u_h, u_r, gains, v_max)?;
    if rollout_clearance(world, candidate, dt, steps) >= margin {
        return Ok((candidate, false));
    }
    let autonomy = u_r.clamped(v_max);
    if rollout_clearance(world, autonomy, dt, steps) >= margin {
        Ok((autonomy, true))
    } else {
        Ok((Command::zero(), true))
    }
}

/// Step-one velocity of the most likely mode's mean path from `origin`.
pub fn most_likely_command<T: Scalar>(
    dist: &MultimodalTrajectoryDistribution<T>,
    origin: Vec2<T>,
    v_max: T,
) -> (usize, Command<T>) {
    let (index, post) = most_likely_mode(dist);
    let v = post.mean_trajectory().first_step_velocity(origin);
    (index, Command::from_velocity(v).clamped(v_max))
}

/// Blend of the most likely operator future with the most likely autonomy future.
pub fn csc_step<T: Scalar>(
    operator: &MultimodalTrajectoryDistribution<T>,
    autonomy: &MultimodalTrajectoryDistribution<T>,
    gains: BlendGains<T>,
    origin: Vec2<T>,
    v_max: T,
) -> Result<Command<T>> {
    if !operator.grid().matches(&autonomy.grid()) {
        return Err(Error::GridMismatch);
    }
    let (_, u_h) = most_likely_command(operator, origin, v_max);
    let (_, u_r) = most_likely_command(autonomy, origin, v_max);
    linear_blend(u_h, u_r, gains, v_max)
}

/// First step of the autonomy trajectory in the MAP joint hypothesis.
pub fn gsc_step<T: Scalar>(
    model: &JointModel<T>,
    origin: Vec2<T>,
    n_samples: usize,
    seed: u64,
    v_max: T,
) -> Result<(Command<T>, JointHypothesis<T>)> {
    let hyp = map_joint(model, n_samples, seed)?;
    let v = hyp.autonomy_traj.first_step_velocity(origin);
    Ok((Command::from_velocity(v).clamped(v_max), hyp))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    LinearBlend,
    Switching,
    SafeguardedBlend,
    CscMostLikely,
    Gsc,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 5] = [
        ControllerKind::LinearBlend,
        ControllerKind::Switching,
        ControllerKind::SafeguardedBlend,
        ControllerKind::CscMostLikely,
        ControllerKind::Gsc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerKind::LinearBlend => "linear-blend",
            ControllerKind::Switching => "switching",
            ControllerKind::SafeguardedBlend => "safeguarded-blend",
            ControllerKind::CscMostLikely => "csc-most-likely",
            ControllerKind::Gsc => "gsc",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| Error::UnknownController(s.to_string()))
    }
}

/// How the per-step inference seed is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum SeedPolicy {
    /// Derived from the run seed once and reused at every step, so the
    /// candidate set changes only as the models do.
    PerRun,
    /// Derived from the run seed and the step index.
    PerStep,
    /// The same seed at every step.
    Fixed(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    pub n_samples: usize,
    pub seed_policy: SeedPolicy,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self { n_samples: 500, seed_policy: SeedPolicy::PerRun }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub kind: ControllerKind,
    pub gains: BlendGains<f64>,
    /// Meters.
    pub safeguard_margin: f64,
    /// Seconds.
    pub staleness_tau: f64,
    pub inference: InferenceConfig,
}

impl ControllerConfig {
    pub fn new(kind: ControllerKind) -> Self {
        Self {
            kind,
            gains: BlendGains { k_h: 0.5, k_r: 0.5, convex: true },
            safeguard_margin: 0.3,
            staleness_tau: 1.0,
            inference: InferenceConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gains.validate()?;
        if !(self.safeguard_margin >= 0.0) || !self.safeguard_margin.is_finite() {
            return Err(Error::OutOfRange { name: "safeguard_margin".into(), reason: "must be >= 0".into() });
        }
        if !(self.staleness_tau > 0.0) || !self.staleness_tau.is_finite() {
            return Err(Error::BadTau(self.staleness_tau));
        }
        if self.inference.n_samples == 0 {
            return Err(Error::OutOfRange { name: "n_samples".into(), reason: "must be at least 1".into() });
        }
        Ok(())
    }
}
