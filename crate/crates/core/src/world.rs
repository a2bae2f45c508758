//! Planar world: a kinematic point robot among scripted disc obstacles.

use serde::{Deserialize, Serialize};

use crate::control::Command;
use crate::error::{Error, Result};
use crate::geom::{Rect, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Robot {
    pub position: Vec2<f64>,
    /// Meters.
    pub radius: f64,
    /// Speed limit in m/s applied to every executed command.
    pub max_speed: f64,
}

/// From `step` onward the obstacle moves at `velocity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityChange {
    pub step: u64,
    pub velocity: Vec2<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: String,
    pub position: Vec2<f64>,
    /// Meters.
    pub radius: f64,
    /// Current velocity, m/s.
    pub velocity: Vec2<f64>,
    pub visible: bool,
    /// First step at which the obstacle can be seen.
    #[serde(default)]
    pub reveal_step: u64,
    /// Scheduled velocity changes, ordered by step.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub script: Vec<VelocityChange>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub rect: Rect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub time_step: u64,
    pub robot: Robot,
    pub obstacles: Vec<Obstacle>,
    pub goal: Vec2<f64>,
    pub bounds: Rect,
    #[serde(default)]
    pub regions: Vec<Region>,
}

impl WorldState {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadScenario(m));
        if !(self.robot.radius > 0.0) || !(self.robot.max_speed > 0.0) || !self.robot.position.is_finite() {
            return bad("robot needs a finite position, positive radius and positive max_speed".into());
        }
        if !self.bounds.is_valid() {
            return bad("bounds rectangle is invalid".into());
        }
        if !self.goal.is_finite() {
            return bad("goal must be finite".into());
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.radius > 0.0) || !o.position.is_finite() || !o.velocity.is_finite() {
                return bad(format!("obstacle '{}' needs a finite position and positive radius", o.id));
            }
            if self.obstacles[..i].iter().any(|p| p.id == o.id) {
                return bad(format!("duplicate obstacle id '{}'", o.id));
            }
            if o.script.windows(2).any(|w| w[1].step <= w[0].step) || o.script.iter().any(|c| !c.velocity.is_finite()) {
                return bad(format!("obstacle '{}' has an unordered velocity script", o.id));
            }
        }
        for (i, r) in self.regions.iter().enumerate() {
            if !r.rect.is_valid() {
                return bad(format!("region '{}' is not a valid rectangle", r.name));
            }
            if self.regions[..i].iter().any(|p| p.name == r.name) {
                return bad(format!("duplicate region name '{}'", r.name));
            }
        }
        Ok(())
    }

    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.name == name)
    }

    pub fn visible_obstacles(&self) -> impl Iterator<Item = &Obstacle> {
        self.obstacles.iter().filter(|o| o.visible)
    }

    /// Number of agents the robot can currently see.
    pub fn n_visible(&self) -> usize {
        self.visible_obstacles().count()
    }

    /// Apply the visibility rule and scripted velocities for the current step.
    pub fn refresh(&mut self) {
        let step = self.time_step;
        for o in &mut self.obstacles {
            o.visible = step >= o.reveal_step;
            if let Some(change) = o.script.iter().rev().find(|c| c.step <= step) {
                o.velocity = change.velocity;
            }
        }
    }
}

/// Advance the world by one step of length `dt` under command `u_s`.
pub fn step_world(world: &WorldState, u_s: Command<f64>, dt: f64) -> WorldState {
    let mut next = world.clone();
    let u = u_s.clamped(world.robot.max_speed);
    next.robot.position += u.velocity * dt;
    for o in &mut next.obstacles {
        o.position += o.velocity * dt;
    }
    next.time_step += 1;
    next.refresh();
    next
}

/// Smallest surface-to-surface distance between the robot and any obstacle,
/// hidden ones included. `+∞` when there are no obstacles.
pub fn collision_check(world: &WorldState) -> f64 {
    world
        .obstacles
        .iter()
        .map(|o| world.robot.position.distance(o.position) - world.robot.radius - o.radius)
        .fold(f64::INFINITY, f64::min)
}
