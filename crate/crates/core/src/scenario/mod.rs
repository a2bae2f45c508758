//! Declarative scenario specifications and scripted operators.
//!
//! A [`ScenarioSpec`] fixes everything a run needs besides the controller and
//! the seed: the initial world, the operator's script, the route hypotheses
//! both agents reason over, the channel, and the model settings. Specs are
//! plain data that round-trip through JSON (`gsc-scenario/v1`).

mod catalog;

use serde::{Deserialize, Serialize};

pub use catalog::{build_scenario, catalog_ids, CATALOG};

use crate::channel::{ChannelConfig, TimedInput};
use crate::control::{BlendGains, Command, ControllerConfig, ControllerKind};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::gp::{validate_hypotheses, KernelParams, ModeHypothesis};
use crate::joint::InteractionParams;
use crate::world::WorldState;

pub const SCHEMA: &str = "gsc-scenario/v1";

/// A position the operator wants the robot to pass by a given step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub step: u64,
    pub position: Vec2<f64>,
}

/// How the scripted operator turns its route into joystick commands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum InputRule {
    /// Steer toward the current waypoint at the script speed.
    HeadToWaypoint,
    /// As `HeadToWaypoint`, then no input at all after `step`.
    SilentAfter { step: u64 },
    /// As `HeadToWaypoint`, except `command` is sent for `duration` steps
    /// starting at `step`.
    StartleAt { step: u64, command: Vec2<f64>, duration: u64 },
    /// Zero input before `step`, then `HeadToWaypoint`.
    MergeCueAt { step: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorScript {
    /// Label of the operator hypothesis the script follows.
    pub intent_mode: String,
    pub waypoints: Vec<Waypoint>,
    pub input_rule: InputRule,
    /// Commanded speed, m/s.
    pub speed: f64,
}

impl OperatorScript {
    /// The waypoint being steered to at `step`: the first one scheduled
    /// later than `step`, or the last one.
    pub fn current_waypoint(&self, step: u64) -> Option<&Waypoint> {
        self.waypoints.iter().find(|w| w.step > step).or(self.waypoints.last())
    }

    /// Intended robot position at `step`, interpolating waypoints in time
    /// from `start` at step 0.
    pub fn intent_position(&self, start: Vec2<f64>, step: u64) -> Vec2<f64> {
        let mut prev = Waypoint { step: 0, position: start };
        for w in &self.waypoints {
            if w.step >= step {
                if w.step == prev.step {
                    return w.position;
                }
                let s = (step - prev.step) as f64 / (w.step - prev.step) as f64;
                return prev.position.lerp(w.position, s);
            }
            prev = *w;
        }
        prev.position
    }
}

fn head_to_waypoint(script: &OperatorScript, world: &WorldState, step: u64) -> Command<f64> {
    let Some(w) = script.current_waypoint(step) else {
        return Command::zero();
    };
    let d = w.position - world.robot.position;
    if d.norm() < 1e-9 {
        return Command::zero();
    }
    Command::from_velocity(d.normalized() * script.speed).clamped(world.robot.max_speed)
}

/// The scripted operator's input at `step`, or `None` when it is silent.
pub fn scripted_operator_input(script: &OperatorScript, world: &WorldState, step: u64) -> Option<TimedInput> {
    let command = match script.input_rule {
        InputRule::HeadToWaypoint => head_to_waypoint(script, world, step),
        InputRule::SilentAfter { step: last } => {
            if step > last {
                return None;
            }
            head_to_waypoint(script, world, step)
        }
        InputRule::StartleAt { step: at, command, duration } => {
            if step >= at && step < at + duration.max(1) {
                Command::from_velocity(command).clamped(world.robot.max_speed)
            } else {
                head_to_waypoint(script, world, step)
            }
        }
        InputRule::MergeCueAt { step: cue } => {
            if step < cue {
                Command::zero()
            } else {
                head_to_waypoint(script, world, step)
            }
        }
    };
    Some(TimedInput { issued_step: step, command })
}

/// A candidate route, as a polyline in world coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteHypothesis {
    pub label: String,
    pub prior_weight: f64,
    pub waypoints: Vec<Vec2<f64>>,
    /// Stop at the final waypoint instead of continuing past it.
    #[serde(default)]
    pub hold: bool,
}

impl RouteHypothesis {
    /// Arc length of the point on the route closest to `p`.
    pub fn progress(&self, p: Vec2<f64>) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        let mut walked = 0.0;
        for seg in self.waypoints.windows(2) {
            let d = seg[1] - seg[0];
            let len = d.norm();
            let s = if len > 0.0 { ((p - seg[0]).dot(d) / (len * len)).clamp(0.0, 1.0) } else { 0.0 };
            let dist = p.distance(seg[0] + d * s);
            if dist < best.0 {
                best = (dist, walked + s * len);
            }
            walked += len;
        }
        best.1
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|s| s[0].distance(s[1])).sum()
    }

    /// Point at arc length `s`; beyond the end the last segment is extended
    /// unless the route holds.
    pub fn point_at(&self, s: f64) -> Vec2<f64> {
        let pts = &self.waypoints;
        if pts.len() == 1 {
            return pts[0];
        }
        let mut walked = 0.0;
        for seg in pts.windows(2) {
            let len = seg[0].distance(seg[1]);
            if s <= walked + len && len > 0.0 {
                return seg[0].lerp(seg[1], ((s - walked) / len).max(0.0));
            }
            walked += len;
        }
        let end = pts[pts.len() - 1];
        if self.hold {
            return end;
        }
        let prev = pts[pts.len() - 2];
        end + (end - prev).normalized() * (s - walked)
    }

    /// Where an agent at `p` following this route should be `lookahead`
    /// meters further along.
    pub fn carrot(&self, p: Vec2<f64>, lookahead: f64) -> Vec2<f64> {
        self.point_at(self.progress(p) + lookahead)
    }
}

/// Kernel hyperparameters for each kind of agent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentKernels {
    pub operator: KernelParams<f64>,
    pub autonomy: KernelParams<f64>,
    pub environment: KernelParams<f64>,
}

/// How per-step trajectory models are assembled from the world.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    /// Prediction steps (of the scenario `dt`).
    pub horizon_steps: usize,
    /// Speed at which route goals are placed ahead, m/s.
    pub nominal_speed: f64,
    /// Route goals sit `nominal_speed * horizon * goal_lead_factor` ahead.
    pub goal_lead_factor: f64,
    /// Standard deviation of route pseudo-observations, meters. Never
    /// tighter than the agent kernel's own noise.
    pub route_noise_std: f64,
    /// Route points placed evenly over the horizon, the last being the goal.
    pub route_points: usize,
    /// Seconds over which an agent off its route is expected to rejoin it.
    pub rejoin_seconds: f64,
    /// Seconds ahead at which an operator command is read as an aim point.
    pub aim_lead: f64,
    /// Past steps of robot motion used as autonomy observations.
    pub history_steps: Vec<u64>,
    /// Prior multiplier for autonomy routes predicted to hit a visible obstacle.
    pub blocked_factor: f64,
    /// Predicted clearance below which a route counts as blocked, meters.
    pub blocked_margin: f64,
    /// Smallest belief kept on any operator route.
    pub belief_floor: f64,
    /// Obstacles farther than this from the robot are not modelled, meters.
    pub sensing_range: f64,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            horizon_steps: 40,
            nominal_speed: 1.5,
            goal_lead_factor: 1.0,
            route_noise_std: 0.02,
            route_points: 4,
            rejoin_seconds: 2.0,
            aim_lead: 1.0,
            history_steps: vec![2],
            blocked_factor: 1e-6,
            blocked_margin: 0.0,
            belief_floor: 1e-3,
            sensing_range: 15.0,
        }
    }
}

/// Per-scenario controller parameter overrides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ControllerOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<BlendGains<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safeguard_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub staleness_tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub schema: String,
    pub id: String,
    pub description: String,
    /// Seconds per step.
    pub dt: f64,
    pub max_steps: u64,
    /// Meters.
    pub goal_radius: f64,
    pub world: WorldState,
    pub operator_script: OperatorScript,
    pub operator_hypotheses: Vec<RouteHypothesis>,
    pub autonomy_hypotheses: Vec<RouteHypothesis>,
    pub channel: ChannelConfig,
    pub kernels: AgentKernels,
    pub interaction: InteractionParams<f64>,
    pub model: ModelSettings,
    #[serde(default)]
    pub controller: ControllerOverrides,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadScenario(msg.into())
}

fn route_hypotheses(routes: &[RouteHypothesis]) -> Vec<ModeHypothesis<f64>> {
    routes.iter().map(|r| ModeHypothesis::new(r.label.clone(), r.waypoints[0], r.prior_weight)).collect()
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Canonical pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("specs serialize");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(bad(format!("unsupported schema '{}', expected '{SCHEMA}'", self.schema)));
        }
        if self.id.is_empty() {
            return Err(bad("id must not be empty"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(bad("dt must be positive"));
        }
        if self.max_steps == 0 {
            return Err(bad("max_steps must be at least 1"));
        }
        if !(self.goal_radius > 0.0) {
            return Err(bad("goal_radius must be positive"));
        }
        self.world.validate()?;
        let script = &self.operator_script;
        if script.waypoints.windows(2).any(|w| w[1].step <= w[0].step) {
            return Err(bad("operator waypoints must be strictly time-ordered"));
        }
        if script.waypoints.iter().any(|w| !w.position.is_finite()) {
            return Err(bad("operator waypoints must be finite"));
        }
        if !(script.speed > 0.0) || !script.speed.is_finite() {
            return Err(bad("operator speed must be positive"));
        }
        for (name, routes) in [("operator", &self.operator_hypotheses), ("autonomy", &self.autonomy_hypotheses)] {
            if routes.iter().any(|r| r.waypoints.is_empty() || r.waypoints.iter().any(|p| !p.is_finite())) {
                return Err(bad(format!("every {name} route needs finite waypoints")));
            }
            for (i, r) in routes.iter().enumerate() {
                if routes[..i].iter().any(|o| o.label == r.label) {
                    return Err(bad(format!("duplicate {name} route label '{}'", r.label)));
                }
            }
            validate_hypotheses(&route_hypotheses(routes)).map_err(|e| bad(format!("{name} hypotheses: {e}")))?;
        }
        if !self.operator_hypotheses.iter().any(|h| h.label == script.intent_mode) {
            return Err(bad(format!("intent mode '{}' is not an operator hypothesis", script.intent_mode)));
        }
        self.channel.validate().map_err(|e| bad(format!("channel: {e}")))?;
        for k in [&self.kernels.operator, &self.kernels.autonomy, &self.kernels.environment] {
            k.validate().map_err(|e| bad(format!("kernel: {e}")))?;
        }
        self.interaction.validate().map_err(|e| bad(format!("interaction: {e}")))?;
        let m = &self.model;
        if m.horizon_steps == 0
            || !(m.nominal_speed > 0.0)
            || !(m.goal_lead_factor > 0.0)
            || !(m.route_noise_std >= 0.0 && m.route_noise_std.is_finite())
            || !(m.rejoin_seconds > 0.0)
            || m.route_points == 0
            || !(m.aim_lead > 0.0)
            || !(m.blocked_factor > 0.0 && m.blocked_factor <= 1.0)
            || !(m.belief_floor >= 0.0 && m.belief_floor < 0.5)
            || !(m.sensing_range > 0.0)
        {
            return Err(bad("model settings out of range"));
        }
        self.controller_config(ControllerKind::LinearBlend).validate().map_err(|e| bad(format!("controller: {e}")))?;
        Ok(())
    }

    /// Controller defaults for `kind` with this scenario's overrides applied.
    pub fn controller_config(&self, kind: ControllerKind) -> ControllerConfig {
        let mut c = ControllerConfig::new(kind);
        let o = &self.controller;
        if let Some(g) = o.gains {
            c.gains = g;
        }
        if let Some(m) = o.safeguard_margin {
            c.safeguard_margin = m;
        }
        if let Some(t) = o.staleness_tau {
            c.staleness_tau = t;
        }
        if let Some(n) = o.n_samples {
            c.inference.n_samples = n;
        }
        c
    }

    /// Seconds spanned by the prediction horizon.
    pub fn horizon_seconds(&self) -> f64 {
        self.dt * self.model.horizon_steps as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::world::Robot;

    fn world() -> WorldState {
        WorldState {
            time_step: 0,
            robot: Robot { position: Vec2::zero(), radius: 0.3, max_speed: 2.0 },
            obstacles: vec![],
            goal: Vec2::new(0.0, 10.0),
            bounds: Rect::new(Vec2::new(-5.0, -1.0), Vec2::new(5.0, 11.0)),
            regions: vec![],
        }
    }

    fn script(rule: InputRule) -> OperatorScript {
        OperatorScript {
            intent_mode: "up".into(),
            waypoints: vec![Waypoint { step: 50, position: Vec2::new(0.0, 5.0) }],
            input_rule: rule,
            speed: 2.0,
        }
    }

    #[test]
    fn heads_to_waypoint() {
        let i = scripted_operator_input(&script(InputRule::HeadToWaypoint), &world(), 0).unwrap();
        assert_eq!(i.command, Command::new(0.0, 2.0));
    }

    #[test]
    fn silent_and_startle_rules() {
        assert!(scripted_operator_input(&script(InputRule::SilentAfter { step: 20 }), &world(), 21).is_none());
        assert!(scripted_operator_input(&script(InputRule::SilentAfter { step: 20 }), &world(), 20).is_some());
        let s = script(InputRule::StartleAt { step: 30, command: Vec2::new(-2.0, 0.0), duration: 1 });
        assert_eq!(scripted_operator_input(&s, &world(), 30).unwrap().command, Command::new(-2.0, 0.0));
        assert_eq!(scripted_operator_input(&s, &world(), 31).unwrap().command, Command::new(0.0, 2.0));
        let cue = script(InputRule::MergeCueAt { step: 10 });
        assert_eq!(scripted_operator_input(&cue, &world(), 9).unwrap().command, Command::zero());
        assert_eq!(scripted_operator_input(&cue, &world(), 10).unwrap().command, Command::new(0.0, 2.0));
    }

    #[test]
    fn intent_interpolates_in_time() {
        let s = script(InputRule::HeadToWaypoint);
        assert_eq!(s.intent_position(Vec2::zero(), 25), Vec2::new(0.0, 2.5));
        assert_eq!(s.intent_position(Vec2::zero(), 80), Vec2::new(0.0, 5.0));
    }

    #[test]
    fn route_carrot() {
        let r = RouteHypothesis {
            label: "l".into(),
            prior_weight: 1.0,
            waypoints: vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 4.0), Vec2::new(3.0, 4.0)],
            hold: false,
        };
        assert_eq!(r.carrot(Vec2::new(0.5, 1.0), 2.0), Vec2::new(0.0, 3.0));
        assert_eq!(r.carrot(Vec2::new(0.0, 3.0), 2.0), Vec2::new(1.0, 4.0));
        assert_eq!(r.carrot(Vec2::new(3.0, 4.0), 1.0), Vec2::new(4.0, 4.0));
        let held = RouteHypothesis { hold: true, ..r };
        assert_eq!(held.carrot(Vec2::new(3.0, 4.0), 1.0), Vec2::new(3.0, 4.0));
    }
}
