//! The built-in scenario catalog.
//!
//! Geometry is invented to reproduce each situation's topology (which routes
//! exist, what blocks them, when things change) and is frozen once tuned;
//! golden copies of every spec live under `tests/golden/scenarios`.

use super::*;
use crate::control::BlendGains;
use crate::geom::Rect;
use crate::world::{Obstacle, Region, Robot, VelocityChange};

/// Catalog ids in presentation order.
pub const CATALOG: [&str; 8] = [
    "multimodal-corridor",
    "lossy-surveillance",
    "laggy-occlusion",
    "distracted-operator",
    "elevator-crowd",
    "startled-driver",
    "traffic-merge",
    "two-mode-autopilot",
];

pub fn catalog_ids() -> Vec<String> {
    CATALOG.iter().map(|s| s.to_string()).collect()
}

/// The frozen spec for a catalog id.
pub fn build_scenario(id: &str) -> Result<ScenarioSpec> {
    let spec = match id {
        "multimodal-corridor" => multimodal_corridor(),
        "lossy-surveillance" => lossy_surveillance(),
        "laggy-occlusion" => laggy_occlusion(),
        "distracted-operator" => distracted_operator(),
        "elevator-crowd" => elevator_crowd(),
        "startled-driver" => startled_driver(),
        "traffic-merge" => traffic_merge(),
        "two-mode-autopilot" => two_mode_autopilot(),
        _ => return Err(Error::UnknownScenario { id: id.to_string(), valid: catalog_ids() }),
    };
    spec.validate()?;
    Ok(spec)
}

fn v(x: f64, y: f64) -> Vec2<f64> {
    Vec2::new(x, y)
}

fn disc(id: &str, x: f64, y: f64, r: f64) -> Obstacle {
    Obstacle {
        id: id.into(),
        position: v(x, y),
        radius: r,
        velocity: Vec2::zero(),
        visible: true,
        reveal_step: 0,
        script: Vec::new(),
    }
}

fn moving(id: &str, x: f64, y: f64, r: f64, vx: f64, vy: f64) -> Obstacle {
    Obstacle { velocity: v(vx, vy), ..disc(id, x, y, r) }
}

fn route(label: &str, prior: f64, pts: &[(f64, f64)]) -> RouteHypothesis {
    RouteHypothesis {
        label: label.into(),
        prior_weight: prior,
        waypoints: pts.iter().map(|&(x, y)| v(x, y)).collect(),
        hold: true,
    }
}

fn hold(label: &str, prior: f64, x: f64, y: f64) -> RouteHypothesis {
    route(label, prior, &[(x, y)])
}

fn waypoints(pts: &[(u64, f64, f64)]) -> Vec<Waypoint> {
    pts.iter().map(|&(step, x, y)| Waypoint { step, position: v(x, y) }).collect()
}

fn region(name: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> Region {
    Region { name: name.into(), rect: Rect::new(v(x0, y0), v(x1, y1)) }
}

fn base(id: &str, description: &str) -> ScenarioSpec {
    ScenarioSpec {
        schema: SCHEMA.into(),
        id: id.into(),
        description: description.into(),
        dt: 0.1,
        max_steps: 600,
        goal_radius: 0.3,
        world: WorldState {
            time_step: 0,
            robot: Robot { position: Vec2::zero(), radius: 0.3, max_speed: 2.0 },
            obstacles: Vec::new(),
            goal: v(0.0, 14.0),
            bounds: Rect::new(v(-6.0, -1.0), v(6.0, 15.0)),
            regions: Vec::new(),
        },
        operator_script: OperatorScript {
            intent_mode: String::new(),
            waypoints: Vec::new(),
            input_rule: InputRule::HeadToWaypoint,
            speed: 1.5,
        },
        operator_hypotheses: Vec::new(),
        autonomy_hypotheses: Vec::new(),
        channel: ChannelConfig { drop_probability: 0.0, lag_steps: 0, noise_std: 0.2, seed: 1 },
        kernels: AgentKernels {
            operator: KernelParams { length_scale: 3.0, signal_variance: 16.0, noise_variance: 0.05 },
            autonomy: KernelParams { length_scale: 3.0, signal_variance: 16.0, noise_variance: 1e-6 },
            environment: KernelParams { length_scale: 2.0, signal_variance: 0.05, noise_variance: 1e-4 },
        },
        interaction: InteractionParams {
            safety_strength: 0.99,
            safety_scale: 1.0,
            agreement_scale: 1.5,
            agreement_enabled: true,
            safety_enabled: true,
        },
        model: ModelSettings::default(),
        controller: ControllerOverrides::default(),
    }
}

/// Two routes around a central pillar; operator and autonomy favour
/// opposite sides.
fn multimodal_corridor() -> ScenarioSpec {
    let left = [(0.0, 0.0), (-4.2, 7.0), (0.0, 14.0)];
    let right = [(0.0, 0.0), (4.2, 7.0), (0.0, 14.0)];
    let mut s = base(
        "multimodal-corridor",
        "Two routes around a central pillar; the operator prefers the left, the autonomy the right.",
    );
    s.world.obstacles = vec![disc("pillar", 0.0, 7.0, 2.5)];
    s.operator_script.intent_mode = "left".into();
    s.operator_script.waypoints = waypoints(&[(50, -4.5, 7.0), (100, 0.0, 14.0)]);
    s.operator_hypotheses = vec![route("left", 0.5, &left), route("right", 0.5, &right)];
    s.autonomy_hypotheses = vec![route("left", 0.4, &left), route("right", 0.6, &right)];
    // The planner commits to its preferred side regardless of where the
    // blend has taken the robot.
    s.model.blocked_factor = 1.0;
    s
}

/// The operator must sweep a surveillance area the autonomy knows nothing
/// about, over a channel that loses most inputs, then falls silent.
fn lossy_surveillance() -> ScenarioSpec {
    let survey = [(0.0, 0.0), (-3.5, 4.0), (-3.75, 6.5), (-1.0, 11.0), (0.0, 14.0)];
    let mut s = base(
        "lossy-surveillance",
        "Cover a surveillance area off the direct route while most operator inputs are dropped.",
    );
    s.world.regions = vec![region("surveillance", -5.0, 5.0, -2.5, 8.0)];
    s.operator_script.intent_mode = "survey".into();
    s.operator_script.waypoints = waypoints(&[(36, -3.5, 4.0), (53, -3.75, 6.5), (88, -1.0, 11.0), (110, 0.0, 14.0)]);
    s.operator_script.input_rule = InputRule::SilentAfter { step: 20 };
    s.operator_hypotheses = vec![route("survey", 0.5, &survey), route("direct", 0.5, &[(0.0, 0.0), (0.0, 14.0)])];
    s.autonomy_hypotheses = vec![
        route("direct", 0.9, &[(0.0, 0.0), (0.0, 14.0)]),
        route("west-arc", 0.1, &[(0.0, 0.0), (-3.0, 4.0), (-3.5, 7.0), (-1.0, 11.0), (0.0, 14.0)]),
    ];
    s.channel.drop_probability = 0.7;
    s
}

/// A passage through the middle closes behind an occluder; the operator,
/// heard one second late, wants the right-hand route.
fn laggy_occlusion() -> ScenarioSpec {
    let middle = [(0.0, 0.0), (0.0, 13.0), (3.0, 16.0), (3.0, 18.0)];
    let right = [(0.0, 0.0), (0.0, 3.0), (3.0, 6.0), (3.0, 18.0)];
    let mut s = base(
        "laggy-occlusion",
        "The middle passage is revealed to be closing; operator inputs arrive one second late.",
    );
    s.world.goal = v(3.0, 18.0);
    s.world.bounds = Rect::new(v(-6.0, -1.0), v(6.0, 19.0));
    let mut debris =
        vec![disc("debris-1", 0.0, 9.0, 1.2), disc("debris-2", -1.8, 9.0, 1.0), disc("debris-3", 0.0, 11.5, 1.2)];
    for d in &mut debris {
        d.visible = false;
        d.reveal_step = 45;
    }
    s.world.obstacles = debris;
    s.operator_script.intent_mode = "right".into();
    s.operator_script.input_rule = InputRule::SilentAfter { step: 15 };
    s.operator_script.waypoints = waypoints(&[(45, 3.0, 6.0), (130, 3.0, 18.0)]);
    s.operator_hypotheses = vec![route("middle", 0.5, &middle), route("right", 0.5, &right)];
    s.autonomy_hypotheses = vec![route("middle", 0.7, &middle), route("right", 0.3, &right)];
    s.channel.lag_steps = 10;
    s
}

/// The operator drives straight at an obstacle it cannot see.
fn distracted_operator() -> ScenarioSpec {
    let mut s = base("distracted-operator", "The operator steers straight into an obstacle it has not noticed.");
    s.world.obstacles = vec![disc("crate", 0.0, 7.0, 1.5)];
    s.operator_script.intent_mode = "straight".into();
    s.operator_script.waypoints = waypoints(&[(95, 0.0, 14.0)]);
    s.operator_hypotheses = vec![route("straight", 1.0, &[(0.0, 0.0), (0.0, 14.0)])];
    s.autonomy_hypotheses = vec![
        route("left", 0.5, &[(0.0, 0.0), (-3.2, 7.0), (0.0, 14.0)]),
        route("right", 0.5, &[(0.0, 0.0), (3.2, 7.0), (0.0, 14.0)]),
    ];
    s
}

/// A crowd in front of an elevator parts into a narrow lane when the
/// elevator is announced.
fn elevator_crowd() -> ScenarioSpec {
    let mut s = base("elevator-crowd", "A crowd parts into a narrow lane to the elevator after an announcement.");
    s.world.goal = v(0.0, 12.0);
    s.world.bounds = Rect::new(v(-4.0, -1.0), v(4.0, 13.0));
    let xs = [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5];
    let mut crowd: Vec<Obstacle> =
        xs.iter().enumerate().map(|(i, &x)| disc(&format!("person-{}", i + 1), x, 6.0, 0.35)).collect();
    for (p, vx) in crowd.iter_mut().filter(|p| p.position.x.abs() < 1.0).zip([-0.45, 0.45]) {
        p.script = vec![
            VelocityChange { step: 20, velocity: v(vx, 0.0) },
            VelocityChange { step: 30, velocity: Vec2::zero() },
        ];
    }
    s.world.obstacles = crowd;
    s.world.regions = vec![region("crowd", -3.0, 5.5, 3.0, 6.5)];
    s.operator_script.intent_mode = "through".into();
    s.operator_script.waypoints = waypoints(&[(30, 0.0, 0.0), (115, 0.0, 12.0)]);
    s.operator_script.input_rule = InputRule::MergeCueAt { step: 30 };
    s.operator_hypotheses = vec![hold("wait", 0.5, 0.0, 0.0), route("through", 0.5, &[(0.0, 0.0), (0.0, 12.0)])];
    s.autonomy_hypotheses = vec![hold("wait", 0.9, 0.0, 0.0), route("through", 0.1, &[(0.0, 0.0), (0.0, 12.0)])];
    s.model.blocked_factor = 0.5;
    s.model.blocked_margin = 0.5;
    // People are tracked at close range, so proximity only matters within
    // roughly a shoulder width.
    s.interaction.safety_scale = 0.6;
    s.controller.safeguard_margin = Some(0.5);
    s
}

/// The driver jerks the wheel toward oncoming traffic.
fn startled_driver() -> ScenarioSpec {
    let mut s = base("startled-driver", "A startled driver jerks the wheel toward the oncoming lane.");
    s.world.goal = v(0.0, 30.0);
    s.world.bounds = Rect::new(v(-5.0, -1.0), v(3.0, 31.0));
    s.world.obstacles =
        (0..6).map(|i| moving(&format!("oncoming-{}", i + 1), -2.75, 12.0 + 9.0 * i as f64, 0.9, 0.0, -2.0)).collect();
    s.world.regions = vec![region("oncoming-lane", -4.5, -1.0, -1.0, 31.0)];
    s.operator_script.intent_mode = "lane".into();
    s.operator_script.waypoints = waypoints(&[(200, 0.0, 30.0)]);
    s.operator_script.input_rule = InputRule::StartleAt { step: 40, command: v(-2.0, 0.0), duration: 20 };
    s.operator_hypotheses = vec![route("lane", 1.0, &[(0.0, 0.0), (0.0, 30.0)])];
    s.autonomy_hypotheses = vec![route("lane", 1.0, &[(0.0, 0.0), (0.0, 30.0)])];
    s
}

/// Merge from a ramp into a single gap in steady traffic.
fn traffic_merge() -> ScenarioSpec {
    let merge = [(2.2, 0.0), (0.0, 3.0), (0.0, 40.0)];
    let mut s = base("traffic-merge", "Merge from a ramp into the one gap in steady traffic.");
    s.world.robot.position = v(2.2, 0.0);
    s.world.goal = v(0.0, 20.0);
    s.world.bounds = Rect::new(v(-3.0, -70.0), v(4.0, 45.0));
    // Traffic at 1.5 m/s, bumper gaps too short for the robot except for one
    // ten-metre gap that reaches the ramp just as the operator merges.
    let mut cars = Vec::new();
    let ahead = (0..9).map(|i| (-15.0 + 24.0 * i as f64) / 10.0);
    let behind = (0..25).map(|i| (-115.0 - 24.0 * i as f64) / 10.0);
    for (i, y) in ahead.chain(behind).enumerate() {
        cars.push(moving(&format!("car-{}", i + 1), 0.0, y, 0.6, 0.0, 1.5));
    }
    s.world.obstacles = cars;
    s.world.regions = vec![region("merge-lane", -1.0, -70.0, 1.0, 45.0)];
    s.operator_script.intent_mode = "merge".into();
    s.operator_script.waypoints = waypoints(&[(40, 2.2, 0.0), (80, 0.0, 4.0), (240, 0.0, 20.0)]);
    s.operator_script.input_rule = InputRule::MergeCueAt { step: 40 };
    s.operator_hypotheses = vec![hold("wait", 0.5, 2.2, 0.0), route("merge", 0.5, &merge)];
    s.autonomy_hypotheses = vec![hold("wait", 0.95, 2.2, 0.0), route("merge", 0.05, &merge)];
    s.model.blocked_factor = 0.5;
    s
}

/// An autopilot with two good routes; the operator prefers the slightly
/// less safe one.
fn two_mode_autopilot() -> ScenarioSpec {
    let left = [(0.0, 0.0), (-3.0, 7.0), (0.0, 14.0)];
    let right = [(0.0, 0.0), (3.0, 7.0), (0.0, 14.0)];
    let mut s =
        base("two-mode-autopilot", "Two autopilot routes; the operator prefers the slightly less safe left one.");
    s.world.obstacles = vec![disc("island", 0.0, 7.0, 1.2), disc("bollard", -4.6, 7.0, 0.5)];
    s.operator_script.intent_mode = "left".into();
    s.operator_script.waypoints = waypoints(&[(50, -3.0, 7.0), (100, 0.0, 14.0)]);
    s.operator_hypotheses = vec![route("left", 0.5, &left), route("right", 0.5, &right)];
    s.autonomy_hypotheses = vec![route("left", 0.4, &left), route("right", 0.6, &right)];
    s.controller.gains = Some(BlendGains { k_h: 0.5, k_r: 0.5, convex: true });
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds_and_validates() {
        for id in CATALOG {
            let s = build_scenario(id).unwrap();
            assert_eq!(s.id, id);
        }
    }

    #[test]
    fn unknown_ids_list_the_catalog() {
        match build_scenario("bogus").unwrap_err() {
            Error::UnknownScenario { id, valid } => {
                assert_eq!(id, "bogus");
                assert_eq!(valid.len(), 8);
            }
            e => panic!("unexpected {e:?}"),
        }
    }
}
