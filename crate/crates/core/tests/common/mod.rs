#![allow(dead_code)]

use gsc_core::scenario::{InputRule, RouteHypothesis, Waypoint};
use gsc_core::{build_scenario, ScenarioSpec};

/// A corridor-sized world with nothing in it, where the operator and the
/// autonomy both want to drive straight to the goal.
pub fn empty_world() -> ScenarioSpec {
    let mut spec = build_scenario("multimodal-corridor").unwrap();
    spec.id = "empty-world".into();
    spec.world.obstacles.clear();
    spec.world.regions.clear();
    let (start, goal) = (spec.world.robot.position, spec.world.goal);
    let route =
        RouteHypothesis { label: "straight".into(), prior_weight: 1.0, waypoints: vec![start, goal], hold: true };
    spec.operator_hypotheses = vec![route.clone()];
    spec.autonomy_hypotheses = vec![route];
    let s = &mut spec.operator_script;
    s.intent_mode = "straight".into();
    s.input_rule = InputRule::HeadToWaypoint;
    let steps = (start.distance(goal) / s.speed / spec.dt).ceil() as u64;
    s.waypoints = vec![Waypoint { step: steps, position: goal }];
    spec.validate().unwrap();
    spec
}
