//! Safety, efficiency and agreement scores of an executed trace.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scenario::ScenarioSpec;
use crate::sim::{Outcome, Trace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Meters; negative means penetration, `None` means nothing to hit.
    pub min_clearance: Option<f64>,
    pub collision: bool,
    /// Meters.
    pub path_length: f64,
    pub steps_to_goal: Option<u64>,
    /// RMS distance to the operator's intended path, meters.
    pub agreement_rms: f64,
    pub region_hits: BTreeMap<String, bool>,
    /// Largest change between consecutive commands, m/s².
    pub max_accel: f64,
    pub steps: u64,
    pub outcome: Option<Outcome>,
}

pub fn compute_metrics(trace: &Trace, spec: &ScenarioSpec) -> Metrics {
    let records = &trace.records;
    let start = spec.world.robot.position;
    let script = &spec.operator_script;

    let min_clearance = records.iter().filter_map(|r| r.clearance).fold(f64::INFINITY, f64::min);
    let path_length = records.windows(2).map(|w| w[0].robot.distance(w[1].robot)).sum();
    let steps_to_goal = records.iter().find(|r| r.robot.distance(spec.world.goal) <= spec.goal_radius).map(|r| r.step);
    let sq: f64 = records.iter().map(|r| r.robot.distance_sq(script.intent_position(start, r.step))).sum();
    let agreement_rms = if records.is_empty() { 0.0 } else { (sq / records.len() as f64).sqrt() };
    let region_hits =
        spec.world.regions.iter().map(|g| (g.name.clone(), records.iter().any(|r| g.rect.contains(r.robot)))).collect();
    let commands: Vec<_> = records.iter().filter_map(|r| r.u_s).collect();
    let max_accel = commands.windows(2).map(|w| w[0].velocity.distance(w[1].velocity) / spec.dt).fold(0.0, f64::max);

    Metrics {
        min_clearance: min_clearance.is_finite().then_some(min_clearance),
        collision: min_clearance < 0.0,
        path_length,
        steps_to_goal,
        agreement_rms,
        region_hits,
        max_accel,
        steps: records.last().map_or(0, |r| r.step),
        outcome: trace.outcome(),
    }
}
