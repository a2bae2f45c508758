//! The closed-loop experiment: operator → channel → models → controller → world.
//!
//! [`Simulation`] advances one step at a time so that the benchmark harness
//! (scripted operator) and the live teleoperation server (human operator)
//! drive exactly the same loop.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{staleness_noise_scale, staleness_weight, transmit, ChannelConfig, Delivery, TimedInput};
use crate::control::{
    csc_step, gsc_step, linear_blend, most_likely_command, safeguarded_blend, switching_control, Command,
    ControllerConfig, ControllerKind, SeedPolicy,
};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::gp::{
    fit_gp_posterior, log_marginal_likelihood, most_likely_mode, GpPosterior, HorizonGrid, KernelParams, Mode,
    ModeHypothesis, MultimodalTrajectoryDistribution, ObservationSet,
};
use crate::joint::JointModel;
use crate::metrics::{compute_metrics, Metrics};
use crate::rng::derive_seed;
use crate::scenario::{scripted_operator_input, RouteHypothesis, ScenarioSpec};
use crate::world::{collision_check, step_world, WorldState};

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Goal,
    Collision,
    MaxSteps,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSnapshot {
    pub id: String,
    pub position: Vec2<f64>,
    pub radius: f64,
    pub visible: bool,
}

/// One mixture component as drawn in world coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub label: String,
    pub weight: f64,
    pub mean: Vec<Vec2<f64>>,
}

/// The world at `step` and, unless the record is terminal, what was
/// commanded during that step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub robot: Vec2<f64>,
    pub obstacles: Vec<ObstacleSnapshot>,
    /// `None` when there are no obstacles.
    pub clearance: Option<f64>,
    pub u_h_raw: Option<Command<f64>>,
    pub u_h_delivered: Option<Command<f64>>,
    /// Age in seconds of the delivered operator input.
    pub u_h_age: Option<f64>,
    pub u_r: Option<Command<f64>>,
    pub u_s: Option<Command<f64>>,
    pub controller: ControllerKind,
    pub overrode: bool,
    pub selected_operator_mode: Option<String>,
    pub selected_autonomy_mode: Option<String>,
    pub operator_modes: Vec<ModeSummary>,
    pub autonomy_modes: Vec<ModeSummary>,
    /// Set on the final record only.
    pub outcome: Option<Outcome>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::BadScenario(format!("bad trace record: {e}"))))
            .collect::<Result<_>>()?;
        Ok(Self { records })
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.records.last().and_then(|r| r.outcome)
    }
}

/// Per-step trajectory models, in the frame centred on the robot.
#[derive(Clone, Debug, PartialEq)]
pub struct StepModels {
    pub operator: MultimodalTrajectoryDistribution<f64>,
    pub autonomy: MultimodalTrajectoryDistribution<f64>,
    pub environment: Vec<MultimodalTrajectoryDistribution<f64>>,
}

const INFERENCE_STREAM: u64 = 0x1F;
const CHANNEL_STREAM: u64 = 0x2F;

/// A running experiment.
#[derive(Clone, Debug)]
pub struct Simulation {
    spec: ScenarioSpec,
    controller: ControllerConfig,
    seed: u64,
    channel: ChannelConfig,
    world: WorldState,
    robot_history: Vec<Vec2<f64>>,
    obstacle_history: Vec<Vec<Vec2<f64>>>,
    pending: Vec<Delivery>,
    last_delivered: Option<Delivery>,
    belief: Vec<f64>,
    records: Vec<TraceRecord>,
    outcome: Option<Outcome>,
}

impl Simulation {
    pub fn new(spec: ScenarioSpec, controller: ControllerConfig, seed: u64) -> Result<Self> {
        spec.validate()?;
        controller.validate()?;
        let mut world = spec.world.clone();
        world.refresh();
        let belief = spec.operator_hypotheses.iter().map(|h| h.prior_weight).collect();
        let channel = run_channel(&spec.channel, seed);
        Ok(Self {
            robot_history: vec![world.robot.position],
            obstacle_history: vec![world.obstacles.iter().map(|o| o.position).collect()],
            spec,
            controller,
            seed,
            channel,
            world,
            pending: Vec::new(),
            last_delivered: None,
            belief,
            records: Vec::new(),
            outcome: None,
        })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn controller(&self) -> &ControllerConfig {
        &self.controller
    }

    /// Channel parameters as configured (the per-run seed is derived from them).
    pub fn channel(&self) -> ChannelConfig {
        ChannelConfig { seed: self.spec.channel.seed, ..self.channel }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn is_finished(&self) -> bool {
        self.outcome.is_some()
    }

    /// Operator route beliefs, in hypothesis order.
    pub fn operator_belief(&self) -> &[f64] {
        &self.belief
    }

    /// Change drop/lag/noise for inputs issued from now on. Inputs already in
    /// flight keep their schedule.
    pub fn set_channel(&mut self, cfg: ChannelConfig) -> Result<()> {
        cfg.validate()?;
        self.channel = run_channel(&ChannelConfig { seed: self.spec.channel.seed, ..cfg }, self.seed);
        Ok(())
    }

    pub fn set_controller(&mut self, controller: ControllerConfig) -> Result<()> {
        controller.validate()?;
        self.controller = controller;
        Ok(())
    }

    /// Metrics of the trace so far.
    pub fn metrics(&self) -> Option<Metrics> {
        if self.records.is_empty() {
            None
        } else {
            Some(compute_metrics(&Trace { records: self.records.clone() }, &self.spec))
        }
    }

    pub fn into_trace(self) -> Trace {
        Trace { records: self.records }
    }

    /// Advance one step with the scripted operator.
    pub fn step_scripted(&mut self) -> Result<&TraceRecord> {
        let input = scripted_operator_input(&self.spec.operator_script, &self.world, self.world.time_step);
        self.step(input.map(|i| i.command))
    }

    /// Advance one step; `operator` is the raw input issued this step, if any.
    /// Returns the record of the step. When the run ends the terminal record
    /// is appended as well.
    pub fn step(&mut self, operator: Option<Command<f64>>) -> Result<&TraceRecord> {
        if self.outcome.is_some() {
            return Err(Error::OutOfRange { name: "step".into(), reason: "the run has ended".into() });
        }
        let t = self.world.time_step;
        let dt = self.spec.dt;
        let v_max = self.world.robot.max_speed;
        let raw = operator.map(|c| if c.velocity.is_finite() { c } else { Command::zero() });
        if let Some(command) = raw {
            if let Some(d) = transmit(TimedInput { issued_step: t, command }, &self.channel) {
                self.pending.push(d);
            }
        }
        self.deliver_due(t)?;

        let models = self.build_models(self.controller.kind == ControllerKind::Gsc)?;
        let tau = self.controller.staleness_tau;
        let delivered = self.last_delivered.map(|d| {
            let age = (t - d.original.issued_step) as f64 * dt;
            (d.noisy_command.clamped(v_max), age)
        });
        let confidence = match delivered {
            Some((_, age)) => staleness_weight(age, tau)?,
            None => 0.0,
        };
        let u_h = delivered.map(|d| d.0).unwrap_or_else(Command::zero);
        let gains = self.controller.gains.discounted(confidence);
        let (auto_idx, u_r) = most_likely_command(&models.autonomy, Vec2::zero(), v_max);
        let (op_idx, _) = most_likely_mode(&models.operator);
        let mut selected_op = op_idx;
        let mut selected_auto = auto_idx;
        let mut overrode = false;
        let u_s = match self.controller.kind {
            ControllerKind::LinearBlend => linear_blend(u_h, u_r, gains, v_max)?,
            ControllerKind::Switching => {
                let engaged = delivered.is_some_and(|(_, age)| age <= tau);
                switching_control(u_h, u_r, engaged, v_max)
            }
            ControllerKind::SafeguardedBlend => {
                let (u, o) = safeguarded_blend(
                    u_h,
                    u_r,
                    gains,
                    &self.perceived_world(),
                    self.controller.safeguard_margin,
                    v_max,
                    dt,
                    self.spec.model.horizon_steps,
                )?;
                overrode = o;
                u
            }
            ControllerKind::CscMostLikely => csc_step(&models.operator, &models.autonomy, gains, Vec2::zero(), v_max)?,
            ControllerKind::Gsc => {
                let seed = match self.controller.inference.seed_policy {
                    SeedPolicy::PerRun => derive_seed(self.seed, INFERENCE_STREAM),
                    SeedPolicy::PerStep => derive_seed(derive_seed(self.seed, INFERENCE_STREAM), t),
                    SeedPolicy::Fixed(s) => s,
                };
                let model = JointModel {
                    operator: models.operator.clone(),
                    autonomy: models.autonomy.clone(),
                    environment: models.environment.clone(),
                    params: self.spec.interaction,
                };
                let (u, hyp) = gsc_step(&model, Vec2::zero(), self.controller.inference.n_samples, seed, v_max)?;
                selected_op = hyp.operator_mode;
                selected_auto = hyp.autonomy_mode;
                u
            }
        };

        let origin = self.world.robot.position;
        let record = TraceRecord {
            u_h_raw: raw,
            u_h_delivered: delivered.map(|d| d.0),
            u_h_age: delivered.map(|d| d.1),
            u_r: Some(u_r),
            u_s: Some(u_s),
            overrode,
            selected_operator_mode: Some(models.operator.modes[selected_op].hypothesis.label.clone()),
            selected_autonomy_mode: Some(models.autonomy.modes[selected_auto].hypothesis.label.clone()),
            operator_modes: summarize(&models.operator, origin),
            autonomy_modes: summarize(&models.autonomy, origin),
            ..self.snapshot()
        };
        self.records.push(record);
        let index = self.records.len() - 1;

        self.world = step_world(&self.world, u_s, dt);
        self.robot_history.push(self.world.robot.position);
        self.obstacle_history.push(self.world.obstacles.iter().map(|o| o.position).collect());
        let clearance = collision_check(&self.world);
        let outcome = if clearance < 0.0 {
            Some(Outcome::Collision)
        } else if self.world.robot.position.distance(self.world.goal) <= self.spec.goal_radius {
            Some(Outcome::Goal)
        } else if self.world.time_step >= self.spec.max_steps {
            Some(Outcome::MaxSteps)
        } else {
            None
        };
        if let Some(o) = outcome {
            let terminal = TraceRecord { outcome: Some(o), ..self.snapshot() };
            self.records.push(terminal);
            self.outcome = Some(o);
        }
        Ok(&self.records[index])
    }

    fn snapshot(&self) -> TraceRecord {
        let clearance = collision_check(&self.world);
        TraceRecord {
            step: self.world.time_step,
            robot: self.world.robot.position,
            obstacles: self
                .world
                .obstacles
                .iter()
                .map(|o| ObstacleSnapshot {
                    id: o.id.clone(),
                    position: o.position,
                    radius: o.radius,
                    visible: o.visible,
                })
                .collect(),
            clearance: clearance.is_finite().then_some(clearance),
            u_h_raw: None,
            u_h_delivered: None,
            u_h_age: None,
            u_r: None,
            u_s: None,
            controller: self.controller.kind,
            overrode: false,
            selected_operator_mode: None,
            selected_autonomy_mode: None,
            operator_modes: Vec::new(),
            autonomy_modes: Vec::new(),
            outcome: None,
        }
    }

    fn deliver_due(&mut self, t: u64) -> Result<()> {
        let (mut due, later): (Vec<Delivery>, Vec<Delivery>) =
            self.pending.drain(..).partition(|d| d.delivered_step <= t);
        self.pending = later;
        due.sort_by_key(|d| (d.delivered_step, d.original.issued_step));
        for d in due {
            if self.last_delivered.is_some_and(|l| l.original.issued_step >= d.original.issued_step) {
                continue;
            }
            self.last_delivered = Some(d);
            let age = (t - d.original.issued_step) as f64 * self.spec.dt;
            self.update_belief(d.noisy_command.clamped(self.world.robot.max_speed), age)?;
        }
        Ok(())
    }

    /// Treat a delivered command as evidence about which route the operator
    /// has in mind. Zero commands carry no steering information.
    fn update_belief(&mut self, command: Command<f64>, age: f64) -> Result<()> {
        if command.speed() < 1e-6 {
            return Ok(());
        }
        let obs = self.operator_observations(Some((command, age)))?;
        let p = self.world.robot.position;
        let kernel = &self.spec.kernels.operator;
        let after = self.spec.model.aim_lead;
        // Each route is scored on the same pseudo-observations its posterior
        // is fitted to, so a command that contradicts the route's path (not
        // just its end point) counts against it.
        let mut log_w = Vec::with_capacity(self.belief.len());
        for (r, b) in self.spec.operator_hypotheses.iter().zip(&self.belief) {
            let ll = log_marginal_likelihood(&self.with_route(&obs, r, kernel, p, after), kernel)?;
            let lw = b.ln() + ll;
            log_w.push(if lw.is_nan() { f64::NEG_INFINITY } else { lw });
        }
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max.is_finite() {
            let floor = self.spec.model.belief_floor;
            let floored: Vec<f64> = log_w.iter().map(|l| (l - max).exp().max(floor)).collect();
            let total: f64 = floored.iter().sum();
            self.belief = floored.into_iter().map(|x| x / total).collect();
        }
        Ok(())
    }

    fn grid(&self) -> HorizonGrid<f64> {
        HorizonGrid::lookahead(self.spec.dt, self.spec.model.horizon_steps)
    }

    /// Route goal relative to the robot at `p`.
    fn route_goal(&self, route: &RouteHypothesis, p: Vec2<f64>) -> Vec2<f64> {
        let m = &self.spec.model;
        let lead = m.nominal_speed * self.grid().end() * m.goal_lead_factor;
        route.carrot(p, lead) - p
    }

    /// Noise scale that gives route pseudo-observations of `kernel` the
    /// configured standard deviation.
    fn route_noise_scale(&self, kernel: &KernelParams<f64>) -> f64 {
        let own = kernel.noise_variance.sqrt();
        if own > 0.0 {
            (self.spec.model.route_noise_std / own).max(1.0)
        } else {
            1.0
        }
    }

    /// `obs` plus evenly spaced points along `route` (relative to `p`) at
    /// times after `after`. An agent off the route rejoins it gradually: the
    /// offset shrinks linearly and vanishes after `rejoin_seconds`.
    fn with_route(
        &self,
        obs: &ObservationSet<f64>,
        route: &RouteHypothesis,
        kernel: &KernelParams<f64>,
        p: Vec2<f64>,
        after: f64,
    ) -> ObservationSet<f64> {
        let m = &self.spec.model;
        let scale = self.route_noise_scale(kernel);
        let end = self.grid().end();
        let lead = m.nominal_speed * end * m.goal_lead_factor;
        let n = m.route_points.max(1);
        let start = route.progress(p);
        let offset = p - route.point_at(start);
        let mut out = obs.clone();
        for j in 1..=n {
            let f = j as f64 / n as f64;
            if f * end > after {
                let fade = (1.0 - f * end / m.rejoin_seconds).max(0.0);
                let target = route.point_at(start + f * lead) + offset * fade;
                out.push_scaled(f * end, target - p, scale);
            }
        }
        out
    }

    /// Anchor at the robot plus, if available, an aim point `aim_lead`
    /// seconds along the operator's command.
    fn operator_observations(&self, input: Option<(Command<f64>, f64)>) -> Result<ObservationSet<f64>> {
        let mut obs = ObservationSet::new("operator");
        obs.push(0.0, Vec2::zero());
        if let Some((command, age)) = input {
            let lead = self.spec.model.aim_lead;
            let scale = staleness_noise_scale(age, self.controller.staleness_tau)?;
            obs.push_scaled(lead, command.velocity * lead, scale);
        }
        Ok(obs)
    }

    fn autonomy_observations(&self) -> ObservationSet<f64> {
        let t = self.world.time_step;
        let p = self.world.robot.position;
        let mut obs = ObservationSet::new("autonomy");
        // Before the first step the robot is taken to have been at rest.
        for k in history_offsets(&self.spec.model.history_steps) {
            let then = self.robot_history[t.saturating_sub(k) as usize];
            obs.push(-(k as f64) * self.spec.dt, then - p);
        }
        obs.push(0.0, Vec2::zero());
        obs
    }

    /// World restricted to what the robot perceives: visible obstacles within
    /// sensing range.
    pub fn perceived_world(&self) -> WorldState {
        let mut w = self.world.clone();
        let p = w.robot.position;
        let range = self.spec.model.sensing_range;
        w.obstacles.retain(|o| o.visible && o.position.distance(p) - o.radius <= range);
        w
    }

    /// Operator, autonomy and (optionally) environment models at the current step.
    pub fn build_models(&self, with_environment: bool) -> Result<StepModels> {
        let grid = self.grid();
        let p = self.world.robot.position;
        let m = &self.spec.model;
        let kernels = &self.spec.kernels;
        let perceived = self.perceived_world();

        // Autonomy: robot history conditioned on each route goal; routes
        // predicted to run into a visible obstacle are demoted.
        let obs = self.autonomy_observations();
        let mut hyps = Vec::with_capacity(self.spec.autonomy_hypotheses.len());
        let mut posts = Vec::with_capacity(hyps.capacity());
        for r in &self.spec.autonomy_hypotheses {
            let hyp = ModeHypothesis::new(r.label.clone(), self.route_goal(r, p), r.prior_weight);
            let post =
                fit_gp_posterior(&self.with_route(&obs, r, &kernels.autonomy, p, 0.0), &kernels.autonomy, &grid)?;
            let blocked = path_clearance(&perceived, &post, p) < m.blocked_margin;
            hyps.push(ModeHypothesis {
                prior_weight: hyp.prior_weight * if blocked { m.blocked_factor } else { 1.0 },
                ..hyp
            });
            posts.push(post);
        }
        // The weights are the planner's route preferences. They are not
        // re-estimated from the robot's own motion: that would let whatever
        // the blend did last decide what the autonomy wants next.
        let total: f64 = hyps.iter().map(|h| h.prior_weight).sum();
        for h in &mut hyps {
            h.prior_weight /= total;
        }
        let weights = hyps.iter().map(|h| h.prior_weight).collect();
        let autonomy = mixture(hyps, posts, weights)?;

        // Operator: anchor plus the latest delivered command as an aim point.
        let t = self.world.time_step;
        let input = self.last_delivered.filter(|d| d.noisy_command.speed() >= 1e-6).map(|d| {
            (d.noisy_command.clamped(self.world.robot.max_speed), (t - d.original.issued_step) as f64 * self.spec.dt)
        });
        let after = if input.is_some() { m.aim_lead } else { 0.0 };
        let obs = self.operator_observations(input)?;
        let mut hyps = Vec::with_capacity(self.spec.operator_hypotheses.len());
        let mut posts = Vec::with_capacity(hyps.capacity());
        for (r, b) in self.spec.operator_hypotheses.iter().zip(&self.belief) {
            let hyp = ModeHypothesis::new(r.label.clone(), self.route_goal(r, p), *b);
            posts.push(fit_gp_posterior(
                &self.with_route(&obs, r, &kernels.operator, p, after),
                &kernels.operator,
                &grid,
            )?);
            hyps.push(hyp);
        }
        let weights = self.belief.clone();
        let operator = mixture(hyps, posts, weights)?;

        let environment = if with_environment { self.environment_models(&perceived, &grid)? } else { Vec::new() };
        Ok(StepModels { operator, autonomy, environment })
    }

    /// One unimodal model per perceived obstacle: constant-velocity
    /// extrapolation plus a GP over the deviations from it.
    fn environment_models(
        &self,
        perceived: &WorldState,
        grid: &HorizonGrid<f64>,
    ) -> Result<Vec<MultimodalTrajectoryDistribution<f64>>> {
        let t = self.world.time_step;
        let p = self.world.robot.position;
        let dt = self.spec.dt;
        let back: Vec<u64> = history_offsets(&self.spec.model.history_steps).into_iter().filter(|k| *k <= t).collect();
        let mut out = Vec::new();
        for o in &perceived.obstacles {
            let index = self.world.obstacles.iter().position(|w| w.id == o.id).expect("perceived obstacles exist");
            let mut obs = ObservationSet::new(o.id.clone());
            for &k in &back {
                let then = self.obstacle_history[(t - k) as usize][index];
                let predicted = o.position - o.velocity * (k as f64 * dt);
                obs.push(-(k as f64) * dt, then - predicted);
            }
            obs.push(0.0, Vec2::zero());
            let mut post = fit_gp_posterior(&obs, &self.spec.kernels.environment, grid)?;
            for (j, mean) in post.mean.iter_mut().enumerate() {
                *mean += o.position - p + o.velocity * grid.time(j);
            }
            out.push(MultimodalTrajectoryDistribution::unimodal(o.id.clone(), post));
        }
        Ok(out)
    }
}

/// Distinct positive step offsets, oldest first.
fn history_offsets(steps: &[u64]) -> Vec<u64> {
    let mut back: Vec<u64> = steps.iter().copied().filter(|k| *k > 0).collect();
    back.sort_unstable_by(|a, b| b.cmp(a));
    back.dedup();
    back
}

fn run_channel(cfg: &ChannelConfig, run_seed: u64) -> ChannelConfig {
    ChannelConfig { seed: derive_seed(derive_seed(cfg.seed, CHANNEL_STREAM), run_seed), ..*cfg }
}

fn mixture(
    hyps: Vec<ModeHypothesis<f64>>,
    posts: Vec<GpPosterior<f64>>,
    weights: Vec<f64>,
) -> Result<MultimodalTrajectoryDistribution<f64>> {
    let modes = hyps
        .into_iter()
        .zip(posts)
        .zip(weights)
        .map(|((hypothesis, posterior), weight)| Mode { weight, posterior, hypothesis })
        .collect();
    MultimodalTrajectoryDistribution::new(modes)
}

/// Smallest predicted clearance between a robot path (relative to `origin`)
/// and the obstacles of `world` moving at constant velocity.
fn path_clearance(world: &WorldState, post: &GpPosterior<f64>, origin: Vec2<f64>) -> f64 {
    let mut best = f64::INFINITY;
    for o in &world.obstacles {
        for (j, m) in post.mean.iter().enumerate() {
            let at = o.position + o.velocity * post.grid.time(j);
            best = best.min((origin + *m).distance(at) - world.robot.radius - o.radius);
        }
    }
    best
}

fn summarize(dist: &MultimodalTrajectoryDistribution<f64>, origin: Vec2<f64>) -> Vec<ModeSummary> {
    dist.modes
        .iter()
        .map(|m| ModeSummary {
            label: m.hypothesis.label.clone(),
            weight: m.weight,
            mean: m.posterior.mean.iter().map(|p| *p + origin).collect(),
        })
        .collect()
}

/// Run `spec` to completion with the scripted operator.
pub fn run_scenario(spec: &ScenarioSpec, controller: &ControllerConfig, seed: u64) -> Result<(Trace, Metrics)> {
    let mut sim = Simulation::new(spec.clone(), *controller, seed)?;
    while !sim.is_finished() {
        sim.step_scripted()?;
    }
    let trace = sim.into_trace();
    let metrics = compute_metrics(&trace, spec);
    Ok((trace, metrics))
}

/// Most frequent selected operator mode over a trace (first seen wins ties).
pub fn dominant_operator_mode(trace: &Trace) -> Option<String> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (i, r) in trace.records.iter().enumerate() {
        if let Some(l) = &r.selected_operator_mode {
            let e = counts.entry(l).or_insert((0, i));
            e.0 += 1;
        }
    }
    counts.into_iter().max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1))).map(|(l, _)| l.to_string())
}
