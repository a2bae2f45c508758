//! One live session: a simulation driven by a mailbox of operator inputs.
//!
//! The session is plain synchronous state. Network handlers only call
//! [`SessionCore::handle`], which validates, enqueues and swaps settings;
//! the world is advanced exclusively by [`SessionCore::tick`], which the
//! session loop calls once per tick.

use std::collections::BTreeMap;

use gsc_core::channel::ChannelConfig;
use gsc_core::{build_scenario, Command, ControllerKind, ScenarioSpec, Simulation, CATALOG};

use crate::protocol::{ClientBody, ConfigPatch, LiveConfig, ProtocolError, ScenarioEntry, ServerBody, Snapshot};

/// Pending inputs a session holds before refusing more.
pub const MAILBOX_CAP: usize = 4096;
pub const DEFAULT_TICK_HZ: f64 = 10.0;
const MAX_TICK_HZ: f64 = 1000.0;

struct Run {
    spec: ScenarioSpec,
    controller: ControllerKind,
    seed: u64,
    sim: Simulation,
    /// Inputs keyed by the step they take effect at; later writes win.
    mailbox: BTreeMap<u64, Command>,
    /// The operator's current command, held until replaced.
    held: Option<Command>,
    paused: bool,
    ended: bool,
}

impl Run {
    fn config(&self) -> LiveConfig {
        LiveConfig::new(&self.sim.channel(), self.sim.controller().kind, self.paused)
    }

    fn snapshot(&self) -> ServerBody {
        ServerBody::StateSnapshot(Box::new(Snapshot {
            step: self.sim.world().time_step,
            world: self.sim.world().clone(),
            last: self.sim.records().iter().rev().find(|r| r.outcome.is_none()).cloned(),
            operator_belief: self.sim.operator_belief().to_vec(),
            metrics: self.sim.metrics(),
            config: self.config(),
        }))
    }
}

pub struct SessionCore {
    tick_hz: f64,
    run: Option<Run>,
}

impl Default for SessionCore {
    fn default() -> Self {
        Self::new()
    }
}

pub fn scenario_entries() -> Vec<ScenarioEntry> {
    CATALOG
        .iter()
        .map(|id| ScenarioEntry {
            id: id.to_string(),
            description: build_scenario(id).map(|s| s.description).unwrap_or_default(),
        })
        .collect()
}

impl SessionCore {
    pub fn new() -> Self {
        Self { tick_hz: DEFAULT_TICK_HZ, run: None }
    }

    pub fn tick_hz(&self) -> f64 {
        self.tick_hz
    }

    /// Steps executed in the current run, if one is started.
    pub fn step(&self) -> Option<u64> {
        self.run.as_ref().map(|r| r.sim.world().time_step)
    }

    /// Whether ticks currently advance the simulation.
    pub fn is_running(&self) -> bool {
        self.run.as_ref().is_some_and(|r| !r.paused && !r.ended)
    }

    pub fn pause(&mut self) {
        if let Some(r) = &mut self.run {
            r.paused = true;
        }
    }

    /// React to one client message. `Hello` is handled by the connection
    /// layer and is rejected here.
    pub fn handle(&mut self, msg: ClientBody) -> Vec<ServerBody> {
        match self.try_handle(msg) {
            Ok(out) => out,
            Err(e) => vec![e.body()],
        }
    }

    fn try_handle(&mut self, msg: ClientBody) -> Result<Vec<ServerBody>, ProtocolError> {
        match msg {
            ClientBody::Hello { .. } => Err(ProtocolError::new("bad-message", "session already established")),
            ClientBody::ScenarioList {} => Ok(vec![ServerBody::ScenarioList { scenarios: scenario_entries() }]),
            ClientBody::Start { scenario, controller, seed, tick_hz, paused } => {
                let tick_hz = tick_hz.unwrap_or(DEFAULT_TICK_HZ);
                if !(tick_hz > 0.0 && tick_hz <= MAX_TICK_HZ) {
                    return Err(ProtocolError::new("out-of-range", format!("tick_hz must lie in (0, {MAX_TICK_HZ}]")));
                }
                let spec = build_scenario(&scenario)?;
                let sim = Simulation::new(spec.clone(), spec.controller_config(controller), seed)?;
                self.tick_hz = tick_hz;
                let run =
                    Run { spec, controller, seed, sim, mailbox: BTreeMap::new(), held: None, paused, ended: false };
                let ack = ServerBody::Start {
                    scenario: run.spec.id.clone(),
                    controller,
                    seed,
                    tick_hz,
                    spec: Box::new(run.spec.clone()),
                };
                let snap = run.snapshot();
                self.run = Some(run);
                Ok(vec![ack, snap])
            }
            ClientBody::OperatorInput { vx, vy, step } => {
                let run = self.started()?;
                if !vx.is_finite() || !vy.is_finite() {
                    return Err(ProtocolError::new("out-of-range", "input must be finite"));
                }
                let at = step.unwrap_or(run.sim.world().time_step).max(run.sim.world().time_step);
                if run.mailbox.len() >= MAILBOX_CAP && !run.mailbox.contains_key(&at) {
                    return Err(ProtocolError::new("mailbox-full", format!("more than {MAILBOX_CAP} pending inputs")));
                }
                run.mailbox.insert(at, Command::new(vx, vy));
                Ok(vec![])
            }
            ClientBody::ConfigUpdate(patch) => {
                let run = self.started()?;
                apply_patch(run, &patch)?;
                Ok(vec![ServerBody::ConfigUpdate(run.config())])
            }
            ClientBody::Reset {} => {
                let run = self.started()?;
                run.sim = Simulation::new(run.spec.clone(), run.spec.controller_config(run.controller), run.seed)?;
                run.mailbox.clear();
                run.held = None;
                run.ended = false;
                Ok(vec![ServerBody::Reset {}, run.snapshot()])
            }
        }
    }

    fn started(&mut self) -> Result<&mut Run, ProtocolError> {
        self.run.as_mut().ok_or_else(|| ProtocolError::new("not-started", "send start first"))
    }

    /// Advance one step if running: drain due inputs, step the simulation,
    /// and report the new state (plus `run_ended` on the final step).
    pub fn tick(&mut self) -> Vec<ServerBody> {
        let Some(run) = self.run.as_mut().filter(|r| !r.paused && !r.ended) else {
            return vec![];
        };
        let now = run.sim.world().time_step;
        let due: Vec<u64> = run.mailbox.range(..=now).map(|(k, _)| *k).collect();
        if let Some(last) = due.last() {
            run.held = run.mailbox.get(last).copied();
        }
        for k in due {
            run.mailbox.remove(&k);
        }
        if let Err(e) = run.sim.step(run.held) {
            run.ended = true;
            return vec![ProtocolError::from(e).body()];
        }
        let mut out = vec![run.snapshot()];
        if let Some(outcome) = run.sim.outcome() {
            run.ended = true;
            let metrics = run.sim.metrics().expect("a finished run has records");
            out.push(ServerBody::RunEnded { outcome, metrics });
        }
        out
    }
}

fn apply_patch(run: &mut Run, patch: &ConfigPatch) -> Result<(), ProtocolError> {
    // Validate everything before changing anything.
    let current = run.sim.channel();
    let channel = ChannelConfig {
        drop_probability: patch.drop.unwrap_or(current.drop_probability),
        lag_steps: patch.lag.unwrap_or(current.lag_steps),
        noise_std: patch.noise.unwrap_or(current.noise_std),
        ..current
    };
    channel.validate()?;
    let controller = patch.controller.map(|k| run.spec.controller_config(k));
    if let Some(c) = &controller {
        c.validate()?;
    }
    run.sim.set_channel(channel)?;
    if let Some(c) = controller {
        run.sim.set_controller(c)?;
        run.controller = c.kind;
    }
    if let Some(p) = patch.paused {
        run.paused = p;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn started(controller: ControllerKind) -> SessionCore {
        let mut s = SessionCore::new();
        let out = s.handle(ClientBody::Start {
            scenario: "two-mode-autopilot".into(),
            controller,
            seed: 3,
            tick_hz: None,
            paused: false,
        });
        assert!(matches!(out[0], ServerBody::Start { .. }));
        s
    }

    fn snapshot(out: &[ServerBody]) -> &Snapshot {
        out.iter()
            .find_map(|b| match b {
                ServerBody::StateSnapshot(s) => Some(s.as_ref()),
                _ => None,
            })
            .expect("snapshot")
    }

    #[test]
    fn inputs_before_start_are_refused() {
        let mut s = SessionCore::new();
        let out = s.handle(ClientBody::OperatorInput { vx: 1.0, vy: 0.0, step: None });
        assert!(matches!(&out[0], ServerBody::Error { code, .. } if code == "not-started"));
        assert!(s.tick().is_empty());
    }

    #[test]
    fn input_is_echoed_as_raw_and_held() {
        let mut s = started(ControllerKind::LinearBlend);
        s.handle(ClientBody::OperatorInput { vx: 1.0, vy: 0.0, step: None });
        let a = s.tick();
        assert_eq!(snapshot(&a).last.as_ref().unwrap().u_h_raw, Some(Command::new(1.0, 0.0)));
        let b = s.tick();
        assert_eq!(snapshot(&b).last.as_ref().unwrap().u_h_raw, Some(Command::new(1.0, 0.0)));
    }

    #[test]
    fn out_of_range_update_leaves_config_unchanged() {
        let mut s = started(ControllerKind::Gsc);
        let before = snapshot(&s.tick()).config.clone();
        let out =
            s.handle(ClientBody::ConfigUpdate(ConfigPatch { drop: Some(1.5), lag: Some(3), ..Default::default() }));
        assert!(matches!(&out[0], ServerBody::Error { code, .. } if code == "out-of-range"));
        assert_eq!(snapshot(&s.tick()).config, before);
    }

    #[test]
    fn pause_stops_the_clock() {
        let mut s = started(ControllerKind::LinearBlend);
        s.handle(ClientBody::ConfigUpdate(ConfigPatch { paused: Some(true), ..Default::default() }));
        assert!(s.tick().is_empty());
        assert_eq!(s.step(), Some(0));
    }
}
