use gsc_core::control::{
    csc_step, gsc_step, linear_blend, most_likely_command, rollout_clearance, safeguarded_blend, switching_control,
    BlendGains, Command,
};
use gsc_core::geom::{Rect, Vec2};
use gsc_core::gp::{GpPosterior, HorizonGrid, Mode, ModeHypothesis, MultimodalTrajectoryDistribution};
use gsc_core::joint::{InteractionParams, JointModel};
use gsc_core::world::{Obstacle, Robot, WorldState};
use proptest::prelude::*;

const DT: f64 = 0.1;
const STEPS: usize = 40;
const V_MAX: f64 = 2.0;

fn world(obstacles: Vec<Obstacle>) -> WorldState {
    WorldState {
        time_step: 0,
        robot: Robot { position: Vec2::zero(), radius: 0.3, max_speed: V_MAX },
        obstacles,
        goal: Vec2::new(0.0, 10.0),
        bounds: Rect::new(Vec2::new(-20.0, -20.0), Vec2::new(20.0, 20.0)),
        regions: vec![],
    }
}

fn disc(id: &str, p: (f64, f64), v: (f64, f64), radius: f64) -> Obstacle {
    Obstacle {
        id: id.into(),
        position: Vec2::new(p.0, p.1),
        radius,
        velocity: Vec2::new(v.0, v.1),
        visible: true,
        reveal_step: 0,
        script: vec![],
    }
}

fn c(x: f64, y: f64) -> Command<f64> {
    Command::new(x, y)
}

/// Constant-velocity clearance computed from closed-form positions.
fn clearance_ref(w: &WorldState, u: Command<f64>) -> f64 {
    let mut best = f64::INFINITY;
    for o in w.obstacles.iter().filter(|o| o.visible) {
        for j in 1..=STEPS {
            let t = DT * j as f64;
            let rx = w.robot.position.x + u.velocity.x * t;
            let ry = w.robot.position.y + u.velocity.y * t;
            let ox = o.position.x + o.velocity.x * t;
            let oy = o.position.y + o.velocity.y * t;
            best = best.min(((rx - ox).powi(2) + (ry - oy).powi(2)).sqrt() - w.robot.radius - o.radius);
        }
    }
    best
}

#[test]
fn empty_world_keeps_the_blend() {
    let g = BlendGains::convex(0.5, 0.5).unwrap();
    let (u, overrode) = safeguarded_blend(c(2.0, 0.0), c(0.0, 2.0), g, &world(vec![]), 0.3, V_MAX, DT, STEPS).unwrap();
    assert_eq!((u, overrode), (c(1.0, 1.0), false));
}

#[test]
fn unsafe_operator_input_falls_back_to_autonomy() {
    let w = world(vec![disc("wall", (0.0, 3.0), (0.0, 0.0), 0.5)]);
    let (u_h, u_r) = (c(0.0, 2.0), c(2.0, 0.0));
    let g = BlendGains::convex(0.9, 0.1).unwrap();
    let blend = linear_blend(u_h, u_r, g, V_MAX).unwrap();
    assert!(clearance_ref(&w, blend) < 0.3);
    assert!(clearance_ref(&w, u_r) >= 0.3);
    let (u, overrode) = safeguarded_blend(u_h, u_r, g, &w, 0.3, V_MAX, DT, STEPS).unwrap();
    assert_eq!((u, overrode), (u_r, true));
}

#[test]
fn blocked_merge_freezes() {
    // A stream of traffic crossing both the operator's and the autonomy's path.
    let cars: Vec<_> =
        (0..8).map(|i| disc(&format!("car-{i}"), (-10.0 + 2.0 * i as f64, 2.0), (1.5, 0.0), 0.6)).collect();
    let w = world(cars);
    let (u_h, u_r) = (c(0.5, 1.5), c(0.0, 1.0));
    let g = BlendGains::convex(0.5, 0.5).unwrap();
    assert!(clearance_ref(&w, linear_blend(u_h, u_r, g, V_MAX).unwrap()) < 0.3);
    assert!(clearance_ref(&w, u_r) < 0.3);
    let (u, overrode) = safeguarded_blend(u_h, u_r, g, &w, 0.3, V_MAX, DT, STEPS).unwrap();
    assert_eq!((u, overrode), (Command::zero(), true));
}

#[test]
fn rollout_clearance_matches_closed_form() {
    let w = world(vec![disc("a", (1.0, 4.0), (0.0, -1.0), 0.5), disc("b", (-3.0, 1.0), (0.5, 0.2), 0.4)]);
    for u in [c(0.0, 1.0), c(1.5, -0.3), c(-1.0, 1.0), Command::zero()] {
        assert!((rollout_clearance(&w, u, DT, STEPS) - clearance_ref(&w, u)).abs() < 1e-12);
    }
    let mut hidden = w.clone();
    hidden.obstacles.iter_mut().for_each(|o| o.visible = false);
    assert_eq!(rollout_clearance(&hidden, c(0.0, 1.0), DT, STEPS), f64::INFINITY);
}

fn mode(label: &str, weight: f64, mean: Vec<Vec2<f64>>, var: f64) -> Mode<f64> {
    let steps = mean.len();
    Mode {
        weight,
        posterior: GpPosterior {
            grid: HorizonGrid::lookahead(DT, steps),
            mean,
            variance: vec![Vec2::new(var, var); steps],
        },
        hypothesis: ModeHypothesis::new(label, Vec2::zero(), weight),
    }
}

fn straight(dir: (f64, f64), steps: usize) -> Vec<Vec2<f64>> {
    (1..=steps).map(|j| Vec2::new(dir.0, dir.1) * (DT * j as f64)).collect()
}

#[test]
fn identical_unimodal_means_give_that_velocity() {
    let d = MultimodalTrajectoryDistribution::new(vec![mode("a", 1.0, straight((0.6, 0.8), 5), 0.1)]).unwrap();
    let u = csc_step(&d, &d, BlendGains::convex(0.5, 0.5).unwrap(), Vec2::zero(), V_MAX).unwrap();
    assert!((u.velocity - Vec2::new(0.6, 0.8)).norm() < 1e-12);
}

/// Left and right routes around a central obstacle band; the operator
/// favours left, the autonomy favours right.
fn fork() -> (MultimodalTrajectoryDistribution<f64>, MultimodalTrajectoryDistribution<f64>, WorldState) {
    let left = straight((-1.0, 1.0), 10);
    let right = straight((1.0, 1.0), 10);
    let op = MultimodalTrajectoryDistribution::new(vec![
        mode("left", 0.6, left.clone(), 0.0),
        mode("right", 0.4, right.clone(), 0.0),
    ])
    .unwrap();
    let auto =
        MultimodalTrajectoryDistribution::new(vec![mode("left", 0.4, left, 0.0), mode("right", 0.6, right, 0.0)])
            .unwrap();
    let band = world(vec![disc("band", (0.0, 2.5), (0.0, 0.0), 1.0)]);
    (op, auto, band)
}

#[test]
fn classical_blend_of_two_routes_enters_the_band() {
    let (op, auto, band) = fork();
    assert_eq!(most_likely_command(&op, Vec2::zero(), V_MAX).0, 0);
    assert_eq!(most_likely_command(&auto, Vec2::zero(), V_MAX).0, 1);
    let u = csc_step(&op, &auto, BlendGains::convex(0.5, 0.5).unwrap(), Vec2::zero(), V_MAX).unwrap();
    assert!(u.velocity.x.abs() < 1e-12 && u.velocity.y > 0.0);
    assert!(clearance_ref(&band, u) < 0.0);
    // Either route on its own stays clear.
    assert!(clearance_ref(&band, c(-1.0, 1.0)) > 0.0 && clearance_ref(&band, c(1.0, 1.0)) > 0.0);
    let pure = csc_step(&op, &auto, BlendGains::operator_only(), Vec2::zero(), V_MAX).unwrap();
    assert_eq!(pure.velocity, Vec2::new(-1.0, 1.0));
}

#[test]
fn generalized_step_follows_one_consistent_route() {
    let (op, auto, band) = fork();
    let obstacle =
        MultimodalTrajectoryDistribution::new(vec![mode("band", 1.0, vec![Vec2::new(0.0, 2.5); 10], 0.0)]).unwrap();
    let model = JointModel {
        operator: op,
        autonomy: auto,
        environment: vec![obstacle],
        params: InteractionParams {
            safety_strength: 0.99,
            safety_scale: 0.5,
            agreement_scale: 0.5,
            agreement_enabled: true,
            safety_enabled: true,
        },
    };
    let (u, hyp) = gsc_step(&model, Vec2::zero(), 200, 1, V_MAX).unwrap();
    assert_eq!(hyp.operator_mode, hyp.autonomy_mode);
    assert!(clearance_ref(&band, u) > 0.0);
    let again = gsc_step(&model, Vec2::zero(), 200, 1, V_MAX).unwrap();
    assert_eq!((u, hyp), again);
}

#[test]
fn generalized_step_reduces_to_the_autonomy_mean() {
    let auto = MultimodalTrajectoryDistribution::new(vec![mode("a", 1.0, straight((0.3, 1.2), 4), 0.0)]).unwrap();
    let op = MultimodalTrajectoryDistribution::new(vec![mode("h", 1.0, straight((-1.0, 0.2), 4), 0.3)]).unwrap();
    let params = InteractionParams {
        safety_strength: 0.5,
        safety_scale: 1.0,
        agreement_scale: 1.0,
        agreement_enabled: false,
        safety_enabled: false,
    };
    let model = JointModel { operator: op, autonomy: auto, environment: vec![], params };
    let (u, _) = gsc_step(&model, Vec2::zero(), 50, 0, V_MAX).unwrap();
    assert!((u.velocity - Vec2::new(0.3, 1.2)).norm() < 1e-9);
}

#[test]
fn blending_at_precision_weights_matches_the_joint_map_direction() {
    // One-step unimodal futures with equal variance; agreement on, safety off.
    let var = 0.01;
    let a = 0.1;
    let m_h = Vec2::new(0.1, 0.2);
    let m_r = Vec2::new(-0.1, 0.2);
    let dist = |m: Vec2<f64>| MultimodalTrajectoryDistribution::new(vec![mode("u", 1.0, vec![m], var)]).unwrap();
    let model = JointModel {
        operator: dist(m_h),
        autonomy: dist(m_r),
        environment: vec![],
        params: InteractionParams {
            safety_strength: 0.5,
            safety_scale: 1.0,
            agreement_scale: a,
            agreement_enabled: true,
            safety_enabled: false,
        },
    };
    let p_r = 1.0 / var;
    let p_h = 1.0 / (var + a * a);
    let gains = BlendGains::convex(p_h / (p_h + p_r), p_r / (p_h + p_r)).unwrap();
    let v_max = 10.0;
    let csc = csc_step(&model.operator, &model.autonomy, gains, Vec2::zero(), v_max).unwrap();
    let (gsc, _) = gsc_step(&model, Vec2::zero(), 10_000, 5, v_max).unwrap();
    let angle = (csc.velocity.normalized().dot(gsc.velocity.normalized())).clamp(-1.0, 1.0).acos();
    assert!(angle < 0.15, "angle {angle}");
}

fn cmd() -> impl Strategy<Value = Command<f64>> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(x, y)| Command::new(x, y))
}

proptest! {
    #[test]
    fn convex_blend_lies_on_the_segment(u_h in cmd(), u_r in cmd(), k in 0.0f64..=1.0) {
        let g = BlendGains::convex(k, 1.0 - k).unwrap();
        let u = linear_blend(u_h, u_r, g, 1e9).unwrap();
        let seg = u_r.velocity - u_h.velocity;
        let rel = u.velocity - u_h.velocity;
        let s = if seg.norm_sq() > 0.0 { rel.dot(seg) / seg.norm_sq() } else { 0.0 };
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&s));
        prop_assert!((rel - seg * s).norm() < 1e-9);
    }

    #[test]
    fn switching_is_an_endpoint_blend(u_h in cmd(), u_r in cmd(), engaged: bool) {
        let g = if engaged { BlendGains::operator_only() } else { BlendGains::autonomy_only() };
        prop_assert_eq!(switching_control(u_h, u_r, engaged, V_MAX), linear_blend(u_h, u_r, g, V_MAX).unwrap());
    }

    #[test]
    fn safeguard_never_returns_an_unsafe_motion(
        u_h in cmd(), u_r in cmd(), k in 0.0f64..=1.0,
        obs in proptest::collection::vec(((-6.0f64..6.0, -6.0f64..6.0), (-1.5f64..1.5, -1.5f64..1.5), 0.2f64..1.0), 0..5),
        margin in 0.0f64..0.6,
    ) {
        let w = world(obs.iter().enumerate().map(|(i, &(p, v, r))| disc(&format!("o{i}"), p, v, r)).collect());
        let (u, overrode) = safeguarded_blend(u_h, u_r, BlendGains::convex(k, 1.0 - k).unwrap(), &w, margin, V_MAX, DT, STEPS).unwrap();
        // Stopping is the documented last resort; any motion it returns is clear.
        if u != Command::zero() || !overrode {
            prop_assert!(clearance_ref(&w, u) >= margin - 1e-12);
        }
        let statics_clear = obs.iter().all(|&(_, v, _)| v == (0.0, 0.0)) && clearance_ref(&w, Command::zero()) >= margin;
        if statics_clear {
            prop_assert!(clearance_ref(&w, u) >= margin - 1e-12);
        }
    }

    #[test]
    fn generalized_command_is_the_first_step_of_its_hypothesis(seed in 0u64..200) {
        let (op, auto, _) = fork();
        let noisy = |d: MultimodalTrajectoryDistribution<f64>| {
            let mut d = d;
            d.modes.iter_mut().for_each(|m| m.posterior.variance.iter_mut().for_each(|v| *v = Vec2::new(0.05, 0.05)));
            d
        };
        let model = JointModel {
            operator: noisy(op),
            autonomy: noisy(auto),
            environment: vec![],
            params: InteractionParams { safety_strength: 0.5, safety_scale: 1.0, agreement_scale: 0.5, agreement_enabled: true, safety_enabled: false },
        };
        let origin = Vec2::new(0.01, -0.02);
        let (u, hyp) = gsc_step(&model, origin, 20, seed, 100.0).unwrap();
        let expected = (hyp.autonomy_traj.positions[0] - origin) * (1.0 / DT);
        prop_assert!((u.velocity - expected).norm() < 1e-12);
    }
}
