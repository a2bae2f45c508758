//! Reference implementations written independently of the library code:
//! textbook formulas, dense linear algebra and direct (non-log) evaluation.
//! Shared by the integration tests and the acceptance report.

#![allow(dead_code)]

use std::collections::BTreeMap;

use gsc_core::geom::Vec2;
use gsc_core::gp::{HorizonGrid, KernelParams, MultimodalTrajectoryDistribution, ObservationSet, TrajectorySample};
use gsc_core::joint::{InteractionParams, JointModel};
use gsc_core::{ScenarioSpec, Trace};
use nalgebra::{DMatrix, DVector};

fn se(k: &KernelParams<f64>, a: f64, b: f64) -> f64 {
    k.signal_variance * (-0.5 * ((a - b) / k.length_scale).powi(2)).exp()
}

fn noisy_gram(obs: &ObservationSet<f64>, k: &KernelParams<f64>) -> DMatrix<f64> {
    let s = &obs.samples;
    DMatrix::from_fn(s.len(), s.len(), |i, j| {
        let noise = if i == j { k.noise_variance * s[i].noise_scale.powi(2) } else { 0.0 };
        se(k, s[i].time, s[j].time) + noise
    })
}

/// Posterior mean and latent variance per grid point: `m = K*ᵀ K⁻¹ y`,
/// `v = k** − K*ᵀ K⁻¹ K*`, solved with a dense LU factorization.
pub fn dense_gp(
    obs: &ObservationSet<f64>,
    k: &KernelParams<f64>,
    grid: &HorizonGrid<f64>,
) -> (Vec<Vec2<f64>>, Vec<f64>) {
    let gram = noisy_gram(obs, k);
    let lu = gram.lu();
    let s = &obs.samples;
    let yx = DVector::from_iterator(s.len(), s.iter().map(|o| o.position.x));
    let yy = DVector::from_iterator(s.len(), s.iter().map(|o| o.position.y));
    let ax = lu.solve(&yx).unwrap();
    let ay = lu.solve(&yy).unwrap();
    let mut means = Vec::new();
    let mut vars = Vec::new();
    for j in 0..grid.steps {
        let t = grid.start + grid.dt * j as f64;
        let ks = DVector::from_iterator(s.len(), s.iter().map(|o| se(k, t, o.time)));
        means.push(Vec2::new(ks.dot(&ax), ks.dot(&ay)));
        let w = lu.solve(&ks).unwrap();
        vars.push(k.signal_variance - ks.dot(&w));
    }
    (means, vars)
}

/// `log N(y; 0, K)` summed over both axes, via the LU determinant.
pub fn dense_log_marginal(obs: &ObservationSet<f64>, k: &KernelParams<f64>) -> f64 {
    let gram = noisy_gram(obs, k);
    let n = obs.len() as f64;
    let det = gram.determinant();
    let inv = gram.try_inverse().unwrap();
    let mut total = 0.0;
    for axis in 0..2 {
        let y = DVector::from_iterator(
            obs.len(),
            obs.samples.iter().map(|o| if axis == 0 { o.position.x } else { o.position.y }),
        );
        let quad = (y.transpose() * &inv * &y)[(0, 0)];
        total += -0.5 * quad - 0.5 * det.ln() - 0.5 * n * (2.0 * std::f64::consts::PI).ln();
    }
    total
}

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// `Σ_k w_k Π_t N(x_t) N(y_t)` evaluated as plain products. Only meaningful
/// where the result is representable as an `f64`.
pub fn direct_mixture_density(dist: &MultimodalTrajectoryDistribution<f64>, traj: &TrajectorySample<f64>) -> f64 {
    let mut total = 0.0;
    for m in &dist.modes {
        let mut p = m.weight;
        for ((x, mean), var) in traj.positions.iter().zip(&m.posterior.mean).zip(&m.posterior.variance) {
            p *= normal_pdf(x.x, mean.x, var.x) * normal_pdf(x.y, mean.y, var.y);
        }
        total += p;
    }
    total
}

/// Log-density by direct per-mode summation with an explicit log-sum-exp.
pub fn mixture_log_density_ref(dist: &MultimodalTrajectoryDistribution<f64>, traj: &TrajectorySample<f64>) -> f64 {
    let terms: Vec<f64> = dist
        .modes
        .iter()
        .filter(|m| m.weight > 0.0)
        .map(|m| {
            let mut l = m.weight.ln();
            for ((x, mean), var) in traj.positions.iter().zip(&m.posterior.mean).zip(&m.posterior.variance) {
                let (vx, vy) = (var.x.max(1e-12), var.y.max(1e-12));
                l += normal_pdf(x.x, mean.x, vx).ln() + normal_pdf(x.y, mean.y, vy).ln();
            }
            l
        })
        .collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

pub fn safety_ref(robot: &TrajectorySample<f64>, obstacles: &[TrajectorySample<f64>], alpha: f64, h: f64) -> f64 {
    let mut total = 0.0;
    for t in 0..robot.positions.len() {
        for o in obstacles {
            let dx = robot.positions[t].x - o.positions[t].x;
            let dy = robot.positions[t].y - o.positions[t].y;
            let f = 1.0 - alpha * (-(dx * dx + dy * dy) / (2.0 * h * h)).exp();
            total += f.max(1e-300).ln();
        }
    }
    total
}

pub fn agreement_ref(robot: &TrajectorySample<f64>, operator: &TrajectorySample<f64>, h: f64) -> f64 {
    let mut total = 0.0;
    for t in 0..robot.positions.len() {
        let dx = robot.positions[t].x - operator.positions[t].x;
        let dy = robot.positions[t].y - operator.positions[t].y;
        total -= (dx * dx + dy * dy) / (2.0 * h * h);
    }
    total
}

/// The joint score recomputed term by term from the reference pieces.
pub fn joint_score_ref(
    model: &JointModel<f64>,
    operator: &TrajectorySample<f64>,
    autonomy: &TrajectorySample<f64>,
    environment: &[TrajectorySample<f64>],
) -> f64 {
    let p: &InteractionParams<f64> = &model.params;
    let mut s = mixture_log_density_ref(&model.operator, operator) + mixture_log_density_ref(&model.autonomy, autonomy);
    for (d, t) in model.environment.iter().zip(environment) {
        s += mixture_log_density_ref(d, t);
    }
    if p.safety_enabled {
        s += safety_ref(autonomy, environment, p.safety_strength, p.safety_scale);
    }
    if p.agreement_enabled {
        s += agreement_ref(autonomy, operator, p.agreement_scale);
    }
    s
}

/// Metrics recomputed in one pass over the records.
#[derive(Debug)]
pub struct RefMetrics {
    pub min_clearance: f64,
    pub path_length: f64,
    pub steps_to_goal: Option<u64>,
    pub agreement_rms: f64,
    pub region_hits: BTreeMap<String, bool>,
    pub max_accel: f64,
}

fn intent_at(spec: &ScenarioSpec, step: u64) -> Vec2<f64> {
    // Piecewise-linear in time through (0, start) and the waypoints.
    let mut knots = vec![(0u64, spec.world.robot.position)];
    knots.extend(spec.operator_script.waypoints.iter().map(|w| (w.step, w.position)));
    for pair in knots.windows(2) {
        let ((s0, p0), (s1, p1)) = (pair[0], pair[1]);
        if step <= s1 {
            if s1 == s0 {
                return p1;
            }
            let f = (step - s0) as f64 / (s1 - s0) as f64;
            return Vec2::new(p0.x + (p1.x - p0.x) * f, p0.y + (p1.y - p0.y) * f);
        }
    }
    knots.last().unwrap().1
}

pub fn reference_metrics(trace: &Trace, spec: &ScenarioSpec) -> RefMetrics {
    let mut m = RefMetrics {
        min_clearance: f64::INFINITY,
        path_length: 0.0,
        steps_to_goal: None,
        agreement_rms: 0.0,
        region_hits: spec.world.regions.iter().map(|r| (r.name.clone(), false)).collect(),
        max_accel: 0.0,
    };
    let mut sq = 0.0;
    let mut prev_pos: Option<Vec2<f64>> = None;
    let mut prev_cmd: Option<Vec2<f64>> = None;
    for r in &trace.records {
        if let Some(c) = r.clearance {
            m.min_clearance = m.min_clearance.min(c);
        }
        if let Some(p) = prev_pos {
            m.path_length += ((r.robot.x - p.x).powi(2) + (r.robot.y - p.y).powi(2)).sqrt();
        }
        prev_pos = Some(r.robot);
        let g = spec.world.goal;
        if m.steps_to_goal.is_none()
            && ((r.robot.x - g.x).powi(2) + (r.robot.y - g.y).powi(2)).sqrt() <= spec.goal_radius
        {
            m.steps_to_goal = Some(r.step);
        }
        let i = intent_at(spec, r.step);
        sq += (r.robot.x - i.x).powi(2) + (r.robot.y - i.y).powi(2);
        for reg in &spec.world.regions {
            let (lo, hi) = (reg.rect.min, reg.rect.max);
            if r.robot.x >= lo.x && r.robot.x <= hi.x && r.robot.y >= lo.y && r.robot.y <= hi.y {
                m.region_hits.insert(reg.name.clone(), true);
            }
        }
        if let Some(u) = r.u_s {
            if let Some(p) = prev_cmd {
                let a = ((u.velocity.x - p.x).powi(2) + (u.velocity.y - p.y).powi(2)).sqrt() / spec.dt;
                m.max_accel = m.max_accel.max(a);
            }
            prev_cmd = Some(u.velocity);
        }
    }
    if !trace.records.is_empty() {
        m.agreement_rms = (sq / trace.records.len() as f64).sqrt();
    }
    m
}

/// Per-step optimum of `N(h; m_h, s_h) N(r; m_r, s_r) exp(−(r−h)²/2a²)` over
/// `r` on one axis: the precision-weighted mean of `m_r` and `m_h`, the
/// latter widened by the agreement scale.
pub fn precision_weighted_map(m_h: f64, var_h: f64, m_r: f64, var_r: f64, agreement_scale: f64) -> f64 {
    let p_r = 1.0 / var_r;
    let p_h = 1.0 / (var_h + agreement_scale * agreement_scale);
    (p_r * m_r + p_h * m_h) / (p_r + p_h)
}

/// Brute-force maximizer of the same one-axis objective over the lattice
/// `lo + i·step`, returning the robot coordinate of the best cell.
pub fn grid_map(m_h: f64, var_h: f64, m_r: f64, var_r: f64, agreement_scale: f64, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = (f64::NEG_INFINITY, lo);
    for i in 0..=n {
        let h = lo + step * i as f64;
        for j in 0..=n {
            let r = lo + step * j as f64;
            let s = -(h - m_h).powi(2) / (2.0 * var_h)
                - (r - m_r).powi(2) / (2.0 * var_r)
                - (r - h).powi(2) / (2.0 * agreement_scale * agreement_scale);
            if s > best.0 {
                best = (s, r);
            }
        }
    }
    best.1
}
