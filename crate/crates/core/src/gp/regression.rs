use super::linalg::Cholesky;
use super::{GpPosterior, HorizonGrid, KernelParams, ModeHypothesis, Observation, ObservationSet};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Scalar;

struct Factored<T> {
    chol: Cholesky<T>,
    alpha_x: Vec<T>,
    alpha_y: Vec<T>,
}

fn factor<T: Scalar>(obs: &ObservationSet<T>, kernel: &KernelParams<T>) -> Result<Option<Factored<T>>> {
    kernel.validate()?;
    if obs.is_empty() {
        return Err(Error::NoObservations);
    }
    obs.validate()?;
    let n = obs.len();
    let s = &obs.samples;
    let mut k = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            k[i * n + j] = kernel.covariance(s[i].time, s[j].time);
        }
        k[i * n + i] = k[i * n + i] + kernel.noise_variance * s[i].noise_scale * s[i].noise_scale;
    }
    let Some(chol) = Cholesky::factor_with_jitter(&k, n, kernel.signal_variance) else {
        return Ok(None);
    };
    let ys_x: Vec<T> = s.iter().map(|o| o.position.x).collect();
    let ys_y: Vec<T> = s.iter().map(|o| o.position.y).collect();
    let alpha_x = chol.solve(&ys_x);
    let alpha_y = chol.solve(&ys_y);
    Ok(Some(Factored { chol, alpha_x, alpha_y }))
}

/// Posterior mean and marginal variance of a zero-mean GP over `grid`.
///
/// Per-sample noise variance is `kernel.noise_variance * noise_scale^2`.
/// Variances are those of the latent path, without observation noise. The
/// grid may interleave with the observation times, which is the case once
/// goal pseudo-observations are appended.
pub fn fit_gp_posterior<T: Scalar>(
    obs: &ObservationSet<T>,
    kernel: &KernelParams<T>,
    grid: &HorizonGrid<T>,
) -> Result<GpPosterior<T>> {
    let f = factor(obs, kernel)?.ok_or(Error::BadKernel("covariance matrix is singular"))?;
    let s = &obs.samples;
    let n = s.len();
    let mut mean = Vec::with_capacity(grid.steps);
    let mut variance = Vec::with_capacity(grid.steps);
    let mut kstar = vec![T::zero(); n];
    for t in grid.times() {
        for (ks, o) in kstar.iter_mut().zip(s) {
            *ks = kernel.covariance(t, o.time);
        }
        let mx: T = kstar.iter().zip(&f.alpha_x).map(|(a, b)| *a * *b).sum();
        let my: T = kstar.iter().zip(&f.alpha_y).map(|(a, b)| *a * *b).sum();
        let mut v = kstar.clone();
        f.chol.forward(&mut v);
        let reduction: T = v.iter().map(|x| *x * *x).sum();
        let var = (kernel.signal_variance - reduction).max(T::zero());
        mean.push(Vec2::new(mx, my));
        variance.push(Vec2::new(var, var));
    }
    Ok(GpPosterior { grid: *grid, mean, variance })
}

/// Log marginal likelihood of the observations, summed over both axes.
///
/// Returns negative infinity when the covariance cannot be factored.
pub fn log_marginal_likelihood<T: Scalar>(obs: &ObservationSet<T>, kernel: &KernelParams<T>) -> Result<T> {
    let Some(f) = factor(obs, kernel)? else {
        return Ok(T::neg_infinity());
    };
    let n = T::of(obs.len() as f64);
    let quad_x: T = obs.samples.iter().zip(&f.alpha_x).map(|(o, a)| o.position.x * *a).sum();
    let quad_y: T = obs.samples.iter().zip(&f.alpha_y).map(|(o, a)| o.position.y * *a).sum();
    let half = T::of(0.5);
    let per_axis_const = half * n * (T::of(2.0) * T::PI()).ln() + f.chol.half_log_det();
    Ok(-half * (quad_x + quad_y) - per_axis_const - per_axis_const)
}

/// Append the hypothesis goal as a pseudo-observation at `horizon_end`.
pub fn condition_on_goal<T: Scalar>(
    obs: &ObservationSet<T>,
    hyp: &ModeHypothesis<T>,
    horizon_end: T,
) -> Result<ObservationSet<T>> {
    condition_on_goal_scaled(obs, hyp, horizon_end, T::one())
}

/// As [`condition_on_goal`] with an explicit noise scale on the goal sample.
pub fn condition_on_goal_scaled<T: Scalar>(
    obs: &ObservationSet<T>,
    hyp: &ModeHypothesis<T>,
    horizon_end: T,
    goal_noise_scale: T,
) -> Result<ObservationSet<T>> {
    if let Some(last) = obs.last_time() {
        if !(horizon_end > last) {
            return Err(Error::GoalInPast { goal: horizon_end.as_f64(), last: last.as_f64() });
        }
    }
    let mut out = obs.clone();
    out.samples.push(Observation { time: horizon_end, position: hyp.goal, noise_scale: goal_noise_scale });
    Ok(out)
}

/// Posterior responsibilities of a hypothesis set.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeWeights<T> {
    pub weights: Vec<T>,
    /// Every likelihood vanished and the priors were returned instead.
    pub degenerate: bool,
}

/// `w_i ∝ prior_i · p(obs, goal_i)`, normalized in log space.
pub fn mode_weights<T: Scalar>(
    obs: &ObservationSet<T>,
    hypotheses: &[ModeHypothesis<T>],
    kernel: &KernelParams<T>,
    horizon_end: T,
) -> Result<ModeWeights<T>> {
    mode_weights_scaled(obs, hypotheses, kernel, horizon_end, T::one())
}

/// As [`mode_weights`] with goals conditioned at `goal_noise_scale`.
pub fn mode_weights_scaled<T: Scalar>(
    obs: &ObservationSet<T>,
    hypotheses: &[ModeHypothesis<T>],
    kernel: &KernelParams<T>,
    horizon_end: T,
    goal_noise_scale: T,
) -> Result<ModeWeights<T>> {
    if hypotheses.is_empty() {
        return Err(Error::NoHypotheses);
    }
    let mut log_w = Vec::with_capacity(hypotheses.len());
    for h in hypotheses {
        let conditioned = condition_on_goal_scaled(obs, h, horizon_end, goal_noise_scale)?;
        let ll = log_marginal_likelihood(&conditioned, kernel)?;
        let lw = h.prior_weight.ln() + ll;
        log_w.push(if lw.is_nan() { T::neg_infinity() } else { lw });
    }
    let max = log_w.iter().copied().fold(T::neg_infinity(), T::max);
    if !max.is_finite() {
        let total: T = hypotheses.iter().map(|h| h.prior_weight.max(T::zero())).sum();
        let weights = if total > T::zero() {
            hypotheses.iter().map(|h| h.prior_weight.max(T::zero()) / total).collect()
        } else {
            vec![T::one() / T::of(hypotheses.len() as f64); hypotheses.len()]
        };
        return Ok(ModeWeights { weights, degenerate: true });
    }
    let exps: Vec<T> = log_w.iter().map(|l| (*l - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    Ok(ModeWeights { weights: exps.into_iter().map(|e| e / total).collect(), degenerate: false })
}
