//! PPO training: rollout collection on the portfolio environment,
//! generalized advantage estimation, and clipped-surrogate updates with Adam.
//!
//! Everything is seeded. Given the same environment and [`PpoConfig`], a
//! training run reproduces the same parameters bit for bit.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::metrics;
use crate::policy_core::{
    adam_step, gaussian_entropy, gaussian_log_prob, init_params, AdamState, ApproximatorSpec,
    OutputGrad, ParameterVector,
};
use crate::portfolio_env::{
    action_to_weights, run_episode, ActionVector, EnvState, EpisodeLedger, PortfolioEnv, WeightRule,
};

/// Bound on `|log pi_new - log pi_old|` before exponentiating.
pub const LOG_RATIO_CLAMP: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PpoConfig {
    pub gamma: f64,
    pub lambda: f64,
    pub clip_eps: f64,
    pub epochs_per_update: usize,
    pub minibatch_size: usize,
    pub learning_rate: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub rollout_length: usize,
    pub total_updates: usize,
    pub seed: u64,
    pub normalize_advantages: bool,
    /// Global gradient-norm clip; 0 disables.
    pub max_grad_norm: f64,
    pub hidden: Vec<usize>,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lambda: 0.95,
            clip_eps: 0.2,
            epochs_per_update: 10,
            minibatch_size: 64,
            learning_rate: 3e-4,
            entropy_coef: 0.0,
            value_coef: 0.5,
            rollout_length: 256,
            total_updates: 50,
            seed: 0,
            normalize_advantages: true,
            max_grad_norm: 0.5,
            hidden: vec![64, 64],
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.gamma) || !unit(self.lambda) {
            return Err(Error::InvalidParameter(
                "gamma and lambda must lie in [0, 1]".into(),
            ));
        }
        if !(self.clip_eps > 0.0) {
            return Err(Error::InvalidParameter("clip_eps must be > 0".into()));
        }
        if self.rollout_length == 0 || self.minibatch_size == 0 || self.epochs_per_update == 0 {
            return Err(Error::InvalidParameter(
                "rollout length, minibatch size and epochs must be >= 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0) || !(self.max_grad_norm >= 0.0) {
            return Err(Error::InvalidParameter(
                "learning rate must be > 0, grad clip >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryBatch {
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    /// Log-probability of each action under the policy that sampled it.
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    /// True where the step ended an episode (the next state is a reset).
    pub dones: Vec<bool>,
    /// Critic value of the state after the last step (0 if it was terminal).
    pub last_value: f64,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl TrajectoryBatch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// GAE over a single uninterrupted trajectory, bootstrapped with `last_value`.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    gae_with_dones(
        rewards,
        values,
        &vec![false; rewards.len()],
        last_value,
        gamma,
        lambda,
    )
}

/// GAE where `dones[t]` cuts the recursion: step `t` bootstraps with zero
/// and does not see advantages from after the reset.
pub fn gae_with_dones(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(rewards.len(), values.len())?;
    check_dim(rewards.len(), dones.len())?;
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = last_value;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}

/// Rescales to zero mean and unit population standard deviation. A constant
/// vector is only centered.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.len() < 2 {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let std = (adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
    for a in adv.iter_mut() {
        *a -= mean;
        if std > 0.0 {
            *a /= std;
        }
    }
}

/// One sample's clipped objective term, `min(rho * A, clip(rho) * A)`.
pub fn clipped_term(ratio: f64, advantage: f64, clip_eps: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps) * advantage)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateOutput {
    /// `-surrogate + value_coef * value_loss - entropy_coef * entropy`.
    pub loss: f64,
    /// Mean clipped objective.
    pub surrogate: f64,
    pub value_loss: f64,
    pub entropy: f64,
    /// Share of samples with `|rho - 1| > clip_eps`.
    pub clip_fraction: f64,
    pub grads: Vec<f64>,
}

/// Loss and parameter gradient over the samples `indices` of `batch`.
pub fn clipped_surrogate(
    batch: &TrajectoryBatch,
    indices: &[usize],
    params: &ParameterVector,
    cfg: &PpoConfig,
) -> Result<SurrogateOutput> {
    if indices.is_empty() {
        return Err(Error::InvalidParameter("empty minibatch".into()));
    }
    check_dim(batch.len(), batch.advantages.len())?;
    check_dim(batch.len(), batch.returns.len())?;
    let b = indices.len() as f64;
    let n = params.spec.n_assets;
    let mut grads = vec![0.0; params.values.len()];
    let (mut surrogate, mut value_loss, mut entropy, mut clipped) = (0.0, 0.0, 0.0, 0usize);

    for &k in indices {
        let obs = &batch.observations[k];
        let action = &batch.actions[k];
        let adv = batch.advantages[k];
        let out = params.forward(obs)?;
        let logp = gaussian_log_prob(&out, action);
        let raw_log_ratio = logp - batch.log_probs[k];
        let log_ratio = raw_log_ratio.clamp(-LOG_RATIO_CLAMP, LOG_RATIO_CLAMP);
        let ratio = log_ratio.exp();
        let unclipped = ratio * adv;
        let term = clipped_term(ratio, adv, cfg.clip_eps);
        if (ratio - 1.0).abs() > cfg.clip_eps {
            clipped += 1;
        }
        surrogate += term;
        let v_err = out.value - batch.returns[k];
        value_loss += v_err * v_err;
        entropy += gaussian_entropy(&out);

        // d(-term/B)/d logp is -rho*A/B when the unclipped branch is active
        let d_logp = if unclipped <= term && raw_log_ratio == log_ratio {
            -unclipped / b
        } else {
            0.0
        };
        let mut up = OutputGrad::zeros(n);
        for i in 0..n {
            let inv_var = (-2.0 * out.log_std[i]).exp();
            let diff = action[i] - out.mean[i];
            up.mean[i] = d_logp * diff * inv_var;
            up.log_std[i] = d_logp * (diff * diff * inv_var - 1.0) - cfg.entropy_coef / b;
        }
        up.value = cfg.value_coef * 2.0 * v_err / b;
        params.backward_into(obs, &up, &mut grads)?;
    }

    let (surrogate, value_loss, entropy) = (surrogate / b, value_loss / b, entropy / b);
    let loss = -surrogate + cfg.value_coef * value_loss - cfg.entropy_coef * entropy;
    if !loss.is_finite() {
        return Err(Error::Numerical("PPO loss is not finite".into()));
    }
    Ok(SurrogateOutput {
        loss,
        surrogate,
        value_loss,
        entropy,
        clip_fraction: clipped as f64 / b,
        grads,
    })
}

/// Steps the environment over a fixed window, restarting at the window start
/// whenever the episode ends.
pub struct Rollout<'e, 'a> {
    env: &'e PortfolioEnv<'a>,
    start: usize,
    end: usize,
    state: EnvState,
}

impl<'e, 'a> Rollout<'e, 'a> {
    pub fn new(env: &'e PortfolioEnv<'a>, start: usize, end: usize) -> Result<Self> {
        let state = env.reset(start, end)?;
        Ok(Self {
            env,
            start,
            end,
            state,
        })
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    /// Samples `length` transitions from the Gaussian policy.
    pub fn collect<R: Rng>(
        &mut self,
        params: &ParameterVector,
        length: usize,
        rng: &mut R,
    ) -> Result<TrajectoryBatch> {
        let mut batch = TrajectoryBatch::default();
        for _ in 0..length {
            let out = params.forward(&self.state.observation)?;
            let action: Vec<f64> = out
                .mean
                .iter()
                .zip(&out.log_std)
                .map(|(m, s)| {
                    let z: f64 = StandardNormal.sample(rng);
                    m + s.exp() * z
                })
                .collect();
            let log_prob = gaussian_log_prob(&out, &action);
            let step = self.env.step(&self.state, &ActionVector(action.clone()))?;
            batch
                .observations
                .push(std::mem::take(&mut self.state.observation));
            batch.actions.push(action);
            batch.log_probs.push(log_prob);
            batch.rewards.push(step.reward);
            batch.values.push(out.value);
            batch.dones.push(step.done);
            self.state = if step.done {
                self.env.reset(self.start, self.end)?
            } else {
                step.next
            };
        }
        batch.last_value = if batch.dones.last().copied().unwrap_or(false) {
            0.0
        } else {
            params.forward(&self.state.observation)?.value
        };
        Ok(batch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub update: usize,
    pub mean_reward: f64,
    pub surrogate: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub updates: Vec<UpdateStats>,
    pub wall_clock_secs: f64,
    pub seed: u64,
}

fn clip_grad_norm(grads: &mut [f64], max_norm: f64) {
    if max_norm <= 0.0 {
        return;
    }
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= s);
    }
}

/// Trains a fresh policy on days `start ..= end` of `env`.
pub fn train(
    env: &PortfolioEnv<'_>,
    start: usize,
    end: usize,
    cfg: &PpoConfig,
) -> Result<(ParameterVector, TrainReport)> {
    cfg.validate()?;
    if end < start + cfg.rollout_length.min(2) {
        return Err(Error::InsufficientData("training window too short".into()));
    }
    let clock = Instant::now();
    let spec = ApproximatorSpec::new(env.observation_dim(), cfg.hidden.clone(), env.n_assets())?;
    let mut params = init_params(&spec, cfg.seed)?;
    let mut adam = AdamState::new(params.values.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut rollout = Rollout::new(env, start, end)?;
    let mut updates = Vec::with_capacity(cfg.total_updates);

    for update in 0..cfg.total_updates {
        let mut batch = rollout.collect(&params, cfg.rollout_length, &mut rng)?;
        let (mut adv, ret) = gae_with_dones(
            &batch.rewards,
            &batch.values,
            &batch.dones,
            batch.last_value,
            cfg.gamma,
            cfg.lambda,
        )?;
        if cfg.normalize_advantages {
            normalize_advantages(&mut adv);
        }
        batch.advantages = adv;
        batch.returns = ret;

        let mut order: Vec<usize> = (0..batch.len()).collect();
        let (mut sur, mut vl, mut ent, mut cf, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..cfg.epochs_per_update {
            order.shuffle(&mut rng);
            for chunk in order.chunks(cfg.minibatch_size) {
                let mut out = clipped_surrogate(&batch, chunk, &params, cfg)?;
                clip_grad_norm(&mut out.grads, cfg.max_grad_norm);
                adam_step(&mut params.values, &out.grads, &mut adam, cfg.learning_rate)?;
                sur += out.surrogate;
                vl += out.value_loss;
                ent += out.entropy;
                cf += out.clip_fraction;
                count += 1.0;
            }
        }
        updates.push(UpdateStats {
            update,
            mean_reward: batch.rewards.iter().sum::<f64>() / batch.len() as f64,
            surrogate: sur / count,
            value_loss: vl / count,
            entropy: ent / count,
            clip_fraction: cf / count,
        });
    }

    Ok((
        params,
        TrainReport {
            updates,
            wall_clock_secs: clock.elapsed().as_secs_f64(),
            seed: cfg.seed,
        },
    ))
}

/// Deterministic policy: trades into the softmax of the action mean.
pub struct PolicyRule<'p> {
    pub params: &'p ParameterVector,
}

impl WeightRule for PolicyRule<'_> {
    fn target_weights(&mut self, _env: &PortfolioEnv<'_>, state: &EnvState) -> Result<Vec<f64>> {
        let out = self.params.forward(&state.observation)?;
        action_to_weights(&ActionVector(out.mean))
    }
}

/// Out-of-sample run over days `start ..= end` using the action mean.
pub fn evaluate(
    params: &ParameterVector,
    env: &PortfolioEnv<'_>,
    start: usize,
    end: usize,
) -> Result<EpisodeLedger> {
    check_dim(env.observation_dim(), params.spec.input_dim)?;
    check_dim(env.n_assets(), params.spec.n_assets)?;
    if end <= start {
        return Err(Error::InvalidParameter("evaluation window is empty".into()));
    }
    run_episode(env, &mut PolicyRule { params }, start, end)
}

/// Seeded random search over learning rate, clip range and rollout length.
/// Each trial trains on `start ..= end` and is scored by the in-sample
/// Sharpe ratio of its deterministic policy; the best trial's config wins.
pub fn random_search(
    env: &PortfolioEnv<'_>,
    start: usize,
    end: usize,
    base: &PpoConfig,
    trials: usize,
    seed: u64,
) -> Result<(PpoConfig, f64)> {
    if trials == 0 {
        return Err(Error::InvalidParameter(
            "random search needs at least one trial".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(PpoConfig, f64)> = None;
    for _ in 0..trials {
        let cfg = PpoConfig {
            learning_rate: 10f64.powf(rng.random_range(-4.0..-2.5)),
            clip_eps: rng.random_range(0.1..0.3),
            rollout_length: [128, 256, 512][rng.random_range(0..3)],
            ..base.clone()
        };
        let (params, _) = train(env, start, end, &cfg)?;
        let ledger = evaluate(&params, env, start, end)?;
        let score = metrics::sharpe(&ledger.net_returns, 0.0)?.unwrap_or(f64::NEG_INFINITY);
        if best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((cfg, score));
        }
    }
    Ok(best.expect("at least one trial"))
}
