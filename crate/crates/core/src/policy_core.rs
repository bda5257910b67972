//! Actor-critic MLP with hand-written reverse-mode gradients, a diagonal
//! Gaussian action distribution, and Adam.
//!
//! Parameters live in one flat vector laid out as: trunk layers (weights
//! row-major `out x in`, then biases), actor mean head, state-independent
//! action log-std, critic head. The trunk uses `tanh`; both heads are linear.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
pub const LOG_STD_INIT: f64 = -0.5;
const LN_2PI: f64 = 1.837_877_066_409_345_5;
const CHECKPOINT_MAGIC: &str = "volpo-params 1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproximatorSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub n_assets: usize,
}

impl ApproximatorSpec {
    pub fn new(input_dim: usize, hidden: Vec<usize>, n_assets: usize) -> Result<Self> {
        let spec = Self {
            input_dim,
            hidden,
            n_assets,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.n_assets == 0 || self.hidden.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "all dimensions must be >= 1: {self:?}"
            )));
        }
        Ok(())
    }

    fn layout(&self) -> Layout {
        let mut off = 0;
        let mut trunk = Vec::with_capacity(self.hidden.len());
        let mut fan_in = self.input_dim;
        for &out in &self.hidden {
            trunk.push(Dense::at(&mut off, fan_in, out));
            fan_in = out;
        }
        let actor = Dense::at(&mut off, fan_in, self.n_assets);
        let log_std = off;
        off += self.n_assets;
        let critic = Dense::at(&mut off, fan_in, 1);
        Layout {
            trunk,
            actor,
            log_std,
            critic,
            len: off,
        }
    }

    pub fn param_count(&self) -> usize {
        self.layout().len
    }
}

#[derive(Debug, Clone, Copy)]
struct Dense {
    w: usize,
    b: usize,
    fan_in: usize,
    fan_out: usize,
}

impl Dense {
    fn at(off: &mut usize, fan_in: usize, fan_out: usize) -> Self {
        let d = Self {
            w: *off,
            b: *off + fan_in * fan_out,
            fan_in,
            fan_out,
        };
        *off = d.b + fan_out;
        d
    }

    fn apply(&self, p: &[f64], x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.fan_out {
            let row = &p[self.w + o * self.fan_in..self.w + (o + 1) * self.fan_in];
            let z: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum();
            out.push(z + p[self.b + o]);
        }
    }

    /// Accumulates parameter gradients for upstream `dz`; adds `W^T dz` into `dx`.
    fn backprop(&self, p: &[f64], x: &[f64], dz: &[f64], grad: &mut [f64], dx: &mut [f64]) {
        for (o, &g) in dz.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let base = self.w + o * self.fan_in;
            for i in 0..self.fan_in {
                grad[base + i] += g * x[i];
                dx[i] += g * p[base + i];
            }
            grad[self.b + o] += g;
        }
    }
}

#[derive(Debug, Clone)]
struct Layout {
    trunk: Vec<Dense>,
    actor: Dense,
    log_std: usize,
    critic: Dense,
    len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    pub spec: ApproximatorSpec,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
    pub value: f64,
}

/// Upstream derivatives of a scalar loss with respect to the outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputGrad {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
    pub value: f64,
}

impl OutputGrad {
    pub fn zeros(n: usize) -> Self {
        Self {
            mean: vec![0.0; n],
            log_std: vec![0.0; n],
            value: 0.0,
        }
    }
}

/// Glorot-uniform weights, zero biases, log-std at [`LOG_STD_INIT`].
pub fn init_params(spec: &ApproximatorSpec, seed: u64) -> Result<ParameterVector> {
    spec.validate()?;
    let layout = spec.layout();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; layout.len];
    for d in layout.trunk.iter().chain([&layout.actor, &layout.critic]) {
        let bound = (6.0 / (d.fan_in + d.fan_out) as f64).sqrt();
        for w in &mut values[d.w..d.b] {
            *w = rng.random_range(-bound..bound);
        }
    }
    values[layout.log_std..layout.log_std + spec.n_assets].fill(LOG_STD_INIT);
    Ok(ParameterVector {
        spec: spec.clone(),
        values,
    })
}

impl ParameterVector {
    pub fn zeros(spec: &ApproximatorSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec: spec.clone(),
            values: vec![0.0; spec.param_count()],
        })
    }

    /// Zeroes the actor mean head so the policy mean is exactly 0.
    pub fn zero_actor_head(&mut self) {
        let a = self.spec.layout().actor;
        self.values[a.w..a.b + a.fan_out].fill(0.0);
    }

    /// Critic head weight range, for tests and diagnostics.
    pub fn critic_weights_mut(&mut self) -> &mut [f64] {
        let c = self.spec.layout().critic;
        &mut self.values[c.w..c.b]
    }

    pub fn critic_bias_index(&self) -> usize {
        self.spec.layout().critic.b
    }

    fn check(&self, observation: &[f64]) -> Result<Layout> {
        let layout = self.spec.layout();
        check_dim(layout.len, self.values.len())?;
        check_dim(self.spec.input_dim, observation.len())?;
        if observation.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidData("non-finite observation".into()));
        }
        Ok(layout)
    }

    /// Trunk activations: `acts[0]` is the input, `acts[k]` the k-th hidden output.
    fn trunk(&self, layout: &Layout, observation: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(layout.trunk.len() + 1);
        acts.push(observation.to_vec());
        for d in &layout.trunk {
            let mut z = Vec::with_capacity(d.fan_out);
            d.apply(&self.values, acts.last().expect("input present"), &mut z);
            z.iter_mut().for_each(|v| *v = v.tanh());
            acts.push(z);
        }
        acts
    }

    pub fn forward(&self, observation: &[f64]) -> Result<PolicyOutput> {
        let layout = self.check(observation)?;
        let acts = self.trunk(&layout, observation);
        let h = acts.last().expect("input present");
        let mut mean = Vec::new();
        layout.actor.apply(&self.values, h, &mut mean);
        let mut value = Vec::new();
        layout.critic.apply(&self.values, h, &mut value);
        let log_std = self.values[layout.log_std..layout.log_std + self.spec.n_assets]
            .iter()
            .map(|s| s.clamp(LOG_STD_MIN, LOG_STD_MAX))
            .collect();
        Ok(PolicyOutput {
            mean,
            log_std,
            value: value[0],
        })
    }

    /// Gradient of `sum(up.mean * mean) + sum(up.log_std * log_std) + up.value * value`
    /// with respect to every parameter.
    pub fn backward(&self, observation: &[f64], upstream: &OutputGrad) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.values.len()];
        self.backward_into(observation, upstream, &mut grad)?;
        Ok(grad)
    }

    /// As [`backward`](Self::backward), accumulating into `grad`.
    pub fn backward_into(
        &self,
        observation: &[f64],
        upstream: &OutputGrad,
        grad: &mut [f64],
    ) -> Result<()> {
        let layout = self.check(observation)?;
        let n = self.spec.n_assets;
        check_dim(layout.len, grad.len())?;
        check_dim(n, upstream.mean.len())?;
        check_dim(n, upstream.log_std.len())?;

        for i in 0..n {
            let raw = self.values[layout.log_std + i];
            // clamp passes the gradient only inside its bounds
            if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw) {
                grad[layout.log_std + i] += upstream.log_std[i];
            }
        }

        let acts = self.trunk(&layout, observation);
        let h = acts.last().expect("input present");
        let mut dh = vec![0.0; h.len()];
        layout
            .actor
            .backprop(&self.values, h, &upstream.mean, grad, &mut dh);
        layout
            .critic
            .backprop(&self.values, h, &[upstream.value], grad, &mut dh);

        for (k, d) in layout.trunk.iter().enumerate().rev() {
            let out = &acts[k + 1];
            let dz: Vec<f64> = dh.iter().zip(out).map(|(g, a)| g * (1.0 - a * a)).collect();
            let mut dx = vec![0.0; d.fan_in];
            d.backprop(&self.values, &acts[k], &dz, grad, &mut dx);
            dh = dx;
        }
        Ok(())
    }

    /// Text checkpoint: header with dimensions, then one value per line in
    /// shortest round-trip decimal form.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<checkpoint>", e);
        writeln!(out, "{CHECKPOINT_MAGIC}").map_err(io)?;
        writeln!(out, "input_dim {}", self.spec.input_dim).map_err(io)?;
        let hidden: Vec<String> = self.spec.hidden.iter().map(|h| h.to_string()).collect();
        writeln!(out, "hidden {}", hidden.join(" ").trim_end()).map_err(io)?;
        writeln!(out, "n_assets {}", self.spec.n_assets).map_err(io)?;
        writeln!(out, "count {}", self.values.len()).map_err(io)?;
        for v in &self.values {
            writeln!(out, "{v}").map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn load<R: BufRead>(input: R) -> Result<Self> {
        let bad = |m: &str| Error::InvalidData(format!("checkpoint: {m}"));
        let mut lines = input.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| bad("unexpected end of file"))?
                .map_err(|e| Error::io("<checkpoint>", e))
        };
        if next()?.trim() != CHECKPOINT_MAGIC {
            return Err(bad("missing header"));
        }
        let field = |line: String, key: &str| -> Result<Vec<usize>> {
            let rest = line
                .strip_prefix(key)
                .ok_or_else(|| bad(&format!("expected `{key}`")))?;
            rest.split_whitespace()
                .map(|s| s.parse().map_err(|_| bad(&format!("bad `{key}` value"))))
                .collect()
        };
        let input_dim = field(next()?, "input_dim")?;
        let hidden = field(next()?, "hidden")?;
        let n_assets = field(next()?, "n_assets")?;
        let count = field(next()?, "count")?;
        let (&[input_dim], &[n_assets], &[count]) = (&input_dim[..], &n_assets[..], &count[..])
        else {
            return Err(bad("malformed dimensions"));
        };
        let spec = ApproximatorSpec::new(input_dim, hidden, n_assets)?;
        if spec.param_count() != count {
            return Err(bad("parameter count does not match dimensions"));
        }
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            let line = next()?;
            let v: f64 = line
                .trim()
                .parse()
                .map_err(|_| bad("bad parameter value"))?;
            values.push(v);
        }
        Ok(Self { spec, values })
    }
}

/// Log-density of a diagonal Gaussian at `action`.
pub fn gaussian_log_prob(out: &PolicyOutput, action: &[f64]) -> f64 {
    out.mean
        .iter()
        .zip(&out.log_std)
        .zip(action)
        .map(|((m, s), a)| {
            let z = (a - m) / s.exp();
            -0.5 * LN_2PI - s - 0.5 * z * z
        })
        .sum()
}

/// Differential entropy of the diagonal Gaussian.
pub fn gaussian_entropy(out: &PolicyOutput) -> f64 {
    out.log_std.iter().map(|s| 0.5 + 0.5 * LN_2PI + s).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// One bias-corrected Adam descent step on `params`.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64) -> Result<()> {
    check_dim(params.len(), grads.len())?;
    check_dim(params.len(), state.m.len())?;
    check_dim(params.len(), state.v.len())?;
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numerical("non-finite gradient".into()));
    }
    state.step += 1;
    let bc1 = 1.0 - ADAM_BETA1.powi(state.step as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(state.step as i32);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * g;
        state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
    Ok(())
}
