//! Agents: critics, the solver-backed beamforming actor, network actors,
//! and their DDPG updates.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hnet::{hnet_forward, HNetParams};
use crate::linalg::{C64, ComplexMatrix};
use crate::nn::{adam_step_slice, AdamSlice, AdamState, Mode, Network, Tensor};
use crate::rates::{BeamformingSolution, Topology};
use crate::scenario::{ChannelSet, SystemConstants};

use super::replay::{ReplayBuffer, Transition};
use super::RlError;

/// Clamp ranges keeping the solver parameters inside their admissible open
/// intervals during training.
const DAMPING_RANGE: (f64, f64) = (0.05, 1.0);
const SPLIT_RANGE: (f64, f64) = (0.02, 0.98);

/// Step used for central differences through the solver's scalar parameters.
const SOLVER_FD_STEP: f64 = 1e-3;

/// Perturbation radius of the simultaneous-perturbation estimate through the
/// eigenvector subnet.
const SPSA_STEP: f64 = 1e-3;

// ── critics ────────────────────────────────────────────────────────────────

/// State-action value network: a state trunk (empty = identity) whose
/// flattened output is concatenated with the action and fed to a dense head.
#[derive(Debug, Clone)]
pub struct Critic {
    pub trunk: Network,
    pub head: Network,
}

/// Adam state for both critic parts.
#[derive(Debug, Clone)]
pub struct CriticOpt {
    trunk: AdamState,
    head: AdamState,
}

impl Critic {
    pub fn opt(&self) -> CriticOpt {
        CriticOpt {
            trunk: AdamState::for_network(&self.trunk),
            head: AdamState::for_network(&self.head),
        }
    }

    /// Q values for a batch: `states` shaped for the trunk, `actions` flat
    /// rows. Returns per-sample Q plus the caches needed for backward.
    fn forward(
        &mut self,
        states: &Tensor,
        actions: &[Vec<f64>],
        mode: Mode,
    ) -> Result<(Vec<f64>, CriticCache), RlError> {
        let (z, trunk_cache) = self.trunk.forward(states, mode)?;
        let b = z.batch();
        let zdim: usize = z.numel() / b;
        let adim = actions.first().map_or(0, Vec::len);
        let mut joined = Vec::with_capacity(b * (zdim + adim));
        for (i, a) in actions.iter().enumerate() {
            joined.extend_from_slice(&z.data()[i * zdim..(i + 1) * zdim]);
            joined.extend_from_slice(a);
        }
        let head_in = Tensor::new(&[b, zdim + adim], joined);
        let (q, head_cache) = self.head.forward(&head_in, mode)?;
        Ok((
            q.data().to_vec(),
            CriticCache {
                trunk: trunk_cache,
                head: head_cache,
                zdim,
                adim,
                batch: b,
            },
        ))
    }

    /// Q values without caches or running-stat updates.
    pub fn value(&self, states: &Tensor, actions: &[Vec<f64>]) -> Result<Vec<f64>, RlError> {
        let z = self.trunk.infer(states)?;
        let b = z.batch();
        let zdim: usize = z.numel() / b;
        let adim = actions.first().map_or(0, Vec::len);
        let mut joined = Vec::with_capacity(b * (zdim + adim));
        for (i, a) in actions.iter().enumerate() {
            joined.extend_from_slice(&z.data()[i * zdim..(i + 1) * zdim]);
            joined.extend_from_slice(a);
        }
        let q = self.head.infer(&Tensor::new(&[b, zdim + adim], joined))?;
        Ok(q.data().to_vec())
    }

    /// Backward from per-sample dL/dQ; applies one Adam step and returns the
    /// gradient with respect to the actions.
    fn backward_step(
        &mut self,
        cache: &CriticCache,
        dq: &[f64],
        opt: &mut CriticOpt,
        lr: f64,
    ) -> Result<Vec<Vec<f64>>, RlError> {
        let upstream = Tensor::new(&[cache.batch, 1], dq.to_vec());
        let (head_grads, head_in_grad) = self.head.backward(&cache.head, &upstream)?;
        // Split the head input gradient into trunk and action parts.
        let mut dz = Vec::with_capacity(cache.batch * cache.zdim);
        let mut da = Vec::with_capacity(cache.batch);
        let row = cache.zdim + cache.adim;
        for i in 0..cache.batch {
            let r = &head_in_grad.data()[i * row..(i + 1) * row];
            dz.extend_from_slice(&r[..cache.zdim]);
            da.push(r[cache.zdim..].to_vec());
        }
        opt.head.step(&mut self.head, &head_grads, lr);
        if !self.trunk.layers.is_empty() {
            // The trunk ends in a flatten (or is dense), so its output is
            // [batch, zdim] and the split gradient reshapes directly.
            let dz_t = Tensor::new(&[cache.batch, cache.zdim], dz);
            let (trunk_grads, _) = self.trunk.backward(&cache.trunk, &dz_t)?;
            opt.trunk.step(&mut self.trunk, &trunk_grads, lr);
        }
        Ok(da)
    }

    /// Gradient of mean Q with respect to the actions only (parameters
    /// untouched); used by actor updates.
    fn action_gradient(
        &mut self,
        states: &Tensor,
        actions: &[Vec<f64>],
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>), RlError> {
        let (q, cache) = self.forward(states, actions, Mode::Train)?;
        let b = cache.batch as f64;
        let dq: Vec<f64> = vec![1.0 / b; cache.batch];
        let upstream = Tensor::new(&[cache.batch, 1], dq);
        let (_, head_in_grad) = self.head.backward(&cache.head, &upstream)?;
        let row = cache.zdim + cache.adim;
        let mut da = Vec::with_capacity(cache.batch);
        for i in 0..cache.batch {
            let r = &head_in_grad.data()[i * row..(i + 1) * row];
            da.push(r[cache.zdim..].to_vec());
        }
        Ok((q, da))
    }
}

#[derive(Debug)]
struct CriticCache {
    trunk: crate::nn::NetCache,
    head: crate::nn::NetCache,
    zdim: usize,
    adim: usize,
    batch: usize,
}

// ── flattening helpers ─────────────────────────────────────────────────────

/// Flatten a beamforming solution into the critic's action vector: re/im of
/// every common beam entry, then every private beam, then the allocations.
pub fn flatten_solution(sol: &BeamformingSolution) -> Vec<f64> {
    let mut out = Vec::new();
    for w in sol.common.iter().chain(sol.private.iter()) {
        for z in w.entries() {
            out.push(z.re);
            out.push(z.im);
        }
    }
    out.extend_from_slice(&sol.common_alloc);
    out
}

/// Rebuild the channel set from a flattened beamforming state (the state is
/// the full CSI, so the reconstruction is exact).
pub fn state_to_channels(state: &[f64], constants: &SystemConstants) -> ChannelSet {
    let n = constants.rx_antennas;
    let m = constants.tx_antennas;
    let per = n * m;
    let mut idx = 0;
    let mut take = |count: usize| -> Vec<ComplexMatrix> {
        (0..count)
            .map(|_| {
                let data: Vec<C64> = (0..per)
                    .map(|_| {
                        let z = C64::new(state[idx], state[idx + 1]);
                        idx += 2;
                        z
                    })
                    .collect();
                ComplexMatrix::new(n, m, data).expect("state entries are finite")
            })
            .collect()
    };
    let user: Vec<Vec<ComplexMatrix>> = (0..constants.num_uavs)
        .map(|_| take(constants.num_users))
        .collect();
    let eave: Vec<Vec<ComplexMatrix>> = (0..constants.num_uavs)
        .map(|_| take(constants.num_eaves))
        .collect();
    ChannelSet { user, eave }
}

// ── solver-backed beamforming agent ────────────────────────────────────────

/// Beamforming agent: the unfolded solver as actor (damping, power split,
/// optional subnet learnable) plus a dense critic with target copies.
#[derive(Debug, Clone)]
pub struct HnetAgent {
    pub params: HNetParams,
    pub target_params: HNetParams,
    pub critic: Critic,
    pub target_critic: Critic,
    pub critic_opt: CriticOpt,
    pub scalar_opt: AdamSlice,
    pub enn_opt: Option<AdamState>,
    pub buffer: ReplayBuffer,
    /// Samples drawn from each batch for the derivative estimates through
    /// the solver.
    pub fd_samples: usize,
}

impl HnetAgent {
    pub fn new(params: HNetParams, critic: Critic, capacity: usize, fd_samples: usize) -> Self {
        let critic_opt = critic.opt();
        let scalar_opt = AdamSlice::new(2 * params.num_blocks);
        let enn_opt = params.enn.as_ref().map(AdamState::for_network);
        Self {
            target_params: params.clone(),
            params,
            target_critic: critic.clone(),
            critic,
            critic_opt,
            scalar_opt,
            enn_opt,
            buffer: ReplayBuffer::new(capacity),
            fd_samples,
        }
    }

    /// Greedy action at the given channels.
    pub fn act(
        &self,
        channels: &ChannelSet,
        topo: &Topology,
        constants: &SystemConstants,
    ) -> Result<BeamformingSolution, RlError> {
        Ok(hnet_forward(channels, &self.params, topo, constants)?)
    }

    /// Exploration action: Gaussian noise on the solver's scalar parameters
    /// (clamped into their admissible ranges), so the emitted solution stays
    /// feasible by construction.
    pub fn act_explore(
        &self,
        channels: &ChannelSet,
        topo: &Topology,
        constants: &SystemConstants,
        sigma: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<BeamformingSolution, RlError> {
        let mut params = self.params.clone();
        for b in params.damping.iter_mut() {
            let noise: f64 = rng.sample(rand_distr::StandardNormal);
            *b = (*b + sigma * noise).clamp(DAMPING_RANGE.0, DAMPING_RANGE.1);
        }
        for a in params.power_split.iter_mut() {
            let noise: f64 = rng.sample(rand_distr::StandardNormal);
            *a = (*a + sigma * noise).clamp(SPLIT_RANGE.0, SPLIT_RANGE.1);
        }
        Ok(hnet_forward(channels, &params, topo, constants)?)
    }

    /// One DDPG update: critic regression toward the soft target, then an
    /// ascent step on the solver parameters using derivative estimates of
    /// the critic value through the solver (central differences for the
    /// scalar knobs, simultaneous perturbation for the subnet weights), then
    /// soft target updates. Returns (critic loss, actor objective).
    #[allow(clippy::too_many_arguments)]
    pub fn update(
        &mut self,
        batch_size: usize,
        gamma: f64,
        tau: f64,
        lr: f64,
        topo: &Topology,
        constants: &SystemConstants,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, f64), RlError> {
        let batch: Vec<Transition> = self
            .buffer
            .sample(batch_size, rng)?
            .into_iter()
            .cloned()
            .collect();

        // Critic targets through the target actor and target critic.
        let mut targets = Vec::with_capacity(batch.len());
        for t in &batch {
            let y = if t.done {
                t.reward
            } else {
                let channels = state_to_channels(&t.next_state, constants);
                let next_action =
                    hnet_forward(&channels, &self.target_params, topo, constants)?;
                let next_q = self.target_critic.value(
                    &Tensor::new(&[1, t.next_state.len()], t.next_state.clone()),
                    &[flatten_solution(&next_action)],
                )?[0];
                t.reward + gamma * next_q
            };
            targets.push(y);
        }

        let state_dim = batch[0].state.len();
        let mut state_rows = Vec::with_capacity(batch.len() * state_dim);
        for t in &batch {
            state_rows.extend_from_slice(&t.state);
        }
        let states = Tensor::new(&[batch.len(), state_dim], state_rows);
        let actions: Vec<Vec<f64>> = batch.iter().map(|t| t.action.clone()).collect();
        let (q, cache) = self.critic.forward(&states, &actions, Mode::Train)?;
        let n = batch.len() as f64;
        let mut critic_loss = 0.0;
        let mut dq = Vec::with_capacity(batch.len());
        for (qi, yi) in q.iter().zip(targets.iter()) {
            let diff = qi - yi;
            critic_loss += diff * diff / n;
            dq.push(2.0 * diff / n);
        }
        self.critic
            .backward_step(&cache, &dq, &mut self.critic_opt, lr)?;

        // Actor ascent on a subsample, by derivative estimation through the
        // solver chain into the critic.
        let fd = self.fd_samples.min(batch.len()).max(1);
        let sub = &batch[..fd];
        let channel_cache: Vec<ChannelSet> = sub
            .iter()
            .map(|t| state_to_channels(&t.state, constants))
            .collect();

        let objective = |params: &HNetParams,
                         critic: &Critic|
         -> Result<f64, RlError> {
            let mut acc = 0.0;
            for (t, ch) in sub.iter().zip(channel_cache.iter()) {
                let a = hnet_forward(ch, params, topo, constants)?;
                let qv = critic.value(
                    &Tensor::new(&[1, t.state.len()], t.state.clone()),
                    &[flatten_solution(&a)],
                )?[0];
                acc += qv;
            }
            Ok(acc / fd as f64)
        };

        let nb = self.params.num_blocks;
        let mut scalars: Vec<f64> = self
            .params
            .damping
            .iter()
            .chain(self.params.power_split.iter())
            .copied()
            .collect();
        let mut grad = vec![0.0; scalars.len()];
        for j in 0..scalars.len() {
            let backup = scalars[j];
            let (lo, hi) = if j < nb { DAMPING_RANGE } else { SPLIT_RANGE };
            let plus = (backup + SOLVER_FD_STEP).min(hi);
            let minus = (backup - SOLVER_FD_STEP).max(lo);
            if plus - minus < 1e-12 {
                continue;
            }
            let mut p = self.params.clone();
            set_scalar(&mut p, j, plus);
            let up = objective(&p, &self.critic)?;
            set_scalar(&mut p, j, minus);
            let down = objective(&p, &self.critic)?;
            // Ascent: Adam minimizes, so feed the negated slope.
            grad[j] = -(up - down) / (plus - minus);
            scalars[j] = backup;
        }
        adam_step_slice(&mut scalars, &grad, &mut self.scalar_opt, lr);
        for (j, &v) in scalars.iter().enumerate() {
            let (lo, hi) = if j < nb { DAMPING_RANGE } else { SPLIT_RANGE };
            set_scalar(&mut self.params, j, v.clamp(lo, hi));
        }

        // Simultaneous-perturbation estimate through the subnet weights.
        if let (Some(_), Some(opt)) = (self.params.enn.as_ref(), self.enn_opt.as_mut()) {
            let dims: Vec<usize> = self
                .params
                .enn
                .as_ref()
                .unwrap()
                .params()
                .iter()
                .map(|t| t.numel())
                .collect();
            let deltas: Vec<Vec<f64>> = dims
                .iter()
                .map(|&len| {
                    (0..len)
                        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                        .collect()
                })
                .collect();
            let perturb = |net: &Network, sign: f64| -> Network {
                let mut n = net.clone();
                for (t, d) in n.params_mut().into_iter().zip(deltas.iter()) {
                    for (x, dx) in t.data_mut().iter_mut().zip(d.iter()) {
                        *x += sign * SPSA_STEP * dx;
                    }
                }
                n
            };
            let base = self.params.enn.as_ref().unwrap().clone();
            let mut p_plus = self.params.clone();
            p_plus.enn = Some(perturb(&base, 1.0));
            let mut p_minus = self.params.clone();
            p_minus.enn = Some(perturb(&base, -1.0));
            let slope =
                (objective(&p_plus, &self.critic)? - objective(&p_minus, &self.critic)?)
                    / (2.0 * SPSA_STEP);
            // Gradient estimate: slope times the probe direction (ascent).
            let grads = crate::nn::NetGrads {
                layers: grads_from_deltas(&base, &deltas, -slope),
            };
            opt.step(self.params.enn.as_mut().unwrap(), &grads, lr);
        }

        // Soft target updates.
        soft_update_critic(&mut self.target_critic, &self.critic, tau);
        for (t, o) in self
            .target_params
            .damping
            .iter_mut()
            .zip(self.params.damping.iter())
        {
            *t = tau * o + (1.0 - tau) * *t;
        }
        for (t, o) in self
            .target_params
            .power_split
            .iter_mut()
            .zip(self.params.power_split.iter())
        {
            *t = tau * o + (1.0 - tau) * *t;
        }
        if let (Some(t), Some(o)) = (self.target_params.enn.as_mut(), self.params.enn.as_ref()) {
            soft_update_network(t, o, tau);
        }

        let actor_obj = objective(&self.params, &self.critic)?;
        Ok((critic_loss, actor_obj))
    }
}

fn set_scalar(params: &mut HNetParams, j: usize, v: f64) {
    let nb = params.num_blocks;
    if j < nb {
        params.damping[j] = v;
    } else {
        params.power_split[j - nb] = v;
    }
}

fn grads_from_deltas(
    net: &Network,
    deltas: &[Vec<f64>],
    scale: f64,
) -> Vec<crate::nn::LayerGrads> {
    let mut out = Vec::with_capacity(net.layers.len());
    let mut cursor = 0;
    for layer in &net.layers {
        let params = layer.params();
        if params.is_empty() {
            out.push(crate::nn::LayerGrads::None);
            continue;
        }
        let weight = Tensor::new(
            params[0].shape(),
            deltas[cursor].iter().map(|d| d * scale).collect(),
        );
        let bias = Tensor::new(
            params[1].shape(),
            deltas[cursor + 1].iter().map(|d| d * scale).collect(),
        );
        cursor += 2;
        out.push(crate::nn::LayerGrads::Pair { weight, bias });
    }
    out
}

// ── network actors ─────────────────────────────────────────────────────────

/// Agent whose actor is a plain network with tanh-bounded outputs in
/// [-1, 1]^A; the environment mapping owns the scaling to physical ranges.
#[derive(Debug, Clone)]
pub struct NetAgent {
    pub actor: Network,
    pub target_actor: Network,
    pub critic: Critic,
    pub target_critic: Critic,
    pub actor_opt: AdamState,
    pub critic_opt: CriticOpt,
    pub buffer: ReplayBuffer,
    /// Shape of the state tensor per sample (without the batch dimension).
    pub state_shape: Vec<usize>,
}

impl NetAgent {
    pub fn new(actor: Network, critic: Critic, capacity: usize, state_shape: Vec<usize>) -> Self {
        let actor_opt = AdamState::for_network(&actor);
        let critic_opt = critic.opt();
        Self {
            target_actor: actor.clone(),
            actor,
            target_critic: critic.clone(),
            critic,
            actor_opt,
            critic_opt,
            buffer: ReplayBuffer::new(capacity),
            state_shape,
        }
    }

    fn batch_states(&self, flat: &[Vec<f64>]) -> Tensor {
        let mut shape = vec![flat.len()];
        shape.extend_from_slice(&self.state_shape);
        let mut data = Vec::with_capacity(flat.len() * flat[0].len());
        for row in flat {
            data.extend_from_slice(row);
        }
        Tensor::new(&shape, data)
    }

    /// Greedy normalized action in [-1, 1]^A.
    pub fn act(&self, state: &Tensor) -> Result<Vec<f64>, RlError> {
        Ok(self.actor.infer(state)?.data().to_vec())
    }

    /// Exploration: Gaussian noise in the normalized action space, clipped
    /// back into [-1, 1].
    pub fn act_explore(
        &self,
        state: &Tensor,
        sigma: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>, RlError> {
        let mut a = self.act(state)?;
        for x in a.iter_mut() {
            let noise: f64 = rng.sample(rand_distr::StandardNormal);
            *x = (*x + sigma * noise).clamp(-1.0, 1.0);
        }
        Ok(a)
    }

    /// One DDPG update; returns (critic loss, actor objective).
    pub fn update(
        &mut self,
        batch_size: usize,
        gamma: f64,
        tau: f64,
        lr: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, f64), RlError> {
        let batch: Vec<Transition> = self
            .buffer
            .sample(batch_size, rng)?
            .into_iter()
            .cloned()
            .collect();

        let next_states: Vec<Vec<f64>> = batch.iter().map(|t| t.next_state.clone()).collect();
        let next_tensor = self.batch_states(&next_states);
        let next_actions_t = self.target_actor.infer(&next_tensor)?;
        let adim = next_actions_t.numel() / batch.len();
        let next_actions: Vec<Vec<f64>> = (0..batch.len())
            .map(|i| next_actions_t.data()[i * adim..(i + 1) * adim].to_vec())
            .collect();
        let next_q = self.target_critic.value(&next_tensor, &next_actions)?;

        let targets: Vec<f64> = batch
            .iter()
            .zip(next_q.iter())
            .map(|(t, &nq)| {
                if t.done {
                    t.reward
                } else {
                    t.reward + gamma * nq
                }
            })
            .collect();

        let states_flat: Vec<Vec<f64>> = batch.iter().map(|t| t.state.clone()).collect();
        let states = self.batch_states(&states_flat);
        let actions: Vec<Vec<f64>> = batch.iter().map(|t| t.action.clone()).collect();
        let (q, cache) = self.critic.forward(&states, &actions, Mode::Train)?;
        let n = batch.len() as f64;
        let mut critic_loss = 0.0;
        let mut dq = Vec::with_capacity(batch.len());
        for (qi, yi) in q.iter().zip(targets.iter()) {
            let diff = qi - yi;
            critic_loss += diff * diff / n;
            dq.push(2.0 * diff / n);
        }
        self.critic
            .backward_step(&cache, &dq, &mut self.critic_opt, lr)?;

        // Actor: ascend mean Q(s, pi(s)) through the critic's action input.
        let (pi_out, actor_cache) = self.actor.forward(&states, Mode::Train)?;
        let pi_actions: Vec<Vec<f64>> = (0..batch.len())
            .map(|i| pi_out.data()[i * adim..(i + 1) * adim].to_vec())
            .collect();
        let (q_pi, da) = self.critic.action_gradient(&states, &pi_actions)?;
        let actor_obj: f64 = q_pi.iter().sum::<f64>() / n;
        let mut upstream = Vec::with_capacity(batch.len() * adim);
        for row in &da {
            // Ascent through the actor: descend the negated value gradient.
            upstream.extend(row.iter().map(|g| -g));
        }
        let (actor_grads, _) = self
            .actor
            .backward(&actor_cache, &Tensor::new(&[batch.len(), adim], upstream))?;
        self.actor_opt.step(&mut self.actor, &actor_grads, lr);

        soft_update_network(&mut self.target_actor, &self.actor, tau);
        soft_update_critic(&mut self.target_critic, &self.critic, tau);
        Ok((critic_loss, actor_obj))
    }
}

/// Elementwise soft update of every tensor (parameters and running
/// statistics): `target <- tau * online + (1 - tau) * target`.
pub fn soft_update_network(target: &mut Network, online: &Network, tau: f64) {
    let online_tensors = all_tensors(online);
    let mut idx = 0;
    for layer in target.layers.iter_mut() {
        for t in layer_tensors_mut(layer) {
            let o = online_tensors[idx];
            for (tv, &ov) in t.data_mut().iter_mut().zip(o.data().iter()) {
                *tv = tau * ov + (1.0 - tau) * *tv;
            }
            idx += 1;
        }
    }
}

pub fn soft_update_critic(target: &mut Critic, online: &Critic, tau: f64) {
    soft_update_network(&mut target.trunk, &online.trunk, tau);
    soft_update_network(&mut target.head, &online.head, tau);
}

fn all_tensors(net: &Network) -> Vec<&Tensor> {
    let mut out = Vec::new();
    for layer in &net.layers {
        match layer {
            crate::nn::Layer::Dense { weight, bias }
            | crate::nn::Layer::Conv3x3 { weight, bias } => {
                out.push(weight);
                out.push(bias);
            }
            crate::nn::Layer::BatchNorm {
                gamma,
                beta,
                running_mean,
                running_var,
                ..
            } => {
                out.push(gamma);
                out.push(beta);
                out.push(running_mean);
                out.push(running_var);
            }
            _ => {}
        }
    }
    out
}

fn layer_tensors_mut(layer: &mut crate::nn::Layer) -> Vec<&mut Tensor> {
    match layer {
        crate::nn::Layer::Dense { weight, bias }
        | crate::nn::Layer::Conv3x3 { weight, bias } => vec![weight, bias],
        crate::nn::Layer::BatchNorm {
            gamma,
            beta,
            running_mean,
            running_var,
            ..
        } => vec![gamma, beta, running_mean, running_var],
        _ => Vec::new(),
    }
}

// ── single-agent action layout ─────────────────────────────────────────────

/// Layout of the single-agent baseline's normalized action vector: complex
/// beamformer entries, allocations, then per-UAV moves.
#[derive(Debug, Clone, Copy)]
pub struct SingleActionLayout {
    pub num_uavs: usize,
    pub num_users: usize,
    pub beam_entries: usize,
    /// Scale for beamformer entries; chosen so a typical tanh output lands
    /// near the power budget but can exceed it.
    pub beam_scale: f64,
    /// Scale mapping [0, 1] allocation outputs to bits/s/Hz.
    pub alloc_scale: f64,
}

impl SingleActionLayout {
    pub fn new(constants: &SystemConstants) -> Self {
        let m = constants.tx_antennas;
        let d = constants.streams;
        let beams = constants.num_uavs + constants.num_users;
        let beam_entries = beams * m * d;
        // Root-mean-square entry magnitude that would exactly meet the
        // per-UAV budget if outputs were uniform.
        let per_uav_entries =
            (1 + constants.num_users / constants.num_uavs) * m * d;
        let beam_scale = (constants.power_budget / per_uav_entries as f64).sqrt();
        Self {
            num_uavs: constants.num_uavs,
            num_users: constants.num_users,
            beam_entries,
            beam_scale,
            alloc_scale: 2.0,
        }
    }

    pub fn action_dim(&self) -> usize {
        2 * self.beam_entries + self.num_users + 2 * self.num_uavs
    }
}

/// Decode the single agent's normalized output into a joint action. Beam
/// entries scale linearly (the power budget can be violated, feeding the
/// penalty channel); allocations map to [0, alloc_scale]; moves map to
/// distance in [0, D] and heading in [0, 2 pi).
pub fn decode_single_action(
    raw: &[f64],
    layout: &SingleActionLayout,
    constants: &SystemConstants,
) -> super::env::JointAction {
    let m = constants.tx_antennas;
    let d = constants.streams;
    let mut sol = BeamformingSolution::zeros(constants);
    let mut idx = 0;
    let read_beam = |idx: &mut usize| -> ComplexMatrix {
        let data: Vec<C64> = (0..m * d)
            .map(|_| {
                let z = C64::new(
                    raw[*idx] * layout.beam_scale,
                    raw[*idx + 1] * layout.beam_scale,
                );
                *idx += 2;
                z
            })
            .collect();
        ComplexMatrix::new(m, d, data).expect("finite action")
    };
    for u in 0..constants.num_uavs {
        sol.common[u] = read_beam(&mut idx);
    }
    for k in 0..constants.num_users {
        sol.private[k] = read_beam(&mut idx);
    }
    for k in 0..constants.num_users {
        sol.common_alloc[k] = (raw[idx] + 1.0) / 2.0 * layout.alloc_scale;
        idx += 1;
    }
    let cap = constants.max_step();
    let mut moves = Vec::with_capacity(constants.num_uavs);
    for _ in 0..constants.num_uavs {
        let dist = (raw[idx] + 1.0) / 2.0 * cap;
        let heading = (raw[idx + 1] + 1.0) * core::f64::consts::PI;
        idx += 2;
        moves.push((dist, heading));
    }
    super::env::JointAction {
        beamforming: sol,
        moves,
    }
}
