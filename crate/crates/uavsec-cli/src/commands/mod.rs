//! Command implementations: train, eval, oracle, sweep, compare.

mod compare;
mod eval;
mod oracle;
mod sweep;
mod train;

pub use compare::run_compare;
pub use eval::run_eval;
pub use oracle::run_oracle;
pub use sweep::run_sweep;
pub use train::run_train;

use anyhow::{anyhow, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uavsec_core::hnet::{enn_network, hnet_forward, pretrain_enn, EigMode, HNetParams};
use uavsec_core::nn::{Network, Tensor};
use uavsec_core::rl::{
    decode_moves, decode_single_action, single_state, trajectory_actor, Env, JointAction, Method,
    RestoredPolicy, SingleActionLayout, TrainedAgents, Violations,
};
use uavsec_core::scenario::mix_seed;

use crate::config::{Experiment, FileConfig};

/// A greedy (noise-free) policy for evaluation rollouts.
pub enum Policy {
    Dun {
        params: HNetParams,
        actor: Network,
    },
    Single {
        actor: Network,
        layout: SingleActionLayout,
    },
}

impl Policy {
    /// Untrained default policy for the configured method: the exact-form
    /// solver (with a freshly pre-trained eigenvector subnet in learned
    /// mode) plus freshly initialized networks.
    pub fn fresh(file: &FileConfig) -> Result<Self> {
        let constants = file.constants();
        match file.method() {
            Some(Method::DunDrl) => {
                let solver = file.solver_config();
                let mut params = HNetParams::exact(solver.num_blocks);
                params.eig_mode = solver.eig_mode;
                if solver.eig_mode == EigMode::Learned {
                    let mut enn = enn_network(
                        constants.tx_antennas,
                        constants.streams,
                        mix_seed(file.seed, 0x656e_6e00),
                    );
                    pretrain_enn(
                        &mut enn,
                        constants.tx_antennas,
                        constants.streams,
                        solver.enn_pretrain_steps,
                        64,
                        1e-3,
                        mix_seed(file.seed, 0x656e_6e01),
                    );
                    params.enn = Some(enn);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(file.seed, 0x7472_616a));
                let actor = trajectory_actor(
                    file.training.raster_size,
                    &file.training.cnn_channels,
                    constants.num_uavs,
                    &mut rng,
                );
                Ok(Policy::Dun { params, actor })
            }
            Some(Method::SingleDrl) => {
                let layout = SingleActionLayout::new(&constants);
                let raster = file.training.raster_size;
                let state_dim = 2
                    * constants.rx_antennas
                    * constants.tx_antennas
                    * (constants.num_users + constants.num_eaves)
                    * constants.num_uavs
                    + 2
                    + 3 * raster * raster;
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(file.seed, 0x736e_676c));
                let mut dims = vec![state_dim];
                dims.extend_from_slice(&file.training.dense_hidden);
                let mut layers = Vec::new();
                for w in dims.windows(2) {
                    layers.push(Network::dense(w[0], w[1], &mut rng));
                    layers.push(uavsec_core::nn::Layer::Relu);
                }
                layers.push(Network::dense(
                    *dims.last().unwrap(),
                    layout.action_dim(),
                    &mut rng,
                ));
                layers.push(uavsec_core::nn::Layer::Tanh);
                Ok(Policy::Single {
                    actor: Network::new(layers),
                    layout,
                })
            }
            None => Err(anyhow!("method '{}' has no policy", file.method)),
        }
    }

    pub fn from_outcome(agents: TrainedAgents) -> Self {
        match agents {
            TrainedAgents::Dun {
                beamforming,
                trajectory,
            } => Policy::Dun {
                params: beamforming.params,
                actor: trajectory.actor,
            },
            TrainedAgents::Single { agent, layout } => Policy::Single {
                actor: agent.actor,
                layout,
            },
        }
    }

    pub fn from_checkpoint(bytes: &[u8], file: &FileConfig) -> Result<Self> {
        let restored = RestoredPolicy::decode(bytes, &file.solver_config())
            .map_err(|e| anyhow!("checkpoint: {e}"))?;
        match restored.kind {
            Method::DunDrl => Ok(Policy::Dun {
                params: restored
                    .bf_params
                    .ok_or_else(|| anyhow!("checkpoint missing solver parameters"))?,
                actor: restored
                    .traj_actor
                    .ok_or_else(|| anyhow!("checkpoint missing trajectory actor"))?,
            }),
            Method::SingleDrl => Ok(Policy::Single {
                actor: restored
                    .single_actor
                    .ok_or_else(|| anyhow!("checkpoint missing actor"))?,
                layout: SingleActionLayout::new(&file.constants()),
            }),
        }
    }

    pub fn act(&self, env: &Env) -> Result<JointAction> {
        let constants = &env.scenario().constants;
        match self {
            Policy::Dun { params, actor } => {
                let beamforming =
                    hnet_forward(env.channels(), params, env.topology(), constants)
                        .map_err(|e| anyhow!("solver: {e}"))?;
                let raw = actor
                    .infer(&env.trajectory_state())
                    .map_err(|e| anyhow!("actor: {e}"))?;
                let moves = decode_moves(raw.data(), constants.num_uavs, constants.max_step());
                Ok(JointAction { beamforming, moves })
            }
            Policy::Single { actor, layout } => {
                let state = single_state(&env.states());
                let raw = actor
                    .infer(&Tensor::new(&[1, state.len()], state))
                    .map_err(|e| anyhow!("actor: {e}"))?;
                Ok(decode_single_action(raw.data(), layout, constants))
            }
        }
    }
}

/// Per-step record of an evaluation rollout.
pub struct StepStats {
    pub reward: f64,
    pub total_secrecy: f64,
    pub per_user_secrecy: Vec<f64>,
    pub violations: Violations,
}

pub struct EpisodeStats {
    pub episode: usize,
    pub steps: Vec<StepStats>,
}

impl EpisodeStats {
    pub fn cumulative_secrecy(&self) -> f64 {
        self.steps.iter().map(|s| s.total_secrecy).sum()
    }
}

/// Greedy rollouts over `episodes` episodes with the environment's
/// episode-indexed channel streams.
pub fn rollout(exp: &Experiment, policy: &Policy, episodes: usize) -> Result<Vec<EpisodeStats>> {
    let env_config = exp.file.env_config()?;
    let mut out = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let (mut env, _) = Env::reset(&env_config, episode as u64)
            .map_err(|e| anyhow!("environment: {e}"))?;
        let mut steps = Vec::with_capacity(env.horizon());
        loop {
            let action = policy.act(&env)?;
            let result = env.step(&action).map_err(|e| anyhow!("step: {e}"))?;
            steps.push(StepStats {
                reward: result.reward,
                total_secrecy: result.report.total_secrecy,
                per_user_secrecy: result.report.secrecy.clone(),
                violations: result.violations,
            });
            if result.done {
                break;
            }
        }
        out.push(EpisodeStats { episode, steps });
    }
    Ok(out)
}

/// Fraction of steps with any positive constraint violation.
pub fn violation_rate(stats: &[EpisodeStats]) -> f64 {
    let mut steps = 0usize;
    let mut violated = 0usize;
    for ep in stats {
        for s in &ep.steps {
            steps += 1;
            if s.violations.any_positive() {
                violated += 1;
            }
        }
    }
    if steps == 0 {
        0.0
    } else {
        violated as f64 / steps as f64
    }
}
