//! Markov formulation and multi-agent DDPG machinery.
//!
//! Two agents share one reward: a beamforming/rate-allocation agent whose
//! actor is the unfolded solver (its learnable knobs are the per-block
//! damping and power-split parameters plus the optional eigenvector subnet)
//! and a trajectory agent with a convolutional actor-critic over rasterized
//! node locations. A plain single-agent baseline with dense networks emitting
//! both action groups at once is included for comparisons.

mod agent;
mod env;
mod replay;
mod train;

pub use agent::{
    decode_single_action, flatten_solution, state_to_channels, Critic, HnetAgent, NetAgent,
    SingleActionLayout,
};
pub use env::{
    episode_channel_seed, reward, AgentStates, Env, EnvConfig, JointAction, RewardWeights,
    StepResult, Violations,
};
pub use replay::{ReplayBuffer, Transition};
pub use train::{
    decode_moves, single_state, train, trajectory_actor, ArchConfig, LogRow, Method, NullSink,
    RestoredPolicy, SolverConfig, TrainConfig, TrainOutcome, TrainSink, TrainedAgents,
};

use core::fmt;

use crate::hnet::HnetError;
use crate::nn::NnError;
use crate::rates::RatesError;
use crate::scenario::ScenarioError;

#[derive(Debug, Clone, PartialEq)]
pub enum RlError {
    InvalidConfig(&'static str),
    /// Sampling asked for more transitions than the buffer holds.
    BufferUnderfull { have: usize, need: usize },
    /// `step` called after the episode reached its horizon.
    EpisodeFinished,
    Scenario(ScenarioError),
    Rates(RatesError),
    Hnet(HnetError),
    Nn(NnError),
}

impl fmt::Display for RlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RlError::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            RlError::BufferUnderfull { have, need } => {
                write!(f, "replay buffer underfull: have {have}, need {need}")
            }
            RlError::EpisodeFinished => write!(f, "episode already finished"),
            RlError::Scenario(e) => write!(f, "{e}"),
            RlError::Rates(e) => write!(f, "{e}"),
            RlError::Hnet(e) => write!(f, "{e}"),
            RlError::Nn(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RlError {}

impl From<ScenarioError> for RlError {
    fn from(e: ScenarioError) -> Self {
        RlError::Scenario(e)
    }
}

impl From<RatesError> for RlError {
    fn from(e: RatesError) -> Self {
        RlError::Rates(e)
    }
}

impl From<HnetError> for RlError {
    fn from(e: HnetError) -> Self {
        RlError::Hnet(e)
    }
}

impl From<NnError> for RlError {
    fn from(e: NnError) -> Self {
        RlError::Nn(e)
    }
}
