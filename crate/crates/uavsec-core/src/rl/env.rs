//! Two-agent environment: states, the shared tanh reward, and stepping.
//!
//! Step order within a slot: rates and constraint penalties are evaluated on
//! the channels the beamforming agent observed (current UAV positions), the
//! trajectory action then moves the UAVs, and fresh channels are drawn for
//! the next slot. Movement penalties (pre-clipping step excess, and the
//! terminal deviation on the last slot) enter the same step's reward.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::nn::Tensor;
use crate::rates::{compute_rates, BeamformingSolution, RateReport, Topology};
use crate::scenario::{
    gen_channels, init_scenario, mix_seed, step_uav, terminal_violation, ChannelSet, Scenario,
    ScenarioConfig,
};

use super::RlError;

/// Penalty coefficients C1..C6 for the six constraint channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardWeights {
    pub alloc_excess: f64,
    pub power: f64,
    pub alloc_negativity: f64,
    pub step_excess: f64,
    pub start_deviation: f64,
    pub terminal_deviation: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            alloc_excess: 1.0,
            power: 1.0,
            alloc_negativity: 1.0,
            step_excess: 1.0,
            start_deviation: 1.0,
            terminal_deviation: 1.0,
        }
    }
}

/// Environment configuration: scenario plus reward shaping and the raster
/// resolution of the trajectory agent's observation.
#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub scenario: ScenarioConfig,
    pub raster_size: usize,
    pub weights: RewardWeights,
}

/// Violation magnitudes of one step, ordered as the reward's penalty terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Violations {
    /// Secure-allocation excess (per-slot sum over UAVs).
    pub alloc_excess: f64,
    /// Power-budget excess (sum over UAVs).
    pub power: f64,
    /// Magnitude of negative allocations.
    pub alloc_negativity: f64,
    /// Pre-clipping per-step displacement excess (sum over UAVs).
    pub step_excess: f64,
    /// Start-point deviation (nonzero only with injected perturbations).
    pub start_deviation: f64,
    /// Terminal deviation, charged on the final slot.
    pub terminal_deviation: f64,
}

impl Violations {
    pub fn any_positive(&self) -> bool {
        self.alloc_excess > 0.0
            || self.power > 0.0
            || self.alloc_negativity > 0.0
            || self.step_excess > 0.0
            || self.start_deviation > 0.0
            || self.terminal_deviation > 0.0
    }

    pub fn beamforming_any(&self) -> bool {
        self.alloc_excess > 0.0 || self.power > 0.0 || self.alloc_negativity > 0.0
    }
}

/// Shared reward: hyperbolic-tangent-squashed secrecy minus weighted
/// penalties. tanh saturates to exactly +/-1.0 in f64 for arguments beyond
/// about 19, so the result is nudged back inside the open interval.
pub fn reward(total_secrecy: f64, v: &Violations, w: &RewardWeights) -> f64 {
    let arg = total_secrecy
        - w.alloc_excess * v.alloc_excess
        - w.power * v.power
        - w.alloc_negativity * v.alloc_negativity
        - w.step_excess * v.step_excess
        - w.start_deviation * v.start_deviation
        - w.terminal_deviation * v.terminal_deviation;
    let r = arg.tanh();
    r.clamp(-1.0 + f64::EPSILON, 1.0 - f64::EPSILON)
}

/// Initial observations of both agents.
#[derive(Debug, Clone)]
pub struct AgentStates {
    pub beamforming: Vec<f64>,
    pub trajectory: Tensor,
}

/// Both agents' actions for one slot: the beamforming solution and per-UAV
/// (distance, heading) moves (distance before clipping).
#[derive(Debug, Clone)]
pub struct JointAction {
    pub beamforming: BeamformingSolution,
    pub moves: Vec<(f64, f64)>,
}

/// One step's outcome.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub reward: f64,
    pub done: bool,
    pub report: RateReport,
    pub violations: Violations,
    pub next_states: AgentStates,
}

/// The environment owns the scenario (UAV positions mutate), current
/// channels, and the slot counter.
#[derive(Debug, Clone)]
pub struct Env {
    scenario: Scenario,
    topo: Topology,
    channels: ChannelSet,
    t: usize,
    channel_seed: u64,
    raster_size: usize,
    raster_bounds: ((f64, f64), (f64, f64)),
    weights: RewardWeights,
    start_deviation: f64,
}

const EPISODE_TAG: u64 = 0x6570_6973;

/// Channel-seed stream of an episode, shared by the environment and by
/// oracles that must see the same fading realizations.
pub fn episode_channel_seed(scenario_seed: u64, episode: u64) -> u64 {
    mix_seed(scenario_seed, EPISODE_TAG ^ episode)
}

impl Env {
    /// Build and reset: UAVs at their start points, fresh channels at slot 0.
    pub fn reset(config: &EnvConfig, episode_seed: u64) -> Result<(Self, AgentStates), RlError> {
        if config.raster_size < 2 {
            return Err(RlError::InvalidConfig("raster size must be at least 2"));
        }
        let mut scenario = init_scenario(&config.scenario)?;
        scenario.reset_uavs();
        let topo = scenario.topology();
        let channel_seed = episode_channel_seed(config.scenario.seed, episode_seed);
        let channels = gen_channels(&scenario, 0, channel_seed)?;
        let start_deviation = scenario
            .uav_pos
            .iter()
            .zip(scenario.uav_start.iter())
            .map(|(a, b)| {
                let dx = a[0] - b[0];
                let dy = a[1] - b[1];
                let dz = a[2] - b[2];
                (dx * dx + dy * dy + dz * dz).sqrt()
            })
            .sum();
        let raster_bounds = raster_bounds(&scenario);
        let env = Self {
            scenario,
            topo,
            channels,
            t: 0,
            channel_seed,
            raster_size: config.raster_size,
            raster_bounds,
            weights: config.weights.clone(),
            start_deviation,
        };
        let states = env.states();
        Ok((env, states))
    }

    pub fn horizon(&self) -> usize {
        self.scenario.constants.horizon
    }

    pub fn slot(&self) -> usize {
        self.t
    }

    pub fn done(&self) -> bool {
        self.t >= self.horizon()
    }

    pub fn channels(&self) -> &ChannelSet {
        &self.channels
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn states(&self) -> AgentStates {
        AgentStates {
            beamforming: self.beamforming_state(),
            trajectory: self.trajectory_state(),
        }
    }

    /// Flattened channel state: re/im of every user and eavesdropper channel
    /// entry, then the antenna counts M and N.
    pub fn beamforming_state(&self) -> Vec<f64> {
        let c = &self.scenario.constants;
        let mut out =
            Vec::with_capacity(2 * c.rx_antennas * c.tx_antennas * (c.num_users + c.num_eaves) * c.num_uavs + 2);
        for per in self.channels.user.iter().chain(self.channels.eave.iter()) {
            for h in per {
                for z in h.entries() {
                    out.push(z.re);
                    out.push(z.im);
                }
            }
        }
        out.push(c.tx_antennas as f64);
        out.push(c.rx_antennas as f64);
        out
    }

    /// Rasterized locations: one channel per entity class (users,
    /// eavesdroppers, UAVs) on a `raster_size`^2 grid over the scenario area.
    pub fn trajectory_state(&self) -> Tensor {
        let g = self.raster_size;
        let mut data = vec![0.0; 3 * g * g];
        let ((x0, x1), (y0, y1)) = self.raster_bounds;
        let mut splat = |ch: usize, x: f64, y: f64| {
            let fx = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
            let fy = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0);
            let ix = ((fx * g as f64) as usize).min(g - 1);
            let iy = ((fy * g as f64) as usize).min(g - 1);
            data[(ch * g + iy) * g + ix] += 1.0;
        };
        for loc in &self.scenario.user_locs {
            splat(0, loc[0], loc[1]);
        }
        for loc in &self.scenario.eave_locs {
            splat(1, loc[0], loc[1]);
        }
        for pos in &self.scenario.uav_pos {
            splat(2, pos[0], pos[1]);
        }
        Tensor::new(&[1, 3, g, g], data)
    }

    /// Advance one slot: evaluate the beamforming action on the observed
    /// channels, move the UAVs, redraw channels, and emit the shared reward.
    pub fn step(&mut self, action: &JointAction) -> Result<StepResult, RlError> {
        if self.done() {
            return Err(RlError::EpisodeFinished);
        }
        let c = &self.scenario.constants;
        if action.moves.len() != c.num_uavs {
            return Err(RlError::InvalidConfig("one move per UAV required"));
        }

        let report = compute_rates(&self.channels, &action.beamforming, &self.topo, c)?;

        let mut violations = Violations {
            alloc_excess: report.residuals.secrecy_alloc.iter().sum(),
            power: report.residuals.power.iter().sum(),
            alloc_negativity: report.residuals.alloc_negativity,
            step_excess: 0.0,
            start_deviation: if self.t == 0 { self.start_deviation } else { 0.0 },
            terminal_deviation: 0.0,
        };

        for (u, &(dist, heading)) in action.moves.iter().enumerate() {
            let outcome = step_uav(&self.scenario, u, dist, heading);
            violations.step_excess += outcome.step_excess;
            self.scenario.apply_move(u, &outcome);
        }

        self.t += 1;
        let done = self.t >= self.horizon();
        if done {
            violations.terminal_deviation = terminal_violation(&self.scenario);
        }

        self.channels = gen_channels(&self.scenario, self.t, self.channel_seed)?;
        let r = reward(report.total_secrecy, &violations, &self.weights);

        Ok(StepResult {
            reward: r,
            done,
            report,
            violations,
            next_states: self.states(),
        })
    }
}

fn raster_bounds(scenario: &Scenario) -> ((f64, f64), (f64, f64)) {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for loc in scenario.user_locs.iter().chain(scenario.eave_locs.iter()) {
        xs.push(loc[0]);
        ys.push(loc[1]);
    }
    for pos in scenario.uav_start.iter().chain(scenario.uav_terminal.iter()) {
        xs.push(pos[0]);
        ys.push(pos[1]);
    }
    // Margin covers the farthest the UAVs can wander over an episode.
    let margin = scenario.constants.max_step() * scenario.constants.horizon as f64 + 1.0;
    let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (
        (lo(&xs) - margin, hi(&xs) + margin),
        (lo(&ys) - margin, hi(&ys) + margin),
    )
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::scenario::{dbm_to_watts, Placement, SystemConstants};

    pub(crate) fn toy_env_config(seed: u64) -> EnvConfig {
        EnvConfig {
            scenario: ScenarioConfig {
                constants: SystemConstants {
                    num_uavs: 1,
                    num_users: 2,
                    num_eaves: 1,
                    tx_antennas: 2,
                    rx_antennas: 1,
                    streams: 1,
                    power_budget: dbm_to_watts(20.0),
                    noise_user: dbm_to_watts(-60.0),
                    noise_eave: dbm_to_watts(-60.0),
                    pathloss_exp: 3.5,
                    carrier_freq: 28e9,
                    antenna_spacing: 0.5,
                    rician_kappa: 10.0,
                    slot_len: 0.1,
                    horizon: 10,
                    max_speed: 20.0,
                },
                placement: Placement::Explicit {
                    users: vec![[30.0, 10.0], [40.0, -5.0]],
                    eaves: vec![[-25.0, 20.0]],
                },
                uav_start: vec![[0.0, 0.0, 30.0]],
                uav_terminal: vec![[0.0, 0.0, 30.0]],
                seed,
            },
            raster_size: 8,
            weights: RewardWeights::default(),
        }
    }

    #[test]
    fn reward_examples() {
        let w = RewardWeights::default();
        assert_eq!(reward(0.0, &Violations::default(), &w), 0.0);
        let high = reward(10.0, &Violations::default(), &w);
        assert!((high - 10.0f64.tanh()).abs() < 1e-15 && high < 1.0);
        let mut v = Violations::default();
        v.power = 2.0;
        let penalized = reward(0.0, &v, &w);
        assert!((penalized - (-2.0f64).tanh()).abs() < 1e-15);
        // Saturating argument stays strictly inside (-1, 1).
        let saturated = reward(100.0, &Violations::default(), &w);
        assert!(saturated < 1.0 && saturated > -1.0);
        let negative = reward(-100.0, &Violations::default(), &w);
        assert!(negative > -1.0);
    }

    #[test]
    fn reset_is_deterministic_and_starts_at_origin() {
        let cfg = toy_env_config(5);
        let (env_a, s_a) = Env::reset(&cfg, 3).unwrap();
        let (env_b, s_b) = Env::reset(&cfg, 3).unwrap();
        assert_eq!(s_a.beamforming, s_b.beamforming);
        assert_eq!(s_a.trajectory.data(), s_b.trajectory.data());
        assert_eq!(env_a.scenario.uav_pos, env_a.scenario.uav_start);
        assert_eq!(env_b.scenario.uav_pos, env_b.scenario.uav_start);
        // Start-point violation is zero at reset.
        assert_eq!(env_a.start_deviation, 0.0);
    }

    #[test]
    fn beamforming_state_dimension_matches_count() {
        let cfg = toy_env_config(5);
        let (env, s) = Env::reset(&cfg, 0).unwrap();
        let c = &env.scenario.constants;
        let expected =
            2 * c.rx_antennas * c.tx_antennas * (c.num_users + c.num_eaves) * c.num_uavs + 2;
        assert_eq!(s.beamforming.len(), expected);
        assert_eq!(s.beamforming[expected - 2], c.tx_antennas as f64);
        assert_eq!(s.beamforming[expected - 1], c.rx_antennas as f64);
    }

    #[test]
    fn episode_runs_exactly_horizon_steps() {
        let cfg = toy_env_config(1);
        let (mut env, _) = Env::reset(&cfg, 0).unwrap();
        let action = JointAction {
            beamforming: BeamformingSolution::zeros(&env.scenario.constants),
            moves: vec![(0.0, 0.0)],
        };
        let mut steps = 0;
        loop {
            let out = env.step(&action).unwrap();
            steps += 1;
            assert!(out.reward > -1.0 && out.reward < 1.0);
            if out.done {
                break;
            }
            assert!(steps < 100, "done never observed");
        }
        assert_eq!(steps, 10, "horizon = 1 s / 0.1 s");
        assert!(matches!(env.step(&action), Err(RlError::EpisodeFinished)));
    }

    #[test]
    fn zero_action_zero_reward_when_nothing_pending() {
        // Terminal equals start, zero moves: the only possibly nonzero
        // penalty is the terminal deviation, which is zero here.
        let cfg = toy_env_config(2);
        let (mut env, _) = Env::reset(&cfg, 0).unwrap();
        let action = JointAction {
            beamforming: BeamformingSolution::zeros(&env.scenario.constants),
            moves: vec![(0.0, 0.0)],
        };
        for _ in 0..10 {
            let out = env.step(&action).unwrap();
            assert_eq!(out.reward, 0.0);
            assert!(!out.violations.any_positive());
        }
    }

    #[test]
    fn overspent_power_is_penalized_against_projected_variant() {
        let cfg = toy_env_config(3);
        let (mut env, _) = Env::reset(&cfg, 0).unwrap();
        let c = env.scenario.constants.clone();
        let topo = env.topology().clone();

        // A feasible solution, then the same solution scaled over budget.
        let params = crate::hnet::HNetParams::exact(2);
        let feasible =
            crate::hnet::hnet_forward(env.channels(), &params, &topo, &c).unwrap();
        let mut overspent = feasible.clone();
        for w in overspent.private.iter_mut() {
            *w = w.scale(2.0);
        }

        let moves = vec![(0.0, 0.0)];
        let out_over = env
            .step(&JointAction {
                beamforming: overspent,
                moves: moves.clone(),
            })
            .unwrap();
        assert!(out_over.violations.power > 0.0, "overspend must be flagged");

        let (mut env2, _) = Env::reset(&cfg, 0).unwrap();
        let out_ok = env2
            .step(&JointAction {
                beamforming: feasible,
                moves,
            })
            .unwrap();
        assert_eq!(out_ok.violations.power, 0.0);
        assert!(
            out_over.reward < out_ok.reward,
            "penalty must bite: {} vs {}",
            out_over.reward,
            out_ok.reward
        );
    }

    #[test]
    fn terminal_deviation_charged_on_final_step() {
        let cfg = toy_env_config(4);
        let (mut env, _) = Env::reset(&cfg, 0).unwrap();
        let action = JointAction {
            beamforming: BeamformingSolution::zeros(&env.scenario.constants),
            moves: vec![(2.0, 0.0)], // drift east every slot
        };
        let mut last = None;
        for _ in 0..10 {
            last = Some(env.step(&action).unwrap());
        }
        let out = last.unwrap();
        assert!(out.done);
        // After 10 slots of 2 m the UAV is 20 m from the terminal; the final
        // step cap is 2 m, so 18 m of deviation is charged.
        assert!((out.violations.terminal_deviation - 18.0).abs() < 1e-9);
        assert!(out.reward < 0.0);
    }

    #[test]
    fn raster_counts_every_entity() {
        let cfg = toy_env_config(6);
        let (env, s) = Env::reset(&cfg, 0).unwrap();
        let data = s.trajectory.data();
        let g = env.raster_size;
        let users: f64 = data[..g * g].iter().sum();
        let eaves: f64 = data[g * g..2 * g * g].iter().sum();
        let uavs: f64 = data[2 * g * g..].iter().sum();
        assert_eq!(users, 2.0);
        assert_eq!(eaves, 1.0);
        assert_eq!(uavs, 1.0);
    }
}
