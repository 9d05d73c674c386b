//! Network geometry and channel generation.
//!
//! A [`Scenario`] holds the radio constants, the (fixed) ground locations of
//! legitimate users and eavesdroppers, and the (moving) UAV positions. Channels
//! between every UAV and every receiver are drawn per time slot from a Rician
//! model: a uniform-linear-array line-of-sight component plus i.i.d. complex
//! Gaussian scatter, scaled by free-space-referenced pathloss.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{C64, ComplexMatrix};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Minimum admissible 3-D transmitter-receiver distance in meters.
pub const MIN_LINK_DISTANCE: f64 = 1.0;

/// Convert a power level in dBm to linear watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10.0f64.powf((dbm - 30.0) / 10.0)
}

/// Errors from scenario construction and channel generation.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    /// Counts, bounds, or dimensions in the configuration are inconsistent.
    InvalidConfig(&'static str),
    /// A transmitter-receiver pair is closer than [`MIN_LINK_DISTANCE`].
    DegenerateGeometry { uav: usize, distance: f64 },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            ScenarioError::DegenerateGeometry { uav, distance } => write!(
                f,
                "degenerate geometry: UAV {uav} within {distance:.3} m of a receiver"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ScenarioError {}

/// Radio and episode constants shared by every module.
///
/// Powers are linear watts here; the configuration layer converts from dBm
/// once at load time.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConstants {
    /// Number of UAVs acting as aerial base stations (U).
    pub num_uavs: usize,
    /// Total number of legitimate users in the network (K).
    pub num_users: usize,
    /// Number of eavesdroppers (I). Zero is allowed and means no wiretap.
    pub num_eaves: usize,
    /// Transmit antennas per UAV (M).
    pub tx_antennas: usize,
    /// Receive antennas per user/eavesdropper (N).
    pub rx_antennas: usize,
    /// Data streams per beam (d), at most min(M, N).
    pub streams: usize,
    /// Per-UAV transmit power budget in watts.
    pub power_budget: f64,
    /// Noise power at legitimate users, watts per stream dimension.
    pub noise_user: f64,
    /// Noise power at eavesdroppers, watts per stream dimension.
    pub noise_eave: f64,
    /// Pathloss exponent.
    pub pathloss_exp: f64,
    /// Carrier frequency in Hz.
    pub carrier_freq: f64,
    /// Antenna element spacing in wavelengths.
    pub antenna_spacing: f64,
    /// Rician K-factor (linear). `f64::INFINITY` selects pure line of sight.
    pub rician_kappa: f64,
    /// Slot length in seconds.
    pub slot_len: f64,
    /// Number of slots per episode (T).
    pub horizon: usize,
    /// Maximum UAV speed in m/s.
    pub max_speed: f64,
}

impl SystemConstants {
    /// Per-slot displacement cap D = max_speed * slot_len, in meters.
    pub fn max_step(&self) -> f64 {
        self.max_speed * self.slot_len
    }

    /// Carrier wavelength in meters.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    /// Free-space power gain at 1 m: (lambda / 4 pi)^2.
    pub fn pathloss_ref(&self) -> f64 {
        let x = self.wavelength() / (4.0 * PI);
        x * x
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.num_uavs == 0 || self.num_users == 0 {
            return Err(ScenarioError::InvalidConfig(
                "need at least one UAV and one user",
            ));
        }
        if self.tx_antennas == 0 || self.rx_antennas == 0 || self.streams == 0 {
            return Err(ScenarioError::InvalidConfig(
                "antenna/stream counts must be >= 1",
            ));
        }
        if self.streams > self.tx_antennas.min(self.rx_antennas) {
            return Err(ScenarioError::InvalidConfig(
                "streams exceed min(tx, rx) antennas",
            ));
        }
        if !(self.power_budget > 0.0) || !(self.noise_user > 0.0) || !(self.noise_eave > 0.0) {
            return Err(ScenarioError::InvalidConfig(
                "powers must be strictly positive",
            ));
        }
        if !(self.carrier_freq > 0.0) || !(self.slot_len > 0.0) || !(self.max_speed >= 0.0) {
            return Err(ScenarioError::InvalidConfig(
                "carrier, slot length, speed out of range",
            ));
        }
        if self.horizon == 0 {
            return Err(ScenarioError::InvalidConfig("horizon must be >= 1 slot"));
        }
        Ok(())
    }
}

/// Where the ground nodes sit.
#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    /// Users and eavesdroppers drawn uniformly in the rectangle
    /// `[x0, x1] x [y0, y1]` from the scenario seed.
    UniformArea { x: (f64, f64), y: (f64, f64) },
    /// Explicit coordinates; lengths must match the configured counts.
    Explicit {
        users: Vec<[f64; 2]>,
        eaves: Vec<[f64; 2]>,
    },
}

/// Full scenario specification: constants, placement, UAV endpoints, seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub constants: SystemConstants,
    pub placement: Placement,
    /// Per-UAV start positions q0 (x, y, altitude).
    pub uav_start: Vec<[f64; 3]>,
    /// Per-UAV terminal positions qF.
    pub uav_terminal: Vec<[f64; 3]>,
    pub seed: u64,
}

/// Materialized network state. Ground locations and association are fixed for
/// the episode; UAV positions move via [`Scenario::apply_move`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub constants: SystemConstants,
    pub user_locs: Vec<[f64; 2]>,
    pub eave_locs: Vec<[f64; 2]>,
    pub uav_pos: Vec<[f64; 3]>,
    pub uav_start: Vec<[f64; 3]>,
    pub uav_terminal: Vec<[f64; 3]>,
    /// UAV index serving each user.
    pub serving: Vec<usize>,
    /// Users served by each UAV (sorted global indices).
    pub association: Vec<Vec<usize>>,
    pub seed: u64,
}

/// Channels for one time slot: `user[u][k]` and `eave[u][i]` are N x M
/// matrices mapping the transmit vector of UAV `u` to the receive vector of
/// the given node.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub user: Vec<Vec<ComplexMatrix>>,
    pub eave: Vec<Vec<ComplexMatrix>>,
}

impl ChannelSet {
    pub fn num_uavs(&self) -> usize {
        self.user.len()
    }

    pub fn num_users(&self) -> usize {
        self.user.first().map_or(0, Vec::len)
    }

    pub fn num_eaves(&self) -> usize {
        self.eave.first().map_or(0, Vec::len)
    }
}

/// Outcome of one UAV move: the new position plus violation flags consumed by
/// the reward penalties. Violations are flagged, never thrown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub position: [f64; 3],
    /// Requested distance beyond the per-slot cap (pre-clipping excess).
    pub step_excess: f64,
    pub clipped: bool,
}

/// Place ground nodes, put UAVs at their start points, and associate each
/// user with its nearest UAV (ties to the lower UAV index).
pub fn init_scenario(config: &ScenarioConfig) -> Result<Scenario, ScenarioError> {
    config.constants.validate()?;
    let c = &config.constants;
    if config.uav_start.len() != c.num_uavs || config.uav_terminal.len() != c.num_uavs {
        return Err(ScenarioError::InvalidConfig("UAV endpoint count mismatch"));
    }
    for p in config.uav_start.iter().chain(config.uav_terminal.iter()) {
        if !(p[2] > 0.0) {
            return Err(ScenarioError::InvalidConfig("UAV altitude must be positive"));
        }
    }

    let (user_locs, eave_locs) = match &config.placement {
        Placement::UniformArea { x, y } => {
            if !(x.1 > x.0) || !(y.1 > y.0) {
                return Err(ScenarioError::InvalidConfig("area bounds must be non-empty"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, PLACEMENT_TAG));
            let draw = |n: usize, rng: &mut ChaCha8Rng| -> Vec<[f64; 2]> {
                (0..n)
                    .map(|_| {
                        let px = rng.random_range(x.0..x.1);
                        let py = rng.random_range(y.0..y.1);
                        [px, py]
                    })
                    .collect()
            };
            let users = draw(c.num_users, &mut rng);
            let eaves = draw(c.num_eaves, &mut rng);
            (users, eaves)
        }
        Placement::Explicit { users, eaves } => {
            if users.len() != c.num_users || eaves.len() != c.num_eaves {
                return Err(ScenarioError::InvalidConfig(
                    "explicit coordinate count mismatch",
                ));
            }
            (users.clone(), eaves.clone())
        }
    };

    let mut serving = Vec::with_capacity(c.num_users);
    let mut association = vec![Vec::new(); c.num_uavs];
    for (k, loc) in user_locs.iter().enumerate() {
        let mut best = 0usize;
        let mut best_d2 = f64::INFINITY;
        for (u, q) in config.uav_start.iter().enumerate() {
            let d2 = dist3_sq(q, loc);
            if d2 < best_d2 {
                best_d2 = d2;
                best = u;
            }
        }
        serving.push(best);
        association[best].push(k);
    }

    Ok(Scenario {
        constants: config.constants.clone(),
        user_locs,
        eave_locs,
        uav_pos: config.uav_start.clone(),
        uav_start: config.uav_start.clone(),
        uav_terminal: config.uav_terminal.clone(),
        serving,
        association,
        seed: config.seed,
    })
}

const PLACEMENT_TAG: u64 = 0x706c_6163;
const CHANNEL_TAG: u64 = 0x6368_616e;

/// Draw the full channel set for slot `t` at the scenario's current UAV
/// positions. Pure in `(scenario, t, seed)`: the fast-fading stream is keyed
/// by the seed and slot index, so identical inputs give identical channels.
pub fn gen_channels(scenario: &Scenario, t: usize, seed: u64) -> Result<ChannelSet, ScenarioError> {
    let c = &scenario.constants;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(
        seed,
        CHANNEL_TAG ^ (t as u64).wrapping_mul(0x1000_0001),
    ));

    let mut user = Vec::with_capacity(c.num_uavs);
    let mut eave = Vec::with_capacity(c.num_uavs);
    for (u, q) in scenario.uav_pos.iter().enumerate() {
        let mut per_user = Vec::with_capacity(c.num_users);
        for loc in &scenario.user_locs {
            per_user.push(link_channel(c, u, q, loc, &mut rng)?);
        }
        user.push(per_user);
        let mut per_eave = Vec::with_capacity(c.num_eaves);
        for loc in &scenario.eave_locs {
            per_eave.push(link_channel(c, u, q, loc, &mut rng)?);
        }
        eave.push(per_eave);
    }
    Ok(ChannelSet { user, eave })
}

fn link_channel(
    c: &SystemConstants,
    uav_index: usize,
    uav: &[f64; 3],
    ground: &[f64; 2],
    rng: &mut ChaCha8Rng,
) -> Result<ComplexMatrix, ScenarioError> {
    let dx = ground[0] - uav[0];
    let dy = ground[1] - uav[1];
    let dz = -uav[2];
    let dist = (dx * dx + dy * dy + dz * dz).sqrt();
    if dist < MIN_LINK_DISTANCE {
        return Err(ScenarioError::DegenerateGeometry {
            uav: uav_index,
            distance: dist,
        });
    }

    // Both arrays lie along the x axis; the steering phase depends on the
    // direction cosine between the array axis and the line of sight.
    let cos_dep = dx / dist;
    let cos_arr = -dx / dist;
    let a_tx = steering_vector(c.tx_antennas, c.antenna_spacing, cos_dep);
    let a_rx = steering_vector(c.rx_antennas, c.antenna_spacing, cos_arr);

    let pl = c.pathloss_ref() * dist.powf(-c.pathloss_exp);
    let amp = pl.sqrt();
    let (los_w, nlos_w) = if c.rician_kappa.is_infinite() {
        (1.0, 0.0)
    } else {
        let k = c.rician_kappa;
        ((k / (1.0 + k)).sqrt(), (1.0 / (1.0 + k)).sqrt())
    };

    let n = c.rx_antennas;
    let m = c.tx_antennas;
    let mut data = Vec::with_capacity(n * m);
    let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
    for r in 0..n {
        for col in 0..m {
            let los = a_rx[r] * a_tx[col].conj();
            // Scatter is always drawn so the stream position is independent
            // of kappa.
            let gr: f64 = rng.sample(StandardNormal);
            let gi: f64 = rng.sample(StandardNormal);
            let scatter = C64::new(gr, gi) * inv_sqrt2;
            data.push((los * los_w + scatter * nlos_w) * amp);
        }
    }
    Ok(ComplexMatrix::new(n, m, data).expect("channel entries are finite"))
}

/// Unit-modulus ULA steering vector for `n` elements at `spacing` wavelengths
/// and the given direction cosine.
pub fn steering_vector(n: usize, spacing: f64, cos_angle: f64) -> Vec<C64> {
    (0..n)
        .map(|i| {
            let phase = 2.0 * PI * spacing * i as f64 * cos_angle;
            C64::new(phase.cos(), phase.sin())
        })
        .collect()
}

/// Candidate next position for UAV `u` moving `distance` meters along heading
/// `heading` (radians, planar). Displacement beyond the per-slot cap is
/// clipped and flagged; altitude is held constant.
pub fn step_uav(scenario: &Scenario, u: usize, distance: f64, heading: f64) -> StepOutcome {
    let cap = scenario.constants.max_step();
    let requested = distance.max(0.0);
    let effective = requested.min(cap);
    let q = scenario.uav_pos[u];
    StepOutcome {
        position: [
            q[0] + effective * heading.cos(),
            q[1] + effective * heading.sin(),
            q[2],
        ],
        step_excess: (requested - cap).max(0.0),
        clipped: requested > cap,
    }
}

impl Scenario {
    /// Commit a move produced by [`step_uav`].
    pub fn apply_move(&mut self, u: usize, outcome: &StepOutcome) {
        self.uav_pos[u] = outcome.position;
    }

    /// Reset UAVs to their start positions.
    pub fn reset_uavs(&mut self) {
        self.uav_pos = self.uav_start.clone();
    }
}

/// Terminal-point violation: sum over UAVs of the distance beyond the final
/// step cap, `max(0, ||q_u - q_u^F|| - D)`.
pub fn terminal_violation(scenario: &Scenario) -> f64 {
    let cap = scenario.constants.max_step();
    scenario
        .uav_pos
        .iter()
        .zip(scenario.uav_terminal.iter())
        .map(|(q, qf)| (dist3(q, qf) - cap).max(0.0))
        .sum()
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn dist3_sq(uav: &[f64; 3], ground: &[f64; 2]) -> f64 {
    let dx = uav[0] - ground[0];
    let dy = uav[1] - ground[1];
    dx * dx + dy * dy + uav[2] * uav[2]
}

/// splitmix64-style seed mixing for independent substreams.
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn test_constants() -> SystemConstants {
        SystemConstants {
            num_uavs: 2,
            num_users: 8,
            num_eaves: 2,
            tx_antennas: 4,
            rx_antennas: 2,
            streams: 2,
            power_budget: dbm_to_watts(3.0),
            noise_user: dbm_to_watts(-80.0),
            noise_eave: dbm_to_watts(-80.0),
            pathloss_exp: 3.5,
            carrier_freq: 28e9,
            antenna_spacing: 0.5,
            rician_kappa: 10.0,
            slot_len: 0.1,
            horizon: 10,
            max_speed: 20.0,
        }
    }

    fn area_config(seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            constants: test_constants(),
            placement: Placement::UniformArea {
                x: (0.0, 500.0),
                y: (0.0, 500.0),
            },
            uav_start: vec![[125.0, 250.0, 100.0], [375.0, 250.0, 100.0]],
            uav_terminal: vec![[125.0, 250.0, 100.0], [375.0, 250.0, 100.0]],
            seed,
        }
    }

    #[test]
    fn init_scenario_is_deterministic() {
        let cfg = area_config(7);
        let a = init_scenario(&cfg).unwrap();
        let b = init_scenario(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn every_user_served_by_exactly_one_uav() {
        let s = init_scenario(&area_config(7)).unwrap();
        let mut seen = vec![0usize; s.constants.num_users];
        for users in &s.association {
            for &k in users {
                seen[k] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        for (k, &u) in s.serving.iter().enumerate() {
            assert!(s.association[u].contains(&k));
        }
    }

    #[test]
    fn explicit_single_user_association() {
        let mut c = test_constants();
        c.num_uavs = 1;
        c.num_users = 1;
        c.num_eaves = 1;
        let cfg = ScenarioConfig {
            constants: c,
            placement: Placement::Explicit {
                users: vec![[10.0, 20.0]],
                eaves: vec![[100.0, 100.0]],
            },
            uav_start: vec![[0.0, 0.0, 50.0]],
            uav_terminal: vec![[0.0, 0.0, 50.0]],
            seed: 1,
        };
        let s = init_scenario(&cfg).unwrap();
        assert_eq!(s.association, vec![vec![0]]);
        assert_eq!(s.serving, vec![0]);
    }

    #[test]
    fn invalid_counts_rejected() {
        let mut cfg = area_config(1);
        cfg.uav_start.pop();
        assert!(matches!(
            init_scenario(&cfg),
            Err(ScenarioError::InvalidConfig(_))
        ));
    }

    #[test]
    fn channels_have_expected_shape_and_are_reproducible() {
        let s = init_scenario(&area_config(3)).unwrap();
        let h1 = gen_channels(&s, 0, 42).unwrap();
        let h2 = gen_channels(&s, 0, 42).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(h1.user.len(), 2);
        assert_eq!(h1.user[0].len(), 8);
        assert_eq!(h1.eave[0].len(), 2);
        assert_eq!(h1.user[0][0].rows(), 2);
        assert_eq!(h1.user[0][0].cols(), 4);
        let h3 = gen_channels(&s, 1, 42).unwrap();
        assert_ne!(h1, h3, "different slots draw different fading");
    }

    #[test]
    fn pure_los_channel_has_rank_one() {
        let mut cfg = area_config(5);
        cfg.constants.rician_kappa = f64::INFINITY;
        let s = init_scenario(&cfg).unwrap();
        let h = gen_channels(&s, 0, 9).unwrap();
        let m = &h.user[0][0];
        // Rank 1 <=> the Gram has a single nonzero eigenvalue.
        let eig = m.gram().dominant_eigvecs(2).unwrap();
        assert!(eig.values[0] > 0.0);
        assert!(eig.values[1] <= 1e-10 * eig.values[0]);
    }

    #[test]
    fn pure_los_pathloss_follows_distance_law() {
        let mut c = test_constants();
        c.num_uavs = 1;
        c.num_users = 2;
        c.num_eaves = 0;
        c.rician_kappa = f64::INFINITY;
        let cfg = ScenarioConfig {
            constants: c,
            placement: Placement::Explicit {
                users: vec![[30.0, 0.0], [60.0, 0.0]],
                eaves: vec![],
            },
            uav_start: vec![[0.0, 0.0, 40.0]],
            uav_terminal: vec![[0.0, 0.0, 40.0]],
            seed: 0,
        };
        let s = init_scenario(&cfg).unwrap();
        let h = gen_channels(&s, 0, 1).unwrap();
        let e_near = h.user[0][0].fro_norm_sq();
        let e_far = h.user[0][1].fro_norm_sq();
        // d1 = 50, d2 = sqrt(60^2 + 40^2); energy ratio = (d2/d1)^(-3.5).
        let d1 = 50.0f64;
        let d2 = (60.0f64 * 60.0 + 40.0 * 40.0).sqrt();
        let expected = (d2 / d1).powf(-3.5);
        let got = e_far / e_near;
        assert!(
            (got - expected).abs() < 1e-9 * expected,
            "pathloss ratio {got:.6e} vs expected {expected:.6e}"
        );
        assert!(e_far < e_near, "energy must decrease with distance");
    }

    #[test]
    fn doubling_distance_scales_energy_by_pathloss_exponent() {
        let mut c = test_constants();
        c.num_uavs = 1;
        c.num_users = 1;
        c.num_eaves = 0;
        c.rician_kappa = f64::INFINITY;
        let mk = |alt: f64| ScenarioConfig {
            constants: c.clone(),
            placement: Placement::Explicit {
                users: vec![[0.0, 0.0]],
                eaves: vec![],
            },
            uav_start: vec![[0.0, 0.0, alt]],
            uav_terminal: vec![[0.0, 0.0, alt]],
            seed: 0,
        };
        let near = init_scenario(&mk(100.0)).unwrap();
        let far = init_scenario(&mk(200.0)).unwrap();
        let e_near = gen_channels(&near, 0, 1).unwrap().user[0][0].fro_norm_sq();
        let e_far = gen_channels(&far, 0, 1).unwrap().user[0][0].fro_norm_sq();
        let ratio = e_far / e_near;
        let expected = 2.0f64.powf(-3.5);
        assert!((ratio - expected).abs() < 1e-12 * expected.max(1.0));
    }

    #[test]
    fn degenerate_geometry_is_an_error() {
        let mut c = test_constants();
        c.num_uavs = 1;
        c.num_users = 1;
        c.num_eaves = 0;
        let cfg = ScenarioConfig {
            constants: c,
            placement: Placement::Explicit {
                users: vec![[0.0, 0.0]],
                eaves: vec![],
            },
            uav_start: vec![[0.0, 0.0, 0.5]],
            uav_terminal: vec![[0.0, 0.0, 0.5]],
            seed: 0,
        };
        let s = init_scenario(&cfg).unwrap();
        assert!(matches!(
            gen_channels(&s, 0, 0),
            Err(ScenarioError::DegenerateGeometry { .. })
        ));
    }

    #[test]
    fn steering_vector_energy_equals_element_count() {
        for n in [1usize, 2, 4, 8] {
            let a = steering_vector(n, 0.5, 0.37);
            let e: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            assert!((e - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn step_uav_zero_move_is_identity() {
        let s = init_scenario(&area_config(2)).unwrap();
        let out = step_uav(&s, 0, 0.0, 1.234);
        assert_eq!(out.position, s.uav_pos[0]);
        assert_eq!(out.step_excess, 0.0);
        assert!(!out.clipped);
    }

    #[test]
    fn step_uav_full_step_at_cap_is_accepted() {
        let s = init_scenario(&area_config(2)).unwrap();
        // D = 20 m/s * 0.1 s = 2 m.
        let out = step_uav(&s, 0, 2.0, 0.0);
        assert!(!out.clipped);
        assert_eq!(out.step_excess, 0.0);
        assert!((out.position[0] - (s.uav_pos[0][0] + 2.0)).abs() < 1e-12);
        assert_eq!(out.position[2], s.uav_pos[0][2], "altitude held constant");
    }

    #[test]
    fn step_uav_clips_and_flags_excess() {
        let s = init_scenario(&area_config(2)).unwrap();
        let out = step_uav(&s, 0, 5.0, 0.0);
        assert!(out.clipped);
        assert!((out.step_excess - 3.0).abs() < 1e-12);
        let moved = out.position[0] - s.uav_pos[0][0];
        assert!((moved - 2.0).abs() < 1e-12, "displacement clipped to cap");
    }

    #[test]
    fn step_never_exceeds_cap() {
        let s = init_scenario(&area_config(2)).unwrap();
        let cap = s.constants.max_step();
        for i in 0..50 {
            let dist = i as f64 * 0.37;
            let heading = i as f64;
            let out = step_uav(&s, 0, dist, heading);
            let dx = out.position[0] - s.uav_pos[0][0];
            let dy = out.position[1] - s.uav_pos[0][1];
            assert!((dx * dx + dy * dy).sqrt() <= cap + 1e-12);
        }
    }

    #[test]
    fn terminal_violation_examples() {
        let mut s = init_scenario(&area_config(2)).unwrap();
        assert_eq!(terminal_violation(&s), 0.0);
        let cap = s.constants.max_step();
        // Exactly at the cap: still zero.
        s.uav_pos[0][0] = s.uav_terminal[0][0] + cap;
        assert_eq!(terminal_violation(&s), 0.0);
        // One meter beyond: violation 1 for a single UAV.
        s.uav_pos[0][0] = s.uav_terminal[0][0] + cap + 1.0;
        assert!((terminal_violation(&s) - 1.0).abs() < 1e-12);
    }
}
