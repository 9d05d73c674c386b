//! Brute-force references for small instances.
//!
//! Two oracles: random-search beamforming (uniform directions on the complex
//! sphere crossed with a power-split grid) and exhaustive trajectory
//! enumeration on a per-slot move grid. Both are meant for tiny instances
//! and frozen-seed fixtures that competitiveness tests compare against.
//!
//! The module also carries an independent scalar re-implementation of the
//! rate model for single-antenna single-stream receivers. It shares no code
//! with the matrix rate path, which makes it usable as an equivalence oracle
//! for `rates::compute_rates`; the beamforming search scans with it and then
//! re-evaluates its winner through the matrix path.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[allow(unused_imports)]
use num_traits::Float;

use crate::hnet::allocate_common;
use crate::linalg::{C64, ComplexMatrix};
use crate::rates::{compute_rates, BeamformingSolution, RatesError, Topology};
use crate::scenario::{gen_channels, ChannelSet, Scenario, ScenarioError, SystemConstants};

/// Hard cap on the enumerated trajectory search space.
pub const MAX_SEARCH_STATES: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// The fast scalar path requires single-antenna receivers, single
    /// streams, and one UAV.
    UnsupportedShape(&'static str),
    /// Enumerated trajectory space exceeds [`MAX_SEARCH_STATES`].
    SearchSpaceTooLarge { states: f64 },
    /// No move sequence satisfies the terminal constraint within the horizon.
    NoFeasiblePath,
    Rates(RatesError),
    Scenario(ScenarioError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::UnsupportedShape(msg) => write!(f, "unsupported shape: {msg}"),
            OracleError::SearchSpaceTooLarge { states } => {
                write!(f, "search space too large ({states:.3e} states)")
            }
            OracleError::NoFeasiblePath => write!(f, "terminal constraint unreachable"),
            OracleError::Rates(e) => write!(f, "{e}"),
            OracleError::Scenario(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OracleError {}

impl From<RatesError> for OracleError {
    fn from(e: RatesError) -> Self {
        OracleError::Rates(e)
    }
}

impl From<ScenarioError> for OracleError {
    fn from(e: ScenarioError) -> Self {
        OracleError::Scenario(e)
    }
}

/// Outcome of a brute-force search.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Best total secrecy found, bits/s/Hz.
    pub best_value: f64,
    /// The solution attaining it (re-evaluated through the matrix rate path).
    pub best_solution: BeamformingSolution,
    pub samples_evaluated: u64,
    pub seed: u64,
}

/// Outcome of the exhaustive trajectory search.
#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    /// Best cumulative secrecy over the horizon.
    pub best_value: f64,
    /// Per-slot UAV positions along the best path (length horizon + 1,
    /// including the start).
    pub best_path: Vec<Vec<[f64; 3]>>,
    pub states_evaluated: u64,
}

// ── independent scalar rate path (N = 1, d = 1) ────────────────────────────

/// Channel rows as complex vectors: `user[u][k]` and `eave[u][i]` of length M.
struct ScalarChannels {
    user: Vec<Vec<Vec<C64>>>,
    eave: Vec<Vec<Vec<C64>>>,
}

fn scalar_channels(channels: &ChannelSet) -> Result<ScalarChannels, OracleError> {
    let row_of = |m: &ComplexMatrix| -> Result<Vec<C64>, OracleError> {
        if m.rows() != 1 {
            return Err(OracleError::UnsupportedShape("receive antennas must be 1"));
        }
        Ok(m.entries().to_vec())
    };
    let mut user = Vec::with_capacity(channels.user.len());
    for per in &channels.user {
        user.push(per.iter().map(&row_of).collect::<Result<Vec<_>, _>>()?);
    }
    let mut eave = Vec::with_capacity(channels.eave.len());
    for per in &channels.eave {
        eave.push(per.iter().map(&row_of).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(ScalarChannels { user, eave })
}

fn col_of(m: &ComplexMatrix) -> Result<Vec<C64>, OracleError> {
    if m.cols() != 1 {
        return Err(OracleError::UnsupportedShape("streams must be 1"));
    }
    Ok(m.entries().to_vec())
}

#[inline]
fn forward_power(row: &[C64], col: &[C64]) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for (h, w) in row.iter().zip(col.iter()) {
        acc += h * w;
    }
    acc.norm_sqr()
}

#[inline]
fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / core::f64::consts::LN_2
}

/// Scalar values mirroring the full rate report on N = 1, d = 1 instances.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarRates {
    pub common_user: Vec<f64>,
    pub common_min: Vec<f64>,
    pub private_user: Vec<f64>,
    pub private_eave: Vec<Vec<f64>>,
    pub common_eave: Vec<Vec<f64>>,
    pub secrecy: Vec<f64>,
    pub total_secrecy: f64,
}

/// Independent scalar re-implementation of the rate model for N = 1, d = 1:
/// direct `|h^H w|^2 / (interference + noise)` arithmetic on channel rows,
/// sharing no code with the matrix path.
pub fn scalar_rates(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    topo: &Topology,
    constants: &SystemConstants,
) -> Result<ScalarRates, OracleError> {
    if constants.rx_antennas != 1 || constants.streams != 1 {
        return Err(OracleError::UnsupportedShape("scalar path needs N = 1, d = 1"));
    }
    let ch = scalar_channels(channels)?;
    let wc: Vec<Vec<C64>> = sol.common.iter().map(col_of).collect::<Result<Vec<_>, _>>()?;
    let wk: Vec<Vec<C64>> = sol.private.iter().map(col_of).collect::<Result<Vec<_>, _>>()?;

    let nu = constants.num_uavs;
    let nk = constants.num_users;
    let ni = constants.num_eaves;

    let mut common_user = vec![0.0; nk];
    let mut private_user = vec![0.0; nk];
    let mut private_eave = vec![vec![0.0; ni]; nk];
    let mut common_eave = vec![vec![0.0; ni]; nu];

    for k in 0..nk {
        let u = topo.serving[k];
        let row = &ch.user[u][k];
        let mut cross = 0.0;
        for v in 0..nu {
            if v == u {
                continue;
            }
            for &j in &topo.association[v] {
                cross += forward_power(&ch.user[v][k], &wk[j]);
            }
        }
        let mut own_sum = 0.0;
        for &l in &topo.association[u] {
            own_sum += forward_power(row, &wk[l]);
        }
        let own = forward_power(row, &wk[k]);
        let noise = constants.noise_user;
        common_user[k] = log2_1p(forward_power(row, &wc[u]) / (noise + cross + own_sum));
        private_user[k] = log2_1p(own / (noise + cross + (own_sum - own)));
    }

    for u in 0..nu {
        for i in 0..ni {
            let row = &ch.eave[u][i];
            let mut cross = 0.0;
            for v in 0..nu {
                if v == u {
                    continue;
                }
                for &j in &topo.association[v] {
                    cross += forward_power(&ch.eave[v][i], &wk[j]);
                }
            }
            let mut own_sum = 0.0;
            for &l in &topo.association[u] {
                own_sum += forward_power(row, &wk[l]);
            }
            let noise = constants.noise_eave;
            common_eave[u][i] = log2_1p(forward_power(row, &wc[u]) / (noise + cross + own_sum));
            for &k in &topo.association[u] {
                let own = forward_power(row, &wk[k]);
                private_eave[k][i] = log2_1p(own / (noise + cross + (own_sum - own)));
            }
        }
    }

    let common_min: Vec<f64> = topo
        .association
        .iter()
        .map(|users| {
            users
                .iter()
                .map(|&k| common_user[k])
                .fold(f64::INFINITY, f64::min)
        })
        .map(|m| if m.is_finite() { m } else { 0.0 })
        .collect();

    let mut secrecy = vec![0.0; nk];
    let mut total = 0.0;
    for k in 0..nk {
        let worst = private_eave[k].iter().copied().fold(0.0, f64::max);
        secrecy[k] = sol.common_alloc[k] + (private_user[k] - worst).max(0.0);
        total += secrecy[k];
    }

    Ok(ScalarRates {
        common_user,
        common_min,
        private_user,
        private_eave,
        common_eave,
        secrecy,
        total_secrecy: total,
    })
}

// ── random-search beamforming oracle ───────────────────────────────────────

fn random_unit_direction(m: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..m)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.iter().map(|z| z / norm).collect();
        }
    }
}

/// Total secrecy of a direction tuple under split `alpha`, scanned with
/// precomputed channel/direction inner powers. `pc_*` are common-direction
/// powers, `pk_*[r][j]` private-direction powers at receiver `r`.
#[allow(clippy::too_many_arguments)]
fn scan_value(
    alpha: f64,
    power: f64,
    nk: usize,
    ni: usize,
    noise_user: f64,
    noise_eave: f64,
    pc_user: &[f64],
    pk_user: &[Vec<f64>],
    pc_eave: &[f64],
    pk_eave: &[Vec<f64>],
) -> f64 {
    let p_c = alpha * power;
    let p_k = (1.0 - alpha) * power / nk as f64;

    let mut min_common = f64::INFINITY;
    for k in 0..nk {
        let own_sum: f64 = pk_user[k].iter().map(|&p| p_k * p).sum();
        let rate = log2_1p(p_c * pc_user[k] / (noise_user + own_sum));
        min_common = min_common.min(rate);
    }
    let mut worst_common_eave: f64 = 0.0;
    for i in 0..ni {
        let own_sum: f64 = pk_eave[i].iter().map(|&p| p_k * p).sum();
        let rate = log2_1p(p_c * pc_eave[i] / (noise_eave + own_sum));
        worst_common_eave = worst_common_eave.max(rate);
    }
    let mut total = (min_common - worst_common_eave).max(0.0);

    for k in 0..nk {
        let own = p_k * pk_user[k][k];
        let others: f64 = pk_user[k]
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &p)| p_k * p)
            .sum();
        let rate = log2_1p(own / (noise_user + others));
        let mut worst: f64 = 0.0;
        for i in 0..ni {
            let own_e = p_k * pk_eave[i][k];
            let others_e: f64 = pk_eave[i]
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &p)| p_k * p)
                .sum();
            worst = worst.max(log2_1p(own_e / (noise_eave + others_e)));
        }
        total += (rate - worst).max(0.0);
    }
    total
}

/// Power-split grid `{0, 0.1, ..., 1}`.
pub fn alpha_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Random search over unit-norm beamformer tuples and the given power
/// splits (use [`alpha_grid`] for the full grid, or a single value to pit
/// directions against a solver at a fixed split) for a single-UAV,
/// single-antenna-receiver instance. The scan runs on the scalar rate path;
/// the winner is materialized as a full solution, its common budget
/// allocated, and its value re-evaluated through the matrix rate path
/// (which the reported `best_value` comes from).
pub fn brute_force_beamform(
    channels: &ChannelSet,
    topo: &Topology,
    constants: &SystemConstants,
    n_samples: u64,
    splits: &[f64],
    seed: u64,
) -> Result<OracleResult, OracleError> {
    if constants.num_uavs != 1 {
        return Err(OracleError::UnsupportedShape("search needs exactly one UAV"));
    }
    if constants.rx_antennas != 1 || constants.streams != 1 {
        return Err(OracleError::UnsupportedShape("search needs N = 1, d = 1"));
    }
    let nk = constants.num_users;
    let ni = constants.num_eaves;
    let m = constants.tx_antennas;
    if splits.is_empty() {
        return Err(OracleError::UnsupportedShape("need at least one power split"));
    }
    let ch = scalar_channels(channels)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let mut best_dirs: (Vec<C64>, Vec<Vec<C64>>) = (Vec::new(), Vec::new());
    let mut best_alpha = 0.0;
    let mut evaluated = 0u64;

    for _ in 0..n_samples {
        let dir_c = random_unit_direction(m, &mut rng);
        let dir_k: Vec<Vec<C64>> = (0..nk).map(|_| random_unit_direction(m, &mut rng)).collect();

        let pc_user: Vec<f64> = (0..nk)
            .map(|k| forward_power(&ch.user[0][k], &dir_c))
            .collect();
        let pk_user: Vec<Vec<f64>> = (0..nk)
            .map(|k| {
                (0..nk)
                    .map(|j| forward_power(&ch.user[0][k], &dir_k[j]))
                    .collect()
            })
            .collect();
        let pc_eave: Vec<f64> = (0..ni)
            .map(|i| forward_power(&ch.eave[0][i], &dir_c))
            .collect();
        let pk_eave: Vec<Vec<f64>> = (0..ni)
            .map(|i| {
                (0..nk)
                    .map(|j| forward_power(&ch.eave[0][i], &dir_k[j]))
                    .collect()
            })
            .collect();

        for &alpha in splits {
            let value = scan_value(
                alpha,
                constants.power_budget,
                nk,
                ni,
                constants.noise_user,
                constants.noise_eave,
                &pc_user,
                &pk_user,
                &pc_eave,
                &pk_eave,
            );
            evaluated += 1;
            if value > best {
                best = value;
                best_dirs = (dir_c.clone(), dir_k.clone());
                best_alpha = alpha;
            }
        }
    }

    // Materialize the winner and push it through the matrix rate path.
    let mut sol = BeamformingSolution::zeros(constants);
    let p_c = (best_alpha * constants.power_budget).sqrt();
    let p_k = ((1.0 - best_alpha) * constants.power_budget / nk as f64).sqrt();
    let scaled_c: Vec<C64> = best_dirs.0.iter().map(|z| z * p_c).collect();
    sol.common[0] = ComplexMatrix::new(m, 1, scaled_c).expect("finite direction");
    for k in 0..nk {
        let scaled: Vec<C64> = best_dirs.1[k].iter().map(|z| z * p_k).collect();
        sol.private[k] = ComplexMatrix::new(m, 1, scaled).expect("finite direction");
    }
    let report = compute_rates(channels, &sol, topo, constants)?;
    sol.common_alloc = allocate_common(&report, topo);
    let report = compute_rates(channels, &sol, topo, constants)?;

    Ok(OracleResult {
        best_value: report.total_secrecy,
        best_solution: sol,
        samples_evaluated: evaluated,
        seed,
    })
}

// ── exhaustive trajectory oracle ───────────────────────────────────────────

/// Per-slot move grid: staying put, plus {D/2, D} along 8 compass headings.
pub fn move_grid(max_step: f64) -> Vec<(f64, f64)> {
    let mut moves = vec![(0.0, 0.0)];
    for dir in 0..8 {
        let heading = dir as f64 * core::f64::consts::FRAC_PI_4;
        moves.push((max_step / 2.0, heading));
        moves.push((max_step, heading));
    }
    moves
}

/// Exhaustive enumeration of per-slot UAV moves over `horizon` slots,
/// pruning branches that cannot reach the terminal points in the remaining
/// steps. Per-slot secrecy comes from `beamform` evaluated on channels drawn
/// at the visited positions; states are deduplicated on a position lattice
/// so the search is a dynamic program rather than a pure tree walk.
pub fn exhaustive_trajectory(
    scenario: &Scenario,
    horizon: usize,
    channel_seed: u64,
    beamform: &mut dyn FnMut(&ChannelSet) -> Result<f64, OracleError>,
) -> Result<TrajectoryResult, OracleError> {
    let nu = scenario.constants.num_uavs;
    let moves = move_grid(scenario.constants.max_step());
    let branching = (moves.len() as f64).powi(nu as i32);
    let states = branching.powi(horizon as i32);
    if states > MAX_SEARCH_STATES {
        return Err(OracleError::SearchSpaceTooLarge { states });
    }

    struct Search<'a> {
        scenario: Scenario,
        moves: Vec<(f64, f64)>,
        horizon: usize,
        channel_seed: u64,
        beamform: &'a mut dyn FnMut(&ChannelSet) -> Result<f64, OracleError>,
        // (slot, quantized positions) -> (value from here, best move combo)
        memo: BTreeMap<(usize, Vec<i64>), Option<(f64, usize)>>,
        states: u64,
    }

    impl Search<'_> {
        fn key(&self, positions: &[[f64; 3]]) -> Vec<i64> {
            positions
                .iter()
                .flat_map(|p| p.iter().map(|&x| (x * 1e6).round() as i64))
                .collect()
        }

        /// Positions after applying move combo `combo` (base-|moves| digits).
        fn apply(&self, positions: &[[f64; 3]], combo: usize) -> Vec<[f64; 3]> {
            let mut out = Vec::with_capacity(positions.len());
            let mut c = combo;
            for p in positions {
                let (dist, heading) = self.moves[c % self.moves.len()];
                c /= self.moves.len();
                out.push([
                    p[0] + dist * heading.cos(),
                    p[1] + dist * heading.sin(),
                    p[2],
                ]);
            }
            out
        }

        fn reachable(&self, positions: &[[f64; 3]], slots_left: usize) -> bool {
            let cap = self.scenario.constants.max_step();
            positions
                .iter()
                .zip(self.scenario.uav_terminal.iter())
                .all(|(p, t)| {
                    let dx = p[0] - t[0];
                    let dy = p[1] - t[1];
                    let dz = p[2] - t[2];
                    let dist = (dx * dx + dy * dy + dz * dz).sqrt();
                    dist <= cap * (slots_left as f64 + 1.0) + 1e-9
                })
        }

        fn solve(
            &mut self,
            slot: usize,
            positions: Vec<[f64; 3]>,
        ) -> Result<Option<f64>, OracleError> {
            if slot == self.horizon {
                let cap = self.scenario.constants.max_step();
                let ok = positions
                    .iter()
                    .zip(self.scenario.uav_terminal.iter())
                    .all(|(p, t)| {
                        let dx = p[0] - t[0];
                        let dy = p[1] - t[1];
                        let dz = p[2] - t[2];
                        (dx * dx + dy * dy + dz * dz).sqrt() <= cap + 1e-9
                    });
                return Ok(if ok { Some(0.0) } else { None });
            }
            let key = (slot, self.key(&positions));
            if let Some(hit) = self.memo.get(&key) {
                return Ok(hit.map(|(v, _)| v));
            }
            if !self.reachable(&positions, self.horizon - slot) {
                self.memo.insert(key, None);
                return Ok(None);
            }
            self.states += 1;

            self.scenario.uav_pos = positions.clone();
            let channels = gen_channels(&self.scenario, slot, self.channel_seed)?;
            let here = (self.beamform)(&channels)?;

            let mut best: Option<(f64, usize)> = None;
            let combos = self
                .moves
                .len()
                .pow(self.scenario.constants.num_uavs as u32);
            for combo in 0..combos {
                let next = self.apply(&positions, combo);
                if let Some(tail) = self.solve(slot + 1, next)? {
                    let total = here + tail;
                    if best.map_or(true, |(b, _)| total > b) {
                        best = Some((total, combo));
                    }
                }
            }
            self.memo.insert(key, best);
            Ok(best.map(|(v, _)| v))
        }
    }

    let mut search = Search {
        scenario: scenario.clone(),
        moves,
        horizon,
        channel_seed,
        beamform,
        memo: BTreeMap::new(),
        states: 0,
    };
    let start = scenario.uav_start.clone();
    let value = search
        .solve(0, start.clone())?
        .ok_or(OracleError::NoFeasiblePath)?;

    // Reconstruct the best path from the memoized moves.
    let mut path = vec![start.clone()];
    let mut positions = start;
    for slot in 0..horizon {
        let key = (slot, search.key(&positions));
        let Some(Some((_, combo))) = search.memo.get(&key) else {
            break;
        };
        positions = search.apply(&positions, *combo);
        path.push(positions.clone());
    }

    Ok(TrajectoryResult {
        best_value: value,
        best_path: path,
        states_evaluated: search.states,
    })
}

// ── seeded tiny fixture instances ──────────────────────────────────────────

/// Canonical tiny instance family for the competitiveness fixtures: one UAV,
/// one user, one eavesdropper, two transmit antennas, scalar receivers, unit
/// noise, 2 W budget, channels i.i.d. complex Gaussian from the seed.
pub fn tiny_instance(seed: u64) -> (SystemConstants, Topology, ChannelSet) {
    let constants = SystemConstants {
        num_uavs: 1,
        num_users: 1,
        num_eaves: 1,
        tx_antennas: 2,
        rx_antennas: 1,
        streams: 1,
        power_budget: 2.0,
        noise_user: 1.0,
        noise_eave: 1.0,
        pathloss_exp: 3.5,
        carrier_freq: 28e9,
        antenna_spacing: 0.5,
        rician_kappa: 10.0,
        slot_len: 0.1,
        horizon: 10,
        max_speed: 20.0,
    };
    let topo = Topology::single_uav(1);
    let mut rng = ChaCha8Rng::seed_from_u64(crate::scenario::mix_seed(seed, 0x74696e79));
    let draw = |rng: &mut ChaCha8Rng| {
        let data: Vec<C64> = (0..2)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        ComplexMatrix::new(1, 2, data).unwrap()
    };
    let channels = ChannelSet {
        user: vec![vec![draw(&mut rng)]],
        eave: vec![vec![draw(&mut rng)]],
    };
    (constants, topo, channels)
}

/// Frozen-fixture oracle for the tiny instance family: the search runs at
/// the solver's untrained power split (0.5) with a salt-separated seed, so
/// regenerated values are bit-identical to the committed fixture.
pub fn tiny_fixture_oracle(seed: u64, n_samples: u64) -> Result<OracleResult, OracleError> {
    let (constants, topo, channels) = tiny_instance(seed);
    brute_force_beamform(
        &channels,
        &topo,
        &constants,
        n_samples,
        &[0.5],
        crate::scenario::mix_seed(seed, 0x6f72_6163),
    )
}
