//! Rate model: common/private SINRs, eavesdropper rates, secrecy rates, and
//! constraint residuals for a candidate beamforming solution.
//!
//! Rates are scalar Shannon rates `log2(1 + sinr)` with SINRs built from
//! Frobenius-norm signal powers. The effective noise power per link is
//! `d * sigma^2` (one sigma^2 per stream dimension). Each UAV's common
//! message must be decodable by all of its served users, so the common rate
//! of a UAV is the minimum over its served users; eavesdroppers are scored
//! worst case (maximum over eavesdroppers) unless a designated index is
//! requested.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::ComplexMatrix;
use crate::scenario::{ChannelSet, Scenario, SystemConstants};

/// Relative tolerance allowed on the per-UAV power budget.
pub const POWER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum RatesError {
    ShapeMismatch(&'static str),
}

impl fmt::Display for RatesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatesError::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RatesError {}

/// User-to-UAV assignment, shared by the rate model and the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    /// Serving UAV per user (global user index -> UAV index).
    pub serving: Vec<usize>,
    /// Users served by each UAV.
    pub association: Vec<Vec<usize>>,
}

impl Topology {
    pub fn from_serving(num_uavs: usize, serving: Vec<usize>) -> Self {
        let mut association = vec![Vec::new(); num_uavs];
        for (k, &u) in serving.iter().enumerate() {
            association[u].push(k);
        }
        Self {
            serving,
            association,
        }
    }

    /// All users on one UAV.
    pub fn single_uav(num_users: usize) -> Self {
        Self::from_serving(1, vec![0; num_users])
    }

    pub fn num_uavs(&self) -> usize {
        self.association.len()
    }

    pub fn num_users(&self) -> usize {
        self.serving.len()
    }
}

impl Scenario {
    pub fn topology(&self) -> Topology {
        Topology {
            serving: self.serving.clone(),
            association: self.association.clone(),
        }
    }
}

/// Aux variables of the reformulated problem. All are tight SINR values when
/// produced by the solver's aux update.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxVars {
    /// Per-UAV common SINR bound (minimum over served users).
    pub upsilon_common: Vec<f64>,
    /// Per-(UAV, eavesdropper) common wiretap SINR.
    pub upsilon_eave: Vec<Vec<f64>>,
    /// Per-user private SINR.
    pub zeta_user: Vec<f64>,
    /// Per-(user, eavesdropper) private wiretap SINR.
    pub zeta_eave: Vec<Vec<f64>>,
}

impl AuxVars {
    pub fn zeros(num_uavs: usize, num_users: usize, num_eaves: usize) -> Self {
        Self {
            upsilon_common: vec![0.0; num_uavs],
            upsilon_eave: vec![vec![0.0; num_eaves]; num_uavs],
            zeta_user: vec![0.0; num_users],
            zeta_eave: vec![vec![0.0; num_eaves]; num_users],
        }
    }
}

/// Beamformers, common-rate allocations, and aux variables for one slot.
///
/// `common[u]` and `private[k]` are M x d; `common_alloc[k]` is the portion
/// of UAV `serving[k]`'s secure common budget assigned to user `k` in
/// bits/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub common: Vec<ComplexMatrix>,
    pub private: Vec<ComplexMatrix>,
    pub common_alloc: Vec<f64>,
    pub aux: AuxVars,
}

impl BeamformingSolution {
    pub fn zeros(constants: &SystemConstants) -> Self {
        let m = constants.tx_antennas;
        let d = constants.streams;
        Self {
            common: vec![ComplexMatrix::zeros(m, d); constants.num_uavs],
            private: vec![ComplexMatrix::zeros(m, d); constants.num_users],
            common_alloc: vec![0.0; constants.num_users],
            aux: AuxVars::zeros(constants.num_uavs, constants.num_users, constants.num_eaves),
        }
    }

    /// Transmit power used by UAV `u`: common beam plus its served users'
    /// private beams.
    pub fn power_used(&self, u: usize, topo: &Topology) -> f64 {
        let mut p = self.common[u].fro_norm_sq();
        for &k in &topo.association[u] {
            p += self.private[k].fro_norm_sq();
        }
        p
    }

    pub fn validate(
        &self,
        constants: &SystemConstants,
        topo: &Topology,
    ) -> Result<(), RatesError> {
        let (m, d) = (constants.tx_antennas, constants.streams);
        if self.common.len() != constants.num_uavs {
            return Err(RatesError::ShapeMismatch("common beam count"));
        }
        if self.private.len() != constants.num_users || topo.num_users() != constants.num_users {
            return Err(RatesError::ShapeMismatch("private beam count"));
        }
        if self.common_alloc.len() != constants.num_users {
            return Err(RatesError::ShapeMismatch("allocation count"));
        }
        for w in self.common.iter().chain(self.private.iter()) {
            if w.rows() != m || w.cols() != d {
                return Err(RatesError::ShapeMismatch("beamformer shape"));
            }
        }
        Ok(())
    }
}

/// All SINRs of the model, as plain ratios (not rates).
#[derive(Debug, Clone, PartialEq)]
pub struct SinrSet {
    /// Per-user SINR for decoding the serving UAV's common message.
    pub common_user: Vec<f64>,
    /// Per-user private SINR.
    pub private_user: Vec<f64>,
    /// Per-(user, eavesdropper) SINR of the eavesdropper on that private link.
    pub private_eave: Vec<Vec<f64>>,
    /// Per-(UAV, eavesdropper) SINR of the eavesdropper on the common message.
    pub common_eave: Vec<Vec<f64>>,
}

/// The scalar SINR denominators (noise plus interference power) of every
/// link, used by the solver to weigh leakage when shaping beams.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrDenominators {
    /// Per-user denominator of the common-message SINR.
    pub common_user: Vec<f64>,
    /// Per-user denominator of the private SINR.
    pub private_user: Vec<f64>,
    /// Per-(UAV, eavesdropper) denominator of the common wiretap SINR.
    pub common_eave: Vec<Vec<f64>>,
    /// Per-(user, eavesdropper) denominator of the private wiretap SINR
    /// (the eavesdropper's floor excluding that user's own beam).
    pub private_eave: Vec<Vec<f64>>,
    /// `private_user_excluding[l][k]`: user l's private denominator with
    /// beam k's contribution removed, the sensitivity of victim l to a
    /// redesign of beam k.
    pub private_user_excluding: Vec<Vec<f64>>,
}

/// Nonnegative violation magnitudes for the per-slot constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintResiduals {
    /// Per-UAV excess of allocated secure common rate over the available
    /// (nonnegative) budget.
    pub secrecy_alloc: Vec<f64>,
    /// Per-UAV transmit power beyond the budget.
    pub power: Vec<f64>,
    /// Total magnitude of negative allocations.
    pub alloc_negativity: f64,
    /// Per-UAV excess of allocated common rate over the common decodability
    /// limit (minimum common rate across served users).
    pub decodability: Vec<f64>,
}

impl ConstraintResiduals {
    pub fn max_violation(&self) -> f64 {
        let mut m = self.alloc_negativity;
        for &x in self
            .secrecy_alloc
            .iter()
            .chain(self.power.iter())
            .chain(self.decodability.iter())
        {
            if x > m {
                m = x;
            }
        }
        m
    }
}

/// Every rate quantity of one slot plus constraint residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Per-user rate for decoding the serving UAV's common message.
    pub common_user: Vec<f64>,
    /// Per-UAV common rate: minimum over served users (0 if none served).
    pub common_min: Vec<f64>,
    /// Per-user private rate.
    pub private_user: Vec<f64>,
    /// Per-(user, eavesdropper) wiretap rate on the private link.
    pub private_eave: Vec<Vec<f64>>,
    /// Per-(UAV, eavesdropper) wiretap rate on the common message.
    pub common_eave: Vec<Vec<f64>>,
    /// Per-user secrecy rate (worst-case eavesdropper).
    pub secrecy: Vec<f64>,
    /// Network objective: sum of per-user secrecy rates.
    pub total_secrecy: f64,
    pub residuals: ConstraintResiduals,
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / core::f64::consts::LN_2
}

fn check_shapes(
    channels: &ChannelSet,
    constants: &SystemConstants,
    topo: &Topology,
) -> Result<(), RatesError> {
    if channels.num_uavs() != constants.num_uavs || topo.num_uavs() != constants.num_uavs {
        return Err(RatesError::ShapeMismatch("UAV count"));
    }
    if channels.num_users() != constants.num_users {
        return Err(RatesError::ShapeMismatch("user channel count"));
    }
    if channels.num_eaves() != constants.num_eaves {
        return Err(RatesError::ShapeMismatch("eavesdropper channel count"));
    }
    for per in channels.user.iter().chain(channels.eave.iter()) {
        for h in per {
            if h.rows() != constants.rx_antennas || h.cols() != constants.tx_antennas {
                return Err(RatesError::ShapeMismatch("channel matrix shape"));
            }
        }
    }
    Ok(())
}

/// Compute every SINR of the model at the given beamformers.
pub fn compute_sinrs(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    topo: &Topology,
    constants: &SystemConstants,
) -> Result<SinrSet, RatesError> {
    Ok(link_stats(channels, sol, topo, constants)?.0)
}

/// Compute the noise-plus-interference denominators of every link.
pub fn sinr_denominators(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    topo: &Topology,
    constants: &SystemConstants,
) -> Result<SinrDenominators, RatesError> {
    Ok(link_stats(channels, sol, topo, constants)?.1)
}

fn link_stats(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    topo: &Topology,
    constants: &SystemConstants,
) -> Result<(SinrSet, SinrDenominators), RatesError> {
    check_shapes(channels, constants, topo)?;
    sol.validate(constants, topo)?;

    let nu = constants.num_uavs;
    let nk = constants.num_users;
    let ni = constants.num_eaves;
    let d = constants.streams as f64;
    let noise_user = d * constants.noise_user;
    let noise_eave = d * constants.noise_eave;

    // Signal powers ||H w||_F^2 for every (transmitter, receiver, beam).
    // p_user[u][k][j]: private beam j received at user k from UAV u.
    let mut p_user = vec![vec![vec![0.0; nk]; nk]; nu];
    let mut pc_user = vec![vec![0.0; nk]; nu];
    let mut p_eave = vec![vec![vec![0.0; nk]; ni]; nu];
    let mut pc_eave = vec![vec![0.0; ni]; nu];
    for u in 0..nu {
        for k in 0..nk {
            let h = &channels.user[u][k];
            pc_user[u][k] = h.mul(&sol.common[u]).fro_norm_sq();
            for j in 0..nk {
                p_user[u][k][j] = h.mul(&sol.private[j]).fro_norm_sq();
            }
        }
        for i in 0..ni {
            let h = &channels.eave[u][i];
            pc_eave[u][i] = h.mul(&sol.common[u]).fro_norm_sq();
            for j in 0..nk {
                p_eave[u][i][j] = h.mul(&sol.private[j]).fro_norm_sq();
            }
        }
    }

    // Cross-UAV interference at receiver r: private beams of all other UAVs.
    let cross_at_user = |k: usize, own: usize| -> f64 {
        let mut acc = 0.0;
        for v in 0..nu {
            if v == own {
                continue;
            }
            for &j in &topo.association[v] {
                acc += p_user[v][k][j];
            }
        }
        acc
    };
    let cross_at_eave = |i: usize, own: usize| -> f64 {
        let mut acc = 0.0;
        for v in 0..nu {
            if v == own {
                continue;
            }
            for &j in &topo.association[v] {
                acc += p_eave[v][i][j];
            }
        }
        acc
    };

    let mut common_user = vec![0.0; nk];
    let mut private_user = vec![0.0; nk];
    let mut private_eave = vec![vec![0.0; ni]; nk];
    let mut common_eave = vec![vec![0.0; ni]; nu];
    let mut den_common_user = vec![0.0; nk];
    let mut den_private_user = vec![0.0; nk];
    let mut den_common_eave = vec![vec![0.0; ni]; nu];
    let mut den_private_eave = vec![vec![0.0; ni]; nk];
    let mut den_user_excl = vec![vec![0.0; nk]; nk];

    for k in 0..nk {
        let u = topo.serving[k];
        let cross = cross_at_user(k, u);
        let own_sum: f64 = topo.association[u]
            .iter()
            .map(|&l| p_user[u][k][l])
            .sum();
        let own = p_user[u][k][k];
        den_common_user[k] = noise_user + cross + own_sum;
        den_private_user[k] = noise_user + cross + (own_sum - own);
        common_user[k] = pc_user[u][k] / den_common_user[k];
        private_user[k] = own / den_private_user[k];
        for j in 0..nk {
            den_user_excl[k][j] = (den_private_user[k] - p_user[u][k][j]).max(noise_user);
        }
        den_user_excl[k][k] = den_private_user[k];
    }

    for u in 0..nu {
        for i in 0..ni {
            let cross = cross_at_eave(i, u);
            let own_sum: f64 = topo.association[u]
                .iter()
                .map(|&l| p_eave[u][i][l])
                .sum();
            den_common_eave[u][i] = noise_eave + cross + own_sum;
            common_eave[u][i] = pc_eave[u][i] / den_common_eave[u][i];
            for &k in &topo.association[u] {
                let own = p_eave[u][i][k];
                let den = noise_eave + cross + (own_sum - own);
                den_private_eave[k][i] = den;
                private_eave[k][i] = own / den;
            }
        }
    }

    Ok((
        SinrSet {
            common_user,
            private_user,
            private_eave,
            common_eave,
        },
        SinrDenominators {
            common_user: den_common_user,
            private_user: den_private_user,
            common_eave: den_common_eave,
            private_eave: den_private_eave,
            private_user_excluding: den_user_excl,
        },
    ))
}

/// How the eavesdropper entering the secrecy margin is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EaveSelection {
    /// Maximum wiretap rate over all eavesdroppers (default).
    WorstCase,
    /// A designated eavesdropper index.
    Fixed(usize),
}

/// Full rate report for one slot: all rates, worst-case secrecy, residuals.
pub fn compute_rates(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    topo: &Topology,
    constants: &SystemConstants,
) -> Result<RateReport, RatesError> {
    let sinr = compute_sinrs(channels, sol, topo, constants)?;

    let common_user: Vec<f64> = sinr.common_user.iter().map(|&g| log2_1p(g)).collect();
    let private_user: Vec<f64> = sinr.private_user.iter().map(|&g| log2_1p(g)).collect();
    let private_eave: Vec<Vec<f64>> = sinr
        .private_eave
        .iter()
        .map(|row| row.iter().map(|&g| log2_1p(g)).collect())
        .collect();
    let common_eave: Vec<Vec<f64>> = sinr
        .common_eave
        .iter()
        .map(|row| row.iter().map(|&g| log2_1p(g)).collect())
        .collect();

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

    let (secrecy, total_secrecy) =
        secrecy_from_parts(&private_user, &private_eave, &sol.common_alloc, EaveSelection::WorstCase);

    let residuals = residuals_from_parts(sol, topo, constants, &common_min, &common_eave);

    Ok(RateReport {
        common_user,
        common_min,
        private_user,
        private_eave,
        common_eave,
        secrecy,
        total_secrecy,
        residuals,
    })
}

fn secrecy_from_parts(
    private_user: &[f64],
    private_eave: &[Vec<f64>],
    alloc: &[f64],
    selection: EaveSelection,
) -> (Vec<f64>, f64) {
    let per_link: Vec<f64> = private_user
        .iter()
        .enumerate()
        .map(|(k, &rk)| {
            let eave_rate = match selection {
                EaveSelection::WorstCase => private_eave[k].iter().copied().fold(0.0, f64::max),
                EaveSelection::Fixed(i) => private_eave[k].get(i).copied().unwrap_or(0.0),
            };
            alloc[k] + (rk - eave_rate).max(0.0)
        })
        .collect();
    let total = per_link.iter().sum();
    (per_link, total)
}

/// Per-link and total secrecy for a report, with the eavesdropper chosen
/// worst case or by a designated index. An absent eavesdropper (empty set or
/// out-of-range index) contributes rate 0.
pub fn secrecy_rate(
    report: &RateReport,
    sol: &BeamformingSolution,
    selection: EaveSelection,
) -> (Vec<f64>, f64) {
    secrecy_from_parts(
        &report.private_user,
        &report.private_eave,
        &sol.common_alloc,
        selection,
    )
}

fn residuals_from_parts(
    sol: &BeamformingSolution,
    topo: &Topology,
    constants: &SystemConstants,
    common_min: &[f64],
    common_eave: &[Vec<f64>],
) -> ConstraintResiduals {
    let nu = constants.num_uavs;
    let mut secrecy_alloc = vec![0.0; nu];
    let mut power = vec![0.0; nu];
    let mut decodability = vec![0.0; nu];
    // Summing equal shares reassembles the budget only up to rounding;
    // excesses below this scale are accounting dust, not violations.
    let dust = |excess: f64, scale: f64| {
        if excess <= 1e-12 * (1.0 + scale.abs()) {
            0.0
        } else {
            excess
        }
    };
    for u in 0..nu {
        let alloc_sum: f64 = topo.association[u].iter().map(|&k| sol.common_alloc[k]).sum();
        let worst_eave = common_eave[u].iter().copied().fold(0.0, f64::max);
        // The budget collapses to zero whenever the eavesdropper out-decodes
        // the users; allocating nothing is then the only feasible choice.
        let budget = (common_min[u] - worst_eave).max(0.0);
        secrecy_alloc[u] = dust((alloc_sum - budget).max(0.0), alloc_sum);
        // The feasibility contract grants POWER_TOL relative slack on the
        // budget (an exact projection reassembles P only up to rounding).
        power[u] =
            (sol.power_used(u, topo) - constants.power_budget * (1.0 + POWER_TOL)).max(0.0);
        decodability[u] = dust((alloc_sum - common_min[u]).max(0.0), alloc_sum);
    }
    let alloc_negativity = sol.common_alloc.iter().map(|&a| (-a).max(0.0)).sum();
    ConstraintResiduals {
        secrecy_alloc,
        power,
        alloc_negativity,
        decodability,
    }
}

/// Constraint residual vector at the given solution.
pub fn constraint_residuals(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    topo: &Topology,
    constants: &SystemConstants,
) -> Result<ConstraintResiduals, RatesError> {
    Ok(compute_rates(channels, sol, topo, constants)?.residuals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use alloc::vec;

    fn scalar_constants(num_users: usize, num_eaves: usize, m: usize) -> SystemConstants {
        SystemConstants {
            num_uavs: 1,
            num_users,
            num_eaves,
            tx_antennas: m,
            rx_antennas: 1,
            streams: 1,
            power_budget: 4.0,
            noise_user: 1.0,
            noise_eave: 1.0,
            pathloss_exp: 3.5,
            carrier_freq: 28e9,
            antenna_spacing: 0.5,
            rician_kappa: 10.0,
            slot_len: 0.1,
            horizon: 10,
            max_speed: 20.0,
        }
    }

    fn row(entries: &[f64]) -> ComplexMatrix {
        let data: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        ComplexMatrix::new(1, entries.len(), data).unwrap()
    }

    fn col(entries: &[f64]) -> ComplexMatrix {
        let data: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        ComplexMatrix::new(entries.len(), 1, data).unwrap()
    }

    #[test]
    fn all_zero_beamformers_give_zero_rates() {
        let c = scalar_constants(2, 1, 2);
        let topo = Topology::single_uav(2);
        let channels = ChannelSet {
            user: vec![vec![row(&[1.0, 0.3]), row(&[0.5, 0.5])]],
            eave: vec![vec![row(&[0.2, 0.1])]],
        };
        let sol = BeamformingSolution::zeros(&c);
        let r = compute_rates(&channels, &sol, &topo, &c).unwrap();
        assert!(r.common_user.iter().all(|&x| x == 0.0));
        assert!(r.private_user.iter().all(|&x| x == 0.0));
        assert_eq!(r.total_secrecy, 0.0);
        assert_eq!(r.residuals.max_violation(), 0.0);
    }

    #[test]
    fn scalar_shannon_rate() {
        // One user, no eavesdropper, unit channel, all power on the private
        // beam: R = log2(1 + P).
        let mut c = scalar_constants(1, 0, 1);
        c.power_budget = 4.0;
        let topo = Topology::single_uav(1);
        let channels = ChannelSet {
            user: vec![vec![row(&[1.0])]],
            eave: vec![vec![]],
        };
        let mut sol = BeamformingSolution::zeros(&c);
        sol.private[0] = col(&[2.0]); // ||w||^2 = P = 4
        let r = compute_rates(&channels, &sol, &topo, &c).unwrap();
        let expected = (1.0f64 + 4.0).log2();
        assert!((r.private_user[0] - expected).abs() < 1e-12);
        // No eavesdroppers: secrecy = alloc + private rate.
        assert!((r.secrecy[0] - expected).abs() < 1e-12);
        assert_eq!(r.residuals.power[0], 0.0, "power exactly at budget");
    }

    #[test]
    fn orthogonal_channels_have_no_cross_interference() {
        let c = scalar_constants(2, 0, 2);
        let topo = Topology::single_uav(2);
        let channels = ChannelSet {
            user: vec![vec![row(&[1.0, 0.0]), row(&[0.0, 1.0])]],
            eave: vec![vec![]],
        };
        let mut sol = BeamformingSolution::zeros(&c);
        sol.private[0] = col(&[1.0, 0.0]);
        sol.private[1] = col(&[0.0, 1.0]);
        let r = compute_rates(&channels, &sol, &topo, &c).unwrap();
        for k in 0..2 {
            assert!(
                (r.private_user[k] - 1.0).abs() < 1e-12,
                "log2(1 + 1/1) = 1, got {}",
                r.private_user[k]
            );
        }
    }

    #[test]
    fn secrecy_clamps_to_allocation_when_eavesdropper_wins() {
        let report = RateReport {
            common_user: vec![1.0],
            common_min: vec![1.0],
            private_user: vec![0.8],
            private_eave: vec![vec![1.5, 0.9]],
            common_eave: vec![vec![0.1, 0.2]],
            secrecy: vec![],
            total_secrecy: 0.0,
            residuals: ConstraintResiduals {
                secrecy_alloc: vec![0.0],
                power: vec![0.0],
                alloc_negativity: 0.0,
                decodability: vec![0.0],
            },
        };
        let mut sol = BeamformingSolution::zeros(&scalar_constants(1, 2, 1));
        sol.common_alloc[0] = 0.3;
        let (per, total) = secrecy_rate(&report, &sol, EaveSelection::WorstCase);
        assert_eq!(per[0], 0.3, "private margin clamps to zero");
        assert_eq!(total, 0.3);
    }

    #[test]
    fn worst_case_takes_max_then_subtracts() {
        let report = RateReport {
            common_user: vec![3.0],
            common_min: vec![3.0],
            private_user: vec![3.0],
            private_eave: vec![vec![1.0, 2.5]],
            common_eave: vec![vec![0.0, 0.0]],
            secrecy: vec![],
            total_secrecy: 0.0,
            residuals: ConstraintResiduals {
                secrecy_alloc: vec![0.0],
                power: vec![0.0],
                alloc_negativity: 0.0,
                decodability: vec![0.0],
            },
        };
        let mut sol = BeamformingSolution::zeros(&scalar_constants(1, 2, 1));
        sol.common_alloc[0] = 0.2;
        let (per, _) = secrecy_rate(&report, &sol, EaveSelection::WorstCase);
        assert!((per[0] - 0.7).abs() < 1e-15, "0.2 + (3.0 - 2.5) = 0.7");
        // Designated eavesdropper 0 instead: 0.2 + (3.0 - 1.0) = 2.2.
        let (per_fixed, _) = secrecy_rate(&report, &sol, EaveSelection::Fixed(0));
        assert!((per_fixed[0] - 2.2).abs() < 1e-15);
    }

    #[test]
    fn alloc_residual_measures_linear_excess() {
        let c = scalar_constants(1, 1, 2);
        let topo = Topology::single_uav(1);
        let channels = ChannelSet {
            user: vec![vec![row(&[1.0, 0.0])]],
            eave: vec![vec![row(&[0.0, 0.0])]],
        };
        let mut sol = BeamformingSolution::zeros(&c);
        sol.common[0] = col(&[1.0, 0.0]); // R_c = 1 (SINR 1 over noise 1)
        // Budget = R_c - R_ci = 1 - 0 = 1; allocate 1.3.
        sol.common_alloc[0] = 1.3;
        let res = constraint_residuals(&channels, &sol, &topo, &c).unwrap();
        assert!((res.secrecy_alloc[0] - 0.3).abs() < 1e-12);
        assert!((res.decodability[0] - 0.3).abs() < 1e-12);
        assert_eq!(res.alloc_negativity, 0.0);
    }

    #[test]
    fn negative_alloc_is_its_own_residual() {
        let c = scalar_constants(2, 0, 2);
        let topo = Topology::single_uav(2);
        let channels = ChannelSet {
            user: vec![vec![row(&[1.0, 0.0]), row(&[0.0, 1.0])]],
            eave: vec![vec![]],
        };
        let mut sol = BeamformingSolution::zeros(&c);
        sol.common_alloc[0] = -0.4;
        sol.common_alloc[1] = -0.1;
        let res = constraint_residuals(&channels, &sol, &topo, &c).unwrap();
        assert!((res.alloc_negativity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn scaling_own_private_beam_increases_own_sinr() {
        let c = scalar_constants(2, 1, 2);
        let topo = Topology::single_uav(2);
        let channels = ChannelSet {
            user: vec![vec![row(&[1.0, 0.4]), row(&[0.3, 0.9])]],
            eave: vec![vec![row(&[0.2, 0.2])]],
        };
        let mut sol = BeamformingSolution::zeros(&c);
        sol.private[0] = col(&[0.7, 0.1]);
        sol.private[1] = col(&[0.2, 0.8]);
        sol.common[0] = col(&[0.1, 0.1]);
        let before = compute_sinrs(&channels, &sol, &topo, &c).unwrap();
        sol.private[0] = sol.private[0].scale(1.5);
        let after = compute_sinrs(&channels, &sol, &topo, &c).unwrap();
        assert!(after.private_user[0] > before.private_user[0]);
    }

    #[test]
    fn removing_an_eavesdropper_never_decreases_secrecy() {
        let c2 = scalar_constants(2, 2, 2);
        let topo = Topology::single_uav(2);
        let channels2 = ChannelSet {
            user: vec![vec![row(&[1.0, 0.4]), row(&[0.3, 0.9])]],
            eave: vec![vec![row(&[0.6, 0.1]), row(&[0.1, 0.7])]],
        };
        let mut sol = BeamformingSolution::zeros(&c2);
        sol.private[0] = col(&[0.9, 0.0]);
        sol.private[1] = col(&[0.0, 0.9]);
        sol.common[0] = col(&[0.3, 0.3]);
        let full = compute_rates(&channels2, &sol, &topo, &c2).unwrap();

        let mut c1 = c2.clone();
        c1.num_eaves = 1;
        let channels1 = ChannelSet {
            user: channels2.user.clone(),
            eave: vec![vec![row(&[0.6, 0.1])]],
        };
        let mut sol1 = sol.clone();
        sol1.aux = AuxVars::zeros(1, 2, 1);
        let reduced = compute_rates(&channels1, &sol1, &topo, &c1).unwrap();
        for k in 0..2 {
            assert!(reduced.secrecy[k] >= full.secrecy[k] - 1e-15);
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let c = scalar_constants(1, 0, 2);
        let topo = Topology::single_uav(1);
        let channels = ChannelSet {
            user: vec![vec![row(&[1.0, 0.0, 0.0])]], // wrong M
            eave: vec![vec![]],
        };
        let sol = BeamformingSolution::zeros(&c);
        assert!(matches!(
            compute_rates(&channels, &sol, &topo, &c),
            Err(RatesError::ShapeMismatch(_))
        ));
    }
}
