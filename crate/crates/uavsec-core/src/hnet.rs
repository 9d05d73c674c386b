//! Iterative beamforming and rate-allocation solver, and its unfolded,
//! learnable form.
//!
//! One solver block performs: tighten the auxiliary SINR variables at the
//! current beamformers, assemble the receive-space Gram matrices, extract
//! closed-form beam directions from whitened dominant eigenvectors (Cholesky
//! whitening), damp against the previous directions, project onto the power
//! budget with a common/private split, and allocate the secure common-rate
//! budget equally across served users. Stacking `num_blocks` such blocks with
//! per-block damping and power-split parameters (plus an optional learned
//! eigenvector subnet) gives the unfolded network form; with exact
//! eigensolvers and fixed parameters it is the plain iterative algorithm.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{dot_conj, C64, ComplexMatrix, LinalgError};
use crate::nn::{Mode, Network, NnError, Tensor};
use crate::rates::{
    compute_rates, compute_sinrs, sinr_denominators, AuxVars, BeamformingSolution, RateReport,
    RatesError, Topology,
};
use crate::scenario::{ChannelSet, SystemConstants};

/// Aux values at or below this floor mark a dead link whose Gram carries no
/// information; the corresponding beam update is skipped.
pub const AUX_FLOOR: f64 = 1e-15;

/// Whitened dominant eigenvalues at or below this (scale-free) floor mark a
/// vanishing numerator term.
pub const TERM_FLOOR: f64 = 1e-12;

/// Relative spectral spread below which the two sides of a beam pencil are
/// considered identical (exact cancellation of the two whitened terms).
pub const FLAT_TOL: f64 = 1e-12;

/// Relative spectral spread below which the cancelling difference of the two
/// whitened terms is numerically ill-posed; the user term alone is used.
pub const CANCEL_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum HnetError {
    Linalg(LinalgError),
    Rates(RatesError),
    Nn(NnError),
    InvalidParams(&'static str),
}

impl fmt::Display for HnetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HnetError::Linalg(e) => write!(f, "linear algebra failure: {e}"),
            HnetError::Rates(e) => write!(f, "rate model failure: {e}"),
            HnetError::Nn(e) => write!(f, "network failure: {e}"),
            HnetError::InvalidParams(msg) => write!(f, "invalid solver parameters: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for HnetError {}

impl From<LinalgError> for HnetError {
    fn from(e: LinalgError) -> Self {
        HnetError::Linalg(e)
    }
}

impl From<RatesError> for HnetError {
    fn from(e: RatesError) -> Self {
        HnetError::Rates(e)
    }
}

impl From<NnError> for HnetError {
    fn from(e: NnError) -> Self {
        HnetError::Nn(e)
    }
}

/// Which eigensolver the blocks use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigMode {
    Exact,
    Learned,
}

/// Solver parameters: block count, per-block damping in (0, 1], per-block
/// common-power fraction in (0, 1), and the optional eigenvector subnet.
#[derive(Debug, Clone, PartialEq)]
pub struct HNetParams {
    pub num_blocks: usize,
    pub damping: Vec<f64>,
    pub power_split: Vec<f64>,
    pub eig_mode: EigMode,
    pub enn: Option<Network>,
}

impl HNetParams {
    /// Plain iterative solver: exact eigensolver, no damping, even split.
    pub fn exact(num_blocks: usize) -> Self {
        Self {
            num_blocks,
            damping: vec![1.0; num_blocks],
            power_split: vec![0.5; num_blocks],
            eig_mode: EigMode::Exact,
            enn: None,
        }
    }

    pub fn validate(&self) -> Result<(), HnetError> {
        if self.num_blocks == 0 {
            return Err(HnetError::InvalidParams("need at least one block"));
        }
        if self.damping.len() != self.num_blocks || self.power_split.len() != self.num_blocks {
            return Err(HnetError::InvalidParams("per-block parameter count"));
        }
        if self.damping.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
            return Err(HnetError::InvalidParams("damping outside (0, 1]"));
        }
        if self.power_split.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(HnetError::InvalidParams("power split outside (0, 1)"));
        }
        if self.eig_mode == EigMode::Learned && self.enn.is_none() {
            return Err(HnetError::InvalidParams("learned mode needs a subnet"));
        }
        Ok(())
    }
}

/// Defects of the optimality system at a candidate solution, using the
/// solution's stored aux variables. At a fixed point of the block iteration
/// all four vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// Common-allocation identity defect (rate domain), max over UAVs.
    pub r16: f64,
    /// Common-beam trace defect at the binding user, max over UAVs.
    pub r17: f64,
    /// Common-wiretap trace defect at the worst-case eavesdropper, max over
    /// UAVs.
    pub r18: f64,
    /// Private-beam trace defect, max over users.
    pub r19: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.r16.max(self.r17).max(self.r18).max(self.r19)
    }
}

// ── eigensolver handle ─────────────────────────────────────────────────────

/// Extraction of the top-d eigenvectors inside a solver block, either exact
/// or via the learned subnet.
pub trait EigSolver {
    fn top_vectors(&self, m: &ComplexMatrix, d: usize) -> Result<ComplexMatrix, HnetError>;
}

/// Power-iteration eigensolver (the exact route).
pub struct ExactEig;

impl EigSolver for ExactEig {
    fn top_vectors(&self, m: &ComplexMatrix, d: usize) -> Result<ComplexMatrix, HnetError> {
        Ok(m.dominant_eigvecs(d)?.vectors)
    }
}

/// Learned eigenvector extraction: the subnet maps the Frobenius-normalized
/// Hermitian matrix (real/imaginary feature pairs) to d complex vectors,
/// which are then orthonormalized.
pub struct EnnEig<'a> {
    pub net: &'a Network,
}

impl EigSolver for EnnEig<'_> {
    fn top_vectors(&self, m: &ComplexMatrix, d: usize) -> Result<ComplexMatrix, HnetError> {
        let n = m.rows();
        let scale = m.fro_norm();
        if scale == 0.0 {
            return ExactEig.top_vectors(m, d);
        }
        let feats = enn_features(&m.scale(1.0 / scale));
        let out = self.net.infer(&Tensor::new(&[1, feats.len()], feats))?;
        Ok(enn_columns(out.data(), n, d))
    }
}

/// Real/imaginary feature pairs of a Hermitian matrix, row-major.
pub fn enn_features(m: &ComplexMatrix) -> Vec<f64> {
    let mut feats = Vec::with_capacity(2 * m.rows() * m.cols());
    for z in m.entries() {
        feats.push(z.re);
        feats.push(z.im);
    }
    feats
}

/// Extract d unit vectors from the subnet's predicted projectors (re/im
/// interleaved row-major entries, one chunk of 2n^2 per projector): each
/// vector is the projector's largest-norm column, normalized; the set is
/// then orthonormalized. Dependent columns are completed from the standard
/// basis so the result always has d usable directions.
pub fn enn_columns(out: &[f64], n: usize, d: usize) -> ComplexMatrix {
    let mut v = ComplexMatrix::zeros(n, d);
    for j in 0..d {
        let base = j * 2 * n * n;
        // Column norms of the predicted projector.
        let mut best_col = 0usize;
        let mut best_norm = -1.0f64;
        for c in 0..n {
            let mut acc = 0.0;
            for r in 0..n {
                let idx = base + 2 * (r * n + c);
                acc += out[idx] * out[idx] + out[idx + 1] * out[idx + 1];
            }
            if acc > best_norm {
                best_norm = acc;
                best_col = c;
            }
        }
        for r in 0..n {
            let idx = base + 2 * (r * n + best_col);
            v.set(r, j, C64::new(out[idx], out[idx + 1]));
        }
    }
    v.orthonormalize_columns();
    // Replace any zeroed (dependent) column with an orthonormal completion.
    for j in 0..d {
        if v.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>() < 0.5 {
            for basis in 0..n {
                let mut cand: Vec<C64> = (0..n)
                    .map(|i| {
                        if i == basis {
                            C64::new(1.0, 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    })
                    .collect();
                for k in 0..d {
                    if k == j {
                        continue;
                    }
                    let u = v.col(k);
                    let proj = dot_conj(&u, &cand);
                    for i in 0..n {
                        cand[i] -= u[i] * proj;
                    }
                }
                let norm: f64 = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm > 1e-6 {
                    for i in 0..n {
                        v.set(i, j, cand[i] / norm);
                    }
                    break;
                }
            }
        }
    }
    v
}

// ── solver operations ──────────────────────────────────────────────────────

/// Tight values of every auxiliary variable at the current beamformers: each
/// bound holds with equality (the per-UAV common bound binds at the weakest
/// served user). All values are exactly the SINRs of the rate model.
pub fn update_aux(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    topo: &Topology,
    constants: &SystemConstants,
) -> Result<AuxVars, HnetError> {
    let sinr = compute_sinrs(channels, sol, topo, constants)?;
    let upsilon_common = topo
        .association
        .iter()
        .map(|users| {
            users
                .iter()
                .map(|&k| sinr.common_user[k])
                .fold(f64::INFINITY, f64::min)
        })
        .map(|m| if m.is_finite() { m } else { 0.0 })
        .collect();
    Ok(AuxVars {
        upsilon_common,
        upsilon_eave: sinr.common_eave,
        zeta_user: sinr.private_user,
        zeta_eave: sinr.private_eave,
    })
}

/// Receive-space Grams for one UAV's common beam: the aux-scaled
/// noise-plus-private-interference matrix and the common signal Gram, taken
/// at the binding (weakest) served user, plus the analogous pair at the
/// worst-case eavesdropper when one exists.
#[derive(Debug, Clone)]
pub struct CommonGrams {
    pub m1: ComplexMatrix,
    pub m2: ComplexMatrix,
    pub m3: Option<ComplexMatrix>,
    pub m4: Option<ComplexMatrix>,
    pub binding_user: usize,
    pub worst_eave: Option<usize>,
}

/// Receive-space Grams for one private beam: the aux-scaled
/// noise-plus-other-interference matrix and the own-signal Gram.
#[derive(Debug, Clone)]
pub struct PrivateGrams {
    pub m5: ComplexMatrix,
    pub m6: ComplexMatrix,
}

/// Gram matrices for every beam. `common[u]` is `None` when UAV `u` serves
/// no users.
#[derive(Debug, Clone)]
pub struct GramSet {
    pub common: Vec<Option<CommonGrams>>,
    pub private: Vec<PrivateGrams>,
}

/// Assemble all Gram matrices at the solution's stored aux values.
///
/// The noise-plus-cross-UAV block is spread over the receive dimension as
/// `((d sigma^2 + cross) / N) I_N`, which keeps every Gram's trace equal to
/// the corresponding scalar SINR denominator; the trace identities then hold
/// exactly when the aux variables are tight.
pub fn build_grams(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    topo: &Topology,
    constants: &SystemConstants,
) -> Result<GramSet, HnetError> {
    let sinr = compute_sinrs(channels, sol, topo, constants)?;
    let nu = constants.num_uavs;
    let nk = constants.num_users;
    let ni = constants.num_eaves;
    let n = constants.rx_antennas;
    let d = constants.streams as f64;

    // Cross-UAV private interference power at each receiver.
    let cross_user = |k: usize, own: usize| -> f64 {
        let mut acc = 0.0;
        for v in 0..nu {
            if v == own {
                continue;
            }
            for &j in &topo.association[v] {
                acc += channels.user[v][k].mul(&sol.private[j]).fro_norm_sq();
            }
        }
        acc
    };
    let cross_eave = |i: usize, own: usize| -> f64 {
        let mut acc = 0.0;
        for v in 0..nu {
            if v == own {
                continue;
            }
            for &j in &topo.association[v] {
                acc += channels.eave[v][i].mul(&sol.private[j]).fro_norm_sq();
            }
        }
        acc
    };

    let mut common = Vec::with_capacity(nu);
    for u in 0..nu {
        if topo.association[u].is_empty() {
            common.push(None);
            continue;
        }
        // Binding user: weakest common SINR among served users.
        let k_star = *topo.association[u]
            .iter()
            .min_by(|&&a, &&b| {
                sinr.common_user[a]
                    .partial_cmp(&sinr.common_user[b])
                    .unwrap()
            })
            .unwrap();
        let h_user = &channels.user[u][k_star];
        let base_user = (d * constants.noise_user + cross_user(k_star, u)) / n as f64;
        let mut env_user = ComplexMatrix::scaled_identity(n, base_user);
        for &l in &topo.association[u] {
            env_user = env_user.add(&h_user.mul(&sol.private[l]).gram());
        }
        let m1 = env_user.scale(sol.aux.upsilon_common[u]);
        let m2 = h_user.mul(&sol.common[u]).gram();

        let (m3, m4, worst_eave) = if ni > 0 {
            let i_star = (0..ni)
                .max_by(|&a, &b| {
                    sinr.common_eave[u][a]
                        .partial_cmp(&sinr.common_eave[u][b])
                        .unwrap()
                })
                .unwrap();
            let h_eave = &channels.eave[u][i_star];
            let base_eave = (d * constants.noise_eave + cross_eave(i_star, u)) / n as f64;
            let mut env_eave = ComplexMatrix::scaled_identity(n, base_eave);
            for &l in &topo.association[u] {
                env_eave = env_eave.add(&h_eave.mul(&sol.private[l]).gram());
            }
            (
                Some(env_eave.scale(sol.aux.upsilon_eave[u][i_star])),
                Some(h_eave.mul(&sol.common[u]).gram()),
                Some(i_star),
            )
        } else {
            (None, None, None)
        };

        common.push(Some(CommonGrams {
            m1,
            m2,
            m3,
            m4,
            binding_user: k_star,
            worst_eave,
        }));
    }

    let mut private = Vec::with_capacity(nk);
    for k in 0..nk {
        let u = topo.serving[k];
        let h = &channels.user[u][k];
        let base = (d * constants.noise_user + cross_user(k, u)) / n as f64;
        let mut env = ComplexMatrix::scaled_identity(n, base);
        for &l in &topo.association[u] {
            if l != k {
                env = env.add(&h.mul(&sol.private[l]).gram());
            }
        }
        private.push(PrivateGrams {
            m5: env.scale(sol.aux.zeta_user[k]),
            m6: h.mul(&sol.private[k]).gram(),
        });
    }

    Ok(GramSet { common, private })
}

/// Transmit-space pencil of one beam: the user-side matrix
/// `I + (p / den_target) G_target` against the leakage-side matrix
/// `I + sum_v (p / den_v) G_v`, where `G` are channel transmit Grams
/// `H^H H`, `p` is the beam's power, and `den` are the links' SINR
/// denominators. The dominant whitened eigenvectors of this pencil are the
/// closed-form beam directions.
#[derive(Debug, Clone)]
pub struct BeamPencil {
    pub num: ComplexMatrix,
    pub den: ComplexMatrix,
}

/// Assemble the pencil for a beam with the given target and victim links.
pub fn secure_pencil(
    target: &ComplexMatrix,
    target_den: f64,
    victims: &[(&ComplexMatrix, f64)],
    beam_power: f64,
) -> BeamPencil {
    let m = target.cols();
    let num = ComplexMatrix::identity(m)
        .add(&target.adjoint().mul(target).scale(beam_power / target_den));
    let mut den = ComplexMatrix::identity(m);
    for (v, v_den) in victims {
        den = den.add(&v.adjoint().mul(v).scale(beam_power / v_den));
    }
    BeamPencil { num, den }
}

/// Solution of one pencil solve plus its spectral flatness, used to detect
/// the symmetric degeneracy where user and eavesdropper sides coincide.
struct PencilSolution {
    /// Unit-Frobenius direction block (columns orthonormalized), or `None`
    /// when the whitened spectrum is exactly flat.
    vectors: Option<ComplexMatrix>,
    /// `(lambda_max - lambda_min) / lambda_max` of the whitened pencil.
    flatness: f64,
}

/// Dominant whitened eigenvectors of the pencil: Cholesky-factor the
/// leakage side, extract the top-d eigenvectors of the whitened user side
/// (through the supplied eigensolver), and map back through the inverse
/// factor.
fn solve_pencil(
    pencil: &BeamPencil,
    d: usize,
    eig: &dyn EigSolver,
) -> Result<PencilSolution, HnetError> {
    // The denominator side is I + PSD by construction, so it is positive
    // definite without regularization; skipping the diagonal floor keeps an
    // exactly symmetric pencil exactly flat.
    let chol = pencil.den.cholesky()?;
    let inv = chol.inv_lower_triangular()?;
    let mut s = inv.mul(&pencil.num).mul(&inv.adjoint());
    // Clear multiplication dust so the Hermitian precondition holds exactly.
    let s_adj = s.adjoint();
    s = s.add(&s_adj).scale(0.5);

    let lambda_max = s.dominant_eigvecs(1)?.values[0].max(0.0);
    if lambda_max <= 0.0 {
        return Ok(PencilSolution {
            vectors: None,
            flatness: 0.0,
        });
    }
    // lambda_min via the shifted operator lambda_max I - S.
    let m = s.rows();
    let shifted = ComplexMatrix::scaled_identity(m, lambda_max).sub(&s);
    let spread = shifted.dominant_eigvecs(1)?.values[0].max(0.0);
    let flatness = spread / lambda_max;
    if flatness <= FLAT_TOL {
        return Ok(PencilSolution {
            vectors: None,
            flatness,
        });
    }

    let v = eig.top_vectors(&s, d)?;
    let raw = inv.adjoint().mul(&v);
    let norm = raw.fro_norm();
    if norm <= 0.0 {
        return Ok(PencilSolution {
            vectors: None,
            flatness,
        });
    }
    Ok(PencilSolution {
        vectors: Some(finalize_direction(raw)),
        flatness,
    })
}

fn finalize_direction(w: ComplexMatrix) -> ComplexMatrix {
    let mut w = w;
    w.orthonormalize_columns();
    let norm = w.fro_norm();
    if norm <= 0.0 {
        return w;
    }
    w.scale(1.0 / norm)
}

/// Dominant eigvec direction of the user side alone (leakage ignored), the
/// stability fallback when the pencil is nearly flat.
fn num_only_direction(
    pencil: &BeamPencil,
    d: usize,
    eig: &dyn EigSolver,
) -> Result<ComplexMatrix, HnetError> {
    Ok(finalize_direction(eig.top_vectors(&pencil.num, d)?))
}

/// Closed-form common-beam direction from the secure pencil built at the
/// binding user against all eavesdroppers.
///
/// The two whitened terms of the underlying difference are the pencil's two
/// sides: when the eavesdropper side is absent the solve reduces to the
/// whitened user term alone, and when the two sides coincide (the fully
/// symmetric degeneracy, whitened spectrum flat to [`FLAT_TOL`]) the terms
/// cancel and the zero matrix is returned. A nearly (but not exactly) flat
/// pencil falls back to the user term alone, since the cancelling difference
/// is numerically ill-posed there.
pub fn closed_form_wc(
    pencil: &BeamPencil,
    d: usize,
    eig: &dyn EigSolver,
) -> Result<ComplexMatrix, HnetError> {
    let m = pencil.num.rows();
    let sol = solve_pencil(pencil, d, eig)?;
    match sol.vectors {
        None => Ok(ComplexMatrix::zeros(m, d)),
        Some(_) if sol.flatness < CANCEL_FLOOR => num_only_direction(pencil, d, eig),
        Some(v) => Ok(v),
    }
}

/// Closed-form private-beam direction from the secure pencil built at the
/// user against co-served users and eavesdroppers. A flat pencil falls back
/// to the user side's dominant eigenvectors (the matched-filter limit), so
/// the user keeps being served even when no leakage-aware gain is available.
pub fn closed_form_wk(
    pencil: &BeamPencil,
    d: usize,
    eig: &dyn EigSolver,
) -> Result<ComplexMatrix, HnetError> {
    let sol = solve_pencil(pencil, d, eig)?;
    match sol.vectors {
        Some(v) if sol.flatness >= CANCEL_FLOOR => Ok(v),
        _ => num_only_direction(pencil, d, eig),
    }
}

/// Split each UAV's secure common budget `max(0, R_c - max_i R_c,i)` equally
/// across its served users. The allocation sum meets the budget exactly, so
/// the secrecy-allocation constraint holds with equality whenever the budget
/// is positive.
pub fn allocate_common(report: &RateReport, topo: &Topology) -> Vec<f64> {
    let mut alloc = vec![0.0; topo.num_users()];
    for (u, users) in topo.association.iter().enumerate() {
        if users.is_empty() {
            continue;
        }
        let worst = report.common_eave[u].iter().copied().fold(0.0, f64::max);
        let budget = (report.common_min[u] - worst).max(0.0);
        let share = budget / users.len() as f64;
        for &k in users {
            alloc[k] = share;
        }
    }
    alloc
}

/// Rescale beams so each UAV spends exactly its budget: the common beam gets
/// `alpha * P` and the served private beams share `(1 - alpha) * P` equally.
/// Zero directions stay zero (their share of the budget is left unused).
pub fn project_power(sol: &mut BeamformingSolution, power: f64, alpha: f64, topo: &Topology) {
    for (u, users) in topo.association.iter().enumerate() {
        let target_c = (alpha * power).sqrt();
        let norm_c = sol.common[u].fro_norm();
        if norm_c > 0.0 {
            sol.common[u] = sol.common[u].scale(target_c / norm_c);
        }
        if users.is_empty() {
            continue;
        }
        let target_k = ((1.0 - alpha) * power / users.len() as f64).sqrt();
        for &k in users {
            let norm_k = sol.private[k].fro_norm();
            if norm_k > 0.0 {
                sol.private[k] = sol.private[k].scale(target_k / norm_k);
            }
        }
    }
}

/// Matched-filter initial directions: each private beam takes the top-d
/// transmit eigenvectors of its own channel Gram; each common beam takes the
/// top-d eigenvectors of the served users' summed channel Gram. Power starts
/// at an even common/private split.
pub fn matched_filter_init(
    channels: &ChannelSet,
    topo: &Topology,
    constants: &SystemConstants,
) -> Result<BeamformingSolution, HnetError> {
    let d = constants.streams;
    let mut sol = BeamformingSolution::zeros(constants);
    for k in 0..constants.num_users {
        let h = &channels.user[topo.serving[k]][k];
        let gram_tx = h.adjoint().mul(h);
        let eig = gram_tx.dominant_eigvecs(d)?;
        sol.private[k] = eig.vectors.scale(1.0 / (d as f64).sqrt());
    }
    for (u, users) in topo.association.iter().enumerate() {
        if users.is_empty() {
            continue;
        }
        let m = constants.tx_antennas;
        let mut acc = ComplexMatrix::zeros(m, m);
        for &k in users {
            let h = &channels.user[u][k];
            acc = acc.add(&h.adjoint().mul(h));
        }
        let eig = acc.dominant_eigvecs(d)?;
        sol.common[u] = eig.vectors.scale(1.0 / (d as f64).sqrt());
    }
    project_power(&mut sol, constants.power_budget, 0.5, topo);
    Ok(sol)
}

fn damp_direction(old: &ComplexMatrix, new: &ComplexMatrix, beta: f64) -> ComplexMatrix {
    let old_norm = old.fro_norm();
    let old_dir = if old_norm > 0.0 {
        old.scale(1.0 / old_norm)
    } else {
        old.clone()
    };
    let mixed = new.scale(beta).add(&old_dir.scale(1.0 - beta));
    let norm = mixed.fro_norm();
    if norm <= 1e-12 {
        // Both directions dead or exactly opposed: transmit nothing.
        ComplexMatrix::zeros(old.rows(), old.cols())
    } else {
        mixed.scale(1.0 / norm)
    }
}

/// Run the full solver: matched-filter start, then `num_blocks` blocks of
/// aux tightening, Gram assembly, closed-form directions, damping, power
/// projection, and common-rate allocation.
///
/// The returned solution's aux variables are those tightened at the final
/// block's input, so [`kkt_residuals`] measures how far the last block moved
/// (zero at a fixed point). The output always satisfies the power budget
/// (projection is exact) and carries nonnegative allocations matching the
/// final rates' budget.
pub fn hnet_forward(
    channels: &ChannelSet,
    params: &HNetParams,
    topo: &Topology,
    constants: &SystemConstants,
) -> Result<BeamformingSolution, HnetError> {
    params.validate()?;
    let d = constants.streams;
    let exact = ExactEig;
    let learned = params.enn.as_ref().map(|net| EnnEig { net });
    let eig: &dyn EigSolver = match params.eig_mode {
        EigMode::Exact => &exact,
        EigMode::Learned => learned
            .as_ref()
            .ok_or(HnetError::InvalidParams("learned mode needs a subnet"))?,
    };

    let mut sol = matched_filter_init(channels, topo, constants)?;
    for b in 0..params.num_blocks {
        sol.aux = update_aux(channels, &sol, topo, constants)?;
        let dens = sinr_denominators(channels, &sol, topo, constants)?;
        let grams = build_grams(channels, &sol, topo, constants)?;

        let p_c = params.power_split[b] * constants.power_budget;
        let mut new_common = Vec::with_capacity(constants.num_uavs);
        for (u, g) in grams.common.iter().enumerate() {
            match g {
                Some(g) if sol.aux.upsilon_common[u] > AUX_FLOOR => {
                    // The common beam leaks only to eavesdroppers (served
                    // users cancel it before decoding privately).
                    let victims: Vec<(&ComplexMatrix, f64)> = (0..constants.num_eaves)
                        .map(|i| (&channels.eave[u][i], dens.common_eave[u][i]))
                        .collect();
                    let pencil = secure_pencil(
                        &channels.user[u][g.binding_user],
                        dens.common_user[g.binding_user],
                        &victims,
                        p_c,
                    );
                    new_common.push(Some(closed_form_wc(&pencil, d, eig)?));
                }
                _ => new_common.push(None),
            }
        }
        let mut new_private = Vec::with_capacity(constants.num_users);
        for k in 0..constants.num_users {
            if sol.aux.zeta_user[k] > AUX_FLOOR {
                let u = topo.serving[k];
                let p_k = (1.0 - params.power_split[b]) * constants.power_budget
                    / topo.association[u].len().max(1) as f64;
                // A private beam leaks to every other user and eavesdropper.
                let mut victims: Vec<(&ComplexMatrix, f64)> = Vec::new();
                for l in 0..constants.num_users {
                    if l != k {
                        // Victim sensitivity excludes this beam's own current
                        // leakage, which is about to be redesigned.
                        victims.push((&channels.user[u][l], dens.private_user_excluding[l][k]));
                    }
                }
                for i in 0..constants.num_eaves {
                    victims.push((&channels.eave[u][i], dens.private_eave[k][i]));
                }
                let pencil = secure_pencil(
                    &channels.user[u][k],
                    dens.private_user[k],
                    &victims,
                    p_k,
                );
                new_private.push(Some(closed_form_wk(&pencil, d, eig)?));
            } else {
                new_private.push(None);
            }
        }

        let beta = params.damping[b];
        for u in 0..constants.num_uavs {
            if let Some(new) = &new_common[u] {
                sol.common[u] = damp_direction(&sol.common[u], new, beta);
            }
        }
        for k in 0..constants.num_users {
            if let Some(new) = &new_private[k] {
                sol.private[k] = damp_direction(&sol.private[k], new, beta);
            }
        }

        project_power(&mut sol, constants.power_budget, params.power_split[b], topo);
        let report = compute_rates(channels, &sol, topo, constants)?;
        sol.common_alloc = allocate_common(&report, topo);
    }
    Ok(sol)
}

/// Optimality-system defects at `(sol, sol.aux)`.
///
/// `r16` is the absolute defect of the common-allocation identity per UAV
/// (allocated sum vs the aux-implied secure budget). `r17`/`r18`/`r19` are
/// trace defects `|tr(M_den) - tr(M_num)| / (1 + ||M_den||_F)` of the
/// aux-scaled Gram pairs, evaluated at the binding-user and worst-case
/// eavesdropper links and aggregated by maximum.
pub fn kkt_residuals(
    channels: &ChannelSet,
    sol: &BeamformingSolution,
    topo: &Topology,
    constants: &SystemConstants,
) -> Result<KktResiduals, HnetError> {
    let grams = build_grams(channels, sol, topo, constants)?;
    let ln2 = core::f64::consts::LN_2;
    let log2_1p = |x: f64| x.ln_1p() / ln2;

    let mut r16: f64 = 0.0;
    let mut r17: f64 = 0.0;
    let mut r18: f64 = 0.0;
    for (u, g) in grams.common.iter().enumerate() {
        let Some(g) = g else { continue };
        let alloc_sum: f64 = topo.association[u]
            .iter()
            .map(|&k| sol.common_alloc[k])
            .sum();
        let worst_aux = sol.aux.upsilon_eave[u].iter().copied().fold(0.0, f64::max);
        let identity = alloc_sum - log2_1p(sol.aux.upsilon_common[u]) + log2_1p(worst_aux);
        r16 = r16.max(identity.abs());

        let defect = (g.m1.trace().re - g.m2.trace().re).abs() / (1.0 + g.m1.fro_norm());
        r17 = r17.max(defect);
        if let (Some(m3), Some(m4)) = (&g.m3, &g.m4) {
            let defect = (m3.trace().re - m4.trace().re).abs() / (1.0 + m3.fro_norm());
            r18 = r18.max(defect);
        }
    }
    let mut r19: f64 = 0.0;
    for g in &grams.private {
        let defect = (g.m5.trace().re - g.m6.trace().re).abs() / (1.0 + g.m5.fro_norm());
        r19 = r19.max(defect);
    }
    Ok(KktResiduals { r16, r17, r18, r19 })
}

// ── learned eigenvector subnet ─────────────────────────────────────────────

/// Dense subnet for dominant-eigenvector extraction on n x n Hermitian
/// inputs: 3 hidden tanh layers of width `4 * input`, linear output of d
/// rank-one projectors (one per eigenvector, most dominant first).
///
/// The subnet regresses projectors `v v^H` rather than vectors: an
/// eigenvector representative cannot depend continuously on the matrix over
/// the whole input space (any global phase/sign convention has a cliff), but
/// the projector does, so it is the learnable target. Unit vectors are
/// recovered from the predicted projectors by [`enn_columns`].
pub fn enn_network(n: usize, d: usize, seed: u64) -> Network {
    let input = 2 * n * n;
    let hidden = 4 * input;
    let output = d * 2 * n * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Network::new(vec![
        Network::dense(input, hidden, &mut rng),
        crate::nn::Layer::Tanh,
        Network::dense(hidden, hidden, &mut rng),
        crate::nn::Layer::Tanh,
        Network::dense(hidden, hidden, &mut rng),
        crate::nn::Layer::Tanh,
        Network::dense(hidden, output, &mut rng),
    ])
}

/// Random Hermitian PSD matrix with a bounded spectral ratio
/// (`lambda_2/lambda_1 <= max_ratio`) and an eigenbasis from orthonormalized
/// complex Gaussians. The bounded gap keeps the dominant eigenvector a
/// smooth regression target.
pub fn random_gapped_psd(n: usize, max_ratio: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut basis = ComplexMatrix::zeros(n, n);
    loop {
        for r in 0..n {
            for c in 0..n {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                basis.set(r, c, C64::new(re, im));
            }
        }
        basis.orthonormalize_columns();
        if basis.fro_norm_sq() > n as f64 - 0.5 {
            break;
        }
    }
    let mut lambdas = Vec::with_capacity(n);
    lambdas.push(1.0);
    let mut prev = 1.0;
    for _ in 1..n {
        prev *= rng.random_range(0.05..max_ratio);
        lambdas.push(prev);
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for (j, &lam) in lambdas.iter().enumerate() {
        let col = basis.col(j);
        m = m.add(&ComplexMatrix::outer(&col).scale(lam));
    }
    // Clear accumulation dust off the Hermitian structure.
    let adj = m.adjoint();
    m.add(&adj).scale(0.5)
}

/// Angle between two complex directions, invariant to phase and scale.
pub fn subspace_angle(a: &[C64], b: &[C64]) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return core::f64::consts::FRAC_PI_2;
    }
    let overlap = dot_conj(a, b).norm() / (na * nb);
    overlap.min(1.0).acos()
}

/// Supervised pre-training of the subnet against the exact eigensolver on
/// the gapped PSD ensemble: mean squared error on the rank-one projector
/// entries (a smooth, phase-free target). Returns the final minibatch loss.
pub fn pretrain_enn(
    net: &mut Network,
    n: usize,
    d: usize,
    steps: usize,
    batch: usize,
    lr: f64,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adam = crate::nn::AdamState::for_network(net);
    let in_dim = 2 * n * n;
    let out_dim = d * 2 * n * n;
    let mut last_loss = 0.0;
    for _ in 0..steps {
        let mut xs = Vec::with_capacity(batch * in_dim);
        let mut ys = Vec::with_capacity(batch * out_dim);
        for _ in 0..batch {
            let m = random_gapped_psd(n, 0.7, &mut rng);
            let scaled = m.scale(1.0 / m.fro_norm());
            xs.extend(enn_features(&scaled));
            let eig = scaled
                .dominant_eigvecs(d)
                .expect("gapped ensemble matrices are Hermitian PSD");
            for j in 0..d {
                let proj = ComplexMatrix::outer(&eig.vectors.col(j));
                for z in proj.entries() {
                    ys.push(z.re);
                    ys.push(z.im);
                }
            }
        }
        let x = Tensor::new(&[batch, in_dim], xs);
        let (out, cache) = net.forward(&x, Mode::Train).expect("subnet forward");
        let mut up = Vec::with_capacity(batch * out_dim);
        let mut loss = 0.0;
        for (o, t) in out.data().iter().zip(ys.iter()) {
            let diff = o - t;
            loss += diff * diff;
            up.push(2.0 * diff / batch as f64);
        }
        last_loss = loss / batch as f64;
        let (grads, _) = net
            .backward(&cache, &Tensor::new(out.shape(), up))
            .expect("subnet backward");
        adam.step(net, &grads, lr);
    }
    last_loss
}
