//! Experiment configuration: TOML schema with explicit units in key names,
//! converted once at load time into the core's linear-unit structures.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use uavsec_core::hnet::EigMode;
use uavsec_core::rl::{ArchConfig, EnvConfig, Method, RewardWeights, SolverConfig, TrainConfig};
use uavsec_core::scenario::{dbm_to_watts, Placement, ScenarioConfig, SystemConstants};

/// Top-level file schema. Every physical quantity carries its unit in the
/// key name; powers are dBm, distances meters, frequencies GHz.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub method: String,
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub compare: CompareSection,
}

fn default_out_dir() -> String {
    "out".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub num_uavs: usize,
    pub num_users: usize,
    pub num_eaves: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub streams: usize,
    pub power_dbm: f64,
    pub noise_user_dbm: f64,
    pub noise_eave_dbm: f64,
    pub pathloss_exponent: f64,
    pub carrier_freq_ghz: f64,
    pub antenna_spacing_wavelengths: f64,
    /// Rician K-factor in dB; omit for pure line of sight.
    pub rician_k_db: Option<f64>,
    pub slot_seconds: f64,
    pub period_seconds: f64,
    pub max_speed_mps: f64,
    /// "uniform" (area bounds) or "explicit" (coordinate lists).
    pub placement: String,
    #[serde(default)]
    pub area_x_m: Option<[f64; 2]>,
    #[serde(default)]
    pub area_y_m: Option<[f64; 2]>,
    #[serde(default)]
    pub user_locs_m: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub eave_locs_m: Option<Vec<[f64; 2]>>,
    pub uav_start_m: Vec<[f64; 3]>,
    pub uav_terminal_m: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub num_blocks: usize,
    pub eig_mode: String,
    pub enn_pretrain_steps: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            num_blocks: 6,
            eig_mode: "exact".into(),
            enn_pretrain_steps: 2500,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    pub episodes: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub tau: f64,
    pub buffer_capacity: usize,
    pub noise_start: f64,
    pub noise_end: f64,
    pub solver_fd_samples: usize,
    pub checkpoint_every: usize,
    pub raster_size: usize,
    /// Penalty coefficients C1..C6.
    pub reward_weights: [f64; 6],
    pub dense_hidden: Vec<usize>,
    pub cnn_channels: [usize; 3],
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            episodes: 200,
            batch_size: 128,
            learning_rate: 0.001,
            gamma: 0.95,
            tau: 0.005,
            buffer_capacity: 50_000,
            noise_start: 0.2,
            noise_end: 0.02,
            solver_fd_samples: 8,
            checkpoint_every: 50,
            raster_size: 16,
            reward_weights: [1.0; 6],
            dense_hidden: vec![128, 64],
            cnn_channels: [8, 8, 8],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub episodes: usize,
    /// Checkpoint to evaluate; empty string evaluates the untrained default
    /// policy (exact-mode solver plus freshly initialized networks).
    #[serde(default)]
    pub checkpoint: String,
    pub cdf_bins: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            episodes: 20,
            checkpoint: String::new(),
            cdf_bins: 50,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub samples: u64,
    /// Power splits to scan; empty means the full grid {0, 0.1, ..., 1}.
    #[serde(default)]
    pub splits: Vec<f64>,
    /// Also run the exhaustive trajectory search (needs a short horizon).
    pub trajectory: bool,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            samples: 100_000,
            splits: Vec::new(),
            trajectory: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path of the swept key, e.g. "scenario.power_dbm".
    pub key: String,
    pub values: Vec<f64>,
    pub eval_episodes: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub train_episodes: usize,
    pub eval_episodes: usize,
    pub oracle_samples: u64,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            train_episodes: 60,
            eval_episodes: 5,
            oracle_samples: 20_000,
        }
    }
}

/// A loaded experiment: the parsed schema, the canonical serialized form the
/// provenance hash covers, and the output directory.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub file: FileConfig,
    pub config_hash: String,
    pub out_dir: String,
}

/// Parse `--set key.path=value` overrides plus `--seed`/`--out` shorthands
/// onto the raw TOML table, then deserialize and validate.
pub fn load_experiment(
    path: &Path,
    seed_override: Option<u64>,
    out_override: Option<&str>,
    sets: &[String],
) -> Result<Experiment> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut table: toml::Table = text
        .parse()
        .with_context(|| format!("parsing config {}", path.display()))?;

    for set in sets {
        let (key, value) = set
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects key.path=value, got '{set}'"))?;
        apply_override(&mut table, key.trim(), value.trim())
            .with_context(|| format!("applying --set {set}"))?;
    }
    if let Some(seed) = seed_override {
        table.insert("seed".into(), toml::Value::Integer(seed as i64));
    }
    if let Some(out) = out_override {
        table.insert("out_dir".into(), toml::Value::String(out.to_string()));
    }

    // The provenance hash covers the effective physics/training inputs, not
    // where the outputs land.
    let mut hashed = table.clone();
    hashed.remove("out_dir");
    let canonical = toml::to_string(&hashed).context("serializing effective config")?;
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    let mut config_hash = String::new();
    for byte in digest.iter().take(8) {
        let _ = write!(config_hash, "{byte:02x}");
    }

    let file: FileConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e| anyhow!("invalid config: {e}"))?;
    validate(&file)?;
    let out_dir = file.out_dir.clone();
    Ok(Experiment {
        file,
        config_hash,
        out_dir,
    })
}

fn apply_override(table: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    // Parse the value as a one-key TOML document so numbers, booleans,
    // strings, and arrays all work.
    let parsed: toml::Table = format!("v = {value}")
        .parse()
        .or_else(|_| format!("v = \"{value}\"").parse())
        .map_err(|e| anyhow!("unparseable value '{value}': {e}"))?;
    let value = parsed
        .get("v")
        .cloned()
        .ok_or_else(|| anyhow!("empty override value"))?;

    let mut parts = key.split('.').peekable();
    let mut current = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            current.insert(part.to_string(), value);
            return Ok(());
        }
        current = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("key segment '{part}' is not a table"))?;
    }
    bail!("empty override key")
}

fn validate(file: &FileConfig) -> Result<()> {
    match file.method.as_str() {
        "dun_drl" | "single_drl" | "oracle" => {}
        other => bail!("unrecognized method '{other}' (expected dun_drl, single_drl, oracle)"),
    }
    match file.scenario.placement.as_str() {
        "uniform" => {
            if file.scenario.area_x_m.is_none() || file.scenario.area_y_m.is_none() {
                bail!("uniform placement requires area_x_m and area_y_m");
            }
        }
        "explicit" => {
            if file.scenario.user_locs_m.is_none() {
                bail!("explicit placement requires user_locs_m");
            }
        }
        other => bail!("unrecognized placement '{other}'"),
    }
    match file.solver.eig_mode.as_str() {
        "exact" | "learned" => {}
        other => bail!("unrecognized eig_mode '{other}'"),
    }
    if file.scenario.slot_seconds <= 0.0 || file.scenario.period_seconds <= 0.0 {
        bail!("slot_seconds and period_seconds must be positive");
    }
    Ok(())
}

impl FileConfig {
    pub fn method(&self) -> Option<Method> {
        match self.method.as_str() {
            "dun_drl" => Some(Method::DunDrl),
            "single_drl" => Some(Method::SingleDrl),
            _ => None,
        }
    }

    pub fn constants(&self) -> SystemConstants {
        let s = &self.scenario;
        let horizon = (s.period_seconds / s.slot_seconds).round() as usize;
        SystemConstants {
            num_uavs: s.num_uavs,
            num_users: s.num_users,
            num_eaves: s.num_eaves,
            tx_antennas: s.tx_antennas,
            rx_antennas: s.rx_antennas,
            streams: s.streams,
            power_budget: dbm_to_watts(s.power_dbm),
            noise_user: dbm_to_watts(s.noise_user_dbm),
            noise_eave: dbm_to_watts(s.noise_eave_dbm),
            pathloss_exp: s.pathloss_exponent,
            carrier_freq: s.carrier_freq_ghz * 1e9,
            antenna_spacing: s.antenna_spacing_wavelengths,
            rician_kappa: s
                .rician_k_db
                .map(|db| 10f64.powf(db / 10.0))
                .unwrap_or(f64::INFINITY),
            slot_len: s.slot_seconds,
            horizon,
            max_speed: s.max_speed_mps,
        }
    }

    pub fn scenario_config(&self) -> Result<ScenarioConfig> {
        let s = &self.scenario;
        let placement = match s.placement.as_str() {
            "uniform" => Placement::UniformArea {
                x: (s.area_x_m.unwrap()[0], s.area_x_m.unwrap()[1]),
                y: (s.area_y_m.unwrap()[0], s.area_y_m.unwrap()[1]),
            },
            "explicit" => Placement::Explicit {
                users: s.user_locs_m.clone().unwrap_or_default(),
                eaves: s.eave_locs_m.clone().unwrap_or_default(),
            },
            other => bail!("unrecognized placement '{other}'"),
        };
        Ok(ScenarioConfig {
            constants: self.constants(),
            placement,
            uav_start: s.uav_start_m.clone(),
            uav_terminal: s.uav_terminal_m.clone(),
            seed: self.seed,
        })
    }

    pub fn env_config(&self) -> Result<EnvConfig> {
        let w = self.training.reward_weights;
        Ok(EnvConfig {
            scenario: self.scenario_config()?,
            raster_size: self.training.raster_size,
            weights: RewardWeights {
                alloc_excess: w[0],
                power: w[1],
                alloc_negativity: w[2],
                step_excess: w[3],
                start_deviation: w[4],
                terminal_deviation: w[5],
            },
        })
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            num_blocks: self.solver.num_blocks,
            eig_mode: if self.solver.eig_mode == "learned" {
                EigMode::Learned
            } else {
                EigMode::Exact
            },
            enn_pretrain_steps: self.solver.enn_pretrain_steps,
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let method = self
            .method()
            .ok_or_else(|| anyhow!("method '{}' is not trainable", self.method))?;
        let t = &self.training;
        Ok(TrainConfig {
            env: self.env_config()?,
            solver: self.solver_config(),
            arch: ArchConfig {
                dense_hidden: t.dense_hidden.clone(),
                cnn_channels: t.cnn_channels,
            },
            method,
            episodes: t.episodes,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            gamma: t.gamma,
            tau: t.tau,
            buffer_capacity: t.buffer_capacity,
            noise_start: t.noise_start,
            noise_end: t.noise_end,
            solver_fd_samples: t.solver_fd_samples,
            checkpoint_every: t.checkpoint_every,
            seed: self.seed,
        })
    }
}
