//! `train`: run the configured method, stream a training-log CSV, and drop
//! checkpoints.

use std::path::PathBuf;

use anyhow::{anyhow, Result};
use uavsec_core::rl::{train, LogRow, TrainSink};

use crate::config::Experiment;
use crate::output::{num, out_path, provenance_line, Csv};

struct FileSink {
    csv: Csv,
    out_dir: String,
    checkpoints: Vec<PathBuf>,
}

impl TrainSink for FileSink {
    fn on_episode(&mut self, row: &LogRow) {
        self.csv.row(&[
            row.episode.to_string(),
            row.step_count.to_string(),
            num(row.mean_reward),
            num(row.total_secrecy),
            num(row.rho_alloc),
            num(row.rho_power),
            num(row.rho_neg_alloc),
            num(row.rho_step),
            num(row.rho_start),
            num(row.rho_terminal),
        ]);
    }

    fn on_checkpoint(&mut self, episode: usize, bytes: &[u8]) {
        let path = out_path(&self.out_dir, &format!("checkpoint_ep{episode:05}.bin"));
        if let Some(parent) = path.parent() {
            let _ = std::fs::create_dir_all(parent);
        }
        if std::fs::write(&path, bytes).is_ok() {
            self.checkpoints.push(path);
        }
    }
}

pub fn run_train(exp: &Experiment) -> Result<()> {
    let config = exp.file.train_config()?;
    let mut sink = FileSink {
        csv: Csv::new(
            &provenance_line(&exp.config_hash, exp.file.seed),
            "episode,step_count,mean_reward,total_secrecy,rho_r,rho_w,rho_neg_r,rho_q1,rho_q0,rho_qF",
        ),
        out_dir: exp.out_dir.clone(),
        checkpoints: Vec::new(),
    };
    let outcome = train(&config, &mut sink).map_err(|e| anyhow!("training: {e}"))?;
    let log_path = out_path(&exp.out_dir, "training_log.csv");
    sink.csv.write(&log_path)?;

    // The final checkpoint doubles as the canonical evaluation artifact.
    if let Some(last) = sink.checkpoints.last() {
        std::fs::copy(last, out_path(&exp.out_dir, "checkpoint_final.bin"))?;
    }
    println!(
        "trained {} episodes; log at {}",
        outcome.log.len(),
        log_path.display()
    );
    Ok(())
}
