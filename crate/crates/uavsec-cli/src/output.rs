//! CSV emission with provenance headers, and the empirical CDF.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// Provenance comment carried by every output CSV: effective config hash,
/// seed, and the tool version.
pub fn provenance_line(config_hash: &str, seed: u64) -> String {
    format!(
        "# config_hash={config_hash} seed={seed} version=uavsec-{}",
        env!("CARGO_PKG_VERSION")
    )
}

/// A CSV file under construction: provenance comment, header row, data rows.
pub struct Csv {
    lines: Vec<String>,
}

impl Csv {
    pub fn new(provenance: &str, header: &str) -> Self {
        Self {
            lines: vec![provenance.to_string(), header.to_string()],
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.lines.push(cells.join(","));
    }

    pub fn body(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(path, self.body()).with_context(|| format!("writing {}", path.display()))
    }
}

/// Format a float deterministically (shortest round-trip representation).
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Empirical CDF of the samples: one `(rate, cumulative_fraction)` pair per
/// distinct sample value, right-continuous, ending at exactly 1.0.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        bail!("cdf needs at least one sample");
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
    let n = sorted.len();
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n as f64;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = frac,
            _ => out.push((x, frac)),
        }
    }
    // The final fraction is n/n by construction; pin it against rounding.
    if let Some(last) = out.last_mut() {
        last.1 = 1.0;
    }
    Ok(out)
}

/// Write `cdf.csv` from per-user secrecy samples.
pub fn write_cdf(path: &Path, provenance: &str, samples: &[f64]) -> Result<()> {
    let cdf = empirical_cdf(samples)?;
    let mut csv = Csv::new(provenance, "rate,cumulative_fraction");
    for (rate, frac) in cdf {
        csv.row(&[num(rate), num(frac)]);
    }
    csv.write(path)
}

pub fn out_path(dir: &str, name: &str) -> PathBuf {
    PathBuf::from(dir).join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_jumps_to_one() {
        let cdf = empirical_cdf(&[2.5]).unwrap();
        assert_eq!(cdf, vec![(2.5, 1.0)]);
    }

    #[test]
    fn three_samples_have_third_fractions() {
        let cdf = empirical_cdf(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(
            cdf,
            vec![(1.0, 1.0 / 3.0), (2.0, 2.0 / 3.0), (3.0, 1.0)]
        );
    }

    #[test]
    fn duplicate_samples_merge_right_continuously() {
        let cdf = empirical_cdf(&[1.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(cdf, vec![(1.0, 0.5), (2.0, 1.0)]);
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one() {
        let samples: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let cdf = empirical_cdf(&samples).unwrap();
        for w in cdf.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
        assert_eq!(cdf.last().unwrap().1, 1.0);
    }

    #[test]
    fn empty_samples_error() {
        assert!(empirical_cdf(&[]).is_err());
    }

    #[test]
    fn csv_layout_has_provenance_then_header() {
        let mut csv = Csv::new("# config_hash=ab seed=1 version=uavsec-0.1.0", "a,b");
        csv.row(&["1".into(), "2".into()]);
        let body = csv.body();
        let lines: Vec<&str> = body.lines().collect();
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "1,2");
    }
}
