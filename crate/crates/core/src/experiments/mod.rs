//! Experiment runners behind the `gnnstab` commands. Every runner writes CSV
//! files whose leading `#` lines carry the crate version, the configuration
//! and the provenance of the shift operators used.

pub mod demo;
pub mod perturb_sweep;
pub mod plot;
pub mod split_sweep;
pub mod train;
pub mod transfer;
pub mod verify;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::{predict_many, Activation, Dataset, GnnModel, LayerShape};
use crate::graph::Gso;
use crate::movielens::{rmse, TaskOptions, STAR_WARS_ID};

/// Crate version and `git describe` of the build.
pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (",
    env!("GNNSTAB_GIT_DESCRIBE"),
    ")"
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Train,
    Transfer,
    PerturbSweep,
    SplitSweep,
    Verify,
    Demo,
}

/// Settings shared by all commands; echoed into every output header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub data_path: PathBuf,
    pub target_movie_id: u32,
    /// Penalty weights; one model per value.
    pub mus: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// Number of split realizations.
    pub splits: usize,
    /// Split `i` uses seed `split_seed + i`.
    pub split_seed: u64,
    /// Perturbation draws (perturb-sweep) or synthetic cases (verify).
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub features: usize,
    pub taps: usize,
    pub train_fraction: f64,
    /// Train/test ratios for split-sweep.
    pub ratios: Vec<f64>,
    /// Transfer targets; empty selects the most-rated movies.
    pub movies: Vec<u32>,
    pub transfer_count: usize,
    pub task: TaskOptions,
    pub output_dir: PathBuf,
    pub quick: bool,
    pub inject_fault: bool,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            data_path: PathBuf::from("data/ml-100k/u.data"),
            target_movie_id: STAR_WARS_ID,
            mus: vec![0.0, 0.5],
            epsilons: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            splits: 10,
            split_seed: 0,
            seeds: (0..10).collect(),
            epochs: 40,
            batch_size: 5,
            features: 64,
            taps: 5,
            train_fraction: 0.9,
            ratios: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            movies: Vec::new(),
            transfer_count: 6,
            task: TaskOptions::default(),
            output_dir: PathBuf::from("out"),
            quick: false,
            inject_fault: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.mus.is_empty() || self.mus.iter().any(|m| !(*m >= 0.0)) {
            return bad(format!(
                "mu values {:?} must be nonempty and >= 0",
                self.mus
            ));
        }
        if self.epsilons.iter().any(|e| !(*e >= 0.0)) {
            return bad(format!("epsilon values {:?} must be >= 0", self.epsilons));
        }
        if self.splits == 0 {
            return bad("at least one split is required".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.batch_size == 0 || self.features == 0 || self.taps == 0 {
            return bad("batch size, features and taps must be positive".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train fraction {} must lie in (0, 1)",
                self.train_fraction
            ));
        }
        if self.ratios.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return bad(format!("ratios {:?} must lie in (0, 1)", self.ratios));
        }
        if self.task.knn == 0 {
            return bad("knn must be positive".into());
        }
        Ok(())
    }

    pub fn split_seed_of(&self, split: usize) -> u64 {
        self.split_seed + split as u64
    }

    pub fn shapes(&self) -> Vec<LayerShape> {
        vec![LayerShape {
            features: self.features,
            taps: self.taps,
            activation: Activation::Relu,
        }]
    }

    pub fn checkpoint_path(&self, split: usize, mu: f64) -> PathBuf {
        self.output_dir
            .join("checkpoints")
            .join(format!("split{split:02}-mu{mu}.json"))
    }

    fn echo(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        }
    }
    Ok(())
}

/// Writes `# gnnstab`, `# config` and `# gso` lines followed by the CSV table.
pub fn write_csv(
    path: &Path,
    config: &ExperimentConfig,
    provenance: &[String],
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    create_parent(path)?;
    let file =
        fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(format!("writing {}", path.display()), e);
    writeln!(out, "# gnnstab {VERSION}").map_err(io)?;
    writeln!(out, "# config: {}", config.echo()).map_err(io)?;
    for p in provenance {
        writeln!(out, "# gso: {p}").map_err(io)?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush().map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads a CSV written by [`write_csv`], skipping the `#` lines.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
    Ok((header, rows))
}

/// Test RMSE of `model` on `data` with shift operator `s`.
pub fn evaluate(model: &GnnModel, s: &Gso, data: &Dataset) -> Result<f64> {
    let predictions = predict_many(model, s, &data.signals())?;
    rmse(&predictions, &data.targets())
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Spearman rank correlation, averaging ranks of ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let r = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                out[k] = r;
            }
            i = j + 1;
        }
        out
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, _) = mean_std(&rx);
    let (my, _) = mean_std(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

pub(crate) fn fmt(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let c = ExperimentConfig::new(Command::Train);
        c.validate().unwrap();
        assert_eq!(c.split_seed_of(3), 3);
        assert!(c
            .checkpoint_path(2, 0.5)
            .ends_with("checkpoints/split02-mu0.5.json"));
    }

    #[test]
    fn invalid_configs() {
        let base = ExperimentConfig::new(Command::Train);
        let mut c = base.clone();
        c.mus = vec![-1.0];
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = base.clone();
        c.splits = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.ratios = vec![1.0];
        assert!(c.validate().is_err());
        let mut c = base;
        c.epsilons = vec![f64::NAN];
        assert!(c.validate().is_err());
    }

    #[test]
    fn csv_roundtrip_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/t.csv");
        let c = ExperimentConfig::new(Command::Demo);
        write_csv(
            &path,
            &c,
            &["abc".into()],
            &["a", "b"],
            &[vec!["1".into(), "x".into()]],
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# gnnstab "));
        assert!(text.contains("# config: {\"command\":\"demo\""));
        assert!(text.contains("# gso: abc\n"));
        let (h, rows) = read_csv(&path).unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(rows, vec![vec!["1".to_string(), "x".to_string()]]);
    }

    #[test]
    fn statistics() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 25.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(spearman(&[1.0, 2.0], &[5.0, 5.0]), 0.0);
    }
}
