//! Trained models evaluated with shift operators rebuilt from other
//! train/test partitions.
//!
//! For ratio `r`, the GSO comes from the training part of a fresh split with
//! fraction `r`; the models are evaluated on their original test users so
//! that no trained-on label is scored.

use super::plot::{LinePlot, Series};
use super::train::{load_models, task_for_split};
use super::{evaluate, fmt, mean_std, write_csv, ExperimentConfig};
use crate::error::Result;
use crate::movielens::{build_task_with, load_ratings, RatingsMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SplitRow {
    pub split: usize,
    pub ratio: f64,
    pub mu: f64,
    pub rmse: f64,
    pub base_rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSweepReport {
    pub rows: Vec<SplitRow>,
    /// `(ratio, μ, mean RMSE difference, std)`.
    pub summary: Vec<(f64, f64, f64, f64)>,
}

/// Seed of the resampled partition; differs from every training split seed
/// in practice.
pub fn resample_seed(split_seed: u64, ratio: f64) -> u64 {
    split_seed ^ (0x5eed_0000_0000 + (ratio * 1000.0).round() as u64)
}

pub fn run(config: &ExperimentConfig) -> Result<SplitSweepReport> {
    config.validate()?;
    let ratings = load_ratings(&config.data_path)?;
    run_with(config, &ratings)
}

pub fn run_with(config: &ExperimentConfig, ratings: &RatingsMatrix) -> Result<SplitSweepReport> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut provenance = Vec::new();
    for split in 0..config.splits {
        let task = task_for_split(ratings, config, split)?;
        provenance.push(format!("split {split} manifest {}", task.manifest_hash()));
        let models = load_models(config, split, &task)?;
        let base: Vec<f64> = models
            .iter()
            .map(|(_, m)| evaluate(m, &task.gso, &task.test))
            .collect::<Result<_>>()?;
        for &ratio in &config.ratios {
            let other = build_task_with(
                ratings,
                config.target_movie_id,
                ratio,
                resample_seed(task.seed, ratio),
                &config.task,
            )?;
            provenance.push(format!(
                "split {split} ratio {ratio} manifest {}",
                other.manifest_hash()
            ));
            for ((mu, model), &base_rmse) in models.iter().zip(&base) {
                rows.push(SplitRow {
                    split,
                    ratio,
                    mu: *mu,
                    rmse: evaluate(model, &other.gso, &task.test)?,
                    base_rmse,
                });
            }
        }
    }
    let mut summary = Vec::new();
    for &ratio in &config.ratios {
        for &mu in &config.mus {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.ratio == ratio && r.mu == mu)
                .map(|r| r.rmse - r.base_rmse)
                .collect();
            let (m, s) = mean_std(&v);
            summary.push((ratio, mu, m, s));
        }
    }

    let out = &config.output_dir;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.split.to_string(),
                fmt(r.ratio),
                fmt(r.mu),
                fmt(r.rmse),
                fmt(r.base_rmse),
                fmt(r.rmse - r.base_rmse),
            ]
        })
        .collect();
    write_csv(
        &out.join("split_sweep.csv"),
        config,
        &provenance,
        &["split", "ratio", "mu", "rmse", "base_rmse", "rmse_diff"],
        &table,
    )?;
    let table: Vec<Vec<String>> = summary
        .iter()
        .map(|&(r, mu, m, s)| vec![fmt(r), fmt(mu), fmt(m), fmt(s)])
        .collect();
    write_csv(
        &out.join("split_summary.csv"),
        config,
        &provenance,
        &["ratio", "mu", "mean_rmse_diff", "std_rmse_diff"],
        &table,
    )?;
    let series = config
        .mus
        .iter()
        .map(|&mu| {
            Series::line(
                format!("mu = {mu}"),
                summary
                    .iter()
                    .filter(|s| s.1 == mu)
                    .map(|s| (s.0, s.2))
                    .collect(),
            )
        })
        .collect();
    LinePlot::new(
        "RMSE difference across train/test ratios",
        "train ratio",
        "RMSE difference",
        series,
    )
    .save(&out.join("split_sweep.svg"))?;
    Ok(SplitSweepReport { rows, summary })
}
