//! Models trained for one movie, evaluated on other movies' tasks by moving
//! the readout to the other movie's node.

use super::plot::{LinePlot, Series};
use super::train::{load_models, task_for_split};
use super::{evaluate, fmt, mean_std, write_csv, ExperimentConfig};
use crate::error::Result;
use crate::movielens::{build_task_with, load_ratings, RatingsMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct TransferRow {
    pub split: usize,
    pub movie_id: u32,
    pub mu: f64,
    pub rmse: f64,
    pub base_rmse: f64,
    /// `100·(rmse − base)/base`.
    pub degradation_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub rows: Vec<TransferRow>,
    /// `(movie, μ, mean %, std %)`.
    pub summary: Vec<(u32, f64, f64, f64)>,
}

pub fn movies(config: &ExperimentConfig, ratings: &RatingsMatrix) -> Vec<u32> {
    if config.movies.is_empty() {
        ratings.most_rated(config.transfer_count)
    } else {
        config.movies.clone()
    }
}

pub fn run(config: &ExperimentConfig) -> Result<TransferReport> {
    config.validate()?;
    let ratings = load_ratings(&config.data_path)?;
    run_with(config, &ratings)
}

pub fn run_with(config: &ExperimentConfig, ratings: &RatingsMatrix) -> Result<TransferReport> {
    config.validate()?;
    let targets = movies(config, ratings);
    let mut rows = Vec::new();
    let mut provenance = Vec::new();
    for split in 0..config.splits {
        let base_task = task_for_split(ratings, config, split)?;
        let models = load_models(config, split, &base_task)?;
        let base: Vec<f64> = models
            .iter()
            .map(|(_, m)| evaluate(m, &base_task.gso, &base_task.test))
            .collect::<Result<_>>()?;
        for &movie in &targets {
            let task = if movie == config.target_movie_id {
                base_task.clone()
            } else {
                build_task_with(
                    ratings,
                    movie,
                    config.train_fraction,
                    base_task.seed,
                    &config.task,
                )?
            };
            provenance.push(format!(
                "split {split} movie {movie} manifest {}",
                task.manifest_hash()
            ));
            for ((mu, model), &base_rmse) in models.iter().zip(&base) {
                let rmse = evaluate(&model.with_node(task.target), &task.gso, &task.test)?;
                rows.push(TransferRow {
                    split,
                    movie_id: movie,
                    mu: *mu,
                    rmse,
                    base_rmse,
                    degradation_pct: 100.0 * (rmse - base_rmse) / base_rmse,
                });
            }
        }
    }
    let mut summary = Vec::new();
    for &movie in &targets {
        for &mu in &config.mus {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.movie_id == movie && r.mu == mu)
                .map(|r| r.degradation_pct)
                .collect();
            let (m, s) = mean_std(&v);
            summary.push((movie, mu, m, s));
        }
    }

    let out = &config.output_dir;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.split.to_string(),
                r.movie_id.to_string(),
                fmt(r.mu),
                fmt(r.rmse),
                fmt(r.base_rmse),
                fmt(r.degradation_pct),
            ]
        })
        .collect();
    write_csv(
        &out.join("transfer.csv"),
        config,
        &provenance,
        &[
            "split",
            "movie_id",
            "mu",
            "rmse",
            "base_rmse",
            "degradation_pct",
        ],
        &table,
    )?;
    let table: Vec<Vec<String>> = summary
        .iter()
        .map(|&(movie, mu, m, s)| vec![movie.to_string(), fmt(mu), fmt(m), fmt(s)])
        .collect();
    write_csv(
        &out.join("transfer_summary.csv"),
        config,
        &provenance,
        &[
            "movie_id",
            "mu",
            "mean_degradation_pct",
            "std_degradation_pct",
        ],
        &table,
    )?;
    let series = config
        .mus
        .iter()
        .map(|&mu| {
            Series::markers(
                format!("mu = {mu}"),
                summary
                    .iter()
                    .filter(|s| s.1 == mu)
                    .map(|s| (s.0 as f64, s.2))
                    .collect(),
            )
        })
        .collect();
    LinePlot::new(
        "RMSE degradation on other movies",
        "movie id",
        "degradation (%)",
        series,
    )
    .save(&out.join("transfer.svg"))?;
    Ok(TransferReport { rows, summary })
}
