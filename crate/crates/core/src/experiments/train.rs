//! Star-Wars rating prediction over several split realizations, one model
//! per penalty weight.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::plot::{LinePlot, Series};
use super::{evaluate, fmt, mean_std, write_csv, ExperimentConfig};
use crate::error::{Error, Result};
use crate::gnn::{
    penalty, train, write_trace_csv, Checkpoint, GnnModel, PenaltyGrid, TrainConfig, TrainOutcome,
};
use crate::movielens::{build_task_with, load_ratings, RatingsMatrix, TaskSplit};

/// One trained model on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub split: usize,
    pub seed: u64,
    pub mu: f64,
    pub test_rmse: f64,
    pub train_rmse: f64,
    /// Penalty value of the trained model on the training interval.
    pub penalty: f64,
    pub manifest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub results: Vec<SplitResult>,
    /// `(μ, mean test RMSE, std)`.
    pub summary: Vec<(f64, f64, f64)>,
}

impl TrainReport {
    pub fn mean_rmse(&self, mu: f64) -> Option<f64> {
        self.summary.iter().find(|s| s.0 == mu).map(|s| s.1)
    }
}

pub fn task_for_split(
    ratings: &RatingsMatrix,
    config: &ExperimentConfig,
    split: usize,
) -> Result<TaskSplit> {
    build_task_with(
        ratings,
        config.target_movie_id,
        config.train_fraction,
        config.split_seed_of(split),
        &config.task,
    )
}

pub fn train_config(
    config: &ExperimentConfig,
    task: &TaskSplit,
    mu: f64,
    seed: u64,
) -> TrainConfig {
    TrainConfig {
        mu,
        lambda_interval: Some(task.interval),
        epochs: config.epochs,
        batch_size: config.batch_size,
        seed,
        ..TrainConfig::default()
    }
}

/// Trains one model per `μ` on `task`. All models start from the same
/// initialization, drawn from the split seed.
pub fn train_models(
    config: &ExperimentConfig,
    task: &TaskSplit,
) -> Result<Vec<(f64, TrainOutcome)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(task.seed);
    let init = GnnModel::init(1, &config.shapes(), task.target, &mut rng)?;
    config
        .mus
        .iter()
        .map(|&mu| {
            let cfg = train_config(config, task, mu, task.seed);
            Ok((mu, train(init.clone(), &task.gso, &task.train, &cfg)?))
        })
        .collect()
}

pub fn run(config: &ExperimentConfig) -> Result<TrainReport> {
    config.validate()?;
    let ratings = load_ratings(&config.data_path)?;
    run_with(config, &ratings)
}

pub fn run_with(config: &ExperimentConfig, ratings: &RatingsMatrix) -> Result<TrainReport> {
    config.validate()?;
    let out = &config.output_dir;
    let mut results = Vec::new();
    let mut manifests = Vec::new();
    for split in 0..config.splits {
        let task = task_for_split(ratings, config, split)?;
        if task.test.is_empty() {
            return Err(Error::Config(format!(
                "split {split} has an empty test set"
            )));
        }
        let manifest = task.manifest_hash();
        manifests.push(format!(
            "split {split} seed {} manifest {manifest}",
            task.seed
        ));
        let mpath = out.join(format!("manifests/split{split:02}.csv"));
        std::fs::create_dir_all(out.join("manifests"))
            .map_err(|e| Error::io("creating manifests dir", e))?;
        let file =
            std::fs::File::create(&mpath).map_err(|e| Error::io(mpath.display().to_string(), e))?;
        task.write_manifest(file)?;

        let grid = PenaltyGrid::new(task.interval, crate::spectral::DEFAULT_GRID_SIZE)?;
        for (mu, outcome) in train_models(config, &task)? {
            let test_rmse = evaluate(&outcome.model, &task.gso, &task.test)?;
            let train_rmse = evaluate(&outcome.model, &task.gso, &task.train)?;
            let ck_config = json!({
                "target_movie_id": config.target_movie_id,
                "split": split,
                "seed": task.seed,
                "train_fraction": config.train_fraction,
                "task": config.task,
                "train": train_config(config, &task, mu, task.seed),
                "manifest": manifest,
            });
            let path = config.checkpoint_path(split, mu);
            std::fs::create_dir_all(path.parent().expect("checkpoint dir"))
                .map_err(|e| Error::io("creating checkpoint dir", e))?;
            Checkpoint::new(outcome.model.clone(), task.gso.node_count(), ck_config).save(&path)?;
            let tpath = out.join(format!("traces/split{split:02}-mu{mu}.csv"));
            std::fs::create_dir_all(out.join("traces"))
                .map_err(|e| Error::io("creating traces dir", e))?;
            let file = std::fs::File::create(&tpath)
                .map_err(|e| Error::io(tpath.display().to_string(), e))?;
            write_trace_csv(&outcome.trace, file)?;
            results.push(SplitResult {
                split,
                seed: task.seed,
                mu,
                test_rmse,
                train_rmse,
                penalty: penalty(&outcome.model, &grid).value,
                manifest: manifest.clone(),
            });
        }
    }

    let summary: Vec<(f64, f64, f64)> = config
        .mus
        .iter()
        .map(|&mu| {
            let v: Vec<f64> = results
                .iter()
                .filter(|r| r.mu == mu)
                .map(|r| r.test_rmse)
                .collect();
            let (m, s) = mean_std(&v);
            (mu, m, s)
        })
        .collect();

    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.split.to_string(),
                r.seed.to_string(),
                fmt(r.mu),
                fmt(r.test_rmse),
                fmt(r.train_rmse),
                fmt(r.penalty),
                r.manifest.clone(),
            ]
        })
        .collect();
    write_csv(
        &out.join("train_rmse.csv"),
        config,
        &manifests,
        &[
            "split",
            "seed",
            "mu",
            "test_rmse",
            "train_rmse",
            "penalty",
            "manifest",
        ],
        &rows,
    )?;
    let rows: Vec<Vec<String>> = summary
        .iter()
        .map(|&(mu, m, s)| vec![fmt(mu), fmt(m), fmt(s), config.splits.to_string()])
        .collect();
    write_csv(
        &out.join("train_summary.csv"),
        config,
        &manifests,
        &["mu", "mean_rmse", "std_rmse", "splits"],
        &rows,
    )?;
    let series = config
        .mus
        .iter()
        .map(|&mu| {
            Series::markers(
                format!("mu = {mu}"),
                results
                    .iter()
                    .filter(|r| r.mu == mu)
                    .map(|r| (r.split as f64, r.test_rmse))
                    .collect(),
            )
        })
        .collect();
    LinePlot::new("Test RMSE per split", "split", "RMSE", series)
        .save(&out.join("train_rmse.svg"))?;

    Ok(TrainReport { results, summary })
}

/// Loads the checkpoints written by [`run`] for one split, one per `μ`, and
/// checks that they were trained on `task`.
pub fn load_models(
    config: &ExperimentConfig,
    split: usize,
    task: &TaskSplit,
) -> Result<Vec<(f64, GnnModel)>> {
    let manifest = task.manifest_hash();
    config
        .mus
        .iter()
        .map(|&mu| {
            let path = config.checkpoint_path(split, mu);
            if !path.exists() {
                return Err(Error::Config(format!(
                    "missing checkpoint {}; run `gnnstab train` with the same settings first",
                    path.display()
                )));
            }
            let ck = Checkpoint::load(&path)?;
            if ck.config.get("manifest").and_then(|m| m.as_str()) != Some(manifest.as_str()) {
                return Err(Error::Config(format!(
                    "checkpoint {} was trained on a different split",
                    path.display()
                )));
            }
            Ok((mu, ck.model))
        })
        .collect()
}
