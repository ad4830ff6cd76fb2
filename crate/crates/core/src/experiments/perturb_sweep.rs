//! Test RMSE on randomly perturbed shift operators `Ŝ = S + ES + SE` with
//! `‖E‖ ≤ ε`, relative to the RMSE on `S`.

use super::plot::{LinePlot, Series};
use super::train::{load_models, task_for_split};
use super::{evaluate, fmt, mean_std, spearman, write_csv, ExperimentConfig};
use crate::error::Result;
use crate::movielens::{load_ratings, RatingsMatrix};
use crate::perturbation::RandomDirection;

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbRow {
    pub split: usize,
    pub draw: u64,
    pub epsilon: f64,
    pub mu: f64,
    pub rmse: f64,
    pub base_rmse: f64,
}

impl PerturbRow {
    pub fn difference(&self) -> f64 {
        self.rmse - self.base_rmse
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbReport {
    pub rows: Vec<PerturbRow>,
    /// `(ε, μ, mean RMSE difference, std)`.
    pub summary: Vec<(f64, f64, f64, f64)>,
    /// `(μ, Spearman ρ of mean difference against ε)`.
    pub trend: Vec<(f64, f64)>,
}

impl PerturbReport {
    pub fn mean_difference(&self, epsilon: f64, mu: f64) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.0 == epsilon && s.1 == mu)
            .map(|s| s.2)
    }
}

/// Seed of draw `d` on a split with seed `s`.
pub fn draw_seed(split_seed: u64, draw: u64) -> u64 {
    split_seed.wrapping_mul(1_000_003).wrapping_add(draw)
}

pub fn run(config: &ExperimentConfig) -> Result<PerturbReport> {
    config.validate()?;
    let ratings = load_ratings(&config.data_path)?;
    run_with(config, &ratings)
}

pub fn run_with(config: &ExperimentConfig, ratings: &RatingsMatrix) -> Result<PerturbReport> {
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
        for &draw in &config.seeds {
            let direction = RandomDirection::draw(&task.gso, draw_seed(task.seed, draw))?;
            for &eps in &config.epsilons {
                let s_hat = direction.at(&task.gso, eps)?.perturbed;
                for ((mu, model), &base_rmse) in models.iter().zip(&base) {
                    let rmse = if eps == 0.0 {
                        base_rmse
                    } else {
                        evaluate(model, &s_hat, &task.test)?
                    };
                    rows.push(PerturbRow {
                        split,
                        draw,
                        epsilon: eps,
                        mu: *mu,
                        rmse,
                        base_rmse,
                    });
                }
            }
        }
    }

    let mut summary = Vec::new();
    for &eps in &config.epsilons {
        for &mu in &config.mus {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.epsilon == eps && r.mu == mu)
                .map(PerturbRow::difference)
                .collect();
            let (m, s) = mean_std(&v);
            summary.push((eps, mu, m, s));
        }
    }
    let trend = config
        .mus
        .iter()
        .map(|&mu| {
            let (x, y): (Vec<f64>, Vec<f64>) = summary
                .iter()
                .filter(|s| s.1 == mu)
                .map(|s| (s.0, s.2))
                .unzip();
            (mu, spearman(&x, &y))
        })
        .collect();

    let out = &config.output_dir;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.split.to_string(),
                r.draw.to_string(),
                fmt(r.epsilon),
                fmt(r.mu),
                fmt(r.rmse),
                fmt(r.base_rmse),
                fmt(r.difference()),
            ]
        })
        .collect();
    write_csv(
        &out.join("perturb_sweep.csv"),
        config,
        &provenance,
        &[
            "split",
            "draw",
            "epsilon",
            "mu",
            "rmse",
            "base_rmse",
            "rmse_diff",
        ],
        &table,
    )?;
    let table: Vec<Vec<String>> = summary
        .iter()
        .map(|&(e, mu, m, s)| vec![fmt(e), fmt(mu), fmt(m), fmt(s)])
        .collect();
    write_csv(
        &out.join("perturb_summary.csv"),
        config,
        &provenance,
        &["epsilon", "mu", "mean_rmse_diff", "std_rmse_diff"],
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
        "RMSE difference under relative perturbations",
        "epsilon",
        "RMSE difference",
        series,
    )
    .save(&out.join("perturb_sweep.svg"))?;
    Ok(PerturbReport {
        rows,
        summary,
        trend,
    })
}
