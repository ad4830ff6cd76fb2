use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::forward::{backward_from_output, first_layer_shifts, forward_from_shifts, Gradients};
use super::loss::{smooth_l1, smooth_l1_grad};
use super::model::GnnModel;
use super::penalty::{penalty, PenaltyGrid};
use crate::error::{Error, Result};
use crate::graph::{GraphSignal, Gso};
use crate::spectral::{eigenvalues_symmetric, DEFAULT_GRID_SIZE};

/// Training hyperparameters. Defaults are the MovieLens settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Penalty weight `μ`.
    pub mu: f64,
    /// Penalty interval; `None` uses the eigenvalue range of the training GSO.
    pub lambda_interval: Option<(f64, f64)>,
    pub grid_size: usize,
    pub adam: AdamConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mu: 0.0,
            lambda_interval: None,
            grid_size: DEFAULT_GRID_SIZE,
            adam: AdamConfig::default(),
            epochs: 40,
            batch_size: 5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let a = &self.adam;
        if !(self.mu >= 0.0) {
            return Err(Error::Config(format!("mu = {} must be >= 0", self.mu)));
        }
        if self.batch_size == 0 || self.grid_size == 0 {
            return Err(Error::Config(
                "batch and grid sizes must be positive".into(),
            ));
        }
        if !(a.learning_rate > 0.0 && a.epsilon > 0.0)
            || !(0.0..1.0).contains(&a.beta1)
            || !(0.0..1.0).contains(&a.beta2)
        {
            return Err(Error::Config(format!("invalid ADAM settings {a:?}")));
        }
        if let Some((lo, hi)) = self.lambda_interval {
            if !(lo < hi) {
                return Err(Error::EmptyInterval { a: lo, b: hi });
            }
        }
        Ok(())
    }
}

/// Input/target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: GraphSignal,
    pub y: f64,
}

/// Samples sharing one node count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if let Some(first) = samples.first() {
            let n = first.x.node_count();
            if samples.iter().any(|s| s.x.node_count() != n) {
                return Err(Error::Shape(
                    "dataset signals have different node counts".into(),
                ));
            }
        }
        Ok(Dataset { samples })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn signals(&self) -> Vec<GraphSignal> {
        self.samples.iter().map(|s| s.x.clone()).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.y).collect()
    }
}

/// Per-epoch averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean smooth L1 loss over the epoch's samples (evaluated before each update).
    pub loss: f64,
    /// Penalty value at the end of the epoch (without the factor `μ`).
    pub penalty: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: GnnModel,
    pub trace: Vec<EpochStats>,
    pub interval: (f64, f64),
}

/// `epoch,loss,penalty` rows.
pub fn write_trace_csv<W: Write>(trace: &[EpochStats], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["epoch", "loss", "penalty"])?;
    for e in trace {
        wtr.write_record(&[
            e.epoch.to_string(),
            format!("{:?}", e.loss),
            format!("{:?}", e.penalty),
        ])?;
    }
    wtr.flush()
        .map_err(|e| Error::io("writing loss trace", e))?;
    Ok(())
}

/// Eigenvalue range of `S`.
pub fn spectral_interval(s: &Gso) -> Result<(f64, f64)> {
    let vals = eigenvalues_symmetric(s.matrix())?;
    Ok((vals[0], vals[vals.len() - 1]))
}

/// Mini-batch ADAM on `mean_batch smooth_l1 + μ·penalty`, reshuffling the
/// samples with a seeded generator every epoch.
pub fn train(
    mut model: GnnModel,
    s: &Gso,
    data: &Dataset,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let interval = match config.lambda_interval {
        Some(i) => i,
        None => spectral_interval(s)?,
    };
    let grid = PenaltyGrid::new(interval, config.grid_size)?;
    let shifts = first_layer_shifts(&model, s, &data.signals())?;
    let targets = data.targets();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(model.parameter_count(), config.adam);
    let mut params = model.parameters();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads = Gradients::zeros(&model);
            for &i in batch {
                let fwd = forward_from_shifts(&model, s, shifts[i].clone(), true);
                loss_sum += smooth_l1(fwd.prediction, targets[i]);
                let g = backward_from_output(
                    &model,
                    s,
                    &fwd,
                    smooth_l1_grad(fwd.prediction, targets[i]),
                )?;
                grads.add_scaled(1.0, &g);
            }
            grads.scale(1.0 / batch.len() as f64);
            if config.mu != 0.0 {
                grads.add_scaled(config.mu, &penalty(&model, &grid).gradients);
            }
            adam.step(&mut params, &grads.flatten());
            model.set_parameters(&params)?;
        }
        trace.push(EpochStats {
            epoch,
            loss: loss_sum / data.len() as f64,
            penalty: penalty(&model, &grid).value,
        });
    }
    Ok(TrainOutcome {
        model,
        trace,
        interval,
    })
}
