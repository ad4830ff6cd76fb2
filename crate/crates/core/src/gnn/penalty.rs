//! Integral-Lipschitz penalty `Σ_filters max_{λ∈[λ_a,λ_b]} |λ h′(λ)|`.

use super::forward::Gradients;
use super::model::GnnModel;
use crate::error::{Error, Result};
use crate::filters::FilterTaps;
use crate::spectral::uniform_grid;

/// Evaluation grid for the penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyGrid {
    interval: (f64, f64),
    points: Vec<f64>,
}

impl PenaltyGrid {
    pub fn new(interval: (f64, f64), size: usize) -> Result<Self> {
        let (a, b) = interval;
        if !(a < b) {
            return Err(Error::EmptyInterval { a, b });
        }
        if size == 0 {
            return Err(Error::Validation("empty penalty grid".into()));
        }
        Ok(PenaltyGrid {
            interval,
            points: uniform_grid(a, b, size),
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Penalty value and a subgradient with respect to every tap.
#[derive(Debug, Clone)]
pub struct PenaltyValue {
    pub value: f64,
    /// Only the tap entries are nonzero.
    pub gradients: Gradients,
}

/// `(max_λ |λ h′(λ)|, subgradient)` for one filter, taking the lowest-index argmax.
pub fn filter_penalty(h: &FilterTaps, grid: &PenaltyGrid) -> (f64, Vec<f64>) {
    let (mut best_val, mut best_lambda, mut best_signed) = (f64::NEG_INFINITY, 0.0, 0.0);
    for &l in grid.points() {
        let signed = l * h.derivative(l);
        if signed.abs() > best_val {
            best_val = signed.abs();
            best_lambda = l;
            best_signed = signed;
        }
    }
    // d|λh′(λ)|/dh_k = sign(λh′(λ)) · k λ^k
    let sign = if best_signed > 0.0 {
        1.0
    } else if best_signed < 0.0 {
        -1.0
    } else {
        0.0
    };
    let grad = (0..h.len())
        .map(|k| sign * k as f64 * best_lambda.powi(k as i32))
        .collect();
    (best_val, grad)
}

/// Summed per-filter maxima over every bank of the model.
pub fn penalty(model: &GnnModel, grid: &PenaltyGrid) -> PenaltyValue {
    let mut gradients = Gradients::zeros(model);
    let mut value = 0.0;
    for (l, layer) in model.layers().iter().enumerate() {
        for (i, h) in layer.bank.filters().enumerate() {
            let (v, g) = filter_penalty(h, grid);
            value += v;
            gradients.taps[l][i] = g;
        }
    }
    PenaltyValue { value, gradients }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterBank;
    use crate::gnn::model::{Activation, LayerSpec};
    use crate::spectral::response_derivative_scaled;

    fn model_with(filters: Vec<Vec<f64>>) -> GnnModel {
        let n = filters.len();
        let bank = FilterBank::new(
            1,
            n,
            filters
                .into_iter()
                .map(|t| FilterTaps::new(t).unwrap())
                .collect(),
        )
        .unwrap();
        let layer = LayerSpec {
            bank,
            activation: Activation::Relu,
        };
        GnnModel::new(vec![layer], vec![1.0; n], 0.0, 0).unwrap()
    }

    #[test]
    fn zero_taps() {
        let grid = PenaltyGrid::new((-1.0, 3.0), 101).unwrap();
        let p = penalty(&model_with(vec![vec![0.0; 4]; 3]), &grid);
        assert_eq!(p.value, 0.0);
        assert!(p.gradients.flatten().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn pure_shift() {
        let grid = PenaltyGrid::new((0.0, 2.0), 1001).unwrap();
        let (v, g) = filter_penalty(&FilterTaps::new(vec![0.0, 1.0]).unwrap(), &grid);
        assert_eq!(v, 2.0);
        assert_eq!(g, vec![0.0, 2.0]);
    }

    #[test]
    fn constant_filters() {
        let grid = PenaltyGrid::new((-5.0, 5.0), 1001).unwrap();
        let p = penalty(&model_with(vec![vec![3.0], vec![-7.5]]), &grid);
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn sum_of_grid_maxima() {
        let grid = PenaltyGrid::new((-1.5, 2.5), 1001).unwrap();
        let filters = [
            vec![0.1, -0.4, 0.3],
            vec![1.0, 0.2, 0.0, -0.1],
            vec![0.0, 0.0, 0.5],
        ];
        let k = filters.iter().map(Vec::len).max().unwrap();
        let padded: Vec<Vec<f64>> = filters
            .iter()
            .map(|f| {
                let mut f = f.clone();
                f.resize(k, 0.0);
                f
            })
            .collect();
        let p = penalty(&model_with(padded.clone()), &grid);
        let expected: f64 = padded
            .iter()
            .map(|f| {
                response_derivative_scaled(&FilterTaps::new(f.clone()).unwrap(), grid.points())
                    .into_iter()
                    .fold(0.0, f64::max)
            })
            .sum();
        assert!((p.value - expected).abs() < 1e-12);
    }

    #[test]
    fn invalid_grids() {
        assert!(matches!(
            PenaltyGrid::new((1.0, 0.0), 10),
            Err(Error::EmptyInterval { .. })
        ));
        assert!(PenaltyGrid::new((0.0, 1.0), 0).is_err());
    }
}
