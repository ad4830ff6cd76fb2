use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{FilterBank, FilterTaps};

/// Pointwise nonlinearity. All variants are 1-Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative at the pre-activation `x` (`relu′(0) = 0`).
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - x.tanh().powi(2),
            Activation::Linear => 1.0,
        }
    }
}

/// One graph convolutional layer: a filter bank followed by an activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub bank: FilterBank,
    pub activation: Activation,
}

/// Shape of a layer for random initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerShape {
    pub features: usize,
    pub taps: usize,
    pub activation: Activation,
}

/// Cascade of graph convolutional layers with a linear readout of the last
/// layer's features at a single node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct GnnModel {
    layers: Vec<LayerSpec>,
    readout: Vec<f64>,
    bias: f64,
    node: usize,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    layers: Vec<LayerSpec>,
    readout: Vec<f64>,
    bias: f64,
    node: usize,
}

impl TryFrom<RawModel> for GnnModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        GnnModel::new(raw.layers, raw.readout, raw.bias, raw.node)
    }
}

impl From<GnnModel> for RawModel {
    fn from(m: GnnModel) -> Self {
        RawModel {
            layers: m.layers,
            readout: m.readout,
            bias: m.bias,
            node: m.node,
        }
    }
}

impl GnnModel {
    pub fn new(layers: Vec<LayerSpec>, readout: Vec<f64>, bias: f64, node: usize) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Validation("a GNN needs at least one layer".into()));
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[0].bank.f_out() != pair[1].bank.f_in() {
                return Err(Error::Shape(format!(
                    "layer {} outputs {} features but layer {} expects {}",
                    l,
                    pair[0].bank.f_out(),
                    l + 1,
                    pair[1].bank.f_in()
                )));
            }
        }
        let f_last = layers[layers.len() - 1].bank.f_out();
        if readout.len() != f_last {
            return Err(Error::Shape(format!(
                "readout has {} weights for {f_last} features",
                readout.len()
            )));
        }
        if readout.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
            return Err(Error::Validation(
                "readout parameters must be finite".into(),
            ));
        }
        Ok(GnnModel {
            layers,
            readout,
            bias,
            node,
        })
    }

    /// Random initialization: taps of a layer with `F_in` inputs and `K` taps are
    /// uniform in `±1/√(F_in·K)`, readout weights uniform in `±1/√F_L`, bias zero.
    pub fn init<R: Rng>(
        input_features: usize,
        shapes: &[LayerShape],
        node: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut layers = Vec::with_capacity(shapes.len());
        let mut f_in = input_features;
        for shape in shapes {
            if shape.features == 0 || shape.taps == 0 || f_in == 0 {
                return Err(Error::Validation(
                    "layer dimensions must be positive".into(),
                ));
            }
            let bound = 1.0 / ((f_in * shape.taps) as f64).sqrt();
            let filters = (0..f_in * shape.features)
                .map(|_| {
                    FilterTaps::new(
                        (0..shape.taps)
                            .map(|_| rng.gen_range(-bound..=bound))
                            .collect(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            layers.push(LayerSpec {
                bank: FilterBank::new(f_in, shape.features, filters)?,
                activation: shape.activation,
            });
            f_in = shape.features;
        }
        let bound = 1.0 / (f_in as f64).sqrt();
        let readout = (0..f_in).map(|_| rng.gen_range(-bound..=bound)).collect();
        GnnModel::new(layers, readout, 0.0, node)
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerSpec] {
        &mut self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_features(&self) -> usize {
        self.layers[0].bank.f_in()
    }

    pub fn output_features(&self) -> usize {
        self.readout.len()
    }

    pub fn readout(&self) -> &[f64] {
        &self.readout
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Node whose features feed the readout.
    pub fn node(&self) -> usize {
        self.node
    }

    /// Same parameters, reading out at another node.
    pub fn with_node(&self, node: usize) -> GnnModel {
        GnnModel {
            node,
            ..self.clone()
        }
    }

    pub fn set_readout(&mut self, readout: Vec<f64>, bias: f64) -> Result<()> {
        if readout.len() != self.readout.len() {
            return Err(Error::Shape(format!(
                "readout has {} weights, expected {}",
                readout.len(),
                self.readout.len()
            )));
        }
        self.readout = readout;
        self.bias = bias;
        Ok(())
    }

    /// Total number of trainable scalars.
    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.bank.f_in() * l.bank.f_out() * l.bank.k())
            .sum::<usize>()
            + self.readout.len()
            + 1
    }

    /// Flattened parameters: every layer's taps (filter-major, row-major over
    /// `(f, g)`), then readout weights, then the bias.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for layer in &self.layers {
            for h in layer.bank.filters() {
                out.extend_from_slice(h.as_slice());
            }
        }
        out.extend_from_slice(&self.readout);
        out.push(self.bias);
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::Shape(format!(
                "{} parameters given, model has {}",
                params.len(),
                self.parameter_count()
            )));
        }
        let mut it = params.iter().copied();
        for layer in &mut self.layers {
            for h in layer.bank.filters_mut() {
                for t in h.as_mut_slice() {
                    *t = it.next().expect("length checked");
                }
            }
        }
        for w in &mut self.readout {
            *w = it.next().expect("length checked");
        }
        self.bias = it.next().expect("length checked");
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn activations_are_normalized_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for act in [Activation::Relu, Activation::Tanh, Activation::Linear] {
            for _ in 0..1000 {
                let a: f64 = rng.gen_range(-5.0..5.0);
                let b: f64 = rng.gen_range(-5.0..5.0);
                assert!((act.apply(b) - act.apply(a)).abs() <= (b - a).abs() + 1e-12);
            }
        }
    }

    #[test]
    fn init_bounds_and_chaining() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let shapes = [
            LayerShape {
                features: 4,
                taps: 3,
                activation: Activation::Relu,
            },
            LayerShape {
                features: 2,
                taps: 5,
                activation: Activation::Tanh,
            },
        ];
        let m = GnnModel::init(2, &shapes, 0, &mut rng).unwrap();
        assert_eq!(m.parameter_count(), 2 * 4 * 3 + 4 * 2 * 5 + 2 + 1);
        let b0 = 1.0 / 6f64.sqrt();
        assert!(m.layers()[0]
            .bank
            .filters()
            .all(|h| h.as_slice().iter().all(|t| t.abs() <= b0)));
        let b1 = 1.0 / 20f64.sqrt();
        assert!(m.layers()[1]
            .bank
            .filters()
            .all(|h| h.as_slice().iter().all(|t| t.abs() <= b1)));
        assert_eq!(m.bias(), 0.0);
    }

    #[test]
    fn parameter_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let shapes = [LayerShape {
            features: 3,
            taps: 2,
            activation: Activation::Relu,
        }];
        let mut m = GnnModel::init(2, &shapes, 1, &mut rng).unwrap();
        let p: Vec<f64> = (0..m.parameter_count()).map(|i| i as f64).collect();
        m.set_parameters(&p).unwrap();
        assert_eq!(m.parameters(), p);
        assert_eq!(m.layers()[0].bank.filter(0, 1).as_slice(), &[2.0, 3.0]);
        assert_eq!(m.bias(), (m.parameter_count() - 1) as f64);
        assert!(m.set_parameters(&p[1..]).is_err());
    }

    #[test]
    fn rejects_mismatched_layers() {
        let l1 = LayerSpec {
            bank: FilterBank::zeros(1, 3, 2).unwrap(),
            activation: Activation::Relu,
        };
        let l2 = LayerSpec {
            bank: FilterBank::zeros(2, 1, 2).unwrap(),
            activation: Activation::Relu,
        };
        assert!(GnnModel::new(vec![l1.clone(), l2], vec![1.0], 0.0, 0).is_err());
        assert!(GnnModel::new(vec![l1], vec![1.0], 0.0, 0).is_err());
    }
}
