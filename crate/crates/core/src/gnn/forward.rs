//! Forward map `x_ℓ = σ_ℓ(H_ℓ(S) x_{ℓ−1})` and reverse-mode gradients.
//!
//! Only the readout node's row of the last layer feeds the prediction, so the
//! forward pass evaluates that layer at a single node and the backward pass
//! starts from a one-hot row.

use nalgebra::{DMatrix, DVector};

use super::loss::smooth_l1_grad;
use super::model::GnnModel;
use super::penalty::{penalty, PenaltyGrid};
use crate::error::{Error, Result};
use crate::filters::{combine, diffusion, FilterBank};
use crate::graph::{GraphSignal, Gso};

/// Intermediate values of a forward pass, needed for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `[x_ℓ, S x_ℓ, …, S^{K−1} x_ℓ]` for every layer input.
    shifts: Vec<Vec<DMatrix<f64>>>,
    /// Full pre-activations of every layer except the last.
    hidden_pre: Vec<DMatrix<f64>>,
    /// Pre-activation of the last layer at the readout node.
    last_pre: DVector<f64>,
}

/// Result of [`forward`].
#[derive(Debug, Clone)]
pub struct Forward {
    pub prediction: f64,
    /// Last layer features at the readout node.
    pub node_features: DVector<f64>,
    pub cache: Option<ForwardCache>,
}

/// Gradients laid out like the model: per layer, one tap vector per filter
/// (row-major over `(f, g)`), then readout weights and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub taps: Vec<Vec<Vec<f64>>>,
    pub readout: Vec<f64>,
    pub bias: f64,
}

impl Gradients {
    pub fn zeros(model: &GnnModel) -> Self {
        Gradients {
            taps: model
                .layers()
                .iter()
                .map(|l| vec![vec![0.0; l.bank.k()]; l.bank.f_in() * l.bank.f_out()])
                .collect(),
            readout: vec![0.0; model.output_features()],
            bias: 0.0,
        }
    }

    /// Same layout as [`GnnModel::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.taps.iter().flatten().flatten().copied().collect();
        out.extend_from_slice(&self.readout);
        out.push(self.bias);
        out
    }

    /// `self += c·other`.
    pub fn add_scaled(&mut self, c: f64, other: &Gradients) {
        for (a, b) in self
            .taps
            .iter_mut()
            .flatten()
            .flatten()
            .zip(other.taps.iter().flatten().flatten())
        {
            *a += c * b;
        }
        for (a, b) in self.readout.iter_mut().zip(&other.readout) {
            *a += c * b;
        }
        self.bias += c * other.bias;
    }

    pub fn scale(&mut self, c: f64) {
        self.taps
            .iter_mut()
            .flatten()
            .flatten()
            .for_each(|v| *v *= c);
        self.readout.iter_mut().for_each(|v| *v *= c);
        self.bias *= c;
    }
}

fn check_input(model: &GnnModel, s: &Gso, n: usize, f: usize) -> Result<()> {
    if n != s.node_count() {
        return Err(Error::Shape(format!(
            "signal has {n} nodes, GSO has {}",
            s.node_count()
        )));
    }
    if f != model.input_features() {
        return Err(Error::Shape(format!(
            "model expects {} input features, signal has {f}",
            model.input_features()
        )));
    }
    if model.node() >= n {
        return Err(Error::Shape(format!(
            "readout node {} out of range for N = {n}",
            model.node()
        )));
    }
    Ok(())
}

fn activate(m: &DMatrix<f64>, act: super::model::Activation) -> DMatrix<f64> {
    m.map(|v| act.apply(v))
}

/// Runs the network and keeps the cache for [`backward`].
pub fn forward(model: &GnnModel, s: &Gso, x: &GraphSignal) -> Result<Forward> {
    check_input(model, s, x.node_count(), x.feature_count())?;
    let first = diffusion(s, x.values(), model.layers()[0].bank.k());
    Ok(forward_from_shifts(model, s, first, true))
}

/// Prediction only; the returned [`Forward`] carries no cache.
pub fn predict(model: &GnnModel, s: &Gso, x: &GraphSignal) -> Result<f64> {
    check_input(model, s, x.node_count(), x.feature_count())?;
    let first = diffusion(s, x.values(), model.layers()[0].bank.k());
    Ok(forward_from_shifts(model, s, first, false).prediction)
}

/// Predictions for many signals. The first layer's shifts are computed for all
/// signals at once.
pub fn predict_many(model: &GnnModel, s: &Gso, xs: &[GraphSignal]) -> Result<Vec<f64>> {
    let shifts = first_layer_shifts(model, s, xs)?;
    Ok(shifts
        .into_iter()
        .map(|sh| forward_from_shifts(model, s, sh, false).prediction)
        .collect())
}

/// First-layer diffusions `[x, Sx, …]` for a batch of signals, computed jointly
/// by stacking them column-wise.
pub(crate) fn first_layer_shifts(
    model: &GnnModel,
    s: &Gso,
    xs: &[GraphSignal],
) -> Result<Vec<Vec<DMatrix<f64>>>> {
    const CHUNK: usize = 256;
    let n = s.node_count();
    let f = model.input_features();
    for x in xs {
        check_input(model, s, x.node_count(), x.feature_count())?;
    }
    let k = model.layers()[0].bank.k();
    let mut out = Vec::with_capacity(xs.len());
    for chunk in xs.chunks(CHUNK) {
        let mut stacked = DMatrix::zeros(n, f * chunk.len());
        for (b, x) in chunk.iter().enumerate() {
            stacked.columns_mut(b * f, f).copy_from(x.values());
        }
        let diffused = diffusion(s, &stacked, k);
        for b in 0..chunk.len() {
            out.push(
                diffused
                    .iter()
                    .map(|d| d.columns(b * f, f).into_owned())
                    .collect(),
            );
        }
    }
    Ok(out)
}

/// Row `n` of `Σ_k Z_k T_k`.
fn combine_row(shifts: &[DMatrix<f64>], bank: &FilterBank, n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(bank.f_out());
    for (k, z) in shifts.iter().enumerate() {
        for f in 0..bank.f_in() {
            let zf = z[(n, f)];
            if zf == 0.0 {
                continue;
            }
            for g in 0..bank.f_out() {
                out[g] += zf * bank.filter(f, g).as_slice()[k];
            }
        }
    }
    out
}

pub(crate) fn forward_from_shifts(
    model: &GnnModel,
    s: &Gso,
    first: Vec<DMatrix<f64>>,
    keep_cache: bool,
) -> Forward {
    let layers = model.layers();
    let last = layers.len() - 1;
    let mut shifts = vec![first];
    let mut hidden_pre = Vec::with_capacity(last);
    for layer in &layers[..last] {
        let pre = combine(shifts.last().expect("nonempty"), &layer.bank);
        let act = activate(&pre, layer.activation);
        hidden_pre.push(pre);
        let next_k = layers[hidden_pre.len()].bank.k();
        shifts.push(diffusion(s, &act, next_k));
    }
    let last_layer = &layers[last];
    let last_pre = combine_row(
        shifts.last().expect("nonempty"),
        &last_layer.bank,
        model.node(),
    );
    let node_features = last_pre.map(|v| last_layer.activation.apply(v));
    let prediction = model
        .readout()
        .iter()
        .zip(node_features.iter())
        .map(|(w, v)| w * v)
        .sum::<f64>()
        + model.bias();
    Forward {
        prediction,
        node_features,
        cache: keep_cache.then_some(ForwardCache {
            shifts,
            hidden_pre,
            last_pre,
        }),
    }
}

/// Full output feature map `Φ(S, x) = x_L` (every node), before the readout.
pub fn features(model: &GnnModel, s: &Gso, x: &GraphSignal) -> Result<GraphSignal> {
    check_input(model, s, x.node_count(), x.feature_count())?;
    let mut a = x.values().clone();
    for layer in model.layers() {
        let shifts = diffusion(s, &a, layer.bank.k());
        a = activate(&combine(&shifts, &layer.bank), layer.activation);
    }
    Ok(GraphSignal::new(a))
}

/// `Σ_k S^k B_k`, evaluated as `B_0 + S(B_1 + S(B_2 + …))`.
fn horner_adjoint(s: &Gso, blocks: Vec<DMatrix<f64>>) -> DMatrix<f64> {
    let mut it = blocks.into_iter().rev();
    let mut acc = it.next().expect("at least one tap");
    for b in it {
        acc = s.shift_matrix(&acc) + b;
    }
    acc
}

/// Gradient of the prediction-level objective, given `d objective / d prediction`.
pub fn backward_from_output(
    model: &GnnModel,
    s: &Gso,
    fwd: &Forward,
    dpred: f64,
) -> Result<Gradients> {
    let cache = fwd.cache.as_ref().ok_or(Error::MissingCache)?;
    let mut grads = Gradients::zeros(model);
    if dpred == 0.0 {
        return Ok(grads);
    }
    let layers = model.layers();
    let last = layers.len() - 1;
    let n = model.node();

    for (g, v) in fwd.node_features.iter().enumerate() {
        grads.readout[g] = dpred * v;
    }
    grads.bias = dpred;

    let last_layer = &layers[last];
    let dz_row: DVector<f64> = DVector::from_fn(last_layer.bank.f_out(), |g, _| {
        dpred * model.readout()[g] * last_layer.activation.derivative(cache.last_pre[g])
    });
    let bank = &last_layer.bank;
    for (k, z) in cache.shifts[last].iter().enumerate() {
        for f in 0..bank.f_in() {
            let zf = z[(n, f)];
            for g in 0..bank.f_out() {
                grads.taps[last][f * bank.f_out() + g][k] = zf * dz_row[g];
            }
        }
    }
    if last == 0 {
        return Ok(grads);
    }

    // Gradient w.r.t. the last layer's input: Σ_k S^k (e_n ⊗ T_k dz).
    let nodes = s.node_count();
    let blocks = (0..bank.k())
        .map(|k| {
            let r = bank.tap_matrix(k) * &dz_row;
            let mut b = DMatrix::zeros(nodes, bank.f_in());
            b.row_mut(n).copy_from(&r.transpose());
            b
        })
        .collect();
    let mut upstream = horner_adjoint(s, blocks);

    for l in (0..last).rev() {
        let layer = &layers[l];
        let act = layer.activation;
        let pre = &cache.hidden_pre[l];
        let dz = DMatrix::from_fn(pre.nrows(), pre.ncols(), |i, j| {
            upstream[(i, j)] * act.derivative(pre[(i, j)])
        });
        let bank = &layer.bank;
        for (k, z) in cache.shifts[l].iter().enumerate() {
            let dt = z.tr_mul(&dz);
            for f in 0..bank.f_in() {
                for g in 0..bank.f_out() {
                    grads.taps[l][f * bank.f_out() + g][k] = dt[(f, g)];
                }
            }
        }
        if l > 0 {
            let blocks = (0..bank.k())
                .map(|k| &dz * bank.tap_matrix(k).transpose())
                .collect();
            upstream = horner_adjoint(s, blocks);
        }
    }
    Ok(grads)
}

/// Exact gradient of `smooth_l1(Φ(S,x), y) + μ·penalty` for one sample.
pub fn backward(
    model: &GnnModel,
    s: &Gso,
    fwd: &Forward,
    target: f64,
    mu: f64,
    grid: &PenaltyGrid,
) -> Result<Gradients> {
    let mut grads = backward_from_output(model, s, fwd, smooth_l1_grad(fwd.prediction, target))?;
    if mu != 0.0 {
        let p = penalty(model, grid);
        grads.add_scaled(mu, &p.gradients);
    }
    Ok(grads)
}
