//! Stability bounds for filters and GNNs under relative perturbations, and
//! the experiments that check them empirically.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{filter_distance, DistanceMode, FilterTaps};
use crate::gnn::{
    features, predict, train, Activation, Dataset, GnnModel, LayerShape, Sample, TrainConfig,
};
use crate::graph::{permute_signal, GraphSignal, Gso, Permutation};
use crate::perturbation::{edge_dilation, PerturbationSpec, RandomDirection};
use crate::spectral::{
    eigendecompose, eigenvalues_symmetric, gft, integral_lipschitz_check, spectral_norm,
    DEFAULT_GRID_SIZE,
};

/// One sweep point: measured distance against the first-order bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub seed: u64,
    pub measured: f64,
    /// First-order bound `2C(1 + δ√N)Lε`.
    pub bound: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub delta: f64,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// Quadratic slack coefficient `q`; the check is `measured ≤ bound + qε²`.
    pub q: f64,
    pub satisfied: bool,
}

impl BoundReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        epsilon: f64,
        seed: u64,
        measured: f64,
        bound: f64,
        c: f64,
        delta: f64,
        l: usize,
        n: usize,
        q: f64,
    ) -> Self {
        let satisfied = measured <= bound + q * epsilon * epsilon + 1e-12 * (1.0 + bound);
        BoundReport {
            epsilon,
            seed,
            measured,
            bound,
            c,
            delta,
            l,
            n,
            q,
            satisfied,
        }
    }
}

/// `2C(1 + δ√N)ε`.
pub fn filter_stability_bound(c: f64, delta: f64, n: usize, epsilon: f64) -> f64 {
    2.0 * c * (1.0 + delta * (n as f64).sqrt()) * epsilon
}

/// `2C(1 + δ√N)Lε`.
pub fn gnn_stability_bound(c: f64, delta: f64, n: usize, epsilon: f64, layers: usize) -> f64 {
    filter_stability_bound(c, delta, n, epsilon) * layers as f64
}

/// Perturbation family for the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// `Ŝ = (1 + ε)S`; the seed is ignored.
    Dilation,
    /// Random symmetric `E` with `‖E‖ ≤ ε`, one direction per seed.
    Random,
}

fn generate(
    s: &Gso,
    kind: PerturbationKind,
    epsilons: &[f64],
    seed: u64,
) -> Result<Vec<PerturbationSpec>> {
    match kind {
        PerturbationKind::Dilation => epsilons.iter().map(|&e| edge_dilation(s, e)).collect(),
        PerturbationKind::Random => {
            let dir = RandomDirection::draw(s, seed)?;
            epsilons.iter().map(|&e| dir.at(s, e)).collect()
        }
    }
}

/// Remainder of `‖H(Ŝ) − H(S)‖` beyond first order for `‖E‖ ≤ ε`:
/// `Σ_k |h_k| [(s + 2εs)^k − s^k − 2kεs^k]` with `s = ‖S‖`.
pub fn quadratic_remainder(h: &FilterTaps, s_norm: f64, epsilon: f64) -> f64 {
    h.as_slice()
        .iter()
        .enumerate()
        .map(|(k, hk)| {
            let k_i = k as i32;
            let grown = (s_norm * (1.0 + 2.0 * epsilon)).powi(k_i);
            let base = s_norm.powi(k_i);
            hk.abs() * (grown - base - 2.0 * k as f64 * epsilon * base).max(0.0)
        })
        .sum()
}

fn slack_coefficient(remainder: f64, epsilon: f64) -> f64 {
    if epsilon == 0.0 {
        0.0
    } else {
        remainder / (epsilon * epsilon)
    }
}

/// Interval containing the spectra of `S` and every perturbed operator.
fn joint_interval(s: &Gso, specs: &[Vec<PerturbationSpec>]) -> Result<(f64, f64, Vec<f64>)> {
    let mut points: Vec<f64> = eigenvalues_symmetric(s.matrix())?.iter().copied().collect();
    for spec in specs.iter().flatten() {
        points.extend(
            eigenvalues_symmetric(spec.perturbed.matrix())?
                .iter()
                .copied(),
        );
    }
    let a = points.iter().copied().fold(f64::INFINITY, f64::min);
    let b = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = if a < b { (a, b) } else { (a - 1.0, b + 1.0) };
    Ok((a, b, points))
}

/// `max |λh′(λ)|` over a grid of `[a, b]` and the given eigenvalues, so that
/// the estimate is never below the value at any actual eigenvalue.
fn il_constant(h: &FilterTaps, interval: (f64, f64), eigenvalues: &[f64]) -> Result<f64> {
    let grid = integral_lipschitz_check(h, interval, DEFAULT_GRID_SIZE)?.constant;
    Ok(eigenvalues
        .iter()
        .map(|&l| (l * h.derivative(l)).abs())
        .fold(grid, f64::max))
}

fn delta_of(spec: &PerturbationSpec) -> Result<f64> {
    if spec.error_norm() == 0.0 {
        return Ok(0.0);
    }
    Ok(spec.misalignment()?.delta)
}

fn series_deltas(specs: &[PerturbationSpec]) -> Result<Vec<f64>> {
    // A random series scales one direction, so δ is shared by its nonzero points.
    let reference = specs.iter().find(|p| p.error_norm() > 0.0);
    let shared = match reference {
        Some(p) => delta_of(p)?,
        None => 0.0,
    };
    Ok(specs
        .iter()
        .map(|p| if p.error_norm() > 0.0 { shared } else { 0.0 })
        .collect())
}

fn check_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::Validation("sweep epsilons must be >= 0".into()));
    }
    Ok(())
}

/// Filter distance `‖H(S) − H(Ŝ)‖` against the first-order bound for every
/// `(ε, seed)`.
///
/// `C` is measured over an interval covering the spectra of `S` and all `Ŝ`;
/// `q` bounds the higher order terms a priori from `‖S‖` and the taps.
pub fn empirical_filter_distance_sweep(
    s: &Gso,
    h: &FilterTaps,
    kind: PerturbationKind,
    epsilons: &[f64],
    seeds: &[u64],
) -> Result<Vec<BoundReport>> {
    check_epsilons(epsilons)?;
    let n = s.node_count();
    let specs = seeds
        .par_iter()
        .map(|&seed| generate(s, kind, epsilons, seed))
        .collect::<Result<Vec<_>>>()?;
    let (a, b, eigs) = joint_interval(s, &specs)?;
    let c = il_constant(h, (a, b), &eigs)?;
    let s_norm = spectral_norm(s.matrix());
    let per_seed = seeds
        .par_iter()
        .zip(specs.par_iter())
        .map(|(&seed, series)| {
            let deltas = series_deltas(series)?;
            series
                .iter()
                .zip(deltas)
                .map(|(spec, delta)| {
                    let eps = spec.epsilon;
                    let measured = filter_distance(s, &spec.perturbed, h, DistanceMode::Identity)?;
                    let q = slack_coefficient(quadratic_remainder(h, s_norm, eps), eps);
                    Ok(BoundReport::new(
                        eps,
                        seed,
                        measured,
                        filter_stability_bound(c, delta, n, eps),
                        c,
                        delta,
                        1,
                        n,
                        q,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}

fn random_probe(rng: &mut ChaCha8Rng, n: usize, f: usize) -> GraphSignal {
    let m = DMatrix::from_fn(n, f, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = m.norm();
    GraphSignal::new(m / norm)
}

/// Probe signals: `probe_count` random unit signals, then every eigenvector of
/// `S` placed in each input feature.
fn probes(model: &GnnModel, s: &Gso, probe_count: usize, seed: u64) -> Result<Vec<GraphSignal>> {
    let n = s.node_count();
    let f = model.input_features();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<GraphSignal> = (0..probe_count)
        .map(|_| random_probe(&mut rng, n, f))
        .collect();
    let v = eigendecompose(s)?.eigenvectors;
    for j in 0..n {
        for g in 0..f {
            let mut m = DMatrix::zeros(n, f);
            m.set_column(g, &v.column(j));
            out.push(GraphSignal::new(m));
        }
    }
    Ok(out)
}

/// Monte-Carlo lower estimate of `‖Φ(S, ·) − Φ(Ŝ, ·)‖`: the largest feature
/// difference over random unit probes and the eigenvectors of `S`.
pub fn empirical_gnn_distance(
    model: &GnnModel,
    s: &Gso,
    s_hat: &Gso,
    probe_count: usize,
    seed: u64,
) -> Result<f64> {
    empirical_gnn_distance_modulo(
        model,
        s,
        s_hat,
        &Permutation::identity(s.node_count()),
        probe_count,
        seed,
    )
}

/// As [`empirical_gnn_distance`] with the relabeling `P` applied:
/// `max_x ‖PᵀΦ(S, x) − Φ(Ŝ, Pᵀx)‖`.
pub fn empirical_gnn_distance_modulo(
    model: &GnnModel,
    s: &Gso,
    s_hat: &Gso,
    p: &Permutation,
    probe_count: usize,
    seed: u64,
) -> Result<f64> {
    if s_hat.node_count() != s.node_count() || p.len() != s.node_count() {
        return Err(Error::Shape(format!(
            "GSOs have {} and {} nodes, permutation has {}",
            s.node_count(),
            s_hat.node_count(),
            p.len()
        )));
    }
    let mut worst = 0.0f64;
    for x in probes(model, s, probe_count, seed)? {
        let y = permute_signal(&features(model, s, &x)?, p)?;
        let y_hat = features(model, s_hat, &permute_signal(&x, p)?)?;
        worst = worst.max((y.values() - y_hat.values()).norm());
    }
    Ok(worst)
}

/// Per-layer constants used by the GNN bound.
struct LayerConstants {
    /// Largest `C` over the layer's filters.
    c: f64,
    /// Bound on `‖H_ℓ(S)‖` as an operator on feature matrices.
    gain: f64,
    /// Per-filter (C, max |h(λ)| on the spectrum of S, taps).
    filters: Vec<(f64, f64, FilterTaps)>,
    f_in: usize,
    f_out: usize,
}

fn layer_constants(
    model: &GnnModel,
    interval: (f64, f64),
    eigs: &[f64],
    spectrum: &[f64],
) -> Result<Vec<LayerConstants>> {
    model
        .layers()
        .iter()
        .map(|layer| {
            let bank = &layer.bank;
            let mut filters = Vec::new();
            for f in 0..bank.f_in() {
                for g in 0..bank.f_out() {
                    let h = bank.filter(f, g).clone();
                    let c = il_constant(&h, interval, eigs)?;
                    let gain = spectrum
                        .iter()
                        .map(|&l| h.response(l).abs())
                        .fold(0.0, f64::max);
                    filters.push((c, gain, h));
                }
            }
            let c = filters.iter().map(|f| f.0).fold(0.0, f64::max);
            let gains = DMatrix::from_fn(bank.f_in(), bank.f_out(), |f, g| {
                filters[f * bank.f_out() + g].1
            });
            Ok(LayerConstants {
                c,
                gain: spectral_norm(&gains),
                filters,
                f_in: bank.f_in(),
                f_out: bank.f_out(),
            })
        })
        .collect()
}

/// A priori bound on `‖Φ(S) − Φ(Ŝ)‖` from per-filter distance bounds, using
/// 1-Lipschitz activations with `σ(0) = 0`:
/// `e_ℓ = Δ_ℓ·Π_{m<ℓ} b_m + (b_ℓ + Δ_ℓ)·e_{ℓ−1}`.
fn composed_bound(layers: &[LayerConstants], delta: f64, n: usize, s_norm: f64, eps: f64) -> f64 {
    let mut gain_prefix = 1.0;
    let mut e = 0.0;
    for layer in layers {
        let d = DMatrix::from_fn(layer.f_in, layer.f_out, |f, g| {
            let (c, _, h) = &layer.filters[f * layer.f_out + g];
            filter_stability_bound(*c, delta, n, eps) + quadratic_remainder(h, s_norm, eps)
        });
        let d = spectral_norm(&d);
        e = d * gain_prefix + (layer.gain + d) * e;
        gain_prefix *= layer.gain;
    }
    e
}

/// GNN feature distance against `2C(1 + δ√N)Lε` for every `(ε, seed)`.
///
/// `C` is the largest constant over all filters. The slack `qε²` is whatever
/// the a priori composed bound exceeds the first-order term by; for scalar
/// features and `|h| ≤ 1` it is second order in `ε`.
pub fn empirical_gnn_sweep(
    model: &GnnModel,
    s: &Gso,
    kind: PerturbationKind,
    epsilons: &[f64],
    seeds: &[u64],
    probe_count: usize,
) -> Result<Vec<BoundReport>> {
    check_epsilons(epsilons)?;
    let n = s.node_count();
    let specs = seeds
        .par_iter()
        .map(|&seed| generate(s, kind, epsilons, seed))
        .collect::<Result<Vec<_>>>()?;
    let (a, b, eigs) = joint_interval(s, &specs)?;
    let spectrum: Vec<f64> = eigenvalues_symmetric(s.matrix())?.iter().copied().collect();
    let layers = layer_constants(model, (a, b), &eigs, &spectrum)?;
    let c = layers.iter().map(|l| l.c).fold(0.0, f64::max);
    let depth = model.depth();
    let s_norm = spectral_norm(s.matrix());
    let per_seed = seeds
        .par_iter()
        .zip(specs.par_iter())
        .map(|(&seed, series)| {
            let deltas = series_deltas(series)?;
            series
                .iter()
                .zip(deltas)
                .map(|(spec, delta)| {
                    let eps = spec.epsilon;
                    let measured =
                        empirical_gnn_distance(model, s, &spec.perturbed, probe_count, seed)?;
                    let bound = gnn_stability_bound(c, delta, n, eps, depth);
                    let excess = (composed_bound(&layers, delta, n, s_norm, eps) - bound).max(0.0);
                    Ok(BoundReport::new(
                        eps,
                        seed,
                        measured,
                        bound,
                        c,
                        delta,
                        depth,
                        n,
                        slack_coefficient(excess, eps),
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}

/// Writes `epsilon,seed,measured,bound,C,delta,satisfied,q,L,N`.
pub fn write_bound_reports<W: Write>(reports: &[BoundReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "epsilon",
        "seed",
        "measured",
        "bound",
        "C",
        "delta",
        "satisfied",
        "q",
        "L",
        "N",
    ])?;
    for r in reports {
        w.write_record([
            r.epsilon.to_string(),
            r.seed.to_string(),
            r.measured.to_string(),
            r.bound.to_string(),
            r.c.to_string(),
            r.delta.to_string(),
            r.satisfied.to_string(),
            r.q.to_string(),
            r.l.to_string(),
            r.n.to_string(),
        ])?;
    }
    w.flush()
        .map_err(|e| Error::io("writing bound report", e))?;
    Ok(())
}

/// Ordinary least squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `1` when the residual and the total variance both vanish.
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Shape(format!(
            "need two or more paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Validation("x values are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Smallest `R²` of measured-vs-ε over each seed's series.
pub fn worst_series_r_squared(reports: &[BoundReport]) -> Result<f64> {
    let mut seeds: Vec<u64> = reports.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let mut worst = f64::INFINITY;
    for seed in seeds {
        let (x, y): (Vec<f64>, Vec<f64>) = reports
            .iter()
            .filter(|r| r.seed == seed)
            .map(|r| (r.epsilon, r.measured))
            .unzip();
        worst = worst.min(linear_fit(&x, &y)?.r_squared);
    }
    Ok(worst)
}

/// Entries of a GFT whose magnitude counts as carrying energy.
pub const MIXING_THRESHOLD: f64 = 1e-8;

/// GFT of `σ(v_N)` for the top eigenvector `v_N` of `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    pub eigenvalues: Vec<f64>,
    /// `|x̂_n|` for `x = v_N`.
    pub input_spectrum: Vec<f64>,
    /// `|GFT(σ(x))_n|`.
    pub output_spectrum: Vec<f64>,
    /// Energy share of `σ(x)` outside coefficient `N`.
    pub outside_fraction: f64,
    /// Coefficients other than `N` above [`MIXING_THRESHOLD`].
    pub outside_count: usize,
    /// `|‖GFT(σ(x))‖ − ‖σ(x)‖|`.
    pub parseval_residual: f64,
}

pub fn frequency_mixing_demo(s: &Gso, activation: Activation) -> Result<MixingReport> {
    let eig = eigendecompose(s)?;
    let n = eig.len();
    let top = n - 1;
    let x = GraphSignal::new(DMatrix::from_column_slice(
        n,
        1,
        eig.eigenvectors.column(top).as_slice(),
    ));
    let y = GraphSignal::new(x.values().map(|v| activation.apply(v)));
    let x_hat = gft(&eig.eigenvectors, &x)?;
    let y_hat = gft(&eig.eigenvectors, &y)?;
    let output_spectrum: Vec<f64> = y_hat.values().iter().map(|v| v.abs()).collect();
    let total: f64 = output_spectrum.iter().map(|v| v * v).sum();
    let outside: f64 = output_spectrum[..top].iter().map(|v| v * v).sum();
    Ok(MixingReport {
        eigenvalues: eig.eigenvalues.iter().copied().collect(),
        input_spectrum: x_hat.values().iter().map(|v| v.abs()).collect(),
        outside_count: output_spectrum[..top]
            .iter()
            .filter(|v| **v > MIXING_THRESHOLD)
            .count(),
        outside_fraction: if total > 0.0 { outside / total } else { 0.0 },
        parseval_residual: (y_hat.norm() - y.norm()).abs(),
        output_spectrum,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffConfig {
    /// Dilation `Ŝ = (1 + ε)S`.
    pub epsilon: f64,
    /// IL constant of the flat filter.
    pub c_target: f64,
    pub seed: u64,
    pub epochs: usize,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        TradeoffConfig {
            epsilon: 0.1,
            c_target: 0.2,
            seed: 0,
            epochs: 300,
        }
    }
}

/// Separation of `v_N` (label 1) from `v_{N−1}` (label 0) by a filter response
/// or model output `o`: `min(o(v_N) − ½, ½ − o(v_{N−1}))`. Positive when both are
/// on the right side of ½.
#[derive(Debug, Clone, PartialEq)]
pub struct Margins {
    pub original: f64,
    pub perturbed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterTradeoff {
    pub taps: FilterTaps,
    /// `max |λh′(λ)|` over the joint spectral interval.
    pub il_constant: f64,
    pub margins: Margins,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffReport {
    pub eigenvalues: Vec<f64>,
    pub perturbed_eigenvalues: Vec<f64>,
    /// `None` when the least-squares fit misses the 0.9 / 0.1 targets.
    pub sharp: Option<FilterTradeoff>,
    pub integral_lipschitz: FilterTradeoff,
    pub gnn: Margins,
}

fn margin(top: f64, second: f64) -> f64 {
    (top - 0.5).min(0.5 - second)
}

fn filter_margins(h: &FilterTaps, eigs: &[f64], eps: f64) -> Margins {
    let n = eigs.len();
    let scale = 1.0 + eps;
    Margins {
        original: margin(h.response(eigs[n - 1]), h.response(eigs[n - 2])),
        perturbed: margin(
            h.response(scale * eigs[n - 1]),
            h.response(scale * eigs[n - 2]),
        ),
    }
}

/// Degree `N − 1` polynomial with response 1 at `λ_N` and 0 at the other
/// eigenvalues, by least squares on the Vandermonde system.
fn sharp_filter(eigs: &[f64]) -> Result<Option<FilterTaps>> {
    let n = eigs.len();
    let v = DMatrix::from_fn(n, n, |i, k| eigs[i].powi(k as i32));
    let mut target = DVector::zeros(n);
    target[n - 1] = 1.0;
    let taps = v
        .svd(true, true)
        .solve(&target, 1e-14)
        .map_err(|e| Error::Validation(format!("Vandermonde solve failed: {e}")))?;
    let h = FilterTaps::new(taps.iter().copied().collect())?;
    let ok = h.response(eigs[n - 1]) >= 0.9 && h.response(eigs[n - 2]) <= 0.1;
    Ok(ok.then_some(h))
}

fn readout_node(eig_top: &[f64], eig_second: &[f64]) -> usize {
    (0..eig_top.len())
        .max_by(|&a, &b| {
            let sa = eig_top[a].abs() + eig_second[a].abs();
            let sb = eig_top[b].abs() + eig_second[b].abs();
            sa.total_cmp(&sb)
        })
        .unwrap_or(0)
}

/// Sharp filter versus IL filter versus a trained one-layer relu GNN on the
/// task of telling `v_N` from `v_{N−1}`, before and after dilation.
pub fn discriminability_tradeoff_demo(s: &Gso, config: &TradeoffConfig) -> Result<TradeoffReport> {
    let eig = eigendecompose(s)?;
    let n = eig.len();
    if n < 2 {
        return Err(Error::Validation("need at least two nodes".into()));
    }
    let eigs: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let (top, second) = (eigs[n - 1], eigs[n - 2]);
    if (top - second).abs() <= 1e-10 * top.abs().max(1.0) {
        return Err(Error::Validation(
            "the two largest eigenvalues coincide".into(),
        ));
    }
    let eps = config.epsilon;
    let perturbed: Vec<f64> = eigs.iter().map(|l| (1.0 + eps) * l).collect();
    let all: Vec<f64> = eigs.iter().chain(&perturbed).copied().collect();
    let a = all.iter().copied().fold(f64::INFINITY, f64::min);
    let b = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let sharp = sharp_filter(&eigs)?
        .map(|h| -> Result<FilterTradeoff> {
            Ok(FilterTradeoff {
                il_constant: il_constant(&h, (a, b), &all)?,
                margins: filter_margins(&h, &eigs, eps),
                taps: h,
            })
        })
        .transpose()?;

    let reach = a.abs().max(b.abs());
    let beta = config.c_target / reach;
    let mid = 0.5 * (top + second);
    let flat = FilterTaps::new(vec![0.5 - beta * mid, beta])?;
    let integral_lipschitz = FilterTradeoff {
        il_constant: il_constant(&flat, (a, b), &all)?,
        margins: filter_margins(&flat, &eigs, eps),
        taps: flat,
    };

    let v_top: Vec<f64> = eig.eigenvectors.column(n - 1).iter().copied().collect();
    let v_second: Vec<f64> = eig.eigenvectors.column(n - 2).iter().copied().collect();
    let x_top = GraphSignal::from_vec(v_top.clone());
    let x_second = GraphSignal::from_vec(v_second.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let shapes = [LayerShape {
        features: 8,
        taps: 3,
        activation: Activation::Relu,
    }];
    let model = GnnModel::init(1, &shapes, readout_node(&v_top, &v_second), &mut rng)?;
    let data = Dataset::new(vec![
        Sample {
            x: x_top.clone(),
            y: 1.0,
        },
        Sample {
            x: x_second.clone(),
            y: 0.0,
        },
    ])?;
    let train_cfg = TrainConfig {
        mu: 0.5,
        lambda_interval: Some((a, b)),
        epochs: config.epochs,
        batch_size: 2,
        seed: config.seed,
        ..TrainConfig::default()
    };
    let trained = train(model, s, &data, &train_cfg)?.model;
    let s_hat = s.scaled(1.0 + eps);
    let gnn = Margins {
        original: margin(
            predict(&trained, s, &x_top)?,
            predict(&trained, s, &x_second)?,
        ),
        perturbed: margin(
            predict(&trained, &s_hat, &x_top)?,
            predict(&trained, &s_hat, &x_second)?,
        ),
    };

    Ok(TradeoffReport {
        eigenvalues: eigs,
        perturbed_eigenvalues: perturbed,
        sharp,
        integral_lipschitz,
        gnn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterBank;
    use crate::gnn::LayerSpec;
    use crate::graph::{build_gso, permute_gso, Graph, GsoKind};

    fn normalized_er(n: usize, seed: u64) -> Gso {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Graph::erdos_renyi_connected(n, 0.3, &mut rng).unwrap();
        let w = g.weights().map(|v| {
            if v > 0.0 {
                rng.gen_range(0.5..1.5) * v
            } else {
                0.0
            }
        });
        let g = Graph::new(crate::graph::symmetrize(&w)).unwrap();
        let s = build_gso(&g, GsoKind::Adjacency).unwrap();
        let r = spectral_norm(s.matrix());
        s.scaled(1.0 / r)
    }

    fn il_taps() -> FilterTaps {
        FilterTaps::new(vec![0.5, 0.3, 0.1]).unwrap()
    }

    #[test]
    fn bound_arithmetic() {
        assert!((filter_stability_bound(1.0, 0.0, 20, 0.1) - 0.2).abs() < 1e-15);
        assert_eq!(filter_stability_bound(1.0, 0.3, 20, 0.0), 0.0);
        let b = filter_stability_bound(0.7, 0.2, 9, 0.05);
        assert!((filter_stability_bound(1.4, 0.2, 9, 0.05) - 2.0 * b).abs() < 1e-15);
        assert!((gnn_stability_bound(0.5, 0.0, 10, 0.01, 3) - 0.03).abs() < 1e-15);
        assert_eq!(gnn_stability_bound(0.7, 0.2, 9, 0.05, 1), b);
    }

    #[test]
    fn zero_epsilon_is_trivially_satisfied() {
        let s = normalized_er(12, 1);
        for kind in [PerturbationKind::Dilation, PerturbationKind::Random] {
            let r = empirical_filter_distance_sweep(&s, &il_taps(), kind, &[0.0], &[3]).unwrap();
            assert!(r[0].measured < 1e-14);
            assert_eq!(r[0].bound, 0.0);
            assert!(r[0].satisfied);
        }
    }

    #[test]
    fn dilation_sweep_respects_bound() {
        let s = normalized_er(20, 2);
        let eps: Vec<f64> = (1..=10).map(|i| i as f64 * 0.01).collect();
        let r =
            empirical_filter_distance_sweep(&s, &il_taps(), PerturbationKind::Dilation, &eps, &[0])
                .unwrap();
        assert!(r.iter().all(|x| x.satisfied && x.delta == 0.0), "{r:?}");
        assert!(r[0].c <= 1.0);
        assert!(worst_series_r_squared(&r).unwrap() > 0.99);
    }

    #[test]
    fn random_sweep_respects_bound() {
        let s = normalized_er(15, 3);
        let eps = [0.02, 0.05, 0.1];
        let r = empirical_filter_distance_sweep(
            &s,
            &il_taps(),
            PerturbationKind::Random,
            &eps,
            &[1, 2],
        )
        .unwrap();
        assert_eq!(r.len(), 6);
        assert!(r.iter().all(|x| x.satisfied && x.delta > 0.0));
    }

    #[test]
    fn pure_shift_instability_exhibit() {
        // H(Ŝ) − H(S) = εS for h(λ) = λ.
        for scale in [1.0, 4.0, 16.0] {
            let s = normalized_er(10, 4).scaled(scale);
            let h = FilterTaps::new(vec![0.0, 1.0]).unwrap();
            let r =
                empirical_filter_distance_sweep(&s, &h, PerturbationKind::Dilation, &[0.1], &[0])
                    .unwrap();
            let lmax = spectral_norm(s.matrix());
            assert!((r[0].measured - 0.1 * lmax).abs() < 1e-12 * lmax);
            assert!(r[0].c >= lmax);
        }
    }

    #[test]
    fn quadratic_remainder_vanishes_for_linear_filters() {
        let h = FilterTaps::new(vec![0.3, -0.7]).unwrap();
        assert_eq!(quadratic_remainder(&h, 2.0, 0.1), 0.0);
        let h2 = FilterTaps::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!((quadratic_remainder(&h2, 1.0, 0.1) - 0.04).abs() < 1e-15);
    }

    fn scalar_gnn(seed: u64) -> GnnModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer = |rng: &mut ChaCha8Rng| LayerSpec {
            bank: FilterBank::scalar(
                FilterTaps::new(vec![
                    rng.gen_range(0.2..0.5),
                    rng.gen_range(-0.3..0.3),
                    rng.gen_range(-0.1..0.1),
                ])
                .unwrap(),
            ),
            activation: Activation::Relu,
        };
        let layers = vec![layer(&mut rng), layer(&mut rng)];
        GnnModel::new(layers, vec![1.0], 0.0, 0).unwrap()
    }

    #[test]
    fn gnn_distance_is_zero_for_identical_and_permuted() {
        let s = normalized_er(10, 5);
        let model = scalar_gnn(1);
        assert_eq!(empirical_gnn_distance(&model, &s, &s, 20, 0).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = Permutation::random(10, &mut rng);
        let s_hat = permute_gso(&s, &p).unwrap();
        let d = empirical_gnn_distance_modulo(&model, &s, &s_hat, &p, 50, 1).unwrap();
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn linear_gnn_matches_filter_distance() {
        let s = normalized_er(10, 7);
        let h = il_taps();
        let model = GnnModel::new(
            vec![LayerSpec {
                bank: FilterBank::scalar(h.clone()),
                activation: Activation::Linear,
            }],
            vec![1.0],
            0.0,
            0,
        )
        .unwrap();
        let s_hat = s.scaled(1.08);
        let exact = filter_distance(&s, &s_hat, &h, DistanceMode::Identity).unwrap();
        let est = empirical_gnn_distance(&model, &s, &s_hat, 100, 2).unwrap();
        // Eigenvector probes attain the operator norm of a symmetric difference.
        assert!(est <= exact + 1e-12);
        assert!(est >= 0.99 * exact, "{est} vs {exact}");
    }

    #[test]
    fn gnn_sweep_respects_bound() {
        let s = normalized_er(12, 8);
        let model = scalar_gnn(2);
        for kind in [PerturbationKind::Dilation, PerturbationKind::Random] {
            let r = empirical_gnn_sweep(&model, &s, kind, &[0.01, 0.05, 0.1], &[0, 1], 20).unwrap();
            assert!(r.iter().all(|x| x.satisfied && x.l == 2), "{r:?}");
        }
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(linear_fit(&x, &[0.0; 4]).unwrap().r_squared, 1.0);
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn csv_header() {
        let s = normalized_er(8, 9);
        let r = empirical_filter_distance_sweep(
            &s,
            &il_taps(),
            PerturbationKind::Dilation,
            &[0.1],
            &[0],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_bound_reports(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("epsilon,seed,measured,bound,C,delta,satisfied"));
        assert_eq!(text.lines().count(), 2);
    }

    fn laplacian_graph(seed: u64) -> Gso {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let g = Graph::erdos_renyi_connected(10, 0.35, &mut rng).unwrap();
            let s = build_gso(&g, GsoKind::Laplacian).unwrap();
            // Non-bipartite: the adjacency spectrum is not symmetric.
            let a = build_gso(&g, GsoKind::Adjacency).unwrap();
            let e = eigenvalues_symmetric(a.matrix()).unwrap();
            if (e[0] + e[e.len() - 1]).abs() > 1e-6 {
                return s;
            }
        }
    }

    #[test]
    fn relu_mixes_frequencies_and_linear_does_not() {
        let s = laplacian_graph(10);
        let relu = frequency_mixing_demo(&s, Activation::Relu).unwrap();
        assert!(relu.outside_count >= 2);
        assert!(relu.outside_fraction > 0.0);
        assert!(relu.parseval_residual < 1e-10);
        let lin = frequency_mixing_demo(&s, Activation::Linear).unwrap();
        assert!(lin.output_spectrum[..9].iter().all(|v| *v < 1e-12));
        assert!(lin.outside_fraction < 1e-12);
        assert!((lin.input_spectrum[9] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tradeoff_demo() {
        let s = normalized_er(8, 11);
        let cfg = TradeoffConfig {
            epsilon: 0.0,
            epochs: 20,
            ..TradeoffConfig::default()
        };
        let r = discriminability_tradeoff_demo(&s, &cfg).unwrap();
        let sharp = r.sharp.as_ref().expect("interpolation feasible for N = 8");
        assert_eq!(sharp.margins.original, sharp.margins.perturbed);
        assert!(sharp.margins.original > 0.39);
        assert!(r.integral_lipschitz.il_constant <= cfg.c_target + 1e-9);
        assert!(r.integral_lipschitz.margins.original > 0.0);

        // Dilation pushing λ_{N−1} past λ_N flips the sharp filter's margin.
        let gap = r.eigenvalues[7] / r.eigenvalues[6] - 1.0;
        let cfg = TradeoffConfig {
            epsilon: 1.5 * gap,
            epochs: 20,
            ..TradeoffConfig::default()
        };
        let r = discriminability_tradeoff_demo(&s, &cfg).unwrap();
        assert!(r.sharp.unwrap().margins.perturbed < 0.0);
    }
}
