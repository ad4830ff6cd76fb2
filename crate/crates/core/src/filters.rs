//! Graph convolutions `y = Σ_k h_k S^k x`, multi-feature filter banks and the
//! operator distance between a filter on two shift operators.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphSignal, Gso, Permutation};
use crate::spectral::spectral_norm;

/// Polynomial coefficients `[h_0, …, h_{K−1}]` of a graph filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FilterTaps(Vec<f64>);

impl FilterTaps {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Validation("a filter needs at least one tap".into()));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::Validation("filter taps must be finite".into()));
        }
        Ok(FilterTaps(taps))
    }

    pub fn zeros(k: usize) -> Self {
        FilterTaps(vec![0.0; k.max(1)])
    }

    /// Number of taps `K`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    /// Frequency response `h(λ)` by Horner's scheme.
    pub fn response(&self, lambda: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &h| acc * lambda + h)
    }

    /// `h′(λ) = Σ_{k≥1} k h_k λ^{k−1}`.
    pub fn derivative(&self, lambda: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &h)| acc * lambda + k as f64 * h)
    }
}

/// `F_in × F_out` grid of filters sharing a common number of taps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    f_in: usize,
    f_out: usize,
    k: usize,
    /// Row-major: filter `(f, g)` maps input feature `f` to output feature `g`.
    taps: Vec<FilterTaps>,
}

impl FilterBank {
    pub fn new(f_in: usize, f_out: usize, taps: Vec<FilterTaps>) -> Result<Self> {
        if f_in == 0 || f_out == 0 {
            return Err(Error::Validation(
                "filter bank dimensions must be positive".into(),
            ));
        }
        if taps.len() != f_in * f_out {
            return Err(Error::Shape(format!(
                "{f_in}x{f_out} bank needs {} filters, got {}",
                f_in * f_out,
                taps.len()
            )));
        }
        let k = taps[0].len();
        if taps.iter().any(|t| t.len() != k) {
            return Err(Error::Validation(
                "all filters in a bank need the same K".into(),
            ));
        }
        Ok(FilterBank {
            f_in,
            f_out,
            k,
            taps,
        })
    }

    pub fn zeros(f_in: usize, f_out: usize, k: usize) -> Result<Self> {
        FilterBank::new(f_in, f_out, vec![FilterTaps::zeros(k); f_in * f_out])
    }

    /// Single-filter bank.
    pub fn scalar(h: FilterTaps) -> Self {
        FilterBank {
            f_in: 1,
            f_out: 1,
            k: h.len(),
            taps: vec![h],
        }
    }

    pub fn f_in(&self) -> usize {
        self.f_in
    }

    pub fn f_out(&self) -> usize {
        self.f_out
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn filter(&self, f: usize, g: usize) -> &FilterTaps {
        &self.taps[f * self.f_out + g]
    }

    pub fn filter_mut(&mut self, f: usize, g: usize) -> &mut FilterTaps {
        &mut self.taps[f * self.f_out + g]
    }

    pub fn filters(&self) -> impl Iterator<Item = &FilterTaps> {
        self.taps.iter()
    }

    pub fn filters_mut(&mut self) -> impl Iterator<Item = &mut FilterTaps> {
        self.taps.iter_mut()
    }

    /// `F_in × F_out` matrix of the order-`k` taps.
    pub(crate) fn tap_matrix(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.f_in, self.f_out, |f, g| {
            self.filter(f, g).as_slice()[k]
        })
    }
}

/// `[X, SX, …, S^{K−1}X]`, each obtained from the previous one by a single shift.
pub(crate) fn diffusion(s: &Gso, x: &DMatrix<f64>, k: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(k);
    out.push(x.clone());
    for i in 1..k {
        let next = s.shift_matrix(&out[i - 1]);
        out.push(next);
    }
    out
}

/// `Σ_k Z_k T_k` for diffused inputs `Z_k` and tap matrices `T_k`.
pub(crate) fn combine(shifts: &[DMatrix<f64>], bank: &FilterBank) -> DMatrix<f64> {
    let n = shifts[0].nrows();
    let mut out = DMatrix::zeros(n, bank.f_out());
    for (k, z) in shifts.iter().enumerate() {
        out.gemm(1.0, z, &bank.tap_matrix(k), 1.0);
    }
    out
}

/// Applies `H(S) = Σ_k h_k S^k` to every feature of `x` through `K − 1`
/// successive shifts; powers of `S` are never formed.
pub fn graph_convolution(s: &Gso, h: &FilterTaps, x: &GraphSignal) -> Result<GraphSignal> {
    check_nodes(s, x)?;
    let taps = h.as_slice();
    let mut z = x.values().clone();
    let mut y = &z * taps[0];
    for &hk in &taps[1..] {
        z = s.shift_matrix(&z);
        y.zip_apply(&z, |a, b| *a += hk * b);
    }
    Ok(GraphSignal::new(y))
}

/// Output feature `g` is `Σ_f H_{fg}(S) x_f`.
pub fn filter_bank_apply(s: &Gso, bank: &FilterBank, x: &GraphSignal) -> Result<GraphSignal> {
    check_nodes(s, x)?;
    if x.feature_count() != bank.f_in() {
        return Err(Error::Shape(format!(
            "bank expects {} input features, signal has {}",
            bank.f_in(),
            x.feature_count()
        )));
    }
    let shifts = diffusion(s, x.values(), bank.k());
    Ok(GraphSignal::new(combine(&shifts, bank)))
}

/// The dense matrix `H(S)`.
pub fn filter_matrix(s: &DMatrix<f64>, h: &FilterTaps) -> DMatrix<f64> {
    let n = s.nrows();
    let taps = h.as_slice();
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut out = &power * taps[0];
    for &hk in &taps[1..] {
        power = s * &power;
        out.zip_apply(&power, |a, b| *a += hk * b);
    }
    out
}

/// Which relabelings the distance minimizes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// `P = I` only; an upper bound on the permutation-modulo distance.
    Identity,
    /// Every permutation (`N ≤ 8`).
    BruteForce,
}

/// Largest `N` for which brute-force permutation search is allowed.
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Operator distance between a filter on `S` and on `Ŝ`:
/// `min_P ‖H(S) − H(PᵀŜP)‖` with the spectral norm.
pub fn filter_distance(s: &Gso, s_hat: &Gso, h: &FilterTaps, mode: DistanceMode) -> Result<f64> {
    Ok(filter_distance_with_permutation(s, s_hat, h, mode)?.0)
}

/// As [`filter_distance`], also returning the minimizing permutation
/// (lexicographically first on ties).
pub fn filter_distance_with_permutation(
    s: &Gso,
    s_hat: &Gso,
    h: &FilterTaps,
    mode: DistanceMode,
) -> Result<(f64, Permutation)> {
    let n = s.node_count();
    if s_hat.node_count() != n {
        return Err(Error::Shape(format!(
            "GSOs have {} and {} nodes",
            n,
            s_hat.node_count()
        )));
    }
    let hs = filter_matrix(s.matrix(), h);
    let hs_hat = filter_matrix(s_hat.matrix(), h);
    match mode {
        DistanceMode::Identity => Ok((spectral_norm(&(hs - hs_hat)), Permutation::identity(n))),
        DistanceMode::BruteForce => {
            if n > BRUTE_FORCE_MAX_N {
                return Err(Error::TooLarge {
                    n,
                    max: BRUTE_FORCE_MAX_N,
                });
            }
            let mut best = (f64::INFINITY, Permutation::identity(n));
            for map in (0..n).permutations(n) {
                let p = Permutation::new(map)?;
                // H(PᵀŜP) = Pᵀ H(Ŝ) P
                let d = spectral_norm(&(&hs - p.conjugate(&hs_hat)?));
                if d < best.0 {
                    best = (d, p);
                }
            }
            Ok(best)
        }
    }
}

fn check_nodes(s: &Gso, x: &GraphSignal) -> Result<()> {
    if s.node_count() != x.node_count() {
        return Err(Error::Shape(format!(
            "signal has {} nodes, GSO has {}",
            x.node_count(),
            s.node_count()
        )));
    }
    Ok(())
}
