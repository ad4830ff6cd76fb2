//! Eigendecomposition of symmetric shift operators, the graph Fourier
//! transform, frequency responses and integral-Lipschitz diagnostics.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::filters::FilterTaps;
use crate::graph::{GraphSignal, Gso};

/// Default number of grid points for integral-Lipschitz estimates.
pub const DEFAULT_GRID_SIZE: usize = 1001;

/// `S = V diag(Λ) Vᵀ` with eigenvalues ascending.
///
/// Each eigenvector is signed so that its largest-magnitude entry is positive
/// (first such entry on ties).
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvectors: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `V diag(Λ) Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * self.eigenvalues[j]);
        scaled * v.transpose()
    }

    /// `[λ_1, λ_N]`.
    pub fn range(&self) -> (f64, f64) {
        (self.eigenvalues[0], self.eigenvalues[self.len() - 1])
    }
}

/// Largest absolute asymmetry `max |m_ij − m_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Shape(format!(
            "expected a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = asymmetry(m);
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

pub fn eigendecompose(s: &Gso) -> Result<EigenSystem> {
    eigendecompose_symmetric(s.matrix())
}

/// Indices of rows that are not identically zero.
fn nonzero_rows(m: &DMatrix<f64>) -> Vec<usize> {
    (0..m.nrows())
        .filter(|&i| m.row(i).iter().any(|&v| v != 0.0))
        .collect()
}

fn submatrix(m: &DMatrix<f64>, keep: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(keep.len(), keep.len(), |i, j| m[(keep[i], keep[j])])
}

fn check_converged(values: &DVector<f64>) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation(
            "eigensolver produced non-finite eigenvalues".into(),
        ));
    }
    Ok(())
}

/// Cyclic Jacobi sweeps on `T = VᵀMV`, accumulating rotations into `V`.
/// The QR solver can stop with off-diagonal mass around `1e-10·‖M‖`; a
/// couple of sweeps on the nearly diagonal `T` bring it to rounding level.
fn jacobi_refine(m: &DMatrix<f64>, v: &mut DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let t0 = v.transpose() * m * &*v;
    let mut t = (&t0 + t0.transpose()) * 0.5;
    let scale = t.amax().max(f64::MIN_POSITIVE);
    let threshold = 0.1 * f64::EPSILON * scale;
    for _ in 0..8 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = t[(p, q)];
                if apq.abs() <= threshold {
                    continue;
                }
                rotated = true;
                let theta = (t[(q, q)] - t[(p, p)]) / (2.0 * apq);
                let tan = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                };
                let c = 1.0 / tan.hypot(1.0);
                let s = tan * c;
                for k in (0..n).filter(|&k| k != p && k != q) {
                    let (a, b) = (t[(k, p)], t[(k, q)]);
                    t[(k, p)] = c * a - s * b;
                    t[(k, q)] = s * a + c * b;
                    t[(p, k)] = t[(k, p)];
                    t[(q, k)] = t[(k, q)];
                }
                t[(p, p)] -= tan * apq;
                t[(q, q)] += tan * apq;
                t[(p, q)] = 0.0;
                t[(q, p)] = 0.0;
                for k in 0..n {
                    let (a, b) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * a - s * b;
                    v[(k, q)] = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    t.diagonal()
}

/// Eigenpairs of a symmetric matrix. Zero rows are split off beforehand as
/// exact pairs `(0, e_i)`; the solver can return NaN on them otherwise.
fn symmetric_eigenpairs(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let keep = nonzero_rows(m);
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    let mut col = 0;
    if !keep.is_empty() {
        let sub = submatrix(m, &keep);
        let eig = SymmetricEigen::new(sub.clone());
        check_converged(&eig.eigenvalues)?;
        let mut sub_vectors = eig.eigenvectors;
        let sub_values = jacobi_refine(&sub, &mut sub_vectors);
        for j in 0..keep.len() {
            values[col] = sub_values[j];
            for (r, &i) in keep.iter().enumerate() {
                vectors[(i, col)] = sub_vectors[(r, j)];
            }
            col += 1;
        }
    }
    let mut is_kept = vec![false; n];
    for &i in &keep {
        is_kept[i] = true;
    }
    for i in (0..n).filter(|&i| !is_kept[i]) {
        vectors[(i, col)] = 1.0;
        col += 1;
    }
    Ok((values, vectors))
}

fn symmetric_values(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = m.nrows();
    let keep = nonzero_rows(m);
    let mut vals = vec![0.0; n];
    if !keep.is_empty() {
        let sub = submatrix(m, &keep).symmetric_eigenvalues();
        check_converged(&sub)?;
        vals[..keep.len()].copy_from_slice(sub.as_slice());
    }
    vals.sort_by(f64::total_cmp);
    Ok(DVector::from_vec(vals))
}

/// Eigendecomposition of a symmetric matrix (asymmetry up to `1e-12·max|m_ij|`
/// is tolerated and averaged away).
pub fn eigendecompose_symmetric(m: &DMatrix<f64>) -> Result<EigenSystem> {
    check_symmetric(m)?;
    let n = m.nrows();
    let (raw_values, raw_vectors) = symmetric_eigenpairs(&crate::graph::symmetrize(m))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
    let eigenvalues = DVector::from_fn(n, |i, _| raw_values[order[i]]);
    let mut eigenvectors = DMatrix::from_fn(n, n, |i, j| raw_vectors[(i, order[j])]);
    for j in 0..n {
        let mut col = eigenvectors.column_mut(j);
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(EigenSystem {
        eigenvectors,
        eigenvalues,
    })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues_symmetric(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    check_symmetric(m)?;
    symmetric_values(&crate::graph::symmetrize(m))
}

/// Operator 2-norm. Symmetric input uses `max |λ|`; otherwise `sqrt(λ_max(MᵀM))`.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let scale = m.amax();
    if scale == 0.0 {
        return 0.0;
    }
    if m.is_square() && asymmetry(m) <= 1e-12 * scale {
        return symmetric_values(&crate::graph::symmetrize(m))
            .map(|v| v.amax())
            .unwrap_or(f64::NAN);
    }
    let gram = m.transpose() * m;
    let gram = crate::graph::symmetrize(&gram);
    symmetric_values(&gram)
        .map(|v| v.max().max(0.0).sqrt())
        .unwrap_or(f64::NAN)
}

/// Graph Fourier transform `x̃ = Vᵀx`.
pub fn gft(v: &DMatrix<f64>, x: &GraphSignal) -> Result<GraphSignal> {
    if v.nrows() != x.node_count() {
        return Err(Error::Shape(format!(
            "eigenbasis has {} rows, signal has {} nodes",
            v.nrows(),
            x.node_count()
        )));
    }
    Ok(GraphSignal::new(v.tr_mul(x.values())))
}

/// Inverse transform `x = Vx̃`.
pub fn igft(v: &DMatrix<f64>, x_hat: &GraphSignal) -> Result<GraphSignal> {
    if v.ncols() != x_hat.node_count() {
        return Err(Error::Shape(format!(
            "eigenbasis has {} columns, spectrum has {} entries",
            v.ncols(),
            x_hat.node_count()
        )));
    }
    Ok(GraphSignal::new(v * x_hat.values()))
}

/// `h(λ)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub taps: FilterTaps,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl FrequencyResponse {
    /// `lambda,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["lambda", "value"])?;
        for (l, v) in self.grid.iter().zip(&self.values) {
            wtr.write_record(&[format!("{l:?}"), format!("{v:?}")])?;
        }
        wtr.flush()
            .map_err(|e| Error::io("writing frequency response", e))?;
        Ok(())
    }
}

pub fn frequency_response(h: &FilterTaps, grid: &[f64]) -> FrequencyResponse {
    FrequencyResponse {
        taps: h.clone(),
        grid: grid.to_vec(),
        values: grid.iter().map(|&l| h.response(l)).collect(),
    }
}

/// `|λ h′(λ)|` on each grid point.
pub fn response_derivative_scaled(h: &FilterTaps, grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|&l| (l * h.derivative(l)).abs()).collect()
}

/// `n` equispaced points covering `[a, b]`, endpoints included.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect()
}

/// Grid estimates of a filter's integral-Lipschitz constant and gain.
///
/// Both are maxima over a finite grid and hence lower bounds on the true suprema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralLipschitz {
    /// `max |λ h′(λ)|`.
    pub constant: f64,
    /// Where the maximum was attained (lowest such grid point).
    pub argmax: f64,
    /// `max |h(λ)|`.
    pub max_gain: f64,
    /// `max |h(λ)| <= 1`.
    pub bounded: bool,
}

pub fn integral_lipschitz_check(
    h: &FilterTaps,
    interval: (f64, f64),
    grid_size: usize,
) -> Result<IntegralLipschitz> {
    let (a, b) = interval;
    if !(a < b) {
        return Err(Error::EmptyInterval { a, b });
    }
    if grid_size < 2 {
        return Err(Error::Validation(format!("grid size {grid_size} < 2")));
    }
    let grid = uniform_grid(a, b, grid_size);
    let scaled = response_derivative_scaled(h, &grid);
    let (mut best, mut constant) = (0, scaled[0]);
    for (i, &v) in scaled.iter().enumerate() {
        if v > constant {
            best = i;
            constant = v;
        }
    }
    let max_gain = grid
        .iter()
        .map(|&l| h.response(l).abs())
        .fold(0.0, f64::max);
    Ok(IntegralLipschitz {
        constant,
        argmax: grid[best],
        max_gain,
        bounded: max_gain <= 1.0,
    })
}
