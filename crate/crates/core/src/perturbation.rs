//! Relative perturbations `PᵀŜP = S + ES + SE`: edge dilation, random
//! relative errors, recovery of `E` for a given pair, the distance `d(S, Ŝ)`
//! and the eigenvector misalignment `δ`.

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::filters::{DistanceMode, BRUTE_FORCE_MAX_N};
use crate::graph::{symmetrize, Gso, Permutation};
use crate::spectral::{eigendecompose, eigendecompose_symmetric, spectral_norm, EigenSystem};

/// A shift operator, its perturbed version and the relative error relating them.
#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    pub original: Gso,
    pub perturbed: Gso,
    /// Symmetric relative error matrix `E`.
    pub error: DMatrix<f64>,
    pub permutation: Permutation,
    /// Size bound, `ε ≥ ‖E‖`.
    pub epsilon: f64,
    /// Misalignment when known by construction.
    pub delta: Option<f64>,
}

impl PerturbationSpec {
    /// Spectral norm of `E`.
    pub fn error_norm(&self) -> f64 {
        spectral_norm(&self.error)
    }

    /// `‖PᵀŜP − S − (ES + SE)‖`.
    pub fn membership_residual(&self) -> Result<f64> {
        let s = self.original.matrix();
        let lhs = self.permutation.conjugate(self.perturbed.matrix())?;
        let rhs = s + &self.error * s + s * &self.error;
        Ok(spectral_norm(&(lhs - rhs)))
    }

    /// `δ` between the eigenbases of `E` and `S`; uses the stored value if any.
    pub fn misalignment(&self) -> Result<Misalignment> {
        if let Some(delta) = self.delta {
            return Ok(Misalignment {
                delta,
                basis_distance: ((delta + 1.0).sqrt() - 1.0).max(0.0),
            });
        }
        let u = eigendecompose_symmetric(&self.error)?;
        let v = eigendecompose(&self.original)?;
        misalignment(&u.eigenvectors, &v.eigenvectors)
    }
}

/// `δ = (‖U − V‖ + 1)² − 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Misalignment {
    pub delta: f64,
    /// `‖U − V‖` after matching.
    pub basis_distance: f64,
}

impl Misalignment {
    pub fn from_distance(basis_distance: f64) -> Self {
        Misalignment {
            delta: (basis_distance + 1.0).powi(2) - 1.0,
            basis_distance,
        }
    }
}

/// `Ŝ = (1 + ε)S`, for which `E = (ε/2)I` and the eigenbases coincide.
pub fn edge_dilation(s: &Gso, epsilon: f64) -> Result<PerturbationSpec> {
    if !(epsilon > -1.0) {
        return Err(Error::Validation(format!(
            "dilation factor {epsilon} must exceed -1"
        )));
    }
    let n = s.node_count();
    Ok(PerturbationSpec {
        original: s.clone(),
        perturbed: s.scaled(1.0 + epsilon),
        error: DMatrix::identity(n, n) * (epsilon / 2.0),
        permutation: Permutation::identity(n),
        epsilon,
        delta: Some(0.0),
    })
}

/// Unit-norm random relative error direction, reusable across sizes `ε`.
///
/// The same seed yields the same direction and the same norm fraction, so a
/// sweep over `ε` with a fixed seed scales one error matrix linearly.
#[derive(Debug, Clone)]
pub struct RandomDirection {
    /// `‖unit‖ = 1`.
    pub unit: DMatrix<f64>,
    /// `‖E‖ / ε`, drawn uniformly from `[1/2, 1]`.
    pub fraction: f64,
    /// `unit·S + S·unit`.
    product: DMatrix<f64>,
}

impl RandomDirection {
    pub fn draw(s: &Gso, seed: u64) -> Result<Self> {
        let n = s.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fraction = rng.gen_range(0.5..=1.0);
        let raw = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let sym = symmetrize(&raw);
        let norm = spectral_norm(&sym);
        if norm == 0.0 {
            return Err(Error::Validation("degenerate random error matrix".into()));
        }
        let unit = sym / norm;
        let sm = s.matrix();
        let product = &unit * sm + sm * &unit;
        Ok(RandomDirection {
            unit,
            fraction,
            product,
        })
    }

    /// `E = ε·fraction·unit`, `Ŝ = S + ES + SE`.
    pub fn at(&self, s: &Gso, epsilon: f64) -> Result<PerturbationSpec> {
        if !(epsilon >= 0.0) {
            return Err(Error::Validation(format!("epsilon {epsilon} must be >= 0")));
        }
        let n = s.node_count();
        if self.unit.nrows() != n {
            return Err(Error::Shape(format!(
                "direction drawn for N = {}, GSO has N = {n}",
                self.unit.nrows()
            )));
        }
        let scale = epsilon * self.fraction;
        let perturbed = if scale == 0.0 {
            s.clone()
        } else {
            s.with_matrix(s.matrix() + &self.product * scale)?
        };
        Ok(PerturbationSpec {
            original: s.clone(),
            perturbed,
            error: &self.unit * scale,
            permutation: Permutation::identity(n),
            epsilon,
            delta: None,
        })
    }
}

/// Random symmetric `E` with `‖E‖` uniform in `[ε/2, ε]` and `Ŝ = S + ES + SE`.
pub fn random_relative_perturbation(s: &Gso, epsilon: f64, seed: u64) -> Result<PerturbationSpec> {
    RandomDirection::draw(s, seed)?.at(s, epsilon)
}

fn singular_tolerance(eig: &EigenSystem) -> f64 {
    1e-10 * eig.eigenvalues.amax()
}

fn check_solvable(eig: &EigenSystem) -> Result<()> {
    let tol = singular_tolerance(eig);
    let l = &eig.eigenvalues;
    for i in 0..l.len() {
        for j in i..l.len() {
            let sum = l[i] + l[j];
            if sum.abs() < tol {
                return Err(Error::SingularEquation { i, j, sum });
            }
        }
    }
    Ok(())
}

fn solve_with(eig: &EigenSystem, delta: &DMatrix<f64>) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let l = &eig.eigenvalues;
    let dt = v.tr_mul(delta) * v;
    let n = l.len();
    let et = DMatrix::from_fn(n, n, |i, j| dt[(i, j)] / (l[i] + l[j]));
    symmetrize(&(v * et * v.transpose()))
}

/// Solves `ES + SE = PᵀŜP − S` in the eigenbasis of `S`:
/// `Ê_ij = Δ̃_ij / (λ_i + λ_j)` with `Δ̃ = VᵀΔV`.
pub fn solve_relative_error(s: &Gso, s_hat: &Gso, p: &Permutation) -> Result<DMatrix<f64>> {
    let n = s.node_count();
    if s_hat.node_count() != n || p.len() != n {
        return Err(Error::Shape(format!(
            "sizes differ: S is {n}, Ŝ is {}, P is {}",
            s_hat.node_count(),
            p.len()
        )));
    }
    let eig = eigendecompose(s)?;
    check_solvable(&eig)?;
    let delta = p.conjugate(s_hat.matrix())? - s.matrix();
    let e = solve_with(&eig, &delta);
    let sm = s.matrix();
    let residual = spectral_norm(&(&e * sm + sm * &e - &delta));
    let scale = spectral_norm(sm);
    if residual > 1e-8 * scale.max(1.0) {
        return Err(Error::Validation(format!(
            "relative error equation residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(e)
}

/// `d(S, Ŝ) = min_P ‖E_P‖` over the identity only or over all permutations.
pub fn relative_distance(s: &Gso, s_hat: &Gso, mode: DistanceMode) -> Result<f64> {
    let n = s.node_count();
    match mode {
        DistanceMode::Identity => Ok(spectral_norm(&solve_relative_error(
            s,
            s_hat,
            &Permutation::identity(n),
        )?)),
        DistanceMode::BruteForce => {
            if n > BRUTE_FORCE_MAX_N {
                return Err(Error::TooLarge {
                    n,
                    max: BRUTE_FORCE_MAX_N,
                });
            }
            if s_hat.node_count() != n {
                return Err(Error::Shape(format!(
                    "GSOs have {} and {} nodes",
                    n,
                    s_hat.node_count()
                )));
            }
            let eig = eigendecompose(s)?;
            // Solvability depends on the spectrum of S only, so either every
            // permutation is singular or none is.
            if check_solvable(&eig).is_err() {
                return Err(Error::NoValidErrorMatrix);
            }
            let mut best = f64::INFINITY;
            for map in (0..n).permutations(n) {
                let p = Permutation::new(map)?;
                let delta = p.conjugate(s_hat.matrix())? - s.matrix();
                best = best.min(spectral_norm(&solve_with(&eig, &delta)));
            }
            Ok(best)
        }
    }
}

fn orthonormality_residual(m: &DMatrix<f64>) -> f64 {
    let n = m.ncols();
    (m.tr_mul(m) - DMatrix::identity(n, n)).amax()
}

/// `δ = (‖U − V‖ + 1)² − 1` after greedily matching the columns of `U` to those
/// of `V` (largest `|⟨u_i, v_j⟩|` first) and flipping signs to make the matched
/// inner products nonnegative.
pub fn misalignment(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<Misalignment> {
    if u.shape() != v.shape() || !u.is_square() {
        return Err(Error::Shape(format!(
            "eigenbases have shapes {:?} and {:?}",
            u.shape(),
            v.shape()
        )));
    }
    for m in [u, v] {
        let r = orthonormality_residual(m);
        if r > 1e-8 {
            return Err(Error::NotOrthonormal { residual: r });
        }
    }
    let n = u.ncols();
    let inner = u.tr_mul(v);
    let mut pairs: Vec<(usize, usize)> = (0..n).cartesian_product(0..n).collect();
    pairs.sort_by(|&(a, b), &(c, d)| {
        inner[(c, d)]
            .abs()
            .total_cmp(&inner[(a, b)].abs())
            .then((a, b).cmp(&(c, d)))
    });
    let mut used_u = vec![false; n];
    let mut used_v = vec![false; n];
    let mut matched = DMatrix::zeros(n, n);
    let mut remaining = n;
    for (i, j) in pairs {
        if remaining == 0 {
            break;
        }
        if used_u[i] || used_v[j] {
            continue;
        }
        used_u[i] = true;
        used_v[j] = true;
        remaining -= 1;
        let sign = if inner[(i, j)] < 0.0 { -1.0 } else { 1.0 };
        matched.set_column(j, &(u.column(i) * sign));
    }
    Ok(Misalignment::from_distance(spectral_norm(&(matched - v))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_gso, permute_gso, Graph, GsoKind};
    use rand::Rng;

    pub(crate) fn weighted_gso(n: usize, seed: u64) -> Gso {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Graph::erdos_renyi_connected(n, 0.5, &mut rng).unwrap();
        let mut w = g.into_weights();
        for i in 0..n {
            for j in (i + 1)..n {
                if w[(i, j)] != 0.0 {
                    let x = rng.gen_range(0.5..1.5);
                    w[(i, j)] = x;
                    w[(j, i)] = x;
                }
            }
        }
        build_gso(&Graph::new(w).unwrap(), GsoKind::Adjacency).unwrap()
    }

    #[test]
    fn dilation_zero() {
        let s = weighted_gso(6, 1);
        let p = edge_dilation(&s, 0.0).unwrap();
        assert_eq!(p.perturbed, s);
        assert_eq!(p.error, DMatrix::zeros(6, 6));
    }

    #[test]
    fn dilation_structure() {
        let s = weighted_gso(7, 2);
        let eps = 0.08;
        let p = edge_dilation(&s, eps).unwrap();
        assert!((p.error_norm() - eps / 2.0).abs() < 1e-15);
        assert!(p.error_norm() <= eps);
        assert!(p.membership_residual().unwrap() < 1e-12);
        let e0 = eigendecompose(&s).unwrap();
        let e1 = eigendecompose(&p.perturbed).unwrap();
        for i in 0..7 {
            assert!((e1.eigenvalues[i] - (1.0 + eps) * e0.eigenvalues[i]).abs() < 1e-10);
            let dot = e1.eigenvectors.column(i).dot(&e0.eigenvectors.column(i));
            assert!((dot.abs() - 1.0).abs() < 1e-8);
        }
        assert_eq!(p.misalignment().unwrap().delta, 0.0);
        assert!(edge_dilation(&s, -1.0).is_err());
    }

    #[test]
    fn dilation_recovered_by_solver() {
        let s = weighted_gso(8, 3);
        let eps = 0.1;
        let p = edge_dilation(&s, eps).unwrap();
        let e = solve_relative_error(&s, &p.perturbed, &Permutation::identity(8)).unwrap();
        assert!((e - DMatrix::identity(8, 8) * (eps / 2.0)).amax() < 1e-9);
        let d = relative_distance(&s, &p.perturbed, DistanceMode::Identity).unwrap();
        assert!((d - eps / 2.0).abs() < 1e-10);
    }

    #[test]
    fn random_perturbation_contract() {
        let s = weighted_gso(9, 4);
        let p0 = random_relative_perturbation(&s, 0.0, 11).unwrap();
        assert_eq!(p0.perturbed, s);
        for seed in 0..5 {
            let eps = 0.2;
            let p = random_relative_perturbation(&s, eps, seed).unwrap();
            let norm = p.error_norm();
            assert!(norm >= eps / 2.0 - 1e-10 && norm <= eps + 1e-10);
            assert!(p.membership_residual().unwrap() < 1e-12);
            let e = solve_relative_error(&s, &p.perturbed, &p.permutation).unwrap();
            assert!((e - &p.error).amax() < 1e-8);
        }
    }

    #[test]
    fn same_seed_scales_linearly() {
        let s = weighted_gso(6, 5);
        let a = random_relative_perturbation(&s, 0.05, 9).unwrap();
        let b = random_relative_perturbation(&s, 0.1, 9).unwrap();
        assert!((&a.error * 2.0 - &b.error).amax() < 1e-15);
    }

    #[test]
    fn singular_two_node_path() {
        let s = build_gso(&Graph::path(2).unwrap(), GsoKind::Adjacency).unwrap();
        let p = edge_dilation(&s, 0.1).unwrap();
        match solve_relative_error(&s, &p.perturbed, &Permutation::identity(2)) {
            Err(Error::SingularEquation { i: 0, j: 1, .. }) => {}
            other => panic!("expected singular error, got {other:?}"),
        }
        assert!(matches!(
            relative_distance(&s, &s, DistanceMode::BruteForce),
            Err(Error::NoValidErrorMatrix)
        ));
    }

    #[test]
    fn distance_examples() {
        let s = weighted_gso(6, 6);
        assert!(relative_distance(&s, &s, DistanceMode::Identity).unwrap() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Permutation::random(6, &mut rng);
        let s_hat = permute_gso(&s, &p).unwrap();
        assert!(relative_distance(&s, &s_hat, DistanceMode::BruteForce).unwrap() < 1e-9);
        assert!(relative_distance(&s, &s_hat, DistanceMode::Identity).unwrap() > 1e-3);
    }

    #[test]
    fn misalignment_examples() {
        let s = weighted_gso(5, 7);
        let v = eigendecompose(&s).unwrap().eigenvectors;
        let m = misalignment(&v, &v).unwrap();
        assert_eq!(m.delta, 0.0);

        // Sign flips and column reordering are undone by the matching.
        let mut u = v.clone();
        u.swap_columns(0, 3);
        u.column_mut(2).neg_mut();
        assert!(misalignment(&u, &v).unwrap().delta < 1e-12);

        assert_eq!(Misalignment::from_distance(1.0).delta, 3.0);

        // A small rotation stays matched: ‖R − I‖ = 2 sin(θ/2).
        let theta: f64 = 0.3;
        let r =
            DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        let m = misalignment(&r, &DMatrix::identity(2, 2)).unwrap();
        let d = 2.0 * (theta / 2.0).sin();
        assert!((m.basis_distance - d).abs() < 1e-12);
        assert!((m.delta - ((d + 1.0).powi(2) - 1.0)).abs() < 1e-12);

        assert!(matches!(
            misalignment(&(DMatrix::identity(2, 2) * 2.0), &DMatrix::identity(2, 2)),
            Err(Error::NotOrthonormal { .. })
        ));
    }
}
