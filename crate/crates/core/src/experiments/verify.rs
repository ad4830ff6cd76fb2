//! Invariant suite on synthetic graphs: permutation equivariance, spectral
//! identities, edge dilation, stability bounds, gradients, relative-error
//! round trips and frequency mixing.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fmt, write_csv, ExperimentConfig};
use crate::error::{Error, Result};
use crate::filters::{filter_matrix, graph_convolution, DistanceMode, FilterBank, FilterTaps};
use crate::gnn::{
    backward, features, forward, penalty, predict, smooth_l1, Activation, GnnModel, LayerShape,
    LayerSpec, PenaltyGrid,
};
use crate::graph::{
    build_gso, permute_gso, permute_signal, random_normalized_gso, Graph, GraphSignal, Gso,
    GsoKind, Permutation,
};
use crate::perturbation::{
    edge_dilation, random_relative_perturbation, relative_distance, solve_relative_error,
};
use crate::spectral::{eigendecompose, eigenvalues_symmetric, gft, spectral_norm};
use crate::stability::{
    empirical_filter_distance_sweep, empirical_gnn_sweep, frequency_mixing_demo,
    worst_series_r_squared, BoundReport, PerturbationKind,
};

/// Outcome of one invariant over all its cases.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Seed of the case with the largest residual, or of the first error.
    pub worst_seed: u64,
    /// Error raised by a case, if any.
    pub error: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.max_residual <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<26} {:>6} {:>12} {:>10} {:>6}  status",
            "check", "cases", "residual", "tolerance", "seed"
        );
        for c in &self.checks {
            let status = match (&c.error, c.passed()) {
                (Some(e), _) => format!("FAIL ({e})"),
                (None, true) => "ok".into(),
                (None, false) => "FAIL".into(),
            };
            let _ = writeln!(
                s,
                "{:<26} {:>6} {:>12.3e} {:>10.1e} {:>6}  {status}",
                c.name, c.cases, c.max_residual, c.tolerance, c.worst_seed
            );
        }
        s
    }
}

/// Largest residual over `seeds`; the first error ends the check.
fn run_cases(
    name: &str,
    tolerance: f64,
    seeds: impl IntoIterator<Item = u64>,
    mut f: impl FnMut(u64) -> Result<f64>,
) -> CheckResult {
    let mut out = CheckResult {
        name: name.into(),
        cases: 0,
        max_residual: 0.0,
        tolerance,
        worst_seed: 0,
        error: None,
    };
    for seed in seeds {
        out.cases += 1;
        match f(seed) {
            Ok(r) if r.is_nan() => {
                out.max_residual = f64::NAN;
                out.worst_seed = seed;
                out.error = Some("residual is NaN".into());
                break;
            }
            Ok(r) => {
                if out.cases == 1 || r > out.max_residual {
                    out.max_residual = r;
                    out.worst_seed = seed;
                }
            }
            Err(e) => {
                out.worst_seed = seed;
                out.error = Some(e.to_string());
                break;
            }
        }
    }
    out
}

fn relative(diff: f64, reference: f64) -> f64 {
    diff / reference.max(1e-300)
}

fn random_signal(rng: &mut ChaCha8Rng, n: usize, f: usize) -> GraphSignal {
    GraphSignal::new(DMatrix::from_fn(n, f, |_, _| rng.gen_range(-1.0..1.0)))
}

fn random_gso(rng: &mut ChaCha8Rng, max_n: usize) -> Result<Gso> {
    let n = rng.gen_range(5..=max_n);
    let p = rng.gen_range(0.2..0.6);
    random_normalized_gso(n, p, rng.gen())
}

fn random_model(rng: &mut ChaCha8Rng, f_in: usize, n: usize) -> Result<GnnModel> {
    let depth = rng.gen_range(1..=2);
    let shapes: Vec<LayerShape> = (0..depth)
        .map(|_| LayerShape {
            features: rng.gen_range(1..=4),
            taps: rng.gen_range(1..=4),
            activation: if rng.gen_bool(0.5) {
                Activation::Relu
            } else {
                Activation::Tanh
            },
        })
        .collect();
    let node = rng.gen_range(0..n);
    GnnModel::init(f_in, &shapes, node, rng)
}

/// `max(filter, GNN features, GNN prediction)` relative equivariance residual.
pub fn equivariance_residual(seed: u64, max_n: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_gso(&mut rng, max_n)?;
    let n = s.node_count();
    let f_in = rng.gen_range(1..=3);
    let x = random_signal(&mut rng, n, f_in);
    let p = Permutation::random(n, &mut rng);
    let sp = permute_gso(&s, &p)?;
    let xp = permute_signal(&x, &p)?;

    let k = rng.gen_range(1..=5);
    let h = FilterTaps::new((0..k).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let y = permute_signal(&graph_convolution(&s, &h, &x)?, &p)?;
    let yp = graph_convolution(&sp, &h, &xp)?;
    let filter = relative((y.values() - yp.values()).norm(), y.norm());

    let model = random_model(&mut rng, f_in, n)?;
    let z = permute_signal(&features(&model, &s, &x)?, &p)?;
    let zp = features(&model, &sp, &xp)?;
    let gnn = relative((z.values() - zp.values()).norm(), z.norm());

    // The readout node moves with the relabeling.
    let moved = p.inverse().as_slice()[model.node()];
    let a = predict(&model, &s, &x)?;
    let b = predict(&model.with_node(moved), &sp, &xp)?;
    let pred = relative((a - b).abs(), a.abs().max(1.0));
    Ok(filter.max(gnn).max(pred))
}

/// Reconstruction over `‖S‖`, Parseval, and filter diagonalization residuals.
pub fn spectral_residuals(seed: u64, max_n: usize) -> Result<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_gso(&mut rng, max_n)?;
    let n = s.node_count();
    let eig = eigendecompose(&s)?;
    let recon = relative(
        (eig.reconstruct() - s.matrix()).norm(),
        spectral_norm(s.matrix()),
    );
    let x = random_signal(&mut rng, n, 2);
    let parseval = (gft(&eig.eigenvectors, &x)?.norm() - x.norm()).abs();
    let h = FilterTaps::new((0..4).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let v = &eig.eigenvectors;
    let diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| h.response(l)));
    let diagonal = spectral_norm(&(filter_matrix(s.matrix(), &h) - v * diag * v.transpose()));
    Ok((recon, parseval, diagonal))
}

/// Errors of the eigenvalues, the recovered `E` and the relative distance
/// for `Ŝ = (1 + ε)S`, each divided by its tolerance (1e-10, 1e-9, 1e-10).
pub fn dilation_residual(seed: u64, epsilon: f64, max_n: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = loop {
        let s = random_gso(&mut rng, max_n)?;
        if solve_relative_error(&s, &s, &Permutation::identity(s.node_count())).is_ok() {
            break s;
        }
    };
    let n = s.node_count();
    let spec = edge_dilation(&s, epsilon)?;
    let l = eigenvalues_symmetric(s.matrix())?;
    let lh = eigenvalues_symmetric(spec.perturbed.matrix())?;
    let eig_err = (lh - l * (1.0 + epsilon)).amax();
    let e = solve_relative_error(&s, &spec.perturbed, &Permutation::identity(n))?;
    let e_err = (e - DMatrix::<f64>::identity(n, n) * (epsilon / 2.0)).amax();
    let d_err =
        (relative_distance(&s, &spec.perturbed, DistanceMode::Identity)? - epsilon / 2.0).abs();
    Ok((eig_err / 1e-10).max(e_err / 1e-9).max(d_err / 1e-10))
}

/// `‖Ê − E‖` for a random relative perturbation, on a GSO for which the
/// equation is solvable.
pub fn roundtrip_residual(seed: u64, max_n: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let s = random_gso(&mut rng, max_n)?;
        let eps = rng.gen_range(0.01..0.3);
        let spec = random_relative_perturbation(&s, eps, rng.gen())?;
        match solve_relative_error(&s, &spec.perturbed, &spec.permutation) {
            Ok(e) => return Ok((e - &spec.error).amax()),
            Err(Error::SingularEquation { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Validation("no solvable GSO drawn".into()))
}

/// `1` when the 2-node path raises the singular-equation error, else `0`.
pub fn singular_path_detected() -> Result<bool> {
    let s = build_gso(&Graph::path(2)?, GsoKind::Adjacency)?;
    Ok(matches!(
        solve_relative_error(&s, &s.scaled(1.1), &Permutation::identity(2)),
        Err(Error::SingularEquation { .. })
    ))
}

/// Central finite differences of `smooth_l1(Φ(S, x), y) + μ·penalty`
/// against backpropagation, as `‖g − g_fd‖ / ‖g_fd‖`. With `inject_fault`
/// the largest analytic component is scaled by 1.01.
pub fn gradient_residual(seed: u64, inject_fault: bool) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 8;
    let s = random_normalized_gso(n, 0.4, rng.gen())?;
    let shapes = [
        LayerShape {
            features: 3,
            taps: 4,
            activation: Activation::Relu,
        },
        LayerShape {
            features: 3,
            taps: 4,
            activation: Activation::Tanh,
        },
    ];
    let model = GnnModel::init(1, &shapes, rng.gen_range(0..n), &mut rng)?;
    let x = random_signal(&mut rng, n, 1);
    let y = rng.gen_range(-1.0..1.0);
    let mu = 0.5;
    let grid = PenaltyGrid::new((-1.0, 1.0), 1001)?;
    let objective = |m: &GnnModel| -> Result<f64> {
        Ok(smooth_l1(predict(m, &s, &x)?, y) + mu * penalty(m, &grid).value)
    };

    let fwd = forward(&model, &s, &x)?;
    let mut analytic = backward(&model, &s, &fwd, y, mu, &grid)?.flatten();
    if inject_fault {
        let i = (0..analytic.len())
            .max_by(|&a, &b| analytic[a].abs().total_cmp(&analytic[b].abs()))
            .unwrap_or(0);
        analytic[i] *= 1.01;
    }
    let params = model.parameters();
    let h = 1e-6;
    let mut diff = 0.0;
    let mut reference = 0.0;
    let mut m = model.clone();
    for (i, g) in analytic.iter().enumerate() {
        let mut p = params.clone();
        p[i] += h;
        m.set_parameters(&p)?;
        let up = objective(&m)?;
        p[i] -= 2.0 * h;
        m.set_parameters(&p)?;
        let down = objective(&m)?;
        let fd = (up - down) / (2.0 * h);
        diff += (g - fd).powi(2);
        reference += fd * fd;
    }
    Ok(relative(diff.sqrt(), reference.sqrt()))
}

/// Taps `[0.5, 0.3, 0.1]`, whose constant `C` is below 1 on unit-norm GSOs.
pub fn il_taps() -> FilterTaps {
    FilterTaps::new(vec![0.5, 0.3, 0.1]).expect("valid taps")
}

/// `L`-layer scalar relu GNN with [`il_taps`] in every layer.
pub fn scalar_il_gnn(layers: usize, node: usize) -> Result<GnnModel> {
    let layer = LayerSpec {
        bank: FilterBank::scalar(il_taps()),
        activation: Activation::Relu,
    };
    GnnModel::new(vec![layer; layers], vec![1.0], 0.0, node)
}

/// `ε = 0.01, 0.02, …, 0.1`.
pub fn bound_epsilons() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 100.0).collect()
}

/// Largest `measured / (bound + qε²)` of a sweep; at most 1 when every
/// point satisfies the bound.
pub fn bound_ratio(reports: &[BoundReport]) -> f64 {
    reports
        .iter()
        .map(|r| {
            if r.satisfied {
                let cap = r.bound + r.q * r.epsilon * r.epsilon;
                if cap > 0.0 {
                    (r.measured / cap).min(1.0)
                } else {
                    0.0
                }
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Filter (`gnn = false`) or 2-layer GNN bound sweep on the 20-node graph of
/// `seed`: the dilation series, then random perturbations with `draws` seeds.
pub fn bound_sweep(seed: u64, n: usize, draws: u64, gnn: bool) -> Result<Vec<Vec<BoundReport>>> {
    let s = random_normalized_gso(n, 0.3, seed)?;
    let eps = bound_epsilons();
    let seeds: Vec<u64> = (0..draws).collect();
    let mut out = Vec::new();
    for kind in [PerturbationKind::Dilation, PerturbationKind::Random] {
        let seeds = if kind == PerturbationKind::Dilation {
            &seeds[..1]
        } else {
            &seeds[..]
        };
        let reports = if gnn {
            empirical_gnn_sweep(&scalar_il_gnn(2, 0)?, &s, kind, &eps, seeds, 20)?
        } else {
            empirical_filter_distance_sweep(&s, &il_taps(), kind, &eps, seeds)?
        };
        out.push(reports);
    }
    Ok(out)
}

/// Laplacian of a connected non-bipartite 10-node ER graph.
pub fn mixing_graph(seed: u64) -> Result<Gso> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let g = Graph::erdos_renyi_connected(10, 0.35, &mut rng)?;
        let a = build_gso(&g, GsoKind::Adjacency)?;
        let e = eigenvalues_symmetric(a.matrix())?;
        // Connected graphs are bipartite exactly when the spectrum is symmetric.
        if (e[0] + e[e.len() - 1]).abs() > 1e-6 {
            return build_gso(&g, GsoKind::Laplacian);
        }
    }
    Err(Error::Validation("no non-bipartite graph drawn".into()))
}

pub fn run(config: &ExperimentConfig) -> Result<VerifyReport> {
    config.validate()?;
    let (cases, max_n, draws) = if config.quick {
        (20u64, 12, 3u64)
    } else {
        (100u64, 30, 10u64)
    };
    let sweep_n = if config.quick { 12 } else { 20 };
    let mut checks = Vec::new();

    checks.push(run_cases("equivariance", 1e-9, 0..cases, |s| {
        equivariance_residual(s, max_n)
    }));

    let spectral: Vec<_> = (0..cases / 2)
        .map(|s| (s, spectral_residuals(s, max_n)))
        .collect();
    for (i, (name, tol)) in [
        ("eig_reconstruction", 1e-10),
        ("parseval", 1e-10),
        ("filter_diagonalization", 1e-8),
    ]
    .into_iter()
    .enumerate()
    {
        checks.push(run_cases(
            name,
            tol,
            spectral.iter().map(|c| c.0),
            |seed| match &spectral[seed as usize].1 {
                Ok(r) => Ok([r.0, r.1, r.2][i]),
                Err(e) => Err(Error::Validation(e.to_string())),
            },
        ));
    }

    checks.push(run_cases("edge_dilation", 1.0, 0..10, |seed| {
        [0.01, 0.05, 0.1]
            .iter()
            .map(|&e| dilation_residual(seed, e, max_n))
            .try_fold(0.0f64, |m, r| Ok(m.max(r?)))
    }));

    let bound_seeds = if config.quick { 1u64 } else { 3 };
    for (name, gnn) in [("filter_bound", false), ("gnn_bound", true)] {
        let sweeps: Vec<_> = (0..bound_seeds)
            .map(|s| (s, bound_sweep(s, sweep_n, draws, gnn)))
            .collect();
        checks.push(run_cases(
            name,
            1.0,
            sweeps.iter().map(|c| c.0),
            |seed| match &sweeps[seed as usize].1 {
                Ok(r) => Ok(bound_ratio(&r.concat())),
                Err(e) => Err(Error::Validation(e.to_string())),
            },
        ));
        if !gnn {
            checks.push(run_cases(
                "filter_bound_linearity",
                0.01,
                sweeps.iter().map(|c| c.0),
                |seed| match &sweeps[seed as usize].1 {
                    Ok(r) => r
                        .iter()
                        .try_fold(0.0f64, |m, k| Ok(m.max(1.0 - worst_series_r_squared(k)?))),
                    Err(e) => Err(Error::Validation(e.to_string())),
                },
            ));
        }
    }

    let inject = config.inject_fault;
    checks.push(run_cases("gradient", 1e-4, 0..5, |seed| {
        gradient_residual(seed, inject)
    }));

    checks.push(run_cases("roundtrip", 1e-8, 0..cases, |seed| {
        roundtrip_residual(seed, max_n)
    }));
    checks.push(run_cases("singular_path", 0.0, [0], |_| {
        Ok(if singular_path_detected()? { 0.0 } else { 1.0 })
    }));

    checks.push(run_cases("mixing_relu", 0.0, [10], |seed| {
        let r = frequency_mixing_demo(&mixing_graph(seed)?, Activation::Relu)?;
        Ok(if r.outside_count >= 2 && r.outside_fraction > 0.0 {
            0.0
        } else {
            1.0
        })
    }));
    checks.push(run_cases("mixing_linear", 1e-12, [10], |seed| {
        let r = frequency_mixing_demo(&mixing_graph(seed)?, Activation::Linear)?;
        let n = r.output_spectrum.len();
        Ok(r.output_spectrum[..n - 1]
            .iter()
            .fold(0.0, |m: f64, v| m.max(*v)))
    }));

    let report = VerifyReport { checks };
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.cases.to_string(),
                fmt(c.max_residual),
                fmt(c.tolerance),
                c.worst_seed.to_string(),
                c.passed().to_string(),
                c.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(
        &config.output_dir.join("verify.csv"),
        config,
        &["synthetic ER graphs, unit spectral norm".into()],
        &[
            "check",
            "cases",
            "max_residual",
            "tolerance",
            "worst_seed",
            "passed",
            "error",
        ],
        &rows,
    )?;
    Ok(report)
}
