//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! The MovieLens criteria read `MOVIELENS_DATA` or `data/ml-100k/u.data` at
//! the workspace root; without the file they are reported as SKIP unless
//! `GNNSTAB_REQUIRE_DATA` is set.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gnnstab::experiments::verify::{
    bound_ratio, bound_sweep, dilation_residual, equivariance_residual, gradient_residual,
    mixing_graph, roundtrip_residual, singular_path_detected, spectral_residuals,
};
use gnnstab::experiments::{perturb_sweep, train, Command, ExperimentConfig};
use gnnstab::gnn::Activation;
use gnnstab::movielens::load_ratings;
use gnnstab::stability::{frequency_mixing_demo, worst_series_r_squared};
use gnnstab::Result;

const EQUIVARIANCE_TOL: f64 = 1e-9;
const RECONSTRUCTION_TOL: f64 = 1e-10;
const PARSEVAL_TOL: f64 = 1e-10;
const DIAGONALIZATION_TOL: f64 = 1e-8;
const R_SQUARED_MIN: f64 = 0.99;
const GRADIENT_TOL: f64 = 1e-4;
const LINEAR_MIXING_TOL: f64 = 1e-12;
const RMSE_RANGE: (f64, f64) = (0.70, 1.05);
const ROUNDTRIP_TOL: f64 = 1e-8;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn max_over(seeds: std::ops::Range<u64>, f: impl Fn(u64) -> Result<f64>) -> Result<(f64, u64)> {
    let mut worst = (0.0, 0);
    for s in seeds {
        let r = f(s)?;
        if r.is_nan() || r > worst.0 {
            worst = (r, s);
        }
    }
    Ok(worst)
}

fn c1_equivariance() -> Result<Outcome> {
    let t = Instant::now();
    let (r, seed) = max_over(0..100, |s| equivariance_residual(s, 30))?;
    let secs = t.elapsed().as_secs_f64();
    Ok(verdict(
        r <= EQUIVARIANCE_TOL && secs < 30.0,
        format!("100 draws, max relative residual {r:.2e} (seed {seed}), {secs:.1} s"),
    ))
}

fn c2_spectral() -> Result<Outcome> {
    let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
    for s in 0..50 {
        let (x, y, z) = spectral_residuals(s, 30)?;
        a = a.max(x);
        b = b.max(y);
        c = c.max(z);
    }
    Ok(verdict(
        a <= RECONSTRUCTION_TOL && b <= PARSEVAL_TOL && c <= DIAGONALIZATION_TOL,
        format!("50 cases, reconstruction {a:.2e}·‖S‖, Parseval {b:.2e}, diagonalization {c:.2e}"),
    ))
}

fn c3_dilation() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for eps in [0.01, 0.05, 0.1] {
        worst = worst.max(max_over(0..10, |s| dilation_residual(s, eps, 30))?.0);
    }
    Ok(verdict(
        worst <= 1.0,
        format!("10 graphs × ε ∈ {{0.01, 0.05, 0.1}}, worst error / tolerance {worst:.2e}"),
    ))
}

fn bound_criterion(gnn: bool) -> Result<Outcome> {
    let t = Instant::now();
    let (mut ratio, mut r2, mut c_max, mut points) = (0.0f64, f64::INFINITY, 0.0f64, 0);
    for graph in 0..10 {
        let sweeps = bound_sweep(graph, 20, 10, gnn)?;
        for s in &sweeps {
            ratio = ratio.max(bound_ratio(s));
            c_max = s.iter().map(|r| r.c).fold(c_max, f64::max);
            points += s.len();
            if !gnn {
                r2 = r2.min(worst_series_r_squared(s)?);
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if gnn {
        Ok(verdict(
            ratio <= 1.0,
            format!("{points} points, max measured / (bound + qε²) {ratio:.3}, C ≤ {c_max:.3}, {secs:.1} s"),
        ))
    } else {
        Ok(verdict(
            ratio <= 1.0 && r2 >= R_SQUARED_MIN && c_max <= 1.0 && secs < 120.0,
            format!("{points} points, max measured / (bound + qε²) {ratio:.3}, min R² {r2:.5}, C ≤ {c_max:.3}, {secs:.1} s"),
        ))
    }
}

fn c6_gradient() -> Result<Outcome> {
    let t = Instant::now();
    let (r, seed) = max_over(0..5, |s| gradient_residual(s, false))?;
    let secs = t.elapsed().as_secs_f64();
    let (faulty, _) = max_over(0..5, |s| gradient_residual(s, true))?;
    Ok(verdict(
        r <= GRADIENT_TOL && faulty > GRADIENT_TOL && secs < 10.0,
        format!("5 models, max relative error {r:.2e} (seed {seed}), injected fault {faulty:.2e}, {secs:.2} s"),
    ))
}

fn c7_mixing() -> Result<Outcome> {
    let (mut min_count, mut min_energy, mut linear) = (usize::MAX, f64::INFINITY, 0.0f64);
    for seed in 0..5 {
        let g = mixing_graph(seed)?;
        let relu = frequency_mixing_demo(&g, Activation::Relu)?;
        let lin = frequency_mixing_demo(&g, Activation::Linear)?;
        min_count = min_count.min(relu.outside_count);
        min_energy = min_energy.min(relu.outside_fraction);
        let n = lin.output_spectrum.len();
        linear = lin.output_spectrum[..n - 1]
            .iter()
            .fold(linear, |m, v| m.max(*v));
    }
    Ok(verdict(
        min_count >= 2 && min_energy > 0.0 && linear <= LINEAR_MIXING_TOL,
        format!("5 graphs, relu ≥ {min_count} other coefficients (energy share ≥ {min_energy:.3}), linear leak {linear:.1e}"),
    ))
}

fn c10_roundtrip() -> Result<Outcome> {
    let (r, seed) = max_over(0..100, |s| roundtrip_residual(s, 30))?;
    let singular = singular_path_detected()?;
    Ok(verdict(
        r <= ROUNDTRIP_TOL && singular,
        format!("100 specs, max |Ê − E| {r:.2e} (seed {seed}), 2-node path singular: {singular}"),
    ))
}

fn data_path() -> PathBuf {
    std::env::var_os("MOVIELENS_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/../../data/ml-100k/u.data"
            ))
        })
}

/// Criteria 8 and 9; the sweep reuses the checkpoints of the training run.
fn movielens() -> Result<(Outcome, Outcome)> {
    let path = data_path();
    if !path.exists() {
        let msg = format!("{} not found", path.display());
        if std::env::var_os("GNNSTAB_REQUIRE_DATA").is_some() {
            return Ok((Outcome::Fail(msg.clone()), Outcome::Fail(msg)));
        }
        return Ok((Outcome::Skip(msg.clone()), Outcome::Skip(msg)));
    }
    let ratings = load_ratings(&path)?;
    let dir = tempfile::tempdir()
        .map_err(|e| gnnstab::Error::Config(format!("temporary directory: {e}")))?;
    let mut config = ExperimentConfig::new(Command::Train);
    config.data_path = path;
    config.output_dir = dir.path().to_path_buf();

    let t = Instant::now();
    let r = train::run_with(&config, &ratings)?;
    let secs = t.elapsed().as_secs_f64();
    let stat = |mu: f64| {
        r.summary
            .iter()
            .find(|s| s.0 == mu)
            .map(|s| (s.1, s.2))
            .unwrap_or((f64::NAN, f64::NAN))
    };
    let ((m0, s0), (m5, s5)) = (stat(0.0), stat(0.5));
    let inside = |v: f64| v >= RMSE_RANGE.0 && v <= RMSE_RANGE.1;
    let c8 = verdict(
        inside(m0) && inside(m5),
        format!(
            "10 splits, test RMSE μ=0: {m0:.4} ± {s0:.4}, μ=0.5: {m5:.4} ± {s5:.4}, {secs:.0} s"
        ),
    );

    let mut sweep = config.clone();
    sweep.command = Command::PerturbSweep;
    sweep.splits = 3;
    sweep.seeds = (0..10).collect();
    let t = Instant::now();
    let r = perturb_sweep::run_with(&sweep, &ratings)?;
    let eps = sweep.epsilons.iter().copied().fold(0.0, f64::max);
    let d0 = r.mean_difference(eps, 0.0).unwrap_or(f64::NAN);
    let d5 = r.mean_difference(eps, 0.5).unwrap_or(f64::NAN);
    let secs = t.elapsed().as_secs_f64();
    let c9 = verdict(
        d5 <= d0,
        format!("3 splits × 10 draws at ε = {eps}: mean RMSE difference μ=0.5: {d5:.4}, μ=0: {d0:.4}, {secs:.0} s"),
    );
    Ok((c8, c9))
}

fn report(
    out: &mut impl Write,
    id: usize,
    name: &str,
    outcome: Result<Outcome>,
    failed: &mut bool,
) {
    let line = match outcome {
        Ok(Outcome::Pass(d)) => format!("PASS  criterion {id:>2} {name}: {d}"),
        Ok(Outcome::Skip(d)) => format!("SKIP  criterion {id:>2} {name}: {d}"),
        Ok(Outcome::Fail(d)) => {
            *failed = true;
            format!("FAIL  criterion {id:>2} {name}: {d}")
        }
        Err(e) => {
            *failed = true;
            format!("FAIL  criterion {id:>2} {name}: error: {e}")
        }
    };
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn main() -> ExitCode {
    // Harness flags are ignored; a name filter that does not match skips the suite.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    if args
        .iter()
        .any(|a| !a.starts_with('-') && !"acceptance".contains(a.as_str()))
    {
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let mut out = std::io::stdout();
    let mut failed = false;
    report(
        &mut out,
        1,
        "permutation equivariance",
        c1_equivariance(),
        &mut failed,
    );
    report(
        &mut out,
        2,
        "spectral correctness",
        c2_spectral(),
        &mut failed,
    );
    report(
        &mut out,
        3,
        "edge dilation exactness",
        c3_dilation(),
        &mut failed,
    );
    report(
        &mut out,
        4,
        "filter stability bound",
        bound_criterion(false),
        &mut failed,
    );
    report(
        &mut out,
        5,
        "GNN stability bound",
        bound_criterion(true),
        &mut failed,
    );
    report(&mut out, 6, "gradient oracle", c6_gradient(), &mut failed);
    report(&mut out, 7, "frequency mixing", c7_mixing(), &mut failed);
    let (c8, c9) = match movielens() {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => (Err(gnnstab::Error::Config(e.to_string())), Err(e)),
    };
    report(&mut out, 8, "MovieLens RMSE", c8, &mut failed);
    report(&mut out, 9, "penalty stability effect", c9, &mut failed);
    report(
        &mut out,
        10,
        "relative error round trip",
        c10_roundtrip(),
        &mut failed,
    );
    let _ = writeln!(
        out,
        "acceptance finished in {:.0?}",
        Duration::from_secs(start.elapsed().as_secs())
    );
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
