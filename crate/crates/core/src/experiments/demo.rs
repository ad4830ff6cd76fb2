//! Data and plots for the three illustrations: eigenvalue shifts under
//! dilation, the sharp-versus-flat filter trade-off, and frequency mixing by
//! the activation.

use super::plot::{LinePlot, Series};
use super::verify::{il_taps, mixing_graph};
use super::{fmt, write_csv, ExperimentConfig};
use crate::error::Result;
use crate::gnn::Activation;
use crate::graph::random_normalized_gso;
use crate::spectral::uniform_grid;
use crate::stability::{
    discriminability_tradeoff_demo, frequency_mixing_demo, MixingReport, TradeoffConfig,
    TradeoffReport,
};

/// Dilation used by the demo.
pub const DEMO_EPSILON: f64 = 0.1;
const DEMO_NODES: usize = 8;
const GRID: usize = 201;

#[derive(Debug, Clone)]
pub struct DemoReport {
    pub tradeoff: TradeoffReport,
    pub relu: MixingReport,
    pub linear: MixingReport,
}

pub fn run(config: &ExperimentConfig) -> Result<DemoReport> {
    config.validate()?;
    let seed = config.seeds[0];
    let out = &config.output_dir;
    let provenance = [format!(
        "ER graph N = {DEMO_NODES}, p = 0.3, seed {seed}, unit spectral norm"
    )];

    let s = random_normalized_gso(DEMO_NODES, 0.3, seed)?;
    let cfg = TradeoffConfig {
        epsilon: DEMO_EPSILON,
        seed,
        ..TradeoffConfig::default()
    };
    let tradeoff = discriminability_tradeoff_demo(&s, &cfg)?;
    let h = il_taps();
    let scale = 1.0 + DEMO_EPSILON;

    let rows: Vec<Vec<String>> = tradeoff
        .eigenvalues
        .iter()
        .zip(&tradeoff.perturbed_eigenvalues)
        .enumerate()
        .map(|(i, (&l, &lh))| {
            vec![
                (i + 1).to_string(),
                fmt(l),
                fmt(lh),
                fmt(lh - l),
                fmt(h.response(l)),
                fmt(h.response(lh)),
            ]
        })
        .collect();
    write_csv(
        &out.join("demo_dilation.csv"),
        config,
        &provenance,
        &[
            "n",
            "lambda",
            "lambda_dilated",
            "shift",
            "response",
            "response_dilated",
        ],
        &rows,
    )?;

    let lo = tradeoff.eigenvalues[0].min(scale * tradeoff.eigenvalues[0]);
    let hi = tradeoff.eigenvalues[DEMO_NODES - 1] * scale;
    let grid = uniform_grid(lo, hi, GRID);
    let sharp = tradeoff.sharp.as_ref().map(|f| &f.taps);
    let flat = &tradeoff.integral_lipschitz.taps;
    let rows: Vec<Vec<String>> = grid
        .iter()
        .map(|&l| {
            vec![
                fmt(l),
                fmt(h.response(l)),
                fmt(flat.response(l)),
                sharp.map(|t| fmt(t.response(l))).unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(
        &out.join("demo_responses.csv"),
        config,
        &provenance,
        &["lambda", "il_response", "flat_response", "sharp_response"],
        &rows,
    )?;
    let stem = |name: &str, v: &[f64]| {
        Series::stems(name, v.iter().map(|&l| (l, h.response(l))).collect())
    };
    LinePlot::new(
        "Integral Lipschitz filter under dilation",
        "lambda",
        "h(lambda)",
        vec![
            Series::line("h", grid.iter().map(|&l| (l, h.response(l))).collect()),
            stem("lambda_n", &tradeoff.eigenvalues),
            stem("(1+eps) lambda_n", &tradeoff.perturbed_eigenvalues),
        ],
    )
    .save(&out.join("demo_dilation.svg"))?;

    let mut rows = Vec::new();
    if let Some(f) = &tradeoff.sharp {
        rows.push(vec![
            "sharp".to_string(),
            fmt(f.il_constant),
            fmt(f.margins.original),
            fmt(f.margins.perturbed),
        ]);
    }
    let f = &tradeoff.integral_lipschitz;
    rows.push(vec![
        "integral_lipschitz".into(),
        fmt(f.il_constant),
        fmt(f.margins.original),
        fmt(f.margins.perturbed),
    ]);
    rows.push(vec![
        "gnn".into(),
        String::new(),
        fmt(tradeoff.gnn.original),
        fmt(tradeoff.gnn.perturbed),
    ]);
    write_csv(
        &out.join("demo_tradeoff.csv"),
        config,
        &provenance,
        &["model", "il_constant", "margin_original", "margin_dilated"],
        &rows,
    )?;
    let mut series = vec![Series::line(
        "flat",
        grid.iter().map(|&l| (l, flat.response(l))).collect(),
    )];
    if let Some(t) = sharp {
        series.push(Series::line(
            "sharp",
            grid.iter().map(|&l| (l, t.response(l))).collect(),
        ));
    }
    series.push(Series::stems(
        "lambda_n",
        tradeoff.eigenvalues.iter().map(|&l| (l, 1.0)).collect(),
    ));
    series.push(Series::stems(
        "(1+eps) lambda_n",
        tradeoff
            .perturbed_eigenvalues
            .iter()
            .map(|&l| (l, 0.5))
            .collect(),
    ));
    LinePlot::new("Sharp versus flat filters", "lambda", "h(lambda)", series)
        .save(&out.join("demo_tradeoff.svg"))?;

    let g = mixing_graph(seed)?;
    let relu = frequency_mixing_demo(&g, Activation::Relu)?;
    let linear = frequency_mixing_demo(&g, Activation::Linear)?;
    let provenance = [format!(
        "Laplacian of a non-bipartite ER graph N = 10, p = 0.35, seed {seed}"
    )];
    for (name, r) in [("relu", &relu), ("linear", &linear)] {
        let rows: Vec<Vec<String>> = (0..r.eigenvalues.len())
            .map(|i| {
                vec![
                    (i + 1).to_string(),
                    fmt(r.eigenvalues[i]),
                    fmt(r.input_spectrum[i]),
                    fmt(r.output_spectrum[i]),
                ]
            })
            .collect();
        write_csv(
            &out.join(format!("demo_mixing_{name}.csv")),
            config,
            &provenance,
            &["n", "lambda", "input", "output"],
            &rows,
        )?;
    }
    let spectrum = |r: &MixingReport| {
        r.output_spectrum
            .iter()
            .enumerate()
            .map(|(i, v)| ((i + 1) as f64, *v))
            .collect()
    };
    LinePlot::new(
        "GFT of the activated top eigenvector",
        "n",
        "|GFT|",
        vec![
            Series::stems("relu", spectrum(&relu)),
            Series::markers("linear", spectrum(&linear)),
        ],
    )
    .save(&out.join("demo_mixing.svg"))?;

    Ok(DemoReport {
        tradeoff,
        relu,
        linear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{read_csv, Command};

    #[test]
    fn writes_all_panels() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ExperimentConfig::new(Command::Demo);
        c.output_dir = dir.path().to_path_buf();
        let r = run(&c).unwrap();
        for f in [
            "demo_dilation.csv",
            "demo_responses.csv",
            "demo_tradeoff.csv",
            "demo_mixing_relu.csv",
            "demo_mixing_linear.csv",
            "demo_dilation.svg",
            "demo_tradeoff.svg",
            "demo_mixing.svg",
        ] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let text = std::fs::read_to_string(dir.path().join("demo_dilation.csv")).unwrap();
        assert!(text.contains("# config:") && text.contains("seed 0"));

        // Linear activation leaves a single spike.
        let (_, rows) = read_csv(&dir.path().join("demo_mixing_linear.csv")).unwrap();
        let nonzero = rows
            .iter()
            .filter(|r| r[3].parse::<f64>().unwrap() > 1e-12)
            .count();
        assert_eq!(nonzero, 1);
        assert!(r.relu.outside_count >= 2);

        // Larger eigenvalues move further.
        let (_, rows) = read_csv(&dir.path().join("demo_dilation.csv")).unwrap();
        let shifts: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
        let lambdas: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
        for (s, l) in shifts.iter().zip(&lambdas) {
            assert!((s - DEMO_EPSILON * l).abs() < 1e-12);
        }
    }
}
