use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gnnstab::experiments::{
    demo, perturb_sweep, split_sweep, train, transfer, verify, Command, ExperimentConfig, VERSION,
};
use gnnstab::movielens::NegativeCorrelation;
use gnnstab::Error;

#[derive(Parser, Debug)]
#[command(name = "gnnstab", version = VERSION, about = "Stability experiments for graph filters and graph neural networks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Train the penalized and unpenalized models on every split.
    Train(Opts),
    /// Evaluate trained models on other movies.
    Transfer(Opts),
    /// Evaluate trained models on randomly perturbed shift operators.
    PerturbSweep(Opts),
    /// Evaluate trained models with shift operators from other train/test ratios.
    SplitSweep(Opts),
    /// Run the invariant suite on synthetic graphs.
    Verify(Opts),
    /// Write the dilation, trade-off and frequency-mixing illustrations.
    Demo(Opts),
}

#[derive(Args, Debug)]
struct Opts {
    /// MovieLens 100k `u.data` file (tab-separated user, item, rating, timestamp).
    #[arg(long, default_value = "data/ml-100k/u.data")]
    data: PathBuf,
    #[arg(long, default_value_t = 50)]
    movie_id: u32,
    /// Penalty weights, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5])]
    mu: Vec<f64>,
    /// Perturbation sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5])]
    epsilon: Vec<f64>,
    /// Number of split realizations.
    #[arg(long, default_value_t = 10)]
    splits: usize,
    /// Seed of the first split; split `i` uses `split_seed + i`.
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Perturbation draws: a range `a..b` or a comma separated list.
    #[arg(long, default_value = "0..10", value_parser = parse_seeds)]
    seeds: SeedList,
    #[arg(long, default_value_t = 40)]
    epochs: usize,
    #[arg(long, default_value_t = 5)]
    batch_size: usize,
    #[arg(long, default_value_t = 64)]
    features: usize,
    #[arg(long, default_value_t = 5)]
    taps: usize,
    #[arg(long, default_value_t = 0.9)]
    train_fraction: f64,
    /// Train/test ratios for split-sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.6, 0.7, 0.8, 0.9])]
    ratios: Vec<f64>,
    /// Transfer targets, comma separated; defaults to the most-rated movies.
    #[arg(long, value_delimiter = ',')]
    movies: Vec<u32>,
    /// Neighbors kept per movie in the similarity graph.
    #[arg(long, default_value_t = 10)]
    knn: usize,
    /// Use |ρ| instead of clipping negative correlations to zero.
    #[arg(long)]
    abs_correlation: bool,
    /// Keep the similarity graph unnormalized.
    #[arg(long)]
    raw_gso: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Smaller synthetic cases (verify).
    #[arg(long)]
    quick: bool,
    /// Perturb one analytic gradient component (verify test hook).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug, Clone)]
struct SeedList(Vec<u64>);

fn parse_seeds(s: &str) -> Result<SeedList, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a
            .trim()
            .parse()
            .map_err(|e| format!("bad range start: {e}"))?;
        let b: u64 = b
            .trim()
            .parse()
            .map_err(|e| format!("bad range end: {e}"))?;
        return Ok(SeedList((a..b).collect()));
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|e| format!("bad seed {t:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(SeedList)
}

impl Opts {
    fn config(self, command: Command) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(command);
        c.data_path = self.data;
        c.target_movie_id = self.movie_id;
        c.mus = self.mu;
        c.epsilons = self.epsilon;
        c.splits = self.splits;
        c.split_seed = self.split_seed;
        c.seeds = self.seeds.0;
        c.epochs = self.epochs;
        c.batch_size = self.batch_size;
        c.features = self.features;
        c.taps = self.taps;
        c.train_fraction = self.train_fraction;
        c.ratios = self.ratios;
        c.movies = self.movies;
        c.task.knn = self.knn;
        if self.abs_correlation {
            c.task.negative = NegativeCorrelation::Abs;
        }
        c.task.normalize = !self.raw_gso;
        c.output_dir = self.out;
        c.quick = self.quick;
        c.inject_fault = self.inject_fault;
        c
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Io { .. }
        | Error::Csv(_)
        | Error::Json(_)
        | Error::Parse { .. }
        | Error::UnknownMovie(_)
        | Error::TooFewRaters { .. } => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Cmd::Train(o) => {
            let r = train::run(&o.config(Command::Train))?;
            for (mu, mean, std) in &r.summary {
                println!("mu = {mu}: test RMSE {mean:.4} ± {std:.4}");
            }
        }
        Cmd::Transfer(o) => {
            let r = transfer::run(&o.config(Command::Transfer))?;
            for (movie, mu, mean, std) in &r.summary {
                println!("movie {movie}, mu = {mu}: degradation {mean:.2}% ± {std:.2}%");
            }
        }
        Cmd::PerturbSweep(o) => {
            let r = perturb_sweep::run(&o.config(Command::PerturbSweep))?;
            for (eps, mu, mean, std) in &r.summary {
                println!("eps = {eps}, mu = {mu}: RMSE difference {mean:.4} ± {std:.4}");
            }
            for (mu, rho) in &r.trend {
                println!("mu = {mu}: Spearman rho {rho:.3}");
            }
        }
        Cmd::SplitSweep(o) => {
            let r = split_sweep::run(&o.config(Command::SplitSweep))?;
            for (ratio, mu, mean, std) in &r.summary {
                println!("ratio {ratio}, mu = {mu}: RMSE difference {mean:.4} ± {std:.4}");
            }
        }
        Cmd::Verify(o) => {
            let r = verify::run(&o.config(Command::Verify))?;
            print!("{}", r.table());
            if !r.passed() {
                for c in r.checks.iter().filter(|c| !c.passed()) {
                    eprintln!("check {} failed at seed {}", c.name, c.worst_seed);
                }
                return Ok(false);
            }
        }
        Cmd::Demo(o) => {
            let r = demo::run(&o.config(Command::Demo))?;
            let f = &r.tradeoff.integral_lipschitz.margins;
            println!("flat filter margin {:.4} -> {:.4}", f.original, f.perturbed);
            if let Some(s) = &r.tradeoff.sharp {
                println!(
                    "sharp filter margin {:.4} -> {:.4}",
                    s.margins.original, s.margins.perturbed
                );
            }
            println!(
                "gnn margin {:.4} -> {:.4}",
                r.tradeoff.gnn.original, r.tradeoff.gnn.perturbed
            );
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
