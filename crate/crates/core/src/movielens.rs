//! MovieLens-100k: ratings ingestion, the Pearson movie graph and per-movie
//! rating-prediction tasks.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gnn::{Dataset, Sample};
use crate::graph::{knn_sparsify, Graph, GraphSignal, Gso, GsoKind};
use crate::spectral::eigenvalues_symmetric;

/// Item id of "Star Wars (1977)".
pub const STAR_WARS_ID: u32 = 50;

/// Raters a target movie needs before a task is built for it.
pub const MIN_RATERS: usize = 10;

/// Co-raters needed for a pair's correlation to count.
pub const MIN_CO_RATERS: u32 = 2;

/// Dense user × movie ratings, 0 for unrated.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    ratings: Vec<u8>,
    user_ids: Vec<u32>,
    movie_ids: Vec<u32>,
    user_index: HashMap<u32, usize>,
    movie_index: HashMap<u32, usize>,
}

impl RatingsMatrix {
    /// From `(user_id, movie_id, rating)` triples; ids are sorted ascending and
    /// a repeated pair keeps its last rating.
    pub fn from_triples(triples: &[(u32, u32, u8)]) -> Result<Self> {
        if let Some(t) = triples.iter().find(|t| !(1..=5).contains(&t.2)) {
            return Err(Error::Validation(format!(
                "rating {} for user {} movie {} is outside 1..=5",
                t.2, t.0, t.1
            )));
        }
        let mut user_ids: Vec<u32> = triples.iter().map(|t| t.0).collect();
        let mut movie_ids: Vec<u32> = triples.iter().map(|t| t.1).collect();
        user_ids.sort_unstable();
        user_ids.dedup();
        movie_ids.sort_unstable();
        movie_ids.dedup();
        let user_index: HashMap<u32, usize> = user_ids
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        let movie_index: HashMap<u32, usize> = movie_ids
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        let m = movie_ids.len();
        let mut ratings = vec![0u8; user_ids.len() * m];
        for &(u, mv, r) in triples {
            ratings[user_index[&u] * m + movie_index[&mv]] = r;
        }
        Ok(RatingsMatrix {
            ratings,
            user_ids,
            movie_ids,
            user_index,
            movie_index,
        })
    }

    pub fn user_count(&self) -> usize {
        self.user_ids.len()
    }

    pub fn movie_count(&self) -> usize {
        self.movie_ids.len()
    }

    /// Number of nonzero entries.
    pub fn rating_count(&self) -> usize {
        self.ratings.iter().filter(|&&r| r > 0).count()
    }

    pub fn user_ids(&self) -> &[u32] {
        &self.user_ids
    }

    pub fn movie_ids(&self) -> &[u32] {
        &self.movie_ids
    }

    pub fn user_index(&self, id: u32) -> Option<usize> {
        self.user_index.get(&id).copied()
    }

    pub fn movie_index(&self, id: u32) -> Result<usize> {
        self.movie_index
            .get(&id)
            .copied()
            .ok_or(Error::UnknownMovie(id))
    }

    pub fn get(&self, user: usize, movie: usize) -> u8 {
        self.ratings[user * self.movie_count() + movie]
    }

    /// One user's ratings over all movies.
    pub fn user_row(&self, user: usize) -> &[u8] {
        let m = self.movie_count();
        &self.ratings[user * m..(user + 1) * m]
    }

    /// Ratings of one movie by every user.
    pub fn movie_column(&self, movie: usize) -> Vec<u8> {
        (0..self.user_count()).map(|u| self.get(u, movie)).collect()
    }

    /// Users (row indices) who rated `movie`.
    pub fn raters(&self, movie: usize) -> Vec<usize> {
        (0..self.user_count())
            .filter(|&u| self.get(u, movie) > 0)
            .collect()
    }

    /// Up to `count` movie ids ordered by number of raters, ties by id.
    pub fn most_rated(&self, count: usize) -> Vec<u32> {
        let mut order: Vec<(usize, u32)> = (0..self.movie_count())
            .map(|m| (self.raters(m).len(), self.movie_ids[m]))
            .collect();
        order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        order.into_iter().take(count).map(|(_, id)| id).collect()
    }
}

/// Parses `user_id<TAB>item_id<TAB>rating<TAB>timestamp` lines. Of repeated
/// (user, movie) pairs the latest timestamp wins, the later line on ties.
pub fn parse_ratings<R: BufRead>(input: R, source: &Path) -> Result<RatingsMatrix> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };
    let mut latest: HashMap<(u32, u32), (u64, u8)> = HashMap::new();
    let mut order: Vec<(u32, u32)> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(format!("reading {}", source.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(
                lineno,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let num = |k: usize, what: &str| -> Result<u64> {
            fields[k]
                .parse::<u64>()
                .map_err(|_| parse_err(lineno, format!("bad {what} {:?}", fields[k])))
        };
        let user = u32::try_from(num(0, "user id")?)
            .map_err(|_| parse_err(lineno, "user id too large".into()))?;
        let movie = u32::try_from(num(1, "item id")?)
            .map_err(|_| parse_err(lineno, "item id too large".into()))?;
        let rating = num(2, "rating")?;
        let ts = num(3, "timestamp")?;
        if !(1..=5).contains(&rating) {
            return Err(Error::Validation(format!(
                "{}: line {lineno}: rating {rating} is outside 1..=5",
                source.display()
            )));
        }
        match latest.get(&(user, movie)) {
            Some(&(t, _)) if t > ts => {}
            Some(_) => {
                latest.insert((user, movie), (ts, rating as u8));
            }
            None => {
                latest.insert((user, movie), (ts, rating as u8));
                order.push((user, movie));
            }
        }
    }
    let triples: Vec<(u32, u32, u8)> = order
        .into_iter()
        .map(|k| (k.0, k.1, latest[&k].1))
        .collect();
    RatingsMatrix::from_triples(&triples)
}

pub fn load_ratings(path: &Path) -> Result<RatingsMatrix> {
    let file = File::open(path).map_err(|e| {
        Error::io(
            format!(
                "opening {} (expected MovieLens-100k u.data: tab-separated user_id, item_id, rating, timestamp)",
                path.display()
            ),
            e,
        )
    })?;
    parse_ratings(BufReader::new(file), path)
}

/// What to do with negative correlations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativeCorrelation {
    /// Replace by 0.
    #[default]
    Clip,
    /// Keep the magnitude.
    Abs,
}

/// Pairwise Pearson correlation between movies over the given users who rated
/// both. Pairs with fewer than [`MIN_CO_RATERS`] co-raters or zero variance get
/// weight 0.
pub fn pearson_graph(
    ratings: &RatingsMatrix,
    users: &[usize],
    negative: NegativeCorrelation,
) -> Result<Graph> {
    if users.is_empty() {
        return Err(Error::Validation(
            "pearson_graph needs at least one user".into(),
        ));
    }
    let m = ratings.movie_count();
    if let Some(&u) = users.iter().find(|&&u| u >= ratings.user_count()) {
        return Err(Error::Shape(format!("user index {u} out of range")));
    }
    // Co-rater sufficient statistics as exact integer-valued products:
    // count = BᵀB, Σx = RᵀB, Σx² = (R∘R)ᵀB, Σxy = RᵀR.
    let r = DMatrix::from_fn(users.len(), m, |k, j| ratings.get(users[k], j) as f64);
    let b = r.map(|v| if v > 0.0 { 1.0 } else { 0.0 });
    let rt = r.transpose();
    let count = b.transpose() * &b;
    let sum = &rt * &b;
    let sum_sq = rt.map(|v| v * v) * &b;
    let cross = &rt * &r;
    let mut w = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i + 1..m {
            let n = count[(i, j)];
            if n < MIN_CO_RATERS as f64 {
                continue;
            }
            let (sx, sy) = (sum[(i, j)], sum[(j, i)]);
            let cov = n * cross[(i, j)] - sx * sy;
            let vx = n * sum_sq[(i, j)] - sx * sx;
            let vy = n * sum_sq[(j, i)] - sy * sy;
            if vx == 0.0 || vy == 0.0 {
                continue;
            }
            let c = (cov / (vx * vy).sqrt()).clamp(-1.0, 1.0);
            let c = match negative {
                NegativeCorrelation::Clip => c.max(0.0),
                NegativeCorrelation::Abs => c.abs(),
            };
            w[(i, j)] = c;
            w[(j, i)] = c;
        }
    }
    Graph::new(w)
}

/// How a task's GSO is built from the training users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskOptions {
    /// Neighbors kept per movie.
    pub knn: usize,
    pub negative: NegativeCorrelation,
    /// Divide the adjacency by its spectral radius.
    pub normalize: bool,
}

impl Default for TaskOptions {
    fn default() -> Self {
        TaskOptions {
            knn: 10,
            negative: NegativeCorrelation::Clip,
            normalize: true,
        }
    }
}

/// Train/test datasets for predicting one movie's rating, with the GSO built
/// from the training users only.
#[derive(Debug, Clone)]
pub struct TaskSplit {
    pub target_movie_id: u32,
    /// Node index of the target movie.
    pub target: usize,
    pub train: Dataset,
    pub test: Dataset,
    pub gso: Gso,
    /// Eigenvalue range of `gso`.
    pub interval: (f64, f64),
    pub train_users: Vec<u32>,
    pub test_users: Vec<u32>,
    pub seed: u64,
    pub train_fraction: f64,
}

impl TaskSplit {
    /// SHA-256 (hex) of the target id and both user lists.
    pub fn manifest_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("target={}\n", self.target_movie_id));
        for (name, users) in [("train", &self.train_users), ("test", &self.test_users)] {
            hasher.update(name.as_bytes());
            for u in users {
                hasher.update(format!(",{u}"));
            }
            hasher.update(b"\n");
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// `user_id,split` rows in split order.
    pub fn write_manifest<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["user_id", "split"])?;
        for u in &self.train_users {
            w.write_record([u.to_string(), "train".into()])?;
        }
        for u in &self.test_users {
            w.write_record([u.to_string(), "test".into()])?;
        }
        w.flush()
            .map_err(|e| Error::io("writing split manifest", e))?;
        Ok(())
    }
}

fn user_signal(ratings: &RatingsMatrix, user: usize, target: usize) -> Sample {
    let row = ratings.user_row(user);
    let y = row[target] as f64;
    let mut x: Vec<f64> = row.iter().map(|&r| r as f64).collect();
    x[target] = 0.0;
    Sample {
        x: GraphSignal::from_vec(x),
        y,
    }
}

/// Assigns the target's raters to train and test by a seeded shuffle.
fn split_raters(
    ratings: &RatingsMatrix,
    movie_id: u32,
    train_fraction: f64,
    seed: u64,
) -> Result<(usize, Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::Validation(format!(
            "train fraction {train_fraction} must lie in (0, 1]"
        )));
    }
    let target = ratings.movie_index(movie_id)?;
    let mut raters = ratings.raters(target);
    if raters.len() < MIN_RATERS {
        return Err(Error::TooFewRaters {
            movie_id,
            raters: raters.len(),
            required: MIN_RATERS,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    raters.shuffle(&mut rng);
    let n_train = ((train_fraction * raters.len() as f64).round() as usize).clamp(1, raters.len());
    let test = raters.split_off(n_train);
    Ok((target, raters, test))
}

/// GSO from the given training users: adjacency of the k-NN pruned Pearson
/// graph. Also returns the GSO's eigenvalue range.
pub fn task_gso(
    ratings: &RatingsMatrix,
    train_users: &[usize],
    options: &TaskOptions,
) -> Result<(Gso, (f64, f64))> {
    let graph = pearson_graph(ratings, train_users, options.negative)?;
    let pruned = knn_sparsify(graph.weights(), options.knn)?;
    let gso = Gso::from_matrix(pruned, GsoKind::Adjacency)?;
    let vals = eigenvalues_symmetric(gso.matrix())?;
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    let radius = lo.abs().max(hi.abs());
    if options.normalize && radius > 0.0 {
        return Ok((gso.scaled(1.0 / radius), (lo / radius, hi / radius)));
    }
    Ok((gso, (lo, hi)))
}

pub fn build_task(
    ratings: &RatingsMatrix,
    movie_id: u32,
    train_fraction: f64,
    seed: u64,
) -> Result<TaskSplit> {
    build_task_with(
        ratings,
        movie_id,
        train_fraction,
        seed,
        &TaskOptions::default(),
    )
}

/// Users who rated the target are shuffled with `seed`; the first
/// `train_fraction` train, the rest test. Labels are the target ratings, which
/// are then zeroed in the signals.
pub fn build_task_with(
    ratings: &RatingsMatrix,
    movie_id: u32,
    train_fraction: f64,
    seed: u64,
    options: &TaskOptions,
) -> Result<TaskSplit> {
    let (target, train_idx, test_idx) = split_raters(ratings, movie_id, train_fraction, seed)?;
    let (gso, interval) = task_gso(ratings, &train_idx, options)?;
    let dataset = |idx: &[usize]| {
        Dataset::new(
            idx.iter()
                .map(|&u| user_signal(ratings, u, target))
                .collect(),
        )
    };
    let ids = |idx: &[usize]| {
        idx.iter()
            .map(|&u| ratings.user_ids()[u])
            .collect::<Vec<u32>>()
    };
    Ok(TaskSplit {
        target_movie_id: movie_id,
        target,
        train: dataset(&train_idx)?,
        test: dataset(&test_idx)?,
        gso,
        interval,
        train_users: ids(&train_idx),
        test_users: ids(&test_idx),
        seed,
        train_fraction,
    })
}

/// Root mean squared error.
pub fn rmse(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sse: f64 = predictions
        .iter()
        .zip(labels)
        .map(|(p, y)| (p - y).powi(2))
        .sum();
    Ok((sse / predictions.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn parse(text: &str) -> Result<RatingsMatrix> {
        parse_ratings(text.as_bytes(), Path::new("fixture"))
    }

    #[test]
    fn two_line_fixture() {
        let r = parse("1\t1\t5\t0\n2\t1\t3\t0\n").unwrap();
        assert_eq!(r.user_count(), 2);
        assert_eq!(r.movie_count(), 1);
        assert_eq!(r.movie_column(0), vec![5, 3]);
        assert_eq!(r.rating_count(), 2);
    }

    #[test]
    fn empty_file() {
        let r = parse("").unwrap();
        assert_eq!(
            (r.user_count(), r.movie_count(), r.rating_count()),
            (0, 0, 0)
        );
    }

    #[test]
    fn latest_timestamp_wins() {
        let r = parse("1\t7\t2\t100\n1\t7\t4\t50\n1\t8\t1\t5\n1\t8\t3\t5\n").unwrap();
        assert_eq!(r.get(0, r.movie_index(7).unwrap()), 2);
        assert_eq!(r.get(0, r.movie_index(8).unwrap()), 3);
    }

    #[test]
    fn parse_errors() {
        match parse("1\t1\t5\t0\n1\t2\tx\t0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("1\t1\t5\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(parse("1\t1\t6\t0\n"), Err(Error::Validation(_))));
        assert!(matches!(parse("1\t1\t0\t0\n"), Err(Error::Validation(_))));
        assert!(matches!(
            load_ratings(&PathBuf::from("/nonexistent/u.data")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn pearson_examples() {
        // Movies 1, 2 rated identically; movie 3 reversed; movie 4 by other users.
        let text = "1\t1\t1\t0\n2\t1\t2\t0\n3\t1\t3\t0\n\
                    1\t2\t1\t0\n2\t2\t2\t0\n3\t2\t3\t0\n\
                    1\t3\t3\t0\n2\t3\t2\t0\n3\t3\t1\t0\n\
                    4\t4\t5\t0\n5\t4\t1\t0\n";
        let r = parse(text).unwrap();
        let users: Vec<usize> = (0..r.user_count()).collect();
        let g = pearson_graph(&r, &users, NegativeCorrelation::Clip).unwrap();
        let w = g.weights();
        assert!((w[(0, 1)] - 1.0).abs() < 1e-15);
        assert_eq!(w[(0, 2)], 0.0);
        assert_eq!(w[(0, 3)], 0.0);
        assert_eq!(w[(0, 0)], 0.0);
        let g = pearson_graph(&r, &users, NegativeCorrelation::Abs).unwrap();
        assert!((g.weights()[(0, 2)] - 1.0).abs() < 1e-15);
        assert!(pearson_graph(&r, &[], NegativeCorrelation::Clip).is_err());
    }

    #[test]
    fn pearson_matches_float_reference() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut triples = Vec::new();
        for u in 1..=40u32 {
            for m in 1..=12u32 {
                if rng.gen_bool(0.6) {
                    triples.push((u, m, rng.gen_range(1..=5u8)));
                }
            }
        }
        let r = RatingsMatrix::from_triples(&triples).unwrap();
        let users: Vec<usize> = (0..r.user_count()).step_by(2).collect();
        let g = pearson_graph(&r, &users, NegativeCorrelation::Abs).unwrap();
        for i in 0..r.movie_count() {
            for j in 0..r.movie_count() {
                if i == j {
                    continue;
                }
                let (x, y): (Vec<f64>, Vec<f64>) = users
                    .iter()
                    .filter(|&&u| r.get(u, i) > 0 && r.get(u, j) > 0)
                    .map(|&u| (r.get(u, i) as f64, r.get(u, j) as f64))
                    .unzip();
                let n = x.len() as f64;
                let expected = if x.len() < 2 {
                    0.0
                } else {
                    let mx = x.iter().sum::<f64>() / n;
                    let my = y.iter().sum::<f64>() / n;
                    let c: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
                    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
                    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
                    if vx == 0.0 || vy == 0.0 {
                        0.0
                    } else {
                        (c / (vx * vy).sqrt()).abs()
                    }
                };
                assert!((g.weights()[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }

    fn synthetic(users: u32, movies: u32, seed: u64) -> RatingsMatrix {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut triples = Vec::new();
        for u in 1..=users {
            for m in 1..=movies {
                if m == 1 || rng.gen_bool(0.5) {
                    triples.push((u, m, rng.gen_range(1..=5u8)));
                }
            }
        }
        RatingsMatrix::from_triples(&triples).unwrap()
    }

    #[test]
    fn task_construction() {
        let r = synthetic(30, 15, 1);
        let t = build_task(&r, 1, 0.8, 7).unwrap();
        assert_eq!(t.train.len() + t.test.len(), 30);
        assert_eq!(t.train.len(), 24);
        for s in t.train.samples().iter().chain(t.test.samples()) {
            assert_eq!(s.x.values()[(t.target, 0)], 0.0);
            assert!((1.0..=5.0).contains(&s.y));
        }
        let again = build_task(&r, 1, 0.8, 7).unwrap();
        assert_eq!(t.train_users, again.train_users);
        assert_eq!(t.gso, again.gso);
        assert_eq!(t.manifest_hash(), again.manifest_hash());
        let other = build_task(&r, 1, 0.8, 8).unwrap();
        assert_ne!(t.manifest_hash(), other.manifest_hash());

        let full = build_task(&r, 1, 1.0, 7).unwrap();
        assert!(full.test.is_empty());
        assert!(matches!(
            build_task(&r, 99, 0.9, 0),
            Err(Error::UnknownMovie(99))
        ));
        assert!(build_task(&r, 1, 0.0, 0).is_err());
    }

    #[test]
    fn gso_ignores_test_users() {
        let r = synthetic(30, 15, 2);
        let t = build_task(&r, 1, 0.7, 3).unwrap();
        let train_idx: Vec<usize> = t
            .train_users
            .iter()
            .map(|&u| r.user_index(u).unwrap())
            .collect();
        let (rebuilt, interval) = task_gso(&r, &train_idx, &TaskOptions::default()).unwrap();
        assert_eq!(rebuilt, t.gso);
        assert_eq!(interval, t.interval);
        assert!((interval.0.abs().max(interval.1.abs()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_raters() {
        let r = parse("1\t1\t5\t0\n2\t1\t3\t0\n2\t2\t3\t0\n").unwrap();
        assert!(matches!(
            build_task(&r, 1, 0.9, 0),
            Err(Error::TooFewRaters {
                movie_id: 1,
                raters: 2,
                required: 10
            })
        ));
    }

    #[test]
    fn manifest_csv() {
        let r = synthetic(12, 15, 3);
        let t = build_task(&r, 1, 0.5, 0).unwrap();
        let mut buf = Vec::new();
        t.write_manifest(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("user_id,split\n"));
        assert_eq!(text.lines().count(), 13);
        assert_eq!(t.manifest_hash().len(), 64);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[2.0, 3.0, 0.0], &[1.0, 2.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        let r = rmse(&[1.0, -1.0, 2.0, 0.0], &[0.0; 4]).unwrap();
        assert!((r - 1.5f64.sqrt()).abs() < 1e-15);
        assert!(rmse(&[], &[]).is_err());
        assert!(rmse(&[1.0], &[]).is_err());
    }

    #[test]
    fn most_rated_order() {
        let r = parse("1\t5\t1\t0\n2\t5\t1\t0\n1\t3\t1\t0\n2\t3\t1\t0\n1\t9\t1\t0\n").unwrap();
        assert_eq!(r.most_rated(2), vec![3, 5]);
    }
}
