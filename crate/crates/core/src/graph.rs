//! Graphs, graph shift operators (GSOs), graph signals and node permutations.
//!
//! All matrices are dense `f64`. A [`Gso`] additionally keeps a compressed
//! row view of its nonzero entries so that the shift `[Sx]_i = Σ_{j∈N_i} s_ij x_j`
//! only touches the neighborhood of each node.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted graph on `N` nodes. `weights[(i, j)]` is the weight of edge `(j, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    weights: DMatrix<f64>,
}

impl Graph {
    /// Validates a weight matrix: square, finite, nonnegative and with zero diagonal.
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if n == 0 || weights.ncols() != n {
            return Err(Error::Shape(format!(
                "graph weights must be a nonempty square matrix, got {}x{}",
                n,
                weights.ncols()
            )));
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::Validation(format!(
                    "self loop at node {i} (weight {})",
                    weights[(i, i)]
                )));
            }
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Validation(format!(
                "edge weights must be finite and nonnegative, found {w}"
            )));
        }
        Ok(Graph { weights })
    }

    /// Unweighted undirected graph from an edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Shape(format!(
                    "edge ({i},{j}) out of range for N = {n}"
                )));
            }
            if i != j {
                w[(i, j)] = 1.0;
                w[(j, i)] = 1.0;
            }
        }
        Graph::new(w)
    }

    /// Path graph `0 - 1 - ... - (n-1)` with unit weights.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges)
    }

    /// Erdős–Rényi graph with unit weights, resampled until connected.
    pub fn erdos_renyi_connected<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Self> {
        if n == 0 || !(0.0..=1.0).contains(&p) {
            return Err(Error::Validation(format!(
                "invalid ER parameters n={n}, p={p}"
            )));
        }
        for _ in 0..10_000 {
            let mut w = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen::<f64>() < p {
                        w[(i, j)] = 1.0;
                        w[(j, i)] = 1.0;
                    }
                }
            }
            let g = Graph { weights: w };
            if g.is_connected() {
                return Ok(g);
            }
        }
        Err(Error::Validation(format!(
            "could not sample a connected ER graph with n={n}, p={p}"
        )))
    }

    pub fn node_count(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn into_weights(self) -> DMatrix<f64> {
        self.weights
    }

    /// In-degrees `d_i = Σ_j w_ij`.
    pub fn degrees(&self) -> DVector<f64> {
        let n = self.node_count();
        DVector::from_fn(n, |i, _| self.weights.row(i).sum())
    }

    /// Replaces `W` by `(W + Wᵀ)/2`.
    pub fn symmetrized(&self) -> Graph {
        Graph {
            weights: symmetrize(&self.weights),
        }
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, s) in seen.iter_mut().enumerate() {
                if !*s && (self.weights[(i, j)] != 0.0 || self.weights[(j, i)] != 0.0) {
                    *s = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Which matrix representation of the graph acts as the shift operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GsoKind {
    Adjacency,
    Laplacian,
    Markov,
}

/// Symmetric graph shift operator.
#[derive(Debug, Clone)]
pub struct Gso {
    matrix: DMatrix<f64>,
    kind: GsoKind,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl PartialEq for Gso {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.matrix == other.matrix
    }
}

/// Above this fill ratio the shift falls back to a dense matrix product.
const DENSE_FILL: f64 = 0.25;

impl Gso {
    /// Wraps a square matrix, forcing exact symmetry by averaging with its transpose.
    pub fn from_matrix(matrix: DMatrix<f64>, kind: GsoKind) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::Shape(format!(
                "GSO must be a nonempty square matrix, got {}x{}",
                n,
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("GSO entries must be finite".into()));
        }
        let matrix = symmetrize(&matrix);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..n {
                let s = matrix[(i, j)];
                if s != 0.0 {
                    cols.push(j);
                    vals.push(s);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Gso {
            matrix,
            kind,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn kind(&self) -> GsoKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of stored nonzero entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero entries `(j, s_ij)` of row `i`, i.e. the neighborhood `N_i` (plus the diagonal).
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    /// Same operator kind with a new matrix (e.g. a perturbed version of this one).
    pub fn with_matrix(&self, matrix: DMatrix<f64>) -> Result<Self> {
        Gso::from_matrix(matrix, self.kind)
    }

    /// Scaled copy `c·S`.
    pub fn scaled(&self, c: f64) -> Gso {
        Gso {
            matrix: &self.matrix * c,
            kind: self.kind,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|v| v * c).collect(),
        }
    }

    pub(crate) fn shift_matrix(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.node_count();
        if self.vals.len() as f64 > DENSE_FILL * (n * n) as f64 {
            return &self.matrix * x;
        }
        let f = x.ncols();
        let mut out = DMatrix::zeros(n, f);
        for c in 0..f {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for i in 0..n {
                let mut acc = 0.0;
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[p] * xc[self.cols[p]];
                }
                oc[i] = acc;
            }
        }
        out
    }
}

/// Builds the shift operator of the requested kind from a graph.
///
/// The Markov operator `D⁻¹W` is not symmetric for irregular graphs; it is
/// symmetrized by averaging with its transpose.
pub fn build_gso(graph: &Graph, kind: GsoKind) -> Result<Gso> {
    let w = graph.weights();
    let n = graph.node_count();
    let matrix = match kind {
        GsoKind::Adjacency => w.clone(),
        GsoKind::Laplacian => {
            let d = graph.degrees();
            DMatrix::from_diagonal(&d) - w
        }
        GsoKind::Markov => {
            let d = graph.degrees();
            if let Some(node) = (0..n).find(|&i| d[i] <= 0.0) {
                return Err(Error::DegenerateGraph { node });
            }
            DMatrix::from_fn(n, n, |i, j| w[(i, j)] / d[i])
        }
    };
    Gso::from_matrix(matrix, kind)
}

/// Connected Erdős–Rényi adjacency with edge weights uniform in `[0.5, 1.5]`,
/// scaled to unit spectral norm. Deterministic in `seed`.
pub fn random_normalized_gso(n: usize, p: f64, seed: u64) -> Result<Gso> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Graph::erdos_renyi_connected(n, p, &mut rng)?;
    let w = g.weights().map(|v| {
        if v > 0.0 {
            rng.gen_range(0.5..1.5) * v
        } else {
            0.0
        }
    });
    let s = build_gso(&Graph::new(symmetrize(&w))?, GsoKind::Adjacency)?;
    let r = crate::spectral::spectral_norm(s.matrix());
    if !(r > 0.0) {
        return Err(Error::Validation(format!("graph with n={n} has no edges")));
    }
    Ok(s.scaled(1.0 / r))
}

/// Data on the nodes of a graph: an `N × F` matrix, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal {
    values: DMatrix<f64>,
}

impl GraphSignal {
    pub fn new(values: DMatrix<f64>) -> Self {
        GraphSignal { values }
    }

    /// Scalar signal (`F = 1`).
    pub fn from_vec(values: Vec<f64>) -> Self {
        let n = values.len();
        GraphSignal {
            values: DMatrix::from_vec(n, 1, values),
        }
    }

    pub fn zeros(n: usize, features: usize) -> Self {
        GraphSignal {
            values: DMatrix::zeros(n, features),
        }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn node_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn feature_count(&self) -> usize {
        self.values.ncols()
    }

    /// Feature `f` as a plain vector.
    pub fn feature(&self, f: usize) -> Vec<f64> {
        self.values.column(f).iter().copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }
}

/// `Sx`, applied to every feature column.
pub fn graph_shift(s: &Gso, x: &GraphSignal) -> Result<GraphSignal> {
    if x.node_count() != s.node_count() {
        return Err(Error::Shape(format!(
            "signal has {} nodes, GSO has {}",
            x.node_count(),
            s.node_count()
        )));
    }
    Ok(GraphSignal::new(s.shift_matrix(x.values())))
}

/// Relabeling of the nodes. `map[i]` is the old index of new node `i`, so that
/// `(Pᵀx)_i = x_{map[i]}` and `(PᵀSP)_{ij} = S_{map[i], map[j]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &m in &map {
            if m >= n {
                return Err(Error::InvalidPermutation(format!(
                    "index {m} out of range for length {n}"
                )));
            }
            if seen[m] {
                return Err(Error::InvalidPermutation(format!("index {m} repeated")));
            }
            seen[m] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &m) in self.map.iter().enumerate() {
            inv[m] = i;
        }
        Permutation { map: inv }
    }

    /// The 0/1 matrix `P` with `P[map[i], i] = 1`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.map.len();
        let mut p = DMatrix::zeros(n, n);
        for (i, &m) in self.map.iter().enumerate() {
            p[(m, i)] = 1.0;
        }
        p
    }

    /// `PᵀMP` for a square matrix.
    pub fn conjugate(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.map.len();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Shape(format!(
                "permutation of length {n} applied to a {}x{} matrix",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| m[(self.map[i], self.map[j])]))
    }

    /// `PᵀX` (rows reordered).
    pub fn permute_rows(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.map.len();
        if x.nrows() != n {
            return Err(Error::Shape(format!(
                "permutation of length {n} applied to {} rows",
                x.nrows()
            )));
        }
        Ok(DMatrix::from_fn(n, x.ncols(), |i, j| x[(self.map[i], j)]))
    }
}

/// `PᵀSP`.
pub fn permute_gso(s: &Gso, p: &Permutation) -> Result<Gso> {
    s.with_matrix(p.conjugate(s.matrix())?)
}

/// `Pᵀx`.
pub fn permute_signal(x: &GraphSignal, p: &Permutation) -> Result<GraphSignal> {
    Ok(GraphSignal::new(p.permute_rows(x.values())?))
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// Keeps the `k` largest off-diagonal entries of every row (ties go to the lower
/// column index), then symmetrizes by averaging each pair of directed weights,
/// a dropped direction counting as zero.
pub fn knn_sparsify(w: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            n,
            w.ncols()
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::Validation(format!(
            "k = {k} must satisfy 1 <= k < N = {n}"
        )));
    }
    let mut kept = DMatrix::zeros(n, n);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| w[(i, b)].total_cmp(&w[(i, a)]).then(a.cmp(&b)));
        for &j in order.iter().take(k) {
            kept[(i, j)] = w[(i, j)];
        }
    }
    Ok(symmetrize(&kept))
}

/// Writes every nonzero entry as an `i,j,weight` row (0-indexed).
pub fn write_edge_list<W: Write>(m: &DMatrix<f64>, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["i", "j", "weight"])?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v != 0.0 {
                wtr.write_record(&[i.to_string(), j.to_string(), format!("{v:?}")])?;
            }
        }
    }
    wtr.flush().map_err(|e| Error::io("writing edge list", e))?;
    Ok(())
}

/// Reads an `i,j,weight` edge list. Without `n`, the node count is one more than
/// the largest index seen. A header row is optional.
pub fn read_edge_list<R: Read>(input: R, n: Option<usize>) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut entries = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(parse_err(
                line + 1,
                format!("expected 3 fields, got {}", rec.len()),
            ));
        }
        if line == 0 && rec[0].parse::<usize>().is_err() {
            continue;
        }
        let i: usize = rec[0]
            .parse()
            .map_err(|e| parse_err(line + 1, format!("{e}")))?;
        let j: usize = rec[1]
            .parse()
            .map_err(|e| parse_err(line + 1, format!("{e}")))?;
        let w: f64 = rec[2]
            .parse()
            .map_err(|e| parse_err(line + 1, format!("{e}")))?;
        entries.push((i, j, w));
    }
    let inferred = entries
        .iter()
        .map(|&(i, j, _)| i.max(j) + 1)
        .max()
        .unwrap_or(0);
    let n = n.unwrap_or(inferred);
    if inferred > n {
        return Err(Error::Shape(format!(
            "edge index {} out of range for N = {n}",
            inferred - 1
        )));
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, j, w) in entries {
        m[(i, j)] = w;
    }
    Ok(m)
}

/// One row per node, one column per feature.
pub fn write_signal<W: Write>(x: &GraphSignal, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for i in 0..x.node_count() {
        let row: Vec<String> = x.values().row(i).iter().map(|v| format!("{v:?}")).collect();
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io("writing signal", e))?;
    Ok(())
}

pub fn read_signal<R: Read>(input: R) -> Result<GraphSignal> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(line + 1, format!("{e}")))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(line + 1, "ragged signal rows".into()));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    let f = rows.first().map_or(1, Vec::len);
    Ok(GraphSignal::new(DMatrix::from_fn(n, f, |i, j| rows[i][j])))
}

pub fn load_edge_list(path: &Path, n: Option<usize>) -> Result<DMatrix<f64>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_edge_list(file, n)
}

pub fn load_signal(path: &Path) -> Result<GraphSignal> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_signal(file)
}

fn parse_err(line: usize, message: String) -> Error {
    Error::Parse {
        path: "<csv>".into(),
        line,
        message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path3() -> Gso {
        build_gso(&Graph::path(3).unwrap(), GsoKind::Adjacency).unwrap()
    }

    #[test]
    fn path_adjacency() {
        let s = path3();
        let expected = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 1., 0., 1., 0.]);
        assert_eq!(s.matrix(), &expected);
    }

    #[test]
    fn path_laplacian() {
        let l = build_gso(&Graph::path(3).unwrap(), GsoKind::Laplacian).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[1., -1., 0., -1., 2., -1., 0., -1., 1.]);
        assert_eq!(l.matrix(), &expected);
    }

    #[test]
    fn path_markov_by_hand() {
        // D⁻¹W rows: [0,1,0], [1/2,0,1/2], [0,1,0]; averaged with the transpose.
        let m = build_gso(&Graph::path(3).unwrap(), GsoKind::Markov).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0., 0.75, 0., 0.75, 0., 0.75, 0., 0.75, 0.]);
        assert!((m.matrix() - expected).abs().max() < 1e-15);
    }

    #[test]
    fn markov_rejects_isolated_node() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert!(matches!(
            build_gso(&g, GsoKind::Markov),
            Err(Error::DegenerateGraph { node: 2 })
        ));
    }

    #[test]
    fn shift_examples() {
        let s = path3();
        let y = graph_shift(&s, &GraphSignal::from_vec(vec![1., 0., 0.])).unwrap();
        assert_eq!(y.feature(0), vec![0., 1., 0.]);
        let z = graph_shift(&s, &GraphSignal::zeros(3, 2)).unwrap();
        assert_eq!(z.values(), &DMatrix::zeros(3, 2));

        let mut w = Graph::path(3).unwrap().into_weights();
        w[(0, 1)] = 2.0;
        w[(1, 0)] = 2.0;
        let s = build_gso(&Graph::new(w).unwrap(), GsoKind::Adjacency).unwrap();
        let y = graph_shift(&s, &GraphSignal::from_vec(vec![1., 0., 0.])).unwrap();
        assert_eq!(y.feature(0), vec![0., 2., 0.]);
    }

    #[test]
    fn shift_shape_error() {
        let s = path3();
        assert!(matches!(
            graph_shift(&s, &GraphSignal::zeros(4, 1)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn dense_and_sparse_shift_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Graph::erdos_renyi_connected(12, 0.9, &mut rng).unwrap();
        let s = build_gso(&g, GsoKind::Laplacian).unwrap();
        assert!(s.nnz() as f64 > DENSE_FILL * 144.0);
        let x = DMatrix::from_fn(12, 3, |i, j| (i * 3 + j) as f64 - 7.0);
        let dense = s.matrix() * &x;
        let g2 = Graph::path(12).unwrap();
        let sparse = build_gso(&g2, GsoKind::Adjacency).unwrap();
        assert!((s.shift_matrix(&x) - dense).abs().max() < 1e-12);
        assert!((sparse.shift_matrix(&x) - sparse.matrix() * &x).abs().max() < 1e-12);
    }

    #[test]
    fn knn_top1_drops_weak_edge() {
        let w = DMatrix::from_row_slice(3, 3, &[0., 0.9, 0.1, 0.9, 0., 0.5, 0.1, 0.5, 0.]);
        let out = knn_sparsify(&w, 1).unwrap();
        // Row 0 keeps (0,1); row 1 keeps (1,0); row 2 keeps (2,1).
        assert_eq!(out[(0, 2)], 0.0);
        assert_eq!(out[(2, 0)], 0.0);
        assert_eq!(out[(0, 1)], 0.9);
        assert_eq!(out[(1, 2)], 0.25);
        assert_eq!(out.clone() - out.transpose(), DMatrix::zeros(3, 3));
    }

    #[test]
    fn knn_complete_graph_unchanged() {
        let n = 5;
        let w = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 0.3 });
        assert_eq!(knn_sparsify(&w, n - 1).unwrap(), w);
    }

    #[test]
    fn knn_ties_prefer_lower_index() {
        let w = DMatrix::from_row_slice(3, 3, &[0., 1., 1., 1., 0., 1., 1., 1., 0.]);
        let out = knn_sparsify(&w, 1).unwrap();
        // 0 -> 1, 1 -> 0, 2 -> 0
        assert_eq!(out[(0, 1)], 1.0);
        assert_eq!(out[(0, 2)], 0.5);
        assert_eq!(out[(1, 2)], 0.0);
    }

    #[test]
    fn knn_rejects_large_k() {
        assert!(knn_sparsify(&DMatrix::zeros(3, 3), 3).is_err());
    }

    #[test]
    fn swap_permutation() {
        let p = Permutation::new(vec![1, 0, 2]).unwrap();
        let s = permute_gso(&path3(), &p).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0., 1., 1., 1., 0., 0., 1., 0., 0.]);
        assert_eq!(s.matrix(), &expected);
        // PᵀSP via explicit matrices.
        let pm = p.to_matrix();
        assert_eq!(pm.transpose() * path3().matrix() * &pm, expected);
    }

    #[test]
    fn permutation_roundtrip_and_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = Graph::erdos_renyi_connected(9, 0.4, &mut rng).unwrap();
        let s = build_gso(&g, GsoKind::Laplacian).unwrap();
        let id = Permutation::identity(9);
        assert_eq!(permute_gso(&s, &id).unwrap(), s);
        let p = Permutation::random(9, &mut rng);
        let back = permute_gso(&permute_gso(&s, &p).unwrap(), &p.inverse()).unwrap();
        assert_eq!(back, s);
        let x = GraphSignal::from_vec((0..9).map(f64::from).collect());
        let back = permute_signal(&permute_signal(&x, &p).unwrap(), &p.inverse()).unwrap();
        assert_eq!(back, x);
        // P𝟙 = 𝟙 and Pᵀ𝟙 = 𝟙
        let pm = p.to_matrix();
        let ones = DVector::from_element(9, 1.0);
        assert_eq!(&pm * &ones, ones);
        assert_eq!(pm.transpose() * &ones, ones);
    }

    #[test]
    fn invalid_permutations() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        let p = Permutation::identity(2);
        assert!(permute_gso(&path3(), &p).is_err());
    }

    #[test]
    fn edge_list_roundtrip() {
        let w = knn_sparsify(
            &DMatrix::from_row_slice(3, 3, &[0., 0.9, 0.1, 0.9, 0., 0.5, 0.1, 0.5, 0.]),
            1,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_edge_list(&w, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("i,j,weight\n0,1,0.9\n"));
        assert_eq!(read_edge_list(&buf[..], Some(3)).unwrap(), w);
        assert!(read_edge_list("0,1\n".as_bytes(), None).is_err());
    }

    #[test]
    fn signal_roundtrip() {
        let x = GraphSignal::new(DMatrix::from_row_slice(2, 2, &[1.5, -2.0, 0.1, 3.0]));
        let mut buf = Vec::new();
        write_signal(&x, &mut buf).unwrap();
        assert_eq!(read_signal(&buf[..]).unwrap(), x);
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(DMatrix::from_row_slice(2, 2, &[1., 0., 0., 0.])).is_err());
        assert!(Graph::new(DMatrix::from_row_slice(2, 2, &[0., -1., 0., 0.])).is_err());
        assert!(Graph::new(DMatrix::zeros(2, 3)).is_err());
    }
}
