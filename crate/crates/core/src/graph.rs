//! Graph construction: random models, edge-list I/O, connectivity checks.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Resampling budget for the random models' connectivity requirement.
pub const CONNECTIVITY_RETRIES: usize = 100;

/// An undirected weighted simple graph stored as a dense adjacency matrix.
///
/// Invariants enforced at construction: symmetric, zero diagonal,
/// nonnegative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: DMatrix<f64>,
}

impl Graph {
    pub fn from_adjacency(adjacency: DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if n == 0 || adjacency.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "adjacency must be square and nonempty, got {}x{}",
                adjacency.nrows(),
                adjacency.ncols()
            )));
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "adjacency[{i}][{i}] = {} (self-loops not allowed)",
                    adjacency[(i, i)]
                )));
            }
            for j in 0..n {
                let w = adjacency[(i, j)];
                if w < 0.0 || !w.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency[{i}][{j}] = {w} (weights must be finite and >= 0)"
                    )));
                }
                if adjacency[(i, j)] != adjacency[(j, i)] {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Graph { adjacency })
    }

    /// Empty graph (no edges) on `n` nodes.
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: DMatrix::zeros(n, n),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// Undirected edges (i < j) with their weights.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_nodes();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.adjacency[(i, j)];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.edges().len()
    }

    pub fn total_edge_weight(&self) -> f64 {
        self.edges().iter().map(|&(_, _, w)| w).sum()
    }

    /// BFS connectivity check.
    pub fn is_connected(&self) -> bool {
        let n = self.n_nodes();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if !seen[v] && self.adjacency[(u, v)] != 0.0 {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }

    /// Induced subgraph on `nodes`, rows/columns in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Graph> {
        let n = self.n_nodes();
        for &v in nodes {
            if v >= n {
                return Err(Error::DimensionMismatch(format!(
                    "node index {v} out of range for graph with {n} nodes"
                )));
            }
        }
        let m = nodes.len();
        let mut a = DMatrix::zeros(m, m);
        for (ri, &i) in nodes.iter().enumerate() {
            for (rj, &j) in nodes.iter().enumerate() {
                if ri != rj {
                    a[(ri, rj)] = self.adjacency[(i, j)];
                }
            }
        }
        Graph::from_adjacency(a)
    }
}

fn retry_connected<F>(mut gen: F, context: &str) -> Result<Graph>
where
    F: FnMut() -> Result<Graph>,
{
    for _ in 0..CONNECTIVITY_RETRIES {
        let g = gen()?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::ConnectivityRetriesExhausted {
        retries: CONNECTIVITY_RETRIES,
        context: context.to_string(),
    })
}

/// Erdos-Renyi G(n, p), resampled until connected.
pub fn generate_er<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("ER needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability p = {p}")));
    }
    retry_connected(
        || {
            let mut a = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random::<f64>() < p {
                        a[(i, j)] = 1.0;
                        a[(j, i)] = 1.0;
                    }
                }
            }
            Graph::from_adjacency(a)
        },
        &format!("ER(n={n}, p={p})"),
    )
}

/// Points sampled i.i.d. uniform on the unit square.
pub fn sample_unit_square<R: Rng>(n: usize, rng: &mut R) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect()
}

/// Symmetrized k-nearest-neighbor graph over 2-D points.
/// Distance ties break toward the lower node index.
pub fn knn_graph_from_points(points: &[(f64, f64)], k: usize) -> Result<Graph> {
    let n = points.len();
    if n < 2 || k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "kNN needs 1 <= k < n, got n={n}, k={k}"
        )));
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&p, &q| {
            let dp = dist2(points[i], points[p]);
            let dq = dist2(points[i], points[q]);
            dp.partial_cmp(&dq).unwrap().then(p.cmp(&q))
        });
        for &j in order.iter().take(k) {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
    }
    Graph::from_adjacency(a)
}

fn dist2(p: (f64, f64), q: (f64, f64)) -> f64 {
    let dx = p.0 - q.0;
    let dy = p.1 - q.1;
    dx * dx + dy * dy
}

/// kNN graph over uniform points on the unit square, resampled until connected.
pub fn generate_knn<R: Rng>(n: usize, k: usize, rng: &mut R) -> Result<Graph> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "kNN needs 1 <= k < n, got n={n}, k={k}"
        )));
    }
    retry_connected(
        || knn_graph_from_points(&sample_unit_square(n, rng), k),
        &format!("kNN(n={n}, k={k})"),
    )
}

/// Stochastic block model with per-block sizes, resampled until connected.
pub fn generate_sbm<R: Rng>(
    sizes: &[usize],
    p_in: f64,
    p_out: f64,
    rng: &mut R,
) -> Result<Graph> {
    let n: usize = sizes.iter().sum();
    if n < 2 || sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidParameter(format!(
            "SBM needs nonempty blocks summing to >= 2, got {sizes:?}"
        )));
    }
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("{name} = {p}")));
        }
    }
    let mut block = vec![0usize; n];
    let mut idx = 0;
    for (b, &s) in sizes.iter().enumerate() {
        for _ in 0..s {
            block[idx] = b;
            idx += 1;
        }
    }
    retry_connected(
        || {
            let mut a = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let p = if block[i] == block[j] { p_in } else { p_out };
                    if rng.random::<f64>() < p {
                        a[(i, j)] = 1.0;
                        a[(j, i)] = 1.0;
                    }
                }
            }
            Graph::from_adjacency(a)
        },
        &format!("SBM(sizes={sizes:?}, p_in={p_in}, p_out={p_out})"),
    )
}

/// Uniform n-subset of {0, .., N-1} in randomized order (partial shuffle).
pub fn sample_subset<R: Rng>(total: usize, n: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..total).collect();
    idx.shuffle(rng);
    idx.truncate(n);
    idx
}

/// Parse an edge-list CSV `i,j,weight` (0-based, optional header).
pub fn load_edge_list<P: AsRef<Path>>(path: P) -> Result<Graph> {
    let path_str = path.as_ref().display().to_string();
    let file = std::fs::File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_node = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        // Header detection: non-numeric first token on the first data line.
        if lineno == 1 && fields[0].parse::<usize>().is_err() {
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: path_str,
                line: lineno,
                message: format!("expected `i,j,weight`, got {} fields", fields.len()),
            });
        }
        let parse_err = |message: String| Error::Parse {
            path: path_str.clone(),
            line: lineno,
            message,
        };
        let i: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("bad node index `{}`", fields[0])))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(format!("bad node index `{}`", fields[1])))?;
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(format!("bad weight `{}`", fields[2])))?;
        if i == j {
            return Err(parse_err(format!("self-loop at node {i}")));
        }
        if w < 0.0 || !w.is_finite() {
            return Err(parse_err(format!("negative or non-finite weight {w}")));
        }
        max_node = max_node.max(i).max(j);
        entries.push((i, j, w));
    }
    if entries.is_empty() {
        return Err(Error::Parse {
            path: path_str,
            line: 0,
            message: "no edges in file".to_string(),
        });
    }
    let n = max_node + 1;
    let mut a = DMatrix::zeros(n, n);
    for (i, j, w) in entries {
        if a[(i, j)] != 0.0 {
            return Err(Error::Parse {
                path: path_str,
                line: 0,
                message: format!("duplicate edge ({i},{j})"),
            });
        }
        a[(i, j)] = w;
        a[(j, i)] = w;
    }
    Graph::from_adjacency(a)
}

/// Write the edge list as CSV with an `i,j,weight` header.
pub fn save_edge_list<P: AsRef<Path>>(g: &Graph, path: P) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "i,j,weight")?;
    for (i, j, w) in g.edges() {
        writeln!(file, "{i},{j},{w}")?;
    }
    Ok(())
}
