//! Partial observation: node masks, restriction operators, and the
//! surrogate solutions that transport optima between the full and
//! partial problems.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::sample_subset;
use crate::laplacian::{validate_in_laplacian_set, LaplacianMatrix};

/// Ordered subset of observed nodes; row l of the selection operator
/// picks node `observed[l]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    total_nodes: usize,
    observed: Vec<usize>,
}

impl ObservationMask {
    pub fn new(total_nodes: usize, observed: Vec<usize>) -> Result<Self> {
        if observed.is_empty() || observed.len() > total_nodes {
            return Err(Error::InvalidParameter(format!(
                "mask needs 1 <= n <= N, got n={}, N={total_nodes}",
                observed.len()
            )));
        }
        let mut seen = vec![false; total_nodes];
        for &v in &observed {
            if v >= total_nodes {
                return Err(Error::InvalidParameter(format!(
                    "observed node {v} out of range [0, {total_nodes})"
                )));
            }
            if seen[v] {
                return Err(Error::InvalidParameter(format!("duplicate node {v}")));
            }
            seen[v] = true;
        }
        Ok(ObservationMask {
            total_nodes,
            observed,
        })
    }

    pub fn total_nodes(&self) -> usize {
        self.total_nodes
    }

    pub fn n_observed(&self) -> usize {
        self.observed.len()
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn is_full(&self) -> bool {
        self.observed.len() == self.total_nodes
    }
}

/// Uniform n-subset of the N nodes, order randomized.
pub fn sample_observation<R: Rng>(total: usize, n: usize, rng: &mut R) -> Result<ObservationMask> {
    if n == 0 || n > total {
        return Err(Error::InvalidParameter(format!(
            "sample_observation needs 1 <= n <= N, got n={n}, N={total}"
        )));
    }
    ObservationMask::new(total, sample_subset(total, n, rng))
}

/// Column-subsample the M x N signal matrix to mask order.
pub fn restrict_signals(mask: &ObservationMask, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if y.ncols() != mask.total_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "signals have {} columns, mask covers {} nodes",
            y.ncols(),
            mask.total_nodes()
        )));
    }
    let mut out = DMatrix::zeros(y.nrows(), mask.n_observed());
    for (col, &node) in mask.observed().iter().enumerate() {
        out.set_column(col, &y.column(node));
    }
    Ok(out)
}

/// Principal submatrix E_o L E_o' in mask order.
pub fn restrict_laplacian(mask: &ObservationMask, l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if l.nrows() != mask.total_nodes() || l.ncols() != mask.total_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "Laplacian is {}x{}, mask covers {} nodes",
            l.nrows(),
            l.ncols(),
            mask.total_nodes()
        )));
    }
    let n = mask.n_observed();
    let mut out = DMatrix::zeros(n, n);
    for (ri, &i) in mask.observed().iter().enumerate() {
        for (rj, &j) in mask.observed().iter().enumerate() {
            out[(ri, rj)] = l[(i, j)];
        }
    }
    Ok(out)
}

/// Observed-observed block and hidden-coupling summaries of a Laplacian.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub l_oo: DMatrix<f64>,
    /// Row sums of the observed-hidden block (signed, nonpositive entries).
    pub l_oh_rowsums: DVector<f64>,
    pub trace_oo: f64,
    /// 1' L_oh 1, total coupling to hidden nodes (nonpositive).
    pub coupling: f64,
}

impl BlockDecomposition {
    /// Measured A2 constant: worst per-node coupling to hidden nodes.
    pub fn epsilon_measured(&self) -> f64 {
        self.l_oh_rowsums.iter().map(|&v| -v).fold(0.0, f64::max)
    }

    /// Measured A3 constant: (Tr(L_oo) + 1'L_oh 1) / n.
    pub fn c_measured(&self) -> f64 {
        (self.trace_oo + self.coupling) / self.l_oo.nrows() as f64
    }
}

/// Extract L_oo and derive L_oh row sums from the zero-row-sum property.
pub fn block_decompose(mask: &ObservationMask, l: &LaplacianMatrix) -> Result<BlockDecomposition> {
    let l_oo = restrict_laplacian(mask, l.matrix())?;
    let ones = DVector::from_element(mask.n_observed(), 1.0);
    // L 1 = 0 gives L_oh 1 = -(L_oo 1) on the observed rows.
    let l_oh_rowsums = -(&l_oo * &ones);
    let trace_oo = l_oo.trace();
    let coupling = l_oh_rowsums.sum();
    Ok(BlockDecomposition {
        l_oo,
        l_oh_rowsums,
        trace_oo,
        coupling,
    })
}

/// Lift a partial optimum into the full feasible set: (N/n) E_o' L_p E_o.
pub fn lift_surrogate_full(mask: &ObservationMask, l_p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = mask.n_observed();
    let total = mask.total_nodes();
    let report = validate_in_laplacian_set(l_p, n, 1e-8)?;
    if !report.pass() {
        return Err(Error::NotInLaplacianSet(format!(
            "lift input: trace {:.3e}, rows {:.3e}, offdiag {:.3e}, sym {:.3e}",
            report.trace_violation,
            report.row_sum_violation,
            report.off_diagonal_violation,
            report.symmetry_violation
        )));
    }
    let scale = total as f64 / n as f64;
    let mut out = DMatrix::zeros(total, total);
    for (ri, &i) in mask.observed().iter().enumerate() {
        for (rj, &j) in mask.observed().iter().enumerate() {
            out[(i, j)] = scale * l_p[(ri, rj)];
        }
    }
    Ok(out)
}

/// Project a full optimum into the partial feasible set:
/// n / (Tr(L_oo) + 1'L_oh 1) * (E_o L E_o' + Diag(L_oh 1)).
pub fn project_surrogate_partial(
    mask: &ObservationMask,
    l_star: &LaplacianMatrix,
) -> Result<DMatrix<f64>> {
    let blocks = block_decompose(mask, l_star)?;
    let denom = blocks.trace_oo + blocks.coupling;
    if denom <= 0.0 {
        return Err(Error::DegenerateDenominator(denom));
    }
    let n = mask.n_observed();
    let scale = n as f64 / denom;
    let mut out = blocks.l_oo.clone();
    for i in 0..n {
        out[(i, i)] += blocks.l_oh_rowsums[i];
    }
    out *= scale;
    Ok(out)
}
