//! Laplacian algebra: construction, spectral decomposition, and the
//! normalized Laplacian constraint set.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A validated combinatorial Laplacian: symmetric, zero row sums,
/// nonpositive off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    matrix: DMatrix<f64>,
}

impl LaplacianMatrix {
    /// Validate and wrap a candidate Laplacian.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "Laplacian must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let row_sum_tol = 1e-9 * n as f64;
        for i in 0..n {
            let row_sum: f64 = matrix.row(i).sum();
            if row_sum.abs() > row_sum_tol {
                return Err(Error::NotInLaplacianSet(format!(
                    "row {i} sums to {row_sum:.3e}"
                )));
            }
            for j in 0..n {
                if i != j && matrix[(i, j)] > 1e-12 {
                    return Err(Error::NotInLaplacianSet(format!(
                        "positive off-diagonal {:.3e} at ({i},{j})",
                        matrix[(i, j)]
                    )));
                }
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 {
                    return Err(Error::NotInLaplacianSet(format!(
                        "asymmetry at ({i},{j})"
                    )));
                }
            }
        }
        Ok(LaplacianMatrix { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Dirichlet energy y' L y.
    pub fn quadratic_form(&self, y: &DVector<f64>) -> Result<f64> {
        quadratic_form(&self.matrix, y)
    }
}

/// y' L y over a raw matrix.
pub fn quadratic_form(l: &DMatrix<f64>, y: &DVector<f64>) -> Result<f64> {
    if y.len() != l.nrows() || l.nrows() != l.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "quadratic form: L is {}x{}, y has {}",
            l.nrows(),
            l.ncols(),
            y.len()
        )));
    }
    Ok((y.transpose() * l * y)[(0, 0)])
}

/// L = D - A with D = Diag(A 1).
pub fn build_laplacian(g: &Graph) -> LaplacianMatrix {
    let a = g.adjacency();
    let n = g.n_nodes();
    let mut l = -a.clone();
    for i in 0..n {
        l[(i, i)] = a.row(i).sum();
    }
    LaplacianMatrix { matrix: l }
}

/// Eigendecomposition with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Leading K eigenvector columns (the bandlimited frame V_K).
    pub fn leading(&self, k: usize) -> DMatrix<f64> {
        self.eigenvectors.columns(0, k).into_owned()
    }

    /// Largest eigenvalue (spectral norm for a PSD Laplacian).
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Smallest eigenvalue above the zero threshold 1e-10.
    pub fn sigma_min_plus(&self) -> Result<f64> {
        self.eigenvalues
            .iter()
            .copied()
            .find(|&l| l > 1e-10)
            .ok_or_else(|| Error::EigenFailure("no nonzero eigenvalue".to_string()))
    }
}

/// Symmetric eigendecomposition, sorted ascending.
pub fn eigendecompose(l: &LaplacianMatrix) -> Result<Spectrum> {
    eigendecompose_raw(l.matrix())
}

pub fn eigendecompose_raw(m: &DMatrix<f64>) -> Result<Spectrum> {
    let sym = nalgebra::SymmetricEigen::try_new(m.clone(), 1e-13, 10_000)
        .ok_or_else(|| Error::EigenFailure("symmetric eigensolver did not converge".into()))?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sym.eigenvalues[a].partial_cmp(&sym.eigenvalues[b]).unwrap());
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| sym.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        eigenvectors.set_column(col, &sym.eigenvectors.column(i));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Per-constraint membership report for the trace-normalized Laplacian set.
#[derive(Debug, Clone)]
pub struct LaplacianSetReport {
    pub trace_violation: f64,
    pub row_sum_violation: f64,
    pub off_diagonal_violation: f64,
    pub symmetry_violation: f64,
    pub tol: f64,
}

impl LaplacianSetReport {
    pub fn trace_ok(&self) -> bool {
        self.trace_violation <= self.tol
    }
    pub fn row_sums_ok(&self) -> bool {
        self.row_sum_violation <= self.tol
    }
    pub fn off_diagonal_ok(&self) -> bool {
        self.off_diagonal_violation <= self.tol
    }
    pub fn symmetric_ok(&self) -> bool {
        self.symmetry_violation <= self.tol
    }
    pub fn pass(&self) -> bool {
        self.trace_ok() && self.row_sums_ok() && self.off_diagonal_ok() && self.symmetric_ok()
    }
}

/// Measure the four constraints of the trace-`size` Laplacian set.
pub fn validate_in_laplacian_set(
    l: &DMatrix<f64>,
    size: usize,
    tol: f64,
) -> Result<LaplacianSetReport> {
    if l.nrows() != size || l.ncols() != size {
        return Err(Error::DimensionMismatch(format!(
            "expected {size}x{size}, got {}x{}",
            l.nrows(),
            l.ncols()
        )));
    }
    let trace_violation = (l.trace() - size as f64).abs();
    let mut row_sum_violation: f64 = 0.0;
    let mut off_diagonal_violation: f64 = 0.0;
    let mut symmetry_violation: f64 = 0.0;
    for i in 0..size {
        row_sum_violation = row_sum_violation.max(l.row(i).sum().abs());
        for j in 0..size {
            if i != j {
                off_diagonal_violation = off_diagonal_violation.max(l[(i, j)].max(0.0));
            }
            symmetry_violation = symmetry_violation.max((l[(i, j)] - l[(j, i)]).abs());
        }
    }
    Ok(LaplacianSetReport {
        trace_violation,
        row_sum_violation,
        off_diagonal_violation,
        symmetry_violation,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_er;
    use nalgebra::dmatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_node_graph() -> Graph {
        Graph::from_adjacency(dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap()
    }

    #[test]
    fn laplacian_of_single_edge() {
        let l = build_laplacian(&two_node_graph());
        assert_eq!(l.matrix(), &dmatrix![1.0, -1.0; -1.0, 1.0]);
    }

    #[test]
    fn laplacian_of_empty_graph_is_zero() {
        let l = build_laplacian(&Graph::empty(3));
        assert_eq!(l.matrix(), &DMatrix::zeros(3, 3));
    }

    #[test]
    fn laplacian_of_triangle() {
        let a = dmatrix![0.0, 1.0, 1.0; 1.0, 0.0, 1.0; 1.0, 1.0, 0.0];
        let l = build_laplacian(&Graph::from_adjacency(a).unwrap());
        for i in 0..3 {
            assert_eq!(l.matrix()[(i, i)], 2.0);
        }
    }

    #[test]
    fn trace_is_twice_total_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = generate_er(20, 0.3, &mut rng).unwrap();
        let l = build_laplacian(&g);
        let rel = (l.trace() - 2.0 * g.total_edge_weight()).abs() / l.trace();
        assert!(rel <= 1e-9);
    }

    #[test]
    fn eigendecompose_zero_matrix() {
        let l = build_laplacian(&Graph::empty(2));
        let s = eigendecompose(&l).unwrap();
        assert!(s.eigenvalues().iter().all(|&v| v.abs() <= 1e-12));
    }

    #[test]
    fn eigendecompose_single_edge() {
        let l = build_laplacian(&two_node_graph());
        let s = eigendecompose(&l).unwrap();
        assert!((s.eigenvalues()[0]).abs() <= 1e-12);
        assert!((s.eigenvalues()[1] - 2.0).abs() <= 1e-12);
        let v1 = s.eigenvectors().column(1);
        let target = 1.0 / 2.0_f64.sqrt();
        assert!((v1[0].abs() - target).abs() <= 1e-10);
        assert!((v1[0] + v1[1]).abs() <= 1e-10);
    }

    #[test]
    fn complete_graph_spectrum() {
        // K_4: eigenvalues 0, 4, 4, 4.
        let mut a = DMatrix::from_element(4, 4, 1.0);
        a.fill_diagonal(0.0);
        let l = build_laplacian(&Graph::from_adjacency(a).unwrap());
        let s = eigendecompose(&l).unwrap();
        assert!(s.eigenvalues()[0].abs() <= 1e-10);
        for i in 1..4 {
            assert!((s.eigenvalues()[i] - 4.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn eigendecompose_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = generate_er(25, 0.25, &mut rng).unwrap();
        let l = build_laplacian(&g);
        let s = eigendecompose(&l).unwrap();
        let v = s.eigenvectors();
        let recon = v * DMatrix::from_diagonal(s.eigenvalues()) * v.transpose();
        let err = (recon - l.matrix()).abs().max();
        let scale = l.matrix().abs().max();
        assert!(err <= 1e-7 * scale, "reconstruction error {err}");
        // Orthonormality.
        let gram = v.transpose() * v;
        let id_err = (gram - DMatrix::identity(25, 25)).abs().max();
        assert!(id_err <= 1e-8);
        // Flat eigenvector for the connected graph.
        let flat = 1.0 / 25.0_f64.sqrt();
        let v0 = s.eigenvectors().column(0);
        let sign = if v0[0] >= 0.0 { 1.0 } else { -1.0 };
        for x in v0.iter() {
            assert!((x - sign * flat).abs() <= 1e-8);
        }
    }

    #[test]
    fn membership_k3_rescaled() {
        let a = dmatrix![0.0, 1.0, 1.0; 1.0, 0.0, 1.0; 1.0, 1.0, 0.0];
        let l = build_laplacian(&Graph::from_adjacency(a).unwrap());
        let normalized = l.matrix() * (3.0 / l.trace());
        let report = validate_in_laplacian_set(&normalized, 3, 1e-8).unwrap();
        assert!(report.pass());
    }

    #[test]
    fn membership_flags_positive_off_diagonal() {
        let mut m = build_laplacian(&two_node_graph()).matrix().clone();
        m[(0, 1)] = 0.5;
        m[(1, 0)] = 0.5;
        m[(0, 0)] = 0.5; // keep trace 2-ish off; only checking the off-diag flag
        let report = validate_in_laplacian_set(&m, 2, 1e-8).unwrap();
        assert!(!report.off_diagonal_ok());
        assert!((report.off_diagonal_violation - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn membership_flags_asymmetry() {
        let mut m = build_laplacian(&two_node_graph()).matrix().clone();
        m[(0, 1)] += 1e-3;
        let report = validate_in_laplacian_set(&m, 2, 1e-6).unwrap();
        assert!(!report.symmetric_ok());
    }

    #[test]
    fn membership_rejects_dimension_mismatch() {
        let m = DMatrix::zeros(2, 2);
        assert!(validate_in_laplacian_set(&m, 3, 1e-8).is_err());
    }
}
