//! GL-SigRep solver: minimize sum_m y_m' L y_m + (lambda/2) ||L||_F^2 over
//! the trace-normalized Laplacian set, reparameterized by nonnegative edge
//! weights on a scaled simplex and solved by projected gradient descent.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::laplacian::LaplacianMatrix;

/// Number of unordered pairs for n nodes.
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Unordered pairs (i < j) in lexicographic order.
pub fn pair_list(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Edge weights over the lexicographic pair ordering. Feasible vectors are
/// nonnegative and sum to n/2 (equivalent to trace(L) = n).
#[derive(Debug, Clone)]
pub struct EdgeWeights {
    pub n_nodes: usize,
    pub weights: DVector<f64>,
}

impl EdgeWeights {
    pub fn new(n_nodes: usize, weights: DVector<f64>) -> Result<Self> {
        if weights.len() != pair_count(n_nodes) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} weights for {n_nodes} nodes, got {}",
                pair_count(n_nodes),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidParameter("negative edge weight".into()));
        }
        Ok(EdgeWeights { n_nodes, weights })
    }

    pub fn is_feasible(&self) -> bool {
        let radius = self.n_nodes as f64 / 2.0;
        (self.weights.sum() - radius).abs() <= 1e-9 * radius
    }

    /// The Laplacian L(w): off-diagonal -w_ij, diagonal the node degree.
    pub fn to_laplacian(&self) -> LaplacianMatrix {
        laplacian_from_weights(self.n_nodes, &self.weights)
    }
}

pub fn laplacian_from_weights(n: usize, w: &DVector<f64>) -> LaplacianMatrix {
    let mut l = DMatrix::zeros(n, n);
    let mut p = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            l[(i, j)] = -w[p];
            l[(j, i)] = -w[p];
            l[(i, i)] += w[p];
            l[(j, j)] += w[p];
            p += 1;
        }
    }
    LaplacianMatrix::new(l).expect("L(w) is feasible by construction")
}

/// z_{(i,j)} = sum_m (Y[m][i] - Y[m][j])^2, so that
/// sum_m y_m' L(w) y_m = z' w.
pub fn pairwise_energy_vector(y: &DMatrix<f64>) -> DVector<f64> {
    let n = y.ncols();
    let m = y.nrows();
    let mut z = DVector::zeros(pair_count(n));
    let mut p = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for row in 0..m {
                let d = y[(row, i)] - y[(row, j)];
                acc += d * d;
            }
            z[p] = acc;
            p += 1;
        }
    }
    z
}

/// Euclidean projection onto {w >= 0, 1'w = radius} (sort-based).
pub fn simplex_projection(v: &DVector<f64>, radius: f64) -> DVector<f64> {
    assert!(radius > 0.0, "simplex radius must be positive");
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cum += uk;
        let candidate = (cum - radius) / (k + 1) as f64;
        if uk - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

/// Solver parameters. The step size is 1/Lipschitz with the Lipschitz
/// constant estimated by power iteration on the quadratic term.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub lambda: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 2.0,
            max_iters: 20_000,
            rel_tol: 1e-9,
        }
    }
}

/// Result of a GL-SigRep solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub laplacian: LaplacianMatrix,
    pub weights: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

struct WeightProblem {
    pairs: Vec<(usize, usize)>,
    n: usize,
    z: DVector<f64>,
    lambda: f64,
}

impl WeightProblem {
    fn degrees(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut d = DVector::zeros(self.n);
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            d[i] += w[p];
            d[j] += w[p];
        }
        d
    }

    /// Q w where w'Qw = sum_i d_i(w)^2 + 2 sum_p w_p^2 (the Frobenius term).
    fn quadratic_apply(&self, w: &DVector<f64>) -> DVector<f64> {
        let d = self.degrees(w);
        DVector::from_iterator(
            w.len(),
            self.pairs
                .iter()
                .enumerate()
                .map(|(p, &(i, j))| d[i] + d[j] + 2.0 * w[p]),
        )
    }

    fn objective(&self, w: &DVector<f64>) -> f64 {
        let d = self.degrees(w);
        self.z.dot(w) + 0.5 * self.lambda * (d.norm_squared() + 2.0 * w.norm_squared())
    }

    fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        if self.lambda == 0.0 {
            return self.z.clone();
        }
        self.z.clone() + self.lambda * self.quadratic_apply(w)
    }

    /// Largest eigenvalue of Q by 20 power-iteration steps.
    fn quadratic_norm(&self) -> f64 {
        let p = self.pairs.len();
        let mut v = DVector::from_element(p, 1.0 / (p as f64).sqrt());
        let mut estimate = 0.0;
        for _ in 0..20 {
            let qv = self.quadratic_apply(&v);
            estimate = qv.norm();
            if estimate == 0.0 {
                return 0.0;
            }
            v = qv / estimate;
        }
        estimate
    }
}

/// Solve Full/Partial GL-SigRep on an M x n signal matrix. The same routine
/// serves full and restricted signals; the problems differ only in data.
pub fn solve_gl_sigrep(y: &DMatrix<f64>, cfg: &SolverConfig) -> Result<SolveResult> {
    let n = y.ncols();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "GL-SigRep needs n >= 2 nodes, got {n}"
        )));
    }
    if y.nrows() == 0 {
        return Err(Error::InvalidParameter("need at least one signal".into()));
    }
    if cfg.lambda < 0.0 {
        return Err(Error::InvalidParameter(format!("lambda = {}", cfg.lambda)));
    }
    let problem = WeightProblem {
        pairs: pair_list(n),
        n,
        z: pairwise_energy_vector(y),
        lambda: cfg.lambda,
    };
    let radius = n as f64 / 2.0;
    let p = problem.pairs.len();

    if cfg.lambda == 0.0 {
        // The unregularized objective is linear in w, so the optimum is
        // the simplex vertex with the smallest pairwise energy (lowest
        // pair index on ties).
        let best = problem
            .z
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let mut w = DVector::zeros(p);
        w[best] = radius;
        let obj = problem.objective(&w);
        return Ok(SolveResult {
            laplacian: laplacian_from_weights(n, &w),
            weights: w,
            objective: obj,
            iterations: 0,
            converged: true,
            kkt_residual: 0.0,
        });
    }

    let step = 1.0 / (cfg.lambda * problem.quadratic_norm());

    let mut w = DVector::from_element(p, radius / p as f64);
    let mut obj = problem.objective(&w);
    let mut iterations = 0;
    let mut converged = false;
    let mut kkt_residual = f64::INFINITY;

    while iterations < cfg.max_iters {
        iterations += 1;
        let g = problem.gradient(&w);
        let w_new = simplex_projection(&(&w - step * &g), radius);
        let obj_new = problem.objective(&w_new);
        let small_decrease = obj - obj_new <= cfg.rel_tol * (1.0 + obj_new.abs());
        w = w_new;
        obj = obj_new;
        if small_decrease {
            let g = problem.gradient(&w);
            let pg = (&w - simplex_projection(&(&w - step * &g), radius)).norm() / step;
            kkt_residual = pg;
            if pg <= 1e-6 * (1.0 + g.norm()) {
                converged = true;
                break;
            }
        }
    }
    if kkt_residual.is_infinite() {
        let g = problem.gradient(&w);
        kkt_residual = (&w - simplex_projection(&(&w - step * &g), radius)).norm() / step;
    }

    Ok(SolveResult {
        laplacian: laplacian_from_weights(n, &w),
        weights: w,
        objective: obj,
        iterations,
        converged,
        kkt_residual,
    })
}

/// J(L) = sum_m y_m' L y_m + (lambda/2) ||L||_F^2 on a raw matrix.
pub fn objective(l: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    if y.ncols() != l.nrows() || l.nrows() != l.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "objective: L is {}x{}, signals have {} columns",
            l.nrows(),
            l.ncols(),
            y.ncols()
        )));
    }
    let smooth = (y * l).component_mul(y).sum();
    Ok(smooth + 0.5 * lambda * l.norm_squared())
}

/// A binarized graph with a flag for the all-zero degenerate case.
#[derive(Debug, Clone)]
pub struct ThresholdedGraph {
    pub graph: crate::graph::Graph,
    pub degenerate: bool,
}

/// Keep edge (i,j) iff -L[i][j] > tau * max_kl(-L[k][l]).
pub fn threshold_edges(l: &DMatrix<f64>, tau: f64) -> Result<ThresholdedGraph> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!("tau = {tau}")));
    }
    let n = l.nrows();
    let mut max_weight: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            max_weight = max_weight.max(-l[(i, j)]);
        }
    }
    if max_weight <= 0.0 {
        return Ok(ThresholdedGraph {
            graph: crate::graph::Graph::empty(n),
            degenerate: true,
        });
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if -l[(i, j)] > tau * max_weight {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    Ok(ThresholdedGraph {
        graph: crate::graph::Graph::from_adjacency(a)?,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacian::validate_in_laplacian_set;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn pairwise_energy_basics() {
        let constant = DMatrix::from_element(1, 4, 3.0);
        assert!(pairwise_energy_vector(&constant).iter().all(|&z| z == 0.0));
        let y = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        assert_eq!(pairwise_energy_vector(&y).as_slice(), &[1.0]);
    }

    #[test]
    fn pairwise_energy_matches_quadratic_form() {
        let mut r = rng(1);
        let y = DMatrix::from_fn(20, 8, |_, _| StandardNormal.sample(&mut r));
        let z = pairwise_energy_vector(&y);
        for _ in 0..10 {
            let raw = DVector::from_fn(pair_count(8), |_, _| r.random::<f64>());
            let w = simplex_projection(&raw, 4.0);
            let l = laplacian_from_weights(8, &w);
            let mut direct = 0.0;
            for m in 0..20 {
                direct += l.quadratic_form(&y.row(m).transpose()).unwrap();
            }
            assert!((direct - z.dot(&w)).abs() <= 1e-9 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn projection_examples() {
        let v = DVector::from_vec(vec![2.0, 0.0]);
        let p = simplex_projection(&v, 1.0);
        assert!((p[0] - 1.0).abs() <= 1e-12 && p[1].abs() <= 1e-12);

        // Feasible input is unchanged.
        let feasible = DVector::from_vec(vec![0.25, 0.5, 0.25]);
        let q = simplex_projection(&feasible, 1.0);
        assert!((&q - &feasible).abs().max() <= 1e-12);

        // Idempotence.
        let mut r = rng(2);
        let raw = DVector::from_fn(10, |_, _| r.random::<f64>() * 4.0 - 2.0);
        let once = simplex_projection(&raw, 3.0);
        let twice = simplex_projection(&once, 3.0);
        assert!((&once - &twice).abs().max() <= 1e-12);
        assert!((once.sum() - 3.0).abs() <= 1e-12);
        assert!(once.iter().all(|&x| x >= 0.0));
    }

    /// Projection oracle: enumerate support patterns, solve the equality-
    /// constrained projection on each support, keep the KKT-consistent one.
    fn projection_oracle(v: &DVector<f64>, radius: f64) -> DVector<f64> {
        let d = v.len();
        assert!(d <= 12);
        let mut best: Option<(f64, DVector<f64>)> = None;
        for pattern in 1u32..(1 << d) {
            let support: Vec<usize> = (0..d).filter(|&i| pattern & (1 << i) != 0).collect();
            let s = support.len() as f64;
            let theta = (support.iter().map(|&i| v[i]).sum::<f64>() - radius) / s;
            let mut w = DVector::zeros(d);
            let mut ok = true;
            for &i in &support {
                w[i] = v[i] - theta;
                if w[i] < -1e-12 {
                    ok = false;
                }
            }
            // KKT: excluded coordinates need v_i - theta <= 0.
            for i in 0..d {
                if !support.contains(&i) && v[i] - theta > 1e-12 {
                    ok = false;
                }
            }
            if ok {
                let dist = (&w - v).norm_squared();
                if best.as_ref().map(|(b, _)| dist < *b).unwrap_or(true) {
                    best = Some((dist, w));
                }
            }
        }
        best.expect("some support pattern must satisfy KKT").1
    }

    #[test]
    fn projection_matches_enumeration_oracle() {
        let mut r = rng(3);
        for _ in 0..50 {
            let v = DVector::from_fn(10, |_, _| r.random::<f64>() * 6.0 - 3.0);
            let fast = simplex_projection(&v, 2.0);
            let oracle = projection_oracle(&v, 2.0);
            assert!((&fast - &oracle).abs().max() <= 1e-10);
        }
    }

    #[test]
    fn two_node_problem_is_forced() {
        let y = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, -2.0, 0.5, 3.0, 3.0]);
        let result = solve_gl_sigrep(&y, &SolverConfig::default()).unwrap();
        assert!((result.weights[0] - 1.0).abs() <= 1e-12);
        let expected = nalgebra::dmatrix![1.0, -1.0; -1.0, 1.0];
        assert!((result.laplacian.matrix() - expected).abs().max() <= 1e-12);
    }

    #[test]
    fn constant_signals_give_uniform_complete_graph() {
        // z = 0, so the solve minimizes ||L(w)||_F^2 over the simplex: the
        // strictly convex symmetric objective has the uniform minimizer
        // w_ij = (n/2)/P = 1/(n-1).
        let y = DMatrix::from_element(5, 4, 2.5);
        let cfg = SolverConfig {
            lambda: 2.0,
            ..Default::default()
        };
        let result = solve_gl_sigrep(&y, &cfg).unwrap();
        let expected = 1.0 / 3.0;
        for &w in result.weights.iter() {
            assert!((w - expected).abs() <= 1e-7, "weight {w}");
        }
        let uniform = DVector::from_element(pair_count(4), expected);
        let l = laplacian_from_weights(4, &uniform);
        let expected_obj = 0.5 * 2.0 * l.matrix().norm_squared();
        assert!((result.objective - expected_obj).abs() <= 1e-7);
    }

    #[test]
    fn solver_result_is_feasible_and_converged() {
        let mut r = rng(4);
        let y = DMatrix::from_fn(10, 6, |_, _| StandardNormal.sample(&mut r));
        let result = solve_gl_sigrep(&y, &SolverConfig::default()).unwrap();
        assert!(result.converged);
        let report = validate_in_laplacian_set(result.laplacian.matrix(), 6, 1e-8).unwrap();
        assert!(report.pass());
    }

    #[test]
    fn optimum_beats_random_feasible_points() {
        let mut r = rng(5);
        let y = DMatrix::from_fn(8, 5, |_, _| StandardNormal.sample(&mut r));
        let cfg = SolverConfig::default();
        let result = solve_gl_sigrep(&y, &cfg).unwrap();
        let radius = 2.5;
        for _ in 0..100 {
            let raw = DVector::from_fn(pair_count(5), |_, _| r.random::<f64>() * 2.0 - 1.0);
            let w = simplex_projection(&raw, radius);
            let l = laplacian_from_weights(5, &w);
            let j = objective(l.matrix(), &y, cfg.lambda).unwrap();
            assert!(result.objective <= j + 1e-6 * (1.0 + j.abs()));
        }
    }

    #[test]
    fn two_starts_agree_for_positive_lambda() {
        // Strong convexity: re-solving on permuted data and undoing the
        // permutation recovers the same Laplacian.
        let mut r = rng(6);
        let y = DMatrix::from_fn(12, 5, |_, _| StandardNormal.sample(&mut r));
        let result = solve_gl_sigrep(&y, &SolverConfig::default()).unwrap();

        let perm = [3usize, 0, 4, 1, 2];
        let mut y_perm = DMatrix::zeros(12, 5);
        for (new_col, &old_col) in perm.iter().enumerate() {
            y_perm.set_column(new_col, &y.column(old_col));
        }
        let result_perm = solve_gl_sigrep(&y_perm, &SolverConfig::default()).unwrap();
        let lp = result_perm.laplacian.matrix();
        let mut unpermuted = DMatrix::zeros(5, 5);
        for a in 0..5 {
            for b in 0..5 {
                unpermuted[(perm[a], perm[b])] = lp[(a, b)];
            }
        }
        assert!((result.laplacian.matrix() - unpermuted).abs().max() <= 1e-6);
    }

    #[test]
    fn objective_examples() {
        let y = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 0.0, 1.0, -1.0]);
        let zero = DMatrix::zeros(3, 3);
        assert_eq!(objective(&zero, &y, 5.0).unwrap(), 0.0);

        let constant = DMatrix::from_element(4, 3, 1.5);
        let w = DVector::from_vec(vec![0.5, 0.4, 0.6]);
        let l = laplacian_from_weights(3, &w);
        assert!(objective(l.matrix(), &constant, 0.0).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn objective_matches_weight_form() {
        let mut r = rng(7);
        let y = DMatrix::from_fn(6, 5, |_, _| StandardNormal.sample(&mut r));
        let z = pairwise_energy_vector(&y);
        for _ in 0..5 {
            let raw = DVector::from_fn(pair_count(5), |_, _| r.random::<f64>());
            let w = simplex_projection(&raw, 2.5);
            let l = laplacian_from_weights(5, &w);
            let lambda = 2.0;
            let direct = objective(l.matrix(), &y, lambda).unwrap();
            let d = {
                let mut d = DVector::<f64>::zeros(5);
                for (p, &(i, j)) in pair_list(5).iter().enumerate() {
                    d[i] += w[p];
                    d[j] += w[p];
                }
                d
            };
            let weight_form =
                z.dot(&w) + 0.5 * lambda * (d.norm_squared() + 2.0 * w.norm_squared());
            assert!((direct - weight_form).abs() <= 1e-9 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn monotone_descent() {
        let mut r = rng(8);
        let y = DMatrix::from_fn(10, 6, |_, _| StandardNormal.sample(&mut r));
        let problem = WeightProblem {
            pairs: pair_list(6),
            n: 6,
            z: pairwise_energy_vector(&y),
            lambda: 2.0,
        };
        let radius = 3.0;
        let step = 1.0 / (2.0 * problem.quadratic_norm());
        let mut w = DVector::from_element(pair_count(6), radius / pair_count(6) as f64);
        let mut obj = problem.objective(&w);
        for _ in 0..200 {
            let g = problem.gradient(&w);
            w = simplex_projection(&(&w - step * &g), radius);
            let next = problem.objective(&w);
            assert!(next <= obj + 1e-12 * (1.0 + obj.abs()));
            obj = next;
        }
    }

    #[test]
    fn threshold_examples() {
        // K_3 in the trace-3 set: all weights equal, any tau keeps the triangle.
        let w = DVector::from_element(3, 0.5);
        let l = laplacian_from_weights(3, &w);
        let t = threshold_edges(l.matrix(), 0.9).unwrap();
        assert_eq!(t.graph.n_edges(), 3);
        assert!(!t.degenerate);

        // weights (1.0, 0.05, 0): only the strong edge survives tau=0.1.
        let w = DVector::from_vec(vec![1.0, 0.05, 0.0]);
        let l = laplacian_from_weights(3, &w);
        let t = threshold_edges(l.matrix(), 0.1).unwrap();
        assert_eq!(t.graph.edges(), vec![(0, 1, 1.0)]);

        // tau = 0 keeps the support.
        let t0 = threshold_edges(l.matrix(), 0.0).unwrap();
        assert_eq!(t0.graph.n_edges(), 2);

        // All-zero off-diagonal: degenerate empty graph.
        let zero = DMatrix::zeros(4, 4);
        let tz = threshold_edges(&zero, 0.1).unwrap();
        assert!(tz.degenerate);
        assert_eq!(tz.graph.n_edges(), 0);
    }
}
