//! Experiment pipelines: F1 edge recovery, single trials, Monte Carlo
//! sweeps, and real-data drivers.

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{generate_er, generate_knn, generate_sbm, load_edge_list, Graph};
use crate::laplacian::{build_laplacian, eigendecompose, validate_in_laplacian_set, Spectrum};
use crate::observe::{
    lift_surrogate_full, project_surrogate_partial, restrict_laplacian, restrict_signals,
    sample_observation,
};
use crate::signal::{generate_signals, sharpness_ratio, GraphFilter};
use crate::solver::{objective, solve_gl_sigrep, threshold_edges, SolveResult, SolverConfig};
use crate::theory::{theorem_report, BoundReport};

/// splitmix64, used to derive independent RNG streams from one seed.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut x = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn stream(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, salt))
}

/// Random-model or file-backed graph specification.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Er { nodes: usize, p: f64 },
    Knn { nodes: usize, k: usize },
    Sbm { sizes: Vec<usize>, p_in: f64, p_out: f64 },
    File { path: PathBuf },
}

impl GraphSpec {
    pub fn generate(&self, rng: &mut ChaCha8Rng) -> Result<Graph> {
        match self {
            GraphSpec::Er { nodes, p } => generate_er(*nodes, *p, rng),
            GraphSpec::Knn { nodes, k } => generate_knn(*nodes, *k, rng),
            GraphSpec::Sbm { sizes, p_in, p_out } => generate_sbm(sizes, *p_in, *p_out, rng),
            GraphSpec::File { path } => load_edge_list(path),
        }
    }
}

/// All parameters of one experiment trial.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrialConfig {
    pub graph: GraphSpec,
    pub filter: GraphFilter,
    pub m_signals: usize,
    pub n_observed: usize,
    pub lambda: f64,
    pub tau: f64,
    pub seed: u64,
    /// Bandwidth K for the coherence/RIP measurements.
    pub bandwidth: usize,
    pub delta: f64,
}

/// Wall-clock seconds per pipeline stage.
#[derive(Debug, Clone, Default)]
pub struct StageTimings {
    pub generate: f64,
    pub solve_full: f64,
    pub solve_partial: f64,
    pub theory: f64,
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub f1_partial: f64,
    pub f1_full_restricted: f64,
    /// J_p(L_tilde_p) / J_p(L_p_star) at the trial's lambda.
    pub ratio: f64,
    pub degenerate: bool,
    pub bound_report: BoundReport,
    pub timings: StageTimings,
    pub solve_full_result: SolveResult,
    pub solve_partial_result: SolveResult,
}

/// F1 over unordered off-diagonal pairs of two binary graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Score {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
}

pub fn f1_score(estimated: &Graph, truth: &Graph) -> Result<F1Score> {
    let n = truth.n_nodes();
    if estimated.n_nodes() != n {
        return Err(Error::DimensionMismatch(format!(
            "estimated has {} nodes, truth has {n}",
            estimated.n_nodes()
        )));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let e = estimated.adjacency()[(i, j)] != 0.0;
            let t = truth.adjacency()[(i, j)] != 0.0;
            match (e, t) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    if tp + fp == 0 && tp + fn_ == 0 {
        // Both graphs empty.
        return Ok(F1Score {
            f1: 1.0,
            precision: 1.0,
            recall: 1.0,
        });
    }
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(F1Score {
        f1,
        precision,
        recall,
    })
}

fn assert_in_set(l: &DMatrix<f64>, size: usize, what: &str) -> Result<()> {
    let report = validate_in_laplacian_set(l, size, 1e-8)?;
    if !report.pass() {
        return Err(Error::InvariantViolation(format!(
            "{what} fails the Laplacian-set check (trace {:.3e}, rows {:.3e}, \
             offdiag {:.3e}, sym {:.3e})",
            report.trace_violation,
            report.row_sum_violation,
            report.off_diagonal_violation,
            report.symmetry_violation
        )));
    }
    Ok(())
}

/// Run the full pipeline for one trial: generate, solve full and partial,
/// build both surrogates, score, and verify the bound chain.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialResult> {
    let start = Instant::now();
    let truth = cfg.graph.generate(&mut stream(cfg.seed, 0xA1))?;
    let total = truth.n_nodes();
    if cfg.n_observed == 0 || cfg.n_observed > total {
        return Err(Error::InvalidParameter(format!(
            "n_observed = {} for a {total}-node graph",
            cfg.n_observed
        )));
    }
    let l_true = build_laplacian(&truth);
    let spec = eigendecompose(&l_true)?;
    let signals = generate_signals(&spec, &cfg.filter, cfg.m_signals, &mut stream(cfg.seed, 0xB2))?;
    let mask = sample_observation(
        total,
        cfg.n_observed,
        &mut stream(cfg.seed, 0xC3 ^ (cfg.n_observed as u64) << 8),
    )?;
    let t_generate = start.elapsed().as_secs_f64();

    let y = signals.signals();
    let y_o = restrict_signals(&mask, y)?;
    let solver_cfg = SolverConfig {
        lambda: cfg.lambda,
        ..Default::default()
    };

    let t0 = Instant::now();
    let full = solve_gl_sigrep(y, &solver_cfg)?;
    let t_full = t0.elapsed().as_secs_f64();
    let t0 = Instant::now();
    let partial = solve_gl_sigrep(&y_o, &solver_cfg)?;
    let t_partial = t0.elapsed().as_secs_f64();

    let n = cfg.n_observed;
    assert_in_set(full.laplacian.matrix(), total, "full solution")?;
    assert_in_set(partial.laplacian.matrix(), n, "partial solution")?;

    let t0 = Instant::now();
    let l_hat = lift_surrogate_full(&mask, partial.laplacian.matrix())?;
    let l_tilde_p = project_surrogate_partial(&mask, &full.laplacian)?;
    assert_in_set(&l_hat, total, "lifted surrogate")?;
    assert_in_set(&l_tilde_p, n, "projected surrogate")?;

    // F1 of both pipelines against the ground truth on the observed nodes.
    let truth_restricted = truth.induced_subgraph(mask.observed())?;
    let est_partial = threshold_edges(partial.laplacian.matrix(), cfg.tau)?;
    let f1_partial = f1_score(&est_partial.graph, &truth_restricted)?.f1;
    let full_restricted = restrict_laplacian(&mask, full.laplacian.matrix())?;
    let est_full = threshold_edges(&full_restricted, cfg.tau)?;
    let f1_full_restricted = f1_score(&est_full.graph, &truth_restricted)?.f1;

    // Objective ratio at the trial's lambda (matching the solves).
    let j_p_star = partial.objective;
    let j_p_tilde = objective(&l_tilde_p, &y_o, cfg.lambda)?;
    let degenerate = j_p_star.abs() <= 1e-12 && j_p_tilde.abs() <= 1e-12;
    let ratio = if degenerate { 1.0 } else { j_p_tilde / j_p_star };
    if ratio < 1.0 - 1e-8 {
        return Err(Error::InvariantViolation(format!(
            "objective ratio {ratio} < 1 - 1e-8 (optimality of the partial solve)"
        )));
    }

    let mut profile = sharpness_ratio(&spec, &cfg.filter, cfg.bandwidth)?;
    profile.m_bound = signals.max_excitation_norm();
    let bound_report = theorem_report(
        &full.laplacian,
        partial.laplacian.matrix(),
        &l_hat,
        &l_tilde_p,
        &mask,
        y,
        &spec,
        cfg.bandwidth,
        cfg.delta,
        cfg.lambda,
        Some(&profile),
    )?;
    if !bound_report.left_inequalities_hold() {
        return Err(Error::InvariantViolation(
            "surrogate left inequality failed".into(),
        ));
    }
    let t_theory = t0.elapsed().as_secs_f64();

    Ok(TrialResult {
        f1_partial,
        f1_full_restricted,
        ratio,
        degenerate,
        bound_report,
        timings: StageTimings {
            generate: t_generate,
            solve_full: t_full,
            solve_partial: t_partial,
            theory: t_theory,
        },
        solve_full_result: full,
        solve_partial_result: partial,
    })
}

/// Grid of observed-node counts crossed with labeled filter variants.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub n_values: Vec<usize>,
    pub filters: Vec<(String, GraphFilter)>,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub param: String,
    pub median_f1_partial: f64,
    pub f1_q1: f64,
    pub f1_q3: f64,
    pub median_ratio: f64,
    pub ratio_q1: f64,
    pub ratio_q3: f64,
    pub trials: usize,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Grid points aborted by a trial failure, with the reason.
    pub failures: Vec<(usize, String, String)>,
}

impl SweepTable {
    /// CSV with the fixed column contract; floats at full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,param,median_f1_partial,q1,q3,median_ratio,ratio_q1,ratio_q3,trials\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.n,
                r.param,
                r.median_f1_partial,
                r.f1_q1,
                r.f1_q3,
                r.median_ratio,
                r.ratio_q1,
                r.ratio_q3,
                r.trials
            ));
        }
        out
    }
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Run `trials` seeded trials at every grid point. Trial i shares its
/// graph and excitations across grid points (common random numbers);
/// masks are redrawn per point.
pub fn run_sweep(base: &TrialConfig, grid: &SweepGrid, trials: usize) -> Result<SweepTable> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let mut jobs = Vec::new();
    for (f_idx, (label, filter)) in grid.filters.iter().enumerate() {
        for &n in &grid.n_values {
            for trial in 0..trials {
                let mut cfg = base.clone();
                cfg.filter = filter.clone();
                cfg.n_observed = n;
                cfg.seed = mix_seed(base.seed, trial as u64);
                jobs.push((f_idx, label.clone(), n, cfg));
            }
        }
    }
    let results: Vec<(usize, String, usize, Result<TrialResult>)> = jobs
        .into_par_iter()
        .map(|(f_idx, label, n, cfg)| (f_idx, label, n, run_trial(&cfg)))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (label, _) in &grid.filters {
        for &n in &grid.n_values {
            let point: Vec<&Result<TrialResult>> = results
                .iter()
                .filter(|(_, l, rn, _)| l == label && *rn == n)
                .map(|(_, _, _, r)| r)
                .collect();
            if let Some(err) = point.iter().find_map(|r| r.as_ref().err()) {
                failures.push((n, label.clone(), err.to_string()));
                continue;
            }
            let mut f1s: Vec<f64> = point
                .iter()
                .map(|r| r.as_ref().unwrap().f1_partial)
                .collect();
            let mut ratios: Vec<f64> =
                point.iter().map(|r| r.as_ref().unwrap().ratio).collect();
            f1s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
            rows.push(SweepRow {
                n,
                param: label.clone(),
                median_f1_partial: quantile(&f1s, 0.5),
                f1_q1: quantile(&f1s, 0.25),
                f1_q3: quantile(&f1s, 0.75),
                median_ratio: quantile(&ratios, 0.5),
                ratio_q1: quantile(&ratios, 0.25),
                ratio_q3: quantile(&ratios, 0.75),
                trials,
            });
        }
    }
    Ok(SweepTable { rows, failures })
}

/// Binary graph on stations: edge iff |alt_i - alt_j| < threshold (strict).
pub fn altitude_ground_truth(altitudes: &[f64], threshold: f64) -> Result<Graph> {
    if altitudes.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter("non-finite altitude".into()));
    }
    let n = altitudes.len();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if (altitudes[i] - altitudes[j]).abs() < threshold {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    Graph::from_adjacency(a)
}

/// Station records: `station_id,altitude_m,temp_1,...,temp_12`.
#[derive(Debug, Clone)]
pub struct StationData {
    pub altitudes: Vec<f64>,
    /// 12 x N: one row per month, one column per station.
    pub temperatures: DMatrix<f64>,
}

pub fn load_station_csv<P: AsRef<std::path::Path>>(path: P) -> Result<StationData> {
    let path_str = path.as_ref().display().to_string();
    let content = std::fs::read_to_string(path)?;
    let mut altitudes = Vec::new();
    let mut temp_rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if lineno == 1 && fields.get(1).map(|f| f.parse::<f64>().is_err()) == Some(true) {
            continue; // header
        }
        if fields.len() != 14 {
            return Err(Error::Parse {
                path: path_str,
                line: lineno,
                message: format!("expected 14 fields (id, altitude, 12 temps), got {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: lineno,
                message: format!("bad {what} `{s}`"),
            })
        };
        altitudes.push(parse(fields[1], "altitude")?);
        temp_rows.push(
            fields[2..]
                .iter()
                .map(|f| parse(f, "temperature"))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    if altitudes.is_empty() {
        return Err(Error::Parse {
            path: path_str,
            line: 0,
            message: "no station rows".into(),
        });
    }
    let n = altitudes.len();
    let temperatures = DMatrix::from_fn(12, n, |m, s| temp_rows[s][m]);
    Ok(StationData {
        altitudes,
        temperatures,
    })
}

/// Configuration shared by the real-data drivers.
#[derive(Debug, Clone)]
pub struct RealConfig {
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub lambda: f64,
    pub tau: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct RealRow {
    pub n: usize,
    pub median_f1_partial: f64,
    pub f1_q1: f64,
    pub f1_q3: f64,
    pub median_f1_full_restricted: f64,
    pub trials: usize,
}

pub fn real_rows_to_csv(rows: &[RealRow]) -> String {
    let mut out =
        String::from("n,median_f1_partial,q1,q3,median_f1_full_restricted,trials\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n, r.median_f1_partial, r.f1_q1, r.f1_q3, r.median_f1_full_restricted, r.trials
        ));
    }
    out
}

/// Partial vs full pipeline against a provided ground truth, for given
/// signals, over an n grid with redrawn masks per trial.
pub fn run_real_experiment(
    truth: &Graph,
    signals: &DMatrix<f64>,
    cfg: &RealConfig,
) -> Result<Vec<RealRow>> {
    let total = truth.n_nodes();
    if signals.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "signals have {} columns, truth graph has {total} nodes",
            signals.ncols()
        )));
    }
    let solver_cfg = SolverConfig {
        lambda: cfg.lambda,
        ..Default::default()
    };
    let full = solve_gl_sigrep(signals, &solver_cfg)?;
    assert_in_set(full.laplacian.matrix(), total, "full solution")?;

    let mut jobs = Vec::new();
    for &n in &cfg.n_values {
        if n == 0 || n > total {
            return Err(Error::InvalidParameter(format!(
                "n = {n} out of range for {total} nodes"
            )));
        }
        for trial in 0..cfg.trials {
            jobs.push((n, trial));
        }
    }
    let results: Vec<(usize, Result<(f64, f64)>)> = jobs
        .into_par_iter()
        .map(|(n, trial)| {
            let run = || -> Result<(f64, f64)> {
                let mut rng = stream(cfg.seed, mix_seed(n as u64, trial as u64));
                let mask = sample_observation(total, n, &mut rng)?;
                let y_o = restrict_signals(&mask, signals)?;
                let partial = solve_gl_sigrep(&y_o, &solver_cfg)?;
                let truth_restricted = truth.induced_subgraph(mask.observed())?;
                let est = threshold_edges(partial.laplacian.matrix(), cfg.tau)?;
                let f1_partial = f1_score(&est.graph, &truth_restricted)?.f1;
                let full_restricted = restrict_laplacian(&mask, full.laplacian.matrix())?;
                let est_full = threshold_edges(&full_restricted, cfg.tau)?;
                let f1_full = f1_score(&est_full.graph, &truth_restricted)?.f1;
                Ok((f1_partial, f1_full))
            };
            (n, run())
        })
        .collect();

    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        let mut partials = Vec::new();
        let mut fulls = Vec::new();
        for (rn, r) in &results {
            if *rn == n {
                let (p, f) = r.as_ref().map_err(|e| Error::Config(e.to_string()))?;
                partials.push(*p);
                fulls.push(*f);
            }
        }
        partials.sort_by(|a, b| a.partial_cmp(b).unwrap());
        fulls.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rows.push(RealRow {
            n,
            median_f1_partial: quantile(&partials, 0.5),
            f1_q1: quantile(&partials, 0.25),
            f1_q3: quantile(&partials, 0.75),
            median_f1_full_restricted: quantile(&fulls, 0.5),
            trials: cfg.trials,
        });
    }
    Ok(rows)
}

/// Synthesize M filtered-Gaussian signals on a given graph.
pub fn synthesize_signals(
    graph: &Graph,
    filter: &GraphFilter,
    m: usize,
    seed: u64,
) -> Result<(Spectrum, DMatrix<f64>)> {
    let l = build_laplacian(graph);
    let spec = eigendecompose(&l)?;
    let sm = generate_signals(&spec, filter, m, &mut stream(seed, 0xB2))?;
    Ok((spec, sm.signals().clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn triangle() -> Graph {
        Graph::from_adjacency(dmatrix![0.0, 1.0, 1.0; 1.0, 0.0, 1.0; 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn f1_identical_graphs() {
        let g = triangle();
        let s = f1_score(&g, &g).unwrap();
        assert_eq!(s.f1, 1.0);
    }

    #[test]
    fn f1_empty_cases() {
        let empty = Graph::empty(3);
        assert_eq!(f1_score(&empty, &triangle()).unwrap().f1, 0.0);
        assert_eq!(f1_score(&empty, &Graph::empty(3)).unwrap().f1, 1.0);
    }

    #[test]
    fn f1_partial_recovery() {
        let mut a = DMatrix::zeros(3, 3);
        a[(0, 1)] = 1.0;
        a[(1, 0)] = 1.0;
        let one_edge = Graph::from_adjacency(a).unwrap();
        let s = f1_score(&one_edge, &triangle()).unwrap();
        assert_eq!(s.precision, 1.0);
        assert!((s.recall - 1.0 / 3.0).abs() <= 1e-12);
        assert!((s.f1 - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn f1_symmetric_under_consistent_relabeling() {
        let est = triangle();
        let mut a = DMatrix::zeros(3, 3);
        a[(0, 2)] = 1.0;
        a[(2, 0)] = 1.0;
        a[(1, 2)] = 1.0;
        a[(2, 1)] = 1.0;
        let truth = Graph::from_adjacency(a).unwrap();
        let before = f1_score(&est, &truth).unwrap();
        // Relabel both graphs with the rotation 0->1->2->0.
        let perm = [1usize, 2, 0];
        let relabel = |g: &Graph| {
            let mut b = DMatrix::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    b[(perm[i], perm[j])] = g.adjacency()[(i, j)];
                }
            }
            Graph::from_adjacency(b).unwrap()
        };
        let after = f1_score(&relabel(&est), &relabel(&truth)).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn altitude_threshold_examples() {
        let complete = altitude_ground_truth(&[100.0, 100.0, 100.0], 300.0).unwrap();
        assert_eq!(complete.n_edges(), 3);
        // Exactly at the threshold: strict inequality, no edge.
        let none = altitude_ground_truth(&[0.0, 300.0], 300.0).unwrap();
        assert_eq!(none.n_edges(), 0);
        let chain = altitude_ground_truth(&[0.0, 200.0, 450.0], 300.0).unwrap();
        assert_eq!(chain.edges(), vec![(0, 1, 1.0), (1, 2, 1.0)]);
    }

    #[test]
    fn quantile_endpoints() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert_eq!(quantile(&xs, 0.5), 2.5);
    }

    #[test]
    fn trial_is_deterministic() {
        let cfg = TrialConfig {
            graph: GraphSpec::Er { nodes: 15, p: 0.3 },
            filter: GraphFilter::Heat { alpha: 5.0 },
            m_signals: 30,
            n_observed: 10,
            lambda: 2.0,
            tau: 0.1,
            seed: 11,
            bandwidth: 3,
            delta: 0.1,
        };
        let a = run_trial(&cfg).unwrap();
        let b = run_trial(&cfg).unwrap();
        assert_eq!(a.f1_partial, b.f1_partial);
        assert_eq!(a.ratio, b.ratio);
        assert!(a.ratio >= 1.0 - 1e-8);
    }

    #[test]
    fn constant_signal_trial_is_degenerate_at_lambda_zero() {
        // A constant signal has zero Dirichlet energy everywhere, so both
        // objectives vanish and the ratio is flagged degenerate.
        let cfg = TrialConfig {
            graph: GraphSpec::Er { nodes: 8, p: 0.5 },
            filter: GraphFilter::Heat { alpha: 400.0 },
            m_signals: 5,
            n_observed: 5,
            lambda: 0.0,
            tau: 0.1,
            seed: 3,
            bandwidth: 2,
            delta: 0.1,
        };
        let r = run_trial(&cfg).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.ratio, 1.0);
    }

    #[test]
    fn single_point_sweep_equals_trial() {
        let base = TrialConfig {
            graph: GraphSpec::Er { nodes: 12, p: 0.4 },
            filter: GraphFilter::Heat { alpha: 5.0 },
            m_signals: 20,
            n_observed: 8,
            lambda: 2.0,
            tau: 0.1,
            seed: 21,
            bandwidth: 3,
            delta: 0.1,
        };
        let grid = SweepGrid {
            n_values: vec![8],
            filters: vec![("alpha=5".into(), base.filter.clone())],
        };
        let table = run_sweep(&base, &grid, 1).unwrap();
        assert_eq!(table.rows.len(), 1);
        let mut cfg = base.clone();
        cfg.seed = mix_seed(base.seed, 0);
        let trial = run_trial(&cfg).unwrap();
        assert_eq!(table.rows[0].median_f1_partial, trial.f1_partial);
        assert_eq!(table.rows[0].median_ratio, trial.ratio);
    }

    #[test]
    fn station_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stations.csv");
        let mut content = String::from(
            "station_id,altitude_m,temp_jan,temp_feb,temp_mar,temp_apr,temp_may,temp_jun,\
             temp_jul,temp_aug,temp_sep,temp_oct,temp_nov,temp_dec\n",
        );
        for s in 0..5 {
            content.push_str(&format!("s{s},{}", 100.0 * s as f64));
            for m in 0..12 {
                content.push_str(&format!(",{}", m as f64 + s as f64));
            }
            content.push('\n');
        }
        std::fs::write(&path, content).unwrap();
        let data = load_station_csv(&path).unwrap();
        assert_eq!(data.altitudes, vec![0.0, 100.0, 200.0, 300.0, 400.0]);
        assert_eq!(data.temperatures.shape(), (12, 5));
        assert_eq!(data.temperatures[(2, 3)], 5.0);
    }
}
