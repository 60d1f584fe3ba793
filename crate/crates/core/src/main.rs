use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use glsigrep::config::{run_experiment, ExperimentConfig};
use glsigrep::error::{Error, Result};
use glsigrep::eval::{f1_score, mix_seed, run_trial, GraphSpec, TrialConfig};
use glsigrep::graph::{load_edge_list, save_edge_list, Graph};
use glsigrep::laplacian::{build_laplacian, eigendecompose};
use glsigrep::observe::{restrict_signals, sample_observation};
use glsigrep::signal::GraphFilter;
use glsigrep::solver::{solve_gl_sigrep, threshold_edges, SolveResult, SolverConfig};
use glsigrep::theory::BoundReport;

#[derive(Parser)]
#[command(name = "glsigrep", version, about = "Learn graph topology from smooth signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random graph and write it as an edge list.
    GenGraph(GenGraphArgs),
    /// Synthesize filtered signals on a graph.
    GenSignals(GenSignalsArgs),
    /// Learn a graph Laplacian from a signal matrix.
    Learn(LearnArgs),
    /// Report sampling/stability bound measurements for one trial.
    Bounds(BoundsArgs),
    /// Run a full experiment described by a TOML config.
    Experiment(ExperimentArgs),
    /// Score an estimated edge list against a ground-truth edge list.
    Eval(EvalArgs),
}

#[derive(Args)]
struct GenGraphArgs {
    #[command(subcommand)]
    model: GraphModel,
}

#[derive(Subcommand)]
enum GraphModel {
    /// Erdos-Renyi G(n, p), resampled until connected.
    Er {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        common: GenCommon,
    },
    /// k-nearest-neighbour graph on uniform points in the unit square.
    Knn {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Stochastic block model with given block sizes.
    Sbm {
        /// Comma-separated block sizes, e.g. 10,10,5.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long)]
        p_in: f64,
        #[arg(long)]
        p_out: f64,
        #[command(flatten)]
        common: GenCommon,
    },
}

#[derive(Args)]
struct GenCommon {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenSignalsArgs {
    /// Edge-list CSV of the graph.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    filter: FilterArgs,
    /// Number of signals.
    #[arg(short, long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV: one row per signal, one column per node.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FilterKind {
    Heat,
    Resolvent,
    Poly,
    Ideal,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long, value_enum)]
    filter: FilterKind,
    /// Heat-kernel decay rate (filter = heat).
    #[arg(long)]
    alpha: Option<f64>,
    /// Resolvent scale (filter = resolvent).
    #[arg(long)]
    beta: Option<f64>,
    /// Comma-separated polynomial coefficients, constant term first (filter = poly).
    #[arg(long, value_delimiter = ',')]
    coeffs: Vec<f64>,
    /// Passband width in eigenvalue indices (filter = ideal).
    #[arg(long)]
    cutoff: Option<usize>,
}

impl FilterArgs {
    fn build(&self) -> Result<GraphFilter> {
        let f = match self.filter {
            FilterKind::Heat => GraphFilter::Heat {
                alpha: self.alpha.ok_or_else(|| {
                    Error::InvalidParameter("--alpha required for the heat filter".into())
                })?,
            },
            FilterKind::Resolvent => GraphFilter::Resolvent {
                beta: self.beta.ok_or_else(|| {
                    Error::InvalidParameter("--beta required for the resolvent filter".into())
                })?,
            },
            FilterKind::Poly => GraphFilter::Polynomial {
                coefficients: self.coeffs.clone(),
            },
            FilterKind::Ideal => GraphFilter::IdealLowpass {
                cutoff: self.cutoff.ok_or_else(|| {
                    Error::InvalidParameter("--cutoff required for the ideal filter".into())
                })?,
            },
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Args)]
struct LearnArgs {
    /// Signal CSV: one row per signal, one column per node.
    #[arg(long)]
    signals: PathBuf,
    /// Observe only n uniformly sampled nodes instead of all of them.
    #[arg(long)]
    observe: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    /// Relative edge-detection threshold in [0, 1).
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    /// Edge-list CSV of the ground-truth graph.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    filter: FilterArgs,
    #[arg(short, long)]
    m: usize,
    /// Number of observed nodes.
    #[arg(long)]
    observe: usize,
    /// Bandwidth K for coherence and RIP measurements.
    #[arg(short, long)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    report: ReportFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML config file.
    config: PathBuf,
    /// Directory for output files (default: alongside the config).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads (overrides the config's `jobs`).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    estimated: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenGraph(args) => cmd_gen_graph(args),
        Command::GenSignals(args) => cmd_gen_signals(args),
        Command::Learn(args) => cmd_learn(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

fn cmd_gen_graph(args: GenGraphArgs) -> Result<()> {
    let (spec, common) = match args.model {
        GraphModel::Er { nodes, p, common } => (GraphSpec::Er { nodes, p }, common),
        GraphModel::Knn { nodes, k, common } => (GraphSpec::Knn { nodes, k }, common),
        GraphModel::Sbm {
            sizes,
            p_in,
            p_out,
            common,
        } => (GraphSpec::Sbm { sizes, p_in, p_out }, common),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(common.seed, 0xA1));
    let graph = spec.generate(&mut rng)?;
    save_edge_list(&graph, &common.out)?;

    // Provenance sidecar so the graph can be regenerated.
    #[derive(serde::Serialize)]
    struct Provenance<'a> {
        graph: &'a GraphSpec,
        seed: u64,
    }
    let meta = toml::to_string(&Provenance {
        graph: &spec,
        seed: common.seed,
    })
    .map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(common.out.with_extension("meta.toml"), meta)?;
    println!(
        "wrote {} ({} nodes, {} edges)",
        common.out.display(),
        graph.n_nodes(),
        graph.n_edges()
    );
    Ok(())
}

fn cmd_gen_signals(args: GenSignalsArgs) -> Result<()> {
    let graph = load_edge_list(&args.graph)?;
    let filter = args.filter.build()?;
    let spec = eigendecompose(&build_laplacian(&graph))?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(args.seed, 0xB2));
    let sm = glsigrep::signal::generate_signals(&spec, &filter, args.m, &mut rng)?;
    save_signal_csv(sm.signals(), &args.out)?;
    println!(
        "wrote {} ({} signals on {} nodes)",
        args.out.display(),
        sm.n_signals(),
        sm.n_nodes()
    );
    Ok(())
}

fn cmd_learn(args: LearnArgs) -> Result<()> {
    if args.lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda = {} must be >= 0",
            args.lambda
        )));
    }
    let y_full = load_signal_csv(&args.signals)?;
    let total = y_full.ncols();
    std::fs::create_dir_all(&args.out_dir)?;

    let y = match args.observe {
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(args.seed, 0xC3 ^ ((n as u64) << 8)));
            let mask = sample_observation(total, n, &mut rng)?;
            let indices: Vec<String> = mask.observed().iter().map(|i| i.to_string()).collect();
            std::fs::write(args.out_dir.join("mask.csv"), indices.join(",") + "\n")?;
            restrict_signals(&mask, &y_full)?
        }
        None => y_full,
    };

    let result = solve_gl_sigrep(
        &y,
        &SolverConfig {
            lambda: args.lambda,
            ..SolverConfig::default()
        },
    )?;
    let thresholded = threshold_edges(result.laplacian.matrix(), args.tau)?;
    save_edge_list(&thresholded.graph, args.out_dir.join("learned_edges.csv"))?;
    write_solve_csv(&result, &args.out_dir.join("solve.csv"))?;
    println!(
        "objective={:.6e} iterations={} converged={} edges={}",
        result.objective,
        result.iterations,
        result.converged,
        thresholded.graph.n_edges()
    );
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    let cfg = TrialConfig {
        graph: GraphSpec::File {
            path: args.graph.clone(),
        },
        filter: args.filter.build()?,
        m_signals: args.m,
        n_observed: args.observe,
        lambda: args.lambda,
        tau: args.tau,
        seed: args.seed,
        bandwidth: args.k,
        delta: args.delta,
    };
    let result = run_trial(&cfg)?;
    match args.report {
        ReportFormat::Json => println!(
            "{}",
            serde_json::to_string_pretty(&result.bound_report)
                .map_err(|e| Error::Config(e.to_string()))?
        ),
        ReportFormat::Csv => print!("{}", bound_report_csv(&result.bound_report)),
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let cfg = ExperimentConfig::from_path(&args.config)?;
    let jobs = args.jobs.unwrap_or(cfg.jobs);
    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let out_dir = args.out_dir.unwrap_or_else(|| {
        args.config
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| PathBuf::from("."))
    });
    let outputs = run_experiment(&cfg, &out_dir)?;
    for (n, param, reason) in &outputs.failures {
        eprintln!("warning: grid point n={n}, {param} skipped: {reason}");
    }
    for path in [outputs.sweep_csv, outputs.real_csv].into_iter().flatten() {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let estimated = load_edge_list(&args.estimated)?;
    let truth = load_edge_list(&args.truth)?;
    let (estimated, truth) = pad_to_common_size(estimated, truth)?;
    let score = f1_score(&estimated, &truth)?;
    println!(
        "f1={:.6} precision={:.6} recall={:.6}",
        score.f1, score.precision, score.recall
    );
    Ok(())
}

/// Edge lists only imply a node count; pad the smaller graph with
/// isolated nodes so both cover the same index range.
fn pad_to_common_size(a: Graph, b: Graph) -> Result<(Graph, Graph)> {
    let n = a.n_nodes().max(b.n_nodes());
    let pad = |g: Graph| -> Result<Graph> {
        if g.n_nodes() == n {
            return Ok(g);
        }
        let mut adj = DMatrix::zeros(n, n);
        adj.view_mut((0, 0), (g.n_nodes(), g.n_nodes()))
            .copy_from(g.adjacency());
        Graph::from_adjacency(adj)
    };
    Ok((pad(a)?, pad(b)?))
}

fn save_signal_csv(y: &DMatrix<f64>, path: &PathBuf) -> Result<()> {
    let mut out = String::new();
    for m in 0..y.nrows() {
        let row: Vec<String> = (0..y.ncols()).map(|i| format!("{:.17e}", y[(m, i)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn load_signal_csv(path: &PathBuf) -> Result<DMatrix<f64>> {
    let content = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for tok in line.split(',') {
            let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: format!("`{}` is not a number", tok.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    message: "non-finite value".to_string(),
                });
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: "no signal rows".to_string(),
        });
    }
    let (m, n) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(m, n, |r, c| rows[r][c]))
}

fn write_solve_csv(result: &SolveResult, path: &PathBuf) -> Result<()> {
    let content = format!(
        "objective,iterations,converged,kkt_residual\n{:.17e},{},{},{:.17e}\n",
        result.objective, result.iterations, result.converged, result.kkt_residual
    );
    std::fs::write(path, content)?;
    Ok(())
}

fn bound_report_csv(r: &BoundReport) -> String {
    let mut header = vec![
        "coherence",
        "k",
        "delta",
        "t_required",
        "condition_holds",
        "c_t",
        "c_measured",
        "epsilon_measured",
        "eta_k",
        "residual_term",
    ]
    .join(",");
    let t = r
        .t_required
        .map(|t| format!("{t:.6e}"))
        .unwrap_or_else(|| "none".to_string());
    let mut row = format!(
        "{:.6e},{},{:.6e},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
        r.coherence,
        r.k,
        r.delta,
        t,
        r.condition_holds,
        r.c_t,
        r.c_measured,
        r.epsilon_measured,
        r.eta_k,
        r.residual_term
    );
    for c in &r.inequalities {
        header.push_str(&format!(",{0}_lhs,{0}_rhs,{0}_holds", c.name));
        row.push_str(&format!(",{:.6e},{:.6e},{}", c.lhs, c.rhs, c.holds));
    }
    format!("{header}\n{row}\n")
}
