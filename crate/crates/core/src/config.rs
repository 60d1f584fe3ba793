//! Experiment configuration file (TOML) and the driver that turns a
//! validated config into sweep/real-data outputs.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::eval::{
    run_real_experiment, run_sweep, synthesize_signals, RealConfig, SweepGrid, TrialConfig,
};
use crate::eval::{altitude_ground_truth, load_station_csv, real_rows_to_csv};
use crate::graph::load_edge_list;
use crate::signal::GraphFilter;

/// Top-level experiment config. Unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Worker threads for the sweep; 0 or absent uses the rayon default.
    #[serde(default)]
    pub jobs: usize,
    pub trial: TrialSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub real: Option<RealSection>,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialSection {
    pub graph: crate::eval::GraphSpec,
    pub filter: GraphFilter,
    pub m_signals: usize,
    #[serde(default = "default_n_observed")]
    pub n_observed: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    pub bandwidth: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_n_observed() -> usize {
    0 // filled from the graph size when omitted
}
fn default_lambda() -> f64 {
    2.0
}
fn default_tau() -> f64 {
    0.1
}
fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n_values: Vec<usize>,
    /// Scalar filter-parameter grid (heat alpha or resolvent beta).
    #[serde(default)]
    pub param_values: Vec<f64>,
    pub trials: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealSection {
    /// "stations" (altitude ground truth + temperature signals) or
    /// "graph" (edge-list ground truth + synthesized signals).
    pub mode: String,
    #[serde(default)]
    pub stations: Option<PathBuf>,
    #[serde(default = "default_altitude_threshold")]
    pub altitude_threshold: f64,
    #[serde(default)]
    pub graph: Option<PathBuf>,
    #[serde(default)]
    pub m_signals: usize,
    pub n_values: Vec<usize>,
    pub trials: usize,
}

fn default_altitude_threshold() -> f64 {
    300.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub sweep_csv: Option<PathBuf>,
    #[serde(default)]
    pub real_csv: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let content = std::fs::read_to_string(path)?;
        Self::from_str_validated(&content)
    }

    pub fn from_str_validated(content: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(content).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validate every value against its operation preconditions before
    /// any work starts; collect all violations.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.trial.m_signals == 0 {
            problems.push("trial.m_signals must be >= 1".to_string());
        }
        if self.trial.lambda < 0.0 {
            problems.push(format!("trial.lambda = {} must be >= 0", self.trial.lambda));
        }
        if !(0.0..1.0).contains(&self.trial.tau) {
            problems.push(format!("trial.tau = {} must be in [0, 1)", self.trial.tau));
        }
        if !(0.0 < self.trial.delta && self.trial.delta < 1.0) {
            problems.push(format!(
                "trial.delta = {} must be in (0, 1)",
                self.trial.delta
            ));
        }
        if self.trial.bandwidth == 0 {
            problems.push("trial.bandwidth must be >= 1".to_string());
        }
        if let Err(e) = self.trial.filter.validate() {
            problems.push(format!("trial.filter: {e}"));
        }
        match &self.trial.graph {
            crate::eval::GraphSpec::Er { nodes, p } => {
                if *nodes < 2 {
                    problems.push("graph.nodes must be >= 2".to_string());
                }
                if !(0.0..=1.0).contains(p) {
                    problems.push(format!("graph.p = {p} must be in [0, 1]"));
                }
            }
            crate::eval::GraphSpec::Knn { nodes, k } => {
                if *k == 0 || k >= nodes {
                    problems.push(format!("graph needs 1 <= k < nodes, got k={k}, nodes={nodes}"));
                }
            }
            crate::eval::GraphSpec::Sbm { sizes, p_in, p_out } => {
                if sizes.iter().sum::<usize>() < 2 {
                    problems.push("graph.sizes must sum to >= 2".to_string());
                }
                for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
                    if !(0.0..=1.0).contains(p) {
                        problems.push(format!("graph.{name} = {p} must be in [0, 1]"));
                    }
                }
            }
            crate::eval::GraphSpec::File { path } => {
                if !path.exists() {
                    problems.push(format!("graph file {} does not exist", path.display()));
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.trials == 0 {
                problems.push("sweep.trials must be >= 1".to_string());
            }
            if sweep.n_values.is_empty() {
                problems.push("sweep.n_values must be nonempty".to_string());
            }
            if !sweep.param_values.is_empty()
                && !matches!(
                    self.trial.filter,
                    GraphFilter::Heat { .. } | GraphFilter::Resolvent { .. }
                )
            {
                problems.push(
                    "sweep.param_values requires a heat or resolvent filter".to_string(),
                );
            }
        }
        if let Some(real) = &self.real {
            match real.mode.as_str() {
                "stations" => {
                    if real.stations.is_none() {
                        problems.push("real.stations path required in stations mode".to_string());
                    }
                }
                "graph" => {
                    if real.graph.is_none() {
                        problems.push("real.graph path required in graph mode".to_string());
                    }
                    if real.m_signals == 0 {
                        problems.push("real.m_signals must be >= 1 in graph mode".to_string());
                    }
                }
                other => problems.push(format!("real.mode = `{other}` (stations or graph)")),
            }
            if real.trials == 0 {
                problems.push("real.trials must be >= 1".to_string());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn base_trial(&self) -> TrialConfig {
        TrialConfig {
            graph: self.trial.graph.clone(),
            filter: self.trial.filter.clone(),
            m_signals: self.trial.m_signals,
            n_observed: self.trial.n_observed,
            lambda: self.trial.lambda,
            tau: self.trial.tau,
            seed: self.seed,
            bandwidth: self.trial.bandwidth,
            delta: self.trial.delta,
        }
    }

    /// Sweep grid: one filter variant per param value, or the base filter.
    pub fn sweep_grid(&self) -> Option<SweepGrid> {
        let sweep = self.sweep.as_ref()?;
        let filters = if sweep.param_values.is_empty() {
            vec![(filter_label(&self.trial.filter), self.trial.filter.clone())]
        } else {
            sweep
                .param_values
                .iter()
                .map(|&v| {
                    let f = match &self.trial.filter {
                        GraphFilter::Heat { .. } => GraphFilter::Heat { alpha: v },
                        GraphFilter::Resolvent { .. } => GraphFilter::Resolvent { beta: v },
                        other => other.clone(),
                    };
                    (filter_label(&f), f)
                })
                .collect()
        };
        Some(SweepGrid {
            n_values: sweep.n_values.clone(),
            filters,
        })
    }
}

pub fn filter_label(f: &GraphFilter) -> String {
    match f {
        GraphFilter::Heat { alpha } => format!("alpha={alpha}"),
        GraphFilter::Resolvent { beta } => format!("beta={beta}"),
        GraphFilter::Polynomial { .. } => "polynomial".to_string(),
        GraphFilter::IdealLowpass { cutoff } => format!("ideal_k={cutoff}"),
    }
}

/// Files written by an experiment run.
#[derive(Debug, Default)]
pub struct ExperimentOutputs {
    pub sweep_csv: Option<PathBuf>,
    pub real_csv: Option<PathBuf>,
    /// Grid points aborted by trial failures (n, param, reason).
    pub failures: Vec<(usize, String, String)>,
}

/// Run everything the config asks for, writing outputs under `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutputs> {
    std::fs::create_dir_all(out_dir)?;
    let mut outputs = ExperimentOutputs::default();

    if let Some(grid) = cfg.sweep_grid() {
        let trials = cfg.sweep.as_ref().unwrap().trials;
        let table = run_sweep(&cfg.base_trial(), &grid, trials)?;
        let name = cfg
            .output
            .sweep_csv
            .clone()
            .unwrap_or_else(|| PathBuf::from("sweep.csv"));
        let path = out_dir.join(name);
        std::fs::write(&path, table.to_csv())?;
        outputs.sweep_csv = Some(path);
        outputs.failures = table.failures.clone();
        // Theorem left-inequality failures are hard failures.
        if let Some((n, param, reason)) = table
            .failures
            .iter()
            .find(|(_, _, reason)| reason.starts_with("invariant violation"))
        {
            return Err(Error::InvariantViolation(format!(
                "grid point n={n}, {param}: {reason}"
            )));
        }
    }

    if let Some(real) = &cfg.real {
        let (truth, signals) = match real.mode.as_str() {
            "stations" => {
                let data = load_station_csv(real.stations.as_ref().unwrap())?;
                let truth = altitude_ground_truth(&data.altitudes, real.altitude_threshold)?;
                (truth, data.temperatures)
            }
            "graph" => {
                let truth = load_edge_list(real.graph.as_ref().unwrap())?;
                let (_, signals) =
                    synthesize_signals(&truth, &cfg.trial.filter, real.m_signals, cfg.seed)?;
                (truth, signals)
            }
            _ => unreachable!("validated"),
        };
        let rows = run_real_experiment(
            &truth,
            &signals,
            &RealConfig {
                n_values: real.n_values.clone(),
                trials: real.trials,
                lambda: cfg.trial.lambda,
                tau: cfg.trial.tau,
                seed: cfg.seed,
            },
        )?;
        let name = cfg
            .output
            .real_csv
            .clone()
            .unwrap_or_else(|| PathBuf::from("real.csv"));
        let path = out_dir.join(name);
        std::fs::write(&path, real_rows_to_csv(&rows))?;
        outputs.real_csv = Some(path);
    }

    Ok(outputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
[trial]
m_signals = 20
bandwidth = 3
[trial.graph]
model = "er"
nodes = 12
p = 0.4
[trial.filter]
kind = "heat"
alpha = 5.0
[sweep]
n_values = [8, 12]
trials = 2
[output]
sweep_csv = "sweep.csv"
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::from_str_validated(MINIMAL).unwrap();
        assert_eq!(cfg.trial.lambda, 2.0);
        assert_eq!(cfg.trial.tau, 0.1);
        assert_eq!(cfg.trial.delta, 0.1);
        let grid = cfg.sweep_grid().unwrap();
        assert_eq!(grid.filters[0].0, "alpha=5");
    }

    #[test]
    fn unknown_key_rejected_by_name() {
        let bad = MINIMAL.replace("[output]", "typo_key = 1\n[output]");
        let err = ExperimentConfig::from_str_validated(&bad).unwrap_err();
        assert!(err.to_string().contains("typo_key"), "{err}");
    }

    #[test]
    fn out_of_range_values_listed() {
        let bad = MINIMAL
            .replace("p = 0.4", "p = 1.5")
            .replace("m_signals = 20", "m_signals = 0");
        let err = ExperimentConfig::from_str_validated(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("graph.p"), "{msg}");
        assert!(msg.contains("m_signals"), "{msg}");
    }

    #[test]
    fn param_values_build_labeled_filters() {
        let with_params = MINIMAL.replace(
            "trials = 2",
            "trials = 2\nparam_values = [1.0, 10.0]",
        );
        let cfg = ExperimentConfig::from_str_validated(&with_params).unwrap();
        let grid = cfg.sweep_grid().unwrap();
        let labels: Vec<&str> = grid.filters.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, vec!["alpha=1", "alpha=10"]);
    }
}
