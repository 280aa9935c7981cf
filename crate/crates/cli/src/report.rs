use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use slp_core::eval::HomophilyReport;

use crate::config::ExperimentConfig;
use crate::{io_err, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingMetrics {
    pub auc: f64,
    pub ap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DownstreamRecord {
    pub accuracy: f64,
    pub empty_graph_accuracy: f64,
}

/// Paths relative to the experiment directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub dir: String,
    pub loss_csv: Option<String>,
    pub edges_tsv: Option<String>,
    pub scores_csv: Option<String>,
    pub checkpoint: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repeat: usize,
    pub seed: u64,
    pub eval_seed: u64,
    pub ok: bool,
    pub error: Option<String>,
    pub three_slp: Option<RankingMetrics>,
    pub psc_na: Option<RankingMetrics>,
    pub final_loss: Option<f64>,
    pub predicted_edges: Option<usize>,
    /// Attribute assortativity of the predicted links against node labels.
    pub predicted_aac: Option<f64>,
    pub downstream: Option<DownstreamRecord>,
    pub artifacts: Artifacts,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn failed(repeat: usize, seed: u64, eval_seed: u64, error: String) -> Self {
        Self {
            repeat,
            seed,
            eval_seed,
            ok: false,
            error: Some(error),
            three_slp: None,
            psc_na: None,
            final_loss: None,
            predicted_edges: None,
            predicted_aac: None,
            downstream: None,
            artifacts: Artifacts::default(),
            wall_time_s: 0.0,
        }
    }

    /// Named scalar metrics of this run, used for aggregation and the flat CSV.
    pub fn metrics(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if let Some(m) = self.three_slp {
            out.push(("three_slp_auc", m.auc));
            out.push(("three_slp_ap", m.ap));
        }
        if let Some(m) = self.psc_na {
            out.push(("psc_na_auc", m.auc));
            out.push(("psc_na_ap", m.ap));
        }
        if let Some(d) = self.downstream {
            out.push(("downstream_accuracy", d.accuracy));
            out.push(("empty_graph_accuracy", d.empty_graph_accuracy));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub count: usize,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
            count: values.len(),
        }
    }
}

pub fn aggregate(runs: &[RunRecord]) -> BTreeMap<String, Aggregate> {
    let mut by_name: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.ok) {
        for (name, v) in r.metrics() {
            by_name.entry(name.to_string()).or_default().push(v);
        }
    }
    by_name.into_iter().map(|(k, v)| (k, Aggregate::of(&v))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub edges: Option<usize>,
    pub classes: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub build_hash: String,
    pub rng: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            build_hash: env!("THREESLP_BUILD_HASH").to_string(),
            rng: slp_core::RngStream::ALGORITHM.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub runs: Vec<RunRecord>,
    pub aggregates: BTreeMap<String, Aggregate>,
    /// Diagnostics of the truth edges, when labels and edges are available.
    pub homophily: Option<HomophilyReport>,
    pub notices: Vec<String>,
    pub environment: Environment,
    pub run_dir: String,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with wall-clock fields zeroed; identical for identical config and seed.
    pub fn payload_json(&self) -> String {
        let mut r = self.clone();
        r.runs.iter_mut().for_each(|run| run.wall_time_s = 0.0);
        r.to_json()
    }

    pub fn aggregate(&self, metric: &str) -> Option<Aggregate> {
        self.aggregates.get(metric).copied()
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json()).map_err(|e| io_err(&path, e))?;
        let mut csv = String::from("metric,value,run_seed\n");
        for r in &self.runs {
            for (name, v) in r.metrics() {
                csv.push_str(&format!("{name},{v},{}\n", r.seed));
            }
        }
        let path = dir.join("metrics.csv");
        std::fs::write(&path, csv).map_err(|e| io_err(&path, e))?;
        let path = dir.join("config.toml");
        std::fs::write(&path, self.config.to_toml()).map_err(|e| io_err(&path, e))
    }
}
