//! Grid sweeps over the structure initialization and diffusion settings.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, InitKind};
use crate::pipeline::{load_graph, run_experiment_on};
use crate::report::ExperimentReport;
use crate::{io_err, CliError};

pub const K_GRID: [usize; 6] = [1, 5, 10, 20, 50, 100];
pub const ALPHA_LEVELS: [f64; 5] = [0.01, 0.05, 0.1, 0.2, 0.4];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub init: InitKind,
    pub k: usize,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl SweepPoint {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            init: cfg.init,
            k: cfg.k,
            alpha1: cfg.alpha1,
            alpha2: cfg.alpha2,
        }
    }

    pub fn apply(&self, base: &ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            init: self.init,
            k: self.k,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            ..base.clone()
        }
    }
}

/// The base config with `k` swept over [`K_GRID`].
pub fn k_grid(base: &ExperimentConfig) -> Vec<SweepPoint> {
    K_GRID
        .iter()
        .map(|&k| SweepPoint { k, ..SweepPoint::from_config(base) })
        .collect()
}

/// All ordered `(α₁, α₂)` pairs over [`ALPHA_LEVELS`].
pub fn alpha_grid(base: &ExperimentConfig) -> Vec<SweepPoint> {
    let mut out = Vec::new();
    for &alpha1 in &ALPHA_LEVELS {
        for &alpha2 in &ALPHA_LEVELS {
            out.push(SweepPoint {
                alpha1,
                alpha2,
                ..SweepPoint::from_config(base)
            });
        }
    }
    out
}

pub fn init_grid(base: &ExperimentConfig) -> Vec<SweepPoint> {
    [InitKind::SimilarityWiring, InitKind::Empty, InitKind::Full, InitKind::Random]
        .into_iter()
        .map(|init| SweepPoint { init, ..SweepPoint::from_config(base) })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationReport {
    pub points: Vec<(SweepPoint, ExperimentReport)>,
}

const SWEEP_METRICS: [&str; 4] = ["three_slp_auc", "three_slp_ap", "psc_na_auc", "psc_na_ap"];

impl AblationReport {
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("init,k,alpha1,alpha2");
        for m in SWEEP_METRICS {
            let _ = write!(out, ",{m}_mean,{m}_std");
        }
        out.push_str(",failed_runs,run_dir\n");
        for (p, r) in &self.points {
            let init = serde_json::to_value(p.init).expect("enum serializes");
            let _ = write!(out, "{},{},{},{}", init.as_str().unwrap_or(""), p.k, p.alpha1, p.alpha2);
            for m in SWEEP_METRICS {
                match r.aggregate(m) {
                    Some(a) => {
                        let _ = write!(out, ",{},{}", a.mean, a.std);
                    }
                    None => out.push_str(",,"),
                }
            }
            let failed = r.runs.iter().filter(|x| !x.ok).count();
            let _ = writeln!(out, ",{failed},{}", r.run_dir);
        }
        out
    }

    /// Mean of `metric` at each point, in grid order.
    pub fn means(&self, metric: &str) -> Vec<Option<f64>> {
        self.points.iter().map(|(_, r)| r.aggregate(metric).map(|a| a.mean)).collect()
    }
}

/// One experiment per grid point; writes `sweep.csv` into `out`.
pub fn run_ablation(
    base: &ExperimentConfig,
    points: &[SweepPoint],
    out: &Path,
    jobs: usize,
) -> Result<AblationReport, CliError> {
    base.validate()?;
    let graph = load_graph(base)?;
    let mut reports = Vec::with_capacity(points.len());
    for p in points {
        let cfg = p.apply(base);
        reports.push((*p, run_experiment_on(&cfg, &graph, out, jobs)?));
    }
    let report = AblationReport { points: reports };
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let path = out.join("sweep.csv");
    std::fs::write(&path, report.summary_csv()).map_err(|e| io_err(&path, e))?;
    Ok(report)
}
