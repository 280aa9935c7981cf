//! One experiment: repeats of the full prediction pipeline plus the
//! attribute-only baseline, evaluated against held-out truth edges.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use slp_core::augment::{init_structure, make_views_with, ViewOptions, ViewPair};
use slp_core::eval::{aac, ap, auc, downstream_node_classification, homophily_report, sample_eval_pairs};
use slp_core::graph::{generate_synthetic, load_dataset, Adjacency, Edge};
use slp_core::psc::{cluster_links, export_predictions, orient_scores, similarity_scores, SimilarityMetric};
use slp_core::ssl::{final_embeddings, save_state, train, write_loss_csv, TrainState};
use slp_core::{AttributedGraph, DenseMatrix, EdgelessView};

use crate::config::{ExperimentConfig, InitKind};
use crate::report::{
    aggregate, Artifacts, DatasetSummary, DownstreamRecord, Environment, ExperimentReport, RankingMetrics, RunRecord,
};
use crate::{io_err, short_hash, CliError};

pub fn load_graph(cfg: &ExperimentConfig) -> Result<AttributedGraph, CliError> {
    match &cfg.dataset {
        Some(dir) => load_dataset(dir).map_err(|e| CliError::Data(e.to_string())),
        None => Ok(generate_synthetic(&cfg.synthetic_spec())?),
    }
}

/// Initial structure and the two diffusion views.
///
/// Views are ordered by ascending teleport probability; the objective is
/// symmetric in the view labels, so `(a, b)` and `(b, a)` give the same run.
pub fn build_views(x: &DenseMatrix, cfg: &ExperimentConfig, seed: u64) -> Result<ViewPair, CliError> {
    let a0 = init_structure(x, cfg.init_method(seed))?;
    let (lo, hi) = if cfg.alpha1 <= cfg.alpha2 {
        (cfg.alpha1, cfg.alpha2)
    } else {
        (cfg.alpha2, cfg.alpha1)
    };
    Ok(make_views_with(&a0, lo, hi, &ViewOptions::for_size(x.rows()))?)
}

/// Self-supervised embeddings from attributes alone.
pub fn embed(
    view: EdgelessView<'_>,
    cfg: &ExperimentConfig,
    seed: u64,
    views: Option<&ViewPair>,
) -> Result<(DenseMatrix, TrainState), CliError> {
    let owned;
    let views = match views {
        Some(v) => v,
        None => {
            owned = build_views(view.features, cfg, seed)?;
            &owned
        }
    };
    let state = train(view.features, views, &cfg.train_config(seed)).map_err(slp_core::Error::from)?;
    let emb = final_embeddings(view.features, views, &state)?;
    Ok((emb, state))
}

fn rank(
    h: &DenseMatrix,
    metric: SimilarityMetric,
    pairs: &[Edge],
    labels: &[bool],
) -> Result<RankingMetrics, CliError> {
    let s = orient_scores(&similarity_scores(h, metric, Some(pairs))?);
    Ok(RankingMetrics {
        auc: auc(&s.scores, labels)?,
        ap: ap(&s.scores, labels)?,
    })
}

fn rel(base: &Path, p: &Path) -> String {
    p.strip_prefix(base).unwrap_or(p).to_string_lossy().into_owned()
}

struct RunContext<'a> {
    cfg: &'a ExperimentConfig,
    graph: &'a AttributedGraph,
    shared_views: Option<&'a ViewPair>,
    exp_dir: &'a Path,
}

fn run_one(ctx: &RunContext<'_>, repeat: usize) -> RunRecord {
    let cfg = ctx.cfg;
    let seed = cfg.run_seed(repeat);
    let eval_seed = cfg.eval_seed(repeat);
    let start = Instant::now();
    match run_one_inner(ctx, repeat, seed, eval_seed) {
        Ok(mut r) => {
            r.wall_time_s = start.elapsed().as_secs_f64();
            r
        }
        Err(e) => {
            let mut r = RunRecord::failed(repeat, seed, eval_seed, e.to_string());
            r.wall_time_s = start.elapsed().as_secs_f64();
            r
        }
    }
}

fn run_one_inner(ctx: &RunContext<'_>, repeat: usize, seed: u64, eval_seed: u64) -> Result<RunRecord, CliError> {
    let cfg = ctx.cfg;
    let g = ctx.graph;
    let run_dir = ctx
        .exp_dir
        .join(format!("run-{}", short_hash(format!("{}seed = {seed}\n", cfg.to_toml()).as_bytes(), 12)));
    std::fs::create_dir_all(&run_dir).map_err(|e| io_err(&run_dir, e))?;
    let mut artifacts = Artifacts {
        dir: rel(ctx.exp_dir, &run_dir),
        ..Artifacts::default()
    };

    // everything up to here sees attributes only
    let trained = if cfg.mode.runs_three_slp() {
        Some(embed(g.edgeless(), cfg, seed, ctx.shared_views)?)
    } else {
        None
    };

    let pairs = sample_eval_pairs(g, cfg.eval_ratio, eval_seed)?;
    let (pair_list, labels) = pairs.labeled();
    let mut record = RunRecord::failed(repeat, seed, eval_seed, String::new());
    record.ok = true;
    record.error = None;

    if cfg.mode.runs_psc_na() {
        record.psc_na = Some(rank(g.features(), cfg.metric, &pair_list, &labels)?);
    }
    if let Some((emb, state)) = &trained {
        record.three_slp = Some(rank(emb, cfg.metric, &pair_list, &labels)?);
        record.final_loss = state.loss_trace.last().copied();
        let loss = run_dir.join("loss.csv");
        write_loss_csv(&loss, &state.loss_trace)?;
        artifacts.loss_csv = Some(rel(ctx.exp_dir, &loss));
        if cfg.checkpoints {
            let path = run_dir.join("checkpoint.bin");
            let mut buf = Vec::new();
            save_state(&mut buf, state)?;
            std::fs::write(&path, buf).map_err(|e| io_err(&path, e))?;
            artifacts.checkpoint = Some(rel(ctx.exp_dir, &path));
        }
        if cfg.export_predictions || cfg.downstream {
            let all = similarity_scores(emb, cfg.metric, None)?;
            let links = cluster_links(&all, g.n())?;
            record.predicted_edges = Some(links.adjacency.edge_count());
            if let Some(lab) = g.labels() {
                let edges = links.edges();
                if !edges.is_empty() {
                    record.predicted_aac = Some(aac(&edges, lab)?.value);
                }
                if cfg.downstream {
                    let dc = cfg.downstream_config(seed);
                    let x = g.features();
                    record.downstream = Some(DownstreamRecord {
                        accuracy: downstream_node_classification(&links.adjacency, x, lab, &dc)?.accuracy,
                        empty_graph_accuracy: downstream_node_classification(&Adjacency::empty(g.n()), x, lab, &dc)?
                            .accuracy,
                    });
                }
            }
            if cfg.export_predictions {
                export_predictions(&run_dir, &all, &links)?;
                artifacts.edges_tsv = Some(rel(ctx.exp_dir, &run_dir.join("edges.tsv")));
                artifacts.scores_csv = Some(rel(ctx.exp_dir, &run_dir.join("scores.csv")));
            }
        }
    }
    record.artifacts = artifacts;
    Ok(record)
}

/// Directory of an experiment, addressed by the hash of its effective config.
pub fn experiment_dir(out: &Path, cfg: &ExperimentConfig) -> PathBuf {
    out.join(format!("exp-{}", short_hash(cfg.to_toml().as_bytes(), 16)))
}

/// Run every repeat (up to `jobs` at once), write artifacts under `out`, and return the report.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, jobs: usize) -> Result<ExperimentReport, CliError> {
    cfg.validate()?;
    let graph = load_graph(cfg)?;
    run_experiment_on(cfg, &graph, out, jobs)
}

/// As [`run_experiment`] with an already loaded graph.
pub fn run_experiment_on(
    cfg: &ExperimentConfig,
    graph: &AttributedGraph,
    out: &Path,
    jobs: usize,
) -> Result<ExperimentReport, CliError> {
    cfg.validate()?;
    if !graph.has_truth_edges() {
        return Err(CliError::Data(format!("{} has no truth edges to evaluate against", graph.name())));
    }
    let exp_dir = experiment_dir(out, cfg);
    std::fs::create_dir_all(&exp_dir).map_err(|e| io_err(&exp_dir, e))?;

    // the initial structure is seed-independent unless it is random
    let shared = if cfg.mode.runs_three_slp() && cfg.init != InitKind::Random {
        Some(build_views(graph.features(), cfg, cfg.seed)?)
    } else {
        None
    };
    let ctx = RunContext {
        cfg,
        graph,
        shared_views: shared.as_ref(),
        exp_dir: &exp_dir,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let runs: Vec<RunRecord> = pool.install(|| (0..cfg.repeats).into_par_iter().map(|r| run_one(&ctx, r)).collect());

    let mut notices = Vec::new();
    let homophily = match (graph.labels(), graph.truth_edges_for_evaluation()) {
        (Some(labels), Some(edges)) if !edges.is_empty() => Some(homophily_report(edges, labels)?),
        (None, _) => {
            notices.push("no labels: attribute assortativity skipped".to_string());
            None
        }
        _ => None,
    };
    for r in runs.iter().filter(|r| !r.ok) {
        notices.push(format!("repeat {} (seed {}) failed: {}", r.repeat, r.seed, r.error.as_deref().unwrap_or("")));
    }
    let report = ExperimentReport {
        config: cfg.clone(),
        dataset: DatasetSummary {
            name: graph.name().to_string(),
            n: graph.n(),
            d: graph.feature_dim(),
            edges: graph.truth_edges_for_evaluation().map(|e| e.len()),
            classes: graph.num_classes(),
        },
        aggregates: aggregate(&runs),
        runs,
        homophily,
        notices,
        environment: Environment::current(),
        run_dir: exp_dir.to_string_lossy().into_owned(),
    };
    report.write(&exp_dir)?;
    Ok(report)
}
