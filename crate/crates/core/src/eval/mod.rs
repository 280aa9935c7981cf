//! Ranking metrics, homophily diagnostics, spectrum alignment, evaluation
//! pair sampling and the downstream node-classification experiment.

mod downstream;
mod homophily;
mod pairs;
mod ranking;
mod spectrum;

pub use downstream::{
    classifier_objective, downstream_node_classification, split_nodes, DownstreamConfig, DownstreamResult,
};
pub use homophily::{aac, dac, homophily_report, mixing_matrix, AacResult, HomophilyReport};
pub use pairs::{sample_eval_pairs, EvalPairs};
pub use ranking::{ap, auc};
pub use spectrum::{spectrum_alignment, SpectrumReport, SPECTRUM_TOL};
