//! Homophily and spectrum diagnostics of a dataset under the configured pipeline.

use serde::{Deserialize, Serialize};
use slp_core::eval::{homophily_report, spectrum_alignment, HomophilyReport, SpectrumReport};
use slp_core::graph::Adjacency;
use slp_core::AttributedGraph;

use crate::config::ExperimentConfig;
use crate::pipeline::build_views;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub dataset: String,
    pub homophily: Option<HomophilyReport>,
    pub spectrum: Option<SpectrumReport>,
    pub notices: Vec<String>,
}

/// Truth-edge homophily and, when `spectrum` is set, the alignment between
/// the truth adjacency and the first diffusion view.
pub fn analyze(g: &AttributedGraph, cfg: &ExperimentConfig, spectrum: bool) -> Result<AnalysisReport, CliError> {
    let edges = g
        .truth_edges_for_evaluation()
        .ok_or_else(|| CliError::Data(format!("{} has no truth edges", g.name())))?;
    let mut notices = Vec::new();
    let homophily = match g.labels() {
        Some(labels) if !edges.is_empty() => Some(homophily_report(edges, labels)?),
        Some(_) => {
            notices.push("no truth edges: homophily skipped".into());
            None
        }
        None => {
            notices.push("no labels: attribute assortativity skipped".into());
            None
        }
    };
    let spectrum = if spectrum {
        let a = Adjacency::from_edges(g.n(), edges)?;
        let views = build_views(g.features(), cfg, cfg.seed)?;
        Some(spectrum_alignment(a.matrix(), &views.view1)?)
    } else {
        None
    };
    Ok(AnalysisReport {
        dataset: g.name().to_string(),
        homophily,
        spectrum,
        notices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use slp_core::graph::{generate_synthetic, SyntheticSpec};
    use slp_core::DenseMatrix;

    #[test]
    fn perfectly_homophilic_synthetic() {
        let g = generate_synthetic(&SyntheticSpec {
            n: 40,
            classes: 2,
            intra_p: 0.3,
            inter_p: 0.0,
            d: 8,
            signal: 0.5,
            seed: 1,
        })
        .unwrap();
        let cfg = ExperimentConfig::default();
        let r = analyze(&g, &cfg, true).unwrap();
        assert!((r.homophily.unwrap().aac - 1.0).abs() < 1e-10);
        let s = r.spectrum.unwrap();
        assert!((0.0..=1.0).contains(&s.alignment));
    }

    #[test]
    fn star_and_missing_labels() {
        let g = AttributedGraph::new("star", DenseMatrix::identity(4), Some(vec![(0, 1), (0, 2), (0, 3)]), None)
            .unwrap();
        let r = analyze(&g, &ExperimentConfig::default(), false).unwrap();
        assert!(r.homophily.is_none() && !r.notices.is_empty());
        let g = AttributedGraph::new(
            "star",
            DenseMatrix::identity(4),
            Some(vec![(0, 1), (0, 2), (0, 3)]),
            Some(vec![0, 1, 1, 1]),
        )
        .unwrap();
        let r = analyze(&g, &ExperimentConfig::default(), false).unwrap();
        assert!((r.homophily.unwrap().dac.unwrap() + 1.0).abs() < 1e-10);
    }
}
