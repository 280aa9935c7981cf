//! Conversion of raw citation-network exports into the canonical layout.
//!
//! Input is the common two-file format: a content file with one
//! `id<ws>feature...<ws>class` line per node and a citation file with one
//! `id<ws>id` line per link. Node order follows the content file; classes are
//! numbered in sorted name order; links naming unknown ids are dropped.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use slp_core::graph::save_dataset;
use slp_core::{AttributedGraph, DenseMatrix};

use crate::{io_err, CliError};

#[derive(Clone, Debug, PartialEq)]
pub struct PrepareSummary {
    pub nodes: usize,
    pub features: usize,
    pub edges: usize,
    pub classes: usize,
    pub dropped_links: usize,
}

pub fn parse_content_cites(name: &str, content: &str, cites: &str) -> Result<(AttributedGraph, usize), CliError> {
    let mut ids = HashMap::new();
    let mut rows = Vec::new();
    let mut class_names = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 3 {
            return Err(CliError::Data(format!("content line {}: expected id, features, class", line_no + 1)));
        }
        let row = fields[1..fields.len() - 1]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Data(format!("content line {}: {e}", line_no + 1)))?;
        if ids.insert(fields[0].to_string(), rows.len()).is_some() {
            return Err(CliError::Data(format!("content line {}: duplicate id {}", line_no + 1, fields[0])));
        }
        rows.push(row);
        class_names.push(fields[fields.len() - 1].to_string());
    }
    let classes: Vec<String> = class_names.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let labels = class_names
        .iter()
        .map(|c| classes.binary_search(c).expect("class collected above"))
        .collect();
    let features = DenseMatrix::from_rows(&rows)?;

    let mut edges = Vec::new();
    let mut dropped = 0;
    for (line_no, line) in cites.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            [a, b] => match (ids.get(*a), ids.get(*b)) {
                (Some(&u), Some(&v)) if u != v => edges.push((u, v)),
                _ => dropped += 1,
            },
            _ => return Err(CliError::Data(format!("cites line {}: expected two ids", line_no + 1))),
        }
    }
    Ok((AttributedGraph::new(name, features, Some(edges), Some(labels))?, dropped))
}

/// Convert and write `out/{features,edges,labels}.tsv` and `meta.json`.
pub fn prepare_content_cites(name: &str, content: &Path, cites: &Path, out: &Path) -> Result<PrepareSummary, CliError> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| io_err(p, e));
    let (g, dropped) = parse_content_cites(name, &read(content)?, &read(cites)?)?;
    save_dataset(&g, out)?;
    Ok(PrepareSummary {
        nodes: g.n(),
        features: g.feature_dim(),
        edges: g.truth_edges_for_evaluation().map_or(0, |e| e.len()),
        classes: g.num_classes().unwrap_or(0),
        dropped_links: dropped,
    })
}
