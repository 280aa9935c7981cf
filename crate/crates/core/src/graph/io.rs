//! Dataset directory format.
//!
//! ```text
//! features.tsv   node_index<TAB>v1<TAB>...<TAB>vd     (indices 0..n-1, ascending)
//! edges.tsv      u<TAB>v                              (optional, undirected)
//! labels.tsv     node_index<TAB>class_index           (optional)
//! meta.json      {"name": str, "n": int, "d": int}    (optional, validated)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Duplicate and
//! reversed edges collapse to one undirected edge; self-pairs are dropped.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AttributedGraph, Edge};
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    name: String,
    n: usize,
    d: usize,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn parse_index(path: &Path, line: usize, field: &str) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|_| parse_err(path, line, format!("expected a node index, found {field:?}")))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_features(path: &Path) -> Result<DenseMatrix> {
    let text = read(path)?;
    let mut width: Option<usize> = None;
    let mut data = Vec::new();
    let mut rows = 0;
    for (line, l) in data_lines(&text) {
        let mut fields = l.split('\t');
        let idx = parse_index(path, line, fields.next().unwrap_or(""))?;
        if idx != rows {
            return Err(parse_err(
                path,
                line,
                format!("node index {idx} out of sequence, expected {rows}"),
            ));
        }
        let before = data.len();
        for f in fields {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| parse_err(path, line, format!("non-numeric feature {f:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(path, line, format!("non-finite feature {f:?}")));
            }
            data.push(v);
        }
        let got = data.len() - before;
        match width {
            None => width = Some(got),
            Some(w) if w != got => {
                return Err(parse_err(
                    path,
                    line,
                    format!("ragged row: {got} features, expected {w}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_err(path, 0, "no feature rows"));
    }
    DenseMatrix::new(rows, width.unwrap_or(0), data)
}

fn parse_edges(path: &Path, n: usize) -> Result<Vec<Edge>> {
    let text = read(path)?;
    let mut edges = Vec::new();
    for (line, l) in data_lines(&text) {
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_err(
                path,
                line,
                format!("expected 2 fields, found {}", fields.len()),
            ));
        }
        let u = parse_index(path, line, fields[0])?;
        let v = parse_index(path, line, fields[1])?;
        if u >= n || v >= n {
            return Err(parse_err(
                path,
                line,
                format!("endpoint out of range in ({u}, {v}); graph has {n} nodes"),
            ));
        }
        if u != v {
            edges.push((u.min(v), u.max(v)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(edges)
}

fn parse_labels(path: &Path, n: usize) -> Result<Vec<usize>> {
    let text = read(path)?;
    let mut labels: Vec<Option<usize>> = vec![None; n];
    for (line, l) in data_lines(&text) {
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_err(
                path,
                line,
                format!("expected 2 fields, found {}", fields.len()),
            ));
        }
        let node = parse_index(path, line, fields[0])?;
        if node >= n {
            return Err(parse_err(path, line, format!("node {node} out of range")));
        }
        let class = fields[1]
            .trim()
            .parse::<usize>()
            .map_err(|_| parse_err(path, line, format!("expected a class index, found {:?}", fields[1])))?;
        labels[node] = Some(class);
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| parse_err(path, 0, format!("node {i} has no label"))))
        .collect()
}

/// Load a dataset directory.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<AttributedGraph> {
    let dir = dir.as_ref();
    let features = parse_features(&dir.join("features.tsv"))?;
    let n = features.rows();

    let edges_path = dir.join("edges.tsv");
    let edges = if edges_path.exists() {
        Some(parse_edges(&edges_path, n)?)
    } else {
        None
    };
    let labels_path = dir.join("labels.tsv");
    let labels = if labels_path.exists() {
        Some(parse_labels(&labels_path, n)?)
    } else {
        None
    };

    let meta_path = dir.join("meta.json");
    let name = if meta_path.exists() {
        let meta: Meta = serde_json::from_str(&read(&meta_path)?)
            .map_err(|e| parse_err(&meta_path, e.line(), e.to_string()))?;
        if meta.n != n || meta.d != features.cols() {
            return Err(parse_err(
                &meta_path,
                1,
                format!(
                    "meta declares n={}, d={} but features.tsv has n={n}, d={}",
                    meta.n,
                    meta.d,
                    features.cols()
                ),
            ));
        }
        meta.name
    } else {
        dir.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    };
    AttributedGraph::new(name, features, edges, labels)
}

fn create(path: PathBuf) -> Result<std::io::BufWriter<fs::File>> {
    fs::File::create(&path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_edges_tsv(path: impl AsRef<Path>, edges: &[Edge]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path.to_path_buf())?;
    for (u, v) in edges {
        writeln!(w, "{u}\t{v}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write a graph in the canonical layout (creates `dir` if needed).
pub fn save_dataset(g: &AttributedGraph, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let fpath = dir.join("features.tsv");
    let mut w = create(fpath.clone())?;
    for i in 0..g.n() {
        let mut line = i.to_string();
        for v in g.features().row(i) {
            line.push('\t');
            // `{}` on f64 is the shortest round-trip representation
            line.push_str(&v.to_string());
        }
        writeln!(w, "{line}").map_err(|e| Error::io(&fpath, e))?;
    }
    w.flush().map_err(|e| Error::io(&fpath, e))?;

    if let Some(edges) = g.truth_edges.as_deref() {
        write_edges_tsv(dir.join("edges.tsv"), edges)?;
    }
    if let Some(labels) = g.labels() {
        let lpath = dir.join("labels.tsv");
        let mut w = create(lpath.clone())?;
        for (i, c) in labels.iter().enumerate() {
            writeln!(w, "{i}\t{c}").map_err(|e| Error::io(&lpath, e))?;
        }
        w.flush().map_err(|e| Error::io(&lpath, e))?;
    }
    let meta = Meta {
        name: g.name().to_string(),
        n: g.n(),
        d: g.feature_dim(),
    };
    let mpath = dir.join("meta.json");
    fs::write(&mpath, serde_json::to_string_pretty(&meta).expect("meta serializes"))
        .map_err(|e| Error::io(mpath, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let features = DenseMatrix::from_rows(&[
            vec![0.1, 1.0 / 3.0],
            vec![-2.5, 0.0],
            vec![1e-17, 7.0],
        ])
        .unwrap();
        let g = AttributedGraph::new("tiny", features, Some(vec![(0, 1), (2, 1)]), Some(vec![0, 1, 1])).unwrap();
        save_dataset(&g, dir.path()).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn duplicate_and_reversed_edges_collapse() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "features.tsv", "0\t1\n1\t2\n");
        write(dir.path(), "edges.tsv", "0\t1\n1\t0\n");
        let g = load_dataset(dir.path()).unwrap();
        assert_eq!(g.truth_edges_for_evaluation().unwrap(), &[(0, 1)]);
    }

    #[test]
    fn out_of_range_endpoint_names_line() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "features.tsv", "0\t1\n1\t2\n");
        write(dir.path(), "edges.tsv", "0\t1\n# comment\n1\t2\n");
        match load_dataset(dir.path()) {
            Err(Error::Parse { line, path, .. }) => {
                assert_eq!(line, 3);
                assert!(path.ends_with("edges.tsv"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_and_non_numeric_rows() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "features.tsv", "0\t1\t2\n1\t2\n");
        assert!(matches!(load_dataset(dir.path()), Err(Error::Parse { line: 2, .. })));
        write(dir.path(), "features.tsv", "0\t1\t2\n1\tx\t2\n");
        assert!(matches!(load_dataset(dir.path()), Err(Error::Parse { line: 2, .. })));
        write(dir.path(), "features.tsv", "0\t1\n2\t2\n");
        assert!(matches!(load_dataset(dir.path()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn meta_is_validated() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "features.tsv", "0\t1\n1\t2\n");
        write(dir.path(), "meta.json", r#"{"name": "x", "n": 3, "d": 1}"#);
        assert!(matches!(load_dataset(dir.path()), Err(Error::Parse { .. })));
        write(dir.path(), "meta.json", r#"{"name": "x", "n": 2, "d": 1}"#);
        assert_eq!(load_dataset(dir.path()).unwrap().name(), "x");
    }
}
