//! Reader and writer for the TU Dortmund multi-file graph dataset format.
//!
//! A dataset `NAME` lives in one directory as
//!
//! * `NAME_A.txt`: one `i, j` edge per line, 1-based global node ids,
//! * `NAME_graph_indicator.txt`: line `n` holds the graph id of node `n`,
//! * `NAME_graph_labels.txt`: line `g` holds the class of graph `g`,
//! * `NAME_node_labels.txt` (optional): line `n` holds the label of node `n`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{Graph, LabeledDataset};

struct Lines {
    path: PathBuf,
    lines: Vec<(usize, String)>,
}

impl Lines {
    fn read(path: PathBuf, required: bool) -> Result<Option<Self>> {
        if !path.is_file() {
            return if required {
                Err(Error::MissingFile(path))
            } else {
                Ok(None)
            };
        }
        let text = fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        let mut lines: Vec<(usize, String)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim().to_owned()))
            .collect();
        while lines.last().is_some_and(|(_, l)| l.is_empty()) {
            lines.pop();
        }
        Ok(Some(Self { path, lines }))
    }

    fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            file: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn int<T: std::str::FromStr>(&self, line: usize, token: &str) -> Result<T> {
        token
            .trim()
            .parse()
            .map_err(|_| self.error(line, format!("expected an integer, found {token:?}")))
    }

    /// One integer per line.
    fn column<T: std::str::FromStr>(&self) -> Result<Vec<T>> {
        self.lines
            .iter()
            .map(|(line, text)| {
                // some label files carry extra comma-separated columns; the first one is the label
                let first = text.split(',').next().unwrap_or("");
                self.int(*line, first)
            })
            .collect()
    }
}

fn dataset_file(root: &Path, name: &str, suffix: &str) -> PathBuf {
    root.join(format!("{name}_{suffix}.txt"))
}

/// Parses dataset `name` from directory `root`.
///
/// Node ids are renumbered from 0 inside each graph, in increasing global id
/// order. When the node label file is absent every label is 0.
pub fn parse_tud_dataset(root: &Path, name: &str) -> Result<LabeledDataset> {
    let edges_file = Lines::read(dataset_file(root, name, "A"), true)?.expect("required");
    let indicator_file =
        Lines::read(dataset_file(root, name, "graph_indicator"), true)?.expect("required");
    let graph_labels_file =
        Lines::read(dataset_file(root, name, "graph_labels"), true)?.expect("required");
    let node_labels_file = Lines::read(dataset_file(root, name, "node_labels"), false)?;

    let indicator: Vec<usize> = indicator_file.column()?;
    let class_labels: Vec<i64> = graph_labels_file.column()?;
    let graph_count = class_labels.len();
    let node_count = indicator.len();

    for (k, &gid) in indicator.iter().enumerate() {
        if gid == 0 || gid > graph_count {
            let line = indicator_file.lines[k].0;
            return Err(indicator_file.error(
                line,
                format!("graph id {gid} outside 1..={graph_count} (graph label count)"),
            ));
        }
    }

    let node_labels: Vec<u64> = match &node_labels_file {
        Some(file) => {
            let labels: Vec<u64> = file.column()?;
            if labels.len() != node_count {
                return Err(file.error(
                    labels.len(),
                    format!("{} node labels for {node_count} nodes", labels.len()),
                ));
            }
            labels
        }
        None => vec![0; node_count],
    };

    // local index of each global node inside its graph
    let mut local = vec![0usize; node_count];
    let mut sizes = vec![0usize; graph_count];
    for (k, &gid) in indicator.iter().enumerate() {
        local[k] = sizes[gid - 1];
        sizes[gid - 1] += 1;
    }
    let mut labels: Vec<Vec<u64>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    for (k, &gid) in indicator.iter().enumerate() {
        labels[gid - 1].push(node_labels[k]);
    }

    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph_count];
    for (line, text) in &edges_file.lines {
        let mut parts = text.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(edges_file.error(*line, format!("expected \"i, j\", found {text:?}")));
        };
        let a: usize = edges_file.int(*line, a)?;
        let b: usize = edges_file.int(*line, b)?;
        for id in [a, b] {
            if id == 0 || id > node_count {
                return Err(edges_file.error(*line, format!("unknown node {id}")));
            }
        }
        let (ga, gb) = (indicator[a - 1], indicator[b - 1]);
        if ga != gb {
            return Err(edges_file.error(
                *line,
                format!("edge joins node {a} of graph {ga} with node {b} of graph {gb}"),
            ));
        }
        // self-loops are dropped; the graph model is simple
        if a != b {
            edges[ga - 1].push((local[a - 1], local[b - 1]));
        }
    }

    let graphs = labels
        .into_iter()
        .zip(edges)
        .map(|(l, e)| Graph::from_edges(l, e))
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(name, graphs, class_labels)
}

/// Writes `ds` in TUD format under `root` using `ds.name` as file prefix.
/// Each undirected edge is written in both directions, as TUD files do.
pub fn write_tud_dataset(ds: &LabeledDataset, root: &Path) -> Result<()> {
    let io = |path: PathBuf| move |source| Error::Io { path, source };
    fs::create_dir_all(root).map_err(io(root.to_path_buf()))?;

    let mut a = String::new();
    let mut indicator = String::new();
    let mut node_labels = String::new();
    let mut offset = 0usize;
    for (gi, g) in ds.graphs().iter().enumerate() {
        for v in 0..g.node_count() {
            indicator.push_str(&format!("{}\n", gi + 1));
            node_labels.push_str(&format!("{}\n", g.label(v)));
        }
        for (u, v) in g.edges() {
            a.push_str(&format!("{}, {}\n", offset + u + 1, offset + v + 1));
            a.push_str(&format!("{}, {}\n", offset + v + 1, offset + u + 1));
        }
        offset += g.node_count();
    }
    let graph_labels: String = ds.class_labels().iter().map(|c| format!("{c}\n")).collect();

    for (suffix, body) in [
        ("A", a),
        ("graph_indicator", indicator),
        ("graph_labels", graph_labels),
        ("node_labels", node_labels),
    ] {
        let path = dataset_file(root, &ds.name, suffix);
        fs::write(&path, body).map_err(io(path.clone()))?;
    }
    Ok(())
}
