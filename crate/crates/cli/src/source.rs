//! Graph sources: a file on disk or a seeded generator spec.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use netdecomp::graph::{
    generate_graph, load_graph, with_random_weights, Graph, GraphFormat, GraphModel,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphSource {
    File { path: PathBuf },
    Generator { spec: String, model: GraphModel },
}

impl GraphSource {
    pub fn file(path: &Path) -> Self {
        GraphSource::File {
            path: path.to_path_buf(),
        }
    }

    pub fn generator(spec: &str) -> Result<Self> {
        Ok(GraphSource::Generator {
            spec: spec.to_string(),
            model: parse_gen(spec)?,
        })
    }

    /// Files ignore the seed; generators draw the graph from it. With
    /// `weighted`, generated graphs get seeded distinct weights and files
    /// must already carry weights.
    pub fn load(&self, seed: u64, weighted: bool) -> Result<Graph> {
        match self {
            GraphSource::File { path } => {
                let format = match path.extension().and_then(|e| e.to_str()) {
                    Some("json") => GraphFormat::Json,
                    _ => GraphFormat::EdgeList,
                };
                let g = load_graph(path, format)
                    .with_context(|| format!("loading {}", path.display()))?;
                if weighted && !g.is_weighted() {
                    bail!("{} has no edge weights", path.display());
                }
                Ok(g)
            }
            GraphSource::Generator { model, .. } => {
                let g = generate_graph(model, seed)?;
                if weighted && g.edge_count() > 0 {
                    Ok(with_random_weights(g, seed)?)
                } else {
                    Ok(g)
                }
            }
        }
    }
}

/// `gnp:n=500,p=0.02[,connected]`, `grid:rows=8,cols=8`, `path:n=9`,
/// `tree:n=100`, `clique:n=6`.
pub fn parse_gen(spec: &str) -> Result<GraphModel> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut n = None;
    let mut p = None;
    let mut rows = None;
    let mut cols = None;
    let mut connected = false;
    for part in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once('=') {
            Some(("n", v)) => n = Some(v.parse::<usize>().context("n")?),
            Some(("p", v)) => p = Some(v.parse::<f64>().context("p")?),
            Some(("rows", v)) => rows = Some(v.parse::<usize>().context("rows")?),
            Some(("cols", v)) => cols = Some(v.parse::<usize>().context("cols")?),
            None if part == "connected" => connected = true,
            _ => bail!("unknown generator parameter {part:?} in {spec:?}"),
        }
    }
    let need = |x: Option<usize>, name: &str| x.with_context(|| format!("{kind} needs {name}="));
    Ok(match kind {
        "gnp" => GraphModel::Gnp {
            n: need(n, "n")?,
            p: p.context("gnp needs p=")?,
            connected,
        },
        "grid" => GraphModel::Grid {
            rows: need(rows, "rows")?,
            cols: need(cols, "cols")?,
        },
        "path" => GraphModel::Path { n: need(n, "n")? },
        "tree" => GraphModel::Tree { n: need(n, "n")? },
        "clique" => GraphModel::Clique { n: need(n, "n")? },
        _ => bail!("unknown generator {kind:?}"),
    })
}

/// `3`, `0,4,7` or `0..10` (exclusive end).
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (
                a.parse().context("seed range start")?,
                b.parse().context("seed range end")?,
            );
            if a >= b {
                bail!("empty seed range {part:?}");
            }
            out.extend(a..b);
        } else {
            out.push(part.parse().with_context(|| format!("seed {part:?}"))?);
        }
    }
    if out.is_empty() {
        bail!("no seeds given");
    }
    Ok(out)
}
