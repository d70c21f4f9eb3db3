//! Refinements of a decomposition of `H^K` into a decomposition of the
//! meta-node graph `H` with few colors: deterministic ball growing, and
//! exponential-shift ball carving amplified by parallel runs.

pub mod ballgrow;
pub mod carve;
pub mod carving;
pub mod meta;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

pub use ballgrow::{ball_grow_refine, ball_separation};
pub use carve::{
    carve_step, exp_from_uniform, gap_probability_check, sample_exp, to_fixed, CarveParams,
    GapEstimate, Outcome, StepResult,
};
pub use carving::{carve_decompose, CarveConfig, RunDiagnostic};
pub use meta::MetaGraph;

use crate::cluster::{Cluster, Decomposition};
use crate::error::{Error, Result};
use crate::graph::{Graph, UNREACHED};
use crate::netdecomp::{decompose, DetConfig, Mode};
use crate::sim::{RoundStats, SimConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RefinePhaseLog {
    pub phase: usize,
    pub remaining_at_start: usize,
    pub clustered: usize,
    pub deactivated: usize,
    /// Ball growing: most hops any ball grew. Carving: 0.
    pub max_growth: u32,
    /// Carving: extra attempts with fresh streams. Ball growing: 0.
    pub retries: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineOutput {
    /// Decomposition of `H` with separation 1, one color per phase.
    pub decomposition: Decomposition,
    pub phases: Vec<RefinePhaseLog>,
    /// Largest strong diameter in `H` of an output cluster.
    pub max_strong_diameter: u32,
    /// Carving only: per-run diagnostics, in execution order.
    pub runs: Vec<RunDiagnostic>,
    /// Rounds on `H` (one `H`-round costs `O(r)` rounds of G), modeled from
    /// the message widths and frame lengths of the procedure.
    pub stats: RoundStats,
}

/// Decomposition of `H^k` by the deterministic algorithm run on `H`.
pub fn intermediate_decomposition(h: &Graph, k: u32, mode: Mode) -> Result<Decomposition> {
    let cfg = DetConfig {
        k,
        mode,
        sim: SimConfig::for_graph(h),
    };
    Ok(decompose(h, &cfg, None)?.decomposition)
}

/// Clusters of `H` with the given color, one per connected component of
/// `H[nodes]`, each centered at its smallest identifier with a BFS tree.
pub(crate) fn component_clusters(h: &Graph, nodes: &[usize], color: u64) -> Vec<Cluster> {
    let mut inside = vec![false; h.n()];
    for &v in nodes {
        inside[v] = true;
    }
    let mut seen = vec![false; h.n()];
    let mut order: Vec<usize> = nodes.to_vec();
    order.sort_by_key(|&v| h.id(v));
    let mut out = Vec::new();
    for &start in &order {
        if seen[start] {
            continue;
        }
        let (members, edges) = bfs_tree(h, start, &inside);
        for &m in &members {
            seen[m] = true;
        }
        let mut c = Cluster::new(h, start, members, edges);
        c.color = Some(color);
        out.push(c);
    }
    out
}

/// BFS tree from `root` inside `allowed`: reached nodes and tree edges.
pub(crate) fn bfs_tree(
    h: &Graph,
    root: usize,
    allowed: &[bool],
) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut dist = vec![UNREACHED; h.n()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut members = vec![root];
    let mut edges = Vec::new();
    while let Some(u) = queue.pop_front() {
        for &w in h.neighbors(u) {
            if allowed[w] && dist[w] == UNREACHED {
                dist[w] = dist[u] + 1;
                members.push(w);
                edges.push((u, w));
                queue.push_back(w);
            }
        }
    }
    (members, edges)
}

/// Strong diameter of a connected member set.
pub(crate) fn strong_diameter(h: &Graph, members: &[usize]) -> u32 {
    let mut inside = vec![false; h.n()];
    for &v in members {
        inside[v] = true;
    }
    members
        .iter()
        .map(|&v| {
            let d = crate::graph::bfs_within(h, &[v], UNREACHED - 1, &|w| inside[w]);
            members.iter().map(|&w| d[w]).max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

/// Checks that `dec` partitions `H`, every cluster is colored, and returns
/// cluster indices grouped by ascending color.
pub(crate) fn color_classes(h: &Graph, dec: &Decomposition) -> Result<BTreeMap<u64, Vec<usize>>> {
    let mut seen = vec![false; h.n()];
    let mut classes: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, c) in dec.clusters.iter().enumerate() {
        let color = c.color.ok_or_else(|| {
            Error::InvalidParams(format!("intermediate cluster {} has no color", c.id))
        })?;
        for &m in &c.members {
            if m >= h.n() || std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidParams(format!(
                    "node {m} repeated or unknown in intermediate"
                )));
            }
        }
        classes.entry(color).or_default().push(i);
    }
    if let Some(v) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidParams(format!(
            "intermediate misses node {v}"
        )));
    }
    for list in classes.values_mut() {
        list.sort_by_key(|&i| dec.clusters[i].id);
    }
    Ok(classes)
}

/// Errors unless clusters with the same color are pairwise non-adjacent.
pub(crate) fn check_non_adjacent(h: &Graph, clusters: &[Cluster]) -> Result<()> {
    let mut of = vec![usize::MAX; h.n()];
    for (i, c) in clusters.iter().enumerate() {
        for &m in &c.members {
            of[m] = i;
        }
    }
    for (a, b) in h.edges() {
        let (x, y) = (of[a], of[b]);
        if x != usize::MAX && y != usize::MAX && x != y && clusters[x].color == clusters[y].color {
            return Err(Error::Invariant(format!(
                "same-color clusters {} and {} are adjacent",
                clusters[x].id, clusters[y].id
            )));
        }
    }
    Ok(())
}
