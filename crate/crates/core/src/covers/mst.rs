//! Minimum spanning trees from a neighborhood cover. Every node knows the
//! MST-radius `mu`; each cover cluster computes the MST of its induced
//! subgraph, an edge left out by some cluster is excluded (rule A) and an
//! edge kept by every cluster holding it is included (rule B).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cover::cover_from_decomposition;
use crate::error::{Error, Result};
use crate::graph::{log_star, Graph, Weight};
use crate::netdecomp::{decompose, DetConfig, Mode};
use crate::sim::SimConfig;

fn norm(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

fn weights(g: &Graph) -> Result<Vec<(usize, usize, Weight)>> {
    if !g.is_weighted() {
        return Err(Error::InvalidParams("MST needs a weighted graph".into()));
    }
    Ok(g.weighted_edges()
        .into_iter()
        .map(|(u, v, w)| (u.min(v), u.max(v), w))
        .collect())
}

/// Minimum spanning forest by Kruskal; edges `(u, v)` with `u < v`, sorted.
pub fn kruskal_oracle(g: &Graph) -> Result<Vec<(usize, usize)>> {
    let mut edges = weights(g)?;
    edges.sort_by(|a, b| a.2.cmp(&b.2));
    let mut parent: Vec<usize> = (0..g.n()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut out = Vec::new();
    for (u, v, _) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            out.push((u, v));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Minimum spanning forest by Prim, one tree per component.
pub fn prim_oracle(g: &Graph) -> Result<Vec<(usize, usize)>> {
    weights(g)?;
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for root in 0..g.n() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut heap = BinaryHeap::new();
        let push = |heap: &mut BinaryHeap<_>, u: usize| {
            for &w in g.neighbors(u) {
                heap.push(Reverse((g.weight(u, w).expect("weighted"), u, w)));
            }
        };
        push(&mut heap, root);
        while let Some(Reverse((_, u, w))) = heap.pop() {
            if seen[w] {
                continue;
            }
            seen[w] = true;
            out.push(norm(u, w));
            push(&mut heap, w);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Shortest `u`-`v` hop distance using only edges lighter than `limit`.
fn lighter_distance(g: &Graph, u: usize, v: usize, limit: Weight) -> Option<u32> {
    let mut dist = vec![u32::MAX; g.n()];
    dist[u] = 0;
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        if x == v {
            return Some(dist[x]);
        }
        for &y in g.neighbors(x) {
            if dist[y] == u32::MAX && g.weight(x, y).expect("weighted") < limit {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    None
}

fn non_mst_edges(g: &Graph) -> Result<Vec<(usize, usize, Weight)>> {
    if !g.is_connected() {
        return Err(Error::InvalidParams(
            "MST-radius needs a connected graph".into(),
        ));
    }
    let tree: BTreeSet<(usize, usize)> = kruskal_oracle(g)?.into_iter().collect();
    Ok(weights(g)?
        .into_iter()
        .filter(|&(u, v, _)| !tree.contains(&(u, v)))
        .collect())
}

/// Largest, over non-MST edges `e`, of the shortest cycle in which `e` is
/// heaviest; 0 for trees. `None` when some cycle is longer than `cycle_cap`.
pub fn mst_radius(g: &Graph, cycle_cap: Option<u32>) -> Result<Option<u32>> {
    let mut mu = 0;
    for (u, v, w) in non_mst_edges(g)? {
        let d = lighter_distance(g, u, v, w).ok_or_else(|| {
            Error::Invariant(format!("non-MST edge ({u}, {v}) closes no lighter cycle"))
        })?;
        mu = mu.max(d + 1);
    }
    Ok(match cycle_cap {
        Some(cap) if mu > cap => None,
        _ => Some(mu),
    })
}

/// Same quantity by enumerating simple paths; exponential, for small graphs.
pub fn mst_radius_exhaustive(g: &Graph) -> Result<u32> {
    fn search(
        g: &Graph,
        x: usize,
        target: usize,
        limit: Weight,
        len: u32,
        on: &mut [bool],
        best: &mut u32,
    ) {
        if len >= *best {
            return;
        }
        if x == target {
            *best = len;
            return;
        }
        for &y in g.neighbors(x) {
            if !on[y] && g.weight(x, y).expect("weighted") < limit {
                on[y] = true;
                search(g, y, target, limit, len + 1, on, best);
                on[y] = false;
            }
        }
    }
    let mut mu = 0;
    for (u, v, w) in non_mst_edges(g)? {
        let mut on = vec![false; g.n()];
        on[u] = true;
        let mut best = u32::MAX;
        search(g, u, v, w, 0, &mut on, &mut best);
        if best == u32::MAX {
            return Err(Error::Invariant(format!(
                "non-MST edge ({u}, {v}) closes no lighter cycle"
            )));
        }
        mu = mu.max(best + 1);
    }
    Ok(mu)
}

/// Same quantity by inserting edges in weight order into an all-pairs hop
/// table: an edge whose endpoints are already joined closes a cycle of
/// length `dist + 1` in which it is heaviest. Quadratic per edge.
pub fn mst_radius_apsp(g: &Graph) -> Result<u32> {
    if !g.is_connected() {
        return Err(Error::InvalidParams(
            "MST-radius needs a connected graph".into(),
        ));
    }
    let n = g.n();
    let mut edges = weights(g)?;
    edges.sort_by(|a, b| a.2.cmp(&b.2));
    let inf = u32::MAX / 4;
    let mut dist = vec![inf; n * n];
    for v in 0..n {
        dist[v * n + v] = 0;
    }
    let mut mu = 0;
    for (u, v, _) in edges {
        let d = dist[u * n + v];
        if d < inf {
            mu = mu.max(d + 1);
        }
        let (du, dv): (Vec<u32>, Vec<u32>) = (
            (0..n).map(|a| dist[a * n + u]).collect(),
            (0..n).map(|b| dist[v * n + b]).collect(),
        );
        let (eu, ev): (Vec<u32>, Vec<u32>) = (
            (0..n).map(|a| dist[a * n + v]).collect(),
            (0..n).map(|b| dist[u * n + b]).collect(),
        );
        for a in 0..n {
            for b in 0..n {
                let via = (du[a] + 1 + dv[b]).min(eu[a] + 1 + ev[b]);
                if via < dist[a * n + b] {
                    dist[a * n + b] = via;
                }
            }
        }
    }
    Ok(mu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeClass {
    RuleAExcluded,
    RuleBIncluded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MstConfig {
    /// MST-radius handed to every node; computed centrally when absent.
    pub mu: Option<u32>,
    pub mode: Mode,
    pub sim: SimConfig,
}

impl MstConfig {
    pub fn new(g: &Graph) -> Self {
        Self {
            mu: None,
            mode: Mode::Simulated,
            sim: SimConfig::for_graph(g),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: u128,
    pub v: u128,
    pub weight: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverStats {
    pub k: u32,
    pub clusters: usize,
    pub sparsity: usize,
    pub diameter: u32,
    pub diameter_bound: u32,
    pub largest_cluster: usize,
    pub decomposition_rounds: usize,
    /// Modeled.
    pub cover_rounds: usize,
    /// Modeled: per color class, tree diameter plus `sqrt(|C|) log* |C|`.
    pub cluster_mst_rounds: usize,
    pub max_bits_per_edge_round: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MstResult {
    pub mst_edges: Vec<EdgeRecord>,
    pub excluded_edges: Vec<EdgeRecord>,
    pub mu: u32,
    pub cover_stats: CoverStats,
    pub matches_oracle: bool,
    /// Edges classified against the oracle, as `(u, v)` node indices.
    pub mismatches: Vec<(usize, usize)>,
    #[serde(skip)]
    pub tree: Vec<(usize, usize)>,
    #[serde(skip)]
    pub classes: BTreeMap<(usize, usize), EdgeClass>,
}

pub fn cover_mst(g: &Graph, cfg: &MstConfig) -> Result<MstResult> {
    weights(g)?;
    let mu = match cfg.mu {
        Some(mu) => mu,
        None => mst_radius(g, None)?.expect("no cap"),
    };
    let k = mu.max(1);
    let det = decompose(
        g,
        &DetConfig {
            k: 2 * k,
            mode: cfg.mode,
            sim: cfg.sim.clone(),
        },
        None,
    )?;
    let cover = cover_from_decomposition(g, k, &det.decomposition)?;
    let local: Vec<BTreeSet<(usize, usize)>> = cover
        .cover
        .clusters
        .par_iter()
        .map(|c| -> Result<BTreeSet<(usize, usize)>> {
            let (sub, back) = g.induced(&c.members);
            Ok(kruskal_oracle(&sub)?
                .into_iter()
                .map(|(a, b)| norm(back[a], back[b]))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (i, c) in cover.cover.clusters.iter().enumerate() {
        for &m in &c.members {
            holders[m].push(i);
        }
    }
    let truth: BTreeSet<(usize, usize)> = kruskal_oracle(g)?.into_iter().collect();
    let mut classes = BTreeMap::new();
    let mut mismatches = Vec::new();
    let (mut mst_edges, mut excluded_edges, mut tree) = (Vec::new(), Vec::new(), Vec::new());
    for (u, v, w) in weights(g)? {
        let holding: Vec<usize> = holders[u]
            .iter()
            .copied()
            .filter(|i| holders[v].contains(i))
            .collect();
        if holding.is_empty() {
            return Err(Error::Invariant(format!(
                "edge ({u}, {v}) lies in no cover cluster"
            )));
        }
        let class = if holding.iter().all(|&i| local[i].contains(&(u, v))) {
            EdgeClass::RuleBIncluded
        } else {
            EdgeClass::RuleAExcluded
        };
        if (class == EdgeClass::RuleBIncluded) != truth.contains(&(u, v)) {
            mismatches.push((u, v));
        }
        let rec = EdgeRecord {
            u: g.id(u),
            v: g.id(v),
            weight: w.to_string(),
        };
        match class {
            EdgeClass::RuleBIncluded => {
                tree.push((u, v));
                mst_edges.push(rec);
            }
            EdgeClass::RuleAExcluded => excluded_edges.push(rec),
        }
        classes.insert((u, v), class);
    }
    tree.sort_unstable();
    let key = |r: &EdgeRecord| (r.u.min(r.v), r.u.max(r.v));
    mst_edges.sort_by_key(key);
    excluded_edges.sort_by_key(key);
    let s = cover.cover.s;
    let mst_rounds = cover
        .cover
        .clusters
        .iter()
        .map(|c| {
            let size = c.members.len();
            cover.measured_diameter as usize
                + (size as f64).sqrt().ceil() as usize * log_star(size as u128).max(1) as usize
        })
        .max()
        .unwrap_or(0)
        * s;
    Ok(MstResult {
        mst_edges,
        excluded_edges,
        mu,
        cover_stats: CoverStats {
            k,
            clusters: cover.cover.clusters.len(),
            sparsity: s,
            diameter: cover.measured_diameter,
            diameter_bound: cover.cover.d,
            largest_cluster: cover
                .cover
                .clusters
                .iter()
                .map(|c| c.members.len())
                .max()
                .unwrap_or(0),
            decomposition_rounds: det.stats.rounds,
            cover_rounds: cover.rounds,
            cluster_mst_rounds: mst_rounds,
            max_bits_per_edge_round: det.stats.max_bits_per_edge_round,
        },
        matches_oracle: mismatches.is_empty(),
        mismatches,
        tree,
        classes,
    })
}
