//! Graph representation, generators, ingestion and the centralized distance
//! oracles every validator depends on.
//!
//! Nodes are addressed by dense indices `0..n`. Each node additionally carries
//! an identifier (`u128`) which is what the simulated protocols see and
//! compare; identifiers default to the node index.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::path::Path;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact edge weight.
pub type Weight = Ratio<i64>;

/// Marker for unreached nodes in the dense BFS arrays.
pub const UNREACHED: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    ids: Vec<u128>,
    id_bits: u32,
    weights: Option<BTreeMap<(usize, usize), Weight>>,
}

fn norm(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Number of bits needed to write `x` (at least 1).
pub fn bit_length(x: u128) -> u32 {
    (128 - x.leading_zeros()).max(1)
}

impl Graph {
    /// Builds an unweighted graph from an undirected edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("graph needs at least one node".into()));
        }
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::UnknownNode(u));
            }
            if v >= n {
                return Err(Error::UnknownNode(v));
            }
            if u == v {
                return Err(Error::SelfLoop { node: u });
            }
            if !seen.insert(norm(u, v)) {
                let (a, b) = norm(u, v);
                return Err(Error::DuplicateEdge { u: a, v: b });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let ids: Vec<u128> = (0..n as u128).collect();
        let id_bits = bit_length(n as u128 - 1);
        Ok(Self {
            adj,
            ids,
            id_bits,
            weights: None,
        })
    }

    /// Builds a graph from per-node adjacency lists, checking symmetry.
    pub fn from_adjacency(adj: Vec<Vec<usize>>) -> Result<Self> {
        let n = adj.len();
        let mut edges = Vec::new();
        for (u, list) in adj.iter().enumerate() {
            for &v in list {
                if v >= n {
                    return Err(Error::UnknownNode(v));
                }
                if adj[v].binary_search(&u).is_err() && !adj[v].contains(&u) {
                    return Err(Error::Asymmetric { u, v });
                }
                if u < v || u == v {
                    edges.push((u, v));
                }
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Attaches exact weights; all weights must be positive and pairwise distinct.
    pub fn with_weights(mut self, weighted: &[(usize, usize, Weight)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut values = HashSet::new();
        for &(u, v, w) in weighted {
            if !self.has_edge(u, v) {
                return Err(Error::InvalidParams(format!(
                    "weight on non-edge {{{u}, {v}}}"
                )));
            }
            if w <= Ratio::from_integer(0) {
                return Err(Error::InvalidParams(format!("non-positive weight {w}")));
            }
            if !values.insert(w) {
                let (a, b) = norm(u, v);
                return Err(Error::DuplicateWeight {
                    u: a,
                    v: b,
                    weight: w.to_string(),
                });
            }
            map.insert(norm(u, v), w);
        }
        if map.len() != self.edge_count() {
            return Err(Error::InvalidParams(format!(
                "{} of {} edges weighted",
                map.len(),
                self.edge_count()
            )));
        }
        self.weights = Some(map);
        Ok(self)
    }

    /// Replaces node identifiers. Identifiers must be pairwise distinct.
    pub fn with_ids(mut self, ids: Vec<u128>) -> Result<Self> {
        if ids.len() != self.n() {
            return Err(Error::InvalidParams(
                "identifier count differs from n".into(),
            ));
        }
        let distinct: HashSet<u128> = ids.iter().copied().collect();
        if distinct.len() != ids.len() {
            return Err(Error::InvalidParams("identifiers are not distinct".into()));
        }
        let max = ids.iter().copied().max().unwrap_or(0);
        self.id_bits = bit_length(max);
        self.ids = ids;
        Ok(self)
    }

    /// Declares a wider identifier space than the largest identifier needs.
    pub fn with_id_bits(mut self, bits: u32) -> Result<Self> {
        let max = self.ids.iter().copied().max().unwrap_or(0);
        if bits < bit_length(max) || bits > 128 {
            return Err(Error::InvalidParams(format!(
                "id_bits {bits} too small or above 128"
            )));
        }
        self.id_bits = bits;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn id(&self, v: usize) -> u128 {
        self.ids[v]
    }

    pub fn ids(&self) -> &[u128] {
        &self.ids
    }

    pub fn id_bits(&self) -> u32 {
        self.id_bits
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<Weight> {
        self.weights.as_ref()?.get(&norm(u, v)).copied()
    }

    /// Weighted edge list `(u, v, w)` with `u < v`.
    pub fn weighted_edges(&self) -> Vec<(usize, usize, Weight)> {
        match &self.weights {
            Some(m) => m.iter().map(|(&(u, v), &w)| (u, v, w)).collect(),
            None => Vec::new(),
        }
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut members = vec![s];
            comp[s] = c;
            let mut i = 0;
            while i < members.len() {
                let u = members[i];
                i += 1;
                for &w in &self.adj[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = c;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Induced subgraph on `nodes` (any order); returns the subgraph and the
    /// map from new index to old index. Identifiers, id width and weights carry over.
    pub fn induced(&self, nodes: &[usize]) -> (Graph, Vec<usize>) {
        let mut back: Vec<usize> = nodes.to_vec();
        back.sort_unstable();
        back.dedup();
        let mut fwd = vec![usize::MAX; self.n()];
        for (i, &v) in back.iter().enumerate() {
            fwd[v] = i;
        }
        let mut adj = vec![Vec::new(); back.len()];
        for (i, &v) in back.iter().enumerate() {
            for &w in &self.adj[v] {
                if fwd[w] != usize::MAX {
                    adj[i].push(fwd[w]);
                }
            }
            adj[i].sort_unstable();
        }
        let weights = self.weights.as_ref().map(|m| {
            m.iter()
                .filter(|(&(u, v), _)| fwd[u] != usize::MAX && fwd[v] != usize::MAX)
                .map(|(&(u, v), &w)| (norm(fwd[u], fwd[v]), w))
                .collect()
        });
        let g = Graph {
            adj,
            ids: back.iter().map(|&v| self.ids[v]).collect(),
            id_bits: self.id_bits,
            weights,
        };
        (g, back)
    }
}

// ---------------------------------------------------------------------------
// ingestion

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFormat {
    EdgeList,
    Json,
}

/// JSON mirror of the edge-list format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    /// Optional `[num, den]` per edge, aligned with `edges`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<(i64, i64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids: Option<Vec<u128>>,
}

impl GraphJson {
    pub fn from_graph(g: &Graph) -> Self {
        let edges: Vec<_> = g.edges().collect();
        let weights = g.is_weighted().then(|| {
            edges
                .iter()
                .map(|&(u, v)| {
                    let w = g.weight(u, v).expect("weighted graph");
                    (*w.numer(), *w.denom())
                })
                .collect()
        });
        let default_ids = g.ids().iter().enumerate().all(|(i, &id)| id == i as u128);
        GraphJson {
            n: g.n(),
            edges,
            weights,
            ids: (!default_ids).then(|| g.ids().to_vec()),
        }
    }

    pub fn into_graph(self) -> Result<Graph> {
        let mut g = Graph::from_edges(self.n, &self.edges)?;
        if let Some(ws) = self.weights {
            if ws.len() != self.edges.len() {
                return Err(Error::InvalidParams(
                    "weights and edges differ in length".into(),
                ));
            }
            let mut weighted = Vec::with_capacity(ws.len());
            for (&(u, v), &(num, den)) in self.edges.iter().zip(&ws) {
                if den == 0 {
                    return Err(Error::InvalidParams("zero denominator".into()));
                }
                weighted.push((u, v, Ratio::new(num, den)));
            }
            g = g.with_weights(&weighted)?;
        }
        if let Some(ids) = self.ids {
            g = g.with_ids(ids)?;
        }
        Ok(g)
    }
}

fn parse_weight(tok: &str, line: usize) -> Result<Weight> {
    let bad = |msg: &str| Error::Parse {
        line,
        msg: format!("{msg}: {tok:?}"),
    };
    let (num, den) = match tok.split_once('/') {
        Some((a, b)) => (a, b),
        None => (tok, "1"),
    };
    let num: i64 = num
        .trim()
        .parse()
        .map_err(|_| bad("bad weight numerator"))?;
    let den: i64 = den
        .trim()
        .parse()
        .map_err(|_| bad("bad weight denominator"))?;
    if den == 0 {
        return Err(bad("zero denominator"));
    }
    Ok(Ratio::new(num, den))
}

/// Parses the edge-list format: header `n m`, then `m` lines `u v` or
/// `u v num/den`. `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let parse_idx = |t: &str| -> Result<usize> {
            t.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("expected non-negative integer, got {t:?}"),
            })
        };
        match header {
            None => {
                if toks.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        msg: "header must be `n m`".into(),
                    });
                }
                header = Some((parse_idx(toks[0])?, parse_idx(toks[1])?));
            }
            Some((n, _)) => {
                if toks.len() != 2 && toks.len() != 3 {
                    return Err(Error::Parse {
                        line,
                        msg: "edge line must be `u v` or `u v num/den`".into(),
                    });
                }
                let u = parse_idx(toks[0])?;
                let v = parse_idx(toks[1])?;
                if u >= n || v >= n {
                    return Err(Error::Parse {
                        line,
                        msg: format!("node out of range 0..{n}"),
                    });
                }
                if u == v {
                    return Err(Error::Parse {
                        line,
                        msg: format!("self-loop on node {u}"),
                    });
                }
                if toks.len() == 3 {
                    weights.push((u, v, parse_weight(toks[2], line)?));
                }
                edges.push((u, v));
            }
        }
    }
    let (n, m) = header.ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    if edges.len() != m {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header announces {m} edges, found {}", edges.len()),
        });
    }
    if !weights.is_empty() && weights.len() != edges.len() {
        return Err(Error::Parse {
            line: 0,
            msg: "either all or no edges carry weights".into(),
        });
    }
    let g = Graph::from_edges(n, &edges)?;
    if weights.is_empty() {
        Ok(g)
    } else {
        g.with_weights(&weights)
    }
}

pub fn to_edge_list(g: &Graph) -> String {
    let mut s = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        match g.weight(u, v) {
            Some(w) => s.push_str(&format!("{u} {v} {}/{}\n", w.numer(), w.denom())),
            None => s.push_str(&format!("{u} {v}\n")),
        }
    }
    s
}

pub fn load_graph(path: impl AsRef<Path>, format: GraphFormat) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    match format {
        GraphFormat::EdgeList => parse_edge_list(&text),
        GraphFormat::Json => serde_json::from_str::<GraphJson>(&text)?.into_graph(),
    }
}

// ---------------------------------------------------------------------------
// generators

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum GraphModel {
    Gnp {
        n: usize,
        p: f64,
        connected: bool,
    },
    Grid {
        rows: usize,
        cols: usize,
    },
    Path {
        n: usize,
    },
    /// Random recursive tree: node `i` attaches to a uniform earlier node.
    Tree {
        n: usize,
    },
    Clique {
        n: usize,
    },
}

/// Deterministic function of `(model, seed)`.
pub fn generate_graph(model: &GraphModel, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *model {
        GraphModel::Gnp { n, p, connected } => {
            if n == 0 || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!(
                    "gnp needs n >= 1 and p in [0,1], got n={n} p={p}"
                )));
            }
            let edges = gnp_edges(n, p, &mut rng);
            let g = Graph::from_edges(n, &edges)?;
            if connected {
                let largest = g
                    .components()
                    .into_iter()
                    .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
                    .expect("n >= 1");
                let (sub, _) = g.induced(&largest);
                // re-index identifiers densely
                let m = sub.n();
                Graph::from_edges(m, &sub.edges().collect::<Vec<_>>())
            } else {
                Ok(g)
            }
        }
        GraphModel::Grid { rows, cols } => {
            if rows == 0 || cols == 0 {
                return Err(Error::InvalidParams("grid needs rows, cols >= 1".into()));
            }
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        edges.push((v, v + cols));
                    }
                }
            }
            Graph::from_edges(rows * cols, &edges)
        }
        GraphModel::Path { n } => {
            if n == 0 {
                return Err(Error::InvalidParams("path needs n >= 1".into()));
            }
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            Graph::from_edges(n, &edges)
        }
        GraphModel::Tree { n } => {
            if n == 0 {
                return Err(Error::InvalidParams("tree needs n >= 1".into()));
            }
            let edges: Vec<_> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
            Graph::from_edges(n, &edges)
        }
        GraphModel::Clique { n } => {
            if n == 0 {
                return Err(Error::InvalidParams("clique needs n >= 1".into()));
            }
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v));
                }
            }
            Graph::from_edges(n, &edges)
        }
    }
}

/// Geometric-skip sampling of G(n, p) over the lower triangle.
fn gnp_edges(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    if p <= 0.0 || n < 2 {
        return edges;
    }
    if p >= 1.0 {
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        return edges;
    }
    let lp = (1.0 - p).ln();
    let (mut v, mut w) = (1usize, -1i64);
    while v < n {
        let r: f64 = 1.0 - rng.gen::<f64>();
        w += 1 + (r.ln() / lp).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    edges
}

/// Attaches pairwise-distinct positive rational weights drawn from `seed`.
pub fn with_random_weights(g: Graph, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f1e_1647);
    let edges: Vec<_> = g.edges().collect();
    let mut ranks: Vec<i64> = (1..=edges.len() as i64).collect();
    ranks.shuffle(&mut rng);
    let weighted: Vec<_> = edges
        .iter()
        .zip(&ranks)
        .map(|(&(u, v), &r)| {
            // distinct: each rank owns the interval [r, r + 1)
            let den = rng.gen_range(1..=8i64);
            let frac = rng.gen_range(0..den);
            (u, v, Ratio::new(r * den + frac, den))
        })
        .collect();
    g.with_weights(&weighted)
}

// ---------------------------------------------------------------------------
// distance oracles

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMap {
    pub source: usize,
    pub cap: Option<u32>,
    /// `None` means unreached (or beyond `cap`).
    pub dist: Vec<Option<u32>>,
}

impl DistanceMap {
    pub fn get(&self, v: usize) -> Option<u32> {
        self.dist.get(v).copied().flatten()
    }
}

/// Exact hop distances from `source`, truncated at `cap`.
pub fn bfs_distances(g: &Graph, source: usize, cap: Option<u32>) -> Result<DistanceMap> {
    if source >= g.n() {
        return Err(Error::UnknownNode(source));
    }
    let raw = multi_bfs(g, &[source], cap.unwrap_or(UNREACHED - 1));
    Ok(DistanceMap {
        source,
        cap,
        dist: raw
            .into_iter()
            .map(|d| (d != UNREACHED).then_some(d))
            .collect(),
    })
}

/// Dense multi-source BFS; entries beyond `cap` are `UNREACHED`.
pub fn multi_bfs(g: &Graph, sources: &[usize], cap: u32) -> Vec<u32> {
    let mut dist = vec![UNREACHED; g.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        if du >= cap {
            continue;
        }
        for &w in g.neighbors(u) {
            if dist[w] == UNREACHED {
                dist[w] = du + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// BFS restricted to nodes where `allowed` holds.
pub fn bfs_within(
    g: &Graph,
    sources: &[usize],
    cap: u32,
    allowed: &dyn Fn(usize) -> bool,
) -> Vec<u32> {
    let mut dist = vec![UNREACHED; g.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if allowed(s) && dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        if du >= cap {
            continue;
        }
        for &w in g.neighbors(u) {
            if dist[w] == UNREACHED && allowed(w) {
                dist[w] = du + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// `G^k`: edge `{u, v}` iff `1 <= d_G(u, v) <= k`. Oracle use only.
pub fn power_graph(g: &Graph, k: u32) -> Result<Graph> {
    if k < 1 {
        return Err(Error::InvalidParams("power_graph needs k >= 1".into()));
    }
    let mut edges = Vec::new();
    for u in 0..g.n() {
        let d = multi_bfs(g, &[u], k);
        for (v, &dv) in d.iter().enumerate() {
            if v > u && dv != UNREACHED {
                edges.push((u, v));
            }
        }
    }
    let p = Graph::from_edges(g.n(), &edges)?;
    let p = p.with_ids(g.ids().to_vec())?;
    p.with_id_bits(g.id_bits())
}

/// Iterated base-2 logarithm: number of `log2` applications until the value is at most 1.
pub fn log_star(x: u128) -> u32 {
    let mut v = x as f64;
    let mut count = 0;
    while v > 1.0 {
        v = v.log2();
        count += 1;
    }
    count
}

/// `ceil(log2(x))` for `x >= 1`; 0 for `x <= 1`.
pub fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

/// `ceil(sqrt(log2 x))`, at least 1.
pub fn ceil_sqrt_log2(x: u128) -> u32 {
    let l = (x.max(2) as f64).log2();
    (l.sqrt().ceil() as u32).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        generate_graph(&GraphModel::Path { n }, 0).unwrap()
    }

    #[test]
    fn smallest_edge_list() {
        let g = parse_edge_list("2 1\n0 1").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn triangle_edge_list() {
        let g = parse_edge_list("3 3\n0 1\n1 2\n0 2").unwrap();
        assert_eq!(g.max_degree(), 2);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn self_loop_rejected() {
        let err = parse_edge_list("2 1\n0 0").unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");
    }

    #[test]
    fn duplicate_edge_rejected() {
        let err = parse_edge_list("2 2\n0 1\n1 0").unwrap_err();
        assert!(matches!(err, Error::DuplicateEdge { u: 0, v: 1 }));
    }

    #[test]
    fn duplicate_weight_rejected() {
        let err = parse_edge_list("3 2\n0 1 1/2\n1 2 2/4").unwrap_err();
        assert!(matches!(err, Error::DuplicateWeight { .. }), "{err}");
    }

    #[test]
    fn parse_error_reports_line() {
        let err = parse_edge_list("# header next\n3 2\n0 1\n1 x").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn comments_and_weights() {
        let g = parse_edge_list("3 2 # tiny\n0 1 3/2\n# skip\n1 2 7\n").unwrap();
        assert_eq!(g.weight(1, 0), Some(Ratio::new(3, 2)));
        assert_eq!(g.weight(2, 1), Some(Ratio::from_integer(7)));
        let back = parse_edge_list(&to_edge_list(&g)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn asymmetric_adjacency_rejected() {
        let err = Graph::from_adjacency(vec![vec![1], vec![]]).unwrap_err();
        assert!(matches!(err, Error::Asymmetric { u: 0, v: 1 }));
    }

    #[test]
    fn json_round_trip_keeps_ids() {
        let g = path(4).with_ids(vec![10, 20, 30, 1 << 100]).unwrap();
        let text = serde_json::to_string(&GraphJson::from_graph(&g)).unwrap();
        let back = serde_json::from_str::<GraphJson>(&text)
            .unwrap()
            .into_graph()
            .unwrap();
        assert_eq!(back, g);
        assert_eq!(back.id_bits(), 101);
    }

    #[test]
    fn generators() {
        let p5 = path(5);
        assert_eq!(
            p5.edges().collect::<Vec<_>>(),
            vec![(0, 1), (1, 2), (2, 3), (3, 4)]
        );
        let k4 = generate_graph(&GraphModel::Clique { n: 4 }, 0).unwrap();
        assert_eq!(k4.edge_count(), 6);
        let m = GraphModel::Gnp {
            n: 100,
            p: 0.05,
            connected: false,
        };
        let a = generate_graph(&m, 7).unwrap();
        let b = generate_graph(&m, 7).unwrap();
        assert_eq!(a, b);
        assert!(
            a.edge_count() > 100 && a.edge_count() < 400,
            "{}",
            a.edge_count()
        );
        let c = generate_graph(
            &GraphModel::Gnp {
                n: 300,
                p: 0.004,
                connected: true,
            },
            3,
        )
        .unwrap();
        assert!(c.is_connected());
        let t = generate_graph(&GraphModel::Tree { n: 50 }, 1).unwrap();
        assert_eq!(t.edge_count(), 49);
        assert!(t.is_connected());
        assert!(generate_graph(
            &GraphModel::Gnp {
                n: 5,
                p: 1.5,
                connected: false
            },
            0
        )
        .is_err());
    }

    #[test]
    fn bfs_examples() {
        let p5 = path(5);
        assert_eq!(bfs_distances(&p5, 0, None).unwrap().get(4), Some(4));
        let k4 = generate_graph(&GraphModel::Clique { n: 4 }, 0).unwrap();
        let d = bfs_distances(&k4, 0, None).unwrap();
        assert!((1..4).all(|v| d.get(v) == Some(1)));
        let grid = generate_graph(&GraphModel::Grid { rows: 5, cols: 5 }, 0).unwrap();
        assert_eq!(bfs_distances(&grid, 0, None).unwrap().get(24), Some(8));
        let capped = bfs_distances(&p5, 0, Some(2)).unwrap();
        assert_eq!(capped.get(2), Some(2));
        assert_eq!(capped.get(3), None);
        assert!(bfs_distances(&p5, 9, None).is_err());
    }

    #[test]
    fn power_graph_examples() {
        let p5 = path(5);
        assert_eq!(power_graph(&p5, 1).unwrap(), p5);
        assert_eq!(power_graph(&p5, 2).unwrap().degree(2), 4);
        let k5 = generate_graph(&GraphModel::Clique { n: 5 }, 0).unwrap();
        assert_eq!(
            power_graph(&p5, 4).unwrap().edges().collect::<Vec<_>>(),
            k5.edges().collect::<Vec<_>>()
        );
        assert!(power_graph(&p5, 0).is_err());
    }

    #[test]
    fn log_star_examples() {
        assert_eq!(log_star(0), 0);
        assert_eq!(log_star(1), 0);
        assert_eq!(log_star(2), 1);
        assert_eq!(log_star(16), 3);
        assert_eq!(log_star(65536), 4);
        assert_eq!(log_star(u128::MAX), 5);
    }

    #[test]
    fn induced_keeps_ids() {
        let g = path(5).with_ids(vec![5, 6, 7, 8, 9]).unwrap();
        let (sub, back) = g.induced(&[4, 2, 3]);
        assert_eq!(back, vec![2, 3, 4]);
        assert_eq!(sub.ids(), &[7, 8, 9]);
        assert_eq!(sub.edge_count(), 2);
    }
}
