//! Clusters, decompositions, covers and ruling sets, with centralized
//! validators built on BFS distance oracles.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::graph::{multi_bfs, Graph, UNREACHED};
use crate::sim::TreeSpec;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    /// Identifier of the center node.
    pub id: u128,
    pub center: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<u64>,
    /// Sorted, distinct.
    pub members: Vec<usize>,
    /// `(u, v)` with `u < v`, sorted.
    pub tree_edges: Vec<(usize, usize)>,
}

impl Cluster {
    pub fn new(
        g: &Graph,
        center: usize,
        mut members: Vec<usize>,
        tree_edges: Vec<(usize, usize)>,
    ) -> Self {
        members.sort_unstable();
        members.dedup();
        let mut tree_edges: Vec<_> = tree_edges
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        tree_edges.sort_unstable();
        tree_edges.dedup();
        Self {
            id: g.id(center),
            center,
            color: None,
            members,
            tree_edges,
        }
    }

    pub fn singleton(g: &Graph, v: usize) -> Self {
        Self::new(g, v, vec![v], vec![])
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn tree_spec(&self) -> TreeSpec {
        TreeSpec {
            id: self.id,
            root: self.center,
            members: self.members.clone(),
            edges: self.tree_edges.clone(),
        }
    }

    /// Tree nodes: center, members and tree-edge endpoints, sorted.
    pub fn tree_nodes(&self) -> Vec<usize> {
        let mut nodes: BTreeSet<usize> = self.members.iter().copied().collect();
        nodes.insert(self.center);
        for &(u, v) in &self.tree_edges {
            nodes.insert(u);
            nodes.insert(v);
        }
        nodes.into_iter().collect()
    }

    /// Hop distance from the center along the tree, `None` if the tree is
    /// not a tree reaching every member.
    pub fn tree_depths(&self) -> Option<HashMap<usize, u32>> {
        tree_bfs(&self.tree_edges, self.center).filter(|d| {
            d.len() == self.tree_edges.len() + 1 && self.members.iter().all(|m| d.contains_key(m))
        })
    }

    /// Maximum tree-path hops from the center to a member.
    pub fn radius_g(&self) -> Option<u32> {
        let d = self.tree_depths()?;
        self.members.iter().map(|m| d[m]).max()
    }

    /// `ceil(max_member d_G(center, member) / k)`.
    pub fn radius_gk(&self, g: &Graph, k: u32) -> u32 {
        let d = multi_bfs(g, &[self.center], UNREACHED - 1);
        let far = self.members.iter().map(|&m| d[m]).max().unwrap_or(0);
        far.div_ceil(k.max(1))
    }
}

/// BFS over an edge list; `None` if the edge set has a cycle reachable from `root`.
fn tree_bfs(edges: &[(usize, usize)], root: usize) -> Option<HashMap<usize, u32>> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let mut depth = HashMap::from([(root, 0u32)]);
    let mut queue = VecDeque::from([(root, usize::MAX)]);
    while let Some((u, from)) = queue.pop_front() {
        for &v in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
            if v == from {
                continue;
            }
            if depth.contains_key(&v) {
                return None;
            }
            depth.insert(v, depth[&u] + 1);
            queue.push_back((v, u));
        }
    }
    Some(depth)
}

pub(crate) fn tree_diameter(edges: &[(usize, usize)], any: usize) -> Option<u32> {
    let first = tree_bfs(edges, any)?;
    let (&far, _) = first
        .iter()
        .max_by_key(|&(&v, &d)| (d, std::cmp::Reverse(v)))?;
    tree_bfs(edges, far)?.values().max().copied()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub k: u32,
    pub clusters: Vec<Cluster>,
}

impl Decomposition {
    pub fn colors_used(&self) -> usize {
        self.clusters
            .iter()
            .filter_map(|c| c.color)
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Index of the cluster holding each node; `usize::MAX` when uncovered.
    pub fn cluster_of(&self, n: usize) -> Vec<usize> {
        let mut of = vec![usize::MAX; n];
        for (i, c) in self.clusters.iter().enumerate() {
            for &m in &c.members {
                if m < n {
                    of[m] = i;
                }
            }
        }
        of
    }

    /// Maximum weak diameter over clusters.
    pub fn diameter_bound(&self, g: &Graph) -> u32 {
        let oracle = Distances::new(g, DistanceBackend::Bfs);
        self.clusters
            .iter()
            .map(|c| oracle.weak_diameter(&c.members))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodCover {
    pub k: u32,
    pub s: usize,
    pub d: u32,
    pub clusters: Vec<Cluster>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulingSetResult {
    pub base: Vec<usize>,
    pub chosen: Vec<usize>,
    pub alpha: u32,
    pub beta: u32,
}

/// Independent distance backends used to cross-check validator verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceBackend {
    /// One BFS per queried source, cached.
    Bfs,
    /// Floyd-Warshall over the whole graph; cubic, fixtures only.
    AllPairs,
}

struct Distances<'a> {
    g: &'a Graph,
    rows: RefCell<Vec<Option<Rc<Vec<u32>>>>>,
    matrix: Option<Vec<u32>>,
}

impl<'a> Distances<'a> {
    fn new(g: &'a Graph, backend: DistanceBackend) -> Self {
        let matrix = (backend == DistanceBackend::AllPairs).then(|| {
            let n = g.n();
            let mut m = vec![UNREACHED; n * n];
            for u in 0..n {
                m[u * n + u] = 0;
                for &v in g.neighbors(u) {
                    m[u * n + v] = 1;
                }
            }
            for w in 0..n {
                for u in 0..n {
                    let uw = m[u * n + w];
                    if uw == UNREACHED {
                        continue;
                    }
                    for v in 0..n {
                        let wv = m[w * n + v];
                        if wv != UNREACHED && uw + wv < m[u * n + v] {
                            m[u * n + v] = uw + wv;
                        }
                    }
                }
            }
            m
        });
        Self {
            g,
            rows: RefCell::new(vec![None; g.n()]),
            matrix,
        }
    }

    fn dist(&self, u: usize, v: usize) -> u32 {
        if let Some(m) = &self.matrix {
            return m[u * self.g.n() + v];
        }
        let mut rows = self.rows.borrow_mut();
        let row = rows[u].get_or_insert_with(|| Rc::new(multi_bfs(self.g, &[u], UNREACHED - 1)));
        row[v]
    }

    fn weak_diameter(&self, members: &[usize]) -> u32 {
        let mut best = 0;
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                best = best.max(self.dist(u, v));
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub valid: bool,
    pub colors: usize,
    pub max_weak_diameter: u32,
    /// Smallest G-distance between two distinct clusters of one color.
    pub min_same_color_gap: Option<u32>,
    /// Largest number of same-color trees sharing one G-edge.
    pub max_edge_overlap: usize,
    pub failures: Vec<String>,
}

/// Structural checks shared by decompositions and covers.
fn check_cluster(
    g: &Graph,
    c: &Cluster,
    strong: bool,
    reach: Option<u32>,
    oracle: &Distances,
    failures: &mut Vec<String>,
) {
    let n = g.n();
    if c.center >= n
        || c.members.iter().any(|&m| m >= n)
        || c.tree_edges.iter().any(|&(_, v)| v >= n)
    {
        failures.push(format!("cluster {} references unknown nodes", c.id));
        return;
    }
    if !c.contains(c.center) {
        failures.push(format!("cluster {}: center not a member", c.id));
    }
    if c.id != g.id(c.center) {
        failures.push(format!("cluster {}: id differs from the center's id", c.id));
    }
    if let Some(&(u, v)) = c.tree_edges.iter().find(|&&(u, v)| !g.has_edge(u, v)) {
        failures.push(format!("cluster {}: tree edge ({u}, {v}) not in G", c.id));
    }
    if c.tree_depths().is_none() {
        failures.push(format!(
            "cluster {}: tree_edges do not form a tree spanning the members",
            c.id
        ));
    }
    if strong
        && c.tree_edges
            .iter()
            .any(|&(u, v)| !c.contains(u) || !c.contains(v))
    {
        failures.push(format!("cluster {}: tree leaves G[C]", c.id));
    }
    if let Some(r) = reach {
        for x in c.tree_nodes() {
            if !c.members.iter().any(|&m| oracle.dist(x, m) <= r) {
                failures.push(format!(
                    "cluster {}: tree node {x} farther than {r} from every member",
                    c.id
                ));
                break;
            }
        }
    }
}

pub fn validate_decomposition(g: &Graph, dec: &Decomposition) -> DecompositionReport {
    validate_decomposition_with(g, dec, DistanceBackend::Bfs)
}

pub fn validate_decomposition_with(
    g: &Graph,
    dec: &Decomposition,
    backend: DistanceBackend,
) -> DecompositionReport {
    let oracle = Distances::new(g, backend);
    let mut failures = Vec::new();
    let n = g.n();
    let mut count = vec![0usize; n];
    for c in &dec.clusters {
        for &m in &c.members {
            if m < n {
                count[m] += 1;
            }
        }
        check_cluster(g, c, false, Some(dec.k / 2), &oracle, &mut failures);
        if c.color.is_none() {
            failures.push(format!("cluster {} has no color", c.id));
        }
    }
    if let Some(v) = count.iter().position(|&c| c != 1) {
        failures.push(format!(
            "not a partition: node {v} lies in {} clusters",
            count[v]
        ));
    }

    let max_weak_diameter = dec
        .clusters
        .iter()
        .map(|c| oracle.weak_diameter(&c.members))
        .max()
        .unwrap_or(0);

    let mut by_color: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, c) in dec.clusters.iter().enumerate() {
        if let Some(col) = c.color {
            by_color.entry(col).or_default().push(i);
        }
    }
    let mut min_gap: Option<u32> = None;
    let mut max_edge_overlap = 0;
    let mut colors: Vec<_> = by_color.keys().copied().collect();
    colors.sort_unstable();
    for col in colors {
        let group = &by_color[&col];
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                for &u in &dec.clusters[i].members {
                    for &v in &dec.clusters[j].members {
                        let d = oracle.dist(u, v);
                        min_gap = Some(min_gap.map_or(d, |m| m.min(d)));
                    }
                }
            }
        }
        let mut load: HashMap<(usize, usize), usize> = HashMap::new();
        for &i in group {
            for &e in &dec.clusters[i].tree_edges {
                *load.entry(e).or_default() += 1;
            }
        }
        max_edge_overlap = max_edge_overlap.max(load.values().copied().max().unwrap_or(0));
    }
    if let Some(gap) = min_gap.filter(|&gap| gap <= dec.k) {
        failures.push(format!(
            "same-color clusters at distance {gap} <= k = {}",
            dec.k
        ));
    }
    if max_edge_overlap > 1 {
        failures.push(format!("{max_edge_overlap} same-color trees share an edge"));
    }
    DecompositionReport {
        valid: failures.is_empty(),
        colors: dec.colors_used(),
        max_weak_diameter,
        min_same_color_gap: min_gap,
        max_edge_overlap,
        failures,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub valid: bool,
    /// Largest number of clusters holding one node.
    pub sparsity: usize,
    /// Largest tree diameter.
    pub diameter: u32,
    pub uncovered_balls: Vec<usize>,
    pub failures: Vec<String>,
}

pub fn validate_cover(g: &Graph, cover: &NeighborhoodCover) -> CoverReport {
    validate_cover_with(g, cover, DistanceBackend::Bfs)
}

pub fn validate_cover_with(
    g: &Graph,
    cover: &NeighborhoodCover,
    backend: DistanceBackend,
) -> CoverReport {
    let oracle = Distances::new(g, backend);
    let n = g.n();
    let mut failures = Vec::new();
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut diameter = 0;
    for (i, c) in cover.clusters.iter().enumerate() {
        check_cluster(g, c, true, None, &oracle, &mut failures);
        for &m in c.members.iter().filter(|&&m| m < n) {
            holders[m].push(i);
        }
        if let Some(d) = tree_diameter(&c.tree_edges, c.center) {
            diameter = diameter.max(d);
        }
    }
    if diameter > cover.d {
        failures.push(format!("tree diameter {diameter} exceeds d = {}", cover.d));
    }
    let sparsity = holders.iter().map(Vec::len).max().unwrap_or(0);
    if sparsity > cover.s {
        failures.push(format!(
            "a node lies in {sparsity} clusters, s = {}",
            cover.s
        ));
    }
    let uncovered_balls: Vec<usize> = (0..n)
        .filter(|&v| {
            let ball: Vec<usize> = (0..n).filter(|&u| oracle.dist(v, u) <= cover.k).collect();
            !holders[v]
                .iter()
                .any(|&i| ball.iter().all(|&u| cover.clusters[i].contains(u)))
        })
        .collect();
    if !uncovered_balls.is_empty() {
        failures.push(format!(
            "{} k-balls lie in no cluster",
            uncovered_balls.len()
        ));
    }
    CoverReport {
        valid: failures.is_empty(),
        sparsity,
        diameter,
        uncovered_balls,
        failures,
    }
}

/// `Ok(())` iff `s` is a maximal independent set, else the first violation.
pub fn validate_mis(g: &Graph, s: &[usize]) -> Result<(), String> {
    let mut in_s = vec![false; g.n()];
    for &v in s {
        if v >= g.n() {
            return Err(format!("unknown node {v}"));
        }
        in_s[v] = true;
    }
    for (u, v) in g.edges() {
        if in_s[u] && in_s[v] {
            return Err(format!("adjacent nodes {u} and {v} both chosen"));
        }
    }
    match (0..g.n()).find(|&v| !in_s[v] && !g.neighbors(v).iter().any(|&u| in_s[u])) {
        Some(v) => Err(format!("node {v} is not dominated")),
        None => Ok(()),
    }
}

pub fn validate_ruling_set(g: &Graph, r: &RulingSetResult) -> Result<(), String> {
    validate_ruling_set_with(g, r, DistanceBackend::Bfs)
}

pub fn validate_ruling_set_with(
    g: &Graph,
    r: &RulingSetResult,
    backend: DistanceBackend,
) -> Result<(), String> {
    if let Some(&v) = r.base.iter().chain(&r.chosen).find(|&&v| v >= g.n()) {
        return Err(format!("unknown node {v}"));
    }
    if let Some(&v) = r.chosen.iter().find(|v| !r.base.contains(v)) {
        return Err(format!("chosen node {v} outside the base set"));
    }
    let oracle = Distances::new(g, backend);
    for (i, &u) in r.chosen.iter().enumerate() {
        for &v in &r.chosen[i + 1..] {
            let d = oracle.dist(u, v);
            if d < r.alpha {
                return Err(format!("chosen {u} and {v} at distance {d} < {}", r.alpha));
            }
        }
    }
    for &b in &r.base {
        if !r.chosen.iter().any(|&c| oracle.dist(c, b) <= r.beta) {
            return Err(format!(
                "base node {b} farther than {} from every chosen node",
                r.beta
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphModel};

    fn path(n: usize) -> Graph {
        generate_graph(&GraphModel::Path { n }, 0).unwrap()
    }

    fn path_cluster(g: &Graph, nodes: std::ops::RangeInclusive<usize>, color: u64) -> Cluster {
        let members: Vec<usize> = nodes.collect();
        let edges = members.windows(2).map(|w| (w[0], w[1])).collect();
        let mut c = Cluster::new(g, members[0], members, edges);
        c.color = Some(color);
        c
    }

    #[test]
    fn single_node_decomposition() {
        let g = path(1);
        let dec = Decomposition {
            k: 1,
            clusters: vec![path_cluster(&g, 0..=0, 0)],
        };
        let r = validate_decomposition(&g, &dec);
        assert!(r.valid, "{:?}", r.failures);
        assert_eq!(r.max_weak_diameter, 0);
        assert_eq!(r.colors, 1);
    }

    #[test]
    fn same_color_too_close() {
        let g = path(3);
        let dec = Decomposition {
            k: 2,
            clusters: vec![
                path_cluster(&g, 0..=0, 0),
                path_cluster(&g, 1..=1, 1),
                path_cluster(&g, 2..=2, 0),
            ],
        };
        for backend in [DistanceBackend::Bfs, DistanceBackend::AllPairs] {
            let r = validate_decomposition_with(&g, &dec, backend);
            assert!(!r.valid);
            assert_eq!(r.min_same_color_gap, Some(2));
        }
    }

    #[test]
    fn partition_and_tree_checks() {
        let g = path(4);
        let mut dec = Decomposition {
            k: 1,
            clusters: vec![path_cluster(&g, 0..=1, 0), path_cluster(&g, 3..=3, 0)],
        };
        assert!(!validate_decomposition(&g, &dec).valid);
        dec.clusters.push(path_cluster(&g, 2..=2, 1));
        assert!(validate_decomposition(&g, &dec).valid);
        dec.clusters[0].tree_edges.clear();
        assert!(!validate_decomposition(&g, &dec).valid);
    }

    #[test]
    fn cover_examples() {
        let star = Graph::from_edges(6, &(1..6).map(|i| (0, i)).collect::<Vec<_>>()).unwrap();
        let all = Cluster::new(&star, 0, (0..6).collect(), (1..6).map(|i| (0, i)).collect());
        let cover = NeighborhoodCover {
            k: 1,
            s: 1,
            d: 2,
            clusters: vec![all],
        };
        let r = validate_cover(&star, &cover);
        assert!(r.valid, "{:?}", r.failures);
        assert_eq!(r.sparsity, 1);

        let g = path(5);
        let cover = NeighborhoodCover {
            k: 1,
            s: 2,
            d: 2,
            clusters: vec![path_cluster(&g, 0..=2, 0), path_cluster(&g, 2..=4, 0)],
        };
        for k in [1, 2] {
            let cover = NeighborhoodCover { k, ..cover.clone() };
            for backend in [DistanceBackend::Bfs, DistanceBackend::AllPairs] {
                let r = validate_cover_with(&g, &cover, backend);
                assert_eq!(r.sparsity, 2);
                // the middle node's radius-k ball spans v2..v4 or more
                assert!(!r.valid);
                assert!(r.uncovered_balls.contains(&2));
            }
        }
        let cover = NeighborhoodCover {
            k: 1,
            s: 3,
            d: 2,
            clusters: vec![
                path_cluster(&g, 0..=2, 0),
                path_cluster(&g, 1..=3, 0),
                path_cluster(&g, 2..=4, 0),
            ],
        };
        assert!(validate_cover(&g, &cover).valid);
    }

    #[test]
    fn mis_examples() {
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(validate_mis(&tri, &[1]).is_ok());
        assert!(validate_mis(&tri, &[]).is_err());
        assert!(validate_mis(&path(4), &[0, 1]).is_err());
    }

    #[test]
    fn ruling_set_examples() {
        let g = path(5);
        let base: Vec<usize> = (0..5).collect();
        let good = RulingSetResult {
            base: base.clone(),
            chosen: vec![0, 2, 4],
            alpha: 2,
            beta: 1,
        };
        assert!(validate_ruling_set(&g, &good).is_ok());
        assert!(validate_ruling_set_with(&g, &good, DistanceBackend::AllPairs).is_ok());
        let bad = RulingSetResult {
            base,
            chosen: vec![0],
            alpha: 2,
            beta: 1,
        };
        assert!(validate_ruling_set(&g, &bad).is_err());
    }

    #[test]
    fn radii() {
        let g = path(5);
        let c = Cluster::new(
            &g,
            2,
            (0..5).collect(),
            vec![(0, 1), (1, 2), (2, 3), (3, 4)],
        );
        assert_eq!(c.radius_g(), Some(2));
        assert_eq!(c.radius_gk(&g, 2), 1);
        assert_eq!(tree_diameter(&c.tree_edges, 2), Some(4));
    }
}
