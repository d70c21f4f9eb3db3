//! The meta-node graph `H`: vertex-disjoint connected groups of G-vertices,
//! adjacent when some cross pair is adjacent in G.

use std::collections::BTreeSet;

use crate::cluster::{Cluster, Decomposition};
use crate::error::{Error, Result};
use crate::graph::{bfs_within, Graph, UNREACHED};

#[derive(Clone, Debug, PartialEq)]
pub struct MetaGraph {
    /// Meta-node graph; node `i` carries the identifier of `centers[i]`.
    pub h: Graph,
    /// G-vertices of each meta-node, sorted.
    pub members: Vec<Vec<usize>>,
    pub centers: Vec<usize>,
    /// Meta-node holding each G-vertex, `None` outside every meta-node.
    pub of: Vec<Option<usize>>,
    /// Largest G-distance from a center to a member inside its meta-node.
    pub radius: u32,
}

impl MetaGraph {
    /// Builds `H` from `(center, members)` groups. Groups must be disjoint,
    /// contain their center and induce connected subgraphs of `g`.
    pub fn new(g: &Graph, groups: Vec<(usize, Vec<usize>)>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidParams(
                "meta-graph needs at least one meta-node".into(),
            ));
        }
        let mut of = vec![None; g.n()];
        let mut members = Vec::with_capacity(groups.len());
        let mut centers = Vec::with_capacity(groups.len());
        let mut radius = 0;
        for (i, (center, mut group)) in groups.into_iter().enumerate() {
            group.sort_unstable();
            group.dedup();
            for &v in &group {
                if v >= g.n() {
                    return Err(Error::UnknownNode(v));
                }
                if of[v].replace(i).is_some() {
                    return Err(Error::InvalidParams(format!(
                        "node {v} lies in two meta-nodes"
                    )));
                }
            }
            if group.binary_search(&center).is_err() {
                return Err(Error::InvalidParams(format!(
                    "meta-node {i} misses its center"
                )));
            }
            let inside = |v: usize| group.binary_search(&v).is_ok();
            let dist = bfs_within(g, &[center], UNREACHED - 1, &inside);
            for &v in &group {
                if dist[v] == UNREACHED {
                    return Err(Error::InvalidParams(format!(
                        "meta-node {i} is not connected"
                    )));
                }
                radius = radius.max(dist[v]);
            }
            members.push(group);
            centers.push(center);
        }
        let mut edges = BTreeSet::new();
        for (u, v) in g.edges() {
            if let (Some(a), Some(b)) = (of[u], of[v]) {
                if a != b {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
        let edges: Vec<_> = edges.into_iter().collect();
        let h = Graph::from_edges(members.len(), &edges)?
            .with_ids(centers.iter().map(|&c| g.id(c)).collect())?
            .with_id_bits(g.id_bits())?;
        Ok(Self {
            h,
            members,
            centers,
            of,
            radius,
        })
    }

    /// Every vertex its own meta-node.
    pub fn singletons(g: &Graph) -> Result<Self> {
        Self::new(g, (0..g.n()).map(|v| (v, vec![v])).collect())
    }

    /// Number of meta-nodes `N`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// G-vertices covered by the meta-nodes of `cluster`, sorted.
    pub fn lift(&self, cluster: &Cluster) -> Vec<usize> {
        let mut out: Vec<usize> = cluster
            .members
            .iter()
            .flat_map(|&m| self.members[m].iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Color of each G-vertex under a decomposition of `H`.
    pub fn lift_colors(&self, dec: &Decomposition, n: usize) -> Vec<Option<u64>> {
        let mut colors = vec![None; n];
        for c in &dec.clusters {
            for v in self.lift(c) {
                colors[v] = c.color;
            }
        }
        colors
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphModel};

    #[test]
    fn path_halves() {
        let g = generate_graph(&GraphModel::Path { n: 6 }, 0).unwrap();
        let m = MetaGraph::new(&g, vec![(1, vec![0, 1, 2]), (4, vec![3, 4, 5])]).unwrap();
        assert_eq!(m.len(), 2);
        assert!(m.h.has_edge(0, 1));
        assert_eq!(m.radius, 1);
        assert_eq!(m.h.id(1), g.id(4));
        assert_eq!(m.of[5], Some(1));
    }

    #[test]
    fn singletons_mirror_graph() {
        let g = generate_graph(&GraphModel::Clique { n: 4 }, 0).unwrap();
        let m = MetaGraph::singletons(&g).unwrap();
        assert_eq!(m.h.edge_count(), g.edge_count());
        assert_eq!(m.radius, 0);
    }

    #[test]
    fn rejects_bad_groups() {
        let g = generate_graph(&GraphModel::Path { n: 4 }, 0).unwrap();
        assert!(MetaGraph::new(&g, vec![(0, vec![0, 2])]).is_err());
        assert!(MetaGraph::new(&g, vec![(0, vec![0, 1]), (1, vec![1, 2])]).is_err());
        assert!(MetaGraph::new(&g, vec![(3, vec![0, 1])]).is_err());
    }
}
