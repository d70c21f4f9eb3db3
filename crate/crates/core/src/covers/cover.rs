//! k-neighborhood covers: every cluster of a decomposition of `G^{2k}`
//! grows by its `k`-neighborhood.

use serde::{Deserialize, Serialize};

use crate::cluster::{tree_diameter, Cluster, Decomposition, NeighborhoodCover};
use crate::error::{Error, Result};
use crate::graph::{bfs_within, multi_bfs, Graph, UNREACHED};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverOutput {
    /// `cover.d` is the bound `d + 2k`, `d` the largest input tree diameter.
    pub cover: NeighborhoodCover,
    pub input_diameter: u32,
    /// Largest tree diameter after expansion.
    pub measured_diameter: u32,
    /// Modeled: every color class floods `k` hops and hooks the new nodes
    /// onto the tree, with up to `s` clusters sharing an edge.
    pub rounds: usize,
}

pub fn cover_from_decomposition(g: &Graph, k: u32, dec: &Decomposition) -> Result<CoverOutput> {
    let n = g.n();
    if dec.k < 2 * k {
        return Err(Error::InvalidParams(format!(
            "decomposition separates {} hops, a {k}-cover needs {}",
            dec.k + 1,
            2 * k + 1
        )));
    }
    let mut owner = vec![usize::MAX; n];
    for (i, c) in dec.clusters.iter().enumerate() {
        if c.color.is_none() {
            return Err(Error::InvalidParams(format!(
                "cluster {} has no color",
                c.id
            )));
        }
        for &m in &c.members {
            if m >= n {
                return Err(Error::UnknownNode(m));
            }
            if owner[m] != usize::MAX {
                return Err(Error::InvalidParams(format!(
                    "node {m} lies in two clusters"
                )));
            }
            owner[m] = i;
        }
    }
    if let Some(v) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(Error::InvalidParams(format!("node {v} lies in no cluster")));
    }
    let mut clusters = Vec::with_capacity(dec.clusters.len());
    let mut input_diameter = 0;
    let mut measured = 0;
    for (i, c) in dec.clusters.iter().enumerate() {
        let near = multi_bfs(g, &c.members, 2 * k);
        if let Some(v) = (0..n).find(|&v| {
            near[v] != UNREACHED && owner[v] != i && dec.clusters[owner[v]].color == c.color
        }) {
            return Err(Error::InvalidParams(format!(
                "clusters {} and {} share color {:?} within {} hops",
                c.id, dec.clusters[owner[v]].id, c.color, near[v]
            )));
        }
        let members: Vec<usize> = (0..n).filter(|&v| near[v] <= k).collect();
        let inside = |v: usize| near[v] <= k;
        let roots = c.tree_nodes();
        if let Some(&x) = roots.iter().find(|&&x| !inside(x)) {
            return Err(Error::Invariant(format!(
                "cluster {}: tree node {x} farther than {k} from members",
                c.id
            )));
        }
        let dist = bfs_within(g, &roots, UNREACHED - 1, &inside);
        let mut edges = c.tree_edges.clone();
        for &v in &members {
            if dist[v] == 0 {
                continue;
            }
            let parent = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&u| inside(u) && dist[u] + 1 == dist[v])
                .min_by_key(|&u| g.id(u))
                .ok_or_else(|| {
                    Error::Invariant(format!("cluster {}: node {v} cannot join the tree", c.id))
                })?;
            edges.push((parent, v));
        }
        let before = tree_diameter(&c.tree_edges, c.center).unwrap_or(0);
        let mut grown = Cluster::new(g, c.center, members, edges);
        grown.color = c.color;
        let after = tree_diameter(&grown.tree_edges, grown.center).unwrap_or(0);
        if after > before + 2 * k {
            return Err(Error::Invariant(format!(
                "cluster {}: tree diameter grew from {before} to {after}",
                c.id
            )));
        }
        input_diameter = input_diameter.max(before);
        measured = measured.max(after);
        clusters.push(grown);
    }
    let s = dec.colors_used();
    Ok(CoverOutput {
        cover: NeighborhoodCover {
            k,
            s,
            d: input_diameter + 2 * k,
            clusters,
        },
        input_diameter,
        measured_diameter: measured,
        rounds: s * (k as usize + 1),
    })
}
