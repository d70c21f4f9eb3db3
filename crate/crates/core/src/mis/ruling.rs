//! Deterministic ruling sets by identifier bits, and the meta-node
//! clustering around the chosen nodes.

use serde::{Deserialize, Serialize};

use crate::cluster::RulingSetResult;
use crate::error::{Error, Result};
use crate::graph::{multi_bfs, Graph, UNREACHED};
use crate::refine::MetaGraph;
use crate::sim::RoundStats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RulingOutput {
    /// In indices of `g`; distances are measured in `G[base]`.
    pub result: RulingSetResult,
    /// One level per identifier bit, each a `(k - 1)`-hop flood of one-bit messages.
    pub stats: RoundStats,
}

/// `(k, (k - 1) * id_bits)`-ruling set of `base` with respect to distances
/// in `G[base]`: split by the top identifier bit, solve both halves, then
/// drop the chosen nodes of the 1-half that lie within `k - 1` of the
/// chosen nodes of the 0-half.
pub fn ruling_set(g: &Graph, base: &[usize], k: u32) -> Result<RulingOutput> {
    if k == 0 {
        return Err(Error::InvalidParams("ruling set needs k >= 1".into()));
    }
    if let Some(&v) = base.iter().find(|&&v| v >= g.n()) {
        return Err(Error::UnknownNode(v));
    }
    let mut sorted = base.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() {
        return Ok(RulingOutput {
            result: RulingSetResult {
                base: vec![],
                chosen: vec![],
                alpha: k,
                beta: 0,
            },
            stats: RoundStats::default(),
        });
    }
    let (gb, back) = g.induced(&sorted);
    let bits = g.id_bits();
    let local: Vec<usize> = (0..gb.n()).collect();
    let mut chosen: Vec<usize> = split(&gb, local, bits, k)
        .into_iter()
        .map(|v| back[v])
        .collect();
    chosen.sort_unstable();
    Ok(RulingOutput {
        result: RulingSetResult {
            base: sorted,
            chosen,
            alpha: k,
            beta: (k - 1) * bits,
        },
        stats: RoundStats {
            rounds: (bits * (k - 1)) as usize,
            max_bits_per_edge_round: usize::from(k > 1),
            ..RoundStats::default()
        },
    })
}

fn split(gb: &Graph, set: Vec<usize>, bits: u32, k: u32) -> Vec<usize> {
    if set.len() <= 1 || bits == 0 {
        return set;
    }
    let bit = bits - 1;
    let (zeros, ones): (Vec<usize>, Vec<usize>) =
        set.into_iter().partition(|&v| gb.id(v) >> bit & 1 == 0);
    let mut r0 = split(gb, zeros, bit, k);
    let r1 = split(gb, ones, bit, k);
    if r0.is_empty() || k == 1 {
        r0.extend(r1);
        return r0;
    }
    let dist = multi_bfs(gb, &r0, k - 1);
    r0.extend(r1.into_iter().filter(|&v| dist[v] == UNREACHED));
    r0
}

/// Meta-nodes: each node of `base` joins the nearest chosen node in
/// `G[base]`, ties to the smaller identifier (the first one heard in a
/// synchronous flood started in identifier order).
pub fn build_meta_graph(g: &Graph, base: &[usize], chosen: &[usize]) -> Result<MetaGraph> {
    let mut in_base = vec![false; g.n()];
    for &v in base {
        in_base[v] = true;
    }
    let mut rulers = chosen.to_vec();
    rulers.sort_by_key(|&v| g.id(v));
    let mut owner = vec![usize::MAX; g.n()];
    let mut queue = std::collections::VecDeque::new();
    for (i, &r) in rulers.iter().enumerate() {
        if !in_base[r] {
            return Err(Error::InvalidParams(format!(
                "chosen node {r} outside the base set"
            )));
        }
        owner[r] = i;
        queue.push_back(r);
    }
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if in_base[w] && owner[w] == usize::MAX {
                owner[w] = owner[u];
                queue.push_back(w);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = rulers.iter().map(|&r| (r, Vec::new())).collect();
    for &v in base {
        if owner[v] == usize::MAX {
            return Err(Error::InvalidParams(format!(
                "base node {v} reaches no chosen node"
            )));
        }
        groups[owner[v]].1.push(v);
    }
    MetaGraph::new(g, groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::validate_ruling_set;
    use crate::graph::{bit_length, generate_graph, GraphModel};

    #[test]
    fn single_node() {
        let g = generate_graph(&GraphModel::Path { n: 3 }, 0).unwrap();
        let r = ruling_set(&g, &[1], 5).unwrap().result;
        assert_eq!(r.chosen, vec![1]);
    }

    #[test]
    fn path5_k2() {
        let g = generate_graph(&GraphModel::Path { n: 5 }, 0).unwrap();
        let r = ruling_set(&g, &[0, 1, 2, 3, 4], 2).unwrap().result;
        validate_ruling_set(&g, &r).unwrap();
        let max_id = g.ids().iter().copied().max().unwrap();
        assert!(r.beta <= 2 * bit_length(max_id));
    }

    #[test]
    fn clique_picks_one() {
        let g = generate_graph(&GraphModel::Clique { n: 6 }, 0).unwrap();
        let r = ruling_set(&g, &(0..6).collect::<Vec<_>>(), 2)
            .unwrap()
            .result;
        assert_eq!(r.chosen.len(), 1);
    }

    #[test]
    fn random_subsets_validate() {
        for seed in 0..10 {
            let g = generate_graph(
                &GraphModel::Gnp {
                    n: 120,
                    p: 0.04,
                    connected: false,
                },
                seed,
            )
            .unwrap();
            let base: Vec<usize> = (0..120).filter(|v| v % 3 != 0).collect();
            let out = ruling_set(&g, &base, 5).unwrap().result;
            let (gb, back) = g.induced(&base);
            let local = RulingSetResult {
                base: (0..gb.n()).collect(),
                chosen: out
                    .chosen
                    .iter()
                    .map(|c| back.binary_search(c).unwrap())
                    .collect(),
                ..out.clone()
            };
            validate_ruling_set(&gb, &local).unwrap();
        }
    }

    #[test]
    fn meta_nodes_split_path_by_tie_rule() {
        let g = generate_graph(&GraphModel::Path { n: 5 }, 0).unwrap();
        let m = build_meta_graph(&g, &[0, 1, 2, 3, 4], &[0, 4]).unwrap();
        let small = if g.id(0) < g.id(4) { 0 } else { 1 };
        assert_eq!(m.members[small].len(), 3);
        assert_eq!(m.members[1 - small].len(), 2);
        assert_eq!(m.h.edge_count(), 1);
    }

    #[test]
    fn all_chosen_gives_singletons() {
        let g = generate_graph(&GraphModel::Grid { rows: 3, cols: 3 }, 0).unwrap();
        let all: Vec<usize> = (0..9).collect();
        let m = build_meta_graph(&g, &all, &all).unwrap();
        assert_eq!(m.len(), 9);
        assert_eq!(m.h.edge_count(), g.edge_count());
    }
}
