//! The virtual cluster graph `H` and the merge step built on it.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::graph::{Graph, UNREACHED};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterState {
    LowDegree,
    HighDegree,
    Marked,
}

/// Vertices are live clusters by index (ascending id). `C -> C'` iff the
/// center of `C'` received the id of `C`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualGraphH {
    pub ids: Vec<u128>,
    pub in_lists: Vec<Vec<usize>>,
    pub out_degree: Vec<usize>,
    pub state: Vec<ClusterState>,
    /// Undirected view over unmarked clusters; empty lists for marked ones.
    pub undirected: Vec<Vec<usize>>,
}

impl VirtualGraphH {
    /// `in_ids[i]` holds the ids learned by cluster `i`; a list of `2d`
    /// entries means high degree.
    pub fn new(ids: Vec<u128>, in_ids: &[Vec<u128>], d: u64) -> Result<Self> {
        let index: HashMap<u128, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut in_lists = Vec::with_capacity(ids.len());
        let mut out_degree = vec![0; ids.len()];
        for list in in_ids {
            let mut l = Vec::with_capacity(list.len());
            for id in list {
                let &j = index
                    .get(id)
                    .ok_or_else(|| Error::Invariant(format!("learned unknown cluster {id}")))?;
                out_degree[j] += 1;
                l.push(j);
            }
            in_lists.push(l);
        }
        let state = in_lists
            .iter()
            .map(|l| {
                if l.len() as u64 >= 2 * d {
                    ClusterState::HighDegree
                } else {
                    ClusterState::LowDegree
                }
            })
            .collect();
        Ok(Self {
            undirected: vec![Vec::new(); ids.len()],
            ids,
            in_lists,
            out_degree,
            state,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn is_marked(&self, i: usize) -> bool {
        self.state[i] == ClusterState::Marked
    }

    /// Maximum degree of the undirected unmarked view.
    pub fn max_degree(&self) -> usize {
        self.undirected.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Adjacency of the square of the undirected view.
    pub fn square(&self) -> Vec<Vec<usize>> {
        (0..self.len())
            .map(|v| {
                let mut s = BTreeSet::new();
                for &u in &self.undirected[v] {
                    s.insert(u);
                    s.extend(self.undirected[u].iter().copied());
                }
                s.remove(&v);
                s.into_iter().collect()
            })
            .collect()
    }
}

/// Marks clusters whose id reached more than `4d^2` centers and builds the
/// undirected view over the rest. Returns the number of marked clusters.
pub fn mark_high_outdegree(h: &mut VirtualGraphH, d: u64) -> usize {
    let limit = (4 * d * d) as usize;
    let mut marked = 0;
    for i in 0..h.len() {
        if h.out_degree[i] > limit {
            h.state[i] = ClusterState::Marked;
            marked += 1;
        }
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); h.len()];
    for b in 0..h.len() {
        for &a in &h.in_lists[b] {
            if !h.is_marked(a) && !h.is_marked(b) {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
    }
    h.undirected = adj.into_iter().map(|s| s.into_iter().collect()).collect();
    marked
}

/// Scans color classes of a proper coloring of the square in ascending
/// order and adds each high-degree unmarked cluster with no chosen cluster
/// within two hops. Returns chosen indices ascending and the number of
/// nonempty color classes scanned.
pub fn maximal_2_independent(h: &VirtualGraphH, colors: &[u64]) -> Result<(Vec<usize>, usize)> {
    let sq = h.square();
    for v in 0..h.len() {
        if !h.is_marked(v) && sq[v].iter().any(|&u| colors[u] == colors[v]) {
            return Err(Error::Invariant(format!(
                "coloring of the square is improper at cluster {}",
                h.ids[v]
            )));
        }
    }
    let mut classes: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for v in 0..h.len() {
        if h.state[v] == ClusterState::HighDegree {
            classes.entry(colors[v]).or_default().push(v);
        }
    }
    let mut chosen = vec![false; h.len()];
    for class in classes.values() {
        for &v in class {
            if !sq[v].iter().any(|&u| chosen[u]) {
                chosen[v] = true;
            }
        }
    }
    Ok(((0..h.len()).filter(|&v| chosen[v]).collect(), classes.len()))
}

/// A new cluster: the old clusters it absorbs and the cluster pairs whose
/// trees are joined by a short G-path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub center: usize,
    pub parts: Vec<usize>,
    pub links: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergePlan {
    pub groups: Vec<Group>,
    pub residual: Vec<usize>,
    /// Chosen clusters that moved to a marked cluster.
    pub rerouted: usize,
}

/// Unmarked clusters within two hops of `c_star` join the nearest chosen
/// cluster (smallest id on ties); a chosen cluster with a marked neighbor
/// moves its whole group to the smallest such marked cluster; every marked
/// cluster centers a group. Everything else is residual and must be low degree.
pub fn plan_merges(
    h: &VirtualGraphH,
    c_star: &[usize],
    marked_neighbor: &[Option<usize>],
) -> Result<MergePlan> {
    let n = h.len();
    // (distance, chosen id, via) per cluster, by multi-source BFS in id order
    let mut target: Vec<Option<(u32, usize, usize)>> = vec![None; n];
    for &c in c_star {
        target[c] = Some((0, c, c));
    }
    for dist in 1..=2u32 {
        for v in 0..n {
            if target[v].is_some() || h.is_marked(v) {
                continue;
            }
            let best = h.undirected[v]
                .iter()
                .filter_map(|&u| match target[u] {
                    Some((du, c, _)) if du == dist - 1 => Some((h.ids[c], c, u)),
                    _ => None,
                })
                .min();
            if let Some((_, c, u)) = best {
                target[v] = Some((dist, c, u));
            }
        }
    }
    let mut groups: BTreeMap<usize, Group> = BTreeMap::new();
    for &c in c_star {
        groups.insert(
            c,
            Group {
                center: c,
                parts: vec![c],
                links: Vec::new(),
            },
        );
    }
    for v in 0..n {
        if let Some((dist, c, via)) = target[v] {
            if dist > 0 {
                let g = groups.get_mut(&c).expect("chosen group");
                g.parts.push(v);
                g.links.push((via, v));
            }
        }
    }
    let mut out: BTreeMap<usize, Group> = BTreeMap::new();
    for m in (0..n).filter(|&m| h.is_marked(m)) {
        out.insert(
            m,
            Group {
                center: m,
                parts: vec![m],
                links: Vec::new(),
            },
        );
    }
    let mut rerouted = 0;
    for (c, group) in groups {
        match marked_neighbor[c] {
            Some(m) => {
                let target = out.get_mut(&m).ok_or_else(|| {
                    Error::Invariant(format!("cluster {} is not marked", h.ids[m]))
                })?;
                target.parts.extend(group.parts);
                target.links.push((m, c));
                target.links.extend(group.links);
                rerouted += 1;
            }
            None => {
                out.insert(c, group);
            }
        }
    }
    let mut assigned = vec![false; n];
    for g in out.values() {
        for &p in &g.parts {
            if assigned[p] {
                return Err(Error::Invariant(format!(
                    "cluster {} assigned twice",
                    h.ids[p]
                )));
            }
            assigned[p] = true;
        }
    }
    let residual: Vec<usize> = (0..n).filter(|&v| !assigned[v]).collect();
    if let Some(&v) = residual
        .iter()
        .find(|&&v| h.state[v] != ClusterState::LowDegree)
    {
        return Err(Error::Invariant(format!(
            "high-degree cluster {} left unassigned",
            h.ids[v]
        )));
    }
    let mut groups: Vec<Group> = out.into_values().collect();
    for g in &mut groups {
        g.parts.sort_unstable();
    }
    groups.sort_by_key(|g| h.ids[g.center]);
    Ok(MergePlan {
        groups,
        residual,
        rerouted,
    })
}

/// Shortest G-path (at most `cap` hops) from a node of `from` to a node of
/// `to`; ties go to the smallest node index at every step.
pub fn connecting_path(g: &Graph, from: &[usize], to: &[usize], cap: u32) -> Option<Vec<usize>> {
    let mut dist = vec![UNREACHED; g.n()];
    let mut queue = VecDeque::new();
    for &s in from {
        dist[s] = 0;
        queue.push_back(s);
    }
    let targets: BTreeSet<usize> = to.iter().copied().collect();
    let mut hit = targets.iter().copied().find(|&t| dist[t] == 0);
    let mut level = 0;
    while hit.is_none() && level < cap && !queue.is_empty() {
        let mut next = VecDeque::new();
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if dist[v] == UNREACHED {
                    dist[v] = level + 1;
                    next.push_back(v);
                }
            }
        }
        level += 1;
        hit = targets.iter().copied().find(|&t| dist[t] == level);
        queue = next;
    }
    let mut path = vec![hit?];
    while dist[*path.last().unwrap()] > 0 {
        let u = *path.last().unwrap();
        let &p = g
            .neighbors(u)
            .iter()
            .find(|&&p| dist[p] == dist[u] - 1)
            .expect("BFS predecessor");
        path.push(p);
    }
    path.reverse();
    Some(path)
}

/// Builds the cluster for one group: members are the union of the parts,
/// the tree is a BFS tree from the new center over the parts' trees and
/// the connecting paths, pruned of non-member leaves.
pub fn build_group_cluster(g: &Graph, live: &[Cluster], group: &Group, k: u32) -> Result<Cluster> {
    let center = live[group.center].center;
    let mut members = Vec::new();
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut add = |u: usize, v: usize| {
        adj.entry(u).or_default().insert(v);
        adj.entry(v).or_default().insert(u);
    };
    for &p in &group.parts {
        members.extend_from_slice(&live[p].members);
        for &(u, v) in &live[p].tree_edges {
            add(u, v);
        }
    }
    for &(a, b) in &group.links {
        let path = connecting_path(g, &live[a].members, &live[b].members, k).ok_or_else(|| {
            Error::Invariant(format!(
                "clusters {} and {} are linked but farther than {k} apart",
                live[a].id, live[b].id
            ))
        })?;
        for w in path.windows(2) {
            add(w[0], w[1]);
        }
    }
    members.sort_unstable();
    let is_member = |v: usize| members.binary_search(&v).is_ok();
    let mut parent: BTreeMap<usize, usize> = BTreeMap::from([(center, center)]);
    let mut queue = VecDeque::from([center]);
    while let Some(u) = queue.pop_front() {
        for &v in adj.get(&u).into_iter().flatten() {
            if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(v) {
                e.insert(u);
                queue.push_back(v);
            }
        }
    }
    if let Some(&m) = members.iter().find(|m| !parent.contains_key(m)) {
        return Err(Error::Invariant(format!("merged tree misses member {m}")));
    }
    let mut children: BTreeMap<usize, usize> = BTreeMap::new();
    for (&v, &p) in &parent {
        if v != p {
            *children.entry(p).or_default() += 1;
        }
    }
    let mut keep: BTreeSet<usize> = parent.keys().copied().collect();
    let mut leaves: Vec<usize> = keep
        .iter()
        .copied()
        .filter(|v| !children.contains_key(v) && !is_member(*v))
        .collect();
    while let Some(v) = leaves.pop() {
        keep.remove(&v);
        let p = parent[&v];
        let c = children.get_mut(&p).expect("parent has children");
        *c -= 1;
        if *c == 0 && !is_member(p) {
            leaves.push(p);
        }
    }
    let edges = keep
        .iter()
        .filter(|&&v| v != center)
        .map(|&v| (v, parent[&v]))
        .collect();
    Ok(Cluster::new(g, center, members, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h_from(ids: Vec<u128>, lists: Vec<Vec<u128>>, d: u64) -> VirtualGraphH {
        let mut h = VirtualGraphH::new(ids, &lists, d).unwrap();
        mark_high_outdegree(&mut h, d);
        h
    }

    #[test]
    fn nothing_marked_when_out_degrees_small() {
        let h = h_from(vec![0, 1, 2], vec![vec![1], vec![0, 2], vec![1]], 1);
        assert!(h.state.iter().all(|&s| s != ClusterState::Marked));
        assert_eq!(h.state[1], ClusterState::HighDegree);
    }

    #[test]
    fn hub_marked() {
        // d = 1: a hub heard by 5 > 4 centers
        let ids: Vec<u128> = (0..6).collect();
        let mut lists = vec![vec![]];
        lists.extend((1..6).map(|_| vec![0]));
        let h = h_from(ids, lists, 1);
        assert_eq!(h.state[0], ClusterState::Marked);
        assert_eq!(h.out_degree[0], 5);
        assert!(h.undirected[1].is_empty());
    }

    #[test]
    fn two_independent_on_cycle() {
        // five high-degree clusters on a cycle, d = 1 so 2 in-edges mean high degree
        let ids: Vec<u128> = (0..5).collect();
        let lists = vec![vec![1, 4], vec![0, 2], vec![1, 3], vec![2, 4], vec![3, 0]];
        let mut h = VirtualGraphH::new(ids.clone(), &lists, 1).unwrap();
        mark_high_outdegree(&mut h, 1);
        let colors: Vec<u64> = (0..5).collect();
        let (c, _) = maximal_2_independent(&h, &colors).unwrap();
        let sq = h.square();
        for &a in &c {
            assert!(c.iter().all(|&b| a == b || !sq[a].contains(&b)));
        }
        for v in 0..5 {
            assert!(c.contains(&v) || sq[v].iter().any(|u| c.contains(u)));
        }
        assert!(maximal_2_independent(&h, &[0; 5]).is_err());
    }

    #[test]
    fn empty_c_star_without_high_degree() {
        let h = h_from(vec![0, 1], vec![vec![1], vec![0]], 4);
        let (c, _) = maximal_2_independent(&h, &[0, 1]).unwrap();
        assert!(c.is_empty());
        let plan = plan_merges(&h, &c, &[None, None]).unwrap();
        assert!(plan.groups.is_empty());
        assert_eq!(plan.residual, vec![0, 1]);
    }

    #[test]
    fn case_one_and_case_two() {
        // d = 1; cluster 0 hears 1 and 2
        let h = h_from(vec![0, 1, 2], vec![vec![1, 2], vec![0], vec![0]], 1);
        let plan = plan_merges(&h, &[0], &[None, None, None]).unwrap();
        assert_eq!(plan.groups.len(), 1);
        assert_eq!(plan.groups[0].parts, vec![0, 1, 2]);

        // cluster 3 is marked and near cluster 0
        let ids: Vec<u128> = (0..9).collect();
        let mut lists = vec![vec![1, 2], vec![0], vec![0], vec![]];
        lists.extend((4..9).map(|_| vec![3]));
        let h = h_from(ids, lists, 1);
        assert!(h.is_marked(3));
        let mut mn = vec![None; 9];
        mn[0] = Some(3);
        let plan = plan_merges(&h, &[0], &mn).unwrap();
        let g3 = plan.groups.iter().find(|g| g.center == 3).unwrap();
        assert_eq!(g3.parts, vec![0, 1, 2, 3]);
        assert_eq!(plan.rerouted, 1);
    }

    #[test]
    fn path_and_tree_building() {
        let g = crate::graph::generate_graph(&crate::graph::GraphModel::Path { n: 6 }, 0).unwrap();
        assert_eq!(
            connecting_path(&g, &[0], &[3, 5], 3),
            Some(vec![0, 1, 2, 3])
        );
        assert_eq!(connecting_path(&g, &[0], &[5], 3), None);
        let live = vec![
            Cluster::singleton(&g, 0),
            Cluster::singleton(&g, 2),
            Cluster::singleton(&g, 5),
        ];
        let group = Group {
            center: 0,
            parts: vec![0, 1],
            links: vec![(0, 1)],
        };
        let c = build_group_cluster(&g, &live, &group, 2).unwrap();
        assert_eq!(c.members, vec![0, 2]);
        assert_eq!(c.tree_edges, vec![(0, 1), (1, 2)]);
    }
}
