//! Diagnostics of the undecided set after the first iterations.

use serde::{Deserialize, Serialize};

use crate::graph::{multi_bfs, Graph, UNREACHED};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShatterReport {
    pub undecided: usize,
    /// Component sizes of `G[B]`, largest first.
    pub component_sizes: Vec<usize>,
    pub max_component: usize,
    /// `log_delta(n) * delta^4`.
    pub p2_unit: f64,
    /// `max_component / p2_unit`.
    pub fitted_c: f64,
    /// Largest set found that is independent in `G^4` and connected in
    /// `G^9`; a lower-bound witness only.
    pub p1_witness: usize,
    /// `log_delta(n)`, the size the P1 property forbids reaching.
    pub p1_limit: f64,
}

pub fn shatter_check(g: &Graph, b: &[usize], delta: usize) -> ShatterReport {
    let n = g.n() as f64;
    let d = delta.max(2) as f64;
    let log_d_n = n.ln() / d.ln();
    let p2_unit = log_d_n * d.powi(4);
    let mut report = ShatterReport {
        undecided: b.len(),
        p2_unit,
        p1_limit: log_d_n,
        ..Default::default()
    };
    if b.is_empty() {
        return report;
    }
    let (gb, back) = g.induced(b);
    let mut sizes = Vec::new();
    for comp in gb.components() {
        sizes.push(comp.len());
        let nodes: Vec<usize> = comp.iter().map(|&i| back[i]).collect();
        report.p1_witness = report.p1_witness.max(p1_witness(g, &nodes));
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    report.max_component = sizes[0];
    report.fitted_c = report.max_component as f64 / p2_unit;
    report.component_sizes = sizes;
    report
}

/// Greedy nodes pairwise more than 4 apart in `G`, then the largest group
/// connected through pairs at most 9 apart.
fn p1_witness(g: &Graph, nodes: &[usize]) -> usize {
    let mut blocked = vec![false; g.n()];
    let mut picked = Vec::new();
    for &v in nodes {
        if !blocked[v] {
            picked.push(v);
            for (u, &d) in multi_bfs(g, &[v], 4).iter().enumerate() {
                if d != UNREACHED {
                    blocked[u] = true;
                }
            }
        }
    }
    let mut parent: Vec<usize> = (0..picked.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut index = vec![usize::MAX; g.n()];
    for (i, &v) in picked.iter().enumerate() {
        index[v] = i;
    }
    for (i, &v) in picked.iter().enumerate() {
        for (u, &d) in multi_bfs(g, &[v], 9).iter().enumerate() {
            if d != UNREACHED && index[u] != usize::MAX {
                let (a, b) = (find(&mut parent, i), find(&mut parent, index[u]));
                parent[a] = b;
            }
        }
    }
    let mut count = vec![0usize; picked.len()];
    for i in 0..picked.len() {
        let r = find(&mut parent, i);
        count[r] += 1;
    }
    count.into_iter().max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphModel};

    #[test]
    fn empty_and_single() {
        let g = generate_graph(&GraphModel::Path { n: 4 }, 0).unwrap();
        let r = shatter_check(&g, &[], 2);
        assert_eq!(r.max_component, 0);
        assert!(r.component_sizes.is_empty());
        let r = shatter_check(&g, &[2], 2);
        assert_eq!(r.component_sizes, vec![1]);
        assert_eq!(r.p1_witness, 1);
    }

    #[test]
    fn long_path_witness() {
        let g = generate_graph(&GraphModel::Path { n: 30 }, 0).unwrap();
        let all: Vec<usize> = (0..30).collect();
        let r = shatter_check(&g, &all, 2);
        assert_eq!(r.component_sizes, vec![30]);
        // nodes 0, 5, 10, 15, 20, 25 are 5 apart and chain within 9
        assert_eq!(r.p1_witness, 6);
    }
}
