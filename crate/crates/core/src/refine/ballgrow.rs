//! Deterministic ball growing over `H`, one color per phase.
//!
//! A ball node is a boundary node when it has an active neighbor outside
//! the ball; a ball is good when it has fewer boundary than interior nodes.
//! A ball that is not good absorbs all active outside neighbors. Once good,
//! its interior becomes output clusters and its boundary is deactivated
//! for the rest of the phase.

use super::{
    check_non_adjacent, color_classes, component_clusters, strong_diameter, RefineOutput,
    RefinePhaseLog,
};
use crate::cluster::{Cluster, Decomposition};
use crate::error::{Error, Result};
use crate::graph::{ceil_log2, Graph};
use crate::sim::RoundStats;

/// Separation of the intermediate decomposition needed for `n` meta-nodes:
/// balls grow at most `ceil(log2 n) + 1` hops and must stay non-adjacent.
pub fn ball_separation(n: usize) -> u32 {
    2 * ceil_log2(n as u128) + 4
}

/// Hop limit for one ball; exceeding it means the doubling argument broke.
fn growth_limit(n: usize) -> u32 {
    ceil_log2(n as u128) + 1
}

/// Splits `ball` into `(boundary, interior)` with respect to `active`.
fn split(h: &Graph, ball: &[usize], in_ball: &[bool], active: &[bool]) -> (Vec<usize>, Vec<usize>) {
    ball.iter()
        .partition(|&&v| h.neighbors(v).iter().any(|&w| active[w] && !in_ball[w]))
}

pub fn ball_grow_refine(h: &Graph, intermediate: &Decomposition) -> Result<RefineOutput> {
    let n = h.n();
    if intermediate.k < ball_separation(n) {
        return Err(Error::InvalidParams(format!(
            "intermediate separation {} below {}",
            intermediate.k,
            ball_separation(n)
        )));
    }
    let classes = color_classes(h, intermediate)?;
    let inter_radius = intermediate
        .clusters
        .iter()
        .filter_map(Cluster::radius_g)
        .max()
        .unwrap_or(0) as usize;
    let mut remaining = vec![true; n];
    let mut left = n;
    let mut clusters = Vec::new();
    let mut phases = Vec::new();
    let mut rounds = 0usize;
    let mut max_diam = 0;
    let mut phase = 0;
    while left > 0 {
        if phase > n {
            return Err(Error::Invariant("ball growing made no progress".into()));
        }
        let color = phase as u64;
        let mut active = remaining.clone();
        let mut log = RefinePhaseLog {
            phase,
            remaining_at_start: left,
            ..Default::default()
        };
        let mut made: Vec<Cluster> = Vec::new();
        for list in classes.values() {
            // owner[v] = index in `list` of the ball holding v during this color
            let mut owner = vec![usize::MAX; n];
            let mut hops_this_color = 0;
            for (bi, &x) in list.iter().enumerate() {
                let mut ball: Vec<usize> = intermediate.clusters[x]
                    .members
                    .iter()
                    .copied()
                    .filter(|&m| active[m])
                    .collect();
                if ball.is_empty() {
                    continue;
                }
                let mut in_ball = vec![false; n];
                for &v in &ball {
                    in_ball[v] = true;
                }
                let mut hops = 0;
                let (boundary, interior) = loop {
                    let (boundary, interior) = split(h, &ball, &in_ball, &active);
                    if boundary.len() < interior.len() {
                        break (boundary, interior);
                    }
                    hops += 1;
                    if hops > growth_limit(n) {
                        return Err(Error::Invariant(format!(
                            "ball of cluster {} grew more than {} hops",
                            intermediate.clusters[x].id,
                            growth_limit(n)
                        )));
                    }
                    let mut grown = Vec::new();
                    for &v in &boundary {
                        for &w in h.neighbors(v) {
                            if active[w] && !in_ball[w] {
                                in_ball[w] = true;
                                grown.push(w);
                            }
                        }
                    }
                    ball.extend(grown);
                };
                for &v in &ball {
                    let touches = h
                        .neighbors(v)
                        .iter()
                        .any(|&w| owner[w] != usize::MAX && owner[w] != bi);
                    if owner[v] != usize::MAX || touches {
                        return Err(Error::Invariant(format!(
                            "balls of one color touch at node {v}; separation too small"
                        )));
                    }
                    owner[v] = bi;
                }
                hops_this_color = hops_this_color.max(hops);
                log.max_growth = log.max_growth.max(hops);
                for &v in &boundary {
                    active[v] = false;
                }
                for &v in &interior {
                    active[v] = false;
                    remaining[v] = false;
                }
                log.deactivated += boundary.len();
                log.clustered += interior.len();
                left -= interior.len();
                made.extend(component_clusters(h, &interior, color));
            }
            // per hop: count boundary and interior at the center and announce the verdict
            rounds +=
                (hops_this_color as usize + 1) * 2 * (inter_radius + hops_this_color as usize + 1);
        }
        for c in &made {
            max_diam = max_diam.max(strong_diameter(h, &c.members));
        }
        check_non_adjacent(h, &made)?;
        if log.clustered == 0 {
            return Err(Error::Invariant(format!("phase {phase} clustered nothing")));
        }
        clusters.extend(made);
        phases.push(log);
        phase += 1;
    }
    Ok(RefineOutput {
        decomposition: Decomposition { k: 1, clusters },
        phases,
        max_strong_diameter: max_diam,
        runs: Vec::new(),
        stats: RoundStats {
            rounds,
            ..RoundStats::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::validate_decomposition;
    use crate::graph::{generate_graph, GraphModel};
    use crate::netdecomp::Mode;
    use crate::refine::intermediate_decomposition;

    fn refine(h: &Graph) -> RefineOutput {
        let inter = intermediate_decomposition(h, ball_separation(h.n()), Mode::Central).unwrap();
        ball_grow_refine(h, &inter).unwrap()
    }

    #[test]
    fn isolated_ball_emitted_at_once() {
        let h = Graph::from_edges(1, &[]).unwrap();
        let out = refine(&h);
        assert_eq!(out.decomposition.clusters.len(), 1);
        assert_eq!(out.phases[0].max_growth, 0);
    }

    #[test]
    fn all_boundary_ball_doubles() {
        // ball {0, 1}, each with its own private neighbor
        let h = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3)]).unwrap();
        let active = vec![true; 4];
        let in_ball = vec![true, true, false, false];
        let (boundary, interior) = split(&h, &[0, 1], &in_ball, &active);
        assert_eq!((boundary.len(), interior.len()), (2, 0));
        let all = vec![true; 4];
        let (boundary, interior) = split(&h, &[0, 1, 2, 3], &all, &active);
        assert_eq!((boundary.len(), interior.len()), (0, 4));
    }

    #[test]
    fn grid_8x8() {
        let h = generate_graph(&GraphModel::Grid { rows: 8, cols: 8 }, 0).unwrap();
        let out = refine(&h);
        let rep = validate_decomposition(&h, &out.decomposition);
        assert!(rep.valid, "{:?}", rep.failures);
        assert!(
            out.decomposition.colors_used() <= 7,
            "{}",
            out.decomposition.colors_used()
        );
        for p in &out.phases {
            assert!(p.clustered > p.deactivated);
            assert!(p.max_growth <= growth_limit(64));
        }
    }
}
