//! Deterministic network decomposition of `G^k`.
//!
//! Phases `1..=s` with `s = ceil(sqrt(log2 N))` and growth `d = 2^s`. Each
//! phase learns up to `2d` neighboring clusters per cluster, marks clusters
//! heard by more than `4d^2` centers, picks a maximal 2-independent set of
//! high-degree clusters on the rest, merges around it and around marked
//! clusters, and colors the remaining low-degree clusters with a fresh palette.

mod learn;
mod linial;
mod virtual_graph;

pub use learn::{learn_neighbors, marked_neighbors};
pub use linial::{is_prime, linial_color, linial_schedule, next_prime, LinialResult};
pub use virtual_graph::{
    build_group_cluster, connecting_path, mark_high_outdegree, maximal_2_independent, plan_merges,
    ClusterState, Group, MergePlan, VirtualGraphH,
};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cluster::{Cluster, Decomposition};
use crate::error::{Error, Result};
use crate::graph::{ceil_sqrt_log2, Graph};
use crate::sim::{RoundStats, SimConfig};

/// How cluster-to-cluster discovery is executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Message passing on the engine.
    Simulated,
    /// Same rules evaluated centrally with BFS; an oracle for `Simulated`.
    Central,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetConfig {
    pub k: u32,
    pub mode: Mode,
    pub sim: SimConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseLog {
    pub phase: usize,
    pub clusters_at_start: usize,
    /// Clusters carried into the next phase (invariant A: at most `N / d^i`).
    pub cluster_count: usize,
    pub max_radius_gk: u32,
    pub max_radius_g: u32,
    /// Most trees sharing one G-edge during the phase (invariant C: at most `i * 13 d^3`).
    pub max_overlap: usize,
    pub overlap_bound: u128,
    pub high_degree: usize,
    pub marked: usize,
    pub c_star: usize,
    pub rerouted: usize,
    pub residual_colored: usize,
    pub undirected_max_degree: usize,
    pub square_palette: u64,
    pub residual_palette: u64,
    pub linial_iterations: usize,
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantsLog {
    /// Number of initial clusters `N`.
    pub n_initial: usize,
    pub d: u64,
    pub phases_planned: usize,
    pub phases: Vec<PhaseLog>,
    /// Largest ratio of consecutive per-phase `G^k` radii.
    pub radius_growth: f64,
    pub total_palette: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetOutput {
    pub decomposition: Decomposition,
    pub log: InvariantsLog,
    pub stats: RoundStats,
}

/// `(s, d)` for `n_initial` clusters.
pub fn parameters(n_initial: usize) -> (usize, u64) {
    let s = ceil_sqrt_log2(n_initial as u128) as usize;
    (s, 1u64 << s)
}

fn overlap(clusters: &[Cluster]) -> usize {
    let mut load: HashMap<(usize, usize), usize> = HashMap::new();
    for c in clusters {
        for &e in &c.tree_edges {
            *load.entry(e).or_default() += 1;
        }
    }
    load.values().copied().max().unwrap_or(0)
}

fn modeled(rounds: usize) -> RoundStats {
    RoundStats {
        rounds,
        ..RoundStats::default()
    }
}

fn check_init(g: &Graph, init: &[Cluster]) -> Result<()> {
    let mut seen = vec![false; g.n()];
    for c in init {
        if c.tree_depths().is_none() || !c.contains(c.center) || c.id != g.id(c.center) {
            return Err(Error::InvalidParams(format!(
                "initial cluster {} is malformed",
                c.id
            )));
        }
        for &m in &c.members {
            if m >= g.n() || std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidParams(format!(
                    "node {m} repeated or unknown in initial clusters"
                )));
            }
        }
    }
    if let Some(v) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidParams(format!(
            "initial clusters miss node {v}"
        )));
    }
    Ok(())
}

/// Decomposes `G^k`, starting from singletons or from `init` (whose
/// members then stay together).
pub fn decompose(g: &Graph, cfg: &DetConfig, init: Option<Vec<Cluster>>) -> Result<DetOutput> {
    if cfg.k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    cfg.sim.validate(g)?;
    let k = cfg.k;
    let mut live: Vec<Cluster> = match init {
        Some(init) => {
            check_init(g, &init)?;
            init.into_iter()
                .map(|c| Cluster { color: None, ..c })
                .collect()
        }
        None => (0..g.n()).map(|v| Cluster::singleton(g, v)).collect(),
    };
    live.sort_by_key(|c| c.id);
    let n_initial = live.len();
    let (s, d) = parameters(n_initial);
    let id_bits = g.id_bits();
    let mut output: Vec<Cluster> = Vec::new();
    let mut next_color: u64 = 0;
    let mut stats = RoundStats::default();
    let mut phases = Vec::new();
    let d3 = (d as u128).pow(3);

    for phase in 1..=s {
        if live.is_empty() {
            break;
        }
        let mut phase_stats = RoundStats::default();
        let clusters_at_start = live.len();
        let max_overlap = overlap(&live);
        let overlap_bound = phase as u128 * 13 * d3;
        if max_overlap as u128 > overlap_bound {
            return Err(Error::Invariant(format!(
                "phase {phase}: overlap {max_overlap} exceeds {overlap_bound}"
            )));
        }
        let max_radius_gk = live.iter().map(|c| c.radius_gk(g, k)).max().unwrap_or(0);
        let max_radius_g = live.iter().filter_map(Cluster::radius_g).max().unwrap_or(0);
        let cap = overlap_bound.min(usize::MAX as u128) as usize;
        let frame = max_overlap.max(1);
        let h_round = (2 * max_radius_g as usize + k as usize) * frame;

        // learn neighbors
        let (in_ids, st) = learn_neighbors(g, &live, k, d, cap, cfg.mode, &cfg.sim)?;
        phase_stats.then(&st);
        if cfg.mode == Mode::Central {
            phase_stats.then(&modeled(
                k as usize * (2 * d as usize + 1)
                    + (2 * d as usize + max_radius_g as usize) * frame,
            ));
        }
        let ids: Vec<u128> = live.iter().map(|c| c.id).collect();
        let mut h = VirtualGraphH::new(ids.clone(), &in_ids, d)?;
        let high_degree = h
            .state
            .iter()
            .filter(|&&s| s == ClusterState::HighDegree)
            .count();

        // mark, reversing the discovery traffic with 4d^2 messages per edge
        let marked = mark_high_outdegree(&mut h, d);
        if marked as u128 * 2 * d as u128 > clusters_at_start as u128 {
            return Err(Error::Invariant(format!(
                "phase {phase}: {marked} marked clusters exceed count / 2d"
            )));
        }
        let four_d2 = (4 * d * d) as usize;
        phase_stats.then(&modeled(
            four_d2 * k as usize * (2 * d as usize + 1) + (four_d2 + max_radius_g as usize) * frame,
        ));
        let undirected_max_degree = h.max_degree();
        let u_bound = four_d2 + 2 * d as usize;
        if undirected_max_degree > u_bound {
            return Err(Error::Invariant(format!(
                "phase {phase}: unmarked degree {undirected_max_degree} exceeds {u_bound}"
            )));
        }

        // color the square of the unmarked view, then scan color classes
        let sq = h.square();
        let delta_sq = u_bound * u_bound;
        let lin = linial_color(&sq, &ids, id_bits, delta_sq)?;
        let mut linial_iterations = lin.iterations;
        phase_stats.then(&modeled(lin.iterations * 2 * u_bound * h_round));
        let (c_star, classes) = maximal_2_independent(&h, &lin.colors)?;
        phase_stats.then(&modeled(classes * 2 * h_round + 2 * h_round));

        // chosen clusters look for a marked cluster within k hops
        let askers: Vec<&Cluster> = c_star.iter().map(|&c| &live[c]).collect();
        let marked_refs: Vec<&Cluster> = (0..live.len())
            .filter(|&i| h.is_marked(i))
            .map(|i| &live[i])
            .collect();
        let (found, st) = marked_neighbors(g, &askers, &marked_refs, k, cap, cfg.mode, &cfg.sim)?;
        phase_stats.then(&st);
        let index: HashMap<u128, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut marked_neighbor = vec![None; live.len()];
        for (&c, m) in c_star.iter().zip(found) {
            marked_neighbor[c] = m.map(|id| index[&id]);
        }

        let plan = plan_merges(&h, &c_star, &marked_neighbor)?;
        phase_stats.then(&modeled(h_round));

        // residual low-degree clusters: all their neighbors are in their in-lists
        let residual_set: Vec<bool> = {
            let mut r = vec![false; live.len()];
            for &v in &plan.residual {
                r[v] = true;
            }
            r
        };
        let pos: HashMap<usize, usize> = plan
            .residual
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        let mut radj: Vec<Vec<usize>> = vec![Vec::new(); plan.residual.len()];
        for (i, &v) in plan.residual.iter().enumerate() {
            for &u in &h.in_lists[v] {
                if residual_set[u] {
                    radj[i].push(pos[&u]);
                    radj[pos[&u]].push(i);
                }
            }
        }
        for l in &mut radj {
            l.sort_unstable();
            l.dedup();
        }
        let res_delta = (2 * d as usize).saturating_sub(1);
        let rids: Vec<u128> = plan.residual.iter().map(|&v| ids[v]).collect();
        let rlin = linial_color(&radj, &rids, id_bits, res_delta)?;
        linial_iterations += rlin.iterations;
        phase_stats.then(&modeled(rlin.iterations * 2 * d as usize * h_round));

        let mut next_live = Vec::with_capacity(plan.groups.len());
        for group in &plan.groups {
            next_live.push(build_group_cluster(g, &live, group, k)?);
        }
        phase_stats.then(&modeled(h_round));
        for (i, &v) in plan.residual.iter().enumerate() {
            let mut c = live[v].clone();
            c.color = Some(next_color + rlin.colors[i]);
            output.push(c);
        }
        if !plan.residual.is_empty() {
            next_color += rlin.palette;
        }
        next_live.sort_by_key(|c| c.id);

        let cluster_count = next_live.len();
        let bound_ok = (d as u128)
            .checked_pow(phase as u32)
            .and_then(|p| p.checked_mul(cluster_count as u128))
            .is_some_and(|x| x <= n_initial as u128);
        if !bound_ok && cluster_count > 0 {
            return Err(Error::Invariant(format!(
                "phase {phase}: {cluster_count} clusters exceed N / d^{phase} with N = {n_initial}, d = {d}"
            )));
        }
        phases.push(PhaseLog {
            phase,
            clusters_at_start,
            cluster_count,
            max_radius_gk,
            max_radius_g,
            max_overlap,
            overlap_bound,
            high_degree,
            marked,
            c_star: c_star.len(),
            rerouted: plan.rerouted,
            residual_colored: plan.residual.len(),
            undirected_max_degree,
            square_palette: lin.palette,
            residual_palette: if plan.residual.is_empty() {
                0
            } else {
                rlin.palette
            },
            linial_iterations,
            rounds: phase_stats.rounds,
        });
        stats.then(&phase_stats);
        live = next_live;
    }
    if live.len() > 1 {
        return Err(Error::Invariant(format!(
            "{} clusters remain after the last phase",
            live.len()
        )));
    }
    for mut c in live {
        c.color = Some(next_color);
        next_color += 1;
        output.push(c);
    }
    output.sort_by_key(|c| c.id);

    let radii: Vec<f64> = phases
        .iter()
        .map(|p| p.max_radius_gk.max(1) as f64)
        .collect();
    let radius_growth = radii.windows(2).map(|w| w[1] / w[0]).fold(1.0, f64::max);
    Ok(DetOutput {
        decomposition: Decomposition {
            k,
            clusters: output,
        },
        log: InvariantsLog {
            n_initial,
            d,
            phases_planned: s,
            phases,
            radius_growth,
            total_palette: next_color,
        },
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::validate_decomposition;
    use crate::graph::{generate_graph, GraphModel};

    fn run(g: &Graph, k: u32, mode: Mode) -> DetOutput {
        let cfg = DetConfig {
            k,
            mode,
            sim: SimConfig::for_graph(g),
        };
        decompose(g, &cfg, None).unwrap()
    }

    #[test]
    fn single_node() {
        let g = generate_graph(&GraphModel::Path { n: 1 }, 0).unwrap();
        let out = run(&g, 3, Mode::Simulated);
        assert_eq!(out.decomposition.clusters.len(), 1);
        assert_eq!(out.decomposition.colors_used(), 1);
    }

    #[test]
    fn clique_one_cluster_per_color() {
        let g = generate_graph(&GraphModel::Clique { n: 4 }, 0).unwrap();
        let out = run(&g, 1, Mode::Simulated);
        let r = validate_decomposition(&g, &out.decomposition);
        assert!(r.valid, "{:?}", r.failures);
        let mut colors: Vec<_> = out.decomposition.clusters.iter().map(|c| c.color).collect();
        let len = colors.len();
        colors.dedup();
        assert_eq!(colors.len(), len);
    }

    #[test]
    fn path8_k2() {
        let g = generate_graph(&GraphModel::Path { n: 8 }, 0).unwrap();
        let out = run(&g, 2, Mode::Simulated);
        let r = validate_decomposition(&g, &out.decomposition);
        assert!(r.valid, "{:?}", r.failures);
        let (s, d) = parameters(8);
        assert!(r.colors as u64 <= s as u64 * 16 * 4 * d * d);
    }

    #[test]
    fn modes_agree_on_random_graphs() {
        for seed in 0..4 {
            let g = generate_graph(
                &GraphModel::Gnp {
                    n: 60,
                    p: 0.08,
                    connected: false,
                },
                seed,
            )
            .unwrap();
            for k in [1, 2] {
                let a = run(&g, k, Mode::Simulated);
                let b = run(&g, k, Mode::Central);
                assert_eq!(a.decomposition, b.decomposition);
                let r = validate_decomposition(&g, &a.decomposition);
                assert!(r.valid, "{:?}", r.failures);
            }
        }
    }
}
