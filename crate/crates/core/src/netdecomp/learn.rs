//! How clusters learn about nearby clusters: simulated on the engine, or
//! recomputed centrally by BFS with the same selection rules.

use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::graph::{multi_bfs, Graph};
use crate::sim::{
    bounded_flood, cluster_convergecast, AggValue, Aggregation, FloodSource, RoundStats, SimConfig,
};

use super::Mode;

/// For each live cluster, the `2d` smallest identifiers of clusters within
/// `k` hops of it (all of them when there are fewer), ascending.
///
/// Simulated: every member floods its cluster id for `k` hops keeping the
/// `2d + 1` smallest, then each cluster convergecasts the foreign ids it
/// saw, capped at `2d`.
pub fn learn_neighbors(
    g: &Graph,
    live: &[Cluster],
    k: u32,
    d: u64,
    overlap_cap: usize,
    mode: Mode,
    cfg: &SimConfig,
) -> Result<(Vec<Vec<u128>>, RoundStats)> {
    let cap = 2 * d as usize;
    match mode {
        Mode::Central => {
            let of = owner(g, live);
            let lists = live
                .iter()
                .map(|c| {
                    let dist = multi_bfs(g, &c.members, k);
                    let mut seen: Vec<u128> = (0..g.n())
                        .filter(|&v| dist[v] <= k)
                        .filter_map(|v| of[v])
                        .map(|i| live[i].id)
                        .filter(|&id| id != c.id)
                        .collect();
                    seen.sort_unstable();
                    seen.dedup();
                    seen.truncate(cap);
                    seen
                })
                .collect();
            Ok((lists, RoundStats::default()))
        }
        Mode::Simulated => {
            let sources: Vec<FloodSource<()>> = live
                .iter()
                .flat_map(|c| {
                    c.members.iter().map(|&m| FloodSource {
                        node: m,
                        origin: c.id,
                        payload: (),
                    })
                })
                .collect();
            let (held, mut stats) = bounded_flood(g, &sources, k as usize, cap + 1, cfg)?;
            let trees: Vec<_> = live.iter().map(Cluster::tree_spec).collect();
            let values: Vec<Vec<AggValue>> = live
                .iter()
                .map(|c| {
                    c.members
                        .iter()
                        .map(|&m| {
                            AggValue::Union(
                                held[m]
                                    .iter()
                                    .map(|&(o, ())| o)
                                    .filter(|&o| o != c.id)
                                    .collect(),
                            )
                        })
                        .collect()
                })
                .collect();
            let (agg, cc) = cluster_convergecast(
                g,
                &trees,
                &values,
                Aggregation::Union { item_cap: cap },
                overlap_cap,
                cfg,
            )?;
            stats.then(&cc);
            let lists = agg
                .into_iter()
                .map(|a| match a {
                    AggValue::Union(v) => Ok(v),
                    _ => Err(Error::Invariant("unexpected aggregate".into())),
                })
                .collect::<Result<_>>()?;
            Ok((lists, stats))
        }
    }
}

/// For each cluster in `askers`, the smallest identifier of a `marked`
/// cluster within `k` hops, if any.
///
/// Simulated: marked members flood their id for `k` hops keeping only the
/// smallest, then each asker convergecasts the minimum.
pub fn marked_neighbors(
    g: &Graph,
    askers: &[&Cluster],
    marked: &[&Cluster],
    k: u32,
    overlap_cap: usize,
    mode: Mode,
    cfg: &SimConfig,
) -> Result<(Vec<Option<u128>>, RoundStats)> {
    if askers.is_empty() || marked.is_empty() {
        return Ok((vec![None; askers.len()], RoundStats::default()));
    }
    let mut best: Vec<Option<u128>> = vec![None; g.n()];
    let mut stats = RoundStats::default();
    match mode {
        Mode::Central => {
            let mut order: Vec<&&Cluster> = marked.iter().collect();
            order.sort_by_key(|c| c.id);
            for c in order.into_iter().rev() {
                let dist = multi_bfs(g, &c.members, k);
                for v in 0..g.n() {
                    if dist[v] <= k {
                        best[v] = Some(c.id);
                    }
                }
            }
        }
        Mode::Simulated => {
            let sources: Vec<FloodSource<()>> = marked
                .iter()
                .flat_map(|c| {
                    c.members.iter().map(|&m| FloodSource {
                        node: m,
                        origin: c.id,
                        payload: (),
                    })
                })
                .collect();
            let (held, fs) = bounded_flood(g, &sources, k as usize, 1, cfg)?;
            stats = fs;
            for v in 0..g.n() {
                best[v] = held[v].first().map(|&(o, ())| o);
            }
        }
    }
    let result: Vec<Option<u128>> = match mode {
        Mode::Central => askers
            .iter()
            .map(|c| c.members.iter().filter_map(|&m| best[m]).min())
            .collect(),
        Mode::Simulated => {
            let trees: Vec<_> = askers.iter().map(|c| c.tree_spec()).collect();
            let values: Vec<Vec<AggValue>> = askers
                .iter()
                .map(|c| c.members.iter().map(|&m| AggValue::Min(best[m])).collect())
                .collect();
            let (agg, cc) =
                cluster_convergecast(g, &trees, &values, Aggregation::Min, overlap_cap, cfg)?;
            stats.then(&cc);
            agg.into_iter()
                .map(|a| match a {
                    AggValue::Min(m) => m,
                    _ => None,
                })
                .collect()
        }
    };
    Ok((result, stats))
}

/// Live-cluster index owning each node.
pub(crate) fn owner(g: &Graph, live: &[Cluster]) -> Vec<Option<usize>> {
    let mut of = vec![None; g.n()];
    for (i, c) in live.iter().enumerate() {
        for &m in &c.members {
            of[m] = Some(i);
        }
    }
    of
}
