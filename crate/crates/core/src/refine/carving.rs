//! Phases of ball carving over `H`, one color per phase. In each phase the
//! colors of the intermediate decomposition are visited in ascending order;
//! the still-active nodes of that color's clusters draw shifts, several
//! independent runs are carved, and each intermediate cluster adopts its
//! first successful run.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::carve::{
    carve_step, from_fixed, sample_exp, to_fixed, CarveParams, Outcome, StepResult,
};
use super::{
    check_non_adjacent, color_classes, component_clusters, strong_diameter, RefineOutput,
    RefinePhaseLog,
};
use crate::cluster::{Cluster, Decomposition};
use crate::error::{Error, Result};
use crate::graph::{bit_length, ceil_log2, Graph};
use crate::sim::{node_rng, RoundStats};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarveConfig {
    /// Independent runs per carving step.
    pub runs_per_step: usize,
    /// Attempts with fresh streams before a step is declared failed.
    pub retry_cap: usize,
    pub seed: u64,
    /// Per-edge budget used to frame the multiplexed runs.
    pub msg_bits: usize,
}

impl CarveConfig {
    /// `max(32, ceil(log2 n))` runs for a network of `n` nodes.
    pub fn for_network(n: usize, id_bits: u32, seed: u64) -> Self {
        let s = id_bits as usize;
        Self {
            runs_per_step: 32.max(ceil_log2(n as u128) as usize),
            retry_cap: 16,
            seed,
            msg_bits: (4 * s).max(s + 8),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostic {
    pub phase: usize,
    pub color: u64,
    pub attempt: usize,
    pub run: usize,
    /// Largest shift drawn in this run.
    pub max_shift: f64,
    pub reached: usize,
    pub clustered: usize,
    /// Success of the run on every intermediate cluster it served.
    pub success: bool,
}

/// Independent stream family for one `(phase, color, attempt)`.
pub(crate) fn step_seed(seed: u64, phase: usize, color: u64, attempt: usize) -> u64 {
    let mut x = seed ^ 0x9e37_79b9_7f4a_7c15;
    for part in [phase as u64, color, attempt as u64] {
        x = x.wrapping_add(part).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x ^= x >> 31;
        x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
        x ^= x >> 29;
    }
    x
}

/// Outcome of one run restricted to one intermediate cluster.
#[derive(Clone, Copy, Debug)]
struct Tally {
    max_shift: i64,
    reached: usize,
    clustered: usize,
}

/// Carves `H` into a decomposition with separation 1, using `intermediate`
/// (a decomposition of `H^K`, `K >= params.separation()`) to evaluate runs.
pub fn carve_decompose(
    h: &Graph,
    intermediate: &Decomposition,
    cfg: &CarveConfig,
) -> Result<RefineOutput> {
    let n = h.n();
    let params = CarveParams::for_size(n);
    if cfg.runs_per_step == 0 || cfg.retry_cap == 0 {
        return Err(Error::InvalidParams(
            "runs_per_step and retry_cap must be positive".into(),
        ));
    }
    if intermediate.k < params.separation() {
        return Err(Error::InvalidParams(format!(
            "intermediate separation {} below {}",
            intermediate.k,
            params.separation()
        )));
    }
    let classes = color_classes(h, intermediate)?;
    let mut home = vec![usize::MAX; n];
    for (i, c) in intermediate.clusters.iter().enumerate() {
        for &m in &c.members {
            home[m] = i;
        }
    }
    let width = params.message_bits(h.id_bits()) as usize;
    let frame = (cfg.runs_per_step * width).div_ceil(cfg.msg_bits.max(1));
    let count_frame =
        (cfg.runs_per_step * 2 * bit_length(n as u128) as usize).div_ceil(cfg.msg_bits.max(1));
    let inter_radius = intermediate
        .clusters
        .iter()
        .filter_map(Cluster::radius_g)
        .max()
        .unwrap_or(0) as usize;

    let mut remaining = vec![true; n];
    let mut left = n;
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut phases = Vec::new();
    let mut runs_log = Vec::new();
    let mut rounds = 0usize;
    let mut max_diam = 0;
    let mut phase = 0;
    while left > 0 {
        if phase > n {
            return Err(Error::Invariant("carving made no progress".into()));
        }
        let color = phase as u64;
        let mut active = remaining.clone();
        let mut log = RefinePhaseLog {
            phase,
            remaining_at_start: left,
            ..Default::default()
        };
        let mut phase_members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&icolor, list) in &classes {
            let mut pending: Vec<usize> = list
                .iter()
                .copied()
                .filter(|&x| intermediate.clusters[x].members.iter().any(|&m| active[m]))
                .collect();
            let mut attempt = 0;
            while !pending.is_empty() {
                if attempt == cfg.retry_cap {
                    return Err(Error::RunsExhausted {
                        attempts: attempt * cfg.runs_per_step,
                        context: format!(
                            "carving phase {phase}, color {icolor}, cluster {}",
                            intermediate.clusters[pending[0]].id
                        ),
                    });
                }
                let sources: Vec<usize> = pending
                    .iter()
                    .flat_map(|&x| {
                        intermediate.clusters[x]
                            .members
                            .iter()
                            .copied()
                            .filter(|&m| active[m])
                    })
                    .collect();
                let seed = step_seed(cfg.seed, phase, icolor, attempt);
                let results: Vec<(StepResult, Vec<i64>)> = (0..cfg.runs_per_step)
                    .into_par_iter()
                    .map(|run| {
                        let shifts: Vec<(usize, i64)> = sources
                            .iter()
                            .map(|&v| {
                                let mut rng = node_rng(seed, h.id(v), run as u64);
                                (v, to_fixed(sample_exp(params.beta, &mut rng)))
                            })
                            .collect();
                        let r = carve_step(h, &active, &shifts, params.cap_fixed())?;
                        Ok((r, shifts.iter().map(|&(_, s)| s).collect()))
                    })
                    .collect::<Result<_>>()?;
                rounds += (params.cap_d as usize + 2) * frame
                    + 2 * (inter_radius + params.cap_d as usize + 1) * count_frame;
                let pos: BTreeMap<usize, usize> =
                    pending.iter().enumerate().map(|(i, &x)| (x, i)).collect();
                let mut adopted: Vec<Option<usize>> = vec![None; pending.len()];
                for (run, (res, shifts)) in results.iter().enumerate() {
                    let mut tally = vec![
                        Tally {
                            max_shift: 0,
                            reached: 0,
                            clustered: 0,
                        };
                        pending.len()
                    ];
                    for (&v, &s) in sources.iter().zip(shifts) {
                        let t = &mut tally[pos[&home[v]]];
                        t.max_shift = t.max_shift.max(s);
                    }
                    for v in 0..n {
                        if let Some(src) = res.owner(v) {
                            let t = &mut tally[pos[&home[src]]];
                            t.reached += 1;
                            if matches!(res.outcome[v], Outcome::Clustered(_)) {
                                t.clustered += 1;
                            }
                        }
                    }
                    let mut all_ok = true;
                    for (i, t) in tally.iter().enumerate() {
                        let ok = params.is_success(t.max_shift, t.reached, t.clustered);
                        all_ok &= ok;
                        if ok && adopted[i].is_none() {
                            adopted[i] = Some(run);
                        }
                    }
                    runs_log.push(RunDiagnostic {
                        phase,
                        color: icolor,
                        attempt,
                        run,
                        max_shift: from_fixed(tally.iter().map(|t| t.max_shift).max().unwrap_or(0)),
                        reached: tally.iter().map(|t| t.reached).sum(),
                        clustered: tally.iter().map(|t| t.clustered).sum(),
                        success: all_ok,
                    });
                }
                let mut claimed = vec![false; n];
                for (i, &x) in pending.iter().enumerate() {
                    let Some(run) = adopted[i] else { continue };
                    let res = &results[run].0;
                    for v in 0..n {
                        let Some(src) = res.owner(v) else { continue };
                        if home[src] != x {
                            continue;
                        }
                        if std::mem::replace(&mut claimed[v], true) {
                            return Err(Error::Invariant(format!(
                                "node {v} reached from two intermediate clusters"
                            )));
                        }
                        match res.outcome[v] {
                            Outcome::Clustered(c) => {
                                active[v] = false;
                                remaining[v] = false;
                                left -= 1;
                                log.clustered += 1;
                                phase_members.entry(c).or_default().push(v);
                            }
                            Outcome::Deactivated => {
                                active[v] = false;
                                log.deactivated += 1;
                            }
                            Outcome::Untouched => {}
                        }
                    }
                }
                pending = pending
                    .iter()
                    .zip(&adopted)
                    .filter(|(_, a)| a.is_none())
                    .map(|(&x, _)| x)
                    .collect();
                attempt += 1;
            }
            log.retries += attempt.saturating_sub(1);
        }
        let mut made = Vec::new();
        for members in phase_members.values() {
            let parts = component_clusters(h, members, color);
            if parts.len() != 1 {
                return Err(Error::Invariant("carved cluster is not connected".into()));
            }
            made.extend(parts);
        }
        for c in &made {
            let diam = strong_diameter(h, &c.members);
            if diam as u64 > 2 * params.cap_d {
                return Err(Error::Invariant(format!(
                    "cluster {} has strong diameter {diam}",
                    c.id
                )));
            }
            max_diam = max_diam.max(diam);
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
        runs: runs_log,
        stats: RoundStats {
            rounds,
            max_bits_per_edge_round: (cfg.runs_per_step * width).min(cfg.msg_bits),
            ..RoundStats::default()
        },
    })
}
