//! Maximal independent set by shattering: a few iterations of the
//! single-bit randomized algorithm, a ruling-set clustering of the
//! undecided remainder, a decomposition of the resulting meta-node graph,
//! and per color many independent lanes of which each super-cluster adopts
//! the first one that is locally valid everywhere inside it.

pub mod ghaffari;
pub mod ruling;
pub mod shatter;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use ghaffari::{
    bernoulli_dyadic, check_decisions, effective_degree_at_least_two, effective_degree_scaled,
    exchange_validity, ghaffari_round, lane_mask, next_exponent, run_ghaffari, run_lanes,
    GhaffariRun, LaneBits, LaneOutcome, MisState, NodeStatus, SUB_ROUNDS,
};
pub use ruling::{build_meta_graph, ruling_set, RulingOutput};
pub use shatter::{shatter_check, ShatterReport};

use crate::cluster::{validate_mis, Cluster};
use crate::error::{Error, Result};
use crate::graph::{bfs_within, bit_length, Graph, UNREACHED};
use crate::netdecomp::Mode;
use crate::refine::carving::step_seed;
use crate::refine::{
    ball_grow_refine, ball_separation, carve_decompose, intermediate_decomposition, CarveConfig,
    CarveParams, MetaGraph, RefineOutput,
};
use crate::sim::{
    cluster_broadcast, cluster_convergecast, AggValue, Aggregation, RoundStats, SimConfig,
    TreeSpec, Word,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MisVariant {
    /// Meta-graph refined by exponential-shift ball carving.
    Fast,
    /// Meta-graph refined by deterministic ball growing.
    Slow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MisConfig {
    pub variant: MisVariant,
    pub seed: u64,
    /// Pre-shattering iterations `ceil(c1 * (log2 Δ + 1))`.
    pub c1: f64,
    /// Lanes per color `ceil(c2 * log2 n)`, at most 128.
    pub c2: f64,
    /// Iterations per lane `ceil(c3 * (log2 Δ + log2 log2 n))`.
    pub c3: f64,
    /// Overrides the pre-shattering iteration count.
    pub preshatter_iterations: Option<usize>,
    pub ruling_k: u32,
    /// Attempts with fresh streams per color before giving up.
    pub retry_cap: usize,
    pub sim: SimConfig,
}

impl MisConfig {
    pub fn new(g: &Graph, variant: MisVariant, seed: u64) -> Self {
        Self {
            variant,
            seed,
            c1: 20.0,
            c2: 2.0,
            c3: 4.0,
            preshatter_iterations: None,
            ruling_k: 5,
            retry_cap: 16,
            sim: SimConfig::for_graph(g).with_seed(seed),
        }
    }

    pub fn preshatter(&self, delta: usize) -> usize {
        self.preshatter_iterations
            .unwrap_or_else(|| (self.c1 * (log2(delta) + 1.0)).ceil() as usize)
    }

    pub fn lanes(&self, n: usize) -> usize {
        ((self.c2 * log2(n)).ceil() as usize).clamp(1, 128)
    }

    pub fn lane_iterations(&self, n: usize, delta: usize) -> usize {
        let loglog = log2(n).max(1.0).log2();
        ((self.c3 * (log2(delta) + loglog)).ceil() as usize).max(1)
    }
}

fn log2(x: usize) -> f64 {
    (x.max(1) as f64).log2()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PreshatterPhase {
    pub c1: f64,
    pub iterations: usize,
    pub rounds: usize,
    pub joined: usize,
    pub shatter: ShatterReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RulingPhase {
    pub chosen: usize,
    pub alpha: u32,
    pub beta: u32,
    pub rounds: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPhase {
    pub meta_nodes: usize,
    pub meta_edges: usize,
    /// Largest G-radius of a meta-node.
    pub meta_radius: u32,
    pub components: usize,
    pub colors: usize,
    /// Largest strong diameter in `H` of a super-cluster.
    pub max_strong_diameter: u32,
    pub carving_runs: usize,
    pub rounds: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ColorPhase {
    pub color: u64,
    pub super_clusters: usize,
    pub participants: usize,
    pub lanes: usize,
    pub iterations: usize,
    pub attempts: usize,
    /// Adopted lane per super-cluster with participants.
    pub adopted: Vec<usize>,
    pub joined: usize,
    pub rounds: usize,
    pub max_bits_per_edge_round: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MisPhases {
    pub preshatter: PreshatterPhase,
    pub rulingset: RulingPhase,
    pub decomposition: DecompositionPhase,
    pub percolor: Vec<ColorPhase>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MisResult {
    /// Identifiers of the MIS nodes, ascending.
    pub mis: Vec<u128>,
    pub rounds: usize,
    pub phases: MisPhases,
    pub variant: MisVariant,
    /// Node indices of the MIS, ascending.
    #[serde(skip)]
    pub nodes: Vec<usize>,
    #[serde(skip)]
    pub stats: RoundStats,
}

/// Global decision state, checked after every step.
struct Decisions {
    status: Vec<NodeStatus>,
    decided_at: Vec<Option<usize>>,
}

impl Decisions {
    fn check(&self, g: &Graph, when: &str) -> Result<()> {
        check_decisions(g, &self.status, &self.decided_at)
            .map_err(|e| Error::Invariant(format!("{when}: {e}")))
    }

    /// Removes the undecided neighbors of nodes that joined at `stamp`.
    fn remove_neighbors(&mut self, g: &Graph, joined: &[usize], stamp: usize) {
        for &v in joined {
            for &w in g.neighbors(v) {
                if self.status[w] == NodeStatus::Undecided {
                    self.status[w] = NodeStatus::Removed;
                    self.decided_at[w] = Some(stamp);
                }
            }
        }
    }
}

pub fn mis_full(g: &Graph, cfg: &MisConfig) -> Result<MisResult> {
    let n = g.n();
    let delta = g.max_degree();
    let mut stats = RoundStats::default();
    let mut phases = MisPhases::default();

    let iterations = cfg.preshatter(delta);
    let pre = run_ghaffari(g, iterations, cfg.seed, &cfg.sim)?;
    stats.then(&pre.stats);
    let mut dec = Decisions {
        status: pre.status.clone(),
        decided_at: pre.decided_at.clone(),
    };
    dec.check(g, "after pre-shattering")?;
    phases.preshatter = PreshatterPhase {
        c1: cfg.c1,
        iterations,
        rounds: pre.stats.rounds,
        joined: pre.mis.len(),
        shatter: shatter_check(g, &pre.undecided, delta),
    };

    let b = pre.undecided;
    if !b.is_empty() {
        let ruling = ruling_set(g, &b, cfg.ruling_k)?;
        stats.then(&ruling.stats);
        phases.rulingset = RulingPhase {
            chosen: ruling.result.chosen.len(),
            alpha: ruling.result.alpha,
            beta: ruling.result.beta,
            rounds: ruling.stats.rounds,
        };
        let meta = build_meta_graph(g, &b, &ruling.result.chosen)?;
        let (super_clusters, dphase) = decompose_meta(&meta, cfg)?;
        stats.then(&RoundStats {
            rounds: dphase.rounds,
            ..RoundStats::default()
        });
        phases.decomposition = dphase;
        let trees = lift_trees(g, &meta, &super_clusters)?;
        check_color_isolation(g, &trees)?;
        let mut by_color: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, t) in trees.iter().enumerate() {
            by_color.entry(t.1).or_default().push(i);
        }
        let mut stamp = iterations + 1;
        for (&color, list) in &by_color {
            let specs: Vec<TreeSpec> = list.iter().map(|&i| trees[i].0.clone()).collect();
            let cp = process_color(g, cfg, color, &specs, &mut dec, stamp, delta)?;
            stats.then(&RoundStats {
                rounds: cp.rounds,
                max_bits_per_edge_round: cp.max_bits_per_edge_round,
                ..RoundStats::default()
            });
            phases.percolor.push(cp);
            dec.check(g, &format!("after color {color}"))?;
            stamp += 1;
        }
    }

    if let Some(v) = dec.status.iter().position(|&s| s == NodeStatus::Undecided) {
        return Err(Error::Invariant(format!(
            "node {v} still undecided at the end"
        )));
    }
    let nodes: Vec<usize> = (0..n)
        .filter(|&v| dec.status[v] == NodeStatus::InMis)
        .collect();
    validate_mis(g, &nodes).map_err(Error::Invariant)?;
    let mut mis: Vec<u128> = nodes.iter().map(|&v| g.id(v)).collect();
    mis.sort_unstable();
    Ok(MisResult {
        mis,
        rounds: stats.rounds,
        phases,
        variant: cfg.variant,
        nodes,
        stats,
    })
}

/// Decomposes every component of `H` separately; returns clusters of `H`
/// with their colors.
fn decompose_meta(meta: &MetaGraph, cfg: &MisConfig) -> Result<(Vec<Cluster>, DecompositionPhase)> {
    let h = &meta.h;
    let mut out = Vec::new();
    let mut phase = DecompositionPhase {
        meta_nodes: h.n(),
        meta_edges: h.edge_count(),
        meta_radius: meta.radius,
        ..Default::default()
    };
    let hop = 2 * meta.radius as usize + 1;
    for (ci, comp) in h.components().into_iter().enumerate() {
        phase.components += 1;
        let (hc, back) = h.induced(&comp);
        let refined: RefineOutput = match cfg.variant {
            MisVariant::Fast => {
                let k = CarveParams::for_size(hc.n()).separation();
                let inter = intermediate_decomposition(&hc, k, Mode::Central)?;
                let ccfg = CarveConfig::for_network(
                    hc.n(),
                    hc.id_bits(),
                    step_seed(cfg.seed, ci, u64::MAX, 0),
                );
                carve_decompose(&hc, &inter, &ccfg)?
            }
            MisVariant::Slow => {
                let inter =
                    intermediate_decomposition(&hc, ball_separation(hc.n()), Mode::Central)?;
                ball_grow_refine(&hc, &inter)?
            }
        };
        phase.carving_runs += refined.runs.len();
        phase.max_strong_diameter = phase.max_strong_diameter.max(refined.max_strong_diameter);
        // components run side by side; one H-round spans a meta-node round trip
        phase.rounds = phase.rounds.max(refined.stats.rounds * hop);
        for c in refined.decomposition.clusters {
            let members = c.members.iter().map(|&m| back[m]).collect();
            let edges = c
                .tree_edges
                .iter()
                .map(|&(a, b)| (back[a], back[b]))
                .collect();
            let mut lifted = Cluster::new(h, back[c.center], members, edges);
            lifted.color = c.color;
            phase.colors = phase.colors.max(c.color.map_or(0, |x| x as usize + 1));
            out.push(lifted);
        }
    }
    Ok((out, phase))
}

/// G-trees of the super-clusters: the BFS tree of every meta-node plus one
/// G-edge per H-tree edge.
fn lift_trees(g: &Graph, meta: &MetaGraph, clusters: &[Cluster]) -> Result<Vec<(TreeSpec, u64)>> {
    let mut connector: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for (u, v) in g.edges() {
        if let (Some(a), Some(b)) = (meta.of[u], meta.of[v]) {
            if a != b {
                connector.entry((a.min(b), a.max(b))).or_insert((u, v));
            }
        }
    }
    let mut inner: Vec<Vec<(usize, usize)>> = Vec::with_capacity(meta.len());
    for (i, group) in meta.members.iter().enumerate() {
        let inside = |v: usize| meta.of[v] == Some(i);
        let dist = bfs_within(g, &[meta.centers[i]], UNREACHED - 1, &inside);
        let mut edges = Vec::new();
        for &v in group {
            if v == meta.centers[i] {
                continue;
            }
            let parent = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&u| inside(u) && dist[u] + 1 == dist[v])
                .min_by_key(|&u| g.id(u))
                .ok_or_else(|| {
                    Error::Invariant(format!("meta-node {i} has no BFS parent for {v}"))
                })?;
            edges.push((parent, v));
        }
        inner.push(edges);
    }
    let mut out = Vec::with_capacity(clusters.len());
    for c in clusters {
        let color = c
            .color
            .ok_or_else(|| Error::Invariant(format!("super-cluster {} has no color", c.id)))?;
        let mut edges: Vec<(usize, usize)> = c
            .members
            .iter()
            .flat_map(|&m| inner[m].iter().copied())
            .collect();
        for &(a, b) in &c.tree_edges {
            let e = connector.get(&(a.min(b), a.max(b))).ok_or_else(|| {
                Error::Invariant(format!("meta-nodes {a} and {b} are not adjacent in G"))
            })?;
            edges.push(*e);
        }
        let spec = TreeSpec {
            id: g.id(meta.centers[c.center]),
            root: meta.centers[c.center],
            members: meta.lift(c),
            edges,
        };
        out.push((spec, color));
    }
    Ok(out)
}

/// Super-clusters of one color must be non-adjacent in G.
fn check_color_isolation(g: &Graph, trees: &[(TreeSpec, u64)]) -> Result<()> {
    let mut owner = vec![usize::MAX; g.n()];
    for (i, (t, _)) in trees.iter().enumerate() {
        for &v in &t.members {
            owner[v] = i;
        }
    }
    for (u, v) in g.edges() {
        let (a, b) = (owner[u], owner[v]);
        if a != usize::MAX && b != usize::MAX && a != b && trees[a].1 == trees[b].1 {
            return Err(Error::Invariant(format!(
                "super-clusters {} and {} of color {} are adjacent",
                trees[a].0.id, trees[b].0.id, trees[a].1
            )));
        }
    }
    Ok(())
}

fn process_color(
    g: &Graph,
    cfg: &MisConfig,
    color: u64,
    trees: &[TreeSpec],
    dec: &mut Decisions,
    stamp: usize,
    delta: usize,
) -> Result<ColorPhase> {
    let n = g.n();
    let lanes = cfg.lanes(n);
    let iterations = cfg.lane_iterations(n, delta);
    let mut cp = ColorPhase {
        color,
        super_clusters: trees.len(),
        lanes,
        iterations,
        ..Default::default()
    };
    let mut pending: Vec<usize> = (0..trees.len())
        .filter(|&t| {
            trees[t]
                .members
                .iter()
                .any(|&v| dec.status[v] == NodeStatus::Undecided)
        })
        .collect();
    cp.participants = pending
        .iter()
        .flat_map(|&t| trees[t].members.iter())
        .filter(|&&v| dec.status[v] == NodeStatus::Undecided)
        .count();
    let mut stats = RoundStats::default();
    let mut attempt = 0;
    while !pending.is_empty() {
        if attempt == cfg.retry_cap {
            return Err(Error::RunsExhausted {
                attempts: attempt,
                context: format!(
                    "color {color}: {} super-clusters without a valid lane",
                    pending.len()
                ),
            });
        }
        let mut participants = vec![false; n];
        for &t in &pending {
            for &v in &trees[t].members {
                participants[v] = dec.status[v] == NodeStatus::Undecided;
            }
        }
        let seed = step_seed(cfg.seed, usize::MAX, color, attempt);
        let (outcomes, s) = run_lanes(g, &participants, lanes, iterations, seed, false, &cfg.sim)?;
        stats.then(&s);
        let membership: Vec<Option<u128>> = (0..n)
            .map(|v| {
                participants[v].then(|| {
                    (0..lanes)
                        .filter(|&l| outcomes[v].status[l] == NodeStatus::InMis)
                        .fold(0u128, |m, l| m | 1 << l)
                })
            })
            .collect();
        let (valid, s) = exchange_validity(g, &membership, lanes, &cfg.sim)?;
        stats.then(&s);
        let specs: Vec<TreeSpec> = pending.iter().map(|&t| trees[t].clone()).collect();
        let values: Vec<Vec<AggValue>> = specs
            .iter()
            .map(|t| {
                t.members
                    .iter()
                    .map(|&v| AggValue::Mask(valid[v]))
                    .collect()
            })
            .collect();
        let (agg, s) =
            cluster_convergecast(g, &specs, &values, Aggregation::And { lanes }, 1, &cfg.sim)?;
        stats.then(&s);
        let width = bit_length(lanes as u128) as usize;
        let verdicts: Vec<Option<usize>> = agg
            .iter()
            .map(|a| match a {
                AggValue::Mask(m) if *m != 0 => Some(m.trailing_zeros() as usize),
                _ => None,
            })
            .collect();
        let payloads: Vec<Word> = verdicts
            .iter()
            .map(|v| Word {
                value: v.unwrap_or(lanes) as u128,
                width,
            })
            .collect();
        let (heard, s) = cluster_broadcast(g, &specs, &payloads, 1, &cfg.sim)?;
        stats.then(&s);
        let mut joined = Vec::new();
        for v in 0..n {
            if !participants[v] {
                continue;
            }
            let Some(&(_, w)) = heard[v].first() else {
                return Err(Error::Invariant(format!(
                    "participant {v} heard no verdict"
                )));
            };
            let lane = w.value as usize;
            if lane == lanes {
                continue;
            }
            match outcomes[v].status[lane] {
                NodeStatus::InMis => {
                    dec.status[v] = NodeStatus::InMis;
                    dec.decided_at[v] = Some(stamp);
                    joined.push(v);
                }
                NodeStatus::Removed => {
                    dec.status[v] = NodeStatus::Removed;
                    dec.decided_at[v] = Some(stamp);
                }
                NodeStatus::Undecided => {
                    return Err(Error::Invariant(format!(
                        "node {v} undecided in adopted lane {lane}"
                    )));
                }
            }
        }
        // one-bit announcement by the new MIS nodes
        if !joined.is_empty() {
            stats.then(&RoundStats {
                rounds: 1,
                max_bits_per_edge_round: 1,
                total_messages: joined.iter().map(|&v| g.degree(v)).sum(),
                ..RoundStats::default()
            });
        }
        dec.remove_neighbors(g, &joined, stamp);
        cp.joined += joined.len();
        let mut still = Vec::new();
        for (i, &t) in pending.iter().enumerate() {
            match verdicts[i] {
                Some(l) => cp.adopted.push(l),
                None => still.push(t),
            }
        }
        pending = still;
        attempt += 1;
    }
    cp.attempts = attempt;
    cp.rounds = stats.rounds;
    cp.max_bits_per_edge_round = stats.max_bits_per_edge_round;
    Ok(cp)
}
