//! Ghaffari's desire-level algorithm with one-bit messages.
//!
//! A node's desire level is `p = 2^-e` with `e >= 1`. One iteration is four
//! rounds, each carrying one bit per lane: marked, joined, removed, and the
//! direction of the desire change (1 = halved). Neighbors track each
//! other's level from the direction bits alone. Several independent runs
//! ("lanes") share the rounds, one bit per lane per message.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sim::{
    node_rng, run, LocalView, Message, NodeProgram, NodeRng, Outbox, RoundStats, SimConfig, Status,
};

/// Rounds per iteration.
pub const SUB_ROUNDS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    Undecided,
    InMis,
    Removed,
}

/// Marked with probability `2^-e`: `e` fair bits all zero.
pub fn bernoulli_dyadic(rng: &mut NodeRng, e: u32) -> bool {
    let mut left = e;
    while left > 0 {
        let take = left.min(64);
        let mask = if take == 64 {
            u64::MAX
        } else {
            (1u64 << take) - 1
        };
        if rng.gen::<u64>() & mask != 0 {
            return false;
        }
        left -= take;
    }
    true
}

/// Whether `sum 2^-e` over `exps` is at least 2, by exact binary carrying.
pub fn effective_degree_at_least_two(exps: impl IntoIterator<Item = u32>) -> bool {
    let mut count: BTreeMap<u32, u64> = BTreeMap::new();
    for e in exps {
        *count.entry(e).or_default() += 1;
    }
    let mut carry = 0u64;
    let mut level = count.keys().next_back().copied().unwrap_or(0);
    loop {
        let here = count.get(&level).copied().unwrap_or(0) + carry;
        if level == 0 {
            return here >= 2;
        }
        carry = here / 2;
        level -= 1;
    }
}

/// `sum 2^-e` scaled by `2^scale`, or `None` on overflow or if some `e > scale`.
pub fn effective_degree_scaled(exps: impl IntoIterator<Item = u32>, scale: u32) -> Option<u128> {
    exps.into_iter().try_fold(0u128, |acc, e| {
        let term = 1u128.checked_shl(scale.checked_sub(e)?)?;
        acc.checked_add(term)
    })
}

/// Next exponent: halve (`e + 1`) when the effective degree is at least 2,
/// otherwise double capped at `1/2`.
pub fn next_exponent(e: u32, high: bool) -> u32 {
    if high {
        e + 1
    } else {
        e.saturating_sub(1).max(1)
    }
}

/// Centralized state of one run, used as an oracle for the message-passing version.
#[derive(Clone, Debug)]
pub struct MisState {
    pub e: Vec<u32>,
    pub status: Vec<NodeStatus>,
    /// Iteration in which each node was decided.
    pub decided_at: Vec<Option<usize>>,
    pub t: usize,
    rngs: Vec<NodeRng>,
}

impl MisState {
    /// All `participants` undecided with `p = 1/2`; others are treated as absent.
    pub fn new(g: &Graph, participants: &[bool], seed: u64, lane: u64) -> Self {
        let n = g.n();
        Self {
            e: vec![1; n],
            status: (0..n)
                .map(|v| {
                    if participants[v] {
                        NodeStatus::Undecided
                    } else {
                        NodeStatus::Removed
                    }
                })
                .collect(),
            decided_at: vec![None; n],
            t: 0,
            rngs: (0..n).map(|v| node_rng(seed, g.id(v), lane)).collect(),
        }
    }

    pub fn undecided(&self) -> Vec<usize> {
        (0..self.e.len())
            .filter(|&v| self.status[v] == NodeStatus::Undecided)
            .collect()
    }

    pub fn in_mis(&self) -> Vec<usize> {
        (0..self.e.len())
            .filter(|&v| self.status[v] == NodeStatus::InMis)
            .collect()
    }
}

/// One iteration evaluated centrally. Returns, per undecided node, whether
/// its effective degree was at least 2.
pub fn ghaffari_round(g: &Graph, state: &mut MisState) -> Vec<Option<bool>> {
    let n = g.n();
    let alive: Vec<bool> = state
        .status
        .iter()
        .map(|&s| s == NodeStatus::Undecided)
        .collect();
    let high: Vec<Option<bool>> = (0..n)
        .map(|v| {
            alive[v].then(|| {
                effective_degree_at_least_two(
                    g.neighbors(v)
                        .iter()
                        .filter(|&&u| alive[u])
                        .map(|&u| state.e[u]),
                )
            })
        })
        .collect();
    let marked: Vec<bool> = (0..n)
        .map(|v| alive[v] && bernoulli_dyadic(&mut state.rngs[v], state.e[v]))
        .collect();
    let joined: Vec<bool> = (0..n)
        .map(|v| marked[v] && !g.neighbors(v).iter().any(|&u| alive[u] && marked[u]))
        .collect();
    for v in 0..n {
        if joined[v] {
            state.status[v] = NodeStatus::InMis;
            state.decided_at[v] = Some(state.t);
        } else if alive[v] && g.neighbors(v).iter().any(|&u| joined[u]) {
            state.status[v] = NodeStatus::Removed;
            state.decided_at[v] = Some(state.t);
        }
    }
    for v in 0..n {
        if let Some(h) = high[v] {
            state.e[v] = next_exponent(state.e[v], h);
        }
    }
    state.t += 1;
    high
}

#[derive(Clone, Debug)]
pub struct LaneBits {
    pub mask: u128,
    pub lanes: usize,
}

impl Message for LaneBits {
    fn bits(&self) -> usize {
        self.lanes
    }
}

/// Per-node result of a multi-lane run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaneOutcome {
    pub status: Vec<NodeStatus>,
    pub decided_at: Vec<Option<usize>>,
    /// Lane 0 only, when recorded: `(e_t, effective degree >= 2)` per iteration.
    pub history: Vec<(u32, bool)>,
}

struct Lanes {
    participating: bool,
    lanes: usize,
    iterations: usize,
    record: bool,
    rngs: Vec<NodeRng>,
    e: Vec<u32>,
    status: Vec<NodeStatus>,
    decided_at: Vec<Option<usize>>,
    /// Lanes in which the neighbor at each port is undecided.
    alive: Vec<u128>,
    alive_start: Vec<u128>,
    /// Neighbor exponents `[port][lane]`.
    nbr_e: Vec<Vec<u32>>,
    high: u128,
    marked: u128,
    nbr_marked: u128,
    removed_now: u128,
    t: usize,
    history: Vec<(u32, bool)>,
}

impl Lanes {
    /// Lanes decided in the current iteration.
    fn decided_now(&self) -> u128 {
        (0..self.lanes)
            .filter(|&l| self.decided_at[l] == Some(self.t))
            .fold(0, |m, l| m | 1 << l)
    }

    fn undecided_mask(&self) -> u128 {
        (0..self.lanes)
            .filter(|&l| self.status[l] == NodeStatus::Undecided)
            .fold(0, |m, l| m | 1 << l)
    }
}

impl NodeProgram for Lanes {
    type Msg = LaneBits;
    type Output = LaneOutcome;

    fn init(&mut self, view: &LocalView, _rng: &mut NodeRng) -> Status {
        self.alive = vec![lane_mask(self.lanes); view.degree];
        self.nbr_e = vec![vec![1; self.lanes]; view.degree];
        if self.participating && self.iterations > 0 {
            Status::Running
        } else {
            Status::Halted
        }
    }

    fn send(
        &mut self,
        round: usize,
        _view: &LocalView,
        _rng: &mut NodeRng,
        out: &mut Outbox<LaneBits>,
    ) {
        let sub = (round - 1) % SUB_ROUNDS;
        let undecided = self.undecided_mask();
        let mask = match sub {
            0 => {
                self.high = 0;
                self.marked = 0;
                self.nbr_marked = 0;
                self.removed_now = 0;
                for l in 0..self.lanes {
                    if undecided >> l & 1 == 1 && bernoulli_dyadic(&mut self.rngs[l], self.e[l]) {
                        self.marked |= 1 << l;
                    }
                }
                self.marked
            }
            1 => {
                let joined = self.marked & !self.nbr_marked & undecided;
                for l in 0..self.lanes {
                    if joined >> l & 1 == 1 {
                        self.status[l] = NodeStatus::InMis;
                        self.decided_at[l] = Some(self.t);
                    }
                }
                joined
            }
            2 => self.removed_now,
            _ => {
                // effective degree over neighbors undecided at the start of the iteration
                let start = self.undecided_mask() | self.decided_now();
                for l in 0..self.lanes {
                    if start >> l & 1 == 0 {
                        continue;
                    }
                    let exps = self
                        .alive_start
                        .iter()
                        .zip(&self.nbr_e)
                        .filter(|(a, _)| *a >> l & 1 == 1)
                        .map(|(_, e)| e[l]);
                    if effective_degree_at_least_two(exps) {
                        self.high |= 1 << l;
                    }
                }
                if self.record && start & 1 == 1 {
                    self.history.push((self.e[0], self.high & 1 == 1));
                }
                for l in 0..self.lanes {
                    if undecided >> l & 1 == 1 {
                        self.e[l] = next_exponent(self.e[l], self.high >> l & 1 == 1);
                    }
                }
                self.high & undecided
            }
        };
        for (port, &a) in self.alive.iter().enumerate() {
            if a != 0 {
                out.send(
                    port,
                    LaneBits {
                        mask,
                        lanes: self.lanes,
                    },
                );
            }
        }
    }

    fn receive(
        &mut self,
        round: usize,
        _view: &LocalView,
        _rng: &mut NodeRng,
        inbox: &[(usize, LaneBits)],
    ) -> Status {
        let sub = (round - 1) % SUB_ROUNDS;
        if round == 1 {
            let mut heard = vec![false; self.alive.len()];
            for &(p, _) in inbox {
                heard[p] = true;
            }
            for (a, h) in self.alive.iter_mut().zip(heard) {
                if !h {
                    *a = 0;
                }
            }
        }
        match sub {
            0 => {
                self.alive_start = self.alive.clone();
                for (p, m) in inbox {
                    self.nbr_marked |= m.mask & self.alive[*p];
                }
            }
            1 => {
                let mut joined_nbr = 0;
                for (p, m) in inbox {
                    let j = m.mask & self.alive[*p];
                    joined_nbr |= j;
                    self.alive[*p] &= !j;
                }
                self.removed_now = joined_nbr & self.undecided_mask();
                for l in 0..self.lanes {
                    if self.removed_now >> l & 1 == 1 {
                        self.status[l] = NodeStatus::Removed;
                        self.decided_at[l] = Some(self.t);
                    }
                }
            }
            2 => {
                for (p, m) in inbox {
                    self.alive[*p] &= !m.mask;
                }
            }
            _ => {
                for (p, m) in inbox {
                    for l in 0..self.lanes {
                        if self.alive[*p] >> l & 1 == 1 {
                            let e = &mut self.nbr_e[*p][l];
                            *e = next_exponent(*e, m.mask >> l & 1 == 1);
                        }
                    }
                }
                self.t += 1;
                if self.t == self.iterations || self.undecided_mask() == 0 {
                    return Status::Halted;
                }
            }
        }
        Status::Running
    }

    fn finish(self) -> LaneOutcome {
        LaneOutcome {
            status: self.status,
            decided_at: self.decided_at,
            history: self.history,
        }
    }
}

pub fn lane_mask(lanes: usize) -> u128 {
    if lanes >= 128 {
        u128::MAX
    } else {
        (1u128 << lanes) - 1
    }
}

/// Runs `lanes` independent executions for `iterations` iterations among
/// `participants`; lane `l` of node `v` draws from `node_rng(seed, id(v), l)`.
pub fn run_lanes(
    g: &Graph,
    participants: &[bool],
    lanes: usize,
    iterations: usize,
    seed: u64,
    record: bool,
    cfg: &SimConfig,
) -> Result<(Vec<LaneOutcome>, RoundStats)> {
    if lanes == 0 || lanes > 128 {
        return Err(Error::InvalidParams(format!(
            "lane count {lanes} outside 1..=128"
        )));
    }
    if participants.len() != g.n() {
        return Err(Error::InvalidParams(
            "participant mask length differs from n".into(),
        ));
    }
    let programs = (0..g.n())
        .map(|v| {
            let on = participants[v];
            Lanes {
                participating: on,
                lanes,
                iterations,
                record,
                rngs: (0..lanes)
                    .map(|l| node_rng(seed, g.id(v), l as u64))
                    .collect(),
                e: vec![1; lanes],
                status: vec![
                    if on {
                        NodeStatus::Undecided
                    } else {
                        NodeStatus::Removed
                    };
                    lanes
                ],
                decided_at: vec![None; lanes],
                alive: Vec::new(),
                alive_start: Vec::new(),
                nbr_e: Vec::new(),
                high: 0,
                marked: 0,
                nbr_marked: 0,
                removed_now: 0,
                t: 0,
                history: Vec::new(),
            }
        })
        .collect();
    run(g, programs, cfg)
}

struct Exchange {
    lanes: usize,
    mine: Option<u128>,
    heard: u128,
}

impl NodeProgram for Exchange {
    type Msg = LaneBits;
    type Output = u128;

    fn init(&mut self, _view: &LocalView, _rng: &mut NodeRng) -> Status {
        if self.mine.is_some() {
            Status::Running
        } else {
            Status::Halted
        }
    }

    fn send(
        &mut self,
        _round: usize,
        _view: &LocalView,
        _rng: &mut NodeRng,
        out: &mut Outbox<LaneBits>,
    ) {
        out.broadcast(LaneBits {
            mask: self.mine.unwrap_or(0),
            lanes: self.lanes,
        });
    }

    fn receive(
        &mut self,
        _round: usize,
        _view: &LocalView,
        _rng: &mut NodeRng,
        inbox: &[(usize, LaneBits)],
    ) -> Status {
        for (_, m) in inbox {
            self.heard |= m.mask;
        }
        Status::Halted
    }

    fn finish(self) -> u128 {
        match self.mine {
            // valid: in the set with no chosen neighbor, or out of it with one
            Some(mine) => lane_mask(self.lanes) & ((mine & !self.heard) | (!mine & self.heard)),
            None => lane_mask(self.lanes),
        }
    }
}

/// One round in which every participant sends its per-lane membership bits;
/// returns per node the lanes in which its local check holds (all lanes for
/// non-participants).
pub fn exchange_validity(
    g: &Graph,
    membership: &[Option<u128>],
    lanes: usize,
    cfg: &SimConfig,
) -> Result<(Vec<u128>, RoundStats)> {
    let programs = membership
        .iter()
        .map(|&mine| Exchange {
            lanes,
            mine,
            heard: 0,
        })
        .collect();
    run(g, programs, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhaffariRun {
    pub mis: Vec<usize>,
    pub undecided: Vec<usize>,
    pub status: Vec<NodeStatus>,
    pub decided_at: Vec<Option<usize>>,
    pub iterations: usize,
    pub stats: RoundStats,
}

/// Single-lane run on all of `g` for `iterations` iterations.
pub fn run_ghaffari(
    g: &Graph,
    iterations: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<GhaffariRun> {
    let (out, stats) = run_lanes(g, &vec![true; g.n()], 1, iterations, seed, false, cfg)?;
    let status: Vec<NodeStatus> = out.iter().map(|o| o.status[0]).collect();
    let decided_at = out.iter().map(|o| o.decided_at[0]).collect();
    Ok(GhaffariRun {
        mis: (0..g.n())
            .filter(|&v| status[v] == NodeStatus::InMis)
            .collect(),
        undecided: (0..g.n())
            .filter(|&v| status[v] == NodeStatus::Undecided)
            .collect(),
        status,
        decided_at,
        iterations,
        stats,
    })
}

/// Checks the decisions at every iteration: MIS nodes pairwise non-adjacent,
/// and each removed node has an MIS neighbor decided no later than itself.
pub fn check_decisions(
    g: &Graph,
    status: &[NodeStatus],
    decided_at: &[Option<usize>],
) -> std::result::Result<(), String> {
    for (u, v) in g.edges() {
        if status[u] == NodeStatus::InMis && status[v] == NodeStatus::InMis {
            return Err(format!("adjacent nodes {u} and {v} both joined"));
        }
    }
    for v in 0..g.n() {
        if status[v] == NodeStatus::Removed {
            let Some(t) = decided_at[v] else { continue };
            let ok = g
                .neighbors(v)
                .iter()
                .any(|&u| status[u] == NodeStatus::InMis && decided_at[u].is_some_and(|s| s <= t));
            if !ok {
                return Err(format!(
                    "node {v} removed in iteration {t} without a joined neighbor"
                ));
            }
        }
    }
    Ok(())
}
