//! Round-synchronous message-passing engine with CONGEST bit budgets.
//!
//! Every round has two halves: each running node fills an [`Outbox`] (at most
//! one message per incident edge), the engine delivers and audits all
//! messages, then each running node consumes its inbox. Nodes see only a
//! [`LocalView`]: their own identifier, degree and port numbers.

mod primitives;
mod rng;

pub use primitives::{
    bounded_flood, cluster_broadcast, cluster_convergecast, AggValue, Aggregation, FloodSource,
    TreeSpec, Word,
};
pub use rng::{node_rng, NodeRng};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Bits a message occupies on the wire, declared by the message type.
pub trait Message: Clone + Send + Sync {
    fn bits(&self) -> usize;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Per-edge, per-direction, per-round budget `B`.
    pub msg_bits: usize,
    pub max_rounds: usize,
    pub seed: u64,
    /// Error on budget breach instead of recording it.
    pub strict: bool,
    /// Selects an independent random stream family (parallel runs).
    pub run_index: u64,
}

impl SimConfig {
    /// Default budget `4 * id_bits`, raised to `id_bits + 8` when that is larger.
    pub fn for_graph(g: &Graph) -> Self {
        let s = g.id_bits() as usize;
        Self {
            msg_bits: (4 * s).max(s + 8),
            max_rounds: 50_000_000,
            seed: 0,
            strict: true,
            run_index: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_run(mut self, run_index: u64) -> Self {
        self.run_index = run_index;
        self
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        let need = g.id_bits() as usize + 8;
        if self.msg_bits < need {
            return Err(Error::InvalidParams(format!(
                "msg_bits {} below id_bits + 8 = {need}",
                self.msg_bits
            )));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidParams("max_rounds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub round: usize,
    pub from: usize,
    pub to: usize,
    pub bits: usize,
}

/// The congestion ledger.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub rounds: usize,
    pub max_bits_per_edge_round: usize,
    pub total_messages: usize,
    pub budget_violations: Vec<Violation>,
}

impl RoundStats {
    /// Sequential composition: `other` ran after `self`.
    pub fn then(&mut self, other: &RoundStats) {
        let offset = self.rounds;
        self.rounds += other.rounds;
        self.max_bits_per_edge_round = self
            .max_bits_per_edge_round
            .max(other.max_bits_per_edge_round);
        self.total_messages += other.total_messages;
        self.budget_violations
            .extend(other.budget_violations.iter().map(|v| Violation {
                round: v.round + offset,
                ..v.clone()
            }));
    }

    /// Parallel composition: `other` ran in the same rounds on disjoint edges.
    pub fn alongside(&mut self, other: &RoundStats) {
        self.rounds = self.rounds.max(other.rounds);
        self.max_bits_per_edge_round = self
            .max_bits_per_edge_round
            .max(other.max_bits_per_edge_round);
        self.total_messages += other.total_messages;
        self.budget_violations
            .extend(other.budget_violations.iter().cloned());
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    Halted,
}

#[derive(Clone, Debug)]
pub struct LocalView {
    pub id: u128,
    pub degree: usize,
    pub id_bits: u32,
}

pub struct Outbox<M> {
    slots: Vec<Option<M>>,
    duplicate: Option<usize>,
}

impl<M: Clone> Outbox<M> {
    fn new(degree: usize) -> Self {
        Self {
            slots: vec![None; degree],
            duplicate: None,
        }
    }

    /// Queues `msg` on `port`. A second message on the same port in one
    /// round is a protocol bug and aborts the run.
    pub fn send(&mut self, port: usize, msg: M) {
        if self.slots[port].is_some() {
            self.duplicate = Some(port);
        }
        self.slots[port] = Some(msg);
    }

    pub fn broadcast(&mut self, msg: M) {
        for port in 0..self.slots.len() {
            self.send(port, msg.clone());
        }
    }

    pub fn is_free(&self, port: usize) -> bool {
        self.slots[port].is_none()
    }
}

/// A per-node state machine. Handlers must be deterministic given the
/// node's random stream.
pub trait NodeProgram: Send {
    type Msg: Message;
    type Output;

    fn init(&mut self, _view: &LocalView, _rng: &mut NodeRng) -> Status {
        Status::Running
    }

    fn send(
        &mut self,
        round: usize,
        view: &LocalView,
        rng: &mut NodeRng,
        out: &mut Outbox<Self::Msg>,
    );

    /// `inbox` holds `(port, message)` sorted by port.
    fn receive(
        &mut self,
        round: usize,
        view: &LocalView,
        rng: &mut NodeRng,
        inbox: &[(usize, Self::Msg)],
    ) -> Status;

    fn finish(self) -> Self::Output;
}

/// Port `q` at `v` such that `adj[v][q] == u`, for every `(u, p)` with `adj[u][p] == v`.
pub(crate) fn reverse_ports(g: &Graph) -> Vec<Vec<usize>> {
    (0..g.n())
        .map(|u| {
            g.neighbors(u)
                .iter()
                .map(|&v| {
                    g.neighbors(v)
                        .binary_search(&u)
                        .expect("symmetric adjacency")
                })
                .collect()
        })
        .collect()
}

struct Slot<P: NodeProgram> {
    program: P,
    view: LocalView,
    rng: NodeRng,
    status: Status,
    inbox: Vec<(usize, P::Msg)>,
}

/// Executes `programs` (one per node, by index) in lockstep until all halt.
pub fn run<P: NodeProgram>(
    g: &Graph,
    programs: Vec<P>,
    cfg: &SimConfig,
) -> Result<(Vec<P::Output>, RoundStats)> {
    cfg.validate(g)?;
    if programs.len() != g.n() {
        return Err(Error::InvalidParams("one program per node required".into()));
    }
    let rev = reverse_ports(g);
    let mut slots: Vec<Slot<P>> = programs
        .into_iter()
        .enumerate()
        .map(|(v, program)| {
            let view = LocalView {
                id: g.id(v),
                degree: g.degree(v),
                id_bits: g.id_bits(),
            };
            Slot {
                program,
                rng: node_rng(cfg.seed, view.id, cfg.run_index),
                view,
                status: Status::Running,
                inbox: Vec::new(),
            }
        })
        .collect();
    for s in &mut slots {
        s.status = s.program.init(&s.view, &mut s.rng);
    }

    let mut stats = RoundStats::default();
    let mut round = 0;
    loop {
        let active = slots.iter().filter(|s| s.status == Status::Running).count();
        if active == 0 {
            break;
        }
        if round == cfg.max_rounds {
            return Err(Error::MaxRounds {
                max_rounds: cfg.max_rounds,
                active,
            });
        }
        round += 1;

        let outboxes: Vec<Option<Outbox<P::Msg>>> = slots
            .par_iter_mut()
            .map(|s| {
                if s.status == Status::Halted {
                    return None;
                }
                let mut out = Outbox::new(s.view.degree);
                s.program.send(round, &s.view, &mut s.rng, &mut out);
                Some(out)
            })
            .collect();

        for (u, out) in outboxes.into_iter().enumerate() {
            let Some(out) = out else { continue };
            if let Some(port) = out.duplicate {
                return Err(Error::Invariant(format!(
                    "node {u} sent two messages on port {port} in round {round}"
                )));
            }
            for (p, msg) in out.slots.into_iter().enumerate() {
                let Some(msg) = msg else { continue };
                let v = g.neighbors(u)[p];
                let bits = msg.bits();
                stats.total_messages += 1;
                stats.max_bits_per_edge_round = stats.max_bits_per_edge_round.max(bits);
                if bits > cfg.msg_bits {
                    if cfg.strict {
                        return Err(Error::Budget {
                            round,
                            from: u,
                            to: v,
                            bits,
                            budget: cfg.msg_bits,
                        });
                    }
                    stats.budget_violations.push(Violation {
                        round,
                        from: u,
                        to: v,
                        bits,
                    });
                }
                slots[v].inbox.push((rev[u][p], msg));
            }
        }

        slots.par_iter_mut().for_each(|s| {
            let mut inbox = std::mem::take(&mut s.inbox);
            if s.status == Status::Running {
                inbox.sort_by_key(|&(p, _)| p);
                s.status = s.program.receive(round, &s.view, &mut s.rng, &inbox);
            }
        });
        stats.rounds = round;
    }
    Ok((
        slots.into_iter().map(|s| s.program.finish()).collect(),
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphModel};

    #[derive(Clone, Debug)]
    struct IdMsg {
        ids: Vec<u128>,
        tag_bits: usize,
        id_bits: usize,
    }

    impl Message for IdMsg {
        fn bits(&self) -> usize {
            self.tag_bits + self.ids.len() * self.id_bits
        }
    }

    /// Sends its id in round 1, echoes in round 2, halts.
    struct Handshake {
        ids_per_msg: usize,
        seen: Vec<u128>,
    }

    impl NodeProgram for Handshake {
        type Msg = IdMsg;
        type Output = Vec<u128>;

        fn send(
            &mut self,
            round: usize,
            view: &LocalView,
            _rng: &mut NodeRng,
            out: &mut Outbox<IdMsg>,
        ) {
            let ids = if round == 1 {
                vec![view.id; self.ids_per_msg]
            } else {
                self.seen
                    .iter()
                    .copied()
                    .take(self.ids_per_msg.max(1))
                    .collect()
            };
            out.broadcast(IdMsg {
                ids,
                tag_bits: 8,
                id_bits: view.id_bits as usize,
            });
        }

        fn receive(
            &mut self,
            round: usize,
            _view: &LocalView,
            _rng: &mut NodeRng,
            inbox: &[(usize, IdMsg)],
        ) -> Status {
            if round == 1 {
                self.seen = inbox.iter().map(|(_, m)| m.ids[0]).collect();
                Status::Running
            } else {
                Status::Halted
            }
        }

        fn finish(self) -> Vec<u128> {
            self.seen
        }
    }

    fn handshake(n: usize, per: usize) -> Vec<Handshake> {
        (0..n)
            .map(|_| Handshake {
                ids_per_msg: per,
                seen: vec![],
            })
            .collect()
    }

    #[test]
    fn two_node_handshake() {
        let g = generate_graph(&GraphModel::Path { n: 2 }, 0).unwrap();
        let cfg = SimConfig::for_graph(&g);
        let (out, stats) = run(&g, handshake(2, 1), &cfg).unwrap();
        assert_eq!(stats.rounds, 2);
        assert_eq!(stats.max_bits_per_edge_round, g.id_bits() as usize + 8);
        assert_eq!(out, vec![vec![1], vec![0]]);
    }

    #[test]
    fn k4_message_count() {
        let g = generate_graph(&GraphModel::Clique { n: 4 }, 0).unwrap();
        let mut cfg = SimConfig::for_graph(&g);
        cfg.max_rounds = 1;
        // only round 1 runs before the cap trips
        let err = run(&g, handshake(4, 1), &cfg).unwrap_err();
        assert!(matches!(err, Error::MaxRounds { .. }));
        cfg.max_rounds = 10;
        let (_, stats) = run(&g, handshake(4, 1), &cfg).unwrap();
        assert_eq!(stats.total_messages, 24);
    }

    #[test]
    fn forced_budget_breach() {
        let g = generate_graph(&GraphModel::Path { n: 3 }, 0).unwrap();
        let mut cfg = SimConfig::for_graph(&g);
        cfg.msg_bits = g.id_bits() as usize + 8;
        let err = run(&g, handshake(3, 2), &cfg).unwrap_err();
        assert!(matches!(err, Error::Budget { round: 1, .. }), "{err}");
        cfg.strict = false;
        let (_, stats) = run(&g, handshake(3, 2), &cfg).unwrap();
        assert_eq!(
            stats
                .budget_violations
                .iter()
                .filter(|v| v.round == 1)
                .count(),
            4
        );
        assert_eq!(stats.max_bits_per_edge_round, 2 * g.id_bits() as usize + 8);
    }

    #[test]
    fn budget_floor_enforced() {
        let g = generate_graph(&GraphModel::Path { n: 3 }, 0).unwrap();
        let mut cfg = SimConfig::for_graph(&g);
        cfg.msg_bits = 3;
        assert!(run(&g, handshake(3, 1), &cfg).is_err());
    }
}
