//! Cluster-communication building blocks run on the engine.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{run, LocalView, Message, NodeProgram, NodeRng, Outbox, RoundStats, SimConfig, Status};
use crate::error::{Error, Result};
use crate::graph::{bit_length, Graph};

const TAG_BITS: usize = 2;

impl Message for () {
    fn bits(&self) -> usize {
        0
    }
}

/// A fixed-width integer payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word {
    pub value: u128,
    pub width: usize,
}

impl Message for Word {
    fn bits(&self) -> usize {
        self.width
    }
}

#[derive(Clone, Debug)]
pub struct FloodSource<P> {
    pub node: usize,
    pub origin: u128,
    pub payload: P,
}

#[derive(Clone, Debug)]
struct FloodMsg<P> {
    origin: u128,
    payload: P,
    id_bits: usize,
}

impl<P: Message> Message for FloodMsg<P> {
    fn bits(&self) -> usize {
        TAG_BITS + self.id_bits + self.payload.bits()
    }
}

struct Flood<P> {
    held: BTreeMap<u128, P>,
    snapshot: Vec<(u128, P)>,
    hops: usize,
    fanin: usize,
}

impl<P: Message> NodeProgram for Flood<P> {
    type Msg = FloodMsg<P>;
    type Output = Vec<(u128, P)>;

    fn init(&mut self, _view: &LocalView, _rng: &mut NodeRng) -> Status {
        if self.hops == 0 {
            Status::Halted
        } else {
            Status::Running
        }
    }

    fn send(
        &mut self,
        round: usize,
        view: &LocalView,
        _rng: &mut NodeRng,
        out: &mut Outbox<Self::Msg>,
    ) {
        let j = (round - 1) % self.fanin;
        if j == 0 {
            self.snapshot = self.held.iter().map(|(&o, p)| (o, p.clone())).collect();
        }
        if let Some((origin, payload)) = self.snapshot.get(j) {
            out.broadcast(FloodMsg {
                origin: *origin,
                payload: payload.clone(),
                id_bits: view.id_bits as usize,
            });
        }
    }

    fn receive(
        &mut self,
        round: usize,
        _view: &LocalView,
        _rng: &mut NodeRng,
        inbox: &[(usize, Self::Msg)],
    ) -> Status {
        for (_, m) in inbox {
            self.held
                .entry(m.origin)
                .or_insert_with(|| m.payload.clone());
        }
        while self.held.len() > self.fanin {
            self.held.pop_last();
        }
        if round == self.hops * self.fanin {
            Status::Halted
        } else {
            Status::Running
        }
    }

    fn finish(self) -> Self::Output {
        self.held.into_iter().collect()
    }
}

/// Pipelined flooding: `hops` stages of `fanin` rounds. In each stage a node
/// forwards the `fanin` smallest origins it held at the stage start, so after
/// stage `s` it holds the `fanin` smallest origins within `s` hops.
/// Returns each node's held `(origin, payload)` pairs in ascending origin order.
pub fn bounded_flood<P: Message>(
    g: &Graph,
    sources: &[FloodSource<P>],
    hops: usize,
    fanin: usize,
    cfg: &SimConfig,
) -> Result<(Vec<Vec<(u128, P)>>, RoundStats)> {
    if fanin == 0 {
        return Err(Error::InvalidParams("fanin must be at least 1".into()));
    }
    let mut programs: Vec<Flood<P>> = (0..g.n())
        .map(|_| Flood {
            held: BTreeMap::new(),
            snapshot: Vec::new(),
            hops,
            fanin,
        })
        .collect();
    for s in sources {
        if s.node >= g.n() {
            return Err(Error::UnknownNode(s.node));
        }
        programs[s.node].held.insert(s.origin, s.payload.clone());
    }
    for p in &mut programs {
        while p.held.len() > fanin {
            p.held.pop_last();
        }
    }
    run(g, programs, cfg)
}

/// A communication tree in `G`; edges may pass through non-members.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub id: u128,
    pub root: usize,
    pub members: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
struct NodeTree {
    tree: usize,
    member: usize,
    /// `(port, slot)` towards the root.
    parent: Option<(usize, usize)>,
    children: Vec<(usize, usize)>,
}

struct Schedule {
    per_node: Vec<Vec<NodeTree>>,
    frame: usize,
}

/// Validates trees and assigns each shared edge a slot per tree.
fn schedule(g: &Graph, trees: &[TreeSpec], overlap_cap: usize, strict: bool) -> Result<Schedule> {
    let mut usage: HashMap<(usize, usize), Vec<(u128, usize)>> = HashMap::new();
    let mut parents: Vec<HashMap<usize, usize>> = Vec::with_capacity(trees.len());
    for (t, tree) in trees.iter().enumerate() {
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(u, v) in &tree.edges {
            if u >= g.n() || v >= g.n() || !g.has_edge(u, v) {
                return Err(Error::Invariant(format!(
                    "tree {} uses non-edge ({u}, {v})",
                    tree.id
                )));
            }
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
            usage
                .entry((u.min(v), u.max(v)))
                .or_default()
                .push((tree.id, t));
        }
        let mut parent = HashMap::from([(tree.root, usize::MAX)]);
        let mut queue = VecDeque::from([tree.root]);
        while let Some(u) = queue.pop_front() {
            for &v in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if !parent.contains_key(&v) {
                    parent.insert(v, u);
                    queue.push_back(v);
                }
            }
        }
        let spans = parent.len() == tree.edges.len() + 1
            && adj.keys().all(|u| parent.contains_key(u))
            && tree.members.iter().all(|m| parent.contains_key(m));
        if !spans {
            return Err(Error::Invariant(format!(
                "tree of cluster {} is not a spanning tree",
                tree.id
            )));
        }
        parents.push(parent);
    }
    let mut slot: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut frame = 1;
    for (edge, users) in &mut usage {
        users.sort_unstable();
        frame = frame.max(users.len());
        for (rank, &(_, t)) in users.iter().enumerate() {
            slot.insert((edge.0, edge.1, t), rank);
        }
    }
    if frame > overlap_cap && strict {
        return Err(Error::Invariant(format!(
            "{frame} trees share an edge, overlap cap is {overlap_cap}"
        )));
    }
    let port = |u: usize, v: usize| g.neighbors(u).binary_search(&v).expect("tree edge");
    let slot_of = |u: usize, v: usize, t: usize| slot[&(u.min(v), u.max(v), t)];
    let mut per_node: Vec<Vec<NodeTree>> = vec![Vec::new(); g.n()];
    for (t, tree) in trees.iter().enumerate() {
        let mut index: HashMap<usize, usize> = HashMap::new();
        for (&u, &p) in &parents[t] {
            index.insert(u, per_node[u].len());
            per_node[u].push(NodeTree {
                tree: t,
                member: usize::MAX,
                parent: (p != usize::MAX).then(|| (port(u, p), slot_of(u, p, t))),
                children: Vec::new(),
            });
        }
        for (&u, &p) in &parents[t] {
            if p != usize::MAX {
                let entry = &mut per_node[p][index[&p]];
                entry.children.push((port(p, u), slot_of(p, u, t)));
            }
        }
        for (i, &m) in tree.members.iter().enumerate() {
            per_node[m][index[&m]].member = i;
        }
    }
    for list in &mut per_node {
        list.sort_by_key(|nt| nt.tree);
        for nt in list.iter_mut() {
            nt.children.sort_unstable();
        }
    }
    Ok(Schedule { per_node, frame })
}

/// Slot in the shared-edge frame that round `round` belongs to.
fn slot_of_round(round: usize, frame: usize) -> usize {
    (round - 1) % frame
}

#[derive(Clone, Debug)]
struct Carried<M>(M);

impl<M: Message> Message for Carried<M> {
    fn bits(&self) -> usize {
        TAG_BITS + self.0.bits()
    }
}

struct Bcast<P> {
    trees: Vec<NodeTree>,
    frame: usize,
    value: Vec<Option<P>>,
    /// Children already served, per local tree.
    sent: Vec<Vec<bool>>,
}

impl<P: Message> Bcast<P> {
    fn done(&self) -> bool {
        (0..self.trees.len()).all(|i| self.value[i].is_some() && self.sent[i].iter().all(|&s| s))
    }
}

impl<P: Message> NodeProgram for Bcast<P> {
    type Msg = Carried<P>;
    type Output = Vec<(usize, P)>;

    fn init(&mut self, _view: &LocalView, _rng: &mut NodeRng) -> Status {
        if self.done() {
            Status::Halted
        } else {
            Status::Running
        }
    }

    fn send(
        &mut self,
        round: usize,
        _view: &LocalView,
        _rng: &mut NodeRng,
        out: &mut Outbox<Self::Msg>,
    ) {
        let j = slot_of_round(round, self.frame);
        for (i, nt) in self.trees.iter().enumerate() {
            let Some(v) = &self.value[i] else { continue };
            for (c, &(port, slot)) in nt.children.iter().enumerate() {
                if slot == j && !self.sent[i][c] {
                    out.send(port, Carried(v.clone()));
                    self.sent[i][c] = true;
                }
            }
        }
    }

    fn receive(
        &mut self,
        round: usize,
        _view: &LocalView,
        _rng: &mut NodeRng,
        inbox: &[(usize, Self::Msg)],
    ) -> Status {
        let j = slot_of_round(round, self.frame);
        for (port, msg) in inbox {
            // the (port, slot) pair identifies the tree
            if let Some(i) = self
                .trees
                .iter()
                .position(|nt| nt.parent == Some((*port, j)))
            {
                self.value[i] = Some(msg.0.clone());
            }
        }
        if self.done() {
            Status::Halted
        } else {
            Status::Running
        }
    }

    fn finish(self) -> Self::Output {
        self.trees
            .iter()
            .zip(self.value)
            .filter(|(nt, _)| nt.member != usize::MAX)
            .map(|(nt, v)| (nt.tree, v.expect("broadcast completed")))
            .collect()
    }
}

/// Delivers `payloads[t]` from the root of `trees[t]` to all of its members.
/// Trees sharing an edge take turns in ascending cluster-id order.
/// Returns, per node, `(tree index, payload)` for every tree it is a member of.
pub fn cluster_broadcast<P: Message>(
    g: &Graph,
    trees: &[TreeSpec],
    payloads: &[P],
    overlap_cap: usize,
    cfg: &SimConfig,
) -> Result<(Vec<Vec<(usize, P)>>, RoundStats)> {
    if payloads.len() != trees.len() {
        return Err(Error::InvalidParams("one payload per tree required".into()));
    }
    let sched = schedule(g, trees, overlap_cap, cfg.strict)?;
    let programs = sched
        .per_node
        .into_iter()
        .enumerate()
        .map(|(u, list)| {
            let value = list
                .iter()
                .map(|nt| (trees[nt.tree].root == u).then(|| payloads[nt.tree].clone()))
                .collect();
            let sent = list
                .iter()
                .map(|nt| vec![false; nt.children.len()])
                .collect();
            Bcast {
                trees: list,
                frame: sched.frame,
                value,
                sent,
            }
        })
        .collect();
    run(g, programs, cfg)
}

/// Associative, commutative aggregations supported by convergecast.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregation {
    Count,
    Min,
    /// Set union keeping the `item_cap` smallest items.
    Union {
        item_cap: usize,
    },
    /// Bitwise AND over `lanes` bits.
    And {
        lanes: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggValue {
    Count(u128),
    Min(Option<u128>),
    Union(Vec<u128>),
    Mask(u128),
}

impl Aggregation {
    pub fn identity(&self) -> AggValue {
        match *self {
            Aggregation::Count => AggValue::Count(0),
            Aggregation::Min => AggValue::Min(None),
            Aggregation::Union { .. } => AggValue::Union(Vec::new()),
            Aggregation::And { lanes } => AggValue::Mask(lane_mask(lanes)),
        }
    }

    fn merge(&self, acc: &mut AggValue, other: &AggValue) -> Result<()> {
        match (acc, other) {
            (AggValue::Count(a), AggValue::Count(b)) => *a += b,
            (AggValue::Min(a), AggValue::Min(b)) => {
                *a = match (*a, *b) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                }
            }
            (AggValue::Union(a), AggValue::Union(b)) => {
                a.extend_from_slice(b);
                a.sort_unstable();
                a.dedup();
                if let Aggregation::Union { item_cap } = *self {
                    a.truncate(item_cap);
                }
            }
            (AggValue::Mask(a), AggValue::Mask(b)) => *a &= b,
            _ => {
                return Err(Error::InvalidParams(
                    "aggregation value does not match combine".into(),
                ))
            }
        }
        Ok(())
    }
}

fn lane_mask(lanes: usize) -> u128 {
    if lanes >= 128 {
        u128::MAX
    } else {
        (1u128 << lanes) - 1
    }
}

#[derive(Clone, Debug)]
struct AggMsg {
    part: AggValue,
    last: bool,
    bits: usize,
}

impl Message for AggMsg {
    fn bits(&self) -> usize {
        self.bits
    }
}

struct Converge {
    trees: Vec<NodeTree>,
    frame: usize,
    combine: Aggregation,
    acc: Vec<AggValue>,
    pending: Vec<usize>,
    queue: Vec<VecDeque<AggMsg>>,
    finished: Vec<bool>,
    error: Option<Error>,
}

impl Converge {
    fn parts(&self, value: &AggValue, id_bits: usize) -> VecDeque<AggMsg> {
        let one = |part: AggValue, bits: usize| {
            VecDeque::from([AggMsg {
                part,
                last: true,
                bits: TAG_BITS + bits,
            }])
        };
        match value {
            AggValue::Union(items) if !items.is_empty() => items
                .iter()
                .enumerate()
                .map(|(i, &x)| AggMsg {
                    part: AggValue::Union(vec![x]),
                    last: i + 1 == items.len(),
                    bits: TAG_BITS + id_bits,
                })
                .collect(),
            AggValue::Union(_) => one(AggValue::Union(vec![]), 0),
            AggValue::Count(c) => one(value.clone(), bit_length(*c) as usize),
            AggValue::Min(_) => one(value.clone(), id_bits),
            AggValue::Mask(_) => {
                let lanes = match self.combine {
                    Aggregation::And { lanes } => lanes,
                    _ => 128,
                };
                one(value.clone(), lanes)
            }
        }
    }

    fn ready(&mut self, i: usize, id_bits: usize) {
        if self.pending[i] == 0 && !self.finished[i] && self.queue[i].is_empty() {
            if self.trees[i].parent.is_none() {
                self.finished[i] = true;
            } else {
                self.queue[i] = self.parts(&self.acc[i], id_bits);
            }
        }
    }

    fn status(&self) -> Status {
        if self.error.is_some() || self.finished.iter().all(|&f| f) {
            Status::Halted
        } else {
            Status::Running
        }
    }
}

impl NodeProgram for Converge {
    type Msg = AggMsg;
    type Output = Result<Vec<(usize, AggValue)>>;

    fn init(&mut self, view: &LocalView, _rng: &mut NodeRng) -> Status {
        for i in 0..self.trees.len() {
            self.ready(i, view.id_bits as usize);
        }
        self.status()
    }

    fn send(
        &mut self,
        round: usize,
        _view: &LocalView,
        _rng: &mut NodeRng,
        out: &mut Outbox<Self::Msg>,
    ) {
        let j = slot_of_round(round, self.frame);
        for i in 0..self.trees.len() {
            let Some((port, slot)) = self.trees[i].parent else {
                continue;
            };
            if slot != j {
                continue;
            }
            if let Some(msg) = self.queue[i].pop_front() {
                if msg.last {
                    self.finished[i] = true;
                }
                out.send(port, msg);
            }
        }
    }

    fn receive(
        &mut self,
        round: usize,
        view: &LocalView,
        _rng: &mut NodeRng,
        inbox: &[(usize, Self::Msg)],
    ) -> Status {
        let j = slot_of_round(round, self.frame);
        for (port, msg) in inbox {
            let Some(i) = self
                .trees
                .iter()
                .position(|nt| nt.children.contains(&(*port, j)))
            else {
                continue;
            };
            if let Err(e) = self.combine.merge(&mut self.acc[i], &msg.part) {
                self.error = Some(e);
            }
            if msg.last {
                self.pending[i] -= 1;
                self.ready(i, view.id_bits as usize);
            }
        }
        self.status()
    }

    fn finish(self) -> Self::Output {
        if let Some(e) = self.error {
            return Err(e);
        }
        Ok(self
            .trees
            .iter()
            .zip(self.acc)
            .filter(|(nt, _)| nt.parent.is_none())
            .map(|(nt, v)| (nt.tree, v))
            .collect())
    }
}

/// Aggregates `values[t][i]` (the value of `trees[t].members[i]`) at each
/// root. A node waits for all of its children, then forwards its partial
/// aggregate one item per message. Returns one aggregate per tree.
pub fn cluster_convergecast(
    g: &Graph,
    trees: &[TreeSpec],
    values: &[Vec<AggValue>],
    combine: Aggregation,
    overlap_cap: usize,
    cfg: &SimConfig,
) -> Result<(Vec<AggValue>, RoundStats)> {
    if values.len() != trees.len()
        || values
            .iter()
            .zip(trees)
            .any(|(v, t)| v.len() != t.members.len())
    {
        return Err(Error::InvalidParams(
            "one value per tree member required".into(),
        ));
    }
    let sched = schedule(g, trees, overlap_cap, cfg.strict)?;
    let mut programs = Vec::with_capacity(g.n());
    for list in sched.per_node {
        let mut acc = Vec::with_capacity(list.len());
        for nt in &list {
            let mut a = combine.identity();
            if nt.member != usize::MAX {
                combine.merge(&mut a, &values[nt.tree][nt.member])?;
            }
            acc.push(a);
        }
        let k = list.len();
        programs.push(Converge {
            pending: list.iter().map(|nt| nt.children.len()).collect(),
            trees: list,
            frame: sched.frame,
            combine,
            acc,
            queue: vec![VecDeque::new(); k],
            finished: vec![false; k],
            error: None,
        });
    }
    let (outs, stats) = run(g, programs, cfg)?;
    let mut result: Vec<Option<AggValue>> = vec![None; trees.len()];
    for out in outs {
        for (t, v) in out? {
            result[t] = Some(v);
        }
    }
    Ok((
        result
            .into_iter()
            .map(|v| v.expect("root aggregate"))
            .collect(),
        stats,
    ))
}
