use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("self-loop on node {node}")]
    SelfLoop { node: usize },

    #[error("duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { u: usize, v: usize },

    #[error("asymmetric adjacency: {u} lists {v} but not the reverse")]
    Asymmetric { u: usize, v: usize },

    #[error("duplicate edge weight {weight} on {{{u}, {v}}}")]
    DuplicateWeight { u: usize, v: usize, weight: String },

    #[error("unknown node {0}")]
    UnknownNode(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(
        "message budget exceeded in round {round} on edge ({from} -> {to}): {bits} bits > {budget}"
    )]
    Budget {
        round: usize,
        from: usize,
        to: usize,
        bits: usize,
        budget: usize,
    },

    #[error("max_rounds = {max_rounds} reached with {active} nodes still running")]
    MaxRounds { max_rounds: usize, active: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("all parallel runs failed after {attempts} attempts: {context}")]
    RunsExhausted { attempts: usize, context: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
