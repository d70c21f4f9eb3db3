//! Seed sweeps: one run per seed, validated, aggregated into a versioned
//! report in seed order.

use anyhow::{bail, Result};
use netdecomp::cluster::{validate_cover, validate_decomposition, validate_mis};
use netdecomp::covers::{cover_from_decomposition, cover_mst, MstConfig};
use netdecomp::graph::Graph;
use netdecomp::mis::{mis_full, MisConfig, MisVariant};
use netdecomp::netdecomp::{decompose, DetConfig, InvariantsLog, Mode};
use netdecomp::refine::{
    ball_grow_refine, ball_separation, carve_decompose, intermediate_decomposition, CarveConfig,
    CarveParams, RefineOutput,
};
use netdecomp::sim::{RoundStats, SimConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::source::GraphSource;
use crate::verify::{artifact_graph, parse_artifact, verify};

pub const SCHEMA: &str = "netdecomp-report";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Netdecomp,
    Carve,
    Ballgrow,
    MisFast,
    MisSlow,
    Cover,
    Mst,
    Verify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `None` for verify runs on artifacts with an embedded graph.
    pub source: Option<GraphSource>,
    pub algo: Algo,
    pub k: u32,
    pub seeds: Vec<u64>,
    /// Overrides the default budget `max(4 S, S + 8)`.
    pub msg_bits: Option<usize>,
    pub mu: Option<u32>,
    pub strict: bool,
    pub mode: Mode,
    /// Include the full algorithm output in every run.
    pub full: bool,
    /// Verify mode: artifact text.
    #[serde(skip)]
    pub artifact: Option<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("at least one seed is required");
        }
        match self.algo {
            Algo::Verify => {
                if self.artifact.is_none() {
                    bail!("verify needs --artifact");
                }
            }
            _ if self.source.is_none() => bail!("{:?} needs --graph or --gen", self.algo),
            Algo::Netdecomp | Algo::Cover if self.k == 0 => bail!("k must be at least 1"),
            _ => {}
        }
        if self.msg_bits == Some(0) {
            bail!("--msg-bits must be positive");
        }
        Ok(())
    }

    fn sim(&self, g: &Graph, seed: u64) -> SimConfig {
        let mut sim = SimConfig::for_graph(g).with_seed(seed);
        if let Some(b) = self.msg_bits {
            sim.msg_bits = b;
        }
        sim.strict = self.strict;
        sim
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub id_bits: u32,
    pub weighted: bool,
}

impl GraphSummary {
    fn of(g: &Graph) -> Self {
        Self {
            n: g.n(),
            m: g.edge_count(),
            max_degree: g.max_degree(),
            id_bits: g.id_bits(),
            weighted: g.is_weighted(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub graph: GraphSummary,
    pub valid: bool,
    pub failures: Vec<String>,
    /// Algorithm error that stopped the run, if any.
    pub error: Option<String>,
    pub stats: RoundStats,
    pub invariants: Option<InvariantsLog>,
    pub metrics: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub valid: usize,
    pub invalid: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: u32,
    pub config: ExperimentConfig,
    pub runs: Vec<RunReport>,
    pub summary: Summary,
}

impl Report {
    /// 0 when every validator passed, 1 when one failed, 2 on algorithm errors.
    pub fn exit_code(&self) -> i32 {
        if self.summary.errors > 0 {
            2
        } else if self.summary.invalid > 0 {
            1
        } else {
            0
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let runs: Vec<RunReport> = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed))
        .collect::<Result<_>>()?;
    let errors = runs.iter().filter(|r| r.error.is_some()).count();
    let valid = runs.iter().filter(|r| r.valid).count();
    Ok(Report {
        schema: SCHEMA.into(),
        version: VERSION,
        config: cfg.clone(),
        summary: Summary {
            runs: runs.len(),
            valid,
            invalid: runs.len() - valid - errors,
            errors,
        },
        runs,
    })
}

struct Outcome {
    valid: bool,
    failures: Vec<String>,
    stats: RoundStats,
    invariants: Option<InvariantsLog>,
    metrics: Value,
    output: Value,
}

fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<RunReport> {
    let g = match (&cfg.source, cfg.algo) {
        (Some(src), algo) => Some(src.load(seed, algo == Algo::Mst)?),
        (None, _) => None,
    };
    let (g, result) = if cfg.algo == Algo::Verify {
        let file = parse_artifact(cfg.artifact.as_deref().unwrap_or_default())?;
        let g = artifact_graph(&file, g)?;
        let v = verify(&g, &file.artifact()?);
        let out = Outcome {
            valid: v.valid,
            failures: v.failures.clone(),
            stats: RoundStats::default(),
            invariants: None,
            metrics: json!({ "kind": v.kind, "details": v.details }),
            output: Value::Null,
        };
        (g, Ok(out))
    } else {
        let g = g.expect("validated");
        let r = run_algo(cfg, &g, seed);
        (g, r)
    };
    Ok(match result {
        Ok(o) => RunReport {
            seed,
            graph: GraphSummary::of(&g),
            valid: o.valid,
            failures: o.failures,
            error: None,
            stats: o.stats,
            invariants: o.invariants,
            metrics: o.metrics,
            output: cfg.full.then_some(o.output),
        },
        Err(e) => RunReport {
            seed,
            graph: GraphSummary::of(&g),
            valid: false,
            failures: Vec::new(),
            error: Some(e.to_string()),
            stats: RoundStats::default(),
            invariants: None,
            metrics: Value::Null,
            output: None,
        },
    })
}

fn budget_failures(stats: &RoundStats) -> Vec<String> {
    if !stats.budget_violations.is_empty() {
        vec![format!(
            "{} messages exceeded the bit budget",
            stats.budget_violations.len()
        )]
    } else {
        Vec::new()
    }
}

/// Invariant A (`cluster_count * d^i <= N`) and C (`overlap <= i * 13 d^3`) per phase.
fn invariant_failures(log: &InvariantsLog) -> Vec<String> {
    let mut out = Vec::new();
    for p in &log.phases {
        let bound = (log.d as u128).checked_pow(p.phase as u32);
        let a_ok = bound.map_or(p.cluster_count == 0, |b| {
            p.cluster_count as u128 * b <= log.n_initial as u128
        });
        if !a_ok {
            out.push(format!(
                "phase {}: invariant A broken ({} clusters)",
                p.phase, p.cluster_count
            ));
        }
        if p.max_overlap as u128 > p.overlap_bound {
            out.push(format!(
                "phase {}: invariant C broken (overlap {})",
                p.phase, p.max_overlap
            ));
        }
    }
    out
}

fn run_algo(cfg: &ExperimentConfig, g: &Graph, seed: u64) -> netdecomp::Result<Outcome> {
    let sim = cfg.sim(g, seed);
    match cfg.algo {
        Algo::Netdecomp => {
            let det = decompose(
                g,
                &DetConfig {
                    k: cfg.k,
                    mode: cfg.mode,
                    sim,
                },
                None,
            )?;
            let rep = validate_decomposition(g, &det.decomposition);
            let mut failures = rep.failures.clone();
            failures.extend(invariant_failures(&det.log));
            failures.extend(budget_failures(&det.stats));
            let series: Vec<Value> = det
                .log
                .phases
                .iter()
                .map(|p| {
                    json!({
                        "phase": p.phase,
                        "a_cluster_count": p.cluster_count,
                        "b_max_radius_gk": p.max_radius_gk,
                        "c_max_overlap": p.max_overlap,
                        "c_bound": p.overlap_bound,
                    })
                })
                .collect();
            Ok(Outcome {
                valid: failures.is_empty(),
                failures,
                stats: det.stats.clone(),
                metrics: json!({
                    "colors": rep.colors,
                    "max_weak_diameter": rep.max_weak_diameter,
                    "min_same_color_gap": rep.min_same_color_gap,
                    "max_edge_overlap": rep.max_edge_overlap,
                    "phases": series,
                }),
                output: serde_json::to_value(&det.decomposition).expect("serializable"),
                invariants: Some(det.log),
            })
        }
        Algo::Carve | Algo::Ballgrow => {
            let out: RefineOutput = if cfg.algo == Algo::Carve {
                let k = CarveParams::for_size(g.n()).separation();
                let inter = intermediate_decomposition(g, k, cfg.mode)?;
                carve_decompose(
                    g,
                    &inter,
                    &CarveConfig::for_network(g.n(), g.id_bits(), seed),
                )?
            } else {
                let inter = intermediate_decomposition(g, ball_separation(g.n()), cfg.mode)?;
                ball_grow_refine(g, &inter)?
            };
            let rep = validate_decomposition(g, &out.decomposition);
            let mut failures = rep.failures.clone();
            if cfg.algo == Algo::Carve {
                let cap = 2 * CarveParams::for_size(g.n()).cap_d as u32;
                if out.max_strong_diameter > cap {
                    failures.push(format!(
                        "strong diameter {} exceeds {cap}",
                        out.max_strong_diameter
                    ));
                }
            }
            if rep.colors > out.phases.len() {
                failures.push(format!(
                    "{} colors over {} phases",
                    rep.colors,
                    out.phases.len()
                ));
            }
            let successes = out.runs.iter().filter(|r| r.success).count();
            Ok(Outcome {
                valid: failures.is_empty(),
                failures,
                stats: out.stats.clone(),
                invariants: None,
                metrics: json!({
                    "colors": rep.colors,
                    "phases": out.phases,
                    "max_strong_diameter": out.max_strong_diameter,
                    "runs": out.runs.len(),
                    "successful_runs": successes,
                }),
                output: serde_json::to_value(&out.decomposition).expect("serializable"),
            })
        }
        Algo::MisFast | Algo::MisSlow => {
            let variant = if cfg.algo == Algo::MisFast {
                MisVariant::Fast
            } else {
                MisVariant::Slow
            };
            let mut mcfg = MisConfig::new(g, variant, seed);
            mcfg.sim = sim;
            let r = mis_full(g, &mcfg)?;
            let mut failures: Vec<String> = validate_mis(g, &r.nodes).err().into_iter().collect();
            failures.extend(budget_failures(&r.stats));
            let value = serde_json::to_value(&r).expect("serializable");
            Ok(Outcome {
                valid: failures.is_empty(),
                failures,
                stats: r.stats.clone(),
                invariants: None,
                metrics: json!({
                    "size": r.nodes.len(),
                    "rounds": r.rounds,
                    "phases": value["phases"],
                }),
                output: value,
            })
        }
        Algo::Cover => {
            let det = decompose(
                g,
                &DetConfig {
                    k: 2 * cfg.k,
                    mode: cfg.mode,
                    sim,
                },
                None,
            )?;
            let colors = det.decomposition.colors_used();
            let out = cover_from_decomposition(g, cfg.k, &det.decomposition)?;
            let rep = validate_cover(g, &out.cover);
            let mut failures = rep.failures.clone();
            if rep.sparsity > colors {
                failures.push(format!(
                    "sparsity {} exceeds {colors} input colors",
                    rep.sparsity
                ));
            }
            failures.extend(budget_failures(&det.stats));
            let mut stats = det.stats.clone();
            stats.then(&RoundStats {
                rounds: out.rounds,
                ..RoundStats::default()
            });
            Ok(Outcome {
                valid: failures.is_empty(),
                failures,
                stats,
                invariants: Some(det.log),
                metrics: json!({
                    "input_colors": colors,
                    "sparsity": rep.sparsity,
                    "diameter": rep.diameter,
                    "diameter_bound": out.cover.d,
                    "input_diameter": out.input_diameter,
                }),
                output: serde_json::to_value(&out.cover).expect("serializable"),
            })
        }
        Algo::Mst => {
            let mcfg = MstConfig {
                mu: cfg.mu,
                mode: cfg.mode,
                sim,
            };
            let r = cover_mst(g, &mcfg)?;
            let failures: Vec<String> = r
                .mismatches
                .iter()
                .map(|(u, v)| format!("edge ({u}, {v}) classified against the oracle"))
                .collect();
            let value = serde_json::to_value(&r).expect("serializable");
            let s = &r.cover_stats;
            Ok(Outcome {
                valid: failures.is_empty(),
                failures,
                stats: RoundStats {
                    rounds: s.decomposition_rounds + s.cover_rounds + s.cluster_mst_rounds,
                    max_bits_per_edge_round: s.max_bits_per_edge_round,
                    ..RoundStats::default()
                },
                invariants: None,
                metrics: json!({
                    "mu": r.mu,
                    "tree_edges": r.mst_edges.len(),
                    "excluded_edges": r.excluded_edges.len(),
                    "cover_stats": value["cover_stats"],
                }),
                output: value,
            })
        }
        Algo::Verify => unreachable!("handled by the caller"),
    }
}
