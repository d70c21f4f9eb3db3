//! Checking stored artifacts with the validators, and the bundled fixtures.

use anyhow::{bail, Context, Result};
use netdecomp::cluster::{
    validate_cover, validate_decomposition, validate_mis, validate_ruling_set, Decomposition,
    NeighborhoodCover, RulingSetResult,
};
use netdecomp::graph::{Graph, GraphJson};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Artifact {
    Decomposition(Decomposition),
    Cover(NeighborhoodCover),
    Mis(Vec<usize>),
    RulingSet(RulingSetResult),
}

/// An artifact file: `kind` names which one of the payload fields is set.
/// The graph may be embedded or supplied separately.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ArtifactFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Fixtures only: `"valid"` or `"invalid"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphJson>,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Decomposition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<NeighborhoodCover>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ruling_set: Option<RulingSetResult>,
}

impl ArtifactFile {
    pub fn artifact(&self) -> Result<Artifact> {
        let missing = || format!("artifact of kind {:?} lacks its payload", self.kind);
        Ok(match self.kind.as_str() {
            "decomposition" => {
                Artifact::Decomposition(self.decomposition.clone().with_context(missing)?)
            }
            "cover" => Artifact::Cover(self.cover.clone().with_context(missing)?),
            "mis" => Artifact::Mis(self.nodes.clone().with_context(missing)?),
            "ruling-set" => Artifact::RulingSet(self.ruling_set.clone().with_context(missing)?),
            other => bail!("unknown artifact kind {other:?}"),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: String,
    pub valid: bool,
    pub failures: Vec<String>,
    pub details: Value,
}

pub fn verify(g: &Graph, artifact: &Artifact) -> Verdict {
    match artifact {
        Artifact::Decomposition(decomposition) => {
            let rep = validate_decomposition(g, decomposition);
            Verdict {
                kind: "decomposition".into(),
                valid: rep.valid,
                failures: rep.failures.clone(),
                details: json!({
                    "colors": rep.colors,
                    "max_weak_diameter": rep.max_weak_diameter,
                    "min_same_color_gap": rep.min_same_color_gap,
                    "max_edge_overlap": rep.max_edge_overlap,
                }),
            }
        }
        Artifact::Cover(cover) => {
            let rep = validate_cover(g, cover);
            Verdict {
                kind: "cover".into(),
                valid: rep.valid,
                failures: rep.failures.clone(),
                details: json!({
                    "sparsity": rep.sparsity,
                    "diameter": rep.diameter,
                    "uncovered_balls": rep.uncovered_balls,
                }),
            }
        }
        Artifact::Mis(nodes) => one(
            "mis",
            validate_mis(g, nodes),
            json!({ "size": nodes.len() }),
        ),
        Artifact::RulingSet(ruling_set) => one(
            "ruling-set",
            validate_ruling_set(g, ruling_set),
            json!({ "chosen": ruling_set.chosen.len(), "alpha": ruling_set.alpha, "beta": ruling_set.beta }),
        ),
    }
}

fn one(kind: &str, r: std::result::Result<(), String>, details: Value) -> Verdict {
    Verdict {
        kind: kind.into(),
        valid: r.is_ok(),
        failures: r.err().into_iter().collect(),
        details,
    }
}

pub fn parse_artifact(text: &str) -> Result<ArtifactFile> {
    serde_json::from_str(text).context("parsing artifact JSON")
}

/// Graph embedded in the artifact, else the supplied one.
pub fn artifact_graph(file: &ArtifactFile, supplied: Option<Graph>) -> Result<Graph> {
    match (&file.graph, supplied) {
        (Some(gj), _) => Ok(gj.clone().into_graph()?),
        (None, Some(g)) => Ok(g),
        (None, None) => bail!("artifact has no embedded graph; pass --graph or --gen"),
    }
}

pub const FIXTURES: &[(&str, &str)] = &[
    ("p3_valid_k1", include_str!("../fixtures/p3_valid_k1.json")),
    (
        "p3_invalid_separation",
        include_str!("../fixtures/p3_invalid_separation.json"),
    ),
    (
        "p5_two_colors_k2",
        include_str!("../fixtures/p5_two_colors_k2.json"),
    ),
    ("broken_tree", include_str!("../fixtures/broken_tree.json")),
    ("star_cover", include_str!("../fixtures/star_cover.json")),
    (
        "path_cover_uncovered",
        include_str!("../fixtures/path_cover_uncovered.json"),
    ),
    (
        "triangle_mis",
        include_str!("../fixtures/triangle_mis.json"),
    ),
    (
        "triangle_not_independent",
        include_str!("../fixtures/triangle_not_independent.json"),
    ),
    (
        "path_not_maximal",
        include_str!("../fixtures/path_not_maximal.json"),
    ),
    (
        "p5_ruling_set",
        include_str!("../fixtures/p5_ruling_set.json"),
    ),
    (
        "p5_ruling_set_too_close",
        include_str!("../fixtures/p5_ruling_set_too_close.json"),
    ),
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub expect: String,
    pub verdict: Verdict,
    pub pass: bool,
}

pub fn run_fixture_suite() -> Result<Vec<FixtureOutcome>> {
    let mut out = Vec::new();
    for (name, text) in FIXTURES {
        let file = parse_artifact(text).with_context(|| format!("fixture {name}"))?;
        let g = artifact_graph(&file, None)?;
        let verdict = verify(&g, &file.artifact()?);
        let expect = file
            .expect
            .clone()
            .with_context(|| format!("fixture {name} lacks `expect`"))?;
        let pass = match expect.as_str() {
            "valid" => verdict.valid,
            "invalid" => !verdict.valid,
            other => bail!("fixture {name}: unknown expectation {other:?}"),
        };
        out.push(FixtureOutcome {
            name: name.to_string(),
            expect,
            verdict,
            pass,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures_meet_expectations() {
        for f in run_fixture_suite().unwrap() {
            assert!(f.pass, "{}: {:?}", f.name, f.verdict);
        }
    }

    #[test]
    fn separation_fixture_names_the_gap() {
        let file = parse_artifact(FIXTURES[1].1).unwrap();
        let g = artifact_graph(&file, None).unwrap();
        let v = verify(&g, &file.artifact().unwrap());
        assert!(!v.valid);
        assert_eq!(v.details["min_same_color_gap"], 2);
    }
}
