use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dominance::DEFAULT_NEGATIVE_WEIGHT;
use crate::learner::{
    parse_modes, HypothesisSpace, LearnConfig, Scoring, DEFAULT_ACCEPTING_CAP, DEFAULT_MAX_BODY, DEFAULT_MAX_VARS,
    DEFAULT_SEARCH_BUDGET, DEFAULT_SPACE_LIMIT,
};
use crate::program::{parse_program, Program};
use crate::solver::EnumConfig;
use crate::symmetry::{DEFAULT_AUTOMORPHISM_BUDGET, DEFAULT_CLOSURE_CAP};
use crate::{Error, Result};

/// An instance given by file path or inline facts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    Path(String),
    Inline { name: String, facts: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Limits {
    /// Answer sets enumerated per instance of S; 0 means all.
    pub answer_set_cap: usize,
    pub node_budget: u64,
    pub automorphism_budget: u64,
    pub closure_cap: usize,
    pub space_limit: usize,
    pub max_body: usize,
    pub max_vars: usize,
    pub negative_weight: u64,
    pub accepting_cap: usize,
    pub search_budget: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            answer_set_cap: 0,
            node_budget: EnumConfig::default().node_budget,
            automorphism_budget: DEFAULT_AUTOMORPHISM_BUDGET,
            closure_cap: DEFAULT_CLOSURE_CAP,
            space_limit: DEFAULT_SPACE_LIMIT,
            max_body: DEFAULT_MAX_BODY,
            max_vars: DEFAULT_MAX_VARS,
            negative_weight: DEFAULT_NEGATIVE_WEIGHT,
            accepting_cap: DEFAULT_ACCEPTING_CAP,
            search_budget: DEFAULT_SEARCH_BUDGET,
        }
    }
}

impl Limits {
    pub fn enum_config(&self, seed: u64) -> EnumConfig {
        EnumConfig {
            cap: self.answer_set_cap,
            seed,
            node_budget: self.node_budget,
        }
    }

    pub fn learn_config(&self) -> LearnConfig {
        LearnConfig {
            node_budget: self.node_budget,
            accepting_cap: self.accepting_cap,
            space_limit: self.space_limit,
            search_budget: self.search_budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub instances: Vec<InstanceSpec>,
    #[serde(default)]
    pub node_budget: Option<u64>,
}

fn default_rounds() -> usize {
    5
}

/// JSON manifest naming every input of a run. Paths are relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub problem: String,
    #[serde(default)]
    pub aux_background: Option<String>,
    #[serde(default)]
    pub abk: Option<String>,
    pub bias: String,
    pub instances: Vec<InstanceSpec>,
    #[serde(default)]
    pub gen: Vec<InstanceSpec>,
    #[serde(default)]
    pub validation: Vec<InstanceSpec>,
    #[serde(default = "default_rounds")]
    pub max_rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub scoring: Option<BTreeMap<String, u64>>,
    #[serde(default)]
    pub bench: Option<BenchSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub facts: Program,
}

impl Instance {
    pub fn new(name: impl Into<String>, facts: Program) -> Self {
        Instance {
            name: name.into(),
            facts,
        }
    }
}

/// Everything a framework run needs, loaded and parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub problem: Program,
    pub aux_background: Program,
    pub abk: Program,
    pub space: HypothesisSpace,
    pub scoring: Scoring,
    pub instances: Vec<Instance>,
    pub gen: Vec<Instance>,
    pub validation: Vec<Instance>,
    pub bench: Vec<Instance>,
    pub bench_budget: Option<u64>,
    pub limits: Limits,
    pub max_rounds: usize,
    pub seed: u64,
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Per-predicate literal costs from a JSON object such as `{"p2h": 2}`.
pub fn parse_weights(text: &str) -> Result<BTreeMap<String, u64>> {
    Ok(serde_json::from_str(text)?)
}

fn load_instance(base: &Path, spec: &InstanceSpec) -> Result<Instance> {
    match spec {
        InstanceSpec::Path(p) => {
            let path = base.join(p);
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.clone());
            Ok(Instance::new(name, parse_program(&read_file(&path)?)?))
        }
        InstanceSpec::Inline { name, facts } => Ok(Instance::new(name.clone(), parse_program(facts)?)),
    }
}

impl PipelineConfig {
    pub fn load(manifest_path: impl AsRef<Path>) -> Result<Self> {
        let path = manifest_path.as_ref();
        let manifest: Manifest = serde_json::from_str(&read_file(path)?)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_else(PathBuf::new);
        Self::from_manifest(&manifest, &base)
    }

    pub fn from_manifest(m: &Manifest, base: &Path) -> Result<Self> {
        let program = |p: &Option<String>| -> Result<Program> {
            match p {
                Some(p) => parse_program(&read_file(&base.join(p))?),
                None => Ok(Program::new()),
            }
        };
        let instances = |specs: &[InstanceSpec]| specs.iter().map(|s| load_instance(base, s)).collect::<Result<Vec<_>>>();
        let mut space = HypothesisSpace::new(parse_modes(&read_file(&base.join(&m.bias))?)?);
        space.max_body = m.limits.max_body;
        space.max_vars = m.limits.max_vars;
        Ok(PipelineConfig {
            problem: program(&Some(m.problem.clone()))?,
            aux_background: program(&m.aux_background)?,
            abk: program(&m.abk)?,
            space,
            scoring: m.scoring.clone().map(Scoring::weighted).unwrap_or_default(),
            instances: instances(&m.instances)?,
            gen: instances(&m.gen)?,
            validation: instances(&m.validation)?,
            bench: m.bench.as_ref().map(|b| instances(&b.instances)).transpose()?.unwrap_or_default(),
            bench_budget: m.bench.as_ref().and_then(|b| b.node_budget),
            limits: m.limits,
            max_rounds: m.max_rounds,
            seed: m.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_defaults() {
        let m: Manifest = serde_json::from_str(
            r#"{"problem": "p.lp", "bias": "b.las", "instances": [{"name": "p3h3", "facts": "pigeon(3). hole(3)."}, "x.lp"]}"#,
        )
        .unwrap();
        assert_eq!(m.max_rounds, 5);
        assert_eq!(m.limits, Limits::default());
        assert_eq!(m.limits.negative_weight, 100);
        assert!(matches!(&m.instances[1], InstanceSpec::Path(p) if p == "x.lp"));
    }

    #[test]
    fn partial_limits() {
        let m: Manifest =
            serde_json::from_str(r#"{"problem": "p", "bias": "b", "instances": [], "limits": {"max_body": 2}}"#).unwrap();
        assert_eq!(m.limits.max_body, 2);
        assert_eq!(m.limits.max_vars, 3);
    }
}
