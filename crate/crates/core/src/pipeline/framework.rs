use std::collections::BTreeSet;
use std::fmt;

use crate::dominance::{label_answer_sets, make_gen_example, Example, LabelOptions};
use crate::learner::{accepts, learn, CandidateConstraint, LearnStats, LearningTask};
use crate::program::{ground, Program, Rule};
use crate::solver::{enumerate_answer_sets, EnumConfig};
use crate::symmetry::{build_symmetry_graph, find_automorphisms_capped};
use crate::{Error, Result};

use super::manifest::{Instance, PipelineConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbkEntry {
    pub rule: Rule,
    pub round: usize,
    pub source: String,
}

/// Constraints learned so far, each with the round and instances it came from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActiveBackground {
    pub entries: Vec<AbkEntry>,
}

impl ActiveBackground {
    pub fn from_program(p: &Program, source: &str) -> Self {
        let mut abk = ActiveBackground::default();
        for r in &p.rules {
            abk.push(r.clone(), 0, source);
        }
        abk
    }

    /// Add a rule unless an identical one is already present.
    pub fn push(&mut self, rule: Rule, round: usize, source: &str) -> bool {
        if self.entries.iter().any(|e| e.rule == rule) {
            return false;
        }
        self.entries.push(AbkEntry {
            rule,
            round,
            source: source.to_string(),
        });
        true
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn to_program(&self) -> Program {
        Program {
            rules: self.entries.iter().map(|e| e.rule.clone()).collect(),
            facts: Vec::new(),
        }
    }

    pub fn rule_strings(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.rule.to_string()).collect()
    }
}

impl fmt::Display for ActiveBackground {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "% round {}, from {}", e.round, e.source)?;
            writeln!(f, "{}", e.rule)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceStats {
    pub name: String,
    pub answer_sets: usize,
    pub solver_nodes: u64,
    pub generators: Vec<String>,
    pub automorphisms_complete: bool,
    pub automorphism_nodes: u64,
    pub positives: usize,
    pub negatives: usize,
    /// Positive examples dropped because the current ABK already rejects them.
    pub dropped_positives: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundReport {
    pub round: usize,
    pub hypothesis: Vec<String>,
    pub cost: u64,
    pub uncovered: Vec<(String, u64)>,
    pub failing: Vec<String>,
    pub gen: Vec<String>,
    pub learn_stats: LearnStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameworkReport {
    pub rounds: Vec<RoundReport>,
    pub instances: Vec<InstanceStats>,
    pub learned: Vec<CandidateConstraint>,
    pub abk: ActiveBackground,
    /// The learning task of the accepted round.
    pub task: LearningTask,
}

fn facts_key(p: &Program) -> BTreeSet<String> {
    p.facts.iter().map(|a| a.to_string()).collect()
}

/// Whether `program` has an answer set.
pub fn satisfiable(program: &Program, node_budget: u64) -> Result<bool> {
    let gp = ground(program)?;
    Ok(!enumerate_answer_sets(&gp, &EnumConfig::first(node_budget))?.answer_sets.is_empty())
}

fn check_config(cfg: &PipelineConfig) -> Result<()> {
    if cfg.instances.is_empty() {
        return Err(Error::Config("the representative instance set S is empty".into()));
    }
    if cfg.max_rounds == 0 {
        return Err(Error::Config("max_rounds must be at least 1".into()));
    }
    let gen: BTreeSet<_> = cfg.gen.iter().map(|g| facts_key(&g.facts)).collect();
    if let Some(v) = cfg.validation.iter().find(|v| gen.contains(&facts_key(&v.facts))) {
        return Err(Error::Config(format!("validation instance {} also appears in Gen", v.name)));
    }
    Ok(())
}

/// Label the answer sets of one representative instance. Symmetries are
/// detected on the problem and instance alone.
fn label_representative(
    cfg: &PipelineConfig,
    s: &Instance,
    abk: &ActiveBackground,
    next_id: &mut usize,
) -> Result<(Vec<Example>, InstanceStats)> {
    let gp = ground(&cfg.problem.union(&s.facts))?;
    let auts = find_automorphisms_capped(&build_symmetry_graph(&gp), cfg.limits.automorphism_budget, cfg.limits.closure_cap);
    let found = enumerate_answer_sets(&gp, &cfg.limits.enum_config(cfg.seed))?;
    let opts = LabelOptions {
        negative_weight: cfg.limits.negative_weight,
        ..Default::default()
    };
    let mut examples = label_answer_sets(&gp, &auts.generators, &found.answer_sets, &s.facts, &opts);
    let mut dropped = 0;
    if !abk.is_empty() {
        let background = cfg.problem.union(&cfg.aux_background).union(&abk.to_program());
        let enum_cfg = EnumConfig::first(cfg.limits.node_budget);
        let mut kept = Vec::new();
        for e in examples {
            if e.is_positive() && !accepts(&background, &e, &enum_cfg)? {
                dropped += 1;
            } else {
                kept.push(e);
            }
        }
        examples = kept;
    }
    for e in &mut examples {
        e.id = format!("id{next_id}");
        *next_id += 1;
    }
    let stats = InstanceStats {
        name: s.name.clone(),
        answer_sets: found.answer_sets.len(),
        solver_nodes: found.nodes,
        generators: auts.generators.generators().iter().map(|g| g.render(&gp.atom_table)).collect(),
        automorphisms_complete: auts.complete,
        automorphism_nodes: auts.nodes,
        positives: examples.iter().filter(|e| e.is_positive()).count(),
        negatives: examples.iter().filter(|e| !e.is_positive()).count(),
        dropped_positives: dropped,
    };
    Ok((examples, stats))
}

/// The learning task of one round: labelled answer sets of S plus one
/// positive example per generalization instance.
pub fn build_task(
    cfg: &PipelineConfig,
    abk: &ActiveBackground,
    gen: &[Instance],
) -> Result<(LearningTask, Vec<InstanceStats>)> {
    let mut next_id = 1;
    let mut examples = Vec::new();
    let mut instances = Vec::new();
    for s in &cfg.instances {
        let (ex, stats) = label_representative(cfg, s, abk, &mut next_id)?;
        examples.extend(ex);
        instances.push(stats);
    }
    let mut gen_contexts: Vec<&Program> = Vec::new();
    if !abk.is_empty() {
        gen_contexts.extend(cfg.instances.iter().map(|s| &s.facts));
    }
    gen_contexts.extend(gen.iter().map(|g| &g.facts));
    for (k, g) in gen_contexts.into_iter().enumerate() {
        examples.push(make_gen_example(format!("gen{}", k + 1), g));
    }
    let task = LearningTask {
        background: cfg.problem.union(&cfg.aux_background),
        abk: abk.to_program(),
        examples,
        space: cfg.space.clone(),
        scoring: cfg.scoring.clone(),
    };
    Ok((task, instances))
}

fn run_rounds(cfg: &PipelineConfig, mut abk: ActiveBackground) -> Result<FrameworkReport> {
    check_config(cfg)?;
    let source = cfg.instances.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join("+");
    let mut gen = cfg.gen.clone();
    let mut rounds = Vec::new();
    let mut last_failing = String::new();
    for round in 1..=cfg.max_rounds {
        let (task, instances) = build_task(cfg, &abk, &gen)?;
        let h = learn(&task, &cfg.limits.learn_config())?;
        let with_h = task.background.union(&task.abk).union(&h.to_program());
        let mut failing = Vec::new();
        for v in &cfg.validation {
            if !satisfiable(&with_h.union(&v.facts), cfg.limits.node_budget)? {
                failing.push(v.clone());
            }
        }
        rounds.push(RoundReport {
            round,
            hypothesis: h.constraints.iter().map(|c| c.to_string()).collect(),
            cost: h.total_cost,
            uncovered: h.uncovered.clone(),
            failing: failing.iter().map(|v| v.name.clone()).collect(),
            gen: gen.iter().map(|g| g.name.clone()).collect(),
            learn_stats: h.stats.clone(),
        });
        if failing.is_empty() {
            for c in &h.constraints {
                abk.push(c.to_rule(), round, &source);
            }
            return Ok(FrameworkReport {
                rounds,
                instances,
                learned: h.constraints,
                abk,
                task,
            });
        }
        last_failing = failing.iter().map(|v| v.name.as_str()).collect::<Vec<_>>().join(",");
        for v in failing {
            if !gen.iter().any(|g| facts_key(&g.facts) == facts_key(&v.facts)) {
                gen.push(v);
            }
        }
    }
    Err(Error::MaxRounds {
        rounds: cfg.max_rounds,
        instance: last_failing,
    })
}

/// Label S, learn, validate against V; failing validation instances move
/// to Gen and the round repeats. Accepted constraints join the ABK.
pub fn run_framework(cfg: &PipelineConfig) -> Result<FrameworkReport> {
    run_rounds(cfg, ActiveBackground::from_program(&cfg.abk, "input"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncrementalReport {
    pub subtasks: Vec<FrameworkReport>,
    pub abk: ActiveBackground,
}

/// One framework run per instance of S, in order, each starting from the
/// ABK left by the previous one.
pub fn run_incremental(cfg: &PipelineConfig) -> Result<IncrementalReport> {
    check_config(cfg)?;
    let mut abk = ActiveBackground::from_program(&cfg.abk, "input");
    let mut subtasks = Vec::new();
    for s in &cfg.instances {
        let sub = PipelineConfig {
            instances: vec![s.clone()],
            ..cfg.clone()
        };
        let report = run_rounds(&sub, abk)?;
        abk = report.abk.clone();
        subtasks.push(report);
    }
    Ok(IncrementalReport { subtasks, abk })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderReport {
    pub forward: Vec<String>,
    pub reversed: Vec<String>,
    pub differs: bool,
    /// Whether every validation instance stays satisfiable under each ABK.
    pub forward_valid: bool,
    pub reversed_valid: bool,
}

fn all_valid(cfg: &PipelineConfig, abk: &ActiveBackground) -> Result<bool> {
    let base = cfg.problem.union(&cfg.aux_background).union(&abk.to_program());
    for v in &cfg.validation {
        if !satisfiable(&base.union(&v.facts), cfg.limits.node_budget)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Run the incremental mode on S and on S reversed and compare the results.
pub fn order_sensitivity(cfg: &PipelineConfig) -> Result<OrderReport> {
    let forward = run_incremental(cfg)?.abk;
    let mut rev = cfg.clone();
    rev.instances.reverse();
    let reversed = run_incremental(&rev)?.abk;
    let f: BTreeSet<String> = forward.rule_strings().into_iter().collect();
    let r: BTreeSet<String> = reversed.rule_strings().into_iter().collect();
    Ok(OrderReport {
        forward_valid: all_valid(cfg, &forward)?,
        reversed_valid: all_valid(cfg, &reversed)?,
        differs: f != r,
        forward: forward.rule_strings(),
        reversed: reversed.rule_strings(),
    })
}
