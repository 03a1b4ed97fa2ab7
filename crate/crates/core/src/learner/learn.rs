use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::dominance::{Example, Label, Weight};
use crate::program::{ground, GroundProgram, Program, Value};
use crate::solver::{enumerate_with_assumptions, Assumptions, EnumConfig, Interpretation};
use crate::{Error, Result};

use super::space::{enumerate_space, CandidateConstraint, DEFAULT_SPACE_LIMIT};
use super::task::LearningTask;

pub const DEFAULT_ACCEPTING_CAP: usize = 10_000;
pub const DEFAULT_SEARCH_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearnConfig {
    /// Solver node budget for each example.
    pub node_budget: u64,
    /// Most accepting answer sets stored per example.
    pub accepting_cap: usize,
    pub space_limit: usize,
    /// Node budget of the hypothesis search.
    pub search_budget: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            node_budget: EnumConfig::default().node_budget,
            accepting_cap: DEFAULT_ACCEPTING_CAP,
            space_limit: DEFAULT_SPACE_LIMIT,
            search_budget: DEFAULT_SEARCH_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LearnStats {
    pub space_size: usize,
    /// Candidates left after dropping useless, duplicate and dominated ones.
    pub relevant: usize,
    pub accepting_sets: usize,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    pub constraints: Vec<CandidateConstraint>,
    pub total_cost: u64,
    /// Examples left uncovered, with the penalty paid for each.
    pub uncovered: Vec<(String, u64)>,
    pub stats: LearnStats,
}

impl Hypothesis {
    pub fn penalty(&self) -> u64 {
        self.uncovered.iter().map(|(_, w)| w).sum()
    }

    pub fn objective(&self) -> u64 {
        self.total_cost + self.penalty()
    }

    pub fn to_program(&self) -> Program {
        Program {
            rules: self.constraints.iter().map(|c| c.to_rule()).collect(),
            facts: Vec::new(),
        }
    }
}

/// Atoms of one answer set grouped by predicate.
type AnswerFacts = HashMap<String, Vec<Vec<Value>>>;

fn answer_facts(gp: &GroundProgram, i: &Interpretation) -> AnswerFacts {
    let mut out: AnswerFacts = HashMap::new();
    for a in i.atoms(&gp.atom_table) {
        out.entry(a.predicate.clone()).or_default().push(a.args.clone());
    }
    out
}

/// Whether the body of `c` holds in the answer set.
fn violates(c: &CandidateConstraint, facts: &AnswerFacts) -> bool {
    fn go<'a>(lits: &[(String, Vec<usize>)], facts: &'a AnswerFacts, binding: &mut Vec<Option<&'a Value>>) -> bool {
        let Some(((pred, vars), rest)) = lits.split_first() else {
            return true;
        };
        let Some(tuples) = facts.get(pred) else {
            return false;
        };
        'tuples: for t in tuples {
            if t.len() != vars.len() {
                continue;
            }
            let mut bound = Vec::new();
            for (&v, val) in vars.iter().zip(t) {
                match binding[v] {
                    Some(b) if b != val => {
                        for &u in &bound {
                            binding[u] = None;
                        }
                        continue 'tuples;
                    }
                    Some(_) => {}
                    None => {
                        binding[v] = Some(val);
                        bound.push(v);
                    }
                }
            }
            let ok = go(rest, facts, binding);
            for &u in &bound {
                binding[u] = None;
            }
            if ok {
                return true;
            }
        }
        false
    }
    let mut binding = vec![None; c.var_count()];
    go(&c.literals, facts, &mut binding)
}

fn assumptions(gp: &GroundProgram, e: &Example) -> Option<Assumptions> {
    let mut a = Assumptions::default();
    for t in &e.pi.inclusions {
        a.true_atoms.push(gp.atom_table.rank(t)?);
    }
    a.false_atoms = e.pi.exclusions.iter().filter_map(|f| gp.atom_table.rank(f)).collect();
    Some(a)
}

fn indeterminate(e: &Example, err: Error) -> Error {
    match err {
        Error::Budget { budget, .. } => Error::Indeterminate {
            example: e.id.clone(),
            reason: format!("solver budget of {budget} nodes exhausted"),
        },
        other => other,
    }
}

/// Whether some answer set of `program` plus the example context extends
/// the example's partial interpretation.
pub fn accepts(program: &Program, e: &Example, cfg: &EnumConfig) -> Result<bool> {
    let gp = ground(&program.union(&e.context))?;
    let Some(a) = assumptions(&gp, e) else {
        return Ok(false);
    };
    let cfg = EnumConfig { cap: 1, ..*cfg };
    let found = enumerate_with_assumptions(&gp, &cfg, &a).map_err(|err| indeterminate(e, err))?;
    Ok(!found.answer_sets.is_empty())
}

/// Accepting answer sets of every example under `background`, with the
/// grounding shared between examples of equal context.
fn accepting_sets(background: &Program, examples: &[Example], cfg: &LearnConfig) -> Result<Vec<Vec<AnswerFacts>>> {
    let mut grounded: HashMap<String, GroundProgram> = HashMap::new();
    let mut out = Vec::new();
    let enum_cfg = EnumConfig {
        cap: cfg.accepting_cap + 1,
        seed: 0,
        node_budget: cfg.node_budget,
    };
    for e in examples {
        let key = e.context.to_string();
        if !grounded.contains_key(&key) {
            grounded.insert(key.clone(), ground(&background.union(&e.context))?);
        }
        let gp = &grounded[&key];
        let Some(a) = assumptions(gp, e) else {
            out.push(Vec::new());
            continue;
        };
        let sets = enumerate_with_assumptions(gp, &enum_cfg, &a).map_err(|err| indeterminate(e, err))?.answer_sets;
        if sets.len() > cfg.accepting_cap {
            return Err(Error::Indeterminate {
                example: e.id.clone(),
                reason: format!("more than {} accepting answer sets", cfg.accepting_cap),
            });
        }
        out.push(sets.iter().map(|i| answer_facts(gp, i)).collect());
    }
    Ok(out)
}

struct ExampleInfo {
    example: usize,
    weight: Option<u64>,
    sets: FixedBitSet,
}

struct Search {
    negatives: Vec<ExampleInfo>,
    positives: Vec<ExampleInfo>,
    costs: Vec<u64>,
    kills: Vec<FixedBitSet>,
    /// Candidates killing each accepting set, in candidate order.
    killers: Vec<Vec<usize>>,
    budget: u64,
    nodes: u64,
    best: Option<(u64, Vec<usize>)>,
}

impl Search {
    fn dfs(&mut self, chosen: &mut Vec<usize>, killed: &FixedBitSet, excluded: &mut FixedBitSet, abandoned: &mut [bool], cost: u64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::SearchBudget { budget: self.budget });
        }
        let mut base = cost;
        for p in &self.positives {
            if p.sets.is_subset(killed) {
                match p.weight {
                    Some(w) => base += w,
                    None => return Ok(()),
                }
            }
        }
        let mut bound = 0u64;
        let mut branch = None;
        for (k, n) in self.negatives.iter().enumerate() {
            if abandoned[k] {
                base += n.weight.unwrap_or(0);
                continue;
            }
            if n.sets.is_subset(killed) {
                continue;
            }
            let mut cheapest: Option<u64> = None;
            for s in n.sets.difference(killed) {
                if let Some(&c) = self.killers[s].iter().find(|&&c| !excluded.contains(c)) {
                    cheapest = Some(cheapest.map_or(self.costs[c], |m| m.min(self.costs[c])));
                }
            }
            let need = match (cheapest, n.weight) {
                (Some(c), Some(w)) => c.min(w),
                (Some(c), None) => c,
                (None, Some(w)) => w,
                (None, None) => return Ok(()),
            };
            bound = bound.max(need);
            if branch.is_none() {
                branch = Some(k);
            }
        }
        if let Some((best, _)) = &self.best {
            if base + bound >= *best {
                return Ok(());
            }
        }
        let Some(k) = branch else {
            self.best = Some((base, chosen.clone()));
            return Ok(());
        };
        let s = self.negatives[k].sets.difference(killed).next().expect("pending negative has a surviving set");
        let options: Vec<usize> = self.killers[s].iter().copied().filter(|&c| !excluded.contains(c)).collect();
        for &c in &options {
            let mut next = killed.clone();
            next.union_with(&self.kills[c]);
            chosen.push(c);
            let r = self.dfs(chosen, &next, excluded, abandoned, cost + self.costs[c]);
            chosen.pop();
            r?;
            excluded.insert(c);
        }
        if self.negatives[k].weight.is_some() {
            abandoned[k] = true;
            let r = self.dfs(chosen, killed, excluded, abandoned, cost);
            abandoned[k] = false;
            r?;
        }
        for &c in &options {
            excluded.set(c, false);
        }
        Ok(())
    }
}

/// Find a minimum-objective set of constraints: cost plus the penalties of
/// uncovered finite-weight examples, with every infinite-weight example
/// covered. A positive example is covered when some accepting answer set
/// survives the constraints, a negative one when none does.
pub fn learn(task: &LearningTask, cfg: &LearnConfig) -> Result<Hypothesis> {
    task.validate()?;
    let space = enumerate_space(&task.space, &task.scoring, cfg.space_limit)?;
    let background = task.background.union(&task.abk);
    let sets = accepting_sets(&background, &task.examples, cfg)?;

    let mut offsets = Vec::with_capacity(sets.len());
    let mut total = 0;
    for s in &sets {
        offsets.push(total);
        total += s.len();
    }
    let flat: Vec<&AnswerFacts> = sets.iter().flatten().collect();
    let masks: Vec<FixedBitSet> = space
        .par_iter()
        .map(|c| {
            let mut m = FixedBitSet::with_capacity(total);
            for (i, f) in flat.iter().enumerate() {
                if violates(c, f) {
                    m.insert(i);
                }
            }
            m
        })
        .collect();

    let mut negatives = Vec::new();
    let mut positives = Vec::new();
    let mut neg_mask = FixedBitSet::with_capacity(total);
    let mut hard_pos_mask = FixedBitSet::with_capacity(total);
    for (k, e) in task.examples.iter().enumerate() {
        let mut m = FixedBitSet::with_capacity(total);
        m.insert_range(offsets[k]..offsets[k] + sets[k].len());
        let info = ExampleInfo {
            example: k,
            weight: e.weight.finite(),
            sets: m,
        };
        match e.label {
            Label::Negative => {
                neg_mask.union_with(&info.sets);
                negatives.push(info);
            }
            Label::Positive => {
                if sets[k].is_empty() && e.weight == Weight::Infinite {
                    return Err(Error::UnsatisfiableTask { example: e.id.clone() });
                }
                positives.push(info);
            }
        }
    }

    let mut keep: Vec<usize> = Vec::new();
    let mut seen: HashSet<&FixedBitSet> = HashSet::new();
    for (c, m) in masks.iter().enumerate() {
        if m.is_disjoint(&neg_mask) {
            continue;
        }
        if positives.iter().any(|p| p.weight.is_none() && p.sets.is_subset(m)) {
            continue;
        }
        if seen.insert(m) {
            keep.push(c);
        }
    }
    for p in positives.iter().filter(|p| p.weight.is_none()) {
        hard_pos_mask.union_with(&p.sets);
    }
    let mut pos_mask = hard_pos_mask.clone();
    for p in &positives {
        pos_mask.union_with(&p.sets);
    }
    let parts: Vec<(FixedBitSet, FixedBitSet)> = keep
        .iter()
        .map(|&c| {
            let mut n = masks[c].clone();
            n.intersect_with(&neg_mask);
            let mut p = masks[c].clone();
            p.intersect_with(&pos_mask);
            (n, p)
        })
        .collect();
    let dominated: Vec<bool> = (0..keep.len())
        .into_par_iter()
        .map(|j| {
            (0..keep.len()).any(|i| {
                i != j
                    && space[keep[i]].cost <= space[keep[j]].cost
                    && parts[j].0.is_subset(&parts[i].0)
                    && parts[i].1.is_subset(&parts[j].1)
                    && (parts[i] != parts[j])
            })
        })
        .collect();
    let relevant: Vec<usize> = keep.iter().zip(&dominated).filter(|(_, d)| !**d).map(|(&c, _)| c).collect();

    let mut killers = vec![Vec::new(); total];
    for (ci, &c) in relevant.iter().enumerate() {
        for s in masks[c].ones() {
            killers[s].push(ci);
        }
    }
    let mut search = Search {
        negatives,
        positives,
        costs: relevant.iter().map(|&c| space[c].cost).collect(),
        kills: relevant.iter().map(|&c| masks[c].clone()).collect(),
        killers,
        budget: cfg.search_budget,
        nodes: 0,
        best: None,
    };
    let mut abandoned = vec![false; search.negatives.len()];
    let mut excluded = FixedBitSet::with_capacity(relevant.len());
    search.dfs(&mut Vec::new(), &FixedBitSet::with_capacity(total), &mut excluded, &mut abandoned, 0)?;

    let Some((_, chosen)) = search.best.take() else {
        let mut all = FixedBitSet::with_capacity(total);
        for k in &search.kills {
            all.union_with(k);
        }
        let blocking = search
            .negatives
            .iter()
            .find(|n| n.weight.is_none() && !n.sets.is_subset(&all))
            .or_else(|| search.negatives.iter().find(|n| n.weight.is_none()))
            .map(|n| task.examples[n.example].id.clone())
            .unwrap_or_default();
        return Err(Error::UnsatisfiableTask { example: blocking });
    };
    let mut chosen: Vec<usize> = chosen.into_iter().map(|ci| relevant[ci]).collect();
    chosen.sort_unstable();
    let mut killed = FixedBitSet::with_capacity(total);
    for &c in &chosen {
        killed.union_with(&masks[c]);
    }
    let mut uncovered = Vec::new();
    for info in search.negatives.iter().filter(|n| !n.sets.is_subset(&killed)) {
        uncovered.push((task.examples[info.example].id.clone(), info.weight.unwrap_or(0)));
    }
    for info in search.positives.iter().filter(|p| p.sets.is_subset(&killed)) {
        uncovered.push((task.examples[info.example].id.clone(), info.weight.unwrap_or(0)));
    }
    let constraints: Vec<CandidateConstraint> = chosen.iter().map(|&c| space[c].clone()).collect();
    Ok(Hypothesis {
        total_cost: constraints.iter().map(|c| c.cost).sum(),
        constraints,
        uncovered,
        stats: LearnStats {
            space_size: space.len(),
            relevant: relevant.len(),
            accepting_sets: total,
            nodes: search.nodes,
        },
    })
}
