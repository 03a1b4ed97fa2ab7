use std::collections::{BTreeMap, HashMap};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::program::{Atom, Rule, Term};
use crate::{Error, Result};

pub const DEFAULT_SPACE_LIMIT: usize = 200_000;
pub const DEFAULT_MAX_BODY: usize = 3;
pub const DEFAULT_MAX_VARS: usize = 3;

/// `#modeb(recall, pred(var(t1),...,var(tn)), (anti_reflexive))`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeDecl {
    pub recall: u32,
    pub predicate: String,
    pub arg_types: Vec<String>,
    pub anti_reflexive: bool,
}

impl fmt::Display for ModeDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.recall == u32::MAX {
            write!(f, "#modeb({}", self.predicate)?;
        } else {
            write!(f, "#modeb({},{}", self.recall, self.predicate)?;
        }
        if !self.arg_types.is_empty() {
            let args: Vec<String> = self.arg_types.iter().map(|t| format!("var({t})")).collect();
            write!(f, "({})", args.join(","))?;
        }
        if self.anti_reflexive {
            write!(f, ",(anti_reflexive)")?;
        }
        write!(f, ").")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisSpace {
    pub modes: Vec<ModeDecl>,
    pub max_body: usize,
    pub max_vars: usize,
}

impl HypothesisSpace {
    pub fn new(modes: Vec<ModeDecl>) -> Self {
        HypothesisSpace {
            modes,
            max_body: DEFAULT_MAX_BODY,
            max_vars: DEFAULT_MAX_VARS,
        }
    }
}

/// Rule cost: number of body literals, or a sum of per-predicate weights
/// (predicates missing from the table weigh 1).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Scoring {
    pub weights: Option<BTreeMap<String, u64>>,
}

impl Scoring {
    pub fn literals() -> Self {
        Scoring::default()
    }

    pub fn weighted(weights: BTreeMap<String, u64>) -> Self {
        Scoring { weights: Some(weights) }
    }

    pub fn literal_cost(&self, predicate: &str) -> u64 {
        match &self.weights {
            None => 1,
            Some(w) => w.get(predicate).copied().unwrap_or(1),
        }
    }
}

const VAR_NAMES: [&str; 8] = ["X", "Y", "Z", "W", "V", "U", "T", "S"];

fn var_name(i: usize) -> String {
    VAR_NAMES.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("V{i}"))
}

/// A headless rule over variables only, kept in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CandidateConstraint {
    /// Body literals as (predicate, variable indices), canonically ordered.
    pub(crate) literals: Vec<(String, Vec<usize>)>,
    pub cost: u64,
    key: String,
}

type Literals = Vec<(String, Vec<usize>)>;

fn render_literal(pred: &str, vars: &[usize], name: impl Fn(usize) -> String) -> String {
    if vars.is_empty() {
        pred.to_string()
    } else {
        format!("{pred}({})", vars.iter().map(|&v| name(v)).join(","))
    }
}

impl CandidateConstraint {
    /// Canonicalize a body given as (predicate, variable indices): the
    /// renaming of variables giving the smallest sorted literal list wins.
    pub fn new(literals: Vec<(String, Vec<usize>)>, scoring: &Scoring) -> Self {
        let n = literals.iter().flat_map(|(_, v)| v.iter()).map(|&v| v + 1).max().unwrap_or(0);
        let mut best: Option<(Vec<String>, Literals)> = None;
        for perm in (0..n).permutations(n) {
            let mut lits: Vec<(String, Vec<usize>)> = literals
                .iter()
                .map(|(p, vs)| (p.clone(), vs.iter().map(|&v| perm[v]).collect()))
                .collect();
            lits.sort_by_cached_key(|(p, vs)| render_literal(p, vs, |v| format!("V{v}")));
            lits.dedup();
            let strings: Vec<String> = lits.iter().map(|(p, vs)| render_literal(p, vs, |v| format!("V{v}"))).collect();
            if best.as_ref().is_none_or(|(b, _)| strings < *b) {
                best = Some((strings, lits));
            }
        }
        let (strings, literals) = best.unwrap_or_default();
        let cost = literals.iter().map(|(p, _)| scoring.literal_cost(p)).sum();
        CandidateConstraint {
            literals,
            cost,
            key: strings.join(", "),
        }
    }

    /// Canonical form of a headless rule whose body has positive literals
    /// over variables only.
    pub fn from_rule(rule: &Rule, scoring: &Scoring) -> Result<Self> {
        if rule.head.is_some() || !rule.body_neg.is_empty() || !rule.builtins.is_empty() || rule.body_pos.is_empty() {
            return Err(Error::Config(format!("not a candidate constraint: {rule}")));
        }
        let mut names: HashMap<&str, usize> = HashMap::new();
        let mut literals = Vec::new();
        for a in &rule.body_pos {
            let mut vars = Vec::new();
            for t in &a.args {
                match t {
                    Term::Var(v) => {
                        let next = names.len();
                        vars.push(*names.entry(v.as_str()).or_insert(next));
                    }
                    _ => return Err(Error::Config(format!("candidate constraints take variables only: {rule}"))),
                }
            }
            literals.push((a.predicate.clone(), vars));
        }
        Ok(CandidateConstraint::new(literals, scoring))
    }

    /// Canonical string; equal for constraints equal up to renaming.
    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn var_count(&self) -> usize {
        self.literals.iter().flat_map(|(_, v)| v.iter()).map(|&v| v + 1).max().unwrap_or(0)
    }

    pub fn to_rule(&self) -> Rule {
        Rule::constraint(
            self.literals
                .iter()
                .map(|(p, vs)| Atom::new(p.clone(), vs.iter().map(|&v| Term::var(var_name(v))).collect()))
                .collect(),
        )
    }
}

impl fmt::Display for CandidateConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self.literals.iter().map(|(p, vs)| render_literal(p, vs, var_name)).join(", ");
        write!(f, ":- {body}.")
    }
}

/// Cost of a candidate under `scoring`.
pub fn score(c: &CandidateConstraint, scoring: &Scoring) -> u64 {
    c.literals.iter().map(|(p, _)| scoring.literal_cost(p)).sum()
}

struct Enumerator<'a> {
    space: &'a HypothesisSpace,
    scoring: &'a Scoring,
    limit: usize,
    uses: Vec<u32>,
    var_types: Vec<&'a str>,
    body: Vec<(usize, Vec<usize>)>,
    out: HashMap<String, CandidateConstraint>,
}

impl<'a> Enumerator<'a> {
    fn record(&mut self) -> Result<()> {
        let lits = self
            .body
            .iter()
            .map(|(m, vs)| (self.space.modes[*m].predicate.clone(), vs.clone()))
            .collect();
        let c = CandidateConstraint::new(lits, self.scoring);
        if c.len() == self.body.len() {
            self.out.entry(c.key.clone()).or_insert(c);
        }
        if self.out.len() > self.limit {
            return Err(Error::SpaceTooLarge {
                count: self.out.len(),
                limit: self.limit,
            });
        }
        Ok(())
    }

    fn extend(&mut self, first_mode: usize) -> Result<()> {
        if !self.body.is_empty() {
            self.record()?;
        }
        if self.body.len() == self.space.max_body {
            return Ok(());
        }
        for m in first_mode..self.space.modes.len() {
            if self.uses[m] >= self.space.modes[m].recall {
                continue;
            }
            let mut args = Vec::new();
            self.assign(m, &mut args)?;
        }
        Ok(())
    }

    fn assign(&mut self, m: usize, args: &mut Vec<usize>) -> Result<()> {
        let mode = &self.space.modes[m];
        if args.len() == mode.arg_types.len() {
            if mode.anti_reflexive && args.len() >= 2 && args.iter().all_equal() {
                return Ok(());
            }
            if self.body.iter().any(|(bm, vs)| self.space.modes[*bm].predicate == mode.predicate && vs == args) {
                return Ok(());
            }
            self.body.push((m, args.clone()));
            self.uses[m] += 1;
            let r = self.extend(m);
            self.uses[m] -= 1;
            self.body.pop();
            return r;
        }
        let ty = mode.arg_types[args.len()].as_str();
        for v in 0..self.var_types.len() {
            if self.var_types[v] == ty {
                args.push(v);
                self.assign(m, args)?;
                args.pop();
            }
        }
        if self.var_types.len() < self.space.max_vars {
            self.var_types.push(ty);
            args.push(self.var_types.len() - 1);
            let r = self.assign(m, args);
            args.pop();
            self.var_types.pop();
            r?;
        }
        Ok(())
    }
}

/// All candidate constraints of the space, without duplicates up to
/// variable renaming, ordered by cost and then canonical string.
pub fn enumerate_space(space: &HypothesisSpace, scoring: &Scoring, limit: usize) -> Result<Vec<CandidateConstraint>> {
    let mut e = Enumerator {
        space,
        scoring,
        limit,
        uses: vec![0; space.modes.len()],
        var_types: Vec::new(),
        body: Vec::new(),
        out: HashMap::new(),
    };
    e.extend(0)?;
    let mut out: Vec<CandidateConstraint> = e.out.into_values().collect();
    out.sort_by(|a, b| (a.cost, &a.key).cmp(&(b.cost, &b.key)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{PIGEONHOLE_BIAS, PIGEONHOLE_REFERENCE_CONSTRAINTS};
    use crate::learner::parse_modes;
    use crate::program::parse_program;

    fn p3h3_space() -> HypothesisSpace {
        HypothesisSpace::new(parse_modes(PIGEONHOLE_BIAS).unwrap())
    }

    #[test]
    fn renaming_invariance() {
        let s = Scoring::literals();
        let a = CandidateConstraint::new(vec![("p".into(), vec![0, 1]), ("q".into(), vec![1])], &s);
        let b = CandidateConstraint::new(vec![("q".into(), vec![0]), ("p".into(), vec![1, 0])], &s);
        assert_eq!(a, b);
        assert_eq!(a.key(), "p(V0,V1), q(V1)");
        assert_eq!(a.to_string(), ":- p(X,Y), q(Y).");
    }

    #[test]
    fn reference_constraints_in_space() {
        let space = enumerate_space(&p3h3_space(), &Scoring::literals(), DEFAULT_SPACE_LIMIT).unwrap();
        let keys: std::collections::HashSet<&str> = space.iter().map(|c| c.key()).collect();
        assert_eq!(keys.len(), space.len());
        for r in parse_program(PIGEONHOLE_REFERENCE_CONSTRAINTS).unwrap().rules {
            let c = CandidateConstraint::from_rule(&r, &Scoring::literals()).unwrap();
            assert_eq!(c.cost, 3);
            assert!(keys.contains(c.key()), "{c} missing");
        }
    }

    #[test]
    fn space_is_ordered_and_bounded() {
        let space = enumerate_space(&p3h3_space(), &Scoring::literals(), DEFAULT_SPACE_LIMIT).unwrap();
        assert!(space.windows(2).all(|w| (w[0].cost, w[0].key()) < (w[1].cost, w[1].key())));
        assert!(space.iter().all(|c| (1..=3).contains(&c.len()) && c.var_count() <= 3));
        assert!(space.iter().all(|c| !c.literals.iter().any(|(p, v)| p == "lessThan" && v[0] == v[1])));
    }

    #[test]
    fn small_spaces() {
        let empty = HypothesisSpace::new(Vec::new());
        assert!(enumerate_space(&empty, &Scoring::literals(), 10).unwrap().is_empty());
        let mut one = HypothesisSpace::new(parse_modes("#modeb(1,maxhole(var(hole))).").unwrap());
        one.max_body = 1;
        assert_eq!(enumerate_space(&one, &Scoring::literals(), 10).unwrap().len(), 1);
    }

    #[test]
    fn space_limit() {
        let err = enumerate_space(&p3h3_space(), &Scoring::literals(), 10).unwrap_err();
        assert!(matches!(err, Error::SpaceTooLarge { limit: 10, .. }));
    }

    #[test]
    fn weighted_score() {
        let r = &parse_program(":- p2h(X,Y), lessThan(X,Y), lessThan(Y,Z).").unwrap().rules[0];
        let scoring = Scoring::weighted([("lessThan".to_string(), 0)].into());
        let c = CandidateConstraint::from_rule(r, &scoring).unwrap();
        assert_eq!(c.cost, 1);
        assert_eq!(score(&c, &Scoring::literals()), 3);
    }
}
