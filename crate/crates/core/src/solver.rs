//! Stable-model enumeration for ground programs.
//!
//! The search assigns truth values to atoms, propagating with well-founded
//! style lower/upper bounds plus unit rules for constraints and choice
//! cardinalities. Every leaf is confirmed with the reduct-based
//! [`is_stable_model`] check, which shares no code with the search.

use std::fmt;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::program::{AtomTable, GroundAtom, GroundHead, GroundProgram};
use crate::{Error, Result};

/// A set of true atoms, one bit per atom-table rank.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interpretation {
    bits: FixedBitSet,
}

impl Interpretation {
    pub fn empty(width: usize) -> Self {
        Interpretation {
            bits: FixedBitSet::with_capacity(width),
        }
    }

    pub fn from_ranks(width: usize, ranks: impl IntoIterator<Item = u32>) -> Self {
        let mut i = Interpretation::empty(width);
        for r in ranks {
            i.insert(r);
        }
        i
    }

    pub fn from_atoms<'a>(table: &AtomTable, atoms: impl IntoIterator<Item = &'a GroundAtom>) -> Result<Self> {
        let mut i = Interpretation::empty(table.len());
        for a in atoms {
            let r = table.rank(a).ok_or_else(|| Error::UnknownAtom(a.to_string()))?;
            i.insert(r);
        }
        Ok(i)
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, rank: u32) -> bool {
        self.bits.contains(rank as usize)
    }

    pub fn insert(&mut self, rank: u32) {
        self.bits.insert(rank as usize);
    }

    pub fn remove(&mut self, rank: u32) {
        self.bits.set(rank as usize, false);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn ranks(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.ones().map(|r| r as u32)
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn atoms<'a>(&'a self, table: &'a AtomTable) -> impl Iterator<Item = &'a GroundAtom> + 'a {
        self.ranks().map(move |r| table.atom(r))
    }

    /// `{a, b, c}` in rank order.
    pub fn render(&self, table: &AtomTable) -> String {
        let atoms: Vec<String> = self.atoms(table).map(ToString::to_string).collect();
        format!("{{{}}}", atoms.join(", "))
    }
}

impl fmt::Debug for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ranks()).finish()
    }
}

/// A negation-free ground rule `head :- body`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositiveRule {
    pub head: u32,
    pub body: Vec<u32>,
}

/// Least fixpoint of the immediate-consequence operator seeded with `base`.
pub fn least_model(rules: &[PositiveRule], base: &Interpretation) -> Interpretation {
    let mut model = base.clone();
    loop {
        let mut changed = false;
        for r in rules {
            if !model.contains(r.head) && r.body.iter().all(|&b| model.contains(b)) {
                model.insert(r.head);
                changed = true;
            }
        }
        if !changed {
            return model;
        }
    }
}

/// Stability check straight from the definition: constraints hold, every
/// choice rule with a true body has exactly `bound` chosen elements, and `i`
/// is the least model of the reduct where chosen element atoms are
/// self-supported.
pub fn is_stable_model(gp: &GroundProgram, i: &Interpretation) -> Result<bool> {
    if i.width() != gp.width() {
        return Err(Error::WidthMismatch {
            expected: gp.width(),
            found: i.width(),
        });
    }
    let body_holds = |pos: &[u32], neg: &[u32]| pos.iter().all(|&a| i.contains(a)) && neg.iter().all(|&a| !i.contains(a));
    let mut reduct = Vec::new();
    for r in &gp.rules {
        match &r.head {
            GroundHead::Constraint => {
                if body_holds(&r.pos, &r.neg) {
                    return Ok(false);
                }
            }
            GroundHead::Atom(h) => {
                if r.neg.iter().all(|&a| !i.contains(a)) {
                    reduct.push(PositiveRule {
                        head: *h,
                        body: r.pos.clone(),
                    });
                }
            }
            GroundHead::Choice { bound, elements } => {
                if body_holds(&r.pos, &r.neg) {
                    let chosen = elements
                        .iter()
                        .filter(|e| i.contains(e.atom) && e.condition.iter().all(|&c| i.contains(c)))
                        .count();
                    if chosen != *bound as usize {
                        return Ok(false);
                    }
                }
                if r.neg.iter().all(|&a| !i.contains(a)) {
                    for e in elements.iter().filter(|e| i.contains(e.atom)) {
                        let mut body = r.pos.clone();
                        body.extend(&e.condition);
                        reduct.push(PositiveRule { head: e.atom, body });
                    }
                }
            }
        }
    }
    Ok(least_model(&reduct, &Interpretation::empty(gp.width())) == *i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumConfig {
    /// Maximum number of answer sets to return; 0 returns all.
    pub cap: usize,
    /// 0 keeps the ascending-rank guess order; anything else shuffles it.
    pub seed: u64,
    pub node_budget: u64,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            cap: 0,
            seed: 0,
            node_budget: 10_000_000,
        }
    }
}

impl EnumConfig {
    pub fn first(node_budget: u64) -> Self {
        EnumConfig {
            cap: 1,
            seed: 0,
            node_budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub answer_sets: Vec<Interpretation>,
    pub nodes: u64,
}

/// Atoms fixed before search starts.
#[derive(Debug, Clone, Default)]
pub struct Assumptions {
    pub true_atoms: Vec<u32>,
    pub false_atoms: Vec<u32>,
}

pub fn enumerate_answer_sets(gp: &GroundProgram, cfg: &EnumConfig) -> Result<Enumeration> {
    enumerate_with_assumptions(gp, cfg, &Assumptions::default())
}

/// Enumerate answer sets extending the given assumptions. With `cap == 0`
/// the result is sorted by ascending lex value (highest rank most
/// significant); otherwise the first `cap` sets found are returned.
pub fn enumerate_with_assumptions(gp: &GroundProgram, cfg: &EnumConfig, assumptions: &Assumptions) -> Result<Enumeration> {
    let engine = Engine::new(gp);
    let mut order: Vec<u32> = gp.choice_atoms().into_iter().collect();
    if cfg.seed != 0 {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    }
    let mut in_order = FixedBitSet::with_capacity(gp.width());
    for &a in &order {
        in_order.insert(a as usize);
    }
    order.extend((0..gp.width() as u32).filter(|a| !in_order.contains(*a as usize)));

    let mut assign = vec![Val::Unknown; gp.width()];
    let mut conflict = false;
    for &a in &assumptions.true_atoms {
        conflict |= !set(&mut assign, a, Val::True);
    }
    for &a in &assumptions.false_atoms {
        conflict |= !set(&mut assign, a, Val::False);
    }
    let mut search = Search {
        gp,
        engine: &engine,
        order: &order,
        cfg,
        found: Vec::new(),
        nodes: 0,
    };
    if !conflict {
        search.run(assign)?;
    } else {
        search.nodes = 1;
    }
    let mut answer_sets = search.found;
    if cfg.cap == 0 {
        answer_sets.sort_by(lex_cmp);
    }
    Ok(Enumeration {
        answer_sets,
        nodes: search.nodes,
    })
}

/// Compare as unsigned integers with the highest rank most significant.
pub fn lex_cmp(a: &Interpretation, b: &Interpretation) -> std::cmp::Ordering {
    let width = a.width().max(b.width());
    for r in (0..width as u32).rev() {
        match (a.contains(r), b.contains(r)) {
            (true, false) => return std::cmp::Ordering::Greater,
            (false, true) => return std::cmp::Ordering::Less,
            _ => {}
        }
    }
    std::cmp::Ordering::Equal
}

/// Well-founded bounds of the program without any guesses: atoms in `lower`
/// are true in every answer set, atoms outside `upper` in none.
pub fn root_bounds(gp: &GroundProgram) -> (Interpretation, Interpretation) {
    let engine = Engine::new(gp);
    let assign = vec![Val::Unknown; gp.width()];
    match engine.bounds(&assign) {
        Some((l, u)) => (
            Interpretation { bits: l },
            Interpretation { bits: u },
        ),
        None => (
            Interpretation::empty(gp.width()),
            Interpretation::empty(gp.width()),
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Val {
    Unknown,
    True,
    False,
}

fn set(assign: &mut [Val], a: u32, v: Val) -> bool {
    match assign[a as usize] {
        Val::Unknown => {
            assign[a as usize] = v;
            true
        }
        cur => cur == v,
    }
}

/// A derivation `head :- pos, not neg`; choice elements become units with
/// the element condition appended to the body.
struct Unit {
    head: u32,
    pos: Vec<u32>,
    neg: Vec<u32>,
    choice: bool,
}

struct ChoiceRule {
    pos: Vec<u32>,
    neg: Vec<u32>,
    bound: usize,
    elements: Vec<(u32, Vec<u32>)>,
}

struct Engine {
    width: usize,
    facts: Vec<u32>,
    units: Vec<Unit>,
    occurs: Vec<Vec<usize>>,
    constraints: Vec<(Vec<u32>, Vec<u32>)>,
    choices: Vec<ChoiceRule>,
}

impl Engine {
    fn new(gp: &GroundProgram) -> Self {
        let width = gp.width();
        let mut facts = Vec::new();
        let mut units = Vec::new();
        let mut constraints = Vec::new();
        let mut choices = Vec::new();
        for r in &gp.rules {
            match &r.head {
                GroundHead::Atom(h) if r.is_fact() => facts.push(*h),
                GroundHead::Atom(h) => units.push(Unit {
                    head: *h,
                    pos: r.pos.clone(),
                    neg: r.neg.clone(),
                    choice: false,
                }),
                GroundHead::Constraint => constraints.push((r.pos.clone(), r.neg.clone())),
                GroundHead::Choice { bound, elements } => {
                    for e in elements {
                        let mut pos = r.pos.clone();
                        pos.extend(&e.condition);
                        units.push(Unit {
                            head: e.atom,
                            pos,
                            neg: r.neg.clone(),
                            choice: true,
                        });
                    }
                    choices.push(ChoiceRule {
                        pos: r.pos.clone(),
                        neg: r.neg.clone(),
                        bound: *bound as usize,
                        elements: elements.iter().map(|e| (e.atom, e.condition.clone())).collect(),
                    });
                }
            }
        }
        let mut occurs = vec![Vec::new(); width];
        for (i, u) in units.iter().enumerate() {
            for &p in &u.pos {
                occurs[p as usize].push(i);
            }
        }
        Engine {
            width,
            facts,
            units,
            occurs,
            constraints,
            choices,
        }
    }

    /// Counter-based least fixpoint over enabled units.
    fn lfp(&self, seed: impl Iterator<Item = u32>, enabled: impl Fn(&Unit) -> bool) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.width);
        let mut missing: Vec<usize> = self.units.iter().map(|u| u.pos.len()).collect();
        let mut on: Vec<bool> = self.units.iter().map(&enabled).collect();
        let mut queue: Vec<u32> = Vec::new();
        fn add(a: u32, out: &mut FixedBitSet, queue: &mut Vec<u32>) {
            if !out.put(a as usize) {
                queue.push(a);
            }
        }
        for a in seed {
            add(a, &mut out, &mut queue);
        }
        for (i, u) in self.units.iter().enumerate() {
            if on[i] && u.pos.is_empty() {
                add(u.head, &mut out, &mut queue);
                on[i] = false;
            }
        }
        while let Some(a) = queue.pop() {
            for &ui in &self.occurs[a as usize] {
                missing[ui] -= 1;
                if missing[ui] == 0 && on[ui] {
                    on[ui] = false;
                    add(self.units[ui].head, &mut out, &mut queue);
                }
            }
        }
        out
    }

    /// Alternating fixpoint under the current assignment. `None` on conflict.
    fn bounds(&self, assign: &[Val]) -> Option<(FixedBitSet, FixedBitSet)> {
        let assigned_true = || (0..self.width as u32).filter(|&a| assign[a as usize] == Val::True);
        let not_false = |a: u32| assign[a as usize] != Val::False;
        let mut upper = FixedBitSet::with_capacity(self.width);
        upper.insert_range(..);
        for (a, v) in assign.iter().enumerate().take(self.width) {
            if *v == Val::False {
                upper.set(a, false);
            }
        }
        let mut lower = FixedBitSet::with_capacity(self.width);
        loop {
            let new_lower = self.lfp(self.facts.iter().copied().chain(assigned_true()), |u| {
                !u.choice && u.neg.iter().all(|&n| !upper.contains(n as usize))
            });
            let new_upper = self.lfp(self.facts.iter().copied(), |u| {
                not_false(u.head) && u.neg.iter().all(|&n| !new_lower.contains(n as usize))
            });
            if !new_lower.is_subset(&new_upper) {
                return None;
            }
            let stable = new_lower == lower && new_upper == upper;
            lower = new_lower;
            upper = new_upper;
            if stable {
                break;
            }
        }
        if self.facts.iter().any(|&f| assign[f as usize] == Val::False) {
            return None;
        }
        Some((lower, upper))
    }

    /// Propagate to a fixpoint. Returns the final bounds or `None` on conflict.
    fn propagate(&self, assign: &mut [Val]) -> Option<(FixedBitSet, FixedBitSet)> {
        loop {
            let (lower, upper) = self.bounds(assign)?;
            let undecided = |a: u32| upper.contains(a as usize) && !lower.contains(a as usize);
            let mut forced: Vec<(u32, Val)> = Vec::new();
            for (pos, neg) in &self.constraints {
                if pos.iter().any(|&p| !upper.contains(p as usize)) || neg.iter().any(|&n| lower.contains(n as usize)) {
                    continue;
                }
                let mut open = pos
                    .iter()
                    .filter(|&&p| undecided(p))
                    .map(|&p| (p, Val::False))
                    .chain(neg.iter().filter(|&&n| undecided(n)).map(|&n| (n, Val::True)));
                match (open.next(), open.next()) {
                    (None, _) => return None,
                    (Some(f), None) => forced.push(f),
                    _ => {}
                }
            }
            for c in &self.choices {
                let body_true = c.pos.iter().all(|&p| lower.contains(p as usize)) && c.neg.iter().all(|&n| !upper.contains(n as usize));
                if !body_true {
                    continue;
                }
                let in_all = |set: &FixedBitSet, (a, cond): &(u32, Vec<u32>)| {
                    set.contains(*a as usize) && cond.iter().all(|&x| set.contains(x as usize))
                };
                let certain = c.elements.iter().filter(|e| in_all(&lower, e)).count();
                let possible = c.elements.iter().filter(|e| in_all(&upper, e)).count();
                if certain > c.bound || possible < c.bound {
                    return None;
                }
                if certain == c.bound {
                    for (a, cond) in &c.elements {
                        if undecided(*a) && cond.iter().all(|&x| lower.contains(x as usize)) {
                            forced.push((*a, Val::False));
                        }
                    }
                }
                if possible == c.bound {
                    for e in &c.elements {
                        if undecided(e.0) && in_all(&upper, e) {
                            forced.push((e.0, Val::True));
                        }
                    }
                }
            }
            if forced.is_empty() {
                return Some((lower, upper));
            }
            for (a, v) in forced {
                if !set(assign, a, v) {
                    return None;
                }
            }
        }
    }
}

struct Search<'a> {
    gp: &'a GroundProgram,
    engine: &'a Engine,
    order: &'a [u32],
    cfg: &'a EnumConfig,
    found: Vec<Interpretation>,
    nodes: u64,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.cfg.cap > 0 && self.found.len() >= self.cfg.cap
    }

    fn run(&mut self, mut assign: Vec<Val>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cfg.node_budget {
            return Err(Error::Budget {
                budget: self.cfg.node_budget,
                found: std::mem::take(&mut self.found),
            });
        }
        let Some((lower, upper)) = self.engine.propagate(&mut assign) else {
            return Ok(());
        };
        let branch = self
            .order
            .iter()
            .copied()
            .find(|&a| upper.contains(a as usize) && !lower.contains(a as usize));
        match branch {
            None => {
                let candidate = Interpretation { bits: lower };
                if is_stable_model(self.gp, &candidate)? {
                    self.found.push(candidate);
                }
                Ok(())
            }
            Some(a) => {
                for v in [Val::True, Val::False] {
                    if self.done() {
                        break;
                    }
                    let mut child = assign.clone();
                    child[a as usize] = v;
                    self.run(child)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{ground, parse_program};

    fn gp(src: &str) -> GroundProgram {
        ground(&parse_program(src).unwrap()).unwrap()
    }

    fn pigeons(p: i64, h: i64) -> GroundProgram {
        gp(&format!("pigeon({p}). hole({h}). {}", crate::instances::PIGEONHOLE_ENCODING))
    }

    #[test]
    fn least_model_examples() {
        let rules = vec![
            PositiveRule { head: 1, body: vec![0] },
            PositiveRule { head: 2, body: vec![1] },
        ];
        let m = least_model(&rules, &Interpretation::from_ranks(3, [0]));
        assert_eq!(m, Interpretation::from_ranks(3, [0, 1, 2]));
        assert!(least_model(&[], &Interpretation::empty(0)).is_empty());
        let loop_rule = vec![PositiveRule { head: 0, body: vec![0] }];
        assert!(least_model(&loop_rule, &Interpretation::empty(1)).is_empty());
    }

    fn with_p2h(g: &GroundProgram, cells: &[(i64, i64)]) -> Interpretation {
        let facts = g.facts();
        let mut i = Interpretation::from_ranks(g.width(), facts);
        for n in 1..=3 {
            i.insert(g.atom_table.rank(&GroundAtom::ints("pigeon", &[n])).unwrap());
            i.insert(g.atom_table.rank(&GroundAtom::ints("hole", &[n])).unwrap());
        }
        for &(p, h) in cells {
            i.insert(g.atom_table.rank(&GroundAtom::ints("p2h", &[p, h])).unwrap());
        }
        i
    }

    #[test]
    fn stability_examples() {
        let g = pigeons(3, 3);
        assert!(is_stable_model(&g, &with_p2h(&g, &[(1, 1), (2, 2), (3, 3)])).unwrap());
        assert!(!is_stable_model(&g, &with_p2h(&g, &[(1, 1), (2, 1), (3, 3)])).unwrap());
        assert!(!is_stable_model(&g, &with_p2h(&g, &[])).unwrap());
        assert!(matches!(
            is_stable_model(&g, &Interpretation::empty(3)),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn pigeonhole_counts() {
        let cfg = EnumConfig::default();
        assert_eq!(enumerate_answer_sets(&pigeons(3, 3), &cfg).unwrap().answer_sets.len(), 6);
        assert_eq!(enumerate_answer_sets(&pigeons(4, 3), &cfg).unwrap().answer_sets.len(), 0);
        assert_eq!(enumerate_answer_sets(&pigeons(4, 4), &cfg).unwrap().answer_sets.len(), 24);
    }

    #[test]
    fn output_is_sorted_and_capped_output_is_a_subset() {
        let g = pigeons(4, 4);
        let all = enumerate_answer_sets(&g, &EnumConfig::default()).unwrap().answer_sets;
        assert!(all.windows(2).all(|w| lex_cmp(&w[0], &w[1]).is_lt()));
        for seed in [0, 1, 7] {
            let some = enumerate_answer_sets(&g, &EnumConfig { cap: 5, seed, node_budget: 1_000_000 }).unwrap();
            assert_eq!(some.answer_sets.len(), 5);
            assert!(some.answer_sets.iter().all(|s| all.contains(s)));
        }
    }

    #[test]
    fn node_count_is_deterministic_for_a_seed() {
        let g = pigeons(4, 4);
        let cfg = EnumConfig { cap: 0, seed: 42, node_budget: 1_000_000 };
        let a = enumerate_answer_sets(&g, &cfg).unwrap();
        let b = enumerate_answer_sets(&g, &cfg).unwrap();
        assert_eq!(a.nodes, b.nodes);
    }

    #[test]
    fn budget_exhaustion_keeps_partial_results() {
        let g = pigeons(4, 4);
        let err = enumerate_answer_sets(&g, &EnumConfig { cap: 0, seed: 0, node_budget: 20 }).unwrap_err();
        match err {
            Error::Budget { budget, found } => {
                assert_eq!(budget, 20);
                assert!(found.len() < 24);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_stratified_negation() {
        let g = gp("a :- not b. b :- not a.");
        let sets = enumerate_answer_sets(&g, &EnumConfig::default()).unwrap().answer_sets;
        assert_eq!(sets.len(), 2);
        let g = gp("a :- not a.");
        assert!(enumerate_answer_sets(&g, &EnumConfig::default()).unwrap().answer_sets.is_empty());
    }

    #[test]
    fn assumptions_restrict_results() {
        let g = pigeons(3, 3);
        let r = g.atom_table.rank(&GroundAtom::ints("p2h", &[1, 1])).unwrap();
        let a = Assumptions {
            true_atoms: vec![r],
            false_atoms: vec![],
        };
        let e = enumerate_with_assumptions(&g, &EnumConfig::default(), &a).unwrap();
        assert_eq!(e.answer_sets.len(), 2);
    }

    #[test]
    fn root_bounds_contain_derived_domain() {
        let g = pigeons(3, 3);
        let (lower, upper) = root_bounds(&g);
        for n in 1..=3 {
            assert!(lower.contains(g.atom_table.rank(&GroundAtom::ints("pigeon", &[n])).unwrap()));
        }
        let p2h = g.atom_table.rank(&GroundAtom::ints("p2h", &[2, 2])).unwrap();
        assert!(!lower.contains(p2h) && upper.contains(p2h));
    }
}
