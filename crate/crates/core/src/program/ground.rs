use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use super::{ArithOp, Atom, ChoiceElement, GroundAtom, Head, Program, Rule, Term, Value, DEFAULT_DERIVATION_LIMIT};
use crate::{Error, Result};

type Subst = BTreeMap<String, Value>;

/// Bijection between ground atoms and dense ranks, ordered by
/// `(predicate, arguments)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomTable {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, u32>,
}

impl AtomTable {
    pub fn from_atoms(atoms: impl IntoIterator<Item = GroundAtom>) -> Self {
        let sorted: BTreeSet<GroundAtom> = atoms.into_iter().collect();
        let atoms: Vec<GroundAtom> = sorted.into_iter().collect();
        let index = atoms.iter().enumerate().map(|(i, a)| (a.clone(), i as u32)).collect();
        AtomTable { atoms, index }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn rank(&self, atom: &GroundAtom) -> Option<u32> {
        self.index.get(atom).copied()
    }

    pub fn atom(&self, rank: u32) -> &GroundAtom {
        &self.atoms[rank as usize]
    }

    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn ranks_of_predicate<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = u32> + 'a {
        self.atoms
            .iter()
            .enumerate()
            .filter(move |(_, a)| a.predicate == predicate)
            .map(|(i, _)| i as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundElement {
    pub atom: u32,
    pub condition: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroundHead {
    Constraint,
    Atom(u32),
    Choice { bound: u32, elements: Vec<GroundElement> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundRule {
    pub head: GroundHead,
    pub pos: Vec<u32>,
    pub neg: Vec<u32>,
}

impl GroundRule {
    pub fn is_fact(&self) -> bool {
        matches!(self.head, GroundHead::Atom(_)) && self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = u32> + '_ {
        let head: Vec<u32> = match &self.head {
            GroundHead::Constraint => Vec::new(),
            GroundHead::Atom(a) => vec![*a],
            GroundHead::Choice { elements, .. } => elements
                .iter()
                .flat_map(|e| std::iter::once(e.atom).chain(e.condition.iter().copied()))
                .collect(),
        };
        head.into_iter().chain(self.pos.iter().copied()).chain(self.neg.iter().copied())
    }
}

/// A variable-free program over an [`AtomTable`]. Facts come first, sorted by
/// rank; the remaining rules follow in instantiation order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundProgram {
    pub atom_table: AtomTable,
    pub rules: Vec<GroundRule>,
}

impl GroundProgram {
    pub fn width(&self) -> usize {
        self.atom_table.len()
    }

    pub fn facts(&self) -> impl Iterator<Item = u32> + '_ {
        self.rules.iter().filter_map(|r| match r.head {
            GroundHead::Atom(a) if r.is_fact() => Some(a),
            _ => None,
        })
    }

    /// Ranks of atoms occurring as choice elements.
    pub fn choice_atoms(&self) -> BTreeSet<u32> {
        self.rules
            .iter()
            .filter_map(|r| match &r.head {
                GroundHead::Choice { elements, .. } => Some(elements.iter().map(|e| e.atom)),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// The ground image as a [`Program`] whose rules are all variable-free.
    pub fn to_program(&self) -> Program {
        let t = &self.atom_table;
        let atom = |r: u32| Atom::from(t.atom(r));
        let mut prog = Program::new();
        for r in &self.rules {
            if r.is_fact() {
                if let GroundHead::Atom(a) = r.head {
                    prog.facts.push(t.atom(a).clone());
                }
                continue;
            }
            let head = match &r.head {
                GroundHead::Constraint => None,
                GroundHead::Atom(a) => Some(Head::Atom(atom(*a))),
                GroundHead::Choice { bound, elements } => Some(Head::Choice {
                    bound: *bound,
                    elements: elements
                        .iter()
                        .map(|e| ChoiceElement {
                            atom: atom(e.atom),
                            condition: e.condition.iter().map(|&c| atom(c)).collect(),
                        })
                        .collect(),
                }),
            };
            prog.rules.push(Rule {
                head,
                body_pos: r.pos.iter().map(|&a| atom(a)).collect(),
                body_neg: r.neg.iter().map(|&a| atom(a)).collect(),
                builtins: Vec::new(),
            });
        }
        prog
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_program())
    }
}

pub(crate) fn eval_term(t: &Term, s: &Subst) -> Option<Value> {
    match t {
        Term::Int(n) => Some(Value::Int(*n)),
        Term::Sym(x) => Some(Value::Sym(x.clone())),
        Term::Var(v) => s.get(v).cloned(),
        Term::Arith(l, op, r) => match (eval_term(l, s)?, eval_term(r, s)?) {
            (Value::Int(a), Value::Int(b)) => Some(Value::Int(match op {
                ArithOp::Add => a.checked_add(b)?,
                ArithOp::Sub => a.checked_sub(b)?,
            })),
            _ => None,
        },
    }
}

fn instantiate(a: &Atom, s: &Subst) -> Option<GroundAtom> {
    let args = a.args.iter().map(|t| eval_term(t, s)).collect::<Option<Vec<_>>>()?;
    Some(GroundAtom::new(a.predicate.clone(), args))
}

/// Derivable atoms indexed by predicate.
#[derive(Default)]
struct Domain {
    by_pred: HashMap<String, BTreeSet<Vec<Value>>>,
    count: usize,
}

impl Domain {
    fn insert(&mut self, a: GroundAtom) -> bool {
        let fresh = self.by_pred.entry(a.predicate).or_default().insert(a.args);
        if fresh {
            self.count += 1;
        }
        fresh
    }

    fn contains(&self, a: &GroundAtom) -> bool {
        self.by_pred.get(&a.predicate).is_some_and(|s| s.contains(&a.args))
    }
}

/// Try to extend `s` so that `pattern` matches `args`. Arithmetic arguments
/// whose variables are still unbound are skipped here and re-checked once
/// the full substitution is known.
fn unify(pattern: &Atom, args: &[Value], s: &mut Subst) -> bool {
    if pattern.args.len() != args.len() {
        return false;
    }
    for (t, v) in pattern.args.iter().zip(args) {
        match t {
            Term::Var(x) => match s.get(x) {
                Some(bound) if bound != v => return false,
                Some(_) => {}
                None => {
                    s.insert(x.clone(), v.clone());
                }
            },
            Term::Arith(..) => {
                if let Some(val) = eval_term(t, s) {
                    if &val != v {
                        return false;
                    }
                }
            }
            _ => {
                if eval_term(t, s).as_ref() != Some(v) {
                    return false;
                }
            }
        }
    }
    true
}

fn join(atoms: &[Atom], dom: &Domain, s: Subst, out: &mut Vec<Subst>) {
    let Some((first, rest)) = atoms.split_first() else {
        out.push(s);
        return;
    };
    let Some(cands) = dom.by_pred.get(&first.predicate) else {
        return;
    };
    for args in cands {
        let mut s2 = s.clone();
        if unify(first, args, &mut s2) {
            join(rest, dom, s2, out);
        }
    }
}

/// Substitutions satisfying the positive body (membership re-checked after
/// arithmetic is evaluated) and all builtins.
fn body_substitutions(rule: &Rule, dom: &Domain) -> Vec<Subst> {
    let mut subs = Vec::new();
    join(&rule.body_pos, dom, Subst::new(), &mut subs);
    subs.retain(|s| {
        rule.body_pos
            .iter()
            .all(|a| instantiate(a, s).is_some_and(|g| dom.contains(&g)))
            && rule.builtins.iter().all(|b| match (eval_term(&b.lhs, s), eval_term(&b.rhs, s)) {
                (Some(l), Some(r)) => b.op.holds(&l, &r),
                _ => false,
            })
    });
    subs
}

struct RawElement {
    atom: GroundAtom,
    condition: Vec<GroundAtom>,
}

fn expand_element(e: &ChoiceElement, s: &Subst, dom: &Domain) -> Vec<RawElement> {
    let mut subs = Vec::new();
    join(&e.condition, dom, s.clone(), &mut subs);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for s in subs {
        let Some(atom) = instantiate(&e.atom, &s) else { continue };
        let Some(condition) = e.condition.iter().map(|c| instantiate(c, &s)).collect::<Option<Vec<_>>>() else {
            continue;
        };
        if !condition.iter().all(|c| dom.contains(c)) {
            continue;
        }
        if seen.insert((atom.clone(), condition.clone())) {
            out.push(RawElement { atom, condition });
        }
    }
    out
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum RawHead {
    Constraint,
    Atom(GroundAtom),
    Choice(u32, Vec<(GroundAtom, Vec<GroundAtom>)>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct RawRule {
    head: RawHead,
    pos: Vec<GroundAtom>,
    neg: Vec<GroundAtom>,
}

pub fn ground(program: &Program) -> Result<GroundProgram> {
    ground_with_limit(program, DEFAULT_DERIVATION_LIMIT)
}

/// Bottom-up instantiation: derive the set of possibly-true atoms to a
/// fixpoint, then instantiate every rule over it. Instances with a false
/// builtin are dropped; no other simplification is applied.
pub fn ground_with_limit(program: &Program, limit: usize) -> Result<GroundProgram> {
    let mut dom = Domain::default();
    for f in &program.facts {
        dom.insert(f.clone());
    }
    if dom.count > limit {
        return Err(Error::GroundingBlowUp { limit });
    }
    let generators: Vec<&Rule> = program.rules.iter().filter(|r| r.head.is_some()).collect();
    loop {
        let mut fresh = Vec::new();
        for rule in &generators {
            for s in body_substitutions(rule, &dom) {
                match &rule.head {
                    Some(Head::Atom(h)) => fresh.extend(instantiate(h, &s)),
                    Some(Head::Choice { elements, .. }) => {
                        for e in elements {
                            fresh.extend(expand_element(e, &s, &dom).into_iter().map(|r| r.atom));
                        }
                    }
                    None => {}
                }
            }
        }
        let mut changed = false;
        for a in fresh {
            changed |= dom.insert(a);
            if dom.count > limit {
                return Err(Error::GroundingBlowUp { limit });
            }
        }
        if !changed {
            break;
        }
    }

    let mut facts: BTreeSet<GroundAtom> = program.facts.iter().cloned().collect();
    let mut raw: Vec<RawRule> = Vec::new();
    let mut seen: HashSet<RawRule> = HashSet::new();
    for rule in &program.rules {
        for s in body_substitutions(rule, &dom) {
            let pos: Vec<GroundAtom> = rule.body_pos.iter().filter_map(|a| instantiate(a, &s)).collect();
            let Some(neg) = rule.body_neg.iter().map(|a| instantiate(a, &s)).collect::<Option<Vec<_>>>() else {
                continue;
            };
            let head = match &rule.head {
                None => RawHead::Constraint,
                Some(Head::Atom(h)) => match instantiate(h, &s) {
                    Some(g) => RawHead::Atom(g),
                    None => continue,
                },
                Some(Head::Choice { elements, bound }) => RawHead::Choice(
                    *bound,
                    elements
                        .iter()
                        .flat_map(|e| expand_element(e, &s, &dom))
                        .map(|r| (r.atom, r.condition))
                        .collect(),
                ),
            };
            if let RawHead::Atom(h) = &head {
                if pos.is_empty() && neg.is_empty() {
                    facts.insert(h.clone());
                    continue;
                }
            }
            let r = RawRule { head, pos, neg };
            if seen.insert(r.clone()) {
                raw.push(r);
            }
        }
    }

    let mut all: BTreeSet<GroundAtom> = facts.clone();
    for r in &raw {
        match &r.head {
            RawHead::Constraint => {}
            RawHead::Atom(a) => {
                all.insert(a.clone());
            }
            RawHead::Choice(_, els) => {
                for (a, c) in els {
                    all.insert(a.clone());
                    all.extend(c.iter().cloned());
                }
            }
        }
        all.extend(r.pos.iter().cloned());
        all.extend(r.neg.iter().cloned());
    }
    let table = AtomTable::from_atoms(all);
    let rank = |a: &GroundAtom| table.rank(a).expect("atom collected into table");
    let mut rules: Vec<GroundRule> = facts
        .iter()
        .map(|f| GroundRule {
            head: GroundHead::Atom(rank(f)),
            pos: Vec::new(),
            neg: Vec::new(),
        })
        .collect();
    for r in &raw {
        let head = match &r.head {
            RawHead::Constraint => GroundHead::Constraint,
            RawHead::Atom(a) => GroundHead::Atom(rank(a)),
            RawHead::Choice(bound, els) => GroundHead::Choice {
                bound: *bound,
                elements: els
                    .iter()
                    .map(|(a, c)| GroundElement {
                        atom: rank(a),
                        condition: c.iter().map(rank).collect(),
                    })
                    .collect(),
            },
        };
        rules.push(GroundRule {
            head,
            pos: r.pos.iter().map(rank).collect(),
            neg: r.neg.iter().map(rank).collect(),
        });
    }
    Ok(GroundProgram {
        atom_table: table,
        rules,
    })
}
