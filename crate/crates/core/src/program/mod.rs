//! Non-ground programs of the supported ASP fragment: facts, normal rules,
//! integrity constraints and choice rules with an exact cardinality bound.

mod ground;
mod parser;
pub mod smodels;

use std::collections::BTreeSet;
use std::fmt;

pub use ground::{ground, ground_with_limit, AtomTable, GroundElement, GroundHead, GroundProgram, GroundRule};
pub use parser::{parse_atom, parse_program};

pub const DEFAULT_DERIVATION_LIMIT: usize = 1_000_000;

/// A ground value: integers order before symbols, integers numerically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Sym(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Int(i64),
    Sym(String),
    Var(String),
    Arith(Box<Term>, ArithOp, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Int(_) | Term::Sym(_) => true,
            Term::Var(_) => false,
            Term::Arith(l, _, r) => l.is_ground() && r.is_ground(),
        }
    }

    pub fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Var(v) => {
                out.insert(v);
            }
            Term::Arith(l, _, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            _ => {}
        }
    }

    pub fn from_value(v: &Value) -> Self {
        match v {
            Value::Int(n) => Term::Int(*n),
            Value::Sym(s) => Term::Sym(s.clone()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Sym(s) | Term::Var(s) => f.write_str(s),
            Term::Arith(l, op, r) => {
                let op = match op {
                    ArithOp::Add => '+',
                    ArithOp::Sub => '-',
                };
                write!(f, "{l}{op}{r}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        for t in &self.args {
            t.collect_vars(out);
        }
    }

    /// Variables that occur as a plain argument; only these are bound by matching.
    pub fn binding_vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            _ => None,
        })
    }
}

impl From<&GroundAtom> for Atom {
    fn from(g: &GroundAtom) -> Self {
        Atom {
            predicate: g.predicate.clone(),
            args: g.args.iter().map(Term::from_value).collect(),
        }
    }
}

fn write_args<T: fmt::Display>(f: &mut fmt::Formatter<'_>, name: &str, args: &[T]) -> fmt::Result {
    f.write_str(name)?;
    if !args.is_empty() {
        f.write_str("(")?;
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_args(f, &self.predicate, &self.args)
    }
}

/// A variable-free atom. The derived order (predicate name, then argument
/// tuple) is the atom-table rank order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<Value>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: Vec<Value>) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args,
        }
    }

    /// Shorthand for atoms over integer arguments, e.g. `p2h(1,3)`.
    pub fn ints(predicate: &str, args: &[i64]) -> Self {
        GroundAtom::new(predicate, args.iter().map(|&n| Value::Int(n)).collect())
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_args(f, &self.predicate, &self.args)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn holds(self, l: &Value, r: &Value) -> bool {
        match self {
            CmpOp::Lt => l < r,
            CmpOp::Gt => l > r,
            CmpOp::Le => l <= r,
            CmpOp::Ge => l >= r,
            CmpOp::Eq => l == r,
            CmpOp::Ne => l != r,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Builtin {
    pub lhs: Term,
    pub op: CmpOp,
    pub rhs: Term,
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChoiceElement {
    pub atom: Atom,
    pub condition: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Head {
    Atom(Atom),
    /// `{ e1; ...; ek } = bound`
    Choice {
        elements: Vec<ChoiceElement>,
        bound: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Fact,
    Normal,
    Constraint,
    Choice,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    /// `None` for integrity constraints.
    pub head: Option<Head>,
    pub body_pos: Vec<Atom>,
    pub body_neg: Vec<Atom>,
    pub builtins: Vec<Builtin>,
}

impl Rule {
    pub fn constraint(body_pos: Vec<Atom>) -> Self {
        Rule {
            head: None,
            body_pos,
            body_neg: Vec::new(),
            builtins: Vec::new(),
        }
    }

    pub fn kind(&self) -> RuleKind {
        match &self.head {
            None => RuleKind::Constraint,
            Some(Head::Choice { .. }) => RuleKind::Choice,
            Some(Head::Atom(_)) if self.has_empty_body() => RuleKind::Fact,
            Some(Head::Atom(_)) => RuleKind::Normal,
        }
    }

    pub fn has_empty_body(&self) -> bool {
        self.body_pos.is_empty() && self.body_neg.is_empty() && self.builtins.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        let mut vars = BTreeSet::new();
        self.collect_vars(&mut vars);
        vars.is_empty()
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match &self.head {
            Some(Head::Atom(a)) => a.collect_vars(out),
            Some(Head::Choice { elements, .. }) => {
                for e in elements {
                    e.atom.collect_vars(out);
                    for c in &e.condition {
                        c.collect_vars(out);
                    }
                }
            }
            None => {}
        }
        for a in self.body_pos.iter().chain(&self.body_neg) {
            a.collect_vars(out);
        }
        for b in &self.builtins {
            b.lhs.collect_vars(out);
            b.rhs.collect_vars(out);
        }
    }

    /// Every variable must occur as a plain argument of a positive body atom;
    /// variables local to a choice element may instead be bound by its condition.
    pub fn check_safety(&self) -> crate::Result<()> {
        let bound: BTreeSet<&str> = self.body_pos.iter().flat_map(Atom::binding_vars).collect();
        let unsafe_var = |v: &str| crate::Error::Unsafe {
            rule: self.to_string(),
            variable: v.to_string(),
        };
        let mut global = BTreeSet::new();
        if let Some(Head::Atom(a)) = &self.head {
            a.collect_vars(&mut global);
        }
        for a in self.body_pos.iter().chain(&self.body_neg) {
            a.collect_vars(&mut global);
        }
        for b in &self.builtins {
            b.lhs.collect_vars(&mut global);
            b.rhs.collect_vars(&mut global);
        }
        if let Some(v) = global.iter().find(|v| !bound.contains(*v)) {
            return Err(unsafe_var(v));
        }
        if let Some(Head::Choice { elements, .. }) = &self.head {
            for e in elements {
                let mut local: BTreeSet<&str> = bound.clone();
                local.extend(e.condition.iter().flat_map(Atom::binding_vars));
                let mut used = BTreeSet::new();
                e.atom.collect_vars(&mut used);
                for c in &e.condition {
                    c.collect_vars(&mut used);
                }
                if let Some(v) = used.iter().find(|v| !local.contains(*v)) {
                    return Err(unsafe_var(v));
                }
            }
        }
        Ok(())
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        let head: Vec<&Atom> = match &self.head {
            Some(Head::Atom(a)) => vec![a],
            Some(Head::Choice { elements, .. }) => elements
                .iter()
                .flat_map(|e| std::iter::once(&e.atom).chain(&e.condition))
                .collect(),
            None => Vec::new(),
        };
        head.into_iter().chain(&self.body_pos).chain(&self.body_neg)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            Some(Head::Atom(a)) => write!(f, "{a}")?,
            Some(Head::Choice { elements, bound }) => {
                f.write_str("{")?;
                for (i, e) in elements.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{}", e.atom)?;
                    if !e.condition.is_empty() {
                        f.write_str(" : ")?;
                        for (j, c) in e.condition.iter().enumerate() {
                            if j > 0 {
                                f.write_str(", ")?;
                            }
                            write!(f, "{c}")?;
                        }
                    }
                }
                write!(f, "}} = {bound}")?;
            }
            None => {}
        }
        if !self.has_empty_body() || self.head.is_none() {
            f.write_str(if self.head.is_some() { " :- " } else { ":- " })?;
            let lits = self
                .body_pos
                .iter()
                .map(ToString::to_string)
                .chain(self.body_neg.iter().map(|a| format!("not {a}")))
                .chain(self.builtins.iter().map(ToString::to_string));
            for (i, l) in lits.enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                f.write_str(&l)?;
            }
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub facts: Vec<GroundAtom>,
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    pub fn from_facts(facts: Vec<GroundAtom>) -> Self {
        Program {
            rules: Vec::new(),
            facts,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.facts.is_empty()
    }

    /// Concatenation: `self` followed by `other`.
    pub fn union(&self, other: &Program) -> Program {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn extend(&mut self, other: &Program) {
        self.rules.extend(other.rules.iter().cloned());
        self.facts.extend(other.facts.iter().cloned());
    }

    /// Facts rendered on one line, as used in example contexts: `pigeon(3). hole(3).`
    pub fn facts_inline(&self) -> String {
        self.facts
            .iter()
            .map(|a| format!("{a}."))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Predicates whose atoms occur in choice-rule heads.
    pub fn choice_predicates(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            if let Some(Head::Choice { elements, .. }) = &r.head {
                for e in elements {
                    out.insert((e.atom.predicate.clone(), e.atom.arity()));
                }
            }
        }
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.facts {
            writeln!(f, "{a}.")?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_order_is_numeric_then_symbolic() {
        let mut v = vec![
            Value::Sym("a".into()),
            Value::Int(10),
            Value::Int(-2),
            Value::Int(3),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                Value::Int(-2),
                Value::Int(3),
                Value::Int(10),
                Value::Sym("a".into())
            ]
        );
    }

    #[test]
    fn ground_atom_order_by_predicate_then_args() {
        let a = GroundAtom::ints("p2h", &[3, 3]);
        let b = GroundAtom::ints("pigeon", &[1]);
        let c = GroundAtom::ints("hole", &[2]);
        let d = GroundAtom::ints("p2h", &[1, 10]);
        let mut v = vec![a.clone(), b.clone(), c.clone(), d.clone()];
        v.sort();
        assert_eq!(v, vec![c, d, a, b]);
    }
}
