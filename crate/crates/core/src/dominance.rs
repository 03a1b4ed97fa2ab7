//! Lexicographic order on answer sets, dominance under generators and the
//! labeled examples derived from it.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigUint;

use crate::program::{GroundAtom, GroundProgram, Program};
use crate::solver::{enumerate_answer_sets, EnumConfig, Interpretation};
use crate::symmetry::{apply_permutation, GeneratorSet, Permutation};
use crate::Result;

pub const DEFAULT_NEGATIVE_WEIGHT: u64 = 100;

/// The solution atoms of a ground program in ascending rank: atoms of the
/// predicates that occur in choice heads. Bit k of a lex value is the k-th
/// solution atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexOrder {
    ranks: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LexValue(pub BigUint);

impl LexValue {
    /// Bit string, most significant bit first.
    pub fn bits(&self, width: usize) -> String {
        (0..width).rev().map(|k| if self.0.bit(k as u64) { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for LexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl LexOrder {
    pub fn new(gp: &GroundProgram) -> Self {
        let preds: BTreeSet<(&str, usize)> = gp
            .choice_atoms()
            .into_iter()
            .map(|r| {
                let a = gp.atom_table.atom(r);
                (a.predicate.as_str(), a.args.len())
            })
            .collect();
        let ranks = (0..gp.width() as u32)
            .filter(|&r| {
                let a = gp.atom_table.atom(r);
                preds.contains(&(a.predicate.as_str(), a.args.len()))
            })
            .collect();
        LexOrder { ranks }
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn width(&self) -> usize {
        self.ranks.len()
    }

    pub fn value(&self, i: &Interpretation) -> LexValue {
        let mut v = BigUint::default();
        for (k, &r) in self.ranks.iter().enumerate() {
            if i.contains(r) {
                v.set_bit(k as u64, true);
            }
        }
        LexValue(v)
    }

    /// Same order as comparing `value`s, without building them.
    pub fn cmp(&self, a: &Interpretation, b: &Interpretation) -> Ordering {
        for &r in self.ranks.iter().rev() {
            match (a.contains(r), b.contains(r)) {
                (true, false) => return Ordering::Greater,
                (false, true) => return Ordering::Less,
                _ => {}
            }
        }
        Ordering::Equal
    }
}

/// Value of `i` under the lex order of `gp`.
pub fn lex_value(gp: &GroundProgram, i: &Interpretation) -> LexValue {
    LexOrder::new(gp).value(i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Dominated when some generator maps to a strictly smaller value.
    #[default]
    Strict,
    /// Dominated when some generator maps to a value that is not larger.
    NonStrict,
}

/// First generator mapping `i` to a lex-smaller interpretation, if any.
pub fn is_dominated(order: &LexOrder, i: &Interpretation, gs: &GeneratorSet, strictness: Strictness) -> Option<Permutation> {
    gs.generators()
        .iter()
        .find(|pi| {
            let c = order.cmp(&apply_permutation(pi, i), i);
            match strictness {
                Strictness::Strict => c == Ordering::Less,
                Strictness::NonStrict => c != Ordering::Greater,
            }
        })
        .cloned()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weight {
    Finite(u64),
    Infinite,
}

impl Weight {
    pub fn finite(self) -> Option<u64> {
        match self {
            Weight::Finite(w) => Some(w),
            Weight::Infinite => None,
        }
    }
}

/// Inclusions and exclusions of a partial interpretation.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialInterpretation {
    pub inclusions: BTreeSet<GroundAtom>,
    pub exclusions: BTreeSet<GroundAtom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub id: String,
    pub label: Label,
    pub weight: Weight,
    pub pi: PartialInterpretation,
    pub context: Program,
}

impl Example {
    pub fn is_positive(&self) -> bool {
        self.label == Label::Positive
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LabelOptions {
    pub negative_weight: u64,
    pub strictness: Strictness,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            negative_weight: DEFAULT_NEGATIVE_WEIGHT,
            strictness: Strictness::Strict,
        }
    }
}

/// Label the given answer sets of `gp`. Examples are deduplicated and
/// numbered `id1, id2, ...`, negatives first, each group in input order.
pub fn label_answer_sets(
    gp: &GroundProgram,
    gs: &GeneratorSet,
    answer_sets: &[Interpretation],
    instance_facts: &Program,
    opts: &LabelOptions,
) -> Vec<Example> {
    let order = LexOrder::new(gp);
    let support = gs.support();
    let table = &gp.atom_table;
    let mut seen = HashSet::new();
    let mut negatives = Vec::new();
    let mut positives = Vec::new();
    for i in answer_sets {
        let dominated = is_dominated(&order, i, gs, opts.strictness).is_some();
        let mut pi = PartialInterpretation::default();
        for &r in &support {
            let atom = table.atom(r).clone();
            if i.contains(r) {
                pi.inclusions.insert(atom);
            } else {
                pi.exclusions.insert(atom);
            }
        }
        let (label, weight) = if dominated {
            (Label::Negative, Weight::Finite(opts.negative_weight))
        } else {
            (Label::Positive, Weight::Infinite)
        };
        if !seen.insert((label, pi.clone())) {
            continue;
        }
        let ex = Example {
            id: String::new(),
            label,
            weight,
            pi,
            context: instance_facts.clone(),
        };
        if dominated {
            negatives.push(ex);
        } else {
            positives.push(ex);
        }
    }
    let mut out: Vec<Example> = negatives.into_iter().chain(positives).collect();
    for (k, ex) in out.iter_mut().enumerate() {
        ex.id = format!("id{}", k + 1);
    }
    out
}

/// Enumerate the answer sets of `gp` and label them.
pub fn label_instance(
    gp: &GroundProgram,
    gs: &GeneratorSet,
    cfg: &EnumConfig,
    instance_facts: &Program,
    opts: &LabelOptions,
) -> Result<Vec<Example>> {
    let sets = enumerate_answer_sets(gp, cfg)?.answer_sets;
    Ok(label_answer_sets(gp, gs, &sets, instance_facts, opts))
}

/// Positive example with an empty partial interpretation and `g` as context.
pub fn make_gen_example(id: impl Into<String>, g: &Program) -> Example {
    Example {
        id: id.into(),
        label: Label::Positive,
        weight: Weight::Infinite,
        pi: PartialInterpretation::default(),
        context: g.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{pigeonhole_encoding, pigeonhole_instance};
    use crate::program::{ground, parse_program};

    fn p3h3() -> GroundProgram {
        ground(&pigeonhole_instance(3, 3).union(&pigeonhole_encoding())).unwrap()
    }

    fn interp(gp: &GroundProgram, pairs: &[(i64, i64)]) -> Interpretation {
        let atoms: Vec<GroundAtom> = pairs.iter().map(|&(p, h)| GroundAtom::ints("p2h", &[p, h])).collect();
        Interpretation::from_atoms(&gp.atom_table, &atoms).unwrap()
    }

    fn pi(gp: &GroundProgram, s: &str) -> Permutation {
        Permutation::parse(s, &gp.atom_table).unwrap()
    }

    #[test]
    fn p3h3_values() {
        let gp = p3h3();
        let order = LexOrder::new(&gp);
        assert_eq!(order.width(), 9);
        let as1 = order.value(&interp(&gp, &[(1, 1), (2, 2), (3, 3)]));
        assert_eq!(as1.to_string(), "273");
        assert_eq!(as1.bits(9), "100010001");
        let as6 = order.value(&interp(&gp, &[(1, 3), (2, 2), (3, 1)]));
        assert_eq!(as6.to_string(), "84");
        assert_eq!(order.value(&Interpretation::empty(gp.width())).to_string(), "0");
    }

    #[test]
    fn dominance_examples() {
        let gp = p3h3();
        let order = LexOrder::new(&gp);
        let pi1 = pi(&gp, "(p2h(3,2) p2h(3,3))(p2h(2,2) p2h(2,3))(p2h(1,2) p2h(1,3))");
        let gs = GeneratorSet::new(vec![pi1.clone()]);
        let as4 = interp(&gp, &[(1, 2), (2, 3), (3, 1)]);
        let as6 = interp(&gp, &[(1, 3), (2, 2), (3, 1)]);
        assert_eq!(is_dominated(&order, &as4, &gs, Strictness::Strict), Some(pi1));
        assert_eq!(is_dominated(&order, &as6, &gs, Strictness::Strict), None);
        assert_eq!(is_dominated(&order, &as4, &GeneratorSet::default(), Strictness::Strict), None);
    }

    #[test]
    fn non_strict_counts_fixed_points() {
        let gp = ground(&parse_program("{p(1); p(2); p(3)} = 1.").unwrap()).unwrap();
        let order = LexOrder::new(&gp);
        let gs = GeneratorSet::new(vec![pi(&gp, "(p(1) p(2))")]);
        let i = Interpretation::from_atoms(&gp.atom_table, &[GroundAtom::ints("p", &[3])]).unwrap();
        assert_eq!(is_dominated(&order, &i, &gs, Strictness::Strict), None);
        assert!(is_dominated(&order, &i, &gs, Strictness::NonStrict).is_some());
    }

    #[test]
    fn empty_support_gives_one_positive() {
        let gp = p3h3();
        let facts = pigeonhole_instance(3, 3);
        let ex = label_instance(&gp, &GeneratorSet::default(), &EnumConfig::default(), &facts, &LabelOptions::default())
            .unwrap();
        assert_eq!(ex.len(), 1);
        assert!(ex[0].is_positive());
        assert!(ex[0].pi.inclusions.is_empty() && ex[0].pi.exclusions.is_empty());
    }

    #[test]
    fn gen_example_shape() {
        let g = pigeonhole_instance(4, 4);
        let ex = make_gen_example("gen1", &g);
        assert!(ex.is_positive());
        assert_eq!(ex.weight, Weight::Infinite);
        assert_eq!(ex.pi, PartialInterpretation::default());
        assert_eq!(ex.context, g);
    }
}
