//! Ground lex-leader symmetry breaking constraints.

use std::fmt;

use crate::dominance::LexOrder;
use crate::program::{Atom, GroundAtom, Head, Program, Rule};
use crate::program::GroundProgram;
use crate::symmetry::GeneratorSet;

pub const SBC_PREFIX: &str = "__sbc_eq";

/// Chain rules and constraints for one generator.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeneratorBlock {
    pub fact: Option<GroundAtom>,
    pub aux_rules: Vec<Rule>,
    pub constraints: Vec<Rule>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SbcExtension {
    pub blocks: Vec<GeneratorBlock>,
}

impl SbcExtension {
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn to_program(&self) -> Program {
        let mut p = Program::new();
        for b in &self.blocks {
            p.facts.extend(b.fact.iter().cloned());
            p.rules.extend(b.aux_rules.iter().cloned());
            p.rules.extend(b.constraints.iter().cloned());
        }
        p
    }
}

impl fmt::Display for SbcExtension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            if let Some(a) = &b.fact {
                writeln!(f, "{a}.")?;
            }
            for r in b.aux_rules.iter().chain(&b.constraints) {
                writeln!(f, "{r}")?;
            }
        }
        Ok(())
    }
}

fn eq_atom(g: usize, j: usize) -> Atom {
    Atom::from(&GroundAtom::ints(SBC_PREFIX, &[g as i64, j as i64]))
}

/// Constraints admitting exactly the interpretations `I` with
/// `I <= pi(I)` in the lex order of `gp`, for every generator `pi`.
///
/// Generator `g` walks its moved solution atoms from the most significant
/// one down; `__sbc_eq(g,j)` holds while `I` and `pi(I)` agree on the first
/// `j` of them.
pub fn emit_lex_leader(gs: &GeneratorSet, gp: &GroundProgram) -> SbcExtension {
    let order = LexOrder::new(gp);
    let table = &gp.atom_table;
    let mut blocks = Vec::new();
    for (gi, pi) in gs.generators().iter().enumerate() {
        let g = gi + 1;
        let inv = pi.inverse();
        let chain: Vec<(u32, u32)> = order
            .ranks()
            .iter()
            .rev()
            .filter(|&&r| pi.image(r) != r)
            .map(|&r| (r, inv.image(r)))
            .collect();
        if chain.is_empty() {
            continue;
        }
        let mut block = GeneratorBlock {
            fact: Some(GroundAtom::ints(SBC_PREFIX, &[g as i64, 0])),
            ..Default::default()
        };
        for (j, &(a, b)) in chain.iter().enumerate() {
            let j = j + 1;
            let a = Atom::from(table.atom(a));
            let b = Atom::from(table.atom(b));
            let prev = eq_atom(g, j - 1);
            block.constraints.push(Rule {
                head: None,
                body_pos: vec![prev.clone(), a.clone()],
                body_neg: vec![b.clone()],
                builtins: Vec::new(),
            });
            if j == chain.len() {
                break;
            }
            block.aux_rules.push(Rule {
                head: Some(Head::Atom(eq_atom(g, j))),
                body_pos: vec![prev.clone(), a.clone(), b.clone()],
                body_neg: Vec::new(),
                builtins: Vec::new(),
            });
            block.aux_rules.push(Rule {
                head: Some(Head::Atom(eq_atom(g, j))),
                body_pos: vec![prev],
                body_neg: vec![a, b],
                builtins: Vec::new(),
            });
        }
        blocks.push(block);
    }
    SbcExtension { blocks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dominance::{is_dominated, Strictness};
    use crate::instances::{pigeonhole_encoding, pigeonhole_instance};
    use crate::program::{ground, parse_program};
    use crate::solver::{enumerate_answer_sets, EnumConfig, Interpretation};
    use crate::symmetry::Permutation;

    fn project(gp: &GroundProgram, ext: &GroundProgram, sets: &[Interpretation]) -> Vec<Interpretation> {
        let mut out: Vec<Interpretation> = sets
            .iter()
            .map(|i| {
                let atoms: Vec<GroundAtom> = i
                    .atoms(&ext.atom_table)
                    .filter(|a| !a.predicate.starts_with(SBC_PREFIX))
                    .cloned()
                    .collect();
                Interpretation::from_atoms(&gp.atom_table, &atoms).unwrap()
            })
            .collect();
        out.sort_by(crate::solver::lex_cmp);
        out
    }

    fn check_agreement(program: &Program, gens: &[&str]) {
        let gp = ground(program).unwrap();
        let gs = GeneratorSet::new(gens.iter().map(|s| Permutation::parse(s, &gp.atom_table).unwrap()));
        let ext = emit_lex_leader(&gs, &gp);
        let text = format!("{program}{ext}");
        let egp = ground(&parse_program(&text).unwrap()).unwrap();
        let cfg = EnumConfig::default();
        let survivors = project(&gp, &egp, &enumerate_answer_sets(&egp, &cfg).unwrap().answer_sets);
        let order = LexOrder::new(&gp);
        let expected: Vec<Interpretation> = enumerate_answer_sets(&gp, &cfg)
            .unwrap()
            .answer_sets
            .into_iter()
            .filter(|i| is_dominated(&order, i, &gs, Strictness::Strict).is_none())
            .collect();
        assert_eq!(survivors, expected);
    }

    #[test]
    fn two_cycle() {
        check_agreement(&parse_program("{p(1); p(2)} = 1.").unwrap(), &["(p(1) p(2))"]);
        check_agreement(&parse_program("{p(1); p(2); p(3)} = 2.").unwrap(), &["(p(1) p(3))"]);
    }

    #[test]
    fn empty_generators() {
        let gp = ground(&parse_program("{p(1); p(2)} = 1.").unwrap()).unwrap();
        assert!(emit_lex_leader(&GeneratorSet::default(), &gp).is_empty());
    }

    #[test]
    fn p3h3_generators() {
        let prog = pigeonhole_instance(3, 3).union(&pigeonhole_encoding());
        check_agreement(
            &prog,
            &[
                "(p2h(3,2) p2h(3,3))(p2h(2,2) p2h(2,3))(p2h(1,2) p2h(1,3))",
                "(p2h(3,1) p2h(3,3))(p2h(2,1) p2h(2,3))(p2h(1,1) p2h(1,3))",
                "(p2h(2,3) p2h(3,3))(p2h(2,2) p2h(3,2))(p2h(2,1) p2h(3,1))",
                "(p2h(1,1) p2h(3,3))(p2h(2,1) p2h(2,3))(p2h(1,3) p2h(3,1))(p2h(1,2) p2h(3,2))",
            ],
        );
    }

    #[test]
    fn three_cycle_uses_inverse() {
        check_agreement(&parse_program("{p(1); p(2); p(3)} = 1.").unwrap(), &["(p(1) p(2) p(3))"]);
    }

    #[test]
    fn emitted_text_parses() {
        let gp = ground(&parse_program("{p(1); p(2)} = 1.").unwrap()).unwrap();
        let gs = GeneratorSet::new(vec![Permutation::parse("(p(1) p(2))", &gp.atom_table).unwrap()]);
        let text = emit_lex_leader(&gs, &gp).to_string();
        let expected = "\
__sbc_eq(1,0).
__sbc_eq(1,1) :- __sbc_eq(1,0), p(2), p(1).
__sbc_eq(1,1) :- __sbc_eq(1,0), not p(2), not p(1).
:- __sbc_eq(1,0), p(2), not p(1).
:- __sbc_eq(1,1), p(1), not p(2).
";
        assert_eq!(text, expected);
        assert!(parse_program(&text).is_ok());
    }
}
