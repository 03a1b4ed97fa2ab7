//! SMODELS numeric format, as produced by lparse.
//!
//! Atom 1 is reserved for `false`; the atom of rank `r` is numbered `r + 2`.
//! An exactly-`n` choice becomes one choice rule per element plus two
//! cardinality atoms (at least `n`, at least `n + 1`) and two constraints.

use std::fmt;

use super::{GroundHead, GroundProgram};
use crate::{Error, Result};

const FALSE_ATOM: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmodelsRule {
    /// `1 head n m neg... pos...`
    Basic { head: u32, neg: Vec<u32>, pos: Vec<u32> },
    /// `2 head n m bound neg... pos...`
    Cardinality {
        head: u32,
        bound: u32,
        neg: Vec<u32>,
        pos: Vec<u32>,
    },
    /// `3 k heads... n m neg... pos...`
    Choice { heads: Vec<u32>, neg: Vec<u32>, pos: Vec<u32> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SmodelsProgram {
    pub rules: Vec<SmodelsRule>,
    pub symbols: Vec<(u32, String)>,
    pub compute_pos: Vec<u32>,
    pub compute_neg: Vec<u32>,
    pub models: u32,
}

impl SmodelsProgram {
    /// Largest atom number used anywhere.
    pub fn max_atom(&self) -> u32 {
        let mut m = FALSE_ATOM;
        for r in &self.rules {
            let (heads, neg, pos) = match r {
                SmodelsRule::Basic { head, neg, pos } | SmodelsRule::Cardinality { head, neg, pos, .. } => {
                    (std::slice::from_ref(head), neg, pos)
                }
                SmodelsRule::Choice { heads, neg, pos } => (heads.as_slice(), neg, pos),
            };
            m = heads.iter().chain(neg).chain(pos).fold(m, |m, &a| m.max(a));
        }
        self.symbols.iter().fold(m, |m, (a, _)| m.max(*a))
    }
}

fn body(f: &mut fmt::Formatter<'_>, neg: &[u32], pos: &[u32], bound: Option<u32>) -> fmt::Result {
    write!(f, " {} {}", neg.len() + pos.len(), neg.len())?;
    if let Some(b) = bound {
        write!(f, " {b}")?;
    }
    for a in neg.iter().chain(pos) {
        write!(f, " {a}")?;
    }
    Ok(())
}

impl fmt::Display for SmodelsProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            match r {
                SmodelsRule::Basic { head, neg, pos } => {
                    write!(f, "1 {head}")?;
                    body(f, neg, pos, None)?;
                }
                SmodelsRule::Cardinality { head, bound, neg, pos } => {
                    write!(f, "2 {head}")?;
                    body(f, neg, pos, Some(*bound))?;
                }
                SmodelsRule::Choice { heads, neg, pos } => {
                    write!(f, "3 {}", heads.len())?;
                    for h in heads {
                        write!(f, " {h}")?;
                    }
                    body(f, neg, pos, None)?;
                }
            }
            writeln!(f)?;
        }
        writeln!(f, "0")?;
        for (a, name) in &self.symbols {
            writeln!(f, "{a} {name}")?;
        }
        writeln!(f, "0\nB+")?;
        for a in &self.compute_pos {
            writeln!(f, "{a}")?;
        }
        writeln!(f, "0\nB-")?;
        for a in &self.compute_neg {
            writeln!(f, "{a}")?;
        }
        writeln!(f, "0\n{}", self.models)
    }
}

/// Translate a ground program into SMODELS rules.
pub fn to_smodels(gp: &GroundProgram) -> SmodelsProgram {
    let num = |r: u32| r + 2;
    let mut next = gp.width() as u32 + 2;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    let mut rules = Vec::new();
    for rule in &gp.rules {
        let pos: Vec<u32> = rule.pos.iter().map(|&r| num(r)).collect();
        let neg: Vec<u32> = rule.neg.iter().map(|&r| num(r)).collect();
        match &rule.head {
            GroundHead::Atom(h) => rules.push(SmodelsRule::Basic { head: num(*h), neg, pos }),
            GroundHead::Constraint => rules.push(SmodelsRule::Basic {
                head: FALSE_ATOM,
                neg,
                pos,
            }),
            GroundHead::Choice { bound, elements } => {
                let mut counted = Vec::new();
                for e in elements {
                    let cond: Vec<u32> = e.condition.iter().map(|&r| num(r)).collect();
                    rules.push(SmodelsRule::Choice {
                        heads: vec![num(e.atom)],
                        neg: neg.clone(),
                        pos: pos.iter().chain(&cond).copied().collect(),
                    });
                    if cond.is_empty() {
                        counted.push(num(e.atom));
                    } else {
                        let aux = fresh();
                        rules.push(SmodelsRule::Basic {
                            head: aux,
                            neg: Vec::new(),
                            pos: std::iter::once(num(e.atom)).chain(cond).collect(),
                        });
                        counted.push(aux);
                    }
                }
                if *bound > 0 {
                    let at_least = fresh();
                    rules.push(SmodelsRule::Cardinality {
                        head: at_least,
                        bound: *bound,
                        neg: Vec::new(),
                        pos: counted.clone(),
                    });
                    rules.push(SmodelsRule::Basic {
                        head: FALSE_ATOM,
                        neg: neg.iter().copied().chain([at_least]).collect(),
                        pos: pos.clone(),
                    });
                }
                if (*bound as usize) < counted.len() {
                    let too_many = fresh();
                    rules.push(SmodelsRule::Cardinality {
                        head: too_many,
                        bound: bound + 1,
                        neg: Vec::new(),
                        pos: counted,
                    });
                    rules.push(SmodelsRule::Basic {
                        head: FALSE_ATOM,
                        neg: neg.clone(),
                        pos: pos.iter().copied().chain([too_many]).collect(),
                    });
                }
            }
        }
    }
    SmodelsProgram {
        rules,
        symbols: gp
            .atom_table
            .atoms()
            .iter()
            .enumerate()
            .map(|(r, a)| (num(r as u32), a.to_string()))
            .collect(),
        compute_pos: Vec::new(),
        compute_neg: vec![FALSE_ATOM],
        models: 0,
    }
}

pub fn write_smodels(gp: &GroundProgram) -> String {
    to_smodels(gp).to_string()
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        let (i, l) = self.iter.next().ok_or_else(|| Error::syntax(self.line + 1, 1, "unexpected end of input"))?;
        self.line = i + 1;
        Ok(l.trim())
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::syntax(self.line, 1, msg)
    }
}

fn numbers(lines: &Lines<'_>, l: &str) -> Result<Vec<u32>> {
    l.split_whitespace()
        .map(|t| t.parse::<u32>().map_err(|_| lines.err(format!("expected a number, found `{t}`"))))
        .collect()
}

fn split_body(lines: &Lines<'_>, xs: &[u32], n: u32, m: u32) -> Result<(Vec<u32>, Vec<u32>)> {
    if xs.len() != n as usize || m > n {
        return Err(lines.err("literal counts do not match"));
    }
    Ok((xs[..m as usize].to_vec(), xs[m as usize..].to_vec()))
}

/// Read a program in SMODELS numeric format (rule types 1, 2 and 3).
pub fn read_smodels(text: &str) -> Result<SmodelsProgram> {
    let mut lines = Lines {
        iter: text.lines().enumerate(),
        line: 0,
    };
    let mut p = SmodelsProgram::default();
    loop {
        let l = lines.next()?;
        let xs = numbers(&lines, l)?;
        let short = || lines.err("truncated rule");
        match xs.first() {
            Some(0) => break,
            Some(1) => {
                let [head, n, m] = xs.get(1..4).ok_or_else(short)?.try_into().unwrap();
                let (neg, pos) = split_body(&lines, &xs[4..], n, m)?;
                p.rules.push(SmodelsRule::Basic { head, neg, pos });
            }
            Some(2) => {
                let [head, n, m, bound] = xs.get(1..5).ok_or_else(short)?.try_into().unwrap();
                let (neg, pos) = split_body(&lines, &xs[5..], n, m)?;
                p.rules.push(SmodelsRule::Cardinality { head, bound, neg, pos });
            }
            Some(3) => {
                let k = *xs.get(1).ok_or_else(short)? as usize;
                let heads = xs.get(2..2 + k).ok_or_else(short)?.to_vec();
                let [n, m] = xs.get(2 + k..4 + k).ok_or_else(short)?.try_into().unwrap();
                let (neg, pos) = split_body(&lines, &xs[4 + k..], n, m)?;
                p.rules.push(SmodelsRule::Choice { heads, neg, pos });
            }
            Some(t) => return Err(lines.err(format!("unsupported rule type {t}"))),
            None => return Err(lines.err("empty line")),
        }
    }
    loop {
        let l = lines.next()?;
        if l == "0" {
            break;
        }
        let (a, name) = l.split_once(' ').ok_or_else(|| lines.err("malformed symbol table entry"))?;
        let a = a.parse().map_err(|_| lines.err("bad atom number"))?;
        p.symbols.push((a, name.to_string()));
    }
    for (header, target) in [("B+", &mut p.compute_pos), ("B-", &mut p.compute_neg)] {
        if lines.next()? != header {
            return Err(lines.err(format!("expected {header}")));
        }
        loop {
            let l = lines.next()?;
            if l == "0" {
                break;
            }
            target.push(l.parse().map_err(|_| lines.err("bad atom number"))?);
        }
    }
    p.models = lines.next()?.parse().map_err(|_| lines.err("bad model count"))?;
    Ok(p)
}
