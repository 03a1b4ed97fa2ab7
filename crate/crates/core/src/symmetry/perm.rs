use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::program::{parse_atom, AtomTable};
use crate::solver::Interpretation;
use crate::{Error, Result};

pub const DEFAULT_CLOSURE_CAP: usize = 10_000;

/// A permutation of atom ranks. Only moved points are stored, so equal
/// permutations have equal representations.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    map: BTreeMap<u32, u32>,
}

impl Permutation {
    pub fn identity() -> Self {
        Permutation::default()
    }

    /// Build from disjoint cycles. Fails if a point appears twice.
    pub fn from_cycles(cycles: &[Vec<u32>]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for c in cycles {
            for (i, &x) in c.iter().enumerate() {
                let y = c[(i + 1) % c.len()];
                if map.insert(x, y).is_some() {
                    return Err(Error::Config(format!("point {x} occurs in two cycles")));
                }
            }
        }
        Ok(Permutation::from_map(map))
    }

    /// Build from a point mapping; fixed points are dropped. The mapping must
    /// be a bijection on its keys.
    pub fn from_map(map: BTreeMap<u32, u32>) -> Self {
        Permutation {
            map: map.into_iter().filter(|(k, v)| k != v).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn image(&self, x: u32) -> u32 {
        self.map.get(&x).copied().unwrap_or(x)
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.map.keys().copied()
    }

    /// Disjoint cycles, each starting at its smallest point, ordered by that point.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in self.map.keys() {
            if !seen.insert(start) {
                continue;
            }
            let mut cycle = vec![start];
            let mut x = self.image(start);
            while x != start {
                seen.insert(x);
                cycle.push(x);
                x = self.image(x);
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle notation over atom names, e.g. `( p2h(3,2) p2h(3,3) ) ( p2h(2,2) p2h(2,3) )`.
    pub fn render(&self, table: &AtomTable) -> String {
        let mut cycles = self.cycles();
        cycles.reverse();
        cycles
            .iter()
            .map(|c| {
                let names: Vec<String> = c.iter().map(|&r| table.atom(r).to_string()).collect();
                format!("( {} )", names.join(" "))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parse cycle notation as produced by [`Permutation::render`].
    pub fn parse(text: &str, table: &AtomTable) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let Some(body) = rest.strip_prefix('(') else {
                return Err(Error::syntax(1, 1, format!("expected `(` in cycle notation: {rest}")));
            };
            // Atom arguments contain parentheses, so scan for the closing one at depth zero.
            let mut depth = 0usize;
            let mut end = None;
            for (i, ch) in body.char_indices() {
                match ch {
                    '(' => depth += 1,
                    ')' if depth == 0 => {
                        end = Some(i);
                        break;
                    }
                    ')' => depth -= 1,
                    _ => {}
                }
            }
            let end = end.ok_or_else(|| Error::syntax(1, 1, "unterminated cycle"))?;
            let mut cycle = Vec::new();
            for name in split_atoms(&body[..end]) {
                let atom = parse_atom(&name)?;
                cycle.push(table.rank(&atom).ok_or_else(|| Error::UnknownAtom(name.clone()))?);
            }
            if cycle.len() > 1 {
                cycles.push(cycle);
            }
            rest = body[end + 1..].trim_start();
        }
        Permutation::from_cycles(&cycles)
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            map: self.map.iter().map(|(&k, &v)| (v, k)).collect(),
        }
    }

    /// Restrict to points satisfying `keep`. Only meaningful when the kept
    /// set is invariant under the permutation.
    pub fn restrict(&self, keep: impl Fn(u32) -> bool) -> Permutation {
        Permutation {
            map: self.map.iter().filter(|(k, _)| keep(**k)).map(|(&k, &v)| (k, v)).collect(),
        }
    }
}

fn split_atoms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// `compose(p, q)` applies `q` first, then `p`.
pub fn compose(p: &Permutation, q: &Permutation) -> Permutation {
    let points: BTreeSet<u32> = p.support().chain(q.support()).collect();
    Permutation::from_map(points.into_iter().map(|x| (x, p.image(q.image(x)))).collect())
}

pub fn invert(p: &Permutation) -> Permutation {
    p.inverse()
}

/// Rank `r` is set in the result iff `p⁻¹(r)` is set in `i`.
pub fn apply_permutation(p: &Permutation, i: &Interpretation) -> Interpretation {
    let mut out = i.clone();
    for x in p.support() {
        out.remove(x);
    }
    for x in p.support() {
        if i.contains(x) {
            out.insert(p.image(x));
        }
    }
    out
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("()");
        }
        for c in self.cycles() {
            let pts: Vec<String> = c.iter().map(ToString::to_string).collect();
            write!(f, "({})", pts.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeneratorSet {
    generators: Vec<Permutation>,
}

impl GeneratorSet {
    /// Identity and duplicate generators are dropped; order is kept.
    pub fn new(gens: impl IntoIterator<Item = Permutation>) -> Self {
        let mut seen = HashSet::new();
        GeneratorSet {
            generators: gens
                .into_iter()
                .filter(|g| !g.is_identity() && seen.insert(g.clone()))
                .collect(),
        }
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Union of the generators' moved points.
    pub fn support(&self) -> BTreeSet<u32> {
        self.generators.iter().flat_map(|g| g.support()).collect()
    }
}

/// Breadth-first closure under composition with the generators.
pub fn group_closure(gs: &GeneratorSet, cap: usize) -> Result<HashSet<Permutation>> {
    match closure_search(gs.generators(), cap, None) {
        Closure::Complete(set) => Ok(set),
        Closure::TooLarge(partial) => Err(Error::GroupTooLarge {
            cap,
            partial: partial.into_iter().collect(),
        }),
        Closure::Found => unreachable!("no target requested"),
    }
}

enum Closure {
    Complete(HashSet<Permutation>),
    TooLarge(HashSet<Permutation>),
    Found,
}

fn closure_search(gens: &[Permutation], cap: usize, target: Option<&Permutation>) -> Closure {
    let id = Permutation::identity();
    if target == Some(&id) {
        return Closure::Found;
    }
    let mut seen: HashSet<Permutation> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q = compose(g, &p);
            if seen.contains(&q) {
                continue;
            }
            if target == Some(&q) {
                return Closure::Found;
            }
            if seen.len() >= cap {
                return Closure::TooLarge(seen);
            }
            seen.insert(q.clone());
            queue.push_back(q);
        }
    }
    Closure::Complete(seen)
}

/// Membership of `p` in the group generated by `gens`. `None` if the
/// closure cap was hit before deciding.
pub fn generated_by(p: &Permutation, gens: &[Permutation], cap: usize) -> Option<bool> {
    match closure_search(gens, cap, Some(p)) {
        Closure::Found => Some(true),
        Closure::Complete(_) => Some(false),
        Closure::TooLarge(_) => None,
    }
}

/// Greedily drop generators that lie in the group generated by the others.
/// When the cap prevents a decision the generator is kept.
pub fn irredundant(gs: &GeneratorSet, cap: usize) -> GeneratorSet {
    irredundant_report(gs, cap).0
}

/// As [`irredundant`], also returning how many membership tests hit the cap.
pub fn irredundant_report(gs: &GeneratorSet, cap: usize) -> (GeneratorSet, usize) {
    let mut kept: Vec<Permutation> = GeneratorSet::new(gs.generators().iter().cloned()).generators;
    let mut undecided = 0;
    let mut i = 0;
    while i < kept.len() {
        let others: Vec<Permutation> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| g.clone())
            .collect();
        match generated_by(&kept[i], &others, cap) {
            Some(true) => {
                kept.remove(i);
            }
            Some(false) => i += 1,
            None => {
                undecided += 1;
                i += 1;
            }
        }
    }
    (GeneratorSet { generators: kept }, undecided)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(a: u32, b: u32) -> Permutation {
        Permutation::from_cycles(&[vec![a, b]]).unwrap()
    }

    #[test]
    fn compose_applies_right_first() {
        let p = Permutation::from_cycles(&[vec![0, 1, 2]]).unwrap();
        let q = t(0, 1);
        let pq = compose(&p, &q);
        // q: 0->1, then p: 1->2
        assert_eq!(pq.image(0), 2);
        assert_eq!(pq.image(1), 1);
        assert_eq!(pq.image(2), 0);
    }

    #[test]
    fn involution_squares_to_identity() {
        let p = Permutation::from_cycles(&[vec![0, 1], vec![4, 5], vec![7, 8]]).unwrap();
        assert!(compose(&p, &p).is_identity());
        assert!(invert(&Permutation::identity()).is_identity());
    }

    #[test]
    fn closure_sizes() {
        let empty = GeneratorSet::default();
        assert_eq!(group_closure(&empty, 10).unwrap().len(), 1);
        let one = GeneratorSet::new([t(3, 4)]);
        assert_eq!(group_closure(&one, 10).unwrap().len(), 2);
        let s4 = GeneratorSet::new([t(0, 1), Permutation::from_cycles(&[vec![0, 1, 2, 3]]).unwrap()]);
        assert_eq!(group_closure(&s4, 100).unwrap().len(), 24);
        assert!(matches!(
            group_closure(&s4, 10),
            Err(Error::GroupTooLarge { cap: 10, .. })
        ));
    }

    #[test]
    fn irredundant_drops_duplicates_and_products() {
        let a = t(0, 1);
        let b = t(1, 2);
        assert_eq!(irredundant(&GeneratorSet::new([a.clone(), a.clone()]), 100).len(), 1);
        let ab = compose(&a, &b);
        let reduced = irredundant(&GeneratorSet::new([a.clone(), b.clone(), ab]), 100);
        assert_eq!(reduced.len(), 2);
    }

    #[test]
    fn cap_keeps_generators_conservatively() {
        let gens = GeneratorSet::new([t(0, 1), t(1, 2), t(0, 2)]);
        let (reduced, undecided) = irredundant_report(&gens, 2);
        assert_eq!(reduced.len(), 3);
        assert!(undecided > 0);
    }

    #[test]
    fn apply_moves_bits() {
        let i = Interpretation::from_ranks(4, [0, 3]);
        let p = Permutation::from_cycles(&[vec![0, 1, 2]]).unwrap();
        assert_eq!(apply_permutation(&p, &i), Interpretation::from_ranks(4, [1, 3]));
        assert_eq!(apply_permutation(&Permutation::identity(), &i), i);
    }

    fn perm_strategy(n: u32) -> impl Strategy<Value = Permutation> {
        Just((0..n).collect::<Vec<u32>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::from_map(v.into_iter().enumerate().map(|(i, x)| (i as u32, x)).collect()))
    }

    proptest! {
        #[test]
        fn support_of_product_is_within_union(p in perm_strategy(7), q in perm_strategy(7)) {
            let pq = compose(&p, &q);
            let union: BTreeSet<u32> = p.support().chain(q.support()).collect();
            prop_assert!(pq.support().all(|x| union.contains(&x)));
        }

        #[test]
        fn cycles_round_trip(p in perm_strategy(9)) {
            prop_assert_eq!(Permutation::from_cycles(&p.cycles()).unwrap(), p);
        }

        #[test]
        fn apply_preserves_cardinality(p in perm_strategy(8), bits in proptest::collection::vec(any::<bool>(), 8)) {
            let i = Interpretation::from_ranks(8, bits.iter().enumerate().filter(|(_, b)| **b).map(|(r, _)| r as u32));
            let j = apply_permutation(&p, &i);
            prop_assert_eq!(i.len(), j.len());
            prop_assert_eq!(apply_permutation(&p.inverse(), &j), i);
        }
    }
}
