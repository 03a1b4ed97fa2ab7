use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::program::{GroundHead, GroundProgram};
use crate::solver::root_bounds;

/// How an atom behaves across all answer sets, as far as the well-founded
/// bounds can tell without guessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomStatus {
    /// True in every answer set.
    Fact,
    /// False in every answer set.
    Impossible,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexKind {
    Atom { rank: u32, status: AtomStatus },
    Rule,
    Element,
    Negation,
}

/// Vertex-colored directed graph whose automorphisms restricted to atom
/// vertices are symmetries of the program.
#[derive(Debug, Clone)]
pub struct ColoredGraph {
    pub colors: Vec<u32>,
    pub kinds: Vec<VertexKind>,
    pub out_adj: Vec<Vec<u32>>,
    pub in_adj: Vec<Vec<u32>>,
    edges: HashSet<(u32, u32)>,
}

impl ColoredGraph {
    pub fn vertex_count(&self) -> usize {
        self.colors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: u32, to: u32) -> bool {
        self.edges.contains(&(from, to))
    }

    /// Vertex of the atom with the given rank.
    pub fn atom_vertex(&self, rank: u32) -> Option<u32> {
        self.kinds
            .iter()
            .position(|k| matches!(k, VertexKind::Atom { rank: r, .. } if *r == rank))
            .map(|v| v as u32)
    }

    /// Rank of an atom vertex whose truth is not fixed across answer sets.
    pub fn open_atom(&self, v: u32) -> Option<u32> {
        match self.kinds[v as usize] {
            VertexKind::Atom {
                rank,
                status: AtomStatus::Open,
            } => Some(rank),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum ColorKey {
    Atom(String, usize, AtomStatus),
    FactRule(String, usize),
    Normal,
    Constraint,
    Choice(u32),
    Element,
    Negation,
}

#[derive(Default)]
struct Builder {
    keys: Vec<ColorKey>,
    kinds: Vec<VertexKind>,
    edges: BTreeSet<(u32, u32)>,
}

impl Builder {
    fn vertex(&mut self, key: ColorKey, kind: VertexKind) -> u32 {
        self.keys.push(key);
        self.kinds.push(kind);
        (self.keys.len() - 1) as u32
    }

    fn edge(&mut self, from: u32, to: u32) {
        self.edges.insert((from, to));
    }
}

/// Build the symmetry graph of a ground program.
///
/// Atoms decided by the well-founded bounds are simplified away first, the
/// way a grounder would: rules deriving known facts are dropped, known body
/// literals removed, and rules with a false body deleted. Each fact keeps a
/// fact-rule vertex. Remaining vertices: one per atom (colored by predicate
/// and status), one negation companion per negatively used atom, one per
/// rule (colored by kind and bound), and one per choice element that keeps
/// a condition. Edges run head→rule and rule→body.
pub fn build_symmetry_graph(gp: &GroundProgram) -> ColoredGraph {
    let (lower, upper) = root_bounds(gp);
    let status = |r: u32| {
        if lower.contains(r) {
            AtomStatus::Fact
        } else if !upper.contains(r) {
            AtomStatus::Impossible
        } else {
            AtomStatus::Open
        }
    };
    let table = &gp.atom_table;
    let mut b = Builder::default();
    let atom_v: Vec<u32> = (0..gp.width() as u32)
        .map(|r| {
            let a = table.atom(r);
            let s = status(r);
            b.vertex(
                ColorKey::Atom(a.predicate.clone(), a.args.len(), s),
                VertexKind::Atom { rank: r, status: s },
            )
        })
        .collect();
    for r in 0..gp.width() as u32 {
        if status(r) == AtomStatus::Fact {
            let a = table.atom(r);
            let fr = b.vertex(ColorKey::FactRule(a.predicate.clone(), a.args.len()), VertexKind::Rule);
            b.edge(atom_v[r as usize], fr);
        }
    }

    let mut negation: BTreeMap<u32, u32> = BTreeMap::new();
    let mut seen_rules = HashSet::new();
    for rule in &gp.rules {
        if rule.pos.iter().any(|&p| status(p) == AtomStatus::Impossible) || rule.neg.iter().any(|&n| status(n) == AtomStatus::Fact) {
            continue;
        }
        let pos: BTreeSet<u32> = rule.pos.iter().copied().filter(|&p| status(p) != AtomStatus::Fact).collect();
        let neg: BTreeSet<u32> = rule.neg.iter().copied().filter(|&n| status(n) != AtomStatus::Impossible).collect();
        let (key, head_edges): (ColorKey, Vec<(u32, Vec<u32>)>) = match &rule.head {
            GroundHead::Atom(h) => {
                if status(*h) == AtomStatus::Fact {
                    continue;
                }
                (ColorKey::Normal, vec![(*h, Vec::new())])
            }
            GroundHead::Constraint => (ColorKey::Constraint, Vec::new()),
            GroundHead::Choice { bound, elements } => {
                let mut els: Vec<(u32, Vec<u32>)> = elements
                    .iter()
                    .filter(|e| status(e.atom) != AtomStatus::Impossible && e.condition.iter().all(|&c| status(c) != AtomStatus::Impossible))
                    .map(|e| {
                        let mut cond: Vec<u32> = e.condition.iter().copied().filter(|&c| status(c) != AtomStatus::Fact).collect();
                        cond.sort_unstable();
                        cond.dedup();
                        (e.atom, cond)
                    })
                    .collect();
                els.sort();
                els.dedup();
                (ColorKey::Choice(*bound), els)
            }
        };
        if !seen_rules.insert((key.clone(), head_edges.clone(), pos.clone(), neg.clone())) {
            continue;
        }
        let rv = b.vertex(key, VertexKind::Rule);
        for (atom, cond) in head_edges {
            if cond.is_empty() {
                b.edge(atom_v[atom as usize], rv);
            } else {
                let ev = b.vertex(ColorKey::Element, VertexKind::Element);
                b.edge(atom_v[atom as usize], ev);
                b.edge(ev, rv);
                for c in cond {
                    b.edge(ev, atom_v[c as usize]);
                }
            }
        }
        for p in pos {
            b.edge(rv, atom_v[p as usize]);
        }
        for n in neg {
            let nv = match negation.get(&n) {
                Some(&v) => v,
                None => {
                    let v = b.vertex(ColorKey::Negation, VertexKind::Negation);
                    b.edge(v, atom_v[n as usize]);
                    negation.insert(n, v);
                    v
                }
            };
            b.edge(rv, nv);
        }
    }

    let palette: BTreeMap<&ColorKey, u32> = b
        .keys
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, k)| (k, i as u32))
        .collect();
    let colors: Vec<u32> = b.keys.iter().map(|k| palette[k]).collect();
    let n = colors.len();
    let mut out_adj = vec![Vec::new(); n];
    let mut in_adj = vec![Vec::new(); n];
    for &(f, t) in &b.edges {
        out_adj[f as usize].push(t);
        in_adj[t as usize].push(f);
    }
    ColoredGraph {
        colors,
        kinds: b.kinds,
        out_adj,
        in_adj,
        edges: b.edges.into_iter().collect(),
    }
}
