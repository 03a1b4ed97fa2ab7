use std::collections::{BTreeMap, BTreeSet};

use super::graph::ColoredGraph;
use super::perm::{irredundant_report, GeneratorSet, Permutation, DEFAULT_CLOSURE_CAP};

pub const DEFAULT_AUTOMORPHISM_BUDGET: u64 = 1_000_000;

/// Outcome of an automorphism search.
#[derive(Debug, Clone)]
pub struct Automorphisms {
    /// Generators restricted to atoms whose truth value is not fixed.
    pub generators: GeneratorSet,
    /// False when the node budget ran out before the search tree was covered.
    pub complete: bool,
    pub nodes: u64,
    /// Generators kept only because the closure cap blocked a membership test.
    pub undecided: usize,
}

/// A vertex label with its sorted neighbour labels and edge directions.
type RefineKey = (u32, Vec<(u32, bool)>);

#[derive(Clone)]
struct Node {
    labels: Vec<u32>,
    cells: u32,
    invariant: Vec<u64>,
}

struct Search<'g> {
    g: &'g ColoredGraph,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    first_leaf: Vec<u32>,
    first_invariants: Vec<Vec<u64>>,
    found: Vec<Vec<u32>>,
}

fn mix(a: u64, b: u64) -> u64 {
    let x = a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.rotate_left(29);
    x ^ (x >> 31)
}

impl<'g> Search<'g> {
    fn refine(&self, mut labels: Vec<u32>) -> Node {
        let mut cells = labels.iter().collect::<BTreeSet<_>>().len() as u32;
        loop {
            let keys: Vec<(u32, Vec<(u32, bool)>)> = (0..labels.len())
                .map(|v| {
                    let mut nb: Vec<(u32, bool)> = self.g.out_adj[v]
                        .iter()
                        .map(|&u| (labels[u as usize], false))
                        .chain(self.g.in_adj[v].iter().map(|&u| (labels[u as usize], true)))
                        .collect();
                    nb.sort_unstable();
                    (labels[v], nb)
                })
                .collect();
            let order: BTreeMap<&RefineKey, u32> = keys
                .iter()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .enumerate()
                .map(|(i, k)| (k, i as u32))
                .collect();
            let next = order.len() as u32;
            labels = keys.iter().map(|k| order[k]).collect();
            if next == cells {
                break;
            }
            cells = next;
        }
        let mut sizes = vec![0u64; cells as usize];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        let mut edge_hash = 0u64;
        for (v, outs) in self.g.out_adj.iter().enumerate() {
            for &u in outs {
                edge_hash = edge_hash.wrapping_add(mix(labels[v] as u64 + 1, labels[u as usize] as u64 + 1));
            }
        }
        sizes.push(edge_hash);
        Node {
            labels,
            cells,
            invariant: sizes,
        }
    }

    fn target_cell(&self, node: &Node) -> Option<Vec<u32>> {
        if node.cells as usize == node.labels.len() {
            return None;
        }
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); node.cells as usize];
        for (v, &l) in node.labels.iter().enumerate() {
            members[l as usize].push(v as u32);
        }
        members.into_iter().find(|m| m.len() > 1)
    }

    fn individualize(&self, node: &Node, v: u32) -> Node {
        let labels = node
            .labels
            .iter()
            .enumerate()
            .map(|(u, &l)| 2 * l + u32::from(u as u32 != v && l == node.labels[v as usize]))
            .collect();
        self.refine(labels)
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
        }
        !self.exhausted
    }

    fn leaf_map(&self, leaf: &[u32]) -> Option<Vec<u32>> {
        let mut inv = vec![0u32; leaf.len()];
        for (v, &l) in leaf.iter().enumerate() {
            inv[l as usize] = v as u32;
        }
        let map: Vec<u32> = self.first_leaf.iter().map(|&l| inv[l as usize]).collect();
        for (v, &w) in map.iter().enumerate() {
            if self.g.colors[v] != self.g.colors[w as usize] {
                return None;
            }
        }
        for (v, outs) in self.g.out_adj.iter().enumerate() {
            for &u in outs {
                if !self.g.has_edge(map[v], map[u as usize]) {
                    return None;
                }
            }
        }
        Some(map)
    }

    /// Depth-first search below `node` for any leaf equivalent to the first leaf.
    fn find_equivalent(&mut self, node: Node, level: usize) -> Option<Vec<u32>> {
        if !self.tick() {
            return None;
        }
        if self.first_invariants.get(level) != Some(&node.invariant) {
            return None;
        }
        match self.target_cell(&node) {
            None => self.leaf_map(&node.labels),
            Some(cell) => {
                for v in cell {
                    let child = self.individualize(&node, v);
                    if let Some(m) = self.find_equivalent(child, level + 1) {
                        return Some(m);
                    }
                    if self.exhausted {
                        return None;
                    }
                }
                None
            }
        }
    }
}

fn find(parent: &mut [u32], x: u32) -> u32 {
    let mut r = x;
    while parent[r as usize] != r {
        r = parent[r as usize];
    }
    let mut y = x;
    while parent[y as usize] != r {
        let next = parent[y as usize];
        parent[y as usize] = r;
        y = next;
    }
    r
}

fn union_with(parent: &mut [u32], map: &[u32]) {
    for (v, &w) in map.iter().enumerate() {
        let a = find(parent, v as u32);
        let b = find(parent, w);
        if a != b {
            parent[a.max(b) as usize] = a.min(b);
        }
    }
}

/// Search for generators of the automorphism group of `g`, restricted to
/// its open atom vertices and made irredundant.
pub fn find_automorphisms(g: &ColoredGraph, node_budget: u64) -> Automorphisms {
    find_automorphisms_capped(g, node_budget, DEFAULT_CLOSURE_CAP)
}

/// As [`find_automorphisms`], with the closure cap used by the
/// irredundancy test.
pub fn find_automorphisms_capped(g: &ColoredGraph, node_budget: u64, closure_cap: usize) -> Automorphisms {
    let n = g.vertex_count();
    let mut s = Search {
        g,
        budget: node_budget.max(1),
        nodes: 0,
        exhausted: false,
        first_leaf: Vec::new(),
        first_invariants: Vec::new(),
        found: Vec::new(),
    };
    let root = s.refine(g.colors.clone());
    let mut path = vec![root];
    let mut cells = Vec::new();
    while let Some(cell) = s.target_cell(path.last().unwrap()) {
        s.tick();
        let child = s.individualize(path.last().unwrap(), cell[0]);
        cells.push(cell);
        path.push(child);
    }
    s.first_invariants = path.iter().map(|p| p.invariant.clone()).collect();
    s.first_leaf = path.last().unwrap().labels.clone();

    let mut parent: Vec<u32> = (0..n as u32).collect();
    'levels: for level in (0..cells.len()).rev() {
        let first = cells[level][0];
        let mut failed: BTreeSet<u32> = BTreeSet::new();
        for &w in &cells[level][1..] {
            let root_w = find(&mut parent, w);
            if root_w == find(&mut parent, first) || failed.contains(&root_w) {
                continue;
            }
            let child = s.individualize(&path[level], w);
            match s.find_equivalent(child, level + 1) {
                Some(map) => {
                    union_with(&mut parent, &map);
                    s.found.push(map);
                }
                None => {
                    failed.insert(root_w);
                }
            }
            if s.exhausted {
                break 'levels;
            }
        }
    }

    let gens = s.found.iter().map(|map| {
        Permutation::from_map(
            map.iter()
                .enumerate()
                .filter_map(|(v, &w)| Some((g.open_atom(v as u32)?, g.open_atom(w)?)))
                .filter(|(a, b)| a != b)
                .collect(),
        )
    });
    let mut gens: Vec<Permutation> = gens.collect();
    gens.sort();
    let (generators, undecided) = irredundant_report(&GeneratorSet::new(gens), closure_cap);
    Automorphisms {
        generators,
        complete: !s.exhausted,
        nodes: s.nodes,
        undecided,
    }
}
