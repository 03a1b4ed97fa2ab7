//! Symmetry detection: a colored graph built from the ground program,
//! automorphism search over it, and permutation group utilities.

mod graph;
mod perm;
mod search;

pub use graph::{build_symmetry_graph, AtomStatus, ColoredGraph, VertexKind};
pub use perm::{
    apply_permutation, compose, generated_by, group_closure, invert, irredundant, irredundant_report, GeneratorSet,
    Permutation, DEFAULT_CLOSURE_CAP,
};
pub use search::{find_automorphisms, find_automorphisms_capped, Automorphisms, DEFAULT_AUTOMORPHISM_BUDGET};
