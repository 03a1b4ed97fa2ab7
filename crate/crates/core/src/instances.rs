//! Problem encodings and instance generators used by tests, examples and
//! benchmarks.

use crate::program::{parse_program, GroundAtom, Program};

/// Pigeon-hole encoding over the inputs `pigeon(p).` and `hole(h).`
pub const PIGEONHOLE_ENCODING: &str = "\
pigeon(X-1) :- pigeon(X), X > 1.
hole(X-1) :- hole(X), X > 1.
{p2h(P,H) : hole(H)} = 1 :- pigeon(P).
:- p2h(P1,H), p2h(P2,H), P1 != P2.
";

/// Order and extremum helpers the learned constraints are phrased over.
pub const PIGEONHOLE_AUX: &str = "\
lessThan(X,Y) :- pigeon(X), pigeon(Y), X < Y.
lessThan(X,Y) :- hole(X), hole(Y), X < Y.
maxpigeon(X) :- pigeon(X), not pigeon(X+1).
maxhole(X) :- hole(X), not hole(X+1).
";

pub const PIGEONHOLE_BIAS: &str = "\
#modeb(2,p2h(var(pigeon),var(hole))).
#modeb(2,pigeon(var(pigeon))).
#modeb(2,hole(var(hole))).
#modeb(1,maxhole(var(hole))).
#modeb(1,maxpigeon(var(pigeon))).
#modeb(2,lessThan(var(hole),var(hole)),(anti_reflexive)).
#modeb(2,lessThan(var(pigeon),var(pigeon)),(anti_reflexive)).
#modeb(2,lessThan(var(hole),var(pigeon))).
#modeb(2,lessThan(var(pigeon),var(hole))).
";

/// The two constraints known to break the pigeon/hole symmetry on square
/// instances down to a single solution.
pub const PIGEONHOLE_REFERENCE_CONSTRAINTS: &str = "\
:- p2h(X,Y), lessThan(Z,Y), maxpigeon(X).
:- p2h(X,Y), lessThan(X,Y), lessThan(Y,Z).
";

pub fn pigeonhole_encoding() -> Program {
    parse_program(PIGEONHOLE_ENCODING).expect("built-in encoding parses")
}

pub fn pigeonhole_aux() -> Program {
    parse_program(PIGEONHOLE_AUX).expect("built-in aux program parses")
}

/// Instance facts `pigeon(p). hole(h).`
pub fn pigeonhole_instance(pigeons: i64, holes: i64) -> Program {
    Program::from_facts(vec![
        GroundAtom::ints("pigeon", &[pigeons]),
        GroundAtom::ints("hole", &[holes]),
    ])
}

pub fn pigeonhole_name(pigeons: i64, holes: i64) -> String {
    format!("p{pigeons}h{holes}")
}
