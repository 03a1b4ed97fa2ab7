#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symlift_core::dominance::{label_instance, make_gen_example, Example, Label, LabelOptions, PartialInterpretation, Weight};
use symlift_core::instances::{pigeonhole_aux, pigeonhole_encoding, pigeonhole_instance, PIGEONHOLE_BIAS};
use symlift_core::learner::{
    accepts, emit_ilasp_task, enumerate_space, learn, parse_las, parse_modes, HypothesisSpace, LearnConfig, LearningTask,
    Scoring,
};
use symlift_core::program::{ground, parse_atom, parse_program, Program};
use symlift_core::solver::{enumerate_answer_sets, EnumConfig};
use symlift_core::symmetry::{build_symmetry_graph, compose, find_automorphisms, invert, Permutation};
use symlift_core::Error;

pub const PERMUTATION_TRIPLES: usize = 1000;
pub const SOLVER_CORPUS: usize = 300;
pub const MAX_CHOICE_ATOMS: usize = 12;
pub const LEARNER_TASKS: usize = 40;
pub const MAX_CANDIDATES: usize = 12;

fn random_perm(rng: &mut ChaCha8Rng, n: u32) -> Permutation {
    let mut images: Vec<u32> = (0..n).collect();
    images.shuffle(rng);
    Permutation::from_map((0..n).zip(images).collect())
}

/// Associativity, inverses, identity and the composition order, checked
/// pointwise on random permutations of up to 10 points.
pub fn group_laws() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let id = Permutation::identity();
    for t in 0..PERMUTATION_TRIPLES {
        let n = rng.gen_range(1..=10);
        let (a, b, c) = (random_perm(&mut rng, n), random_perm(&mut rng, n), random_perm(&mut rng, n));
        let left = compose(&compose(&a, &b), &c);
        let right = compose(&a, &compose(&b, &c));
        if left != right {
            return Err(format!("triple {t}: associativity fails for {a}, {b}, {c}"));
        }
        for x in 0..n {
            if compose(&a, &b).image(x) != a.image(b.image(x)) {
                return Err(format!("triple {t}: compose({a}, {b}) does not apply {b} first"));
            }
        }
        if !compose(&a, &invert(&a)).is_identity() || !compose(&invert(&a), &a).is_identity() {
            return Err(format!("triple {t}: {a} times its inverse is not the identity"));
        }
        if compose(&a, &id) != a || compose(&id, &a) != a {
            return Err(format!("triple {t}: identity law fails for {a}"));
        }
    }
    Ok(format!("{PERMUTATION_TRIPLES} triples"))
}

#[derive(Debug, Clone)]
enum PHead {
    None,
    Atom(usize),
    Choice(Vec<usize>, usize),
}

#[derive(Debug, Clone)]
struct PRule {
    head: PHead,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

#[derive(Debug, Clone)]
struct PProgram {
    atoms: usize,
    rules: Vec<PRule>,
}

impl PProgram {
    fn text(&self) -> String {
        let name = |a: &usize| format!("a{a}");
        let mut out = String::new();
        for r in &self.rules {
            let head = match &r.head {
                PHead::None => String::new(),
                PHead::Atom(a) => name(a),
                PHead::Choice(es, n) => format!("{{{}}} = {n}", es.iter().map(name).collect::<Vec<_>>().join("; ")),
            };
            let body: Vec<String> = r.pos.iter().map(name).chain(r.neg.iter().map(|a| format!("not {}", name(a)))).collect();
            match (head.is_empty(), body.is_empty()) {
                (_, true) => out.push_str(&format!("{head}.\n")),
                (true, false) => out.push_str(&format!(":- {}.\n", body.join(", "))),
                (false, false) => out.push_str(&format!("{head} :- {}.\n", body.join(", "))),
            }
        }
        out
    }

    fn choice_atoms(&self) -> BTreeSet<usize> {
        self.rules
            .iter()
            .filter_map(|r| match &r.head {
                PHead::Choice(es, _) => Some(es.iter().copied()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// Stable models by the reduct definition over every subset of atoms.
    fn brute_force(&self) -> BTreeSet<BTreeSet<String>> {
        let mut out = BTreeSet::new();
        for mask in 0u32..(1 << self.atoms) {
            let holds = |a: usize| mask >> a & 1 == 1;
            let body = |r: &PRule| r.pos.iter().all(|&a| holds(a)) && r.neg.iter().all(|&a| !holds(a));
            let mut model = true;
            let mut reduct: Vec<(usize, &[usize])> = Vec::new();
            for r in &self.rules {
                let fires = body(r);
                match &r.head {
                    PHead::None => model &= !fires,
                    PHead::Atom(h) => {
                        model &= !fires || holds(*h);
                        if r.neg.iter().all(|&a| !holds(a)) {
                            reduct.push((*h, &r.pos));
                        }
                    }
                    PHead::Choice(es, n) => {
                        if fires {
                            model &= es.iter().filter(|&&a| holds(a)).count() == *n;
                        }
                        if r.neg.iter().all(|&a| !holds(a)) {
                            for &e in es.iter().filter(|&&a| holds(a)) {
                                reduct.push((e, &r.pos));
                            }
                        }
                    }
                }
            }
            if !model {
                continue;
            }
            let mut least = vec![false; self.atoms];
            loop {
                let mut changed = false;
                for (h, pos) in &reduct {
                    if !least[*h] && pos.iter().all(|&a| least[a]) {
                        least[*h] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            if (0..self.atoms).all(|a| least[a] == holds(a)) {
                out.insert((0..self.atoms).filter(|&a| holds(a)).map(|a| format!("a{a}")).collect());
            }
        }
        out
    }
}

fn random_program(rng: &mut ChaCha8Rng) -> PProgram {
    let atoms = rng.gen_range(2..=MAX_CHOICE_ATOMS);
    let mut rules = Vec::new();
    let pick = |rng: &mut ChaCha8Rng, k: usize| {
        let mut all: Vec<usize> = (0..atoms).collect();
        all.shuffle(rng);
        all.truncate(k);
        all
    };
    for _ in 0..rng.gen_range(1..=3) {
        let k = rng.gen_range(1..=atoms.min(4));
        let es = pick(rng, k);
        let n = rng.gen_range(0..=k);
        let pos = if rng.gen_bool(0.3) { pick(rng, 1) } else { vec![] };
        let neg = if rng.gen_bool(0.2) { pick(rng, 1) } else { vec![] };
        rules.push(PRule {
            head: PHead::Choice(es, n),
            pos,
            neg,
        });
    }
    for _ in 0..rng.gen_range(0..=5) {
        let len = rng.gen_range(1..=3);
        let body = pick(rng, len);
        let split = rng.gen_range(0..=body.len());
        let head = PHead::Atom(rng.gen_range(0..atoms));
        rules.push(PRule {
            head,
            pos: body[..split].to_vec(),
            neg: body[split..].to_vec(),
        });
    }
    for _ in 0..rng.gen_range(0..=2) {
        let len = rng.gen_range(1..=2);
        let body = pick(rng, len);
        let split = rng.gen_range(0..=body.len());
        rules.push(PRule {
            head: PHead::None,
            pos: body[..split].to_vec(),
            neg: body[split..].to_vec(),
        });
    }
    PProgram { atoms, rules }
}

/// The solver agrees with a subset scan on every program of a generated
/// corpus.
pub fn solver_brute_force() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut total = 0;
    for k in 0..SOLVER_CORPUS {
        let p = random_program(&mut rng);
        assert!(p.choice_atoms().len() <= MAX_CHOICE_ATOMS);
        let text = p.text();
        let program = parse_program(&text).map_err(|e| format!("program {k}: {e}\n{text}"))?;
        let gp = ground(&program).map_err(|e| format!("program {k}: {e}\n{text}"))?;
        let found = enumerate_answer_sets(&gp, &EnumConfig::default()).map_err(|e| format!("program {k}: {e}"))?;
        let ours: BTreeSet<BTreeSet<String>> = found
            .answer_sets
            .iter()
            .map(|i| i.atoms(&gp.atom_table).map(|a| a.to_string()).collect())
            .collect();
        if ours.len() != found.answer_sets.len() {
            return Err(format!("program {k}: duplicate answer sets\n{text}"));
        }
        let expected = p.brute_force();
        if ours != expected {
            return Err(format!("program {k}: solver {ours:?} vs brute force {expected:?}\n{text}"));
        }
        total += expected.len();
    }
    Ok(format!("{SOLVER_CORPUS} programs, {total} answer sets"))
}

const LEARNER_BACKGROUND: &str = "d(1). d(2). d(3). one(1).\n{p(X) : d(X)} = 1.\n{q(X) : d(X)} = 1.\n";
const LEARNER_MODES: &str = "#modeb(1,p(var(t))).\n#modeb(1,q(var(t))).\n#modeb(1,one(var(t))).\n";

fn random_task(rng: &mut ChaCha8Rng) -> LearningTask {
    let mut space = HypothesisSpace::new(parse_modes(LEARNER_MODES).unwrap());
    space.max_body = 2;
    space.max_vars = rng.gen_range(1..=2);
    let mut examples = Vec::new();
    for k in 0..rng.gen_range(2..=5) {
        let mut pi = PartialInterpretation::default();
        pi.inclusions.insert(parse_atom(&format!("p({})", rng.gen_range(1..=3))).unwrap());
        if rng.gen_bool(0.7) {
            pi.inclusions.insert(parse_atom(&format!("q({})", rng.gen_range(1..=3))).unwrap());
        }
        if rng.gen_bool(0.3) {
            pi.exclusions.insert(parse_atom(&format!("q({})", rng.gen_range(1..=3))).unwrap());
        }
        let label = if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative };
        let weight = if rng.gen_bool(0.25) { Weight::Infinite } else { Weight::Finite(rng.gen_range(1..=4)) };
        examples.push(Example {
            id: format!("e{k}"),
            label,
            weight,
            pi,
            context: Program::new(),
        });
    }
    let scoring = if rng.gen_bool(0.5) {
        Scoring::literals()
    } else {
        Scoring::weighted(BTreeMap::from([("q".to_string(), 2)]))
    };
    LearningTask {
        background: parse_program(LEARNER_BACKGROUND).unwrap(),
        abk: Program::new(),
        examples,
        space,
        scoring,
    }
}

/// Best objective over every subset of the space, each example checked by
/// solving the background with that subset added.
fn exhaustive_optimum(task: &LearningTask) -> Option<u64> {
    let space = enumerate_space(&task.space, &task.scoring, usize::MAX).unwrap();
    let cfg = EnumConfig::default();
    let mut best: Option<u64> = None;
    for mask in 0u32..(1 << space.len()) {
        let chosen: Vec<_> = (0..space.len()).filter(|i| mask >> i & 1 == 1).collect();
        let mut program = task.background.clone();
        let mut cost = 0;
        for &i in &chosen {
            program.rules.push(space[i].to_rule());
            cost += space[i].cost;
        }
        let mut feasible = true;
        for e in &task.examples {
            let covered = accepts(&program, e, &cfg).unwrap() == e.is_positive();
            if !covered {
                match e.weight {
                    Weight::Infinite => feasible = false,
                    Weight::Finite(w) => cost += w,
                }
            }
        }
        if feasible && best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
    }
    best
}

/// `learn` reaches the exhaustive optimum on random tasks whose space has
/// at most 12 candidates.
pub fn learner_optimality() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut checked = 0;
    let mut infeasible = 0;
    while checked < LEARNER_TASKS {
        let task = random_task(&mut rng);
        let space = enumerate_space(&task.space, &task.scoring, usize::MAX).unwrap();
        if space.len() > MAX_CANDIDATES {
            return Err(format!("space of {} candidates exceeds {MAX_CANDIDATES}", space.len()));
        }
        checked += 1;
        let oracle = exhaustive_optimum(&task);
        match (learn(&task, &LearnConfig::default()), oracle) {
            (Ok(h), Some(best)) => {
                if h.objective() != best {
                    return Err(format!("task {checked}: learn objective {} vs optimum {best}\n{}", h.objective(), emit_ilasp_task(&task)));
                }
                let mut program = task.background.clone();
                program.extend(&h.to_program());
                let mut penalty = 0;
                for e in &task.examples {
                    if accepts(&program, e, &EnumConfig::default()).unwrap() != e.is_positive() {
                        penalty += e.weight.finite().ok_or_else(|| format!("task {checked}: hard example {} uncovered", e.id))?;
                    }
                }
                if penalty != h.penalty() {
                    return Err(format!("task {checked}: reported penalty {} but actual {penalty}", h.penalty()));
                }
            }
            (Err(Error::UnsatisfiableTask { .. }), None) => infeasible += 1,
            (got, want) => return Err(format!("task {checked}: learn gave {got:?}, optimum {want:?}\n{}", emit_ilasp_task(&task))),
        }
    }
    Ok(format!("{checked} tasks, {infeasible} infeasible"))
}

fn p3h3_task() -> LearningTask {
    let facts = pigeonhole_instance(3, 3);
    let gp = ground(&pigeonhole_encoding().union(&facts)).unwrap();
    let gs = find_automorphisms(&build_symmetry_graph(&gp), 1_000_000).generators;
    let mut examples = label_instance(&gp, &gs, &EnumConfig::default(), &facts, &LabelOptions::default()).unwrap();
    examples.push(make_gen_example("gen1", &pigeonhole_instance(2, 3)));
    LearningTask::new(
        pigeonhole_encoding().union(&pigeonhole_aux()),
        examples,
        HypothesisSpace::new(parse_modes(PIGEONHOLE_BIAS).unwrap()),
    )
}

/// Emitting a task twice, or building it twice from scratch, gives the
/// same bytes, and the text parses back to the same task.
pub fn emit_byte_stability() -> Result<String, String> {
    let a = p3h3_task();
    let b = p3h3_task();
    let first = emit_ilasp_task(&a);
    if first != emit_ilasp_task(&a) {
        return Err("two emissions of one task differ".into());
    }
    if first != emit_ilasp_task(&b) {
        return Err("two independently built tasks emit different bytes".into());
    }
    let parsed = parse_las(&first).map_err(|e| e.to_string())?;
    if emit_ilasp_task(&parsed) != first {
        return Err("parse/emit round trip changed the text".into());
    }
    Ok(format!("{} bytes", first.len()))
}
