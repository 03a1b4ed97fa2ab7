mod common;

#[test]
fn group_laws_on_random_triples() {
    common::group_laws().unwrap();
}

#[test]
fn solver_matches_subset_scan() {
    common::solver_brute_force().unwrap();
}

#[test]
fn learner_matches_exhaustive_search() {
    common::learner_optimality().unwrap();
}

#[test]
fn emitted_tasks_are_byte_stable() {
    common::emit_byte_stability().unwrap();
}
