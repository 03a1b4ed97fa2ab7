use symlift_core::instances::{pigeonhole_aux, pigeonhole_encoding, pigeonhole_instance, pigeonhole_name};
use symlift_core::pipeline::{
    bench, csv_string, order_sensitivity, run_framework, run_incremental, satisfiable, Instance, PipelineConfig,
};
use symlift_core::program::{ground, Program, Term};
use symlift_core::solver::{enumerate_answer_sets, EnumConfig};
use symlift_core::Error;

fn manifest() -> PipelineConfig {
    PipelineConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/pigeonhole/manifest.json")).unwrap()
}

fn ph(p: i64, h: i64) -> Instance {
    Instance::new(pigeonhole_name(p, h), pigeonhole_instance(p, h))
}

fn count_with(abk: &Program, p: i64, h: i64) -> usize {
    let program = pigeonhole_encoding().union(&pigeonhole_aux()).union(abk).union(&pigeonhole_instance(p, h));
    enumerate_answer_sets(&ground(&program).unwrap(), &EnumConfig::default()).unwrap().answer_sets.len()
}

#[test]
fn manifest_loads_bundled_files() {
    let cfg = manifest();
    assert_eq!(cfg.instances.len(), 1);
    assert_eq!(cfg.instances[0].name, "p3h3");
    assert_eq!(cfg.gen[0].name, "p2h3");
    assert_eq!(cfg.validation.len(), 3);
    assert_eq!(cfg.space.modes.len(), 9);
    assert_eq!(cfg.problem, pigeonhole_encoding());
}

#[test]
fn p3h3_end_to_end() {
    let mut cfg = manifest();
    cfg.validation = vec![ph(4, 4), ph(3, 4)];
    let report = run_framework(&cfg).unwrap();
    assert_eq!(report.rounds.len(), 1);
    assert_eq!(report.abk.len(), 2);
    assert_eq!(report.instances[0].answer_sets, 6);
    assert_eq!(report.instances[0].negatives, 5);
    let abk = report.abk.to_program();
    for n in 3..=5 {
        assert_eq!(count_with(&abk, n, n), 1, "n = {n}");
    }
    for v in &cfg.validation {
        let p = cfg.problem.union(&cfg.aux_background).union(&abk).union(&v.facts);
        assert!(satisfiable(&p, cfg.limits.node_budget).unwrap());
    }
}

#[test]
fn abk_has_no_ground_constants() {
    let report = run_framework(&manifest()).unwrap();
    for e in &report.abk.entries {
        assert!(e.rule.head.is_none());
        for a in e.rule.atoms() {
            assert!(a.args.iter().all(|t| matches!(t, Term::Var(_))), "{}", e.rule);
        }
    }
}

#[test]
fn failing_validation_moves_to_gen() {
    let mut cfg = manifest();
    cfg.instances = vec![ph(2, 2)];
    cfg.gen = vec![];
    cfg.validation = vec![ph(3, 3)];
    let report = run_framework(&cfg).unwrap();
    assert_eq!(report.rounds.len(), 2);
    assert_eq!(report.rounds[0].failing, vec!["p3h3"]);
    assert!(report.rounds[1].failing.is_empty());
    assert_eq!(report.rounds[1].gen, vec!["p3h3"]);
    assert_ne!(report.rounds[0].hypothesis, report.rounds[1].hypothesis);
    assert!(count_with(&report.abk.to_program(), 3, 3) > 0);
}

#[test]
fn max_rounds_names_last_failing_instance() {
    let mut cfg = manifest();
    cfg.instances = vec![ph(2, 2)];
    cfg.gen = vec![];
    cfg.validation = vec![ph(3, 3)];
    cfg.max_rounds = 1;
    match run_framework(&cfg) {
        Err(Error::MaxRounds { rounds: 1, instance }) => assert_eq!(instance, "p3h3"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn empty_s_is_rejected() {
    let mut cfg = manifest();
    cfg.instances.clear();
    assert!(matches!(run_framework(&cfg), Err(Error::Config(_))));
    assert!(matches!(run_incremental(&cfg), Err(Error::Config(_))));
}

#[test]
fn zero_rounds_rejected() {
    let mut cfg = manifest();
    cfg.max_rounds = 0;
    assert!(matches!(run_framework(&cfg), Err(Error::Config(_))));
}

#[test]
fn validation_overlapping_gen_rejected() {
    let mut cfg = manifest();
    cfg.validation.push(ph(2, 3));
    assert!(matches!(run_framework(&cfg), Err(Error::Config(_))));
}

#[test]
fn deterministic() {
    let cfg = manifest();
    assert_eq!(run_framework(&cfg).unwrap(), run_framework(&cfg).unwrap());
}

#[test]
fn incremental_single_instance_matches_framework() {
    let cfg = manifest();
    let inc = run_incremental(&cfg).unwrap();
    let full = run_framework(&cfg).unwrap();
    assert_eq!(inc.abk, full.abk);
    assert_eq!(inc.subtasks, vec![full]);
}

#[test]
fn incremental_second_instance_adds_nothing() {
    let mut cfg = manifest();
    cfg.instances.push(ph(4, 4));
    let inc = run_incremental(&cfg).unwrap();
    assert_eq!(inc.subtasks.len(), 2);
    let second = &inc.subtasks[1];
    assert!(second.learned.is_empty());
    // The single (4,4) answer set surviving the ABK is not the lex leader, so
    // its negative stays uncovered: killing it would make (4,4) unsatisfiable.
    assert_eq!(second.rounds[0].uncovered.len(), 1);
    assert_eq!(second.instances[0].dropped_positives, 1);
    assert_eq!(inc.abk.len(), 2);
    assert!(inc.abk.entries.iter().all(|e| e.source == "p3h3"));
}

#[test]
fn order_report_flags_difference() {
    let mut cfg = manifest();
    cfg.instances.push(ph(4, 4));
    let o = order_sensitivity(&cfg).unwrap();
    assert!(o.forward_valid && o.reversed_valid);
    assert!(o.differs);
    assert_eq!(o.forward.len(), 2);
    assert!(o.reversed.iter().any(|r| !o.forward.contains(r)));
}

#[test]
fn bench_counts_and_header() {
    let mut cfg = manifest();
    cfg.bench = vec![ph(4, 4), ph(6, 5)];
    let abk = run_framework(&cfg).unwrap().abk.to_program();
    let rows = bench(&cfg, &abk).unwrap();
    assert_eq!(rows[0].base.models(), Some(24));
    assert_eq!(rows[0].abk.models(), Some(1));
    assert_eq!(rows[0].clasp_pi.models(), Some(1));
    assert_eq!(rows[1].base.models(), Some(0));
    assert!(rows[1].abk.nodes().unwrap() < rows[1].base.nodes().unwrap());
    let text = csv_string(&rows).unwrap();
    assert!(text.starts_with("instance,sat,ABK,BASE,SBASS,CLASP_PI,"));
    assert!(text.lines().nth(2).unwrap().starts_with("p6h5,no,"));

    cfg.bench.clear();
    assert_eq!(csv_string(&bench(&cfg, &abk).unwrap()).unwrap().lines().count(), 1);
}

#[test]
fn bench_timeout_cells() {
    let mut cfg = manifest();
    cfg.bench = vec![ph(5, 5)];
    cfg.bench_budget = Some(3);
    let rows = bench(&cfg, &Program::new()).unwrap();
    let line = csv_string(&rows).unwrap().lines().nth(1).unwrap().to_string();
    let cells: Vec<&str> = line.split(',').collect();
    assert_eq!(cells[1], "?");
    assert_eq!(cells[3], "TO");
    assert_eq!(cells[4], "TO");
}

#[test]
fn bench_node_columns_are_stable() {
    let mut cfg = manifest();
    cfg.bench = vec![ph(3, 3), ph(5, 4)];
    let abk = run_framework(&cfg).unwrap().abk.to_program();
    let strip = |text: String| text.lines().map(|l| l.split(',').take(9).collect::<Vec<_>>().join(",")).collect::<Vec<_>>();
    let a = strip(csv_string(&bench(&cfg, &abk).unwrap()).unwrap());
    let b = strip(csv_string(&bench(&cfg, &abk).unwrap()).unwrap());
    assert_eq!(a, b);
}
