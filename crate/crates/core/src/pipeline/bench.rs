use std::fmt;
use std::io::Write;
use std::time::Instant;

use crate::program::{ground, Program};
use crate::sbc::emit_lex_leader;
use crate::solver::{enumerate_answer_sets, EnumConfig};
use crate::symmetry::{build_symmetry_graph, find_automorphisms_capped};
use crate::{Error, Result};

use super::manifest::{Instance, PipelineConfig};

pub const CSV_HEADER: [&str; 13] = [
    "instance",
    "sat",
    "ABK",
    "BASE",
    "SBASS",
    "CLASP_PI",
    "ABK_models",
    "BASE_models",
    "CLASP_PI_models",
    "ABK_ms",
    "BASE_ms",
    "SBASS_ms",
    "CLASP_PI_ms",
];

/// Outcome of one measured run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Done { nodes: u64, models: Option<usize> },
    Timeout,
}

impl Cell {
    pub fn nodes(&self) -> Option<u64> {
        match self {
            Cell::Done { nodes, .. } => Some(*nodes),
            Cell::Timeout => None,
        }
    }

    pub fn models(&self) -> Option<usize> {
        match self {
            Cell::Done { models, .. } => *models,
            Cell::Timeout => None,
        }
    }

    fn nodes_text(&self) -> String {
        self.nodes().map_or_else(|| "TO".into(), |n| n.to_string())
    }

    fn models_text(&self) -> String {
        match self {
            Cell::Done { models: Some(m), .. } => m.to_string(),
            _ => "TO".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sat {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Sat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sat::Yes => "yes",
            Sat::No => "no",
            Sat::Unknown => "?",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub instance: String,
    pub sat: Sat,
    pub abk: Cell,
    pub base: Cell,
    pub sbass: Cell,
    pub clasp_pi: Cell,
    pub abk_ms: u128,
    pub base_ms: u128,
    pub sbass_ms: u128,
    pub clasp_pi_ms: u128,
}

fn enumerate_cell(p: &Program, budget: u64, seed: u64) -> Result<(Cell, u128)> {
    let start = Instant::now();
    let gp = ground(p)?;
    let cfg = EnumConfig {
        cap: 0,
        seed,
        node_budget: budget,
    };
    let cell = match enumerate_answer_sets(&gp, &cfg) {
        Ok(e) => Cell::Done {
            nodes: e.nodes,
            models: Some(e.answer_sets.len()),
        },
        Err(Error::Budget { .. }) => Cell::Timeout,
        Err(e) => return Err(e),
    };
    Ok((cell, start.elapsed().as_millis()))
}

/// Measure one instance: full enumeration with the learned constraints
/// (ABK), without them (BASE), automorphism search (SBASS) and enumeration
/// with ground lex-leader constraints (CLASP_PI).
pub fn bench_instance(cfg: &PipelineConfig, abk: &Program, inst: &Instance, budget: u64) -> Result<BenchRow> {
    let base_program = cfg.problem.union(&inst.facts);
    let (base, base_ms) = enumerate_cell(&base_program, budget, cfg.seed)?;
    let with_abk = base_program.union(&cfg.aux_background).union(abk);
    let (abk_cell, abk_ms) = enumerate_cell(&with_abk, budget, cfg.seed)?;

    let start = Instant::now();
    let gp = ground(&base_program)?;
    let auts = find_automorphisms_capped(&build_symmetry_graph(&gp), budget, cfg.limits.closure_cap);
    let sbass_ms = start.elapsed().as_millis();
    let sbass = if auts.complete {
        Cell::Done {
            nodes: auts.nodes,
            models: None,
        }
    } else {
        Cell::Timeout
    };
    let start = Instant::now();
    let extension = emit_lex_leader(&auts.generators, &gp).to_program();
    let (clasp_pi, enum_ms) = enumerate_cell(&base_program.union(&extension), budget, cfg.seed)?;
    let clasp_pi_ms = start.elapsed().as_millis().max(enum_ms);

    let cells = [base, abk_cell, clasp_pi];
    let sat = if cells.iter().any(|c| c.models().is_some_and(|m| m > 0)) {
        Sat::Yes
    } else if base.models() == Some(0) {
        Sat::No
    } else {
        Sat::Unknown
    };
    Ok(BenchRow {
        instance: inst.name.clone(),
        sat,
        abk: abk_cell,
        base,
        sbass,
        clasp_pi,
        abk_ms,
        base_ms,
        sbass_ms,
        clasp_pi_ms,
    })
}

/// Benchmark every instance in `cfg.bench` under `abk`.
pub fn bench(cfg: &PipelineConfig, abk: &Program) -> Result<Vec<BenchRow>> {
    let budget = cfg.bench_budget.unwrap_or(cfg.limits.node_budget);
    cfg.bench.iter().map(|inst| bench_instance(cfg, abk, inst, budget)).collect()
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.sat.to_string(),
            r.abk.nodes_text(),
            r.base.nodes_text(),
            r.sbass.nodes_text(),
            r.clasp_pi.nodes_text(),
            r.abk.models_text(),
            r.base.models_text(),
            r.clasp_pi.models_text(),
            r.abk_ms.to_string(),
            r.base_ms.to_string(),
            r.sbass_ms.to_string(),
            r.clasp_pi_ms.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn csv_string(rows: &[BenchRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
