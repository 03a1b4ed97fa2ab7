use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use symlift_core::dominance::{label_instance, LabelOptions};
use symlift_core::learner::{learn, parse_las, render_example, LearnConfig, Scoring};
use symlift_core::pipeline::{
    bench, build_task, emit_ilasp_task, order_sensitivity, parse_weights, read_file, run_framework, run_incremental, write_csv,
    ActiveBackground, PipelineConfig,
};
use symlift_core::program::smodels::write_smodels;
use symlift_core::program::{ground, parse_program, GroundProgram, Program};
use symlift_core::sbc::emit_lex_leader;
use symlift_core::solver::{enumerate_answer_sets, EnumConfig};
use symlift_core::symmetry::{build_symmetry_graph, find_automorphisms, group_closure, DEFAULT_AUTOMORPHISM_BUDGET};
use symlift_core::Error;

#[derive(Parser)]
#[command(name = "symlift", version, about = "Learn first-order symmetry breaking constraints for ASP programs")]
struct Cli {
    /// JSON manifest for run, run-incremental, emit-ilasp and bench.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Search node budget.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the ground program of the given files.
    Ground {
        files: Vec<PathBuf>,
        /// Write the numeric smodels format instead.
        #[arg(long)]
        smodels: bool,
    },
    /// Enumerate answer sets.
    Solve {
        files: Vec<PathBuf>,
        /// Stop after this many answer sets (0 = all).
        #[arg(long, default_value_t = 0)]
        cap: usize,
        #[arg(long)]
        stats: bool,
    },
    /// Print irredundant symmetry generators.
    Symm { files: Vec<PathBuf> },
    /// Print ground lex-leader constraints for the detected symmetries.
    Sbc {
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the labelled examples of one instance.
    Label { files: Vec<PathBuf> },
    /// Write the first-round learning task of the manifest.
    EmitIlasp {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn constraints from an ILASP-style task file.
    Learn {
        task: PathBuf,
        #[arg(long)]
        max_body: Option<usize>,
        #[arg(long)]
        max_vars: Option<usize>,
        /// JSON object of per-predicate literal costs.
        #[arg(long)]
        scoring: Option<PathBuf>,
    },
    /// Run the framework rounds on the manifest.
    Run {
        /// Write the resulting ABK here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn one instance of S at a time.
    RunIncremental {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also run S in reverse order and compare.
        #[arg(long)]
        order_report: bool,
    },
    /// Benchmark the manifest's bench instances.
    Bench {
        /// Learned constraints to use; learned by a framework run when omitted.
        #[arg(long)]
        abk: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_program(files: &[PathBuf]) -> anyhow::Result<Program> {
    if files.is_empty() {
        bail!("no input files");
    }
    let mut p = Program::new();
    for f in files {
        p.extend(&parse_program(&read_file(f)?).with_context(|| f.display().to_string())?);
    }
    Ok(p)
}

fn load_ground(files: &[PathBuf]) -> anyhow::Result<(Program, GroundProgram)> {
    let p = load_program(files)?;
    let gp = ground(&p)?;
    Ok((p, gp))
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| path.display().to_string()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl Cli {
    fn config(&self) -> anyhow::Result<PipelineConfig> {
        let Some(path) = &self.manifest else {
            bail!("this command needs --manifest FILE");
        };
        let mut cfg = PipelineConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(budget) = self.budget {
            cfg.limits.node_budget = budget;
            cfg.bench_budget = Some(budget);
        }
        Ok(cfg)
    }

    fn enum_config(&self, cap: usize) -> EnumConfig {
        EnumConfig {
            cap,
            seed: self.seed.unwrap_or(0),
            node_budget: self.budget.unwrap_or(EnumConfig::default().node_budget),
        }
    }

    fn symm_budget(&self) -> u64 {
        self.budget.unwrap_or(DEFAULT_AUTOMORPHISM_BUDGET)
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Ground { files, smodels } => {
            let (_, gp) = load_ground(files)?;
            if *smodels {
                print!("{}", write_smodels(&gp));
            } else {
                print!("{gp}");
            }
        }
        Command::Solve { files, cap, stats } => {
            let (_, gp) = load_ground(files)?;
            let result = enumerate_answer_sets(&gp, &cli.enum_config(*cap))?;
            for (k, i) in result.answer_sets.iter().enumerate() {
                println!("Answer {}: {}", k + 1, i.render(&gp.atom_table));
            }
            println!("{}", if result.answer_sets.is_empty() { "UNSATISFIABLE" } else { "SATISFIABLE" });
            if *stats {
                println!("Models: {}", result.answer_sets.len());
                println!("Nodes: {}", result.nodes);
            }
        }
        Command::Symm { files } => {
            let (_, gp) = load_ground(files)?;
            let auts = find_automorphisms(&build_symmetry_graph(&gp), cli.symm_budget());
            for g in auts.generators.generators() {
                println!("{}", g.render(&gp.atom_table));
            }
            println!("% generators: {}", auts.generators.len());
            match group_closure(&auts.generators, symlift_core::symmetry::DEFAULT_CLOSURE_CAP) {
                Ok(group) => println!("% group order: {}", group.len()),
                Err(_) => println!("% group order: above closure cap"),
            }
            println!("% search nodes: {}", auts.nodes);
            if !auts.complete {
                println!("% search incomplete");
            }
        }
        Command::Sbc { files, out } => {
            let (_, gp) = load_ground(files)?;
            let auts = find_automorphisms(&build_symmetry_graph(&gp), cli.symm_budget());
            write_output(out.as_deref(), &emit_lex_leader(&auts.generators, &gp).to_string())?;
        }
        Command::Label { files } => {
            let (p, gp) = load_ground(files)?;
            let auts = find_automorphisms(&build_symmetry_graph(&gp), cli.symm_budget());
            let facts = Program::from_facts(p.facts.clone());
            for e in label_instance(&gp, &auts.generators, &cli.enum_config(0), &facts, &LabelOptions::default())? {
                println!("{}", render_example(&e));
            }
        }
        Command::EmitIlasp { out } => {
            let cfg = cli.config()?;
            let (task, _) = build_task(&cfg, &ActiveBackground::from_program(&cfg.abk, "input"), &cfg.gen)?;
            write_output(out.as_deref(), &emit_ilasp_task(&task))?;
        }
        Command::Learn {
            task,
            max_body,
            max_vars,
            scoring,
        } => {
            let mut t = parse_las(&read_file(task)?)?;
            if let Some(b) = max_body {
                t.space.max_body = *b;
            }
            if let Some(v) = max_vars {
                t.space.max_vars = *v;
            }
            if let Some(path) = scoring {
                t.scoring = Scoring::weighted(parse_weights(&read_file(path)?)?);
            }
            let mut cfg = LearnConfig::default();
            if let Some(b) = cli.budget {
                cfg.node_budget = b;
            }
            let h = learn(&t, &cfg)?;
            for c in &h.constraints {
                println!("{c}");
            }
            println!("% cost {} penalty {}", h.total_cost, h.penalty());
            for (id, w) in &h.uncovered {
                println!("% uncovered {id} ({w})");
            }
        }
        Command::Run { out } => {
            let cfg = cli.config()?;
            let report = run_framework(&cfg)?;
            for r in &report.rounds {
                eprintln!("round {}: cost {}, failing [{}]", r.round, r.cost, r.failing.join(", "));
            }
            write_output(out.as_deref(), &report.abk.to_string())?;
        }
        Command::RunIncremental { out, order_report } => {
            let cfg = cli.config()?;
            let report = run_incremental(&cfg)?;
            for (s, sub) in cfg.instances.iter().zip(&report.subtasks) {
                let learned = sub.learned.len();
                eprintln!("{}: {} rounds, {} new constraints", s.name, sub.rounds.len(), learned);
            }
            write_output(out.as_deref(), &report.abk.to_string())?;
            if *order_report {
                let o = order_sensitivity(&cfg)?;
                println!("% order sensitive: {}", o.differs);
                println!("% forward valid: {}, reversed valid: {}", o.forward_valid, o.reversed_valid);
                for r in &o.reversed {
                    println!("% reversed: {r}");
                }
            }
        }
        Command::Bench { abk, out } => {
            let cfg = cli.config()?;
            let abk = match abk {
                Some(path) => parse_program(&read_file(path)?)?,
                None => run_framework(&cfg)?.abk.to_program(),
            };
            let rows = bench(&cfg, &abk)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(path).with_context(|| path.display().to_string())?;
                    write_csv(&rows, file)?;
                }
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Budget { .. } | Error::SearchBudget { .. } | Error::GroupTooLarge { .. } | Error::Indeterminate { .. }) => 2,
        Some(
            Error::Syntax { .. } | Error::Unsafe { .. } | Error::ArityMismatch { .. } | Error::UnknownAtom(_) | Error::Json(_),
        ) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
