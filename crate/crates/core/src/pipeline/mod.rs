//! Framework rounds, incremental mode, manifests and benchmarks.
mod bench;
mod framework;
mod manifest;

pub use crate::learner::emit_ilasp_task;
pub use bench::{bench, bench_instance, csv_string, write_csv, BenchRow, Cell, Sat, CSV_HEADER};
pub use framework::{
    build_task, order_sensitivity, run_framework, run_incremental, satisfiable, AbkEntry, ActiveBackground, FrameworkReport,
    IncrementalReport, InstanceStats, OrderReport, RoundReport,
};
pub use manifest::{parse_weights, read_file, BenchSpec, Instance, InstanceSpec, Limits, Manifest, PipelineConfig};
