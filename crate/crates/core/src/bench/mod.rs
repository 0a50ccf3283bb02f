//! Batch driver: builds the target and corrupted members of the lattice
//! family, runs both ETA variants over the selected windows and writes
//! reports.

pub mod config;
pub mod emit;
pub mod run;

pub use config::{
    ArbitrationConfig, Profile, RunConfig, Variant, VariantSelection, SCHEMA_VERSION,
};
pub use emit::{chart_svg, charts, emit, load_report, summary_table, to_csv, to_json, Format};
pub use run::{
    benchmark_observable, hopping_ring, run, stream, Bench, BenchmarkReport, RowReport,
    SimulatorAudit, SpectrumSummary, WindowReport,
};
