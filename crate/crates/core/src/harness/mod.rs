//! Evaluation harness: dataset and profile I/O, synthetic corpus
//! generation, experiment execution, and report emission.

mod corpus;
mod dataset;
mod report;
mod runner;

pub use corpus::{generate_corpus, CorpusSpec};
pub use dataset::{load_dataset, load_profiles, write_dataset, write_profiles, Dataset};
pub use report::{emit_csv, emit_json, emit_scaling_csv, load_json, render_table};
pub use runner::{latency_scaling, repeat_seed, run_experiment, ProblemFailure, RunReport, ScalingPoint};
