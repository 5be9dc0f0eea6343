//! Configuration, seeded experiment runs, CSV learning curves, normalized
//! estimation bias and the verification suites.

mod bias;
pub mod cli;
mod config;
mod csv;
mod experiment;
mod verify;

pub use bias::{estimate_normalized_bias, truncation_horizon, BiasReport, BiasSettings};
pub use config::{format_seeds, parse_map, parse_seeds, serialize_map, ExperimentConfig};
pub use csv::{
    aggregate, read_curve, write_aggregate, write_bias, AggregatePoint, CurvePoint, CurveWriter, AGGREGATE_HEADER,
    BIAS_HEADER, CURVE_HEADER,
};
pub use experiment::{
    bias_file, known_settings, parse_ratios, plan, resolve, run_bias_experiment, run_experiment, run_seed, seed_file,
    sweep, AlgoKind, EnvKind, ExperimentOutcome, RunPlan, SeedSummary,
};
pub use verify::{
    buffer, convergence, corollary1, gradients, lemma1, run_suite, stability, theorem1_with, theorem5, Check,
    ExpansionFn, Faults, Suite, SuiteReport, CONVERGENCE_SCHEDULE, CONVERGENCE_STEPS, CONVERGENCE_TOLERANCE,
};
