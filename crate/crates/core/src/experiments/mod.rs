//! Generators, sampling experiments, composite pipelines and the bound battery.

mod battery;
mod generate;
mod montecarlo;
mod pipelines;

pub use battery::{
    bound_battery, resolve_ids, resolve_theorem, run_check, BatteryConfig, BatteryOutcome, CheckError, FamilySpec,
    Member, TheoremInfo, THEOREMS,
};
pub use generate::{generate, ElementSpec, GenSpec, Generated, Progression, ProgressionSpec};
pub use montecarlo::{
    concentration_mc, concentration_mc_with, trial_rng, wilson_interval, ConcentrationReport, SpanWitness, TailPoint,
};
pub use pipelines::{
    better_tk_pipeline, dilate_growth_measure, distinct_fibers, small_dim_pipeline, Candidate, DilateReport,
    PipelineConfig, PipelineResult, SmallDimVariant, S_CAP,
};
