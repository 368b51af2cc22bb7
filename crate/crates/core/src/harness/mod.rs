//! Bound formulas, the improvement region, seeded experiments and sweeps,
//! and their CSV and config I/O.

pub mod bounds;
pub mod experiment;
pub mod io;
pub mod region;
pub mod verify;

pub use bounds::{bfkmm_condition, bound_value, BoundInputs, BoundName, BoundSpec, BoundValue};
pub use experiment::{
    average_sweep, evaluate_gauss, evaluate_kloosterman, generated_char_weights, records_for,
    run_experiment, sort_records, Evaluation, Experiment, ExperimentRecord, Family, Sweep,
    SweepResult,
};
pub use io::{
    emit_csv, load_config, parse_records, read_csv, records_to_string, save_config, RunPlan,
    CSV_HEADER,
};
pub use region::{
    exponents, improvement_region, region_slacks, RegionClass, REGION_TOLERANCE, REGION_VERTICES,
};
pub use verify::{run_verify, Check};
