//! Experiment runner: configs, single runs with full records, and the
//! published table rosters with CSV and aligned-text output.

mod config;
mod run;
mod table;

pub use config::{
    AlphaSource, ExperimentConfig, InnerSteps, MethodSpec, ProblemSpec, SolverKind, SplittingName, SplittingSpec,
    DEFAULT_INNER_TOL,
};
pub use run::{
    error_record, execute, independent_residual, make_record, resolve_alpha, run_on, run_single, write_trace,
    ExperimentRecord, Method, Outcome,
};
pub use table::{
    records_csv, run_table, stokes_reference_alpha, structured_alpha_exp, structured_alpha_h, ParamRecord, TableId,
    TableOptions, TableResult,
};
