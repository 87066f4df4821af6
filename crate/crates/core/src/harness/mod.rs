//! Problem ingestion, the verification pipeline and report emission.

pub mod pipeline;
pub mod problem;
pub mod report;

pub use pipeline::{
    build_modules, evaluate_weight_function, finite_difference_check, run, run_pipeline, Command, PipelineConfig,
};
pub use problem::{ProblemSpec, Sites};
pub use report::{emit_report, Check, Format, Verdict, VerificationReport};

/// Exit status for a finished report: 0 when nothing failed, 1 otherwise.
pub fn exit_code(report: &VerificationReport) -> i32 {
    i32::from(report.any_failed())
}

/// Exit status for input errors.
pub const EXIT_INPUT_ERROR: i32 = 2;
