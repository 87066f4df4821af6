//! The full verification pipeline on a problem file (or a built-in one),
//! printed as the text report.
//!
//!     cargo run --example verify_problem -- path/to/problem.json

use gaudin::harness::{emit_report, run_pipeline, Format, PipelineConfig, ProblemSpec};

const BUILTIN: &str = r#"{"N":1,"partitions":[[1,0],[1,0],[1,0],[1,0]],"l":[2],"z":["0","1","3","7/2"]}"#;

fn main() -> gaudin::Result<()> {
    let spec = match std::env::args().nth(1) {
        Some(path) => ProblemSpec::from_path(path.as_ref())?,
        None => ProblemSpec::from_json_str(BUILTIN)?,
    };
    let report = run_pipeline(&spec, &PipelineConfig::default());
    print!("{}", emit_report(&report, Format::Text)?);
    std::process::exit(gaudin::harness::exit_code(&report));
}
