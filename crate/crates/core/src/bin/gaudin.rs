use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gaudin::harness::{
    emit_report, evaluate_weight_function, exit_code, run, Command, Format, PipelineConfig, ProblemSpec,
    EXIT_INPUT_ERROR,
};

#[derive(Parser)]
#[command(name = "gaudin", version, about = "Gaudin model workbench: critical points, Bethe vectors, verification")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Find critical orbits of the master function.
    Solve(Common),
    /// Run the full verification pipeline.
    Verify(Common),
    /// Eigenvalue tables G_ij of the Bethe algebra per orbit.
    Spectrum(Common),
    /// Evaluate the weight function at a point.
    Weightfn {
        #[command(flatten)]
        common: Common,
        /// Coordinate groups as JSON, e.g. '[["1/2"]]' or '[[[0.5,0.1]]]'.
        #[arg(long)]
        point: String,
    },
    /// Exact algebraic checks without the solver.
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// Problem JSON file.
    #[arg(long)]
    problem: PathBuf,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    tol_residual: Option<f64>,
    #[arg(long)]
    tol_dedup: Option<f64>,
    #[arg(long)]
    jmax: Option<usize>,
    #[arg(long)]
    precision: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    max_terms: Option<u128>,
}

impl Common {
    fn load(&self) -> gaudin::Result<(ProblemSpec, PipelineConfig)> {
        let mut spec = ProblemSpec::from_path(&self.problem)?;
        let s = &mut spec.solver;
        if let Some(x) = self.seed {
            s.seed = x;
        }
        if let Some(x) = self.starts {
            s.starts = Some(x);
        }
        if let Some(x) = self.tol_residual {
            s.tol_residual = x;
        }
        if let Some(x) = self.tol_dedup {
            s.tol_dedup = x;
        }
        if let Some(x) = &self.precision {
            if x != "double" {
                return Err(gaudin::GaudinError::Schema(format!(
                    "unsupported precision {x:?} (only \"double\")"
                )));
            }
            s.precision = x.clone();
        }
        let mut cfg = PipelineConfig {
            j_max: self.jmax,
            ..PipelineConfig::default()
        };
        if let Some(m) = self.max_terms {
            cfg.max_terms = m;
        }
        if let Some(t) = self.threads {
            // only fails if a pool already exists, which cannot happen here
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
        Ok((spec, cfg))
    }

    fn write(&self, text: &str) -> std::io::Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, command) = match &cli.command {
        Cmd::Solve(c) => (c, Command::Solve),
        Cmd::Verify(c) => (c, Command::Verify),
        Cmd::Spectrum(c) => (c, Command::Spectrum),
        Cmd::Selftest(c) => (c, Command::Selftest),
        Cmd::Weightfn { common, point } => return weightfn(common, point),
    };
    let (spec, cfg) = match common.load() {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT_ERROR as u8);
        }
    };
    let report = run(&spec, &cfg, command);
    let text = match emit_report(&report, common.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = common.write(&text) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(exit_code(&report) as u8)
}

fn weightfn(common: &Common, point: &str) -> ExitCode {
    let input = common.load().and_then(|(spec, cfg)| {
        let t: serde_json::Value = serde_json::from_str(point)?;
        Ok((spec, cfg, t))
    });
    let (spec, cfg, t) = match input {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT_ERROR as u8);
        }
    };
    match evaluate_weight_function(&spec, &t, cfg.max_terms) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("json values serialize") + "\n";
            match common.write(&text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e @ (gaudin::GaudinError::PointNotInU(_) | gaudin::GaudinError::Schema(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT_ERROR as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
