//! The verification report and its JSON / text renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

pub const SCHEMA: &str = "gaudin-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIPPED",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    /// The measured quantity (a residual, a rank, a count).
    pub value: Option<f64>,
    /// The threshold it was compared against.
    pub tolerance: Option<f64>,
    pub reason: String,
}

impl Check {
    /// PASS when `value < tolerance`.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let ok = value.is_finite() && value < tolerance;
        Check {
            name: name.into(),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            value: Some(finite(value)),
            tolerance: Some(tolerance),
            reason: if ok {
                String::new()
            } else {
                format!("{value:e} is not below {tolerance:e}")
            },
        }
    }

    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        let ok = value == 0.0;
        Check {
            name: name.into(),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            value: Some(finite(value)),
            tolerance: Some(0.0),
            reason: if ok {
                String::new()
            } else {
                format!("exact identity violated (residual {value:e})")
            },
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool, reason: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            value: None,
            tolerance: None,
            reason: reason.into(),
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            verdict: Verdict::Skipped,
            value: None,
            tolerance: None,
            reason: reason.into(),
        }
    }

    pub fn failed(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            verdict: Verdict::Fail,
            value: None,
            tolerance: None,
            reason: reason.into(),
        }
    }
}

/// Non-finite values would serialize as `null`; clamp them instead.
pub fn finite(x: f64) -> f64 {
    if x.is_nan() {
        f64::MAX
    } else {
        x.clamp(f64::MIN, f64::MAX)
    }
}

pub type C = [f64; 2];

pub fn c(z: num_complex::Complex64) -> C {
    [finite(z.re), finite(z.im)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleSummary {
    pub dim: usize,
    pub weight_space_dim: usize,
    pub dim_sing: usize,
    pub lambda_inf: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfCheckSummary {
    pub exact: bool,
    pub samples: usize,
    pub commutativity: f64,
    pub generator_commutation: f64,
    pub shapovalov_symmetry: f64,
    pub first_coefficient: f64,
    /// `G_1(u, t) + sum_s |lambda_s| / (u - z_s)` at a generic `t`.
    pub master_first_coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub index: usize,
    pub rep: Vec<Vec<C>>,
    pub residual: f64,
    pub hessian: C,
    pub degenerate: bool,
    pub milnor: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WronskianSummary {
    /// `h_i` as ascending coefficient lists.
    pub h: Vec<Vec<C>>,
    pub y_residual: f64,
    pub ode_residuals: Vec<f64>,
    pub identity_residuals: Vec<f64>,
    pub identity_constants: Vec<i64>,
    pub degrees_match: bool,
    /// Per site (the last entry is infinity): passed?
    pub incidence: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitChecks {
    pub index: usize,
    pub omega_norm: Option<f64>,
    /// Per `i`, max over samples of `|B_i(u) w - G_i(u) w| / |w|`.
    pub eigen_residuals: Vec<f64>,
    pub samples: usize,
    pub shapovalov_norm: Option<C>,
    pub norm_residual: Option<f64>,
    pub singular_residual: Option<f64>,
    pub wronskian: Option<WronskianSummary>,
    /// `G_ij` for `j = 1..=j_max`, when requested.
    pub spectrum: Option<Vec<Vec<C>>>,
    /// Max over `i, j` of `|B_ij w - G_ij w| / |w|` (with the spectrum).
    pub spectrum_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramSummary {
    pub matrix: Vec<Vec<C>>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tally {
    Equal,
    Shortfall,
    Excess,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Completeness {
    pub orbits_found: usize,
    pub nondegenerate: usize,
    pub dim_sing: usize,
    pub tally: Tally,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub starts: Option<usize>,
    pub tol_residual: f64,
    pub tol_dedup: f64,
    pub tol_degenerate: f64,
    pub tol_check: f64,
    pub j_max: usize,
    pub max_terms: u64,
    pub precision: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub command: String,
    pub problem: Value,
    pub exact_mode: bool,
    pub config: ConfigEcho,
    pub module: Option<ModuleSummary>,
    pub selfcheck: Option<SelfCheckSummary>,
    pub orbits: Vec<OrbitRecord>,
    pub orbit_checks: Vec<OrbitChecks>,
    pub gram: Option<GramSummary>,
    pub completeness: Option<Completeness>,
    pub checks: Vec<Check>,
    /// Stage failures, with the stage name.
    pub errors: Vec<String>,
}

impl VerificationReport {
    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Fail) || !self.errors.is_empty()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

pub fn emit_report(report: &VerificationReport, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(report)? + "\n",
        Format::Text => render_text(report),
    })
}

fn render_text(r: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} ({})", r.schema, r.command);
    let _ = writeln!(out, "problem: {}", r.problem);
    if let Some(m) = &r.module {
        let _ = writeln!(
            out,
            "module: dim {}, weight space {}, singular {}, lambda_inf {:?}",
            m.dim, m.weight_space_dim, m.dim_sing, m.lambda_inf
        );
    }
    for o in &r.orbits {
        let rep: Vec<String> = o
            .rep
            .iter()
            .map(|g| {
                g.iter()
                    .map(|[re, im]| format!("{re:.10}{im:+.10}i"))
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .collect();
        let _ = writeln!(
            out,
            "orbit {}: [{}] residual {:.2e} hessian {:.6e}{:+.6e}i{}",
            o.index,
            rep.join(" | "),
            o.residual,
            o.hessian[0],
            o.hessian[1],
            if o.degenerate { " (degenerate)" } else { "" }
        );
    }
    for c in &r.checks {
        let mut line = format!("{:<7} {}", c.verdict.to_string(), c.name);
        if let Some(v) = c.value {
            let _ = write!(line, "  value={v:.3e}");
        }
        if let Some(t) = c.tolerance {
            let _ = write!(line, "  tol={t:.1e}");
        }
        if !c.reason.is_empty() {
            let _ = write!(line, "  ({})", c.reason);
        }
        let _ = writeln!(out, "{line}");
    }
    for e in &r.errors {
        let _ = writeln!(out, "ERROR   {e}");
    }
    out
}
