//! Problem files: `{"N", "partitions", "l", "z", "solver"?}`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{GaudinError, Result};
use crate::master::{GaudinProblem, SolverConfig};
use crate::repr::Partition;
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum Sites {
    /// Every site was a rational literal.
    Exact(Vec<Rational>),
    Numeric(Vec<Complex64>),
}

impl Sites {
    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            Sites::Exact(z) => z.iter().map(Scalar::to_c64).collect(),
            Sites::Numeric(z) => z.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Sites::Exact(_))
    }

    /// Rationals as `"p/q"`, complex numbers as `[re, im]`.
    pub fn to_json(&self) -> Vec<Value> {
        match self {
            Sites::Exact(z) => z.iter().map(|q| Value::String(format_rational(q))).collect(),
            Sites::Numeric(z) => z.iter().map(|c| serde_json::json!([c.re, c.im])).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub n: usize,
    pub partitions: Vec<Partition>,
    pub l: Vec<usize>,
    pub sites: Sites,
    pub solver: SolverConfig,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    #[serde(rename = "N")]
    n: usize,
    partitions: Vec<Vec<i64>>,
    l: Vec<usize>,
    z: Vec<Value>,
    #[serde(default)]
    solver: Option<SolverConfig>,
}

enum Site {
    Exact(Rational),
    Numeric(Complex64),
}

fn parse_site(v: &Value) -> Result<Site> {
    match v {
        Value::String(s) => parse_rational(s).map(Site::Exact),
        Value::Number(x) => x
            .as_f64()
            .map(|re| Site::Numeric(Complex64::new(re, 0.0)))
            .ok_or_else(|| GaudinError::Schema(format!("bad site {x}"))),
        Value::Array(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(re), Some(im)) if re.is_finite() && im.is_finite() => Ok(Site::Numeric(Complex64::new(re, im))),
            _ => Err(GaudinError::Schema(format!("site {v} is not a pair of finite numbers"))),
        },
        _ => Err(GaudinError::Schema(format!("site {v} must be a rational string or [re, im]"))),
    }
}

impl ProblemSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawProblem = serde_json::from_str(text)?;
        let partitions = raw
            .partitions
            .into_iter()
            .map(Partition::new)
            .collect::<Result<Vec<_>>>()?;
        let parsed = raw.z.iter().map(parse_site).collect::<Result<Vec<_>>>()?;
        let sites = if parsed.iter().all(|s| matches!(s, Site::Exact(_))) {
            Sites::Exact(
                parsed
                    .into_iter()
                    .map(|s| match s {
                        Site::Exact(q) => q,
                        Site::Numeric(_) => unreachable!(),
                    })
                    .collect(),
            )
        } else {
            Sites::Numeric(
                parsed
                    .into_iter()
                    .map(|s| match s {
                        Site::Exact(q) => q.to_c64(),
                        Site::Numeric(c) => c,
                    })
                    .collect(),
            )
        };
        let spec = ProblemSpec {
            n: raw.n,
            partitions,
            l: raw.l,
            sites,
            solver: raw.solver.unwrap_or_default(),
        };
        // full validation happens here so that bad input is reported early
        spec.complex_problem()?;
        if let Sites::Exact(_) = spec.sites {
            spec.exact_problem()?;
        }
        if spec.solver.precision != "double" {
            return Err(GaudinError::Schema(format!(
                "unsupported precision {:?} (only \"double\")",
                spec.solver.precision
            )));
        }
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// The problem over `Complex64`, whatever the input mode.
    pub fn complex_problem(&self) -> Result<GaudinProblem<Complex64>> {
        GaudinProblem::new(self.n, self.partitions.clone(), self.l.clone(), self.sites.to_complex())
    }

    /// The problem over the rationals, in exact mode only.
    pub fn exact_problem(&self) -> Result<Option<GaudinProblem<Rational>>> {
        match &self.sites {
            Sites::Exact(z) => GaudinProblem::new(self.n, self.partitions.clone(), self.l.clone(), z.clone()).map(Some),
            Sites::Numeric(_) => Ok(None),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "N": self.n,
            "partitions": self.partitions.iter().map(|p| p.parts().to_vec()).collect::<Vec<_>>(),
            "l": self.l,
            "z": self.sites.to_json(),
            "solver": self.solver,
        })
    }
}
