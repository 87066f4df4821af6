//! Orchestration: modules, algebra self-checks, critical orbits, per-orbit
//! checks, Gram rank and completeness, assembled into one report.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use super::problem::{ProblemSpec, Sites};
use super::report::*;
use crate::bethe::{algebra_selfcheck, default_jmax, default_samples, BetheCurrents};
use crate::error::{GaudinError, Result};
use crate::linalg::{singular_values, DenseMatrix};
use crate::master::{
    first_coefficient, hessian_log_phi, log_phi_and_gradient, master_coefficients_at, master_expansion_at_infinity,
    master_operator_at, find_critical_orbits, CriticalOrbit, GaudinProblem, PointConfig,
};
use crate::repr::{
    build_irreducible, tensor_module, tensor_shapovalov, weight_and_singular_subspace, GlModule, SymmetricForm,
};
use crate::scalar::{format_rational, norm2, parse_rational, rat, Rational, Scalar};
use crate::weight_fn::{bethe_vector, omega_evaluate, DEFAULT_MAX_TERMS};
use crate::wronski::{exponent_data, schubert_incidence, solve_h_tuple, verify_wronskian_identities, Site};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Critical orbits only.
    Solve,
    /// The full pipeline.
    Verify,
    /// Orbits, Bethe vectors and `G_ij` eigenvalue tables.
    Spectrum,
    /// Exact algebraic suites; no solver.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub j_max: Option<usize>,
    pub max_terms: u128,
    /// Threshold for every floating residual check.
    pub tol_check: f64,
    /// Relative threshold for the finite-difference checks.
    pub tol_fd: f64,
    pub fd_points: usize,
    pub selfcheck_samples: usize,
    pub d_cap: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            j_max: None,
            max_terms: DEFAULT_MAX_TERMS,
            tol_check: 1e-8,
            tol_fd: 1e-6,
            fd_points: 20,
            selfcheck_samples: 2,
            d_cap: None,
        }
    }
}

/// The module `L_Lambda` with its Shapovalov form.
pub fn build_modules(spec: &ProblemSpec) -> Result<(GlModule, SymmetricForm)> {
    let rank = spec.n + 1;
    let mut mods = Vec::new();
    let mut forms = Vec::new();
    for lam in &spec.partitions {
        let (m, s) = build_irreducible(lam, rank)?;
        mods.push(m);
        forms.push(s);
    }
    Ok((tensor_module(&mods)?, tensor_shapovalov(&forms)?))
}

pub fn run(spec: &ProblemSpec, cfg: &PipelineConfig, command: Command) -> VerificationReport {
    let mut r = Pipeline::new(spec, cfg, command);
    r.execute();
    r.report
}

pub fn run_pipeline(spec: &ProblemSpec, cfg: &PipelineConfig) -> VerificationReport {
    run(spec, cfg, Command::Verify)
}

struct Pipeline<'a> {
    spec: &'a ProblemSpec,
    cfg: &'a PipelineConfig,
    command: Command,
    pc: GaudinProblem<Complex64>,
    j_max: usize,
    report: VerificationReport,
}

struct OrbitOutcome {
    checks: OrbitChecks,
    verdicts: Vec<Check>,
    omega: Option<Vec<Complex64>>,
}

impl<'a> Pipeline<'a> {
    fn new(spec: &'a ProblemSpec, cfg: &'a PipelineConfig, command: Command) -> Self {
        let pc = spec.complex_problem().expect("validated when the problem was loaded");
        let j_max = cfg.j_max.unwrap_or_else(|| default_jmax(&spec.partitions, spec.n + 1));
        let report = VerificationReport {
            schema: SCHEMA.into(),
            command: command.name().into(),
            problem: spec.to_json(),
            exact_mode: spec.sites.is_exact(),
            config: ConfigEcho {
                seed: spec.solver.seed,
                starts: spec.solver.starts,
                tol_residual: spec.solver.tol_residual,
                tol_dedup: spec.solver.tol_dedup,
                tol_degenerate: spec.solver.degenerate_threshold(&pc),
                tol_check: cfg.tol_check,
                j_max,
                max_terms: cfg.max_terms.min(u64::MAX as u128) as u64,
                precision: spec.solver.precision.clone(),
            },
            module: None,
            selfcheck: None,
            orbits: Vec::new(),
            orbit_checks: Vec::new(),
            gram: None,
            completeness: None,
            checks: Vec::new(),
            errors: Vec::new(),
        };
        Pipeline {
            spec,
            cfg,
            command,
            pc,
            j_max,
            report,
        }
    }

    fn fail(&mut self, stage: &str, e: GaudinError) {
        self.report.errors.push(format!("{stage}: {e}"));
    }

    fn execute(&mut self) {
        let needs_module = self.command != Command::Solve;
        let mut built = None;
        let mut dim_sing = None;
        if needs_module {
            match build_modules(self.spec) {
                Ok((m, s)) => {
                    match weight_and_singular_subspace(&m, self.pc.lambda_inf()) {
                        Ok((w, sing)) => {
                            dim_sing = Some(sing.len());
                            self.report.module = Some(ModuleSummary {
                                dim: m.dim(),
                                weight_space_dim: w.len(),
                                dim_sing: sing.len(),
                                lambda_inf: self.pc.lambda_inf().parts().to_vec(),
                            });
                        }
                        Err(e) => self.fail("singular subspace", e),
                    }
                    built = Some((m, s));
                }
                Err(e) => self.fail("module build", e),
            }
        }
        if matches!(self.command, Command::Verify | Command::Selftest) {
            if let Some((m, s)) = &built {
                self.selfcheck_stage(m, s);
            }
            self.fd_stage();
        }
        if self.command == Command::Selftest {
            return;
        }
        let mut solver = self.spec.solver.clone();
        if solver.expected.is_none() {
            solver.expected = dim_sing;
        }
        let orbits = find_critical_orbits(&self.pc, &solver);
        self.report.orbits = orbits
            .iter()
            .enumerate()
            .map(|(index, o)| OrbitRecord {
                index,
                rep: o.rep.coords.iter().map(|g| g.iter().map(|&x| c(x)).collect()).collect(),
                residual: finite(o.residual),
                hessian: c(o.hessian),
                degenerate: o.degenerate,
                milnor: o.milnor,
            })
            .collect();
        if self.command == Command::Solve {
            if orbits.is_empty() {
                self.report
                    .checks
                    .push(Check::failed("solver.residual", "no critical orbit found"));
            } else {
                let worst = orbits.iter().map(|o| o.residual).fold(0.0, f64::max);
                self.report
                    .checks
                    .push(Check::below("solver.residual", worst, self.spec.solver.tol_residual));
            }
            return;
        }
        let Some((module, form)) = &built else { return };
        let cur = match BetheCurrents::new(module, self.pc.sites()) {
            Ok(c) => c,
            Err(e) => return self.fail("currents", e),
        };
        let outcomes: Vec<OrbitOutcome> = orbits
            .par_iter()
            .enumerate()
            .map(|(k, o)| self.orbit_stage(k, o, module, form, &cur))
            .collect();
        let mut omegas = Vec::new();
        for o in outcomes {
            self.report.checks.extend(o.verdicts);
            self.report.orbit_checks.push(o.checks);
            if let Some(w) = o.omega {
                omegas.push(w);
            }
        }
        if self.command == Command::Verify {
            self.gram_stage(form, &omegas);
            if let Some(ds) = dim_sing {
                self.completeness_stage(&orbits, omegas.len(), ds);
            }
        }
    }

    fn selfcheck_stage(&mut self, module: &GlModule, form: &SymmetricForm) {
        let k = self.cfg.selfcheck_samples;
        let result = match &self.spec.sites {
            Sites::Exact(z) => self.spec.exact_problem().and_then(|p| {
                let p = p.expect("exact sites");
                let cur = BetheCurrents::new(module, z)?;
                let rep = algebra_selfcheck(&cur, form, module, &default_samples(z, k))?;
                Ok((rep, master_first_coefficient_exact(&p)?))
            }),
            Sites::Numeric(z) => (|| {
                let cur = BetheCurrents::new(module, z)?;
                let rep = algebra_selfcheck(&cur, form, module, &default_samples(z, k))?;
                Ok((rep, master_first_coefficient_sampled(&self.pc)?))
            })(),
        };
        let (rep, g1) = match result {
            Ok(x) => x,
            Err(e) => return self.fail("algebra self-check", e),
        };
        let exact = self.spec.sites.is_exact();
        let tol = self.cfg.tol_check;
        let mk = |name: &str, v: f64| {
            if exact {
                Check::exact(name, v)
            } else {
                Check::below(name, v, tol)
            }
        };
        self.report.checks.extend([
            mk("algebra.commutativity", rep.commutativity),
            mk("algebra.generator_commutation", rep.generator_commutation),
            mk("algebra.shapovalov_symmetry", rep.shapovalov_symmetry),
            mk("structure.first_coefficient_bethe", rep.first_coefficient),
            mk("structure.first_coefficient_master", g1),
        ]);
        self.report.selfcheck = Some(SelfCheckSummary {
            exact,
            samples: rep.samples,
            commutativity: finite(rep.commutativity),
            generator_commutation: finite(rep.generator_commutation),
            shapovalov_symmetry: finite(rep.shapovalov_symmetry),
            first_coefficient: finite(rep.first_coefficient),
            master_first_coefficient: finite(g1),
        });
    }

    fn fd_stage(&mut self) {
        if self.pc.l_total() == 0 {
            self.report
                .checks
                .push(Check::skipped("master.finite_differences", "no coordinates (l = 0)"));
            return;
        }
        match finite_difference_check(&self.pc, self.cfg.fd_points, self.spec.solver.seed) {
            Ok(fd) => {
                self.report
                    .checks
                    .push(Check::below("master.gradient_fd", fd.gradient, self.cfg.tol_fd));
                self.report
                    .checks
                    .push(Check::below("master.hessian_fd", fd.hessian, self.cfg.tol_fd));
            }
            Err(e) => self.fail("finite differences", e),
        }
    }

    fn orbit_stage(
        &self,
        k: usize,
        orbit: &CriticalOrbit,
        module: &GlModule,
        form: &SymmetricForm,
        cur: &BetheCurrents<Complex64>,
    ) -> OrbitOutcome {
        let tol = self.cfg.tol_check;
        let name = |s: &str| format!("orbit[{k}].{s}");
        let mut checks = OrbitChecks {
            index: k,
            omega_norm: None,
            eigen_residuals: Vec::new(),
            samples: 0,
            shapovalov_norm: None,
            norm_residual: None,
            singular_residual: None,
            wronskian: None,
            spectrum: None,
            spectrum_residual: None,
        };
        let mut verdicts = Vec::new();
        if orbit.degenerate {
            let why = "mu_p > 1 out of scope";
            for s in ["omega", "eigen", "norm", "singular", "wronskian"] {
                verdicts.push(Check::skipped(name(s), why));
            }
            return OrbitOutcome {
                checks,
                verdicts,
                omega: None,
            };
        }
        let bv = match bethe_vector(&self.pc, module, orbit, self.cfg.max_terms) {
            Ok(b) => b,
            Err(e) => {
                verdicts.push(Check::failed(name("omega"), e.to_string()));
                return OrbitOutcome {
                    checks,
                    verdicts,
                    omega: None,
                };
            }
        };
        let w = &bv.vector;
        checks.omega_norm = Some(bv.norm);
        verdicts.push(Check::flag(name("omega"), bv.norm > 0.0, format!("|omega| = {:e}", bv.norm)));

        // eigenvalue equations at sampled points
        let count = (2 * self.j_max + 1).max(20);
        let samples = eigen_samples(self.pc.sites(), &orbit.rep.flat(), count);
        checks.samples = samples.len();
        let mut worst = vec![0.0f64; self.pc.rank()];
        let mut eig_err = None;
        for u in &samples {
            let bw = match cur.apply_at(u, w) {
                Ok(x) => x,
                Err(e) => {
                    eig_err = Some(e);
                    break;
                }
            };
            let g = match master_coefficients_at(&self.pc, &orbit.rep, u) {
                Ok(x) => x,
                Err(e) => {
                    eig_err = Some(e);
                    break;
                }
            };
            for i in 0..self.pc.rank() {
                let d: Vec<Complex64> = bw[i].iter().zip(w).map(|(b, x)| b - g[i] * x).collect();
                worst[i] = worst[i].max(norm2(&d) / bv.norm);
            }
        }
        match eig_err {
            Some(e) => verdicts.push(Check::failed(name("eigen"), e.to_string())),
            None => {
                let m = worst.iter().cloned().fold(0.0, f64::max);
                verdicts.push(Check::below(name("eigen"), m, tol));
            }
        }
        checks.eigen_residuals = worst.into_iter().map(finite).collect();

        if self.command == Command::Spectrum {
            match spectrum_table(&self.pc, &orbit.rep, cur, w, self.j_max) {
                Ok((table, res)) => {
                    checks.spectrum = Some(table);
                    checks.spectrum_residual = Some(finite(res));
                    verdicts.push(Check::below(name("spectrum"), res, tol));
                }
                Err(e) => verdicts.push(Check::failed(name("spectrum"), e.to_string())),
            }
            return OrbitOutcome {
                checks,
                verdicts,
                omega: Some(w.clone()),
            };
        }

        // norm formula
        let s = form.pair(w, w);
        let nr = (s - orbit.hessian).norm() / orbit.hessian.norm();
        checks.shapovalov_norm = Some(c(s));
        checks.norm_residual = Some(finite(nr));
        verdicts.push(Check::below(name("norm"), nr, tol));

        checks.singular_residual = Some(finite(bv.singular_residual));
        verdicts.push(Check::below(name("singular"), bv.singular_residual, tol));

        match self.wronskian_stage(&orbit.rep) {
            Ok((summary, vs)) => {
                checks.wronskian = Some(summary);
                verdicts.extend(vs.into_iter().map(|mut v| {
                    v.name = name(&v.name);
                    v
                }));
            }
            Err(e) => verdicts.push(Check::failed(name("h_tuple"), e.to_string())),
        }
        OrbitOutcome {
            checks,
            verdicts,
            omega: Some(w.clone()),
        }
    }

    fn wronskian_stage(&self, t: &PointConfig<Complex64>) -> Result<(WronskianSummary, Vec<Check>)> {
        let tol = self.cfg.tol_check;
        let e = exponent_data(&self.pc, self.cfg.d_cap)?;
        let h = solve_h_tuple(&self.pc, t, &e)?;
        let ids = verify_wronskian_identities(&h, &self.pc, t, &e);
        let mut incidence = Vec::new();
        for (z, lam) in self.pc.sites().iter().zip(self.pc.partitions()) {
            incidence.push(schubert_incidence(&h, &e, &Site::Finite(*z), lam)?.passed);
        }
        incidence.push(schubert_incidence(&h, &e, &Site::Infinity, &e.dual)?.passed);
        let ode = h.ode_residuals.iter().cloned().fold(0.0, f64::max);
        let id_res = ids.iter().map(|w| w.residual).fold(0.0, f64::max);
        let degrees_match = ids.iter().all(|w| w.lhs_degree == w.rhs_degree);
        let checks = vec![
            Check::below("h_tuple.ode", ode, tol),
            Check::below("h_tuple.y_match", h.y_residual, tol),
            Check::below("wronskian.identities", id_res, tol),
            Check::flag(
                "wronskian.degrees",
                degrees_match,
                if degrees_match { "" } else { "degree mismatch" },
            ),
            Check::flag(
                "schubert.incidence",
                incidence.iter().all(|&b| b),
                format!("per site (last = infinity): {incidence:?}"),
            ),
        ];
        let summary = WronskianSummary {
            h: h.h.iter().map(|f| f.coeffs().iter().map(|&x| c(x)).collect()).collect(),
            y_residual: finite(h.y_residual),
            ode_residuals: h.ode_residuals.iter().cloned().map(finite).collect(),
            identity_residuals: ids.iter().map(|w| finite(w.residual)).collect(),
            identity_constants: ids.iter().map(|w| w.constant).collect(),
            degrees_match,
            incidence,
        };
        Ok((summary, checks))
    }

    fn gram_stage(&mut self, form: &SymmetricForm, omegas: &[Vec<Complex64>]) {
        if omegas.is_empty() {
            self.report
                .checks
                .push(Check::skipped("gram.rank", "no nondegenerate orbit with a Bethe vector"));
            return;
        }
        let unit: Vec<Vec<Complex64>> = omegas
            .iter()
            .map(|w| {
                let n = norm2(w);
                w.iter().map(|x| x / n).collect()
            })
            .collect();
        let rows: Vec<Vec<Complex64>> = unit
            .iter()
            .map(|a| unit.iter().map(|b| form.pair(a, b)).collect())
            .collect();
        let sv = singular_values(&DenseMatrix::from_rows(&rows));
        let top = sv[0];
        let rank = sv.iter().filter(|&&s| s > self.cfg.tol_check * top).count();
        let ratio = sv.last().copied().unwrap_or(0.0) / top.max(f64::MIN_POSITIVE);
        let mut chk = Check::flag(
            "gram.rank",
            rank == omegas.len() && top > 0.0,
            format!("rank {rank} of {} vectors", omegas.len()),
        );
        chk.value = Some(finite(ratio));
        chk.tolerance = Some(self.cfg.tol_check);
        self.report.checks.push(chk);
        self.report.gram = Some(GramSummary {
            matrix: rows.iter().map(|r| r.iter().map(|&x| c(x)).collect()).collect(),
            singular_values: sv.into_iter().map(finite).collect(),
            rank,
        });
    }

    fn completeness_stage(&mut self, orbits: &[CriticalOrbit], with_vectors: usize, dim_sing: usize) {
        let nondegenerate = orbits.iter().filter(|o| !o.degenerate).count();
        let tally = match orbits.len().cmp(&dim_sing) {
            std::cmp::Ordering::Equal => Tally::Equal,
            std::cmp::Ordering::Less => Tally::Shortfall,
            std::cmp::Ordering::Greater => Tally::Excess,
        };
        let mut chk = Check::flag(
            "solver.coverage",
            tally == Tally::Equal,
            format!(
                "{} orbits ({nondegenerate} nondegenerate, {with_vectors} with Bethe vectors) vs dim Sing = {dim_sing}",
                orbits.len()
            ),
        );
        chk.value = Some(orbits.len() as f64);
        self.report.checks.push(chk);
        self.report.completeness = Some(Completeness {
            orbits_found: orbits.len(),
            nondegenerate,
            dim_sing,
            tally,
        });
    }
}

/// `G_1 + sum_s |lambda_s| / (u - z_s)` as an exact rational function, with
/// `G_1` taken from the operator at a generic rational point; returns 0 when
/// the identity holds.
pub fn master_first_coefficient_exact(p: &GaudinProblem<Rational>) -> Result<f64> {
    let t = generic_rational_point(p);
    let d = master_operator_at(p, &t)?;
    let diff = d.lower_coeff(1) - first_coefficient(p);
    Ok(if diff.is_zero() {
        0.0
    } else {
        crate::scalar::max_modulus(diff.numerator().coeffs()).max(f64::MIN_POSITIVE)
    })
}

/// Sampled version of [`master_first_coefficient_exact`] for floating sites.
pub fn master_first_coefficient_sampled(p: &GaudinProblem<Complex64>) -> Result<f64> {
    let t = generic_rational_point(&p.map_sites(|_| rat(0, 1))).to_complex();
    let fc = first_coefficient(p);
    let mut worst = 0.0f64;
    for u in eigen_samples(p.sites(), &t.flat(), 8) {
        let g1 = master_coefficients_at(p, &t, &u)?[0];
        let want = fc.eval(&u)?;
        worst = worst.max((g1 - want).norm() / want.norm().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Coordinates `k + 1/(k + 3) + 1/7`-style rationals, off the sites and
/// pairwise distinct.
fn generic_rational_point<F: Scalar>(p: &GaudinProblem<F>) -> PointConfig<F> {
    let mut used: Vec<F> = p.sites().to_vec();
    let mut coords = Vec::new();
    let mut k = 0i64;
    for &li in p.l() {
        let mut g = Vec::new();
        while g.len() < li {
            let x = F::from_rational(&(rat(k, 1) + rat(1, k + 3) + rat(1, 7)));
            k += 1;
            if used.iter().all(|y| (y.clone() - x.clone()).modulus() > 1e-6) {
                used.push(x.clone());
                g.push(x);
            }
        }
        coords.push(g);
    }
    PointConfig::new(coords)
}

/// Sample points on two circles around the data, away from `avoid`.
pub fn eigen_samples(z: &[Complex64], t: &[Complex64], count: usize) -> Vec<Complex64> {
    let rho = z.iter().chain(t).map(|x| x.norm()).fold(1.0, f64::max);
    let avoid: Vec<Complex64> = z.iter().chain(t).cloned().collect();
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count {
        let radius = if k % 2 == 0 { 1.3 * rho + 0.7 } else { 0.55 * rho + 0.05 };
        let theta = 0.37 + 2.0 * std::f64::consts::PI * 0.618_033_988_75 * k as f64;
        let u = Complex64::from_polar(radius, theta);
        if avoid.iter().all(|a| (a - u).norm() > 0.05 * rho) {
            out.push(u);
        }
        k += 1;
    }
    out
}

/// `G_ij` for `j = 1..=j_max` at `t`, and the worst `|B_ij w - G_ij w| / |w|`
/// relative to `max(1, |G_ij|)`.
fn spectrum_table(
    p: &GaudinProblem<Complex64>,
    t: &PointConfig<Complex64>,
    cur: &BetheCurrents<Complex64>,
    w: &[Complex64],
    j_max: usize,
) -> Result<(Vec<Vec<C>>, f64)> {
    let g = master_expansion_at_infinity(p, t, j_max)?;
    let (bw, _) = cur.expansion_at_infinity(w, j_max);
    let wn = norm2(w);
    let mut worst = 0.0f64;
    for (gi, bi) in g.iter().zip(&bw) {
        for (gij, bij) in gi.iter().zip(bi) {
            let d: Vec<Complex64> = bij.iter().zip(w).map(|(b, x)| b - gij * x).collect();
            worst = worst.max(norm2(&d) / (wn * gij.norm().max(1.0)));
        }
    }
    Ok((g.iter().map(|r| r.iter().map(|&x| c(x)).collect()).collect(), worst))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdReport {
    pub points: usize,
    /// Worst `max |fd - Psi| / max |Psi|` over the points.
    pub gradient: f64,
    /// Same for the Hessian against differences of `Psi`.
    pub hessian: f64,
}

fn wrap_phase(z: Complex64) -> Complex64 {
    let tau = 2.0 * std::f64::consts::PI;
    Complex64::new(z.re, z.im - tau * (z.im / tau).round())
}

/// Central differences of `log Phi` (whose real part is `log |Phi|`) and of
/// `Psi` against the analytic gradient and Hessian, at random points.
pub fn finite_difference_check(p: &GaudinProblem<Complex64>, points: usize, seed: u64) -> Result<FdReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_fd);
    let scale = crate::master::site_scale(p.sites());
    let centre = p.sites().iter().sum::<Complex64>() / p.sites().len().max(1) as f64;
    let step = 1e-5 * scale;
    let n = p.l_total();
    let mut rep = FdReport {
        points: 0,
        gradient: 0.0,
        hessian: 0.0,
    };
    while rep.points < points {
        let x: Vec<Complex64> = (0..n)
            .map(|_| centre + scale * Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        // keep well inside the domain so that the differences are meaningful
        let t = PointConfig::from_flat(p.l(), &x);
        let mut pts: Vec<Complex64> = p.sites().to_vec();
        pts.extend(&x);
        let mut sep = f64::INFINITY;
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                sep = sep.min((pts[a] - pts[b]).norm());
            }
        }
        if sep < 0.05 * scale || t.check_in_u(p).is_err() {
            continue;
        }
        let (_, grad) = log_phi_and_gradient(p, &t)?;
        let grad: Vec<Complex64> = grad.into_iter().flatten().collect();
        let (_, hess) = hessian_log_phi(p, &t)?;
        let shifted = |a: usize, h: Complex64| {
            let mut y = x.clone();
            y[a] += h;
            PointConfig::from_flat(p.l(), &y)
        };
        let h = Complex64::new(step, 0.0);
        let mut gerr = 0.0f64;
        let mut herr = 0.0f64;
        let gmax = grad.iter().map(|g| g.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut hmax = 0.0f64;
        for a in 0..n {
            let (fp, gp) = log_phi_and_gradient(p, &shifted(a, h))?;
            let (fm, gm) = log_phi_and_gradient(p, &shifted(a, -h))?;
            let fd = wrap_phase(fp - fm) / (2.0 * h);
            gerr = gerr.max((fd - grad[a]).norm());
            let gp: Vec<Complex64> = gp.into_iter().flatten().collect();
            let gm: Vec<Complex64> = gm.into_iter().flatten().collect();
            for b in 0..n {
                let fd2 = (gp[b] - gm[b]) / (2.0 * h);
                let exact = *hess.get(b, a);
                hmax = hmax.max(exact.norm());
                herr = herr.max((fd2 - exact).norm());
            }
        }
        rep.gradient = rep.gradient.max(gerr / gmax);
        rep.hessian = rep.hessian.max(herr / hmax.max(f64::MIN_POSITIVE));
        rep.points += 1;
    }
    Ok(rep)
}

/// Evaluates `omega(t)`. `t` is a list of coordinate groups whose entries are
/// rational strings or `[re, im]` pairs; evaluation is exact when both the
/// sites and `t` are rational.
pub fn evaluate_weight_function(spec: &ProblemSpec, t: &Value, max_terms: u128) -> Result<Value> {
    let groups = t
        .as_array()
        .ok_or_else(|| GaudinError::Schema("point must be a list of coordinate groups".into()))?;
    let mut exact: Vec<Vec<Rational>> = Vec::new();
    let mut numeric: Vec<Vec<Complex64>> = Vec::new();
    let mut all_exact = true;
    for g in groups {
        let g = g
            .as_array()
            .ok_or_else(|| GaudinError::Schema("each coordinate group must be a list".into()))?;
        let mut eg = Vec::new();
        let mut ng = Vec::new();
        for x in g {
            match x {
                Value::String(s) => {
                    let q = parse_rational(s)?;
                    ng.push(q.to_c64());
                    eg.push(q);
                }
                Value::Array(a) if a.len() == 2 => {
                    all_exact = false;
                    let re = a[0].as_f64().ok_or_else(|| GaudinError::Schema(format!("bad coordinate {x}")))?;
                    let im = a[1].as_f64().ok_or_else(|| GaudinError::Schema(format!("bad coordinate {x}")))?;
                    ng.push(Complex64::new(re, im));
                }
                Value::Number(v) => {
                    all_exact = false;
                    ng.push(Complex64::new(
                        v.as_f64().ok_or_else(|| GaudinError::Schema(format!("bad coordinate {x}")))?,
                        0.0,
                    ));
                }
                _ => return Err(GaudinError::Schema(format!("bad coordinate {x}"))),
            }
        }
        exact.push(eg);
        numeric.push(ng);
    }
    let (module, _) = build_modules(spec)?;
    if all_exact {
        if let Some(p) = spec.exact_problem()? {
            let w = omega_evaluate(&p, &module, &PointConfig::new(exact), max_terms)?;
            return Ok(serde_json::json!({
                "exact": true,
                "omega": w.iter().map(format_rational).collect::<Vec<_>>(),
            }));
        }
    }
    let pc = spec.complex_problem()?;
    let w = omega_evaluate(&pc, &module, &PointConfig::new(numeric), max_terms)?;
    Ok(serde_json::json!({
        "exact": false,
        "omega": w.iter().map(|&x| c(x)).collect::<Vec<_>>(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> ProblemSpec {
        ProblemSpec::from_json_str(text).unwrap()
    }

    #[test]
    fn canonical_example_passes() {
        let s = spec(r#"{"N":1,"partitions":[[1,0],[1,0]],"l":[1],"z":["0","1"]}"#);
        let r = run_pipeline(&s, &PipelineConfig::default());
        assert!(r.errors.is_empty(), "{:?}", r.errors);
        for c in &r.checks {
            assert_ne!(c.verdict, Verdict::Fail, "{c:?}");
        }
        assert_eq!(r.orbits.len(), 1);
        let rep = r.orbits[0].rep[0][0];
        assert!((rep[0] - 0.5).abs() < 1e-12 && rep[1].abs() < 1e-12);
        let n = r.orbit_checks[0].shapovalov_norm.unwrap();
        assert!((n[0] - 8.0).abs() < 1e-9, "{n:?}");
        assert!(r.orbit_checks[0].eigen_residuals.iter().all(|&x| x < 1e-12));
        assert_eq!(r.completeness.as_ref().unwrap().tally, Tally::Equal);
    }

    #[test]
    fn empty_configuration() {
        let s = spec(r#"{"N":1,"partitions":[[1,0],[1,0]],"l":[0],"z":["0","1"]}"#);
        let r = run_pipeline(&s, &PipelineConfig::default());
        assert!(!r.any_failed(), "{:#?}", r.checks);
        assert_eq!(r.module.as_ref().unwrap().dim_sing, 1);
    }

    #[test]
    fn deterministic_report() {
        let s = spec(r#"{"N":1,"partitions":[[1,0],[1,0],[1,0]],"l":[1],"z":["0","1","2"]}"#);
        let a = emit_report(&run_pipeline(&s, &PipelineConfig::default()), Format::Json).unwrap();
        let b = emit_report(&run_pipeline(&s, &PipelineConfig::default()), Format::Json).unwrap();
        assert_eq!(a, b);
        let back: VerificationReport = serde_json::from_str(&a).unwrap();
        assert_eq!(emit_report(&back, Format::Json).unwrap(), a);
        let r = back;
        assert_eq!(r.gram.as_ref().unwrap().rank, 2);
        assert!(!r.any_failed(), "{:#?}", r.checks);
    }

    #[test]
    fn weight_function_evaluation() {
        let s = spec(r#"{"N":1,"partitions":[[1,0],[1,0]],"l":[1],"z":["0","1"]}"#);
        let v = evaluate_weight_function(&s, &serde_json::json!([["1/2"]]), 100).unwrap();
        assert_eq!(v["exact"], true);
        assert_eq!(v["omega"], serde_json::json!(["0", "-2", "2", "0"]));
        let v = evaluate_weight_function(&s, &serde_json::json!([[[0.5, 0.0]]]), 100).unwrap();
        assert_eq!(v["exact"], false);
    }
}
