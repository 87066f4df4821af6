//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs as a plain binary (`harness = false`) so the lines always
//! show up in `cargo test` output.

mod common;

use std::time::{Duration, Instant};

use common::*;
use gaudin::bethe::{algebra_selfcheck, default_samples, BetheCurrents};
use gaudin::harness::{build_modules, run_pipeline, PipelineConfig, ProblemSpec, VerificationReport};
use gaudin::harness::report::Tally;
use gaudin::linalg::SparseMatrix;
use gaudin::master::{gradient, hessian_log_phi, master_operator_at, GaudinProblem, PointConfig};
use gaudin::poly::Polynomial;
use gaudin::repr::{build_irreducible, tensor_module, tensor_shapovalov};
use gaudin::scalar::{format_rational, rat};
use gaudin::weight_fn::{omega_evaluate, DEFAULT_MAX_TERMS};
use gaudin::wronski::{exponent_data, solve_h_tuple};
use gaudin::{Complex64, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;
const TOL_FD: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, ok_detail: String) -> Self {
        if failures.is_empty() {
            Outcome { pass: true, detail: ok_detail }
        } else {
            Outcome { pass: false, detail: failures.join("; ") }
        }
    }
}

/// One suite instance and its pipeline report.
struct Instance {
    label: String,
    spec: ProblemSpec,
    report: VerificationReport,
}

fn suite_specs() -> Vec<(String, &'static str)> {
    let raw = [
        r#"{"N":1,"partitions":[[1,0],[1,0]],"l":[0],"z":["0","1"]}"#,
        r#"{"N":1,"partitions":[[1,0],[1,0]],"l":[1],"z":["0","1"]}"#,
        r#"{"N":1,"partitions":[[1,0],[1,0],[1,0]],"l":[0],"z":["-1","2/3","5/2"]}"#,
        r#"{"N":1,"partitions":[[1,0],[1,0],[1,0]],"l":[1],"z":["-1","2/3","5/2"]}"#,
        r#"{"N":2,"partitions":[[1,0,0],[1,1,0]],"l":[1,1],"z":["-1/2","3/4"]}"#,
    ];
    raw.iter()
        .map(|s| {
            let v: serde_json::Value = serde_json::from_str(s).unwrap();
            (format!("{} l={} z={}", v["partitions"], v["l"], v["z"]), *s)
        })
        .collect()
}

fn run_suite() -> (Vec<Instance>, Duration) {
    let start = Instant::now();
    let out = suite_specs()
        .into_iter()
        .map(|(label, text)| {
            let spec = ProblemSpec::from_json_str(text).unwrap();
            let report = run_pipeline(&spec, &PipelineConfig::default());
            Instance { label, spec, report }
        })
        .collect();
    (out, start.elapsed())
}

fn nondegenerate(inst: &Instance) -> impl Iterator<Item = &gaudin::harness::report::OrbitChecks> {
    inst.report
        .orbit_checks
        .iter()
        .filter(|c| !inst.report.orbits[c.index].degenerate)
}

// ---------------------------------------------------------------- 1

fn weight_function_fidelity() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let lam = part(&[2, 1, 0]);
    let (m, _) = build_irreducible(&lam, 3).unwrap();
    let module = tensor_module(&[m.clone(), m.clone()]).unwrap();
    for k in 0..10 {
        let z = distinct_rationals(&mut rng, 2, &[]);
        let t = distinct_rationals(&mut rng, 2, &z);
        let p = GaudinProblem::new(2, vec![lam.clone(), lam.clone()], vec![1, 1], z.clone()).unwrap();
        let tc = PointConfig::new(vec![vec![t[0].clone()], vec![t[1].clone()]]);
        if omega_evaluate(&p, &module, &tc, DEFAULT_MAX_TERMS).unwrap() != omega_one_one(&m, &m, &t[0], &t[1], &z) {
            failures.push(format!("gl3 example, draw {k}"));
        }
    }

    let lam = part(&[2, 0]);
    let (m, _) = build_irreducible(&lam, 2).unwrap();
    let module = tensor_module(&[m.clone(), m.clone()]).unwrap();
    for k in 0..10 {
        let z = distinct_rationals(&mut rng, 2, &[]);
        let t = distinct_rationals(&mut rng, 2, &z);
        let p = GaudinProblem::new(1, vec![lam.clone(), lam.clone()], vec![2], z.clone()).unwrap();
        let tc = PointConfig::new(vec![t.clone()]);
        if omega_evaluate(&p, &module, &tc, DEFAULT_MAX_TERMS).unwrap() != omega_two(&m, &m, &t[0], &t[1], &z) {
            failures.push(format!("gl2 example, draw {k}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        failures.push(format!("took {elapsed:?}"));
    }
    Outcome::new(failures, format!("20 exact draws equal, {elapsed:?}"))
}

// ---------------------------------------------------------------- 2

fn exact_algebra_suite() -> Outcome {
    let modules: [&[&[i64]]; 10] = [
        &[&[1, 0], &[1, 0]],
        &[&[1, 0], &[1, 0], &[1, 0]],
        &[&[2, 0], &[1, 0], &[1, 0]],
        &[&[3, 0], &[2, 0], &[1, 0]],
        &[&[2, 0], &[2, 0], &[2, 0]],
        &[&[1, 0, 0], &[1, 1, 0]],
        &[&[1, 0, 0], &[1, 0, 0], &[1, 0, 0]],
        &[&[2, 1, 0], &[1, 1, 0], &[1, 0, 0]],
        &[&[2, 1, 0], &[2, 1, 0], &[1, 0, 0]],
        &[&[2, 0, 0], &[2, 0, 0], &[1, 1, 0]],
    ];
    let sites = [rat(-1, 1), rat(2, 3), rat(5, 2)];
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut dims = Vec::new();
    for parts in modules {
        let parts: Vec<_> = parts.iter().map(|p| part(p)).collect();
        let rank = parts[0].len();
        let (ms, forms): (Vec<_>, Vec<_>) = parts.iter().map(|p| build_irreducible(p, rank).unwrap()).unzip();
        let module = tensor_module(&ms).unwrap();
        let form = tensor_shapovalov(&forms).unwrap();
        dims.push(module.dim());
        if module.dim() > 200 {
            failures.push(format!("{parts:?} has dimension {}", module.dim()));
        }
        let z = &sites[..parts.len()];
        let cur = BetheCurrents::new(&module, z).unwrap();
        let r = algebra_selfcheck(&cur, &form, &module, &default_samples(z, 2)).unwrap();
        if r.commutativity != 0.0 || r.generator_commutation != 0.0 || r.shapovalov_symmetry != 0.0 {
            failures.push(format!("{parts:?}: {r:?}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(120) {
        failures.push(format!("took {elapsed:?}"));
    }
    Outcome::new(failures, format!("10 modules (dims {dims:?}) with zero residuals, {elapsed:?}"))
}

// ---------------------------------------------------------------- 3

fn eigenvalues(suite: &[Instance], elapsed: Duration) -> Outcome {
    let mut failures = Vec::new();
    let mut orbits = 0;
    let mut worst = 0.0f64;
    for inst in suite {
        let before = orbits;
        for c in nondegenerate(inst) {
            orbits += 1;
            let m = c.eigen_residuals.iter().cloned().fold(0.0, f64::max);
            worst = worst.max(m);
            if c.eigen_residuals.is_empty() || !(m < TOL) {
                failures.push(format!("{} orbit {}: residual {m:e}", inst.label, c.index));
            }
            if c.samples < 20 {
                failures.push(format!("{} orbit {}: only {} samples", inst.label, c.index, c.samples));
            }
        }
        if orbits == before {
            failures.push(format!("{}: no nondegenerate orbit", inst.label));
        }
    }
    if elapsed >= Duration::from_secs(120) {
        failures.push(format!("suite took {elapsed:?}"));
    }
    Outcome::new(failures, format!("{orbits} orbits, max residual {worst:.2e}, suite {elapsed:?}"))
}

// ---------------------------------------------------------------- 4

fn norm_formula(suite: &[Instance]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for inst in suite {
        for c in nondegenerate(inst) {
            match c.norm_residual {
                Some(r) if r < TOL => worst = worst.max(r),
                other => failures.push(format!("{} orbit {}: {other:?}", inst.label, c.index)),
            }
        }
    }
    // exact anchor: two qubits at 0 and 1, one root at 1/2
    let (v, s) = build_irreducible(&part(&[1, 0]), 2).unwrap();
    let module = tensor_module(&[v.clone(), v]).unwrap();
    let form = tensor_shapovalov(&[s.clone(), s]).unwrap();
    let p = GaudinProblem::new(1, vec![part(&[1, 0]); 2], vec![1], vec![rat(0, 1), rat(1, 1)]).unwrap();
    let t = PointConfig::new(vec![vec![rat(1, 2)]]);
    let w = omega_evaluate(&p, &module, &t, DEFAULT_MAX_TERMS).unwrap();
    // by hand: 1/(t - 0) f v (x) v + 1/(t - 1) v (x) f v, and the form is the identity
    let hand = vec![rat(0, 1), rat(-2, 1), rat(2, 1), rat(0, 1)];
    let brute: Rational = hand.iter().map(|x| x.clone() * x.clone()).sum();
    let norm = form.pair(&w, &w);
    let (hess, _) = hessian_log_phi(&p, &t).unwrap();
    if w != hand || norm != rat(8, 1) || hess != rat(8, 1) || brute != rat(8, 1) {
        failures.push(format!(
            "anchor: S = {}, H = {}, brute force {}",
            format_rational(&norm),
            format_rational(&hess),
            format_rational(&brute)
        ));
    }
    Outcome::new(failures, format!("max relative residual {worst:.2e}; anchor S = H = 8 exactly"))
}

// ---------------------------------------------------------------- 5

fn singular_and_nonzero(suite: &[Instance]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for inst in suite {
        for c in &inst.report.orbit_checks {
            match (c.omega_norm, c.singular_residual) {
                (Some(n), Some(r)) if n > 0.0 && r < TOL => worst = worst.max(r),
                other => failures.push(format!("{} orbit {}: (|w|, residual) = {other:?}", inst.label, c.index)),
            }
        }
    }
    Outcome::new(failures, format!("max |e_ij w|/|w| {worst:.2e}, every |w| > 0"))
}

// ---------------------------------------------------------------- 6

fn independence_and_coverage(suite: &[Instance]) -> Outcome {
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for inst in suite {
        match &inst.report.gram {
            Some(g) => {
                let max = g.singular_values.iter().cloned().fold(0.0, f64::max);
                let min = g.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
                if !(min > TOL * max) || g.rank != g.singular_values.len() {
                    failures.push(format!("{}: singular values {:?}", inst.label, g.singular_values));
                }
                summary.push(g.rank);
            }
            None => failures.push(format!("{}: no Gram matrix", inst.label)),
        }
        match &inst.report.completeness {
            Some(c) if c.tally == Tally::Equal => {}
            other => failures.push(format!("{}: completeness {other:?}", inst.label)),
        }
    }
    Outcome::new(failures, format!("full rank {summary:?}, every tally EQUAL"))
}

// ---------------------------------------------------------------- 7

/// Leading coefficient of the Wronskian of monic monomials `u^e`, from the
/// determinant of falling factorials.
fn monomial_wronskian_constant(e: &[i64]) -> i64 {
    let k = e.len();
    let falling = |x: i64, r: usize| (0..r as i64).map(|i| x - i).product::<i64>();
    let m: Vec<Vec<i64>> = (0..k).map(|r| e.iter().map(|&x| falling(x, r)).collect()).collect();
    fn det(m: &[Vec<i64>]) -> i64 {
        if m.len() == 1 {
            return m[0][0];
        }
        (0..m.len())
            .map(|c| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                    .collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * m[0][c] * det(&minor)
            })
            .sum()
    }
    det(&m)
}

fn wronskian_suite(suite: &[Instance]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for inst in suite {
        let n = inst.spec.n;
        let lam_inf = &inst.report.module.as_ref().unwrap().lambda_inf;
        let d: Vec<i64> = (0..=n).map(|i| lam_inf.get(i).copied().unwrap_or(0) + (n - i) as i64).collect();
        for c in nondegenerate(inst) {
            let tag = format!("{} orbit {}", inst.label, c.index);
            let Some(w) = &c.wronskian else {
                failures.push(format!("{tag}: no h-tuple"));
                continue;
            };
            let res = w
                .ode_residuals
                .iter()
                .chain(&w.identity_residuals)
                .chain(std::iter::once(&w.y_residual))
                .cloned()
                .fold(0.0, f64::max);
            worst = worst.max(res);
            if !(res < TOL) {
                failures.push(format!("{tag}: residual {res:e}"));
            }
            // shape: h_i monic of degree d_i
            for (i, h) in w.h.iter().enumerate() {
                let lead = h.last().copied().unwrap_or([0.0, 0.0]);
                if h.len() as i64 != d[i] + 1 || (lead[0] - 1.0).abs() > TOL || lead[1].abs() > TOL {
                    failures.push(format!("{tag}: h_{} has shape {} coefficients, leading {lead:?}", i + 1, h.len()));
                }
            }
            let want: Vec<i64> =
                (1..=n).map(|j| monomial_wronskian_constant(&(0..=j).map(|k| d[n - k]).collect::<Vec<_>>())).collect();
            if w.identity_constants != want || w.identity_residuals.len() != n {
                failures.push(format!("{tag}: constants {:?} vs {want:?}", w.identity_constants));
            }
            if !w.degrees_match {
                failures.push(format!("{tag}: degree mismatch"));
            }
            if w.incidence.len() != inst.spec.partitions.len() + 1 || !w.incidence.iter().all(|&b| b) {
                failures.push(format!("{tag}: incidence {:?}", w.incidence));
            }
        }
    }
    // exact anchor
    let p = GaudinProblem::new(1, vec![part(&[1, 0]); 2], vec![1], vec![rat(0, 1), rat(1, 1)]).unwrap();
    let t = PointConfig::new(vec![vec![rat(1, 2)]]);
    let e = exponent_data(&p, None).unwrap();
    let h = solve_h_tuple(&p, &t, &e).unwrap();
    let want = vec![
        Polynomial::new(vec![rat(0, 1), rat(0, 1), rat(1, 1)]),
        Polynomial::new(vec![rat(-1, 2), rat(1, 1)]),
    ];
    if h.h != want {
        failures.push(format!("anchor h = {:?}", h.h));
    }
    Outcome::new(failures, format!("max residual {worst:.2e}; anchor h = (u^2, u - 1/2) exactly"))
}

// ---------------------------------------------------------------- 8

fn first_coefficients(suite: &[Instance]) -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for inst in suite {
        let p = inst.spec.exact_problem().unwrap().expect("suite sites are rational");
        let z = p.sites().to_vec();
        let sizes: Vec<i64> = inst.spec.partitions.iter().map(|x| x.parts().iter().sum()).collect();
        // sum_s -|lambda_s| / (u - z_s), term by term
        let hand = |u: &Rational| -> Rational {
            z.iter().zip(&sizes).map(|(zs, &k)| rat(-k, 1) / (u.clone() - zs.clone())).sum()
        };
        let (module, _) = build_modules(&inst.spec).unwrap();
        let cur = BetheCurrents::new(&module, &z).unwrap();
        let mut avoid = z.clone();
        let mut groups = Vec::new();
        for &li in p.l() {
            let g = distinct_rationals(&mut rng, li, &avoid);
            avoid.extend(g.iter().cloned());
            groups.push(g);
        }
        let t = PointConfig::new(groups);
        let g1 = master_operator_at(&p, &t).unwrap().lower_coeff(1);
        for u in distinct_rationals(&mut rng, 4, &avoid) {
            let want = hand(&u);
            let b1 = &cur.matrices_at(&u).unwrap()[0];
            if *b1 != SparseMatrix::identity(module.dim()).scale(&want) {
                failures.push(format!("{}: B_1({}) is not the scalar", inst.label, format_rational(&u)));
            }
            if g1.eval(&u).unwrap() != want {
                failures.push(format!("{}: G_1({}) differs", inst.label, format_rational(&u)));
            }
        }
        let sc = inst.report.selfcheck.as_ref().unwrap();
        if !sc.exact || sc.first_coefficient != 0.0 || sc.master_first_coefficient != 0.0 {
            failures.push(format!("{}: report {sc:?}", inst.label));
        }
    }
    Outcome::new(failures, format!("{} instances, exact equality at 4 points each", suite.len()))
}

// ---------------------------------------------------------------- 9

fn gradient_consistency(suite: &[Instance]) -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut points = 0;
    for inst in suite {
        let l = inst.spec.l.clone();
        let total: usize = l.iter().sum();
        if total == 0 {
            continue;
        }
        let z = inst.spec.sites.to_complex();
        let p = inst.spec.complex_problem().unwrap();
        let scale = z.iter().map(|x| x.norm()).fold(1.0, f64::max);
        for _ in 0..20 {
            let x: Vec<Complex64> = loop {
                let x: Vec<Complex64> = (0..total)
                    .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)) * scale)
                    .collect();
                let far = x.iter().enumerate().all(|(a, xa)| {
                    z.iter().all(|zs| (xa - zs).norm() > 0.2 * scale)
                        && x[..a].iter().all(|xb| (xa - xb).norm() > 0.2 * scale)
                });
                if far {
                    break x;
                }
            };
            let t = PointConfig::from_flat(&l, &x);
            let (g_fd, h_fd) = fd_gradient_hessian(&inst.spec.partitions, &z, &l, &x, 1e-3 * scale);
            let g = t_flat(gradient(&p, &t).unwrap());
            let (_, h) = hessian_log_phi(&p, &t).unwrap();
            let g_scale = g.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let g_err = g.iter().zip(&g_fd).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / g_scale;
            let mut h_scale = f64::MIN_POSITIVE;
            let mut h_err = 0.0f64;
            for a in 0..total {
                for b in 0..total {
                    h_scale = h_scale.max(h.get(a, b).norm());
                    h_err = h_err.max((h.get(a, b) - h_fd[a][b]).norm());
                }
            }
            let err = g_err.max(h_err / h_scale);
            worst = worst.max(err);
            points += 1;
            if !(err < TOL_FD) {
                failures.push(format!("{}: relative error {err:e} at {x:?}", inst.label));
            }
        }
        let fd = inst.report.check("master.gradient_fd").zip(inst.report.check("master.hessian_fd"));
        match fd {
            Some((a, b)) if a.value.unwrap() < TOL_FD && b.value.unwrap() < TOL_FD => {}
            other => failures.push(format!("{}: harness finite differences {other:?}", inst.label)),
        }
    }
    Outcome::new(failures, format!("{points} points, max relative error {worst:.2e}"))
}

fn t_flat(groups: Vec<Vec<Complex64>>) -> Vec<Complex64> {
    groups.into_iter().flatten().collect()
}

fn main() {
    let mut results = vec![
        ("weight function matches the hand-expanded sums", weight_function_fidelity()),
        ("Bethe algebra identities hold exactly", exact_algebra_suite()),
    ];
    let (suite, elapsed) = run_suite();
    results.push(("Bethe vectors are eigenvectors with the predicted eigenvalues", eigenvalues(&suite, elapsed)));
    results.push(("Shapovalov norm equals the Hessian", norm_formula(&suite)));
    results.push(("Bethe vectors are singular and nonzero", singular_and_nonzero(&suite)));
    results.push(("Bethe vectors are independent and complete", independence_and_coverage(&suite)));
    results.push(("Wronskian identities and Schubert incidence", wronskian_suite(&suite)));
    results.push(("first coefficients of both operators", first_coefficients(&suite)));
    results.push(("Bethe ansatz functions and Hessian match finite differences", gradient_consistency(&suite)));

    let mut failed = false;
    for (k, (name, o)) in results.iter().enumerate() {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failed |= !o.pass;
        println!("{verdict} criterion {}: {name} ({})", k + 1, o.detail);
    }
    if failed {
        std::process::exit(1);
    }
}
