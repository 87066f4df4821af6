//! The master function of a Gaudin problem, its critical points (solutions of
//! the Bethe ansatz equations), and the scalar differential operator attached
//! to a point.
//!
//! `t` has `l_i` coordinates of color `i`. Up to a constant in `z`,
//!
//! ```text
//! log Phi = sum_i sum_{j<j'} 2 log(t_ij - t_ij')
//!         - sum_i sum_{j,j'} log(t_ij - t_(i+1)j')
//!         - sum_{i,j,s} (lambda_s, alpha_i) log(t_ij - z_s)
//! ```

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GaudinError, Result};
use crate::linalg::DenseMatrix;
use crate::pencil::{pencil_compose, OperatorPencil};
use crate::poly::Polynomial;
use crate::ratfun::RationalFunction;
use crate::repr::{derive_infinity_weight, Partition};
use crate::scalar::{max_modulus, Scalar};
use crate::series::{ExpansionPoint, Series};

#[derive(Clone, Debug, PartialEq)]
pub struct GaudinProblem<F> {
    n: usize,
    partitions: Vec<Partition>,
    l: Vec<usize>,
    z: Vec<F>,
    lambda_inf: Partition,
}

impl<F: Scalar> GaudinProblem<F> {
    /// `n` is `N`, so the algebra is `gl(N+1)`; each partition must have at
    /// most `N + 1` parts with the last one zero.
    pub fn new(n: usize, partitions: Vec<Partition>, l: Vec<usize>, z: Vec<F>) -> Result<Self> {
        let rank = n + 1;
        if l.len() != n {
            return Err(GaudinError::DimensionMismatch(format!("l has {} entries, expected {n}", l.len())));
        }
        if partitions.len() != z.len() {
            return Err(GaudinError::DimensionMismatch(format!(
                "{} partitions for {} sites",
                partitions.len(),
                z.len()
            )));
        }
        let partitions = partitions
            .iter()
            .map(|p| {
                let q = p.padded(rank)?;
                if q.parts()[n] != 0 {
                    return Err(GaudinError::NotAPartition(format!("{:?} has a nonzero last part", p.parts())));
                }
                Ok(q)
            })
            .collect::<Result<Vec<_>>>()?;
        for a in 0..z.len() {
            for b in a + 1..z.len() {
                if (z[a].clone() - z[b].clone()).is_zero() {
                    return Err(GaudinError::RepeatedSites);
                }
            }
        }
        let lambda_inf = derive_infinity_weight(&partitions, &l)?;
        Ok(GaudinProblem {
            n,
            partitions,
            l,
            z,
            lambda_inf,
        })
    }

    /// `N`
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.n + 1
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn l(&self) -> &[usize] {
        &self.l
    }

    pub fn l_total(&self) -> usize {
        self.l.iter().sum()
    }

    pub fn sites(&self) -> &[F] {
        &self.z
    }

    pub fn lambda_inf(&self) -> &Partition {
        &self.lambda_inf
    }

    /// `(lambda_s, alpha_i)`, zero-based `i`.
    pub fn exponent(&self, s: usize, i: usize) -> i64 {
        let p = self.partitions[s].parts();
        p[i] - p[i + 1]
    }

    pub fn map_sites<G: Scalar>(&self, f: impl Fn(&F) -> G) -> GaudinProblem<G> {
        GaudinProblem {
            n: self.n,
            partitions: self.partitions.clone(),
            l: self.l.clone(),
            z: self.z.iter().map(f).collect(),
            lambda_inf: self.lambda_inf.clone(),
        }
    }

    pub fn to_complex(&self) -> GaudinProblem<Complex64> {
        self.map_sites(Scalar::to_c64)
    }

    /// `T_i(u) = prod_s (u - z_s)^(lambda_s, alpha_i)`, zero-based `i`.
    pub fn t_polynomial(&self, i: usize) -> Polynomial<F> {
        let mut out = Polynomial::one();
        for (s, zs) in self.z.iter().enumerate() {
            out = out * Polynomial::linear(zs.clone()).pow(self.exponent(s, i) as u32);
        }
        out
    }
}

/// Grouped coordinates `t_ij`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointConfig<F> {
    pub coords: Vec<Vec<F>>,
}

impl<F: Scalar> PointConfig<F> {
    pub fn new(coords: Vec<Vec<F>>) -> Self {
        PointConfig { coords }
    }

    pub fn empty(n: usize) -> Self {
        PointConfig { coords: vec![Vec::new(); n] }
    }

    pub fn flat(&self) -> Vec<F> {
        self.coords.iter().flatten().cloned().collect()
    }

    pub fn from_flat(l: &[usize], v: &[F]) -> Self {
        let mut out = Vec::with_capacity(l.len());
        let mut k = 0;
        for &li in l {
            out.push(v[k..k + li].to_vec());
            k += li;
        }
        PointConfig { coords: out }
    }

    /// `y_i(u) = prod_j (u - t_ij)`, zero-based `i`.
    pub fn y_polynomial(&self, i: usize) -> Polynomial<F> {
        Polynomial::from_roots(&self.coords[i])
    }

    pub fn to_complex(&self) -> PointConfig<Complex64> {
        PointConfig {
            coords: self
                .coords
                .iter()
                .map(|g| g.iter().map(Scalar::to_c64).collect())
                .collect(),
        }
    }

    /// Checks the shape against `l` and membership in the domain where the
    /// master function is defined and nonzero.
    pub fn check_in_u(&self, p: &GaudinProblem<F>) -> Result<()> {
        let shape: Vec<usize> = self.coords.iter().map(Vec::len).collect();
        if shape != p.l {
            return Err(GaudinError::PointNotInU(format!("group sizes {shape:?} differ from l = {:?}", p.l)));
        }
        let clash = |a: &F, b: &F| (a.clone() - b.clone()).is_zero();
        for (i, g) in self.coords.iter().enumerate() {
            for (j, t) in g.iter().enumerate() {
                if g[j + 1..].iter().any(|u| clash(t, u)) {
                    return Err(GaudinError::PointNotInU(format!("t[{i}][{j}] collides within its group")));
                }
                if i + 1 < self.coords.len() && self.coords[i + 1].iter().any(|u| clash(t, u)) {
                    return Err(GaudinError::PointNotInU(format!("t[{i}][{j}] collides with group {}", i + 1)));
                }
                for (s, zs) in p.z.iter().enumerate() {
                    if p.exponent(s, i) != 0 && clash(t, zs) {
                        return Err(GaudinError::PointNotInU(format!("t[{i}][{j}] sits on site {s}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Flat index of each coordinate together with its color.
fn colors(l: &[usize]) -> Vec<usize> {
    l.iter().enumerate().flat_map(|(i, &li)| std::iter::repeat(i).take(li)).collect()
}

/// The Bethe ansatz functions `Psi_ij = d log Phi / d t_ij`.
pub fn gradient<F: Scalar>(p: &GaudinProblem<F>, t: &PointConfig<F>) -> Result<Vec<Vec<F>>> {
    t.check_in_u(p)?;
    let x = t.flat();
    let col = colors(&p.l);
    let mut out = vec![F::zero(); x.len()];
    for a in 0..x.len() {
        let mut acc = F::zero();
        for b in 0..x.len() {
            if a == b {
                continue;
            }
            let inv = (x[a].clone() - x[b].clone()).recip();
            if col[a] == col[b] {
                acc = acc + F::from_i64(2) * inv;
            } else if col[a].abs_diff(col[b]) == 1 {
                acc = acc - inv;
            }
        }
        for (s, zs) in p.z.iter().enumerate() {
            let m = p.exponent(s, col[a]);
            if m != 0 {
                acc = acc - F::from_i64(m) / (x[a].clone() - zs.clone());
            }
        }
        out[a] = acc;
    }
    Ok(PointConfig::from_flat(&p.l, &out).coords)
}

/// `log Phi` summed term by term with principal logarithms (so its real part
/// is `log |Phi|`), and the gradient.
pub fn log_phi_and_gradient(
    p: &GaudinProblem<Complex64>,
    t: &PointConfig<Complex64>,
) -> Result<(Complex64, Vec<Vec<Complex64>>)> {
    let grad = gradient(p, t)?;
    let x = t.flat();
    let col = colors(&p.l);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..x.len() {
        for b in a + 1..x.len() {
            let d = x[a] - x[b];
            if col[a] == col[b] {
                acc += 2.0 * d.ln();
            } else if col[a].abs_diff(col[b]) == 1 {
                acc -= d.ln();
            }
        }
        for (s, zs) in p.z.iter().enumerate() {
            let m = p.exponent(s, col[a]);
            if m != 0 {
                acc -= (m as f64) * (x[a] - zs).ln();
            }
        }
    }
    for s in 0..p.z.len() {
        for s2 in s + 1..p.z.len() {
            let k = p.partitions[s].weight().dot(&p.partitions[s2].weight());
            if k != 0 {
                acc += (k as f64) * (p.z[s] - p.z[s2]).ln();
            }
        }
    }
    Ok((acc, grad))
}

/// Matrix of second partials of `log Phi` (flat coordinates) and its
/// determinant; `(1, [])` when there are no coordinates.
pub fn hessian_log_phi<F: Scalar>(p: &GaudinProblem<F>, t: &PointConfig<F>) -> Result<(F, DenseMatrix<F>)> {
    t.check_in_u(p)?;
    let m = hessian_matrix(p, &t.flat());
    Ok((m.determinant(), m))
}

fn hessian_matrix<F: Scalar>(p: &GaudinProblem<F>, x: &[F]) -> DenseMatrix<F> {
    let col = colors(&p.l);
    let k = x.len();
    let mut h = DenseMatrix::zeros(k, k);
    for a in 0..k {
        let mut diag = F::zero();
        for b in 0..k {
            if a == b {
                continue;
            }
            let d = x[a].clone() - x[b].clone();
            let inv2 = (d.clone() * d).recip();
            if col[a] == col[b] {
                h.set(a, b, F::from_i64(2) * inv2.clone());
                diag = diag - F::from_i64(2) * inv2;
            } else if col[a].abs_diff(col[b]) == 1 {
                h.set(a, b, -inv2.clone());
                diag = diag + inv2;
            }
        }
        for (s, zs) in p.z.iter().enumerate() {
            let m = p.exponent(s, col[a]);
            if m != 0 {
                let d = x[a].clone() - zs.clone();
                diag = diag + F::from_i64(m) / (d.clone() * d);
            }
        }
        h.set(a, a, diag);
    }
    h
}

/// One-point Grothendieck residue `f(p) / H_p` at a nondegenerate point.
pub fn residue_nondegenerate<F: Scalar>(f_value: &F, hessian: &F, tol_degenerate: f64) -> Result<F> {
    if hessian.is_zero() || hessian.modulus() < tol_degenerate {
        return Err(GaudinError::DegenerateCriticalPoint(hessian.modulus()));
    }
    Ok(f_value.clone() / hessian.clone())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub seed: u64,
    /// Number of Newton starts; `None` means `200 * max(expected, 1)`.
    pub starts: Option<usize>,
    pub tol_residual: f64,
    pub tol_dedup: f64,
    /// `None` means `1e-8 * s^l` with `s = 1 / diam(z)^2`.
    pub tol_degenerate: Option<f64>,
    /// Steps landing closer than this (relative to the site scale) to a
    /// forbidden hyperplane are rejected.
    pub pole_margin: f64,
    pub max_iter: usize,
    /// Stop early once this many nondegenerate orbits are found.
    pub expected: Option<usize>,
    pub precision: String,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 1,
            starts: None,
            tol_residual: 1e-10,
            tol_dedup: 1e-8,
            tol_degenerate: None,
            pole_margin: 1e-9,
            max_iter: 200,
            expected: None,
            precision: "double".into(),
        }
    }
}

/// Length scale of the sites (diameter, or 1 for fewer than two sites).
pub fn site_scale(z: &[Complex64]) -> f64 {
    let mut d = 0.0f64;
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            d = d.max((z[a] - z[b]).norm());
        }
    }
    if d > 0.0 {
        d
    } else {
        1.0
    }
}

impl SolverConfig {
    pub fn degenerate_threshold(&self, p: &GaudinProblem<Complex64>) -> f64 {
        self.tol_degenerate.unwrap_or_else(|| {
            let s = site_scale(&p.z).powi(-2);
            1e-8 * s.powi(p.l_total() as i32)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalOrbit {
    pub rep: PointConfig<Complex64>,
    pub residual: f64,
    pub hessian: Complex64,
    pub degenerate: bool,
    /// `Some(1)` for nondegenerate points, unknown otherwise.
    pub milnor: Option<u32>,
}

/// Sort key of a coordinate after rounding to the dedup grid.
fn rounded_key(x: &Complex64, tol: f64) -> (i64, i64) {
    ((x.re / tol).round() as i64, (x.im / tol).round() as i64)
}

/// Sorts each group by rounded `(re, im)`; idempotent.
pub fn canonicalize_orbit(t: &PointConfig<Complex64>, tol_dedup: f64) -> PointConfig<Complex64> {
    PointConfig {
        coords: t
            .coords
            .iter()
            .map(|g| {
                let mut g = g.clone();
                g.sort_by_key(|x| rounded_key(x, tol_dedup));
                g
            })
            .collect(),
    }
}

/// Rounded keys of the canonical representative; equal keys mean the same
/// orbit up to the dedup tolerance.
pub fn orbit_key(t: &PointConfig<Complex64>, tol_dedup: f64) -> Vec<Vec<(i64, i64)>> {
    canonicalize_orbit(t, tol_dedup)
        .coords
        .iter()
        .map(|g| g.iter().map(|x| rounded_key(x, tol_dedup)).collect())
        .collect()
}

/// Whether two points lie in the same orbit: every group of one can be
/// matched coordinate by coordinate to the other within `tol`.
pub fn same_orbit(a: &PointConfig<Complex64>, b: &PointConfig<Complex64>, tol: f64) -> bool {
    a.coords.iter().zip(&b.coords).all(|(ga, gb)| {
        let mut used = vec![false; gb.len()];
        ga.iter().all(|x| {
            let scale = x.norm().max(1.0);
            let hit = (0..gb.len())
                .filter(|&k| !used[k])
                .min_by(|&p, &q| (gb[p] - x).norm().total_cmp(&(gb[q] - x).norm()))
                .filter(|&k| (gb[k] - x).norm() <= tol * scale);
            match hit {
                Some(k) => {
                    used[k] = true;
                    true
                }
                None => false,
            }
        })
    })
}

fn residual_norm(p: &GaudinProblem<Complex64>, x: &[Complex64]) -> Option<f64> {
    let t = PointConfig::from_flat(&p.l, x);
    gradient(p, &t).ok().map(|g| max_modulus(&g.concat()))
}

/// Smallest distance from `x` to a forbidden hyperplane.
fn pole_distance(p: &GaudinProblem<Complex64>, x: &[Complex64]) -> f64 {
    let col = colors(&p.l);
    let mut d = f64::INFINITY;
    for a in 0..x.len() {
        for b in a + 1..x.len() {
            if col[a] == col[b] || col[a].abs_diff(col[b]) == 1 {
                d = d.min((x[a] - x[b]).norm());
            }
        }
        for (s, zs) in p.z.iter().enumerate() {
            if p.exponent(s, col[a]) != 0 {
                d = d.min((x[a] - zs).norm());
            }
        }
    }
    d
}

/// Damped Newton from `x0`; returns the converged point and its residual.
pub fn newton(p: &GaudinProblem<Complex64>, x0: Vec<Complex64>, cfg: &SolverConfig) -> Option<(Vec<Complex64>, f64)> {
    let scale = site_scale(&p.z).max(p.z.iter().map(|z| z.norm()).fold(0.0, f64::max));
    let margin = cfg.pole_margin * scale;
    let mut x = x0;
    if pole_distance(p, &x) <= margin {
        return None;
    }
    let mut res = residual_norm(p, &x)?;
    let mut polish = 0;
    for _ in 0..cfg.max_iter {
        if res < cfg.tol_residual {
            // a couple of full steps past the threshold tighten the root
            polish += 1;
            if polish > 2 {
                break;
            }
        }
        let t = PointConfig::from_flat(&p.l, &x);
        let g = gradient(p, &t).ok()?.concat();
        let h = hessian_matrix(p, &x);
        let rhs: Vec<Complex64> = g.iter().map(|v| -v).collect();
        let step = h.solve(&rhs)?;
        // the step may move at most half way to the nearest forbidden hyperplane
        let longest = step.iter().map(|d| d.norm()).fold(0.0, f64::max);
        let room = 0.5 * pole_distance(p, &x);
        let mut lambda = if longest > room { room / longest } else { 1.0 };
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<Complex64> = x.iter().zip(&step).map(|(a, d)| a + d * lambda).collect();
            if pole_distance(p, &trial) > margin {
                if let Some(r) = residual_norm(p, &trial) {
                    if polish == 0 || r <= res * 10.0 {
                        x = trial;
                        res = r;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
        if x.iter().any(|v| v.norm() > 1e8 * scale.max(1.0)) {
            return None;
        }
    }
    (res < cfg.tol_residual).then_some((x, res))
}

fn random_start(p: &GaudinProblem<Complex64>, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let radius = 2.0 * p.z.iter().map(|z| z.norm()).fold(0.0, f64::max).max(0.5);
    let scale = site_scale(&p.z);
    let mode = if p.z.is_empty() { 0 } else { rng.gen_range(0..3) };
    (0..p.l_total())
        .map(|_| match mode {
            // anywhere in the disc
            0 => Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)),
            // near a site
            1 => {
                let s = rng.gen_range(0..p.z.len());
                p.z[s] + 0.25 * scale * Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
            // on a segment between two sites, slightly off the line
            _ => {
                let a = p.z[rng.gen_range(0..p.z.len())];
                let b = p.z[rng.gen_range(0..p.z.len())];
                a + (b - a) * rng.gen::<f64>()
                    + 0.05 * scale * Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
        })
        .collect()
}

/// Multistart Newton search for critical points, deduplicated into orbits
/// and sorted by canonical representative.
pub fn find_critical_orbits(p: &GaudinProblem<Complex64>, cfg: &SolverConfig) -> Vec<CriticalOrbit> {
    let tol_deg = cfg.degenerate_threshold(p);
    if p.l_total() == 0 {
        return vec![CriticalOrbit {
            rep: PointConfig::empty(p.n),
            residual: 0.0,
            hessian: Complex64::new(1.0, 0.0),
            degenerate: false,
            milnor: Some(1),
        }];
    }
    let starts = cfg.starts.unwrap_or(200 * cfg.expected.unwrap_or(1).max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut found: Vec<CriticalOrbit> = Vec::new();
    let batch = 32;
    let mut done = 0;
    while done < starts {
        let count = batch.min(starts - done);
        let inits: Vec<Vec<Complex64>> = (0..count).map(|_| random_start(p, &mut rng)).collect();
        let roots: Vec<Option<(Vec<Complex64>, f64)>> =
            inits.into_par_iter().map(|x0| newton(p, x0, cfg)).collect();
        for (x, res) in roots.into_iter().flatten() {
            let t = canonicalize_orbit(&PointConfig::from_flat(&p.l, &x), cfg.tol_dedup);
            if t.check_in_u(p).is_err() || found.iter().any(|o| same_orbit(&o.rep, &t, cfg.tol_dedup)) {
                continue;
            }
            let Ok((h, _)) = hessian_log_phi(p, &t) else { continue };
            let degenerate = h.norm() < tol_deg;
            found.push(CriticalOrbit {
                rep: t,
                residual: res,
                hessian: h,
                degenerate,
                milnor: (!degenerate).then_some(1),
            });
        }
        done += count;
        if let Some(e) = cfg.expected {
            if found.len() >= e && found.iter().all(|o| !o.degenerate) {
                break;
            }
        }
    }
    found.sort_by(|a, b| orbit_key(&a.rep, cfg.tol_dedup).cmp(&orbit_key(&b.rep, cfg.tol_dedup)));
    found
}

/// Follows critical points along the straight path from the current sites to
/// `target`, correcting with Newton at each of `steps` stages. Points that
/// fail to converge at some stage come back as `None`.
pub fn continue_in_sites(
    p: &GaudinProblem<Complex64>,
    points: &[PointConfig<Complex64>],
    target: &[Complex64],
    steps: usize,
    cfg: &SolverConfig,
) -> Result<Vec<Option<PointConfig<Complex64>>>> {
    let steps = steps.max(1);
    let mut current: Vec<Option<Vec<Complex64>>> = points.iter().map(|t| Some(t.flat())).collect();
    for k in 1..=steps {
        let tau = k as f64 / steps as f64;
        let z: Vec<Complex64> = p.z.iter().zip(target).map(|(a, b)| a * (1.0 - tau) + b * tau).collect();
        let q = GaudinProblem::new(p.n, p.partitions.clone(), p.l.clone(), z)?;
        current = current
            .into_iter()
            .map(|x| x.and_then(|x| newton(&q, x, cfg).map(|(y, _)| y)))
            .collect();
    }
    Ok(current
        .into_iter()
        .map(|x| x.map(|x| canonicalize_orbit(&PointConfig::from_flat(&p.l, &x), cfg.tol_dedup)))
        .collect())
}

/// The arguments `a_1, ..., a_(N+1)` of the factors `(d/du - a_k)` of the
/// scalar operator, each as a list of simple poles `(residue, location)`:
/// `a_k = log'(y_(k-1) prod_(m>=k) T_m / y_k)` for `k <= N` and
/// `a_(N+1) = log' y_N`, with `y_0 = 1`.
fn factor_poles<F: Scalar>(p: &GaudinProblem<F>, t: &PointConfig<F>) -> Vec<Vec<(i64, F)>> {
    let n = p.n;
    (1..=n + 1)
        .map(|k| {
            let mut poles = Vec::new();
            if k >= 2 {
                poles.extend(t.coords[k - 2].iter().map(|x| (1, x.clone())));
            }
            if k <= n {
                for m in k..=n {
                    for (s, zs) in p.z.iter().enumerate() {
                        let e = p.exponent(s, m - 1);
                        if e != 0 {
                            poles.push((e, zs.clone()));
                        }
                    }
                }
                poles.extend(t.coords[k - 1].iter().map(|x| (-1, x.clone())));
            }
            poles
        })
        .collect()
}

/// The operator `D_Phi` at `t` with rational-function coefficients.
pub fn master_operator_at<F: Scalar>(
    p: &GaudinProblem<F>,
    t: &PointConfig<F>,
) -> Result<OperatorPencil<RationalFunction<F>>> {
    t.check_in_u(p)?;
    let mut out = OperatorPencil::multiplication(RationalFunction::one());
    for poles in factor_poles(p, t) {
        let a = poles.into_iter().fold(RationalFunction::zero(), |acc, (c, x)| {
            acc + RationalFunction::pole(F::from_i64(c), x)
        });
        out = pencil_compose(&out, &OperatorPencil::first_order(&a))?;
    }
    Ok(out)
}

fn master_series_pencil<F: Scalar>(
    p: &GaudinProblem<F>,
    t: &PointConfig<F>,
    point: ExpansionPoint<F>,
    len: usize,
) -> Result<OperatorPencil<Series<F>>> {
    t.check_in_u(p)?;
    let mut out = OperatorPencil::multiplication(Series::constant(point.clone(), len, F::one()));
    for poles in factor_poles(p, t) {
        let mut a = Series::zero(point.clone(), len);
        for (c, x) in poles {
            a = a.add(&Series::pole(point.clone(), len, F::from_i64(c), &x)?);
        }
        out = pencil_compose(&out, &OperatorPencil::first_order(&a))?;
    }
    Ok(out)
}

/// `[G_1(u0), ..., G_(N+1)(u0)]`.
pub fn master_coefficients_at<F: Scalar>(p: &GaudinProblem<F>, t: &PointConfig<F>, u0: &F) -> Result<Vec<F>> {
    let pencil = master_series_pencil(p, t, ExpansionPoint::Finite(u0.clone()), p.rank() + 1)?;
    Ok((1..=p.rank()).map(|i| pencil.lower_coeff(i).value()).collect())
}

/// Values at `u0` of the coefficients of `D_Phi`, indexed by derivative order.
pub fn master_operator_values_at<F: Scalar>(p: &GaudinProblem<F>, t: &PointConfig<F>, u0: &F) -> Result<Vec<F>> {
    let pencil = master_series_pencil(p, t, ExpansionPoint::Finite(u0.clone()), p.rank() + 1)?;
    Ok(pencil.coeffs().iter().map(|c| c.value()).collect())
}

/// `out[i-1][j-1] = G_ij` for `j = 1..=j_max`.
pub fn master_expansion_at_infinity<F: Scalar>(
    p: &GaudinProblem<F>,
    t: &PointConfig<F>,
    j_max: usize,
) -> Result<Vec<Vec<F>>> {
    let pencil = master_series_pencil(p, t, ExpansionPoint::Infinity, j_max + 1)?;
    Ok((1..=p.rank()).map(|i| pencil.lower_coeff(i).coeffs()[1..].to_vec()).collect())
}

/// `-sum_s |lambda_s| / (u - z_s)`, the first coefficient of both operators.
pub fn first_coefficient<F: Scalar>(p: &GaudinProblem<F>) -> RationalFunction<F> {
    p.z.iter().zip(&p.partitions).fold(RationalFunction::zero(), |acc, (zs, lam)| {
        acc + RationalFunction::pole(F::from_i64(-lam.size()), zs.clone())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn part(p: &[i64]) -> Partition {
        Partition::new(p.to_vec()).unwrap()
    }

    fn two_qubits() -> GaudinProblem<Rational> {
        GaudinProblem::new(1, vec![part(&[1, 0]), part(&[1, 0])], vec![1], vec![rat(0, 1), rat(1, 1)]).unwrap()
    }

    fn at(x: Rational) -> PointConfig<Rational> {
        PointConfig::new(vec![vec![x]])
    }

    #[test]
    fn problem_validation() {
        assert!(matches!(
            GaudinProblem::new(1, vec![part(&[1, 1])], vec![0], vec![rat(0, 1)]),
            Err(GaudinError::NotAPartition(_))
        ));
        assert_eq!(
            GaudinProblem::new(1, vec![part(&[1]), part(&[1])], vec![1], vec![rat(0, 1), rat(0, 1)]),
            Err(GaudinError::RepeatedSites)
        );
        assert_eq!(two_qubits().lambda_inf(), &part(&[1, 1]));
        assert_eq!(two_qubits().t_polynomial(0), Polynomial::from_roots(&[rat(0, 1), rat(1, 1)]));
    }

    #[test]
    fn gradient_examples() {
        let p = two_qubits();
        assert_eq!(gradient(&p, &at(rat(1, 2))).unwrap(), vec![vec![rat(0, 1)]]);
        assert_eq!(gradient(&p, &at(rat(1, 4))).unwrap(), vec![vec![rat(-8, 3)]]);
        assert!(matches!(gradient(&p, &at(rat(0, 1))), Err(GaudinError::PointNotInU(_))));
        let empty = GaudinProblem::new(1, vec![part(&[1, 0])], vec![0], vec![rat(0, 1)]).unwrap();
        assert!(gradient(&empty, &PointConfig::empty(1)).unwrap()[0].is_empty());
        let (v, _) = log_phi_and_gradient(&empty.to_complex(), &PointConfig::empty(1)).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn hessian_examples() {
        let p = two_qubits();
        assert_eq!(hessian_log_phi(&p, &at(rat(1, 2))).unwrap().0, rat(8, 1));
        let empty = GaudinProblem::new(1, vec![part(&[1, 0])], vec![0], vec![rat(0, 1)]).unwrap();
        let (h, m) = hessian_log_phi(&empty, &PointConfig::empty(1)).unwrap();
        assert_eq!((h, m.rows()), (rat(1, 1), 0));
    }

    #[test]
    fn residues() {
        assert_eq!(residue_nondegenerate(&rat(8, 1), &rat(8, 1), 1e-8).unwrap(), rat(1, 1));
        assert_eq!(residue_nondegenerate(&rat(0, 1), &rat(8, 1), 1e-8).unwrap(), rat(0, 1));
        assert!(matches!(
            residue_nondegenerate(&rat(1, 1), &rat(0, 1), 1e-8),
            Err(GaudinError::DegenerateCriticalPoint(_))
        ));
    }

    #[test]
    fn canonical_orbits() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let t = PointConfig::new(vec![vec![c(3.0), c(1.0)]]);
        let s = canonicalize_orbit(&t, 1e-8);
        assert_eq!(s.coords, vec![vec![c(1.0), c(3.0)]]);
        assert_eq!(canonicalize_orbit(&s, 1e-8), s);
        let a = PointConfig::new(vec![vec![c(0.2)]]);
        let b = PointConfig::new(vec![vec![c(0.2 + 1e-9)]]);
        assert_eq!(orbit_key(&a, 1e-8), orbit_key(&b, 1e-8));
        assert!(same_orbit(&a, &b, 1e-8));
    }

    #[test]
    fn solver_finds_known_roots() {
        let p = two_qubits().to_complex();
        let orbits = find_critical_orbits(&p, &SolverConfig { starts: Some(20), ..Default::default() });
        assert_eq!(orbits.len(), 1);
        assert!((orbits[0].rep.coords[0][0] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((orbits[0].hessian - Complex64::new(8.0, 0.0)).norm() < 1e-9);

        let three = GaudinProblem::new(
            1,
            vec![part(&[1, 0]); 3],
            vec![1],
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)],
        )
        .unwrap();
        let orbits = find_critical_orbits(&three, &SolverConfig { starts: Some(64), ..Default::default() });
        // 1/t + 1/(t-1) + 1/(t-2) = 0  <=>  3t^2 - 6t + 2 = 0
        let mut roots: Vec<f64> = orbits.iter().map(|o| o.rep.coords[0][0].re).collect();
        roots.sort_by(f64::total_cmp);
        let d = 3f64.sqrt() / 3.0;
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - (1.0 - d)).abs() < 1e-10 && (roots[1] - (1.0 + d)).abs() < 1e-10);

        let empty = GaudinProblem::new(1, vec![part(&[1, 0])], vec![0], vec![Complex64::new(0.0, 0.0)]).unwrap();
        let orbits = find_critical_orbits(&empty, &SolverConfig::default());
        assert_eq!(orbits.len(), 1);
        assert_eq!(orbits[0].hessian, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn scalar_operator_examples() {
        let p = two_qubits();
        let d = master_operator_at(&p, &at(rat(1, 2))).unwrap();
        let g2 = RationalFunction::new(Polynomial::constant(rat(2, 1)), Polynomial::from_roots(&[rat(0, 1), rat(1, 1)]))
            .unwrap();
        assert_eq!(d.lower_coeff(2), g2);
        assert_eq!(d.lower_coeff(1), first_coefficient(&p));
        let g = master_expansion_at_infinity(&p, &at(rat(1, 2)), 3).unwrap();
        assert_eq!(g[1][..2], [rat(0, 1), rat(2, 1)]);
        assert_eq!(master_coefficients_at(&p, &at(rat(1, 2)), &rat(3, 1)).unwrap()[1], rat(1, 3));
        // with no coordinates every y_i is 1
        let empty = GaudinProblem::new(1, vec![part(&[2, 0])], vec![0], vec![rat(0, 1)]).unwrap();
        let d = master_operator_at(&empty, &PointConfig::empty(1)).unwrap();
        assert_eq!(d.lower_coeff(1), RationalFunction::pole(rat(-2, 1), rat(0, 1)));
        assert!(d.lower_coeff(2).is_zero());
    }
}
