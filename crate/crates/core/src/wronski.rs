//! The polynomial side of a critical point: the tuple `h_1, ..., h_(N+1)`
//! spanning the polynomial kernel of the scalar operator, its Wronskian
//! identities, and the Schubert conditions satisfied by its span.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{GaudinError, Result};
use crate::linalg::{nullspace_svd, singular_values, DenseMatrix};
use crate::master::{GaudinProblem, PointConfig};
use crate::poly::Polynomial;
use crate::repr::Partition;
use crate::scalar::{max_modulus, rat, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentData {
    /// `d_i = lambda_inf_i + N + 1 - i`, strictly decreasing.
    pub d: Vec<usize>,
    /// Ambient bound: the flag spaces live in polynomials of degree `< d_cap`.
    pub d_cap: usize,
    /// `(d_cap - N - 1 - lambda_inf_(N+1), ..., d_cap - N - 1 - lambda_inf_1)`
    pub dual: Partition,
}

impl ExponentData {
    pub fn contains(&self, k: usize) -> bool {
        self.d.contains(&k)
    }
}

/// Exponents of the problem; `d_cap = None` picks the smallest legal value.
pub fn exponent_data<F: Scalar>(p: &GaudinProblem<F>, d_cap: Option<usize>) -> Result<ExponentData> {
    let rank = p.rank();
    let lam = p.lambda_inf().parts();
    let d: Vec<usize> = (0..rank).map(|i| lam[i] as usize + rank - 1 - i).collect();
    let widest = p
        .partitions()
        .iter()
        .map(|q| q.parts()[0])
        .chain(std::iter::once(lam[0]))
        .max()
        .unwrap_or(0) as usize;
    let min = widest + rank;
    let d_cap = match d_cap {
        Some(c) if c < min => return Err(GaudinError::AmbientTooSmall { d: c, min }),
        Some(c) => c,
        None => min,
    };
    let base = (d_cap - rank) as i64;
    let dual = Partition::new(lam.iter().rev().map(|&x| base - x).collect())?;
    Ok(ExponentData { d, d_cap, dual })
}

/// `(T_1, ..., T_N)` and `(y_1, ..., y_N)`.
pub fn boundary_polynomials<F: Scalar>(
    p: &GaudinProblem<F>,
    t: &PointConfig<F>,
) -> (Vec<Polynomial<F>>, Vec<Polynomial<F>>) {
    let n = p.n();
    (
        (0..n).map(|i| p.t_polynomial(i)).collect(),
        (0..n).map(|i| t.y_polynomial(i)).collect(),
    )
}

/// `det [g_a^(b)]`, rows indexed by the functions, columns by derivative order.
pub fn wronskian<F: Scalar>(g: &[Polynomial<F>]) -> Polynomial<F> {
    let k = g.len();
    let table: Vec<Vec<Polynomial<F>>> = g
        .iter()
        .map(|f| (0..k).map(|b| f.nth_derivative(b)).collect())
        .collect();
    let mut total = Polynomial::zero();
    let mut perm: Vec<usize> = (0..k).collect();
    permute(&mut perm, 0, &mut |sigma| {
        let mut term = Polynomial::one();
        for (a, &b) in sigma.iter().enumerate() {
            term = term * table[a][b].clone();
            if term.is_zero() {
                return;
            }
        }
        if parity(sigma) {
            total = total.clone() - term;
        } else {
            total = total.clone() + term;
        }
    });
    total
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// `true` for odd permutations.
fn parity(sigma: &[usize]) -> bool {
    let mut odd = false;
    for a in 0..sigma.len() {
        for b in a + 1..sigma.len() {
            if sigma[a] > sigma[b] {
                odd = !odd;
            }
        }
    }
    odd
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolynomialTuple<F> {
    /// `h[i-1] = h_i`, monic of degree `d_i`.
    #[serde(skip)]
    pub h: Vec<Polynomial<F>>,
    /// Coefficient-wise relative distance between `h_(N+1)` and `y_N`.
    pub y_residual: f64,
    /// Per `h_i`: `max |D h_i| / max sum |terms|` over check points.
    pub ode_residuals: Vec<f64>,
}

/// Values `c_m(u)` of the coefficients of `D = sum_m c_m d^m` at `u`.
fn operator_values<F: Scalar>(p: &GaudinProblem<F>, t: &PointConfig<F>, u: &F) -> Result<Vec<F>> {
    crate::master::master_operator_values_at(p, t, u)
}

/// `(D u^k)(u0)` for `k = 0..=deg`, and the summed term magnitudes.
fn monomial_images<F: Scalar>(c: &[F], u0: &F, deg: usize) -> (Vec<F>, Vec<f64>) {
    let mut vals = Vec::with_capacity(deg + 1);
    let mut mags = Vec::with_capacity(deg + 1);
    for k in 0..=deg {
        let mut acc = F::zero();
        let mut mag = 0.0;
        let mut falling = 1i64;
        for (m, cm) in c.iter().enumerate() {
            if m > k {
                break;
            }
            let term = cm.clone() * F::from_i64(falling) * u0.powi((k - m) as u32);
            mag += term.modulus();
            acc = acc + term;
            falling *= (k - m) as i64;
        }
        vals.push(acc);
        mags.push(mag);
    }
    (vals, mags)
}

/// Points away from the sites and coordinates where the operator is
/// evaluated.
fn check_points<F: Scalar>(p: &GaudinProblem<F>, t: &PointConfig<F>, count: usize, offset: usize) -> Vec<F> {
    let avoid: Vec<F> = p.sites().iter().cloned().chain(t.flat()).collect();
    let radius = avoid.iter().map(Scalar::modulus).fold(1.0, f64::max);
    let mut out = Vec::with_capacity(count);
    let mut k = offset;
    while out.len() < count {
        // exact: rationals 1/2, 3/2, ... scaled past the data; floating: a circle
        let u = if F::EXACT {
            F::from_rational(&rat(2 * k as i64 + 1, 2)) + F::from_i64(radius.ceil() as i64 + 1)
        } else {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / (count + offset) as f64;
            let c = Complex64::from_polar(1.5 * radius + 1.0, th + 0.1 * offset as f64);
            F::from_c64(c)
        };
        if avoid.iter().all(|a| (a.clone() - u.clone()).modulus() > 1e-3) {
            out.push(u);
        }
        k += 1;
    }
    out
}

/// The shape-normalized basis of the polynomial kernel of `D_Phi` at `t`.
pub fn solve_h_tuple<F: Scalar>(
    p: &GaudinProblem<F>,
    t: &PointConfig<F>,
    e: &ExponentData,
) -> Result<PolynomialTuple<F>> {
    let rank = p.rank();
    let deg = e.d[0];
    let n_pts = 3 * (deg + rank) + 8;
    let pts = check_points(p, t, n_pts, 0);
    let radius = pts.iter().map(Scalar::modulus).fold(1.0, f64::max);
    let mut rows = Vec::with_capacity(n_pts);
    for u in &pts {
        let c = operator_values(p, t, u)?;
        let (vals, mags) = monomial_images(&c, u, deg);
        if F::EXACT {
            rows.push(vals);
        } else {
            // column k is scaled by radius^-k, each row by its term magnitude
            let top = mags
                .iter()
                .enumerate()
                .map(|(k, m)| m / radius.powi(k as i32))
                .fold(f64::MIN_POSITIVE, f64::max);
            rows.push(
                vals.into_iter()
                    .enumerate()
                    .map(|(k, v)| v * F::from_c64(Complex64::new(1.0 / (top * radius.powi(k as i32)), 0.0)))
                    .collect(),
            );
        }
    }
    let a = DenseMatrix::from_rows(&rows);
    let kernel: Vec<Vec<F>> = if F::EXACT {
        a.nullspace(0.0)
    } else {
        let ac = a.map(Scalar::to_c64);
        nullspace_svd(&ac, 1e-10)
            .into_iter()
            .map(|v| {
                v.into_iter()
                    .enumerate()
                    .map(|(k, x)| F::from_c64(x / radius.powi(k as i32)))
                    .collect()
            })
            .collect()
    };
    if kernel.len() != rank {
        return Err(GaudinError::KernelDimensionMismatch {
            expected: rank,
            found: kernel.len(),
        });
    }
    // H = K M^-1 where M holds the rows of K at degrees d_1, ..., d_(N+1)
    let mut m = DenseMatrix::zeros(rank, rank);
    for (a_row, &di) in e.d.iter().enumerate() {
        for (b, col) in kernel.iter().enumerate() {
            m.set(a_row, b, col[di].clone());
        }
    }
    let minv = m
        .inverse()
        .ok_or_else(|| GaudinError::ShapeNormalizationFailure("kernel has no element of the required shape".into()))?;
    let mut h = Vec::with_capacity(rank);
    for (i, &di) in e.d.iter().enumerate() {
        let mut coeffs = vec![F::zero(); deg + 1];
        for (b, col) in kernel.iter().enumerate() {
            let w = minv.get(b, i).clone();
            for (k, x) in col.iter().enumerate() {
                coeffs[k] = coeffs[k].clone() + w.clone() * x.clone();
            }
        }
        let scale = max_modulus(&coeffs).max(1.0);
        for (k, c) in coeffs.iter_mut().enumerate() {
            if k > di {
                if c.modulus() > 1e-6 * scale {
                    return Err(GaudinError::ShapeNormalizationFailure(format!(
                        "h_{} has a nonzero coefficient above degree {di}",
                        i + 1
                    )));
                }
                *c = F::zero();
            } else if k == di {
                *c = F::one();
            } else if e.contains(k) {
                *c = F::zero();
            }
        }
        h.push(Polynomial::new(coeffs));
    }
    let y_n = t.y_polynomial(p.n() - 1 + usize::from(p.n() == 0));
    let y_residual = if p.n() == 0 {
        0.0
    } else {
        coefficient_distance(&h[rank - 1], &y_n)
    };
    let check = check_points(p, t, 2 * rank + 4, n_pts + 1);
    let mut ode_residuals = vec![0.0f64; rank];
    for u in &check {
        let c = operator_values(p, t, u)?;
        for (i, hi) in h.iter().enumerate() {
            let mut acc = F::zero();
            let mut mag = 0.0;
            for (m, cm) in c.iter().enumerate() {
                let term = cm.clone() * hi.nth_derivative(m).eval(u);
                mag += term.modulus();
                acc = acc + term;
            }
            let r = if mag > 0.0 { acc.modulus() / mag } else { 0.0 };
            ode_residuals[i] = ode_residuals[i].max(r);
        }
    }
    Ok(PolynomialTuple {
        h,
        y_residual,
        ode_residuals,
    })
}

/// `max |a_k - b_k| / max |b_k|`
pub fn coefficient_distance<F: Scalar>(a: &Polynomial<F>, b: &Polynomial<F>) -> f64 {
    let diff = a.clone() - b.clone();
    let scale = max_modulus(b.coeffs()).max(f64::MIN_POSITIVE);
    max_modulus(diff.coeffs()) / scale
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WronskianCheck {
    pub j: usize,
    pub residual: f64,
    pub lhs_degree: Option<usize>,
    pub rhs_degree: Option<usize>,
    pub constant: i64,
}

/// `Wr(h_(N+1), ..., h_(N+1-j)) = y_(N-j) T_N^j ... T_(N-j+1)^1 prod (d_i - d_i')`
/// for `j = 1..N`, with `y_0 = 1`.
pub fn verify_wronskian_identities<F: Scalar>(
    h: &PolynomialTuple<F>,
    p: &GaudinProblem<F>,
    t: &PointConfig<F>,
    e: &ExponentData,
) -> Vec<WronskianCheck> {
    let n = p.n();
    let (tp, y) = boundary_polynomials(p, t);
    (1..=n)
        .map(|j| {
            // h_(N+1), h_N, ..., h_(N+1-j) as zero-based h[n], ..., h[n-j]
            let args: Vec<Polynomial<F>> = (0..=j).map(|k| h.h[n - k].clone()).collect();
            let lhs = wronskian(&args);
            let mut constant = 1i64;
            for a in n - j..=n {
                for b in a + 1..=n {
                    constant *= e.d[a] as i64 - e.d[b] as i64;
                }
            }
            let mut rhs = if j == n { Polynomial::one() } else { y[n - j - 1].clone() };
            for k in 0..j {
                // T_(N-k)^(j-k)
                rhs = rhs * tp[n - 1 - k].pow((j - k) as u32);
            }
            let rhs = rhs.scale(&F::from_i64(constant));
            WronskianCheck {
                j,
                residual: coefficient_distance(&lhs, &rhs),
                lhs_degree: lhs.degree(),
                rhs_degree: rhs.degree(),
                constant,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Site<F> {
    Finite(F),
    Infinity,
}

/// One Schubert condition: `dim(q cap V) = required` where `V` is the flag
/// space named by `order` (vanishing order at a finite site, or a degree bound
/// `< order` at infinity).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankCondition {
    pub order: usize,
    pub dim: usize,
    pub required: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Incidence {
    pub passed: bool,
    pub conditions: Vec<RankCondition>,
}

/// Rank of `rows`; exact for exact fields, otherwise singular values above
/// `1e-8` after scaling every row by `row_scale`.
fn rank_of<F: Scalar>(rows: &[Vec<F>], row_scale: &[f64]) -> usize {
    if rows.is_empty() || rows[0].is_empty() {
        return 0;
    }
    if F::EXACT {
        return DenseMatrix::from_rows(rows).rank(0.0);
    }
    let scaled: Vec<Vec<Complex64>> = rows
        .iter()
        .zip(row_scale)
        .map(|(r, s)| r.iter().map(|x| x.to_c64() / s.max(f64::MIN_POSITIVE)).collect())
        .collect();
    singular_values(&DenseMatrix::from_rows(&scaled))
        .iter()
        .filter(|&&s| s > 1e-8)
        .count()
}

/// Schubert conditions for `q = span(h)`. At a finite site `z` with partition
/// `lambda` (zero-padded to `N + 1` parts) the vanishing orders of `q` at `z`
/// must be exactly `lambda_j + N + 1 - j`: `dim(q cap (u-z)^e C[u]) = j` at
/// `e = lambda_j + N + 1 - j` and `j - 1` one order higher. At infinity the
/// degrees of `q` must be exactly `d_1, ..., d_(N+1)` (`lambda` is unused).
/// Every `h_i` must also have degree below `d_cap`.
pub fn schubert_incidence<F: Scalar>(
    h: &PolynomialTuple<F>,
    e: &ExponentData,
    site: &Site<F>,
    lambda: &Partition,
) -> Result<Incidence> {
    let rank = h.h.len();
    let mut conditions = Vec::new();
    let in_ambient = h.h.iter().all(|f| f.degree().is_some_and(|d| d < e.d_cap));
    match site {
        Site::Finite(z) => {
            let lam = lambda.padded(rank)?;
            let taylor: Vec<Vec<F>> = h.h.iter().map(|f| f.taylor_at(z)).collect();
            let scale: Vec<f64> = taylor.iter().map(|c| max_modulus(c)).collect();
            let dim_divisible = |order: usize| {
                let rows: Vec<Vec<F>> = taylor
                    .iter()
                    .map(|c| (0..order).map(|k| c.get(k).cloned().unwrap_or_else(F::zero)).collect())
                    .collect();
                rank - rank_of(&rows, &scale)
            };
            for j in 1..=rank {
                let order = lam.parts()[j - 1] as usize + rank - j;
                conditions.push(RankCondition {
                    order,
                    dim: dim_divisible(order),
                    required: j,
                });
                conditions.push(RankCondition {
                    order: order + 1,
                    dim: dim_divisible(order + 1),
                    required: j - 1,
                });
            }
        }
        Site::Infinity => {
            let coeffs: Vec<Vec<F>> = h.h.iter().map(|f| f.coeffs().to_vec()).collect();
            let scale: Vec<f64> = coeffs.iter().map(|c| max_modulus(c)).collect();
            // dim(q cap {deg < k}) = rank - rank(coefficients of degree >= k)
            let dim_below = |k: usize| {
                let rows: Vec<Vec<F>> = coeffs
                    .iter()
                    .map(|c| (k..e.d_cap.max(k + 1)).map(|m| c.get(m).cloned().unwrap_or_else(F::zero)).collect())
                    .collect();
                rank - rank_of(&rows, &scale)
            };
            for (j, &dj) in e.d.iter().enumerate() {
                conditions.push(RankCondition {
                    order: dj + 1,
                    dim: dim_below(dj + 1),
                    required: rank - j,
                });
                conditions.push(RankCondition {
                    order: dj,
                    dim: dim_below(dj),
                    required: rank - j - 1,
                });
            }
        }
    }
    let passed = in_ambient && conditions.iter().all(|c| c.dim == c.required);
    Ok(Incidence { passed, conditions })
}
