//! The universal differential operator of the Gaudin model and the commutative
//! family of operators read off from its coefficients.
//!
//! The operator is the row determinant of the `(N+1) x (N+1)` matrix with
//! entries `delta_ij d/du - e_ji(u)`, where
//! `e_ij(u) = sum_s e_ij^(s) / (u - z_s)` acts on the tensor product of
//! evaluation modules. Writing it as `d^(N+1) + sum_i B_i(u) d^(N+1-i)` gives
//! the operator-valued functions `B_i(u)`.
//!
//! Forming `B_i(u)` as matrices of rational functions is only practical for
//! tiny modules, so the main engine applies the row determinant to a vector
//! instead: the product of first-order factors is accumulated right to left on
//! `v`, with the coefficient functions kept as truncated expansions around a
//! point (finite or infinity). One pass yields every `B_i v` at once.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GaudinError, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};
use crate::pencil::{pencil_compose, DiffRing, OperatorPencil, RfMatrix};
use crate::ratfun::RationalFunction;
use crate::repr::{GlModule, Partition, SymmetricForm};
use crate::scalar::{max_modulus, rat, Scalar};
use crate::series::{ExpansionPoint, Series, VecSeries};

/// Default number of expansion coefficients: `n * max |lambda| + N + 1`.
pub fn default_jmax(partitions: &[Partition], rank: usize) -> usize {
    let max = partitions.iter().map(|p| p.size()).max().unwrap_or(0) as usize;
    partitions.len() * max + rank
}

fn check_sites<F: Scalar>(z: &[F], n_factors: usize) -> Result<()> {
    if z.len() != n_factors {
        return Err(GaudinError::DimensionMismatch(format!(
            "{} sites for {} tensor factors",
            z.len(),
            n_factors
        )));
    }
    for a in 0..z.len() {
        for b in a + 1..z.len() {
            if (z[a].clone() - z[b].clone()).is_zero() {
                return Err(GaudinError::RepeatedSites);
            }
        }
    }
    Ok(())
}

/// `e_ij(u)` on the tensor of evaluation modules, as a matrix of rational
/// functions (zero-based generator indices).
pub fn current_matrix<F: Scalar>(module: &GlModule, i: usize, j: usize, z: &[F]) -> Result<RfMatrix<F>> {
    check_sites(z, module.n_factors())?;
    let mut out = RfMatrix::zeros(module.dim());
    for (s, zs) in z.iter().enumerate() {
        let m = module.slot_gen(s, i, j).map(F::from_rational);
        out = out.add(&RfMatrix::from_scaled(&m, &RationalFunction::pole(F::one(), zs.clone())));
    }
    Ok(out)
}

/// The universal operator as a pencil over matrices of rational functions.
/// Cost grows quickly with the module dimension; meant for small modules.
pub fn universal_operator<F: Scalar>(module: &GlModule, z: &[F]) -> Result<OperatorPencil<RfMatrix<F>>> {
    let r = module.rank();
    let mut currents = Vec::with_capacity(r * r);
    for i in 0..r {
        for j in 0..r {
            currents.push(current_matrix(module, i, j, z)?);
        }
    }
    let dim = module.dim();
    let mut total: Option<OperatorPencil<RfMatrix<F>>> = None;
    for sigma in permutations(r) {
        let mut product = OperatorPencil::multiplication(RfMatrix::identity(dim));
        for (row, &col) in sigma.iter().enumerate() {
            // entry(row, col) = delta d/du - e_(col,row)(u)
            let minus_e = currents[col * r + row].neg();
            let factor = if row == col {
                OperatorPencil::new(vec![minus_e, RfMatrix::identity(dim)])
            } else {
                OperatorPencil::multiplication(minus_e)
            };
            product = pencil_compose(&product, &factor)?;
        }
        if sign(&sigma) < 0 {
            product = product.neg();
        }
        total = Some(match total {
            None => product,
            Some(t) => t.add(&product),
        });
    }
    Ok(total.expect("at least one permutation"))
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(r - 1) {
        for pos in 0..r {
            let mut q = p.clone();
            q.insert(pos, r - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn sign(sigma: &[usize]) -> i32 {
    let mut inv = 0;
    for a in 0..sigma.len() {
        for b in a + 1..sigma.len() {
            if sigma[a] > sigma[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Vector-valued function of `u` in some representation.
trait VecFn<F: Scalar>: Clone {
    type Ctx;
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn derivative(&self) -> Self;
    /// `e_ij(u) * self`
    fn current(&self, ctx: &Self::Ctx, cur: &BetheCurrents<F>, i: usize, j: usize) -> Self;
}

impl<F: Scalar> VecFn<F> for VecSeries<F> {
    /// Expansions of `1/(u - z_s)`.
    type Ctx = Vec<Series<F>>;

    fn add(&self, other: &Self) -> Self {
        VecSeries::add(self, other)
    }
    fn neg(&self) -> Self {
        VecSeries::neg(self)
    }
    fn derivative(&self) -> Self {
        VecSeries::derivative(self)
    }
    fn current(&self, poles: &Self::Ctx, cur: &BetheCurrents<F>, i: usize, j: usize) -> Self {
        let mut acc = VecSeries::zero(self.point().clone(), self.len(), cur.dim);
        for (s, pole) in poles.iter().enumerate() {
            let m = cur.slot(s, i, j);
            if m.nnz() == 0 {
                continue;
            }
            acc = acc.add(&self.apply_matrix(m).scalar_mul(pole));
        }
        acc
    }
}

impl<F: Scalar> VecFn<F> for Vec<RationalFunction<F>> {
    type Ctx = Vec<RationalFunction<F>>;

    fn add(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a.clone() + b.clone()).collect()
    }
    fn neg(&self) -> Self {
        self.iter().map(|a| -a.clone()).collect()
    }
    fn derivative(&self) -> Self {
        self.iter().map(RationalFunction::derivative).collect()
    }
    fn current(&self, poles: &Self::Ctx, cur: &BetheCurrents<F>, i: usize, j: usize) -> Self {
        let mut acc = vec![RationalFunction::zero(); cur.dim];
        for (s, pole) in poles.iter().enumerate() {
            let m = cur.slot(s, i, j);
            for (row, out) in acc.iter_mut().enumerate() {
                let mut sum = RationalFunction::zero();
                for (col, v) in m.row(row) {
                    if !self[*col].is_zero() {
                        sum = sum + self[*col].scale(v);
                    }
                }
                if !sum.is_zero() {
                    *out = out.clone() + sum * pole.clone();
                }
            }
        }
        acc
    }
}

/// Matrix-free handle on the universal operator: per-slot generator
/// matrices plus the sites.
#[derive(Clone, Debug)]
pub struct BetheCurrents<F> {
    rank: usize,
    dim: usize,
    z: Vec<F>,
    slots: Vec<Vec<SparseMatrix<F>>>,
    sizes: Vec<i64>,
}

impl<F: Scalar> BetheCurrents<F> {
    pub fn new(module: &GlModule, z: &[F]) -> Result<Self> {
        check_sites(z, module.n_factors())?;
        let r = module.rank();
        let slots = (0..module.n_factors())
            .map(|s| {
                (0..r * r)
                    .map(|g| module.slot_gen(s, g / r, g % r).map(F::from_rational))
                    .collect()
            })
            .collect();
        Ok(BetheCurrents {
            rank: r,
            dim: module.dim(),
            z: z.to_vec(),
            slots,
            sizes: module.factor_weights().iter().map(Partition::size).collect(),
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> &[F] {
        &self.z
    }

    fn slot(&self, s: usize, i: usize, j: usize) -> &SparseMatrix<F> {
        &self.slots[s][i * self.rank + j]
    }

    /// Coefficients `w_0, ..., w_(N+1)` of `rdet(...) * v` as a pencil.
    fn rdet_apply<V: VecFn<F>>(&self, ctx: &V::Ctx, v: V) -> Vec<V> {
        let mut acc: Option<Vec<V>> = None;
        let mut sigma = vec![0; self.rank];
        self.expand(ctx, self.rank, 0, &mut sigma, vec![v], &mut acc);
        acc.expect("nonempty expansion")
    }

    /// Places rows `rows_left - 1, ..., 0`, multiplying factors on the left so
    /// that shared suffixes of the row-ordered products are computed once.
    fn expand<V: VecFn<F>>(
        &self,
        ctx: &V::Ctx,
        rows_left: usize,
        used: u32,
        sigma: &mut [usize],
        state: Vec<V>,
        acc: &mut Option<Vec<V>>,
    ) {
        if rows_left == 0 {
            let state: Vec<V> = if sign(sigma) < 0 {
                state.iter().map(VecFn::neg).collect()
            } else {
                state
            };
            *acc = Some(match acc.take() {
                None => state,
                Some(a) => (0..a.len().max(state.len()))
                    .map(|k| match (a.get(k), state.get(k)) {
                        (Some(x), Some(y)) => x.add(y),
                        (Some(x), None) => x.clone(),
                        (None, Some(y)) => y.clone(),
                        (None, None) => unreachable!(),
                    })
                    .collect(),
            });
            return;
        }
        let row = rows_left - 1;
        for col in 0..self.rank {
            if used & (1 << col) != 0 {
                continue;
            }
            sigma[row] = col;
            let next = self.left_factor(ctx, row, col, &state);
            self.expand(ctx, row, used | (1 << col), sigma, next, acc);
        }
    }

    /// `(delta d/du - e_(col,row)(u)) * sum_k w_k d^k`.
    fn left_factor<V: VecFn<F>>(&self, ctx: &V::Ctx, row: usize, col: usize, state: &[V]) -> Vec<V> {
        let diag = row == col;
        let len = state.len() + usize::from(diag);
        (0..len)
            .map(|k| {
                let mut term = if k < state.len() {
                    Some(state[k].current(ctx, self, col, row).neg())
                } else {
                    None
                };
                if diag {
                    let mut add = |x: V| {
                        term = Some(match term.take() {
                            None => x,
                            Some(t) => t.add(&x),
                        })
                    };
                    if k >= 1 {
                        add(state[k - 1].clone());
                    }
                    if k < state.len() {
                        add(state[k].derivative());
                    }
                }
                term.expect("every coefficient receives a term")
            })
            .collect()
    }

    /// `[B_1(u0) v, ..., B_(N+1)(u0) v]`.
    pub fn apply_at(&self, u0: &F, v: &[F]) -> Result<Vec<Vec<F>>> {
        let point = ExpansionPoint::Finite(u0.clone());
        let len = self.rank + 1;
        let poles = self
            .z
            .iter()
            .map(|zs| Series::pole(point.clone(), len, F::one(), zs))
            .collect::<Result<Vec<_>>>()?;
        let w = self.rdet_apply(&poles, VecSeries::constant(point, len, v));
        Ok((1..=self.rank).map(|i| w[self.rank - i].value()).collect())
    }

    /// `out[i-1][j-1] = B_ij v` for `j = 1..=j_max`; also returns the largest
    /// constant term seen, which must vanish.
    pub fn expansion_at_infinity(&self, v: &[F], j_max: usize) -> (Vec<Vec<Vec<F>>>, f64) {
        let len = j_max + 1;
        let poles: Vec<Series<F>> = self
            .z
            .iter()
            .map(|zs| Series::pole(ExpansionPoint::Infinity, len, F::one(), zs).expect("no poles at infinity"))
            .collect();
        let w = self.rdet_apply(&poles, VecSeries::constant(ExpansionPoint::Infinity, len, v));
        let mut constant = 0.0f64;
        let out = (1..=self.rank)
            .map(|i| {
                let c = w[self.rank - i].coeffs();
                constant = constant.max(max_modulus(&c[0]));
                c[1..].to_vec()
            })
            .collect();
        (out, constant)
    }

    /// `[B_1(u) v, ..., B_(N+1)(u) v]` as vectors of rational functions.
    pub fn apply_symbolic(&self, v: &[F]) -> Vec<Vec<RationalFunction<F>>> {
        let poles: Vec<RationalFunction<F>> = self
            .z
            .iter()
            .map(|zs| RationalFunction::pole(F::one(), zs.clone()))
            .collect();
        let start: Vec<RationalFunction<F>> = v.iter().map(|x| RationalFunction::constant(x.clone())).collect();
        let w = self.rdet_apply(&poles, start);
        (1..=self.rank).map(|i| w[self.rank - i].clone()).collect()
    }

    /// Matrices `B_1(u0), ..., B_(N+1)(u0)` on the whole module.
    pub fn matrices_at(&self, u0: &F) -> Result<Vec<SparseMatrix<F>>> {
        let columns = (0..self.dim)
            .into_par_iter()
            .map(|c| {
                let mut e = vec![F::zero(); self.dim];
                e[c] = F::one();
                self.apply_at(u0, &e)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.rank)
            .map(|i| {
                SparseMatrix::from_triplets(
                    self.dim,
                    self.dim,
                    columns.iter().enumerate().flat_map(|(c, col)| {
                        col[i]
                            .iter()
                            .enumerate()
                            .filter(|(_, v)| !v.is_zero())
                            .map(move |(r, v)| (r, c, v.clone()))
                    }),
                )
            })
            .collect())
    }

    /// `-sum_s |lambda_s| / (u0 - z_s)`, the scalar by which `B_1(u0)` acts.
    pub fn first_coefficient_at(&self, u0: &F) -> F {
        self.z.iter().zip(&self.sizes).fold(F::zero(), |acc, (zs, &k)| {
            acc - F::from_i64(k) / (u0.clone() - zs.clone())
        })
    }
}

/// The operators `B_i(u)` and their expansion coefficients `B_ij`, written in
/// the basis of an invariant subspace.
#[derive(Clone, Debug)]
pub struct BetheOperatorFamily<F> {
    /// Basis of the carrier, as full-length columns.
    pub subspace: Vec<Vec<F>>,
    /// `B_i(u)` for `i = 1..=N+1`; only formed in exact arithmetic.
    pub b_u: Option<Vec<RfMatrix<F>>>,
    /// `b_coeffs[i-1][j-1]` is `B_ij`, `j = 1..=j_max`.
    pub b_coeffs: Vec<Vec<DenseMatrix<F>>>,
}

impl<F: Scalar> BetheOperatorFamily<F> {
    pub fn dim(&self) -> usize {
        self.subspace.len()
    }

    /// `B_ij`, one-based.
    pub fn coefficient(&self, i: usize, j: usize) -> &DenseMatrix<F> {
        &self.b_coeffs[i - 1][j - 1]
    }

    /// Largest entry among the `B_ij` with `j < i`, which must all vanish.
    pub fn lower_coefficient_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i0, row) in self.b_coeffs.iter().enumerate() {
            for m in row.iter().take(i0) {
                worst = worst.max(m.max_abs());
            }
        }
        worst
    }
}

/// Coordinates of vectors in a fixed basis, through an invertible square
/// block of the basis matrix.
struct Coordinates<F> {
    pivots: Vec<usize>,
    inverse: DenseMatrix<F>,
}

impl<F: Scalar> Coordinates<F> {
    fn new(basis: &[Vec<F>]) -> Result<Self> {
        let rows = DenseMatrix::from_rows(basis);
        let (_, pivots) = rows.rref(1e-12);
        if pivots.len() != basis.len() {
            return Err(GaudinError::DimensionMismatch("subspace basis is not independent".into()));
        }
        let k = basis.len();
        let mut block = DenseMatrix::zeros(k, k);
        for (a, &p) in pivots.iter().enumerate() {
            for (b, col) in basis.iter().enumerate() {
                block.set(a, b, col[p].clone());
            }
        }
        let inverse = block
            .inverse()
            .ok_or_else(|| GaudinError::DimensionMismatch("singular coordinate block".into()))?;
        Ok(Coordinates { pivots, inverse })
    }

    /// Coordinates and the size of the component outside the span.
    fn solve(&self, basis: &[Vec<F>], v: &[F]) -> (Vec<F>, f64) {
        let picked: Vec<F> = self.pivots.iter().map(|&p| v[p].clone()).collect();
        let c = self.inverse.mul_vec(&picked);
        let mut res = v.to_vec();
        for (b, cb) in basis.iter().zip(&c) {
            for (x, y) in res.iter_mut().zip(b) {
                *x = x.clone() - cb.clone() * y.clone();
            }
        }
        (c, max_modulus(&res))
    }
}

fn invariance_ok<F: Scalar>(residual: f64, scale: f64) -> bool {
    if F::EXACT {
        residual == 0.0
    } else {
        residual <= 1e-8 * scale.max(1.0)
    }
}

/// Restricts the universal operator to the span of `basis`, failing with
/// `NotInvariant` if the span is not preserved.
pub fn restrict_family<F: Scalar>(
    cur: &BetheCurrents<F>,
    basis: &[Vec<F>],
    j_max: usize,
) -> Result<BetheOperatorFamily<F>> {
    let r = cur.rank;
    let k = basis.len();
    if k == 0 {
        return Ok(BetheOperatorFamily {
            subspace: Vec::new(),
            b_u: F::EXACT.then(|| vec![RfMatrix::zeros(0); r]),
            b_coeffs: vec![vec![DenseMatrix::zeros(0, 0); j_max]; r],
        });
    }
    let coords = Coordinates::new(basis)?;
    let mut b_coeffs = vec![vec![DenseMatrix::zeros(k, k); j_max]; r];
    for (b, v) in basis.iter().enumerate() {
        let (exp, constant) = cur.expansion_at_infinity(v, j_max);
        if constant > 0.0 && (F::EXACT || constant > 1e-8 * max_modulus(v)) {
            return Err(GaudinError::NotInvariant("B_i(u) does not vanish at infinity".into()));
        }
        for i in 0..r {
            for j in 0..j_max {
                let (c, res) = coords.solve(basis, &exp[i][j]);
                if !invariance_ok::<F>(res, max_modulus(&exp[i][j])) {
                    return Err(GaudinError::NotInvariant(format!("B_({},{}) leaves the subspace", i + 1, j + 1)));
                }
                for (a, x) in c.into_iter().enumerate() {
                    b_coeffs[i][j].set(a, b, x);
                }
            }
        }
    }
    let b_u = if F::EXACT {
        let mut mats = vec![RfMatrix::zeros(k); r];
        for (b, v) in basis.iter().enumerate() {
            let sym = cur.apply_symbolic(v);
            for i in 0..r {
                let col = symbolic_coordinates(&coords, basis, &sym[i])?;
                for (a, f) in col.into_iter().enumerate() {
                    mats[i].set(a, b, f);
                }
            }
        }
        Some(mats)
    } else {
        // a point check stands in for the symbolic one
        let u0 = F::from_rational(&rat(7919, 997));
        for v in basis {
            if let Ok(vals) = cur.apply_at(&u0, v) {
                for (i, x) in vals.iter().enumerate() {
                    let (_, res) = coords.solve(basis, x);
                    if !invariance_ok::<F>(res, max_modulus(x)) {
                        return Err(GaudinError::NotInvariant(format!("B_{}(u0) leaves the subspace", i + 1)));
                    }
                }
            }
        }
        None
    };
    Ok(BetheOperatorFamily {
        subspace: basis.to_vec(),
        b_u,
        b_coeffs,
    })
}

fn symbolic_coordinates<F: Scalar>(
    coords: &Coordinates<F>,
    basis: &[Vec<F>],
    v: &[RationalFunction<F>],
) -> Result<Vec<RationalFunction<F>>> {
    let k = basis.len();
    let out: Vec<RationalFunction<F>> = (0..k)
        .map(|a| {
            coords.pivots.iter().enumerate().fold(RationalFunction::zero(), |acc, (p, &row)| {
                let w = coords.inverse.get(a, p);
                if w.is_zero() {
                    acc
                } else {
                    acc + v[row].scale(w)
                }
            })
        })
        .collect();
    for (x, vx) in v.iter().enumerate() {
        let back = basis
            .iter()
            .zip(&out)
            .fold(RationalFunction::zero(), |acc, (b, f)| {
                if b[x].is_zero() {
                    acc
                } else {
                    acc + f.scale(&b[x])
                }
            });
        if !(vx.clone() - back).is_zero() {
            return Err(GaudinError::NotInvariant("B_i(u) leaves the subspace".into()));
        }
    }
    Ok(out)
}

/// Residuals of the structural identities of the operator family on the
/// whole module, maximized over sample points.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SelfCheckReport {
    pub samples: usize,
    /// `[B_i(u), B_j(v)]`, relative to `|B_i(u)| |B_j(v)|`.
    pub commutativity: f64,
    /// `[B_i(u), e_kl]`, relative to `|B_i(u)| |e_kl|`.
    pub generator_commutation: f64,
    /// `G B_i(u) - B_i(u)^T G`, relative to `|G| |B_i(u)|`.
    pub shapovalov_symmetry: f64,
    /// `B_1(u) + sum_s |lambda_s|/(u - z_s)`, relative to the scalar.
    pub first_coefficient: f64,
}

impl SelfCheckReport {
    pub fn max_residual(&self) -> f64 {
        self.commutativity
            .max(self.generator_commutation)
            .max(self.shapovalov_symmetry)
            .max(self.first_coefficient)
    }
}

fn relative(diff: f64, scale: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / scale.max(f64::MIN_POSITIVE)
    }
}

/// Sample points `7/3, 10/3, 13/3, ...`, nudged off the sites.
pub fn default_samples<F: Scalar>(z: &[F], count: usize) -> Vec<F> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0i64;
    while out.len() < count {
        let mut u = rat(7 + 3 * k, 3);
        while z.iter().any(|zs| (F::from_rational(&u) - zs.clone()).modulus() < 0.1) {
            u = u + rat(1, 7);
        }
        out.push(F::from_rational(&u));
        k += 1;
    }
    out
}

pub fn algebra_selfcheck<F: Scalar>(
    cur: &BetheCurrents<F>,
    form: &SymmetricForm,
    module: &GlModule,
    samples: &[F],
) -> Result<SelfCheckReport> {
    let gram = form.gram().map(F::from_rational);
    let gens = module.gens_as::<F>();
    let mats = samples
        .iter()
        .map(|u| cur.matrices_at(u))
        .collect::<Result<Vec<_>>>()?;
    let mut report = SelfCheckReport {
        samples: samples.len(),
        commutativity: 0.0,
        generator_commutation: 0.0,
        shapovalov_symmetry: 0.0,
        first_coefficient: 0.0,
    };
    let flat: Vec<&SparseMatrix<F>> = mats.iter().flatten().collect();
    for (a, x) in flat.iter().enumerate() {
        for y in &flat[a + 1..] {
            let d = x.commutator(y).max_abs();
            report.commutativity = report.commutativity.max(relative(d, x.max_abs() * y.max_abs()));
        }
        for g in &gens {
            let d = x.commutator(g).max_abs();
            report.generator_commutation = report.generator_commutation.max(relative(d, x.max_abs() * g.max_abs()));
        }
        let d = gram.mul(x).sub(&x.transpose().mul(&gram)).max_abs();
        report.shapovalov_symmetry = report.shapovalov_symmetry.max(relative(d, gram.max_abs() * x.max_abs()));
    }
    for (u, m) in samples.iter().zip(&mats) {
        let c = cur.first_coefficient_at(u);
        let d = m[0].sub(&SparseMatrix::identity(cur.dim).scale(&c)).max_abs();
        report.first_coefficient = report.first_coefficient.max(relative(d, c.modulus()));
    }
    Ok(report)
}
