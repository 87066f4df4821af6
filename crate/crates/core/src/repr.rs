//! Finite-dimensional gl(N+1)-modules with exact rational generator matrices.
//!
//! Irreducible modules are realized inside the span of lowering monomials
//! applied to a highest weight vector: each weight space is spanned by
//! `f_a b` for simple lowering operators `f_a` and basis vectors `b` one step
//! higher, and a basis is extracted through the Shapovalov Gram matrix of that
//! spanning set. Every vector is determined by its pairings with the weight
//! space, so no square roots or orthonormalization are ever needed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GaudinError, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};
use crate::scalar::{Rational, Scalar};

/// Weakly decreasing sequence of nonnegative integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Partition {
    parts: Vec<i64>,
}

impl Partition {
    pub fn new(parts: Vec<i64>) -> Result<Self> {
        if parts.iter().any(|&p| p < 0) {
            return Err(GaudinError::NotAPartition(format!("{parts:?} has a negative part")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(GaudinError::NotAPartition(format!("{parts:?} is not weakly decreasing")));
        }
        Ok(Partition { parts })
    }

    pub fn zero(rank: usize) -> Self {
        Partition { parts: vec![0; rank] }
    }

    pub fn parts(&self) -> &[i64] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn size(&self) -> i64 {
        self.parts.iter().sum()
    }

    pub fn weight(&self) -> Weight {
        Weight(self.parts.clone())
    }

    /// Same partition with trailing zeros added up to `rank` parts.
    pub fn padded(&self, rank: usize) -> Result<Self> {
        if self.parts.len() > rank {
            return Err(GaudinError::NotAPartition(format!(
                "{:?} has more than {rank} parts",
                self.parts
            )));
        }
        let mut parts = self.parts.clone();
        parts.resize(rank, 0);
        Ok(Partition { parts })
    }
}

impl TryFrom<Vec<i64>> for Partition {
    type Error = GaudinError;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        Partition::new(v)
    }
}

impl From<Partition> for Vec<i64> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

/// Weight in the `epsilon` basis, which is orthonormal for the scalar product.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight(pub Vec<i64>);

impl Weight {
    /// `alpha_i = epsilon_i - epsilon_(i+1)`, zero-based `i`.
    pub fn simple_root(i: usize, rank: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        v[i + 1] = -1;
        Weight(v)
    }

    pub fn dot(&self, other: &Weight) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, k: i64) -> Weight {
        Weight(self.0.iter().map(|a| a * k).collect())
    }
}

/// `lambda_inf = sum_s lambda_s - sum_j l_j alpha_j`, checked to be a partition.
pub fn derive_infinity_weight(partitions: &[Partition], l: &[usize]) -> Result<Partition> {
    let rank = l.len() + 1;
    let mut w = Weight(vec![0; rank]);
    for p in partitions {
        w = w.add(&p.padded(rank)?.weight());
    }
    for (j, &lj) in l.iter().enumerate() {
        w = w.sub(&Weight::simple_root(j, rank).scaled(lj as i64));
    }
    Partition::new(w.0)
}

/// Weyl dimension formula `prod_{i<j} (l_i - l_j + j - i)/(j - i)`.
pub fn weyl_dimension(lambda: &Partition) -> u64 {
    let p = lambda.parts();
    let mut num = Rational::one();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            num = num
                * crate::scalar::rat(p[i] - p[j] + (j - i) as i64, (j - i) as i64);
        }
    }
    use num_traits::ToPrimitive;
    num.to_integer().to_u64().expect("dimension fits in u64")
}

/// Weight-graded module with exact generator matrices.
#[derive(Clone, Debug)]
pub struct GlModule {
    rank: usize,
    dim: usize,
    basis_weights: Vec<Weight>,
    /// `gens[i * rank + j]` is the matrix of `e_ij` (zero-based).
    gens: Vec<SparseMatrix<Rational>>,
    /// Per tensor factor, the generators acting in that slot only.
    slot_gens: Vec<Vec<SparseMatrix<Rational>>>,
    factor_weights: Vec<Partition>,
    hw_index: Option<usize>,
}

impl GlModule {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_weights(&self) -> &[Weight] {
        &self.basis_weights
    }

    /// Matrix of `e_ij`, zero-based indices.
    pub fn gen(&self, i: usize, j: usize) -> &SparseMatrix<Rational> {
        &self.gens[i * self.rank + j]
    }

    /// Matrix of `e_ij` acting in tensor slot `s` only.
    pub fn slot_gen(&self, s: usize, i: usize, j: usize) -> &SparseMatrix<Rational> {
        &self.slot_gens[s][i * self.rank + j]
    }

    pub fn n_factors(&self) -> usize {
        self.slot_gens.len()
    }

    /// Highest weights of the tensor factors.
    pub fn factor_weights(&self) -> &[Partition] {
        &self.factor_weights
    }

    /// Index of the highest weight vector (the tensor of factor highest
    /// weight vectors for a tensor product).
    pub fn hw_index(&self) -> Option<usize> {
        self.hw_index
    }

    pub fn weight_multiplicities(&self) -> BTreeMap<Weight, usize> {
        let mut m = BTreeMap::new();
        for w in &self.basis_weights {
            *m.entry(w.clone()).or_insert(0) += 1;
        }
        m
    }

    /// Indices of basis vectors of weight `mu`.
    pub fn weight_indices(&self, mu: &Weight) -> Vec<usize> {
        (0..self.dim).filter(|&k| &self.basis_weights[k] == mu).collect()
    }

    /// Largest violation count of `[e_ij, e_sk] = d_js e_ik - d_ik e_sj`;
    /// zero means every relation holds exactly.
    pub fn commutation_defects(&self) -> usize {
        let r = self.rank;
        let mut bad = 0;
        for i in 0..r {
            for j in 0..r {
                for s in 0..r {
                    for k in 0..r {
                        let lhs = self.gen(i, j).commutator(self.gen(s, k));
                        let mut rhs = SparseMatrix::zeros(self.dim, self.dim);
                        if j == s {
                            rhs = rhs.add(self.gen(i, k));
                        }
                        if i == k {
                            rhs = rhs.sub(self.gen(s, j));
                        }
                        if !lhs.sub(&rhs).is_zero() {
                            bad += 1;
                        }
                    }
                }
            }
        }
        bad
    }

    /// Whether each `e_ij` maps weight `mu` into weight `mu + eps_i - eps_j`.
    pub fn respects_grading(&self) -> bool {
        let r = self.rank;
        for i in 0..r {
            for j in 0..r {
                let mut shift = vec![0; r];
                shift[i] += 1;
                shift[j] -= 1;
                let shift = Weight(shift);
                let m = self.gen(i, j);
                for row in 0..self.dim {
                    for (col, _) in m.row(row) {
                        if self.basis_weights[row] != self.basis_weights[*col].add(&shift) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// All generator matrices converted to another field.
    pub fn gens_as<F: Scalar>(&self) -> Vec<SparseMatrix<F>> {
        self.gens.iter().map(|m| m.map(F::from_rational)).collect()
    }
}

/// Symmetric bilinear form given by its Gram matrix on the module basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricForm {
    gram: SparseMatrix<Rational>,
}

impl SymmetricForm {
    pub fn new(gram: SparseMatrix<Rational>) -> Self {
        SymmetricForm { gram }
    }

    pub fn gram(&self) -> &SparseMatrix<Rational> {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn is_symmetric(&self) -> bool {
        self.gram == self.gram.transpose()
    }

    /// `u^T G v`
    pub fn pair<F: Scalar>(&self, u: &[F], v: &[F]) -> F {
        let mut acc = F::zero();
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, g) in self.gram.row(i) {
                if !v[*j].is_zero() {
                    acc = acc + ui.clone() * F::from_rational(g) * v[*j].clone();
                }
            }
        }
        acc
    }

    /// Whether `G M(e_ij) = M(e_ji)^T G` for every generator.
    pub fn is_contravariant(&self, module: &GlModule) -> bool {
        let r = module.rank();
        (0..r).all(|i| {
            (0..r).all(|j| {
                let lhs = self.gram.mul(module.gen(i, j));
                let rhs = module.gen(j, i).transpose().mul(&self.gram);
                lhs == rhs
            })
        })
    }
}

struct WeightSpace {
    weight: Weight,
    gram: DenseMatrix<Rational>,
    /// `raise[a]`: columns are images of the basis under `e_(a,a+1)`, in the
    /// basis of `weight + alpha_a` (empty when that is not a weight).
    raise: Vec<Vec<Vec<Rational>>>,
    /// `lower[a]`: columns are images under `e_(a+1,a)` in the basis of
    /// `weight - alpha_a`.
    lower: Vec<Vec<Vec<Rational>>>,
}

impl WeightSpace {
    fn dim(&self) -> usize {
        self.gram.rows()
    }
}

/// Builds `L_lambda` with its Shapovalov form (normalized to 1 on the
/// highest weight vector). `rank` is `N + 1`.
pub fn build_irreducible(lambda: &Partition, rank: usize) -> Result<(GlModule, SymmetricForm)> {
    let lambda = lambda.padded(rank)?;
    let n_simple = rank - 1;
    let roots: Vec<Weight> = (0..n_simple).map(|a| Weight::simple_root(a, rank)).collect();

    let mut spaces: Vec<WeightSpace> = Vec::new();
    let mut index: BTreeMap<Weight, usize> = BTreeMap::new();
    let top = lambda.weight();
    index.insert(top.clone(), 0);
    spaces.push(WeightSpace {
        weight: top,
        gram: DenseMatrix::identity(1),
        raise: vec![Vec::new(); n_simple],
        lower: vec![Vec::new(); n_simple],
    });
    let mut level: Vec<usize> = vec![0];

    while !level.is_empty() {
        // candidate weights one step down, in descending lexicographic order
        let mut targets: Vec<Weight> = level
            .iter()
            .flat_map(|&k| roots.iter().map(move |r| (k, r)))
            .map(|(k, r)| spaces[k].weight.sub(r))
            .collect();
        targets.sort_by(|a, b| b.cmp(a));
        targets.dedup();

        let mut next_level = Vec::new();
        let mut pending_lower: Vec<(usize, usize, Vec<Vec<Rational>>)> = Vec::new();
        for mu in targets {
            // spanning set f_a b, b in the basis of mu + alpha_a
            let mut cands: Vec<(usize, usize, usize)> = Vec::new();
            for a in 0..n_simple {
                if let Some(&src) = index.get(&mu.add(&roots[a])) {
                    for b in 0..spaces[src].dim() {
                        cands.push((a, src, b));
                    }
                }
            }
            if cands.is_empty() {
                continue;
            }
            // images of each candidate under every simple raising operator
            let images: Vec<Vec<Option<Vec<Rational>>>> = cands
                .iter()
                .map(|&(a, src, b)| {
                    (0..n_simple)
                        .map(|c| raise_of_lowered(&spaces, &index, &roots, a, src, b, c))
                        .collect()
                })
                .collect();
            // Gram matrix: S(f_a w, f_a' w') = S(w, e_a f_a' w')
            let m = cands.len();
            let mut gram = DenseMatrix::<Rational>::zeros(m, m);
            for (x, &(a, src, b)) in cands.iter().enumerate() {
                for y in 0..m {
                    let img = images[y][a].as_ref().expect("target space exists");
                    let g = &spaces[src].gram;
                    let v = (0..g.cols()).fold(Rational::zero(), |acc, k| {
                        acc + g.get(b, k).clone() * img[k].clone()
                    });
                    gram.set(x, y, v);
                }
            }
            let (_, pivots) = gram.rref(0.0);
            if pivots.is_empty() {
                continue;
            }
            let mut basis_gram = DenseMatrix::<Rational>::zeros(pivots.len(), pivots.len());
            for (x, &px) in pivots.iter().enumerate() {
                for (y, &py) in pivots.iter().enumerate() {
                    basis_gram.set(x, y, gram.get(px, py).clone());
                }
            }
            let inv = basis_gram.inverse().expect("Gram of a basis is nondegenerate");
            // coordinates of every candidate in the chosen basis
            let coords: Vec<Vec<Rational>> = (0..m)
                .map(|y| {
                    let rhs: Vec<Rational> = pivots.iter().map(|&p| gram.get(p, y).clone()).collect();
                    inv.mul_vec(&rhs)
                })
                .collect();
            let raise: Vec<Vec<Vec<Rational>>> = (0..n_simple)
                .map(|c| {
                    pivots
                        .iter()
                        .map(|&p| images[p][c].clone().unwrap_or_default())
                        .collect()
                })
                .collect();
            let new_index = spaces.len();
            // lowering maps from each source space into mu
            for a in 0..n_simple {
                if let Some(&src) = index.get(&mu.add(&roots[a])) {
                    let cols: Vec<Vec<Rational>> = (0..spaces[src].dim())
                        .map(|b| {
                            let y = cands
                                .iter()
                                .position(|&(ca, cs, cb)| ca == a && cs == src && cb == b)
                                .expect("candidate present");
                            coords[y].clone()
                        })
                        .collect();
                    pending_lower.push((src, a, cols));
                }
            }
            index.insert(mu.clone(), new_index);
            spaces.push(WeightSpace {
                weight: mu,
                gram: basis_gram,
                raise,
                lower: vec![Vec::new(); n_simple],
            });
            next_level.push(new_index);
        }
        for (src, a, cols) in pending_lower {
            spaces[src].lower[a] = cols;
        }
        level = next_level;
    }

    // global basis: spaces in construction order (depth, then descending weight)
    let mut offsets = Vec::with_capacity(spaces.len());
    let mut dim = 0;
    for s in &spaces {
        offsets.push(dim);
        dim += s.dim();
    }
    let mut basis_weights = Vec::with_capacity(dim);
    for s in &spaces {
        basis_weights.extend(std::iter::repeat(s.weight.clone()).take(s.dim()));
    }
    let mut gens: Vec<SparseMatrix<Rational>> = vec![SparseMatrix::zeros(dim, dim); rank * rank];
    for (k, s) in spaces.iter().enumerate() {
        for i in 0..rank {
            let c = Rational::from_i64(s.weight.0[i]);
            for b in 0..s.dim() {
                gens[i * rank + i].set(offsets[k] + b, offsets[k] + b, c.clone());
            }
        }
        for a in 0..n_simple {
            if let Some(&t) = index.get(&s.weight.add(&roots[a])) {
                for (b, col) in s.raise[a].iter().enumerate() {
                    for (r, v) in col.iter().enumerate() {
                        gens[a * rank + a + 1].set(offsets[t] + r, offsets[k] + b, v.clone());
                    }
                }
            }
            if let Some(&t) = index.get(&s.weight.sub(&roots[a])) {
                for (b, col) in s.lower[a].iter().enumerate() {
                    for (r, v) in col.iter().enumerate() {
                        gens[(a + 1) * rank + a].set(offsets[t] + r, offsets[k] + b, v.clone());
                    }
                }
            }
        }
    }
    // non-simple root vectors: e_ij = [e_(i,i+1), e_(i+1,j)], e_ji = [e_(j,j-1), e_(j-1,i)]
    for gap in 2..rank {
        for i in 0..rank - gap {
            let j = i + gap;
            let up = gens[i * rank + i + 1].commutator(&gens[(i + 1) * rank + j]);
            let down = gens[j * rank + j - 1].commutator(&gens[(j - 1) * rank + i]);
            gens[i * rank + j] = up;
            gens[j * rank + i] = down;
        }
    }
    let mut gram = SparseMatrix::zeros(dim, dim);
    for (k, s) in spaces.iter().enumerate() {
        for a in 0..s.dim() {
            for b in 0..s.dim() {
                gram.set(offsets[k] + a, offsets[k] + b, s.gram.get(a, b).clone());
            }
        }
    }
    let module = GlModule {
        rank,
        dim,
        basis_weights,
        slot_gens: vec![gens.clone()],
        gens,
        factor_weights: vec![lambda],
        hw_index: Some(0),
    };
    Ok((module, SymmetricForm::new(gram)))
}

/// `e_c f_a w` for the basis vector `w = b` of space `src`, expressed in the
/// basis of `weight(src) - alpha_a + alpha_c`. `None` when that weight space
/// does not exist (the image is then zero).
fn raise_of_lowered(
    spaces: &[WeightSpace],
    index: &BTreeMap<Weight, usize>,
    roots: &[Weight],
    a: usize,
    src: usize,
    b: usize,
    c: usize,
) -> Option<Vec<Rational>> {
    let nu = &spaces[src].weight;
    let target_w = nu.sub(&roots[a]).add(&roots[c]);
    let &target = index.get(&target_w)?;
    let mut out = vec![Rational::zero(); spaces[target].dim()];
    // f_a (e_c w)
    if let Some(&up) = index.get(&nu.add(&roots[c])) {
        if let Some(col) = spaces[src].raise[c].get(b) {
            let lower = &spaces[up].lower[a];
            for (k, coeff) in col.iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                for (r, v) in lower[k].iter().enumerate() {
                    out[r] = out[r].clone() + coeff.clone() * v.clone();
                }
            }
        }
    }
    // + [e_c, f_a] w = delta_ac h_a w
    if a == c {
        let h = nu.0[a] - nu.0[a + 1];
        out[b] = out[b].clone() + Rational::from_i64(h);
    }
    Some(out)
}

/// Tensor product with the diagonal (Leibniz) action.
pub fn tensor_module(factors: &[GlModule]) -> Result<GlModule> {
    let first = factors
        .first()
        .ok_or_else(|| GaudinError::DimensionMismatch("empty tensor product".into()))?;
    let rank = first.rank;
    if let Some(bad) = factors.iter().find(|f| f.rank != rank) {
        return Err(GaudinError::RankMismatch {
            expected: rank,
            found: bad.rank,
        });
    }
    if factors.len() == 1 {
        return Ok(first.clone());
    }
    let dims: Vec<usize> = factors.iter().map(|f| f.dim).collect();
    let dim: usize = dims.iter().product();
    let mut slot_gens: Vec<Vec<SparseMatrix<Rational>>> = Vec::new();
    let mut factor_weights = Vec::new();
    for (s, f) in factors.iter().enumerate() {
        for sub in 0..f.n_factors() {
            let mut per_gen = Vec::with_capacity(rank * rank);
            for g in 0..rank * rank {
                let mut m = SparseMatrix::<Rational>::identity(1);
                for (t, d) in dims.iter().enumerate() {
                    let piece = if t == s {
                        f.slot_gens[sub][g].clone()
                    } else {
                        SparseMatrix::identity(*d)
                    };
                    m = m.kron(&piece);
                }
                per_gen.push(m);
            }
            slot_gens.push(per_gen);
        }
        factor_weights.extend(f.factor_weights.iter().cloned());
    }
    let gens: Vec<SparseMatrix<Rational>> = (0..rank * rank)
        .map(|g| {
            slot_gens
                .iter()
                .fold(SparseMatrix::zeros(dim, dim), |acc, slot| acc.add(&slot[g]))
        })
        .collect();
    let mut basis_weights = Vec::with_capacity(dim);
    for idx in 0..dim {
        let mut rem = idx;
        let mut w = Weight(vec![0; rank]);
        for (t, f) in factors.iter().enumerate().rev() {
            let k = rem % dims[t];
            rem /= dims[t];
            w = w.add(&f.basis_weights[k]);
        }
        basis_weights.push(w);
    }
    let hw_index = factors.iter().enumerate().try_fold(0usize, |acc, (t, f)| {
        f.hw_index.map(|h| acc * dims[t] + h)
    });
    Ok(GlModule {
        rank,
        dim,
        basis_weights,
        gens,
        slot_gens,
        factor_weights,
        hw_index,
    })
}

/// Kronecker product of factor Gram matrices.
pub fn tensor_shapovalov(forms: &[SymmetricForm]) -> Result<SymmetricForm> {
    let first = forms
        .first()
        .ok_or_else(|| GaudinError::DimensionMismatch("empty tensor product".into()))?;
    let gram = forms[1..]
        .iter()
        .fold(first.gram.clone(), |acc, f| acc.kron(&f.gram));
    Ok(SymmetricForm::new(gram))
}

/// Bases (as full-length columns) of the weight space `M[mu]` and of its
/// singular part `Sing M[mu]`.
pub fn weight_and_singular_subspace(module: &GlModule, mu: &Partition) -> Result<(Vec<Vec<Rational>>, Vec<Vec<Rational>>)> {
    let mu = mu.padded(module.rank)?.weight();
    let idx = module.weight_indices(&mu);
    let unit = |k: usize| {
        let mut v = vec![Rational::zero(); module.dim];
        v[k] = Rational::one();
        v
    };
    let weight_basis: Vec<Vec<Rational>> = idx.iter().map(|&k| unit(k)).collect();
    if idx.is_empty() {
        return Ok((weight_basis, Vec::new()));
    }
    // stacked simple raising operators restricted to the weight space
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for a in 0..module.rank - 1 {
        let e = module.gen(a, a + 1);
        let restricted = e.transpose();
        let mut block: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
        for (c, &k) in idx.iter().enumerate() {
            for (r, v) in restricted.row(k) {
                block
                    .entry(*r)
                    .or_insert_with(|| vec![Rational::zero(); idx.len()])[c] = v.clone();
            }
        }
        rows.extend(block.into_values());
    }
    let sing_coords = if rows.is_empty() {
        (0..idx.len())
            .map(|c| {
                let mut v = vec![Rational::zero(); idx.len()];
                v[c] = Rational::one();
                v
            })
            .collect()
    } else {
        DenseMatrix::from_rows(&rows).nullspace(0.0)
    };
    let sing = sing_coords
        .into_iter()
        .map(|coords| {
            let mut v = vec![Rational::zero(); module.dim];
            for (c, &k) in idx.iter().enumerate() {
                v[k] = coords[c].clone();
            }
            v
        })
        .collect();
    Ok((weight_basis, sing))
}
