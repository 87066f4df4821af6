//! Differential operators `sum_k C_k(u) d^k` with coefficients written to the
//! left of the powers of `d = d/du`.
//!
//! The coefficient ring is abstract ([`DiffRing`]): scalar rational functions,
//! sparse matrices of rational functions, and truncated local expansions all
//! compose with the same normal-ordering rule `d . f = f d + f'`.

use std::collections::BTreeMap;

use crate::error::{GaudinError, Result};
use crate::linalg::SparseMatrix;
use crate::poly::Polynomial;
use crate::ratfun::RationalFunction;
use crate::scalar::Scalar;
use crate::series::Series;

/// A (possibly noncommutative) ring with a derivation in `u`.
pub trait DiffRing: Clone {
    fn add(&self, rhs: &Self) -> Self;
    /// `self * rhs`, in that order.
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn derivative(&self) -> Self;
    fn scale_int(&self, k: i64) -> Self;
    /// Zero of the same shape.
    fn zero_like(&self) -> Self;
    /// Identity of the same shape.
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Whether `self * rhs` is defined.
    fn compatible(&self, _rhs: &Self) -> bool {
        true
    }
}

impl<F: Scalar> DiffRing for RationalFunction<F> {
    fn add(&self, rhs: &Self) -> Self {
        self.clone() + rhs.clone()
    }
    fn mul(&self, rhs: &Self) -> Self {
        self.clone() * rhs.clone()
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn derivative(&self) -> Self {
        RationalFunction::derivative(self)
    }
    fn scale_int(&self, k: i64) -> Self {
        self.scale(&F::from_i64(k))
    }
    fn zero_like(&self) -> Self {
        RationalFunction::zero()
    }
    fn one_like(&self) -> Self {
        RationalFunction::one()
    }
    fn is_zero(&self) -> bool {
        RationalFunction::is_zero(self)
    }
}

impl<F: Scalar> DiffRing for Series<F> {
    fn add(&self, rhs: &Self) -> Self {
        Series::add(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Series::mul(self, rhs)
    }
    fn neg(&self) -> Self {
        Series::neg(self)
    }
    fn derivative(&self) -> Self {
        Series::derivative(self)
    }
    fn scale_int(&self, k: i64) -> Self {
        self.scale(&F::from_i64(k))
    }
    fn zero_like(&self) -> Self {
        Series::zero(self.point().clone(), self.len())
    }
    fn one_like(&self) -> Self {
        Series::constant(self.point().clone(), self.len(), F::one())
    }
    fn is_zero(&self) -> bool {
        self.coeffs().iter().all(Scalar::is_zero)
    }
}

/// Square matrix of rational functions, stored sparse by entry.
#[derive(Clone, Debug, PartialEq)]
pub struct RfMatrix<F> {
    dim: usize,
    rows: Vec<BTreeMap<usize, RationalFunction<F>>>,
}

impl<F: Scalar> RfMatrix<F> {
    pub fn zeros(dim: usize) -> Self {
        RfMatrix {
            dim,
            rows: vec![BTreeMap::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.rows[i].insert(i, RationalFunction::one());
        }
        m
    }

    /// `f(u) * M` for a constant matrix `M`.
    pub fn from_scaled(m: &SparseMatrix<F>, f: &RationalFunction<F>) -> Self {
        let mut out = Self::zeros(m.rows());
        if f.is_zero() {
            return out;
        }
        for i in 0..m.rows() {
            for (j, v) in m.row(i) {
                out.rows[i].insert(*j, f.scale(v));
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> RationalFunction<F> {
        self.rows[i].get(&j).cloned().unwrap_or_else(RationalFunction::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &RationalFunction<F>)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, v)| (i, *j, v)))
    }

    pub fn set(&mut self, i: usize, j: usize, v: RationalFunction<F>) {
        if v.is_zero() {
            self.rows[i].remove(&j);
        } else {
            self.rows[i].insert(j, v);
        }
    }

    fn add_to(&mut self, i: usize, j: usize, v: RationalFunction<F>) {
        if v.is_zero() {
            return;
        }
        let row = &mut self.rows[i];
        match row.remove(&j) {
            Some(old) => {
                let s = old + v;
                if !s.is_zero() {
                    row.insert(j, s);
                }
            }
            None => {
                row.insert(j, v);
            }
        }
    }

    /// Evaluates every entry at `x`.
    pub fn eval(&self, x: &F) -> Result<SparseMatrix<F>> {
        let mut out = SparseMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.entries() {
            out.set(i, j, v.eval(x)?);
        }
        Ok(out)
    }

    /// `self * M` for a constant dense block of columns (`dim x k`), returned
    /// as `k` columns of rational functions.
    pub fn mul_columns(&self, cols: &[Vec<F>]) -> Vec<Vec<RationalFunction<F>>> {
        cols.iter()
            .map(|c| {
                self.rows
                    .iter()
                    .map(|row| {
                        row.iter().fold(RationalFunction::zero(), |acc, (j, v)| {
                            if c[*j].is_zero() {
                                acc
                            } else {
                                acc + v.scale(&c[*j])
                            }
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

impl<F: Scalar> DiffRing for RfMatrix<F> {
    fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (i, j, v) in rhs.entries() {
            out.add_to(i, j, v.clone());
        }
        out
    }
    fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for (k, a) in row {
                for (j, b) in &rhs.rows[*k] {
                    out.add_to(i, *j, a.clone() * b.clone());
                }
            }
        }
        out
    }
    fn neg(&self) -> Self {
        RfMatrix {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(j, v)| (*j, -v.clone())).collect())
                .collect(),
        }
    }
    fn derivative(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for (i, j, v) in self.entries() {
            out.add_to(i, j, v.derivative());
        }
        out
    }
    fn scale_int(&self, k: i64) -> Self {
        let c = F::from_i64(k);
        let mut out = Self::zeros(self.dim);
        for (i, j, v) in self.entries() {
            out.add_to(i, j, v.scale(&c));
        }
        out
    }
    fn zero_like(&self) -> Self {
        Self::zeros(self.dim)
    }
    fn one_like(&self) -> Self {
        Self::identity(self.dim)
    }
    fn is_zero(&self) -> bool {
        self.rows.iter().all(BTreeMap::is_empty)
    }
    fn compatible(&self, rhs: &Self) -> bool {
        self.dim == rhs.dim
    }
}

/// `sum_k coeffs[k] * d^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPencil<C> {
    coeffs: Vec<C>,
}

impl<C: DiffRing> OperatorPencil<C> {
    pub fn new(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "a pencil needs at least one coefficient");
        OperatorPencil { coeffs }
    }

    /// Order 0 pencil with coefficient `c`.
    pub fn multiplication(c: C) -> Self {
        OperatorPencil { coeffs: vec![c] }
    }

    /// `d - a`
    pub fn first_order(a: &C) -> Self {
        OperatorPencil {
            coeffs: vec![a.neg(), a.one_like()],
        }
    }

    /// `d^k` with identity coefficient shaped like `shape`.
    pub fn derivation_power(shape: &C, k: usize) -> Self {
        let mut coeffs = vec![shape.zero_like(); k + 1];
        coeffs[k] = shape.one_like();
        OperatorPencil { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of `d^k` (zero past the order).
    pub fn coeff(&self, k: usize) -> C {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| self.coeffs[0].zero_like())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        OperatorPencil {
            coeffs: (0..n).map(|k| self.coeff(k).add(&rhs.coeff(k))).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        OperatorPencil {
            coeffs: self.coeffs.iter().map(DiffRing::neg).collect(),
        }
    }

    /// `A_(N+1-i)` style access for monic pencils of order `m`: the coefficient
    /// of `d^(m-i)`.
    pub fn lower_coeff(&self, i: usize) -> C {
        self.coeff(self.order() - i)
    }

    pub fn map<D: DiffRing>(&self, f: impl Fn(&C) -> D) -> OperatorPencil<D> {
        OperatorPencil {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

/// `A . B` in normal order: `d^a . B_b d^b = sum_r binom(a, r) B_b^(r) d^(a-r+b)`.
pub fn pencil_compose<C: DiffRing>(a: &OperatorPencil<C>, b: &OperatorPencil<C>) -> Result<OperatorPencil<C>> {
    if !a.coeffs[0].compatible(&b.coeffs[0]) {
        return Err(GaudinError::DimensionMismatch(
            "pencil coefficients have different shapes".into(),
        ));
    }
    let order = a.order() + b.order();
    let mut out: Vec<C> = vec![b.coeffs[0].zero_like(); order + 1];
    for (bi, bc) in b.coeffs.iter().enumerate() {
        // derivatives of B_b up to the highest power of d in A
        let mut derivs = Vec::with_capacity(a.coeffs.len());
        let mut cur = bc.clone();
        for _ in 0..a.coeffs.len() {
            derivs.push(cur.clone());
            cur = cur.derivative();
        }
        for (ai, ac) in a.coeffs.iter().enumerate() {
            if ac.is_zero() {
                continue;
            }
            let mut binom: i64 = 1;
            for (r, d) in derivs.iter().enumerate().take(ai + 1) {
                if !d.is_zero() {
                    let term = ac.mul(d).scale_int(binom);
                    let k = ai - r + bi;
                    out[k] = out[k].add(&term);
                }
                binom = binom * (ai - r) as i64 / (r as i64 + 1);
            }
        }
    }
    Ok(OperatorPencil { coeffs: out })
}

impl<F: Scalar> OperatorPencil<RationalFunction<F>> {
    /// `sum_k C_k f^(k)` for a polynomial `f`.
    pub fn apply_poly(&self, f: &Polynomial<F>) -> RationalFunction<F> {
        let mut acc = RationalFunction::zero();
        let mut d = f.clone();
        for c in &self.coeffs {
            acc = acc + c.clone() * RationalFunction::from_poly(d.clone());
            d = d.derivative();
        }
        acc
    }

    pub fn apply(&self, f: &RationalFunction<F>) -> RationalFunction<F> {
        let mut acc = RationalFunction::zero();
        let mut d = f.clone();
        for c in &self.coeffs {
            acc = acc + c.clone() * d.clone();
            d = d.derivative();
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn rf(num: &[i64], den: &[i64]) -> RationalFunction<Rational> {
        let p = |c: &[i64]| Polynomial::new(c.iter().map(|&x| rat(x, 1)).collect());
        RationalFunction::new(p(num), p(den)).unwrap()
    }

    #[test]
    fn two_first_order_factors() {
        // (d - a)(d - b) = d^2 - (a + b) d + (ab - b')
        let a = rf(&[1], &[0, 1]);
        let b = rf(&[2], &[-1, 1]);
        let prod = pencil_compose(&OperatorPencil::first_order(&a), &OperatorPencil::first_order(&b)).unwrap();
        assert_eq!(prod.order(), 2);
        assert_eq!(prod.coeff(2), RationalFunction::one());
        assert_eq!(prod.coeff(1), -(a.clone() + b.clone()));
        assert_eq!(prod.coeff(0), a * b.clone() - b.derivative());
    }

    #[test]
    fn identity_and_constant_coefficients() {
        let p = OperatorPencil::first_order(&rf(&[3], &[0, 1]));
        let id = OperatorPencil::multiplication(RationalFunction::<Rational>::one());
        assert_eq!(pencil_compose(&id, &p).unwrap(), p);
        let d = OperatorPencil::derivation_power(&RationalFunction::<Rational>::one(), 1);
        let dd = pencil_compose(&d, &d).unwrap();
        assert_eq!(dd, OperatorPencil::derivation_power(&RationalFunction::one(), 2));
    }

    #[test]
    fn mismatched_matrix_shapes() {
        let a = OperatorPencil::multiplication(RfMatrix::<Rational>::identity(2));
        let b = OperatorPencil::multiplication(RfMatrix::<Rational>::identity(3));
        assert!(matches!(pencil_compose(&a, &b), Err(GaudinError::DimensionMismatch(_))));
    }
}
