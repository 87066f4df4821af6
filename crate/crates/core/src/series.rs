//! Truncated local expansions of functions of `u`, either in powers of
//! `u - u0` around a finite point or in powers of `1/u` around infinity.
//!
//! These are the cheap coefficient rings for operator pencils: composing
//! pencils over a series ring gives the values (at a finite point) or the
//! expansion coefficients (at infinity) of the operator's coefficients without
//! ever forming the rational functions themselves.

use crate::error::{GaudinError, Result};
use crate::linalg::SparseMatrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum ExpansionPoint<F> {
    Finite(F),
    Infinity,
}

/// Truncated expansion with `coeffs.len()` known terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<F> {
    point: ExpansionPoint<F>,
    coeffs: Vec<F>,
}

impl<F: Scalar> Series<F> {
    pub fn zero(point: ExpansionPoint<F>, len: usize) -> Self {
        Series {
            point,
            coeffs: vec![F::zero(); len],
        }
    }

    pub fn constant(point: ExpansionPoint<F>, len: usize, c: F) -> Self {
        let mut s = Self::zero(point, len);
        if len > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    pub fn from_coeffs(point: ExpansionPoint<F>, coeffs: Vec<F>) -> Self {
        Series { point, coeffs }
    }

    /// Expansion of `c / (u - z)`.
    pub fn pole(point: ExpansionPoint<F>, len: usize, c: F, z: &F) -> Result<Self> {
        let coeffs = pole_coeffs(&point, len, c, z)?;
        Ok(Series { point, coeffs })
    }

    pub fn point(&self) -> &ExpansionPoint<F> {
        &self.point
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Value at the expansion point (the constant term).
    pub fn value(&self) -> F {
        self.coeffs.first().cloned().unwrap_or_else(F::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.len().min(other.len());
        Series {
            point: self.point.clone(),
            coeffs: (0..len)
                .map(|k| self.coeffs[k].clone() + other.coeffs[k].clone())
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Series {
            point: self.point.clone(),
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &F) -> Self {
        Series {
            point: self.point.clone(),
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Series {
            point: self.point.clone(),
            coeffs: cauchy(&self.coeffs, &other.coeffs),
        }
    }

    pub fn derivative(&self) -> Self {
        Series {
            point: self.point.clone(),
            coeffs: derivative_coeffs(&self.point, &self.coeffs, |c, k| c.clone() * F::from_i64(k)),
        }
    }
}

fn cauchy<F: Scalar>(a: &[F], b: &[F]) -> Vec<F> {
    let len = a.len().min(b.len());
    (0..len)
        .map(|m| {
            (0..=m).fold(F::zero(), |acc, i| {
                if a[i].is_zero() || b[m - i].is_zero() {
                    acc
                } else {
                    acc + a[i].clone() * b[m - i].clone()
                }
            })
        })
        .collect()
}

fn pole_coeffs<F: Scalar>(point: &ExpansionPoint<F>, len: usize, c: F, z: &F) -> Result<Vec<F>> {
    match point {
        ExpansionPoint::Finite(u0) => {
            // 1/(u - z) = 1/(d + e) = sum_k (-1)^k e^k / d^(k+1), d = u0 - z
            let d = u0.clone() - z.clone();
            if d.is_zero() {
                return Err(GaudinError::PoleEvaluation);
            }
            let r = d.recip();
            let mut out = Vec::with_capacity(len);
            let mut term = c * r.clone();
            for _ in 0..len {
                out.push(term.clone());
                term = -(term * r.clone());
            }
            Ok(out)
        }
        ExpansionPoint::Infinity => {
            // 1/(u - z) = sum_{k>=1} z^(k-1) w^k
            let mut out = Vec::with_capacity(len);
            if len > 0 {
                out.push(F::zero());
            }
            let mut term = c;
            for _ in 1..len {
                out.push(term.clone());
                term = term * z.clone();
            }
            Ok(out)
        }
    }
}

/// Derivative in `u` of a coefficient sequence whose entries may be scalars or
/// vectors; `scale(x, k)` multiplies an entry by the integer `k`.
fn derivative_coeffs<F: Scalar, T: Clone>(
    point: &ExpansionPoint<F>,
    coeffs: &[T],
    scale: impl Fn(&T, i64) -> T,
) -> Vec<T> {
    match point {
        // d/du sum a_k e^k = sum (k+1) a_(k+1) e^k; one term of precision is lost
        ExpansionPoint::Finite(_) => coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| scale(a, k as i64))
            .collect(),
        // d/du = -w^2 d/dw: sum a_k w^k -> -sum k a_k w^(k+1)
        ExpansionPoint::Infinity => {
            let len = coeffs.len();
            let mut out: Vec<T> = coeffs.iter().map(|c| scale(c, 0)).collect();
            for k in 1..len.saturating_sub(1) {
                out[k + 1] = scale(&coeffs[k], -(k as i64));
            }
            out
        }
    }
}

/// Vector-valued truncated expansion: `coeffs[k]` is the vector coefficient of
/// the `k`-th power.
#[derive(Clone, Debug, PartialEq)]
pub struct VecSeries<F> {
    point: ExpansionPoint<F>,
    coeffs: Vec<Vec<F>>,
}

impl<F: Scalar> VecSeries<F> {
    pub fn constant(point: ExpansionPoint<F>, len: usize, v: &[F]) -> Self {
        let mut coeffs = vec![vec![F::zero(); v.len()]; len];
        if len > 0 {
            coeffs[0] = v.to_vec();
        }
        VecSeries { point, coeffs }
    }

    pub fn zero(point: ExpansionPoint<F>, len: usize, dim: usize) -> Self {
        VecSeries {
            point,
            coeffs: vec![vec![F::zero(); dim]; len],
        }
    }

    pub fn point(&self) -> &ExpansionPoint<F> {
        &self.point
    }

    pub fn coeffs(&self) -> &[Vec<F>] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn value(&self) -> Vec<F> {
        self.coeffs.first().cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.len().min(other.len());
        VecSeries {
            point: self.point.clone(),
            coeffs: (0..len)
                .map(|k| {
                    self.coeffs[k]
                        .iter()
                        .zip(&other.coeffs[k])
                        .map(|(a, b)| a.clone() + b.clone())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        VecSeries {
            point: self.point.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|v| v.iter().map(|x| -x.clone()).collect())
                .collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        VecSeries {
            point: self.point.clone(),
            coeffs: derivative_coeffs(&self.point, &self.coeffs, |v, k| {
                let k = F::from_i64(k);
                v.iter().map(|x| x.clone() * k.clone()).collect()
            }),
        }
    }

    /// `s(u) * self(u)` for a scalar series `s`.
    pub fn scalar_mul(&self, s: &Series<F>) -> Self {
        let len = self.len().min(s.len());
        let dim = self.coeffs.first().map_or(0, Vec::len);
        let mut coeffs = vec![vec![F::zero(); dim]; len];
        for (m, out) in coeffs.iter_mut().enumerate() {
            for i in 0..=m {
                let c = &s.coeffs[i];
                if c.is_zero() {
                    continue;
                }
                for (o, x) in out.iter_mut().zip(&self.coeffs[m - i]) {
                    if !x.is_zero() {
                        *o = o.clone() + c.clone() * x.clone();
                    }
                }
            }
        }
        VecSeries {
            point: self.point.clone(),
            coeffs,
        }
    }

    /// Applies a constant matrix coefficientwise.
    pub fn apply_matrix(&self, m: &SparseMatrix<F>) -> Self {
        VecSeries {
            point: self.point.clone(),
            coeffs: self.coeffs.iter().map(|v| m.mul_vec(v)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    #[test]
    fn pole_expansions_agree_with_rational_function_route() {
        use crate::ratfun::RationalFunction;
        let z = rat(2, 3);
        let inf = Series::pole(ExpansionPoint::Infinity, 6, rat(5, 1), &z).unwrap();
        let direct = RationalFunction::pole(rat(5, 1), z.clone()).series_at_infinity(5).unwrap();
        assert_eq!(&inf.coeffs()[1..], &direct[..]);
        let at = Series::pole(ExpansionPoint::Finite(rat(1, 1)), 3, rat(1, 1), &z).unwrap();
        // 1/(u - 2/3) near u = 1: 3 - 9 e + 27 e^2
        assert_eq!(at.coeffs(), &[rat(3, 1), rat(-9, 1), rat(27, 1)]);
        assert!(Series::pole(ExpansionPoint::Finite(z.clone()), 2, rat(1, 1), &z).is_err());
    }

    #[test]
    fn derivative_at_infinity_matches_pole_squared() {
        // d/du 1/u = -1/u^2
        let s: Series<Rational> = Series::pole(ExpansionPoint::Infinity, 5, rat(1, 1), &rat(0, 1)).unwrap();
        assert_eq!(
            s.derivative().coeffs(),
            &[rat(0, 1), rat(0, 1), rat(-1, 1), rat(0, 1), rat(0, 1)]
        );
    }
}
