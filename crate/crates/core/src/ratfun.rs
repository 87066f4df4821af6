//! Rational functions in `u`.

use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GaudinError, Result};
use crate::poly::Polynomial;
use crate::scalar::Scalar;
use num_complex::Complex64;

/// `num / den` with a monic denominator; reduced when the field is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction<F> {
    num: Polynomial<F>,
    den: Polynomial<F>,
}

impl<F: Scalar> RationalFunction<F> {
    pub fn new(num: Polynomial<F>, den: Polynomial<F>) -> Result<Self> {
        if den.is_zero() {
            return Err(GaudinError::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Polynomial<F>, den: Polynomial<F>) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let (num, den) = if F::EXACT {
            let g = num.gcd(&den);
            if g.degree() == Some(0) {
                (num, den)
            } else {
                (num.div_rem(&g).unwrap().0, den.div_rem(&g).unwrap().0)
            }
        } else {
            (num, den)
        };
        let lead = den.leading().recip();
        RationalFunction {
            num: num.scale(&lead),
            den: den.scale(&lead),
        }
    }

    pub fn zero() -> Self {
        RationalFunction {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(F::one())
    }

    pub fn constant(c: F) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn from_poly(p: Polynomial<F>) -> Self {
        RationalFunction {
            num: p,
            den: Polynomial::one(),
        }
    }

    /// `c / (u - z)`
    pub fn pole(c: F, z: F) -> Self {
        Self::normalized(Polynomial::constant(c), Polynomial::linear(z))
    }

    /// `f' / f`
    pub fn log_derivative(f: &Polynomial<F>) -> Result<Self> {
        Self::new(f.derivative(), f.clone())
    }

    pub fn numerator(&self) -> &Polynomial<F> {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial<F> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn scale(&self, c: &F) -> Self {
        Self::normalized(self.num.scale(c), self.den.clone())
    }

    pub fn recip(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(GaudinError::DivisionByZero);
        }
        Ok(self.clone() * rhs.recip()?)
    }

    /// `(n/d)' = (n'd - nd')/d^2`
    pub fn derivative(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let num = self.num.derivative() * self.den.clone() - self.num.clone() * self.den.derivative();
        Self::normalized(num, self.den.clone() * self.den.clone())
    }

    pub fn eval(&self, x: &F) -> Result<F> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(GaudinError::PoleEvaluation);
        }
        Ok(self.num.eval(x) / d)
    }

    /// Coefficients of `u^{-1}, ..., u^{-j_max}` in the expansion at infinity.
    pub fn series_at_infinity(&self, j_max: usize) -> Result<Vec<F>> {
        if self.is_zero() {
            return Ok(vec![F::zero(); j_max]);
        }
        let dn = self.num.degree().unwrap();
        let dd = self.den.degree().unwrap();
        if dn > dd {
            return Err(GaudinError::ImproperRational { num: dn, den: dd });
        }
        // with w = 1/u: n/d = w^(dd-dn) * rev(n)(w) / rev(d)(w)
        let shift = dd - dn;
        let rev_n: Vec<F> = self.num.coeffs().iter().rev().cloned().collect();
        let rev_d: Vec<F> = self.den.coeffs().iter().rev().cloned().collect();
        let d0_inv = rev_d[0].recip();
        let len = j_max + 1;
        let mut quot: Vec<F> = Vec::with_capacity(len);
        for k in 0..len.saturating_sub(shift) {
            let mut acc = rev_n.get(k).cloned().unwrap_or_else(F::zero);
            for j in 1..=k.min(rev_d.len() - 1) {
                acc = acc - rev_d[j].clone() * quot[k - j].clone();
            }
            quot.push(acc * d0_inv.clone());
        }
        let mut out = vec![F::zero(); len];
        for (k, q) in quot.into_iter().enumerate() {
            if k + shift < len {
                out[k + shift] = q;
            }
        }
        out.remove(0);
        Ok(out)
    }

    /// Largest of the numerator and denominator degrees.
    pub fn degree_bound(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G + Copy) -> RationalFunction<G> {
        RationalFunction::normalized(self.num.map(f), self.den.map(f))
    }

    pub fn to_complex(&self) -> RationalFunction<Complex64> {
        self.map(|c| c.to_c64())
    }
}

/// Equality decided by agreement at `max(20, 2 * degree_bound + 1)` sample
/// points away from the poles, within relative tolerance `rel_tol`.
pub fn approx_eq<F: Scalar>(a: &RationalFunction<F>, b: &RationalFunction<F>, rel_tol: f64) -> bool {
    let a = a.to_complex();
    let b = b.to_complex();
    let bound = a.degree_bound() + b.degree_bound();
    let samples = 20.max(2 * bound + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut taken = 0;
    let mut tries = 0;
    while taken < samples {
        tries += 1;
        if tries > 100 * samples {
            return false;
        }
        let x = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let (Ok(va), Ok(vb)) = (a.eval(&x), b.eval(&x)) else {
            continue;
        };
        let da = a.denominator().eval(&x).norm();
        let db = b.denominator().eval(&x).norm();
        if da < 1e-6 || db < 1e-6 {
            continue;
        }
        let scale = va.norm().max(vb.norm()).max(1.0);
        if (va - vb).norm() > rel_tol * scale {
            return false;
        }
        taken += 1;
    }
    true
}

impl<F: Scalar> Add for RationalFunction<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        if self.den == rhs.den {
            return Self::normalized(self.num + rhs.num, self.den);
        }
        let num = self.num * rhs.den.clone() + rhs.num * self.den.clone();
        Self::normalized(num, self.den * rhs.den)
    }
}

impl<F: Scalar> Sub for RationalFunction<F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<F: Scalar> Neg for RationalFunction<F> {
    type Output = Self;
    fn neg(self) -> Self {
        RationalFunction {
            num: -self.num,
            den: self.den,
        }
    }
}

impl<F: Scalar> Mul for RationalFunction<F> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        Self::normalized(self.num * rhs.num, self.den * rhs.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn p(c: &[i64]) -> Polynomial<Rational> {
        Polynomial::new(c.iter().map(|&x| rat(x, 1)).collect())
    }

    #[test]
    fn derivative_of_simple_pole() {
        let f = RationalFunction::pole(rat(1, 1), rat(1, 1));
        let expected = RationalFunction::new(p(&[-1]), p(&[-1, 1]) * p(&[-1, 1])).unwrap();
        assert_eq!(f.derivative(), expected);
    }

    #[test]
    fn log_derivative_of_product() {
        let f = RationalFunction::log_derivative(&p(&[0, -1, 1])).unwrap();
        assert_eq!(f, RationalFunction::new(p(&[-1, 2]), p(&[0, -1, 1])).unwrap());
    }

    #[test]
    fn evaluation() {
        // (u^2 - u)/(u - 1/2) at u = 2
        let f = RationalFunction::new(
            p(&[0, -1, 1]),
            Polynomial::new(vec![rat(-1, 2), rat(1, 1)]),
        )
        .unwrap();
        assert_eq!(f.eval(&rat(2, 1)).unwrap(), rat(4, 3));
        assert_eq!(f.eval(&rat(1, 2)), Err(GaudinError::PoleEvaluation));
        assert_eq!(
            RationalFunction::new(p(&[1]), Polynomial::zero()),
            Err(GaudinError::DivisionByZero)
        );
        assert_eq!(f.div(&RationalFunction::zero()), Err(GaudinError::DivisionByZero));
    }

    #[test]
    fn reduced_form() {
        let f = RationalFunction::new(p(&[-1, 0, 1]), p(&[-2, 2])).unwrap();
        assert_eq!(f.numerator(), &Polynomial::new(vec![rat(1, 2), rat(1, 2)]));
        assert_eq!(f.denominator(), &p(&[1]));
    }

    #[test]
    fn expansions_at_infinity() {
        let z = rat(3, 1);
        let s = RationalFunction::pole(rat(1, 1), z.clone()).series_at_infinity(4).unwrap();
        assert_eq!(s, vec![rat(1, 1), rat(3, 1), rat(9, 1), rat(27, 1)]);
        let f = RationalFunction::new(p(&[2]), p(&[0, -1, 1])).unwrap();
        assert_eq!(
            f.series_at_infinity(5).unwrap(),
            vec![rat(0, 1), rat(2, 1), rat(2, 1), rat(2, 1), rat(2, 1)]
        );
        assert_eq!(
            RationalFunction::<Rational>::zero().series_at_infinity(3).unwrap(),
            vec![rat(0, 1); 3]
        );
        let improper = RationalFunction::from_poly(p(&[0, 1]));
        assert!(matches!(
            improper.series_at_infinity(2),
            Err(GaudinError::ImproperRational { .. })
        ));
        assert!(f.series_at_infinity(0).unwrap().is_empty());
    }

    #[test]
    fn floating_equality_by_sampling() {
        let a = RationalFunction::new(p(&[-1, 0, 1]), p(&[-1, 1])).unwrap().to_complex();
        let b = RationalFunction::from_poly(p(&[1, 1])).to_complex();
        assert!(approx_eq(&a, &b, 1e-12));
        let c = RationalFunction::from_poly(p(&[1, 2])).to_complex();
        assert!(!approx_eq(&a, &c, 1e-12));
    }
}
