//! The weight function `omega(t)`: a vector-valued rational function of the
//! coordinates whose values at critical points are Bethe vectors.
//!
//! A term is a colored sequence `C` (one word of colors per tensor factor,
//! color `i` used `l_i` times in total) together with an assignment of the
//! coordinates of each color to the positions of that color. Along each word
//! the coefficient is the chain `1/((s_1 - s_2)(s_2 - s_3)...(s_b - z))` of the
//! assigned coordinates, and the vector is the word read as a product of
//! lowering operators applied to the highest weight vector of that factor
//! (the rightmost letter acts first).
//!
//! Colors are zero-based here: color `c` stands for the simple root
//! `alpha_(c+1)` and lowers with `e_(c+1,c)` in zero-based generator indices.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{GaudinError, Result};
use crate::master::{CriticalOrbit, GaudinProblem, PointConfig};
use crate::repr::GlModule;
use crate::scalar::{norm2, Rational, Scalar};

/// Default refusal threshold for the number of terms.
pub const DEFAULT_MAX_TERMS: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ColoredSequence {
    pub segments: Vec<Vec<usize>>,
}

impl ColoredSequence {
    pub fn word(&self) -> Vec<usize> {
        self.segments.concat()
    }
}

/// `targets[a] = (color, j)`: position `a` of the flattened word carries the
/// coordinate `t_(color, j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VariableAssignment {
    pub targets: Vec<(usize, usize)>,
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// `binom(l + n - 1, n - 1) * l!`: every way to cut a word into `n`
/// segments, times the ways to place the coordinates.
pub fn term_count(l_total: usize, n_sites: usize) -> u128 {
    if n_sites == 0 {
        return u128::from(l_total == 0);
    }
    let fact = (1..=l_total as u128).fold(1u128, |a, k| a.saturating_mul(k));
    binomial((l_total + n_sites - 1) as u128, (n_sites - 1) as u128).saturating_mul(fact)
}

/// Distinct rearrangements of the multiset with `l[i]` copies of `i`, in
/// lexicographic order.
fn color_words(l: &[usize]) -> Vec<Vec<usize>> {
    fn rec(left: &mut [usize], word: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left.iter().all(|&k| k == 0) {
            out.push(word.clone());
            return;
        }
        for c in 0..left.len() {
            if left[c] > 0 {
                left[c] -= 1;
                word.push(c);
                rec(left, word, out);
                word.pop();
                left[c] += 1;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut l.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// Segment lengths `(b_1, ..., b_n)` summing to `total`, lexicographic.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..k {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// All colored sequences, ordered by flattened word and then by segment
/// boundaries.
pub fn colored_sequences(l: &[usize], n_sites: usize) -> Vec<ColoredSequence> {
    let total: usize = l.iter().sum();
    let mut out = Vec::new();
    for word in color_words(l) {
        for cuts in compositions(total, n_sites) {
            let mut segments = Vec::with_capacity(n_sites);
            let mut k = 0;
            for b in cuts {
                segments.push(word[k..k + b].to_vec());
                k += b;
            }
            out.push(ColoredSequence { segments });
        }
    }
    out
}

/// Assignments compatible with the colors of `c`, ordered lexicographically
/// by the per-color variable orders.
pub fn assignments(c: &ColoredSequence, l: &[usize]) -> Vec<VariableAssignment> {
    let word = c.word();
    let positions: Vec<Vec<usize>> = (0..l.len())
        .map(|i| (0..word.len()).filter(|&a| word[a] == i).collect())
        .collect();
    let mut out = vec![vec![(usize::MAX, usize::MAX); word.len()]];
    for (i, pos) in positions.iter().enumerate() {
        let perms = permutations(l[i]);
        out = out
            .into_iter()
            .flat_map(|partial| {
                perms.iter().map(move |p| {
                    let mut t = partial.clone();
                    for (k, &a) in pos.iter().enumerate() {
                        t[a] = (i, p[k]);
                    }
                    t
                })
            })
            .collect();
    }
    out.into_iter().map(|targets| VariableAssignment { targets }).collect()
}

/// Every `(C, sigma)` pair exactly once.
pub fn enumerate_terms<F: Scalar>(p: &GaudinProblem<F>) -> Vec<(ColoredSequence, VariableAssignment)> {
    colored_sequences(p.l(), p.sites().len())
        .into_iter()
        .flat_map(|c| {
            let a = assignments(&c, p.l());
            a.into_iter().map(move |s| (c.clone(), s))
        })
        .collect()
}

/// `e_C v` in the tensor module.
pub fn lowered_vector(module: &GlModule, c: &ColoredSequence) -> Result<Vec<Rational>> {
    let hw = module
        .hw_index()
        .ok_or_else(|| GaudinError::DimensionMismatch("module has no highest weight vector".into()))?;
    let mut v = vec![Rational::zero(); module.dim()];
    v[hw] = Rational::one();
    for (s, seg) in c.segments.iter().enumerate() {
        for &color in seg.iter().rev() {
            v = module.slot_gen(s, color + 1, color).mul_vec(&v);
        }
    }
    Ok(v)
}

/// `omega_(C, sigma)(t)`
pub fn term_coefficient<F: Scalar>(
    c: &ColoredSequence,
    sigma: &VariableAssignment,
    t: &PointConfig<F>,
    z: &[F],
) -> F {
    let mut out = F::one();
    let mut a = 0;
    for (s, seg) in c.segments.iter().enumerate() {
        if seg.is_empty() {
            continue;
        }
        let var = |k: usize| {
            let (i, j) = sigma.targets[k];
            t.coords[i][j].clone()
        };
        let mut den = F::one();
        for k in a..a + seg.len() - 1 {
            den = den * (var(k) - var(k + 1));
        }
        den = den * (var(a + seg.len() - 1) - z[s].clone());
        out = out / den;
        a += seg.len();
    }
    out
}

/// `omega(t)` together with the sum of the magnitudes of its terms (a scale
/// for judging cancellation).
pub fn omega_with_scale<F: Scalar>(
    p: &GaudinProblem<F>,
    module: &GlModule,
    t: &PointConfig<F>,
    max_terms: u128,
) -> Result<(Vec<F>, f64)> {
    t.check_in_u(p)?;
    if module.n_factors() != p.sites().len() {
        return Err(GaudinError::DimensionMismatch("module factors differ from the number of sites".into()));
    }
    let count = term_count(p.l_total(), p.sites().len());
    if count > max_terms {
        return Err(GaudinError::TooManyTerms {
            count,
            limit: max_terms,
        });
    }
    let mut out = vec![F::zero(); module.dim()];
    let mut scale = 0.0;
    for c in colored_sequences(p.l(), p.sites().len()) {
        let v = lowered_vector(module, &c)?;
        if v.iter().all(Scalar::is_zero) {
            continue;
        }
        let coeff = assignments(&c, p.l())
            .iter()
            .fold(F::zero(), |acc, s| acc + term_coefficient(&c, s, t, p.sites()));
        let vn = norm2(&v);
        scale += coeff.modulus() * vn;
        for (o, x) in out.iter_mut().zip(&v) {
            if !x.is_zero() {
                *o = o.clone() + coeff.clone() * F::from_rational(x);
            }
        }
    }
    check_weight(p, module, &out)?;
    Ok((out, scale))
}

pub fn omega_evaluate<F: Scalar>(
    p: &GaudinProblem<F>,
    module: &GlModule,
    t: &PointConfig<F>,
    max_terms: u128,
) -> Result<Vec<F>> {
    omega_with_scale(p, module, t, max_terms).map(|(v, _)| v)
}

/// `e_ii w = lambda_inf_i w` for every `i`.
fn check_weight<F: Scalar>(p: &GaudinProblem<F>, module: &GlModule, w: &[F]) -> Result<()> {
    let lam = p.lambda_inf().parts();
    let wn = crate::scalar::max_modulus(w);
    for (i, &li) in lam.iter().enumerate() {
        let e = module.gen(i, i).map(F::from_rational);
        let d: Vec<F> = e
            .mul_vec(w)
            .into_iter()
            .zip(w)
            .map(|(a, b)| a - F::from_i64(li) * b.clone())
            .collect();
        let r = crate::scalar::max_modulus(&d);
        let bad = if F::EXACT { r != 0.0 } else { r > 1e-10 * wn.max(f64::MIN_POSITIVE) };
        if bad {
            return Err(GaudinError::DimensionMismatch(format!(
                "weight function left the weight space (e_{0}{0} residual {r:e})",
                i + 1
            )));
        }
    }
    Ok(())
}

/// A Bethe vector with its diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct BetheVector {
    pub vector: Vec<Complex64>,
    pub norm: f64,
    /// `max_(i<j) |e_ij w| / |w|`
    pub singular_residual: f64,
    /// `|w|` divided by the summed magnitudes of the terms.
    pub cancellation: f64,
}

/// `omega(p)` at a nondegenerate critical orbit.
pub fn bethe_vector(
    p: &GaudinProblem<Complex64>,
    module: &GlModule,
    orbit: &CriticalOrbit,
    max_terms: u128,
) -> Result<BetheVector> {
    if orbit.degenerate {
        return Err(GaudinError::DegenerateCriticalPoint(orbit.hessian.norm()));
    }
    let (w, scale) = omega_with_scale(p, module, &orbit.rep, max_terms)?;
    let norm = norm2(&w);
    let cancellation = if scale > 0.0 { norm / scale } else { 0.0 };
    if norm == 0.0 || cancellation < 1e-13 {
        return Err(GaudinError::ZeroVector);
    }
    Ok(BetheVector {
        singular_residual: singular_residual(module, &w),
        vector: w,
        norm,
        cancellation,
    })
}

/// `max_(i<j) |e_ij w| / |w|`
pub fn singular_residual(module: &GlModule, w: &[Complex64]) -> f64 {
    let norm = norm2(w);
    let r = module.rank();
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in i + 1..r {
            let e = module.gen(i, j).map(Complex64::from_rational);
            worst = worst.max(norm2(&e.mul_vec(w)) / norm);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::{build_irreducible, tensor_module, Partition};
    use crate::scalar::rat;

    fn part(p: &[i64]) -> Partition {
        Partition::new(p.to_vec()).unwrap()
    }

    fn problem(n: usize, parts: &[&[i64]], l: &[usize], z: &[Rational]) -> GaudinProblem<Rational> {
        GaudinProblem::new(n, parts.iter().map(|p| part(p)).collect(), l.to_vec(), z.to_vec()).unwrap()
    }

    #[test]
    fn term_counts() {
        let z = [rat(0, 1), rat(1, 1)];
        assert_eq!(enumerate_terms(&problem(1, &[&[1, 0], &[1, 0]], &[1], &z)).len(), 2);
        // two words (1 2), (2 1) cut three ways each, one assignment apiece
        let p = problem(2, &[&[2, 1, 0], &[2, 1, 0]], &[1, 1], &z);
        assert_eq!(enumerate_terms(&p).len(), 6);
        assert_eq!(term_count(2, 2), 6);
        let p = problem(1, &[&[1, 0], &[1, 0]], &[0], &z);
        let terms = enumerate_terms(&p);
        assert_eq!(terms.len(), 1);
        assert!(terms[0].0.segments.iter().all(Vec::is_empty));
    }

    #[test]
    fn every_term_once_and_compatible() {
        let z = [rat(0, 1), rat(1, 1), rat(2, 1)];
        let p = problem(2, &[&[1, 0, 0], &[1, 0, 0], &[1, 0, 0]], &[2, 1], &z);
        let terms = enumerate_terms(&p);
        assert_eq!(terms.len() as u128, term_count(3, 3));
        for (c, s) in &terms {
            let w = c.word();
            assert!(s.targets.iter().zip(&w).all(|((i, _), c)| i == c));
        }
        let mut seen: Vec<_> = terms.iter().map(|(c, s)| (c.segments.clone(), s.targets.clone())).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), terms.len());
    }

    #[test]
    fn two_site_hand_evaluation() {
        let z = [rat(0, 1), rat(1, 1)];
        let p = problem(1, &[&[1, 0], &[1, 0]], &[1], &z);
        let (v, _) = build_irreducible(&part(&[1, 0]), 2).unwrap();
        let m = tensor_module(&[v.clone(), v]).unwrap();
        let t = rat(1, 3);
        let w = omega_evaluate(&p, &m, &PointConfig::new(vec![vec![t.clone()]]), DEFAULT_MAX_TERMS).unwrap();
        // basis: v (x) v, v (x) fv, fv (x) v, fv (x) fv
        let hw = m.hw_index().unwrap();
        let mut e = vec![Rational::zero(); 4];
        e[hw] = Rational::one();
        let a = m.slot_gen(0, 1, 0).mul_vec(&e);
        let b = m.slot_gen(1, 1, 0).mul_vec(&e);
        let expected: Vec<Rational> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| x.clone() / (t.clone() - z[0].clone()) + y.clone() / (t.clone() - z[1].clone()))
            .collect();
        assert_eq!(w, expected);
    }

    #[test]
    fn guard_and_domain() {
        let z = [rat(0, 1), rat(1, 1)];
        let p = problem(1, &[&[1, 0], &[1, 0]], &[1], &z);
        let (v, _) = build_irreducible(&part(&[1, 0]), 2).unwrap();
        let m = tensor_module(&[v.clone(), v]).unwrap();
        assert!(matches!(
            omega_evaluate(&p, &m, &PointConfig::new(vec![vec![rat(1, 3)]]), 1),
            Err(GaudinError::TooManyTerms { count: 2, limit: 1 })
        ));
        assert!(matches!(
            omega_evaluate(&p, &m, &PointConfig::new(vec![vec![rat(0, 1)]]), DEFAULT_MAX_TERMS),
            Err(GaudinError::PointNotInU(_))
        ));
    }
}
