//! Oracles shared by the integration tests. Nothing here calls the code it
//! is used to check.

#![allow(dead_code)]

use std::collections::BTreeMap;

use gaudin::repr::{GlModule, Partition};
use gaudin::scalar::rat;
use gaudin::{Complex64, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn part(p: &[i64]) -> Partition {
    Partition::new(p.to_vec()).unwrap()
}

/// `p/q` with small numerator and denominator.
pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-30..=30), rng.gen_range(1..=9))
}

/// `n` pairwise distinct small rationals avoiding `avoid`.
pub fn distinct_rationals(rng: &mut ChaCha8Rng, n: usize, avoid: &[Rational]) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::new();
    while out.len() < n {
        let x = small_rational(rng);
        if !out.contains(&x) && !avoid.contains(&x) {
            out.push(x);
        }
    }
    out
}

// ---------------------------------------------------------------- master function

/// `log |Phi|` from the product formula, term by term.
pub fn log_abs_phi(partitions: &[Partition], z: &[Complex64], t: &[Vec<Complex64>]) -> f64 {
    let n = t.len();
    let padded: Vec<Vec<i64>> = partitions
        .iter()
        .map(|p| {
            let mut v = p.parts().to_vec();
            v.resize(n + 1, 0);
            v
        })
        .collect();
    let dot = |a: &[i64], b: &[i64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>();
    let mut acc = 0.0;
    for s in 0..z.len() {
        for s2 in s + 1..z.len() {
            acc += dot(&padded[s], &padded[s2]) as f64 * (z[s] - z[s2]).norm().ln();
        }
    }
    for (i, group) in t.iter().enumerate() {
        for (j, &x) in group.iter().enumerate() {
            for (s, &zs) in z.iter().enumerate() {
                let m = padded[s][i] - padded[s][i + 1];
                acc -= m as f64 * (x - zs).norm().ln();
            }
            for &y in &group[j + 1..] {
                acc += 2.0 * (x - y).norm().ln();
            }
            if i + 1 < n {
                for &y in &t[i + 1] {
                    acc -= (x - y).norm().ln();
                }
            }
        }
    }
    acc
}

/// Gradient (as `Psi`) and Hessian of `log Phi` recovered from differences of
/// `log |Phi|` along real and imaginary directions, Richardson-extrapolated.
pub fn fd_gradient_hessian(
    partitions: &[Partition],
    z: &[Complex64],
    l: &[usize],
    x: &[Complex64],
    h: f64,
) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
    let f = |y: &[Complex64]| {
        let mut groups = Vec::new();
        let mut k = 0;
        for &li in l {
            groups.push(y[k..k + li].to_vec());
            k += li;
        }
        log_abs_phi(partitions, z, &groups)
    };
    let shift = |a: usize, d: Complex64| {
        let mut y = x.to_vec();
        y[a] += d;
        y
    };
    let n = x.len();
    let first = |a: usize, h: f64| {
        let dx = (f(&shift(a, Complex64::new(h, 0.0))) - f(&shift(a, Complex64::new(-h, 0.0)))) / (2.0 * h);
        let dy = (f(&shift(a, Complex64::new(0.0, h))) - f(&shift(a, Complex64::new(0.0, -h)))) / (2.0 * h);
        Complex64::new(dx, -dy)
    };
    let grad = (0..n)
        .map(|a| (4.0 * first(a, h / 2.0) - first(a, h)) / 3.0)
        .collect();
    let second = |a: usize, b: usize, h: f64, imag: bool| {
        let db = if imag { Complex64::new(0.0, h) } else { Complex64::new(h, 0.0) };
        let da = Complex64::new(h, 0.0);
        let g = |sa: f64, sb: f64| {
            let mut y = x.to_vec();
            y[a] += da * sa;
            y[b] += db * sb;
            f(&y)
        };
        (g(1.0, 1.0) - g(1.0, -1.0) - g(-1.0, 1.0) + g(-1.0, -1.0)) / (4.0 * h * h)
    };
    let hess = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let xx = (4.0 * second(a, b, h / 2.0, false) - second(a, b, h, false)) / 3.0;
                    let xy = (4.0 * second(a, b, h / 2.0, true) - second(a, b, h, true)) / 3.0;
                    Complex64::new(xx, -xy)
                })
                .collect()
        })
        .collect();
    (grad, hess)
}

// ---------------------------------------------------------------- characters

/// Weight multiplicities of `L_lambda` by counting semistandard tableaux.
pub fn kostka_weights(lambda: &Partition, rank: usize) -> BTreeMap<Vec<i64>, u64> {
    let shape: Vec<usize> = lambda.parts().iter().map(|&x| x as usize).filter(|&x| x > 0).collect();
    let cells: Vec<(usize, usize)> = shape
        .iter()
        .enumerate()
        .flat_map(|(r, &len)| (0..len).map(move |c| (r, c)))
        .collect();
    let mut out = BTreeMap::new();
    let mut fill = vec![vec![0usize; shape.first().copied().unwrap_or(0)]; shape.len()];
    fn rec(
        k: usize,
        cells: &[(usize, usize)],
        fill: &mut Vec<Vec<usize>>,
        rank: usize,
        out: &mut BTreeMap<Vec<i64>, u64>,
    ) {
        if k == cells.len() {
            let mut w = vec![0i64; rank];
            for row in fill.iter() {
                for &e in row.iter().filter(|&&e| e > 0) {
                    w[e - 1] += 1;
                }
            }
            *out.entry(w).or_insert(0) += 1;
            return;
        }
        let (r, c) = cells[k];
        let lo_row = if c > 0 { fill[r][c - 1] } else { 1 };
        let lo_col = if r > 0 { fill[r - 1][c] + 1 } else { 1 };
        for e in lo_row.max(lo_col)..=rank {
            fill[r][c] = e;
            rec(k + 1, cells, fill, rank, out);
        }
        fill[r][c] = 0;
    }
    rec(0, &cells, &mut fill, rank, &mut out);
    if cells.is_empty() {
        out.insert(vec![0; rank], 1);
    }
    out
}

pub fn tensor_weights(partitions: &[Partition], rank: usize) -> BTreeMap<Vec<i64>, u64> {
    let mut acc: BTreeMap<Vec<i64>, u64> = BTreeMap::from([(vec![0; rank], 1)]);
    for p in partitions {
        let f = kostka_weights(p, rank);
        let mut next = BTreeMap::new();
        for (a, ma) in &acc {
            for (b, mb) in &f {
                let w: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                *next.entry(w).or_insert(0) += ma * mb;
            }
        }
        acc = next;
    }
    acc
}

fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    if n == 0 {
        return vec![(Vec::new(), 1)];
    }
    let mut out = Vec::new();
    for (p, sign) in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            // inserting the largest element passes over n-1-pos smaller ones
            let s = if (n - 1 - pos) % 2 == 0 { sign } else { -sign };
            out.push((q, s));
        }
    }
    out
}

/// Multiplicity of `L_mu` in the tensor product: the Weyl alternation of the
/// weight multiplicities.
pub fn multiplicity(partitions: &[Partition], mu: &Partition, rank: usize) -> i64 {
    let weights = tensor_weights(partitions, rank);
    let mut mu_p = mu.parts().to_vec();
    mu_p.resize(rank, 0);
    let rho: Vec<i64> = (0..rank).map(|k| (rank - 1 - k) as i64).collect();
    permutations(rank)
        .into_iter()
        .map(|(w, sign)| {
            let key: Vec<i64> = (0..rank).map(|k| mu_p[k] + rho[k] - rho[w[k]]).collect();
            sign * weights.get(&key).copied().unwrap_or(0) as i64
        })
        .sum()
}

// ---------------------------------------------------------------- weight function by hand

pub fn hw_vector(m: &GlModule) -> Vec<Rational> {
    let mut v = vec![rat(0, 1); m.dim()];
    v[m.hw_index().unwrap()] = rat(1, 1);
    v
}

/// `e_(a+1, a)` applied for each `a` in `lowering`, rightmost first (one-based colors).
pub fn lower(m: &GlModule, lowering: &[usize], v: &[Rational]) -> Vec<Rational> {
    let mut w = v.to_vec();
    for &a in lowering.iter().rev() {
        w = m.gen(a, a - 1).mul_vec(&w);
    }
    w
}

pub fn kron(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().flat_map(|x| b.iter().map(move |y| x.clone() * y.clone())).collect()
}

pub fn axpy(acc: &mut [Rational], c: &Rational, v: &[Rational]) {
    for (o, x) in acc.iter_mut().zip(v) {
        *o = o.clone() + c.clone() * x.clone();
    }
}

/// Two sites, one root of each of the first two colors, six terms written out.
pub fn omega_one_one(m1: &GlModule, m2: &GlModule, t1: &Rational, t2: &Rational, z: &[Rational]) -> Vec<Rational> {
    let (v1, v2) = (hw_vector(m1), hw_vector(m2));
    let one = rat(1, 1);
    let (z1, z2) = (z[0].clone(), z[1].clone());
    let terms: Vec<(Rational, Vec<Rational>)> = vec![
        (
            one.clone() / ((t1.clone() - t2.clone()) * (t2.clone() - z1.clone())),
            kron(&lower(m1, &[1, 2], &v1), &v2),
        ),
        (
            one.clone() / ((t2.clone() - t1.clone()) * (t1.clone() - z1.clone())),
            kron(&lower(m1, &[2, 1], &v1), &v2),
        ),
        (
            one.clone() / ((t1.clone() - z1.clone()) * (t2.clone() - z2.clone())),
            kron(&lower(m1, &[1], &v1), &lower(m2, &[2], &v2)),
        ),
        (
            one.clone() / ((t2.clone() - z1.clone()) * (t1.clone() - z2.clone())),
            kron(&lower(m1, &[2], &v1), &lower(m2, &[1], &v2)),
        ),
        (
            one.clone() / ((t1.clone() - t2.clone()) * (t2.clone() - z2.clone())),
            kron(&v1, &lower(m2, &[1, 2], &v2)),
        ),
        (
            one.clone() / ((t2.clone() - t1.clone()) * (t1.clone() - z2.clone())),
            kron(&v1, &lower(m2, &[2, 1], &v2)),
        ),
    ];
    let mut out = vec![rat(0, 1); m1.dim() * m2.dim()];
    for (c, v) in &terms {
        axpy(&mut out, c, v);
    }
    out
}

/// Two sites, two roots of the first color, three grouped terms written out.
pub fn omega_two(m1: &GlModule, m2: &GlModule, t1: &Rational, t2: &Rational, z: &[Rational]) -> Vec<Rational> {
    let (v1, v2) = (hw_vector(m1), hw_vector(m2));
    let one = rat(1, 1);
    let (z1, z2) = (z[0].clone(), z[1].clone());
    let c1 = one.clone() / ((t1.clone() - t2.clone()) * (t2.clone() - z1.clone()))
        + one.clone() / ((t2.clone() - t1.clone()) * (t1.clone() - z1.clone()));
    let c2 = one.clone() / ((t1.clone() - z1.clone()) * (t2.clone() - z2.clone()))
        + one.clone() / ((t2.clone() - z1.clone()) * (t1.clone() - z2.clone()));
    let c3 = one.clone() / ((t1.clone() - t2.clone()) * (t2.clone() - z2.clone()))
        + one.clone() / ((t2.clone() - t1.clone()) * (t1.clone() - z2.clone()));
    let mut out = vec![rat(0, 1); m1.dim() * m2.dim()];
    axpy(&mut out, &c1, &kron(&lower(m1, &[1, 1], &v1), &v2));
    axpy(&mut out, &c2, &kron(&lower(m1, &[1], &v1), &lower(m2, &[1], &v2)));
    axpy(&mut out, &c3, &kron(&v1, &lower(m2, &[1, 1], &v2)));
    out
}
