//! Exact weight function values, term by term, for a gl(3) two-site problem
//! with one root of each color.

use gaudin::master::{GaudinProblem, PointConfig};
use gaudin::repr::{build_irreducible, tensor_module, Partition};
use gaudin::scalar::{format_rational, rat};
use gaudin::weight_fn::{enumerate_terms, omega_evaluate, term_count, DEFAULT_MAX_TERMS};

fn main() -> gaudin::Result<()> {
    let lam = Partition::new(vec![2, 1, 0])?;
    let p = GaudinProblem::new(2, vec![lam.clone(), lam.clone()], vec![1, 1], vec![rat(0, 1), rat(3, 1)])?;
    println!("{} terms", term_count(p.l_total(), 2));
    for (c, s) in enumerate_terms(&p) {
        println!("  colors per site {:?}, variables {:?}", c.segments, s.targets);
    }

    let (v, _) = build_irreducible(&lam, 3)?;
    let module = tensor_module(&[v.clone(), v])?;
    let t = PointConfig::new(vec![vec![rat(1, 3)], vec![rat(5, 7)]]);
    let w = omega_evaluate(&p, &module, &t, DEFAULT_MAX_TERMS)?;
    for (k, x) in w.iter().enumerate().filter(|(_, x)| **x != rat(0, 1)) {
        println!("  omega[{k}] (weight {:?}) = {}", module.basis_weights()[k].0, format_rational(x));
    }
    Ok(())
}
