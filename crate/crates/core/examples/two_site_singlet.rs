//! The smallest nontrivial case: two spin-1/2 sites of gl(2), one Bethe root.
//! Everything here is exact.

use gaudin::master::{gradient, hessian_log_phi, master_operator_at, GaudinProblem, PointConfig};
use gaudin::repr::{build_irreducible, tensor_module, tensor_shapovalov, Partition};
use gaudin::scalar::{format_rational, rat};
use gaudin::weight_fn::omega_evaluate;
use gaudin::wronski::{exponent_data, solve_h_tuple, verify_wronskian_identities};

fn main() -> gaudin::Result<()> {
    let spin = Partition::new(vec![1, 0])?;
    let p = GaudinProblem::new(1, vec![spin.clone(), spin.clone()], vec![1], vec![rat(0, 1), rat(1, 1)])?;
    let t = PointConfig::new(vec![vec![rat(1, 2)]]);

    println!("lambda_inf = {:?}", p.lambda_inf().parts());
    println!("Psi(1/2) = {}", format_rational(&gradient(&p, &t)?[0][0]));
    let (h, _) = hessian_log_phi(&p, &t)?;
    println!("Hessian  = {}", format_rational(&h));

    let (v, s) = build_irreducible(&spin, 2)?;
    let module = tensor_module(&[v.clone(), v])?;
    let form = tensor_shapovalov(&[s.clone(), s])?;
    let w = omega_evaluate(&p, &module, &t, 100)?;
    println!("omega    = {:?}", w.iter().map(format_rational).collect::<Vec<_>>());
    println!("S(w, w)  = {}", format_rational(&form.pair(&w, &w)));

    let d = master_operator_at(&p, &t)?;
    for i in 1..=2 {
        let g = d.lower_coeff(i);
        let show = |c: &[gaudin::Rational]| c.iter().map(format_rational).collect::<Vec<_>>();
        println!(
            "G_{i}(u)  = {:?} / {:?}   (ascending coefficients)",
            show(g.numerator().coeffs()),
            show(g.denominator().coeffs())
        );
    }

    let e = exponent_data(&p, None)?;
    let tuple = solve_h_tuple(&p, &t, &e)?;
    for (i, hi) in tuple.h.iter().enumerate() {
        println!("h_{} = {:?}", i + 1, hi.coeffs().iter().map(format_rational).collect::<Vec<_>>());
    }
    for chk in verify_wronskian_identities(&tuple, &p, &t, &e) {
        println!("Wronskian identity j={}: residual {}", chk.j, chk.residual);
    }
    Ok(())
}
