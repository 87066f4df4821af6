//! From a critical point to the polynomial tuple h_1..h_3 of a gl(3)
//! problem, with the Wronskian identities and the Schubert conditions.

use gaudin::master::{find_critical_orbits, GaudinProblem, SolverConfig};
use gaudin::repr::Partition;
use gaudin::wronski::{exponent_data, schubert_incidence, solve_h_tuple, verify_wronskian_identities, Site};
use gaudin::Complex64;

fn main() -> gaudin::Result<()> {
    let p = GaudinProblem::new(
        2,
        vec![Partition::new(vec![1, 0, 0])?, Partition::new(vec![1, 1, 0])?],
        vec![1, 1],
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.5, 0.0)],
    )?;
    let orbit = &find_critical_orbits(&p, &SolverConfig::default())[0];
    let e = exponent_data(&p, None)?;
    println!("d = {:?}, dual partition {:?}", e.d, e.dual.parts());

    let h = solve_h_tuple(&p, &orbit.rep, &e)?;
    for (i, hi) in h.h.iter().enumerate() {
        let c: Vec<String> = hi.coeffs().iter().map(|x| format!("{:.6}", x.re)).collect();
        println!("h_{} = {c:?}   (ODE residual {:.1e})", i + 1, h.ode_residuals[i]);
    }
    for w in verify_wronskian_identities(&h, &p, &orbit.rep, &e) {
        println!("j = {}: constant {}, residual {:.1e}", w.j, w.constant, w.residual);
    }
    for (z, lam) in p.sites().iter().zip(p.partitions()) {
        let inc = schubert_incidence(&h, &e, &Site::Finite(*z), lam)?;
        println!("site {z}: passed {}  {:?}", inc.passed, inc.conditions);
    }
    let inf = schubert_incidence(&h, &e, &Site::Infinity, &e.dual)?;
    println!("infinity: passed {}", inf.passed);
    Ok(())
}
