//! Multistart search for the critical orbits of the master function on four
//! spin-1/2 sites with two Bethe roots, then continuation to moved sites.

use gaudin::master::{continue_in_sites, find_critical_orbits, GaudinProblem, SolverConfig};
use gaudin::repr::Partition;
use gaudin::Complex64;

fn main() -> gaudin::Result<()> {
    let spin = Partition::new(vec![1, 0])?;
    let z: Vec<Complex64> = [0.0, 1.0, 3.0, 3.5].iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let p = GaudinProblem::new(1, vec![spin; 4], vec![2], z)?;
    let cfg = SolverConfig {
        expected: Some(2),
        ..SolverConfig::default()
    };
    let orbits = find_critical_orbits(&p, &cfg);
    for o in &orbits {
        println!("t = {:?}  |Psi| = {:.1e}  H = {:.6}", o.rep.coords[0], o.residual, o.hessian);
    }

    let target: Vec<Complex64> = [0.0, 1.2, 2.9, 4.0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let reps: Vec<_> = orbits.iter().map(|o| o.rep.clone()).collect();
    for (o, moved) in orbits.iter().zip(continue_in_sites(&p, &reps, &target, 10, &cfg)?) {
        println!("{:?} -> {:?}", o.rep.coords[0], moved.map(|t| t.coords[0].clone()));
    }
    Ok(())
}
