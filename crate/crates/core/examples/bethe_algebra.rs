//! The Bethe algebra on three gl(3) sites: exact self-checks on the whole
//! module, then the operators B_ij restricted to the singular vectors.

use gaudin::bethe::{algebra_selfcheck, default_samples, restrict_family, BetheCurrents};
use gaudin::repr::{build_irreducible, tensor_module, tensor_shapovalov, weight_and_singular_subspace, Partition};
use gaudin::scalar::{format_rational, rat};

fn main() -> gaudin::Result<()> {
    let v = Partition::new(vec![1, 0, 0])?;
    let (m, s) = build_irreducible(&v, 3)?;
    let module = tensor_module(&[m.clone(), m.clone(), m])?;
    let form = tensor_shapovalov(&[s.clone(), s.clone(), s])?;
    let z = vec![rat(0, 1), rat(1, 1), rat(3, 1)];

    let cur = BetheCurrents::new(&module, &z)?;
    let report = algebra_selfcheck(&cur, &form, &module, &default_samples(&z, 2))?;
    println!("dim {}: {report:?}", module.dim());

    let target = Partition::new(vec![1, 1, 1])?;
    let (_, sing) = weight_and_singular_subspace(&module, &target)?;
    println!("dim Sing[{:?}] = {}", target.parts(), sing.len());
    let family = restrict_family(&cur, &sing, 4)?;
    for i in 1..=3 {
        for j in 1..=4 {
            let b = family.coefficient(i, j);
            let entries: Vec<String> = (0..family.dim())
                .flat_map(|r| (0..family.dim()).map(move |c| (r, c)))
                .map(|(r, c)| format_rational(b.get(r, c)))
                .collect();
            println!("B_{i}{j} = {entries:?}");
        }
    }
    Ok(())
}
