// Every fixed point built from the negative eigenpairs of a small diagonal
// matrix, with its residual, stability and Jacobian certificate.

use std::error::Error;

use triofm::engine::direction;
use triofm::linalg::{SparseSymMatrix, Spectrum};
use triofm::theory::{
    classify_fixed_point, construct_fixed_point, enumerate_specs, JacobianBlock,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let d = [-4.0, -2.0, -1.0, 3.0];
    let a = SparseSymMatrix::from_diagonal(&d)?;
    let s = Spectrum::for_diagonal(&d);
    let (p, q) = (2, s.q());

    let specs = enumerate_specs(p, q);
    println!("{} fixed points for p = {p}, q = {q}", specs.len());
    let mut stable = 0;
    for spec in &specs {
        let x = construct_fixed_point(spec, &s)?;
        let residual = direction(&a, &x)?.frobenius_norm();
        let class = classify_fixed_point(&x, &s, 1e-10)?;
        let min_jac = (0..p)
            .map(|k| JacobianBlock::new(&a, &x, k)?.min_eigenvalue())
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if spec.is_stable(q) {
            stable += 1;
        }
        println!("{spec:<10} |g| = {residual:.1e}  {class:?}  min Jacobian eig {min_jac:+.3}");
    }
    assert_eq!(stable, 4);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
