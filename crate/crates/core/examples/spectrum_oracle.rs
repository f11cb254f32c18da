// Dense reference spectrum of a random sparse matrix, with the domain radii
// and automatic stepsize the solver would use.

use std::error::Error;

use triofm::engine::{auto_stepsize, DomainBounds};
use triofm::io::gen_random_sparse_shifted;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let a = gen_random_sparse_shifted(40, 0.1, 2.0, 3)?;
    let s = a.dense_spectrum()?;
    let p = 4;
    let bounds = DomainBounds::for_matrix(&a, p)?;

    println!("n = {}, nnz = {}, q = {}", a.n(), a.nnz(), s.q());
    println!("|A|_2 = {:.6}, estimate rho = {:.6}", s.spectral_norm(), bounds.rho);
    assert!(bounds.rho >= s.spectral_norm());
    for (i, r) in bounds.radii.iter().enumerate() {
        println!("R_{} = {r:.6}", i + 1);
    }
    println!("auto alpha = {:.4e}", auto_stepsize(&bounds));
    for i in 0..p {
        println!("lambda_{} = {:+.8}", i + 1, s.eigenvalue(i));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
