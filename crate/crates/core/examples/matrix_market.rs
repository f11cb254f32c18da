// Write a shifted 2-D Laplacian in Matrix Market form, read it back and
// solve for its lowest eigenpairs against the closed-form spectrum.

use std::error::Error;

use triofm::engine::{init_random, solve, DomainBounds, SolverConfig, Stepsize};
use triofm::io::{gen_laplacian2d, laplacian2d_eigenvalues, read_matrix_market, write_matrix_market};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("lap.mtx");
    let a = gen_laplacian2d(4, 3, 3.5)?;
    write_matrix_market(&a, &path)?;
    let b = read_matrix_market(&path)?;
    assert_eq!(a, b);
    println!("{}: n = {}, nnz = {}", path.display(), b.n(), b.nnz());

    let mut exact = laplacian2d_eigenvalues(4, 3, 3.5);
    exact.sort_by(f64::total_cmp);
    let cfg = SolverConfig {
        alpha: Stepsize::Auto,
        tol: 1e-9,
        ..SolverConfig::new(2)
    };
    let x0 = init_random(b.n(), &DomainBounds::for_matrix(&b, 2)?, 1)?;
    let sol = solve(&b, &cfg, x0)?.ensure_converged()?;
    for (i, l) in sol.eigenvalue_estimates().iter().enumerate() {
        println!("lambda_{} ~ {l:.8} (exact {:.8})", i + 1, exact[i]);
        assert!((l - exact[i]).abs() < 1e-6);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
