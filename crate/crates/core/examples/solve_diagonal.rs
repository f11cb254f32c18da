// Lowest two eigenpairs of diag(-4, -2, -1, 3) with the automatic stepsize.

use std::error::Error;

use triofm::engine::{init_random, solve_observed, DomainBounds, SolverConfig, StopRule};
use triofm::io::gen_diag;
use triofm::linalg::Spectrum;
use triofm::theory::{e_obj, e_vec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let d = [-4.0, -2.0, -1.0, 3.0];
    let a = gen_diag(&d)?;
    let oracle = Spectrum::for_diagonal(&d);

    let cfg = SolverConfig {
        stop: StopRule::EigenvectorError,
        tol: 1e-8,
        ..SolverConfig::new(2)
    };
    let bounds = DomainBounds::for_matrix(&a, cfg.p)?;
    let x0 = init_random(a.n(), &bounds, 7)?;
    let sol = solve_observed(&a, &cfg, x0, Some(&oracle), &mut [])?.ensure_converged()?;

    println!("alpha = {:.4e}, {} iterations", sol.alpha, sol.iterations());
    for (i, l) in sol.eigenvalue_estimates().iter().enumerate() {
        println!("lambda_{} ~ {l:.10}", i + 1);
        assert!((l - d[i]).abs() < 1e-6);
    }
    println!("e_vec = {:.2e}", e_vec(&sol.state.x, &oracle)?);
    println!("e_obj = {:.2e}", e_obj(&a, &sol.state.x, &oracle)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
