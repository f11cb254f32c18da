//! Every example under `examples/` runs to completion.

mod solve_diagonal {
    #![allow(dead_code)]
    include!("../examples/solve_diagonal.rs");
}

#[test]
fn example_solve_diagonal() {
    solve_diagonal::run_example().unwrap();
}

mod fixed_points {
    #![allow(dead_code)]
    include!("../examples/fixed_points.rs");
}

#[test]
fn example_fixed_points() {
    fixed_points::run_example().unwrap();
}

mod spectrum_oracle {
    #![allow(dead_code)]
    include!("../examples/spectrum_oracle.rs");
}

#[test]
fn example_spectrum_oracle() {
    spectrum_oracle::run_example().unwrap();
}

mod matrix_market {
    #![allow(dead_code)]
    include!("../examples/matrix_market.rs");
}

#[test]
fn example_matrix_market() {
    matrix_market::run_example().unwrap();
}

mod saddle_escape {
    #![allow(dead_code)]
    include!("../examples/saddle_escape.rs");
}

#[test]
fn example_saddle_escape() {
    saddle_escape::run_example().unwrap();
}

mod convergence_monitors {
    #![allow(dead_code)]
    include!("../examples/convergence_monitors.rs");
}

#[test]
fn example_convergence_monitors() {
    convergence_monitors::run_example().unwrap();
}

mod trace_replay {
    #![allow(dead_code)]
    include!("../examples/trace_replay.rs");
}

#[test]
fn example_trace_replay() {
    trace_replay::run_example().unwrap();
}

mod energy_landscape {
    #![allow(dead_code)]
    include!("../examples/energy_landscape.rs");
}

#[test]
fn example_energy_landscape() {
    energy_landscape::run_example().unwrap();
}
