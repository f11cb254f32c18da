//! Structural invariants over random inputs.

use proptest::prelude::*;
use triofm::engine::{
    auto_stepsize, direction, init_random, step, DomainBounds, SolverState, TraceRecord,
};
use triofm::io::{
    format_f64, gen_random_sparse_shifted, parse_matrix_market, read_trace_csv, write_matrix_market_to,
    write_trace_csv,
};
use triofm::linalg::{gram, objective, spectral_norm_estimate, triu, IterateBlock, Spectrum, DEFAULT_RHO_REL_TOL};
use triofm::theory::{construct_fixed_point, e_vec, enumerate_specs, EnergyContext};

fn block(n: usize, p: usize) -> impl Strategy<Value = IterateBlock> {
    prop::collection::vec(-3.0f64..3.0, n * p)
        .prop_map(move |d| IterateBlock::from_col_major(n, p, d).unwrap())
}

/// Sorted diagonal with distinct entries at least 0.05 apart and at least
/// `neg` negatives.
fn spaced_diag(n: usize, neg: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(move |steps| {
        let mut v = Vec::with_capacity(n);
        let mut acc = -steps[..neg].iter().sum::<f64>() - 0.05;
        for s in steps {
            v.push(acc);
            acc += s;
        }
        v
    })
}

fn flip(x: &IterateBlock, mask: u32) -> IterateBlock {
    let cols: Vec<Vec<f64>> = x
        .columns()
        .enumerate()
        .map(|(j, c)| {
            let s = if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
            c.iter().map(|v| s * v).collect()
        })
        .collect();
    IterateBlock::from_columns(&cols).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triu_is_upper_and_idempotent(x in block(5, 4)) {
        let g = gram(&x);
        let t = triu(&g).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i > j {
                    prop_assert_eq!(t.get(i, j), 0.0);
                } else {
                    prop_assert_eq!(t.get(i, j), g.get(i, j));
                }
            }
        }
        prop_assert_eq!(triu(&t).unwrap(), t);
    }

    #[test]
    fn objective_nonnegative_and_sign_invariant(
        d in spaced_diag(6, 2),
        x in block(6, 3),
        mask in 0u32..8,
    ) {
        let a = triofm::io::gen_diag(&d).unwrap();
        let f = objective(&a, &x).unwrap();
        prop_assert!(f >= -1e-12);
        let g = objective(&a, &flip(&x, mask)).unwrap();
        prop_assert!((f - g).abs() <= 1e-12 * (1.0 + f));
    }

    #[test]
    fn direction_is_column_triangular(
        seed in 0u64..1000,
        x in block(8, 3),
        y in prop::collection::vec(-3.0f64..3.0, 8),
    ) {
        let a = gen_random_sparse_shifted(8, 0.5, 0.0, seed).unwrap();
        let g = direction(&a, &x).unwrap();
        let mut x2 = x.clone();
        x2.set_col(2, &y).unwrap();
        let g2 = direction(&a, &x2).unwrap();
        prop_assert_eq!(g.col(0), g2.col(0));
        prop_assert_eq!(g.col(1), g2.col(1));
    }

    #[test]
    fn auto_step_keeps_domain(d in spaced_diag(7, 3), seed in 0u64..1000, steps in 1usize..40) {
        let a = triofm::io::gen_diag(&d).unwrap();
        let bounds = DomainBounds::for_matrix(&a, 3).unwrap();
        let alpha = auto_stepsize(&bounds);
        let mut state = SolverState::new(init_random(7, &bounds, seed).unwrap());
        for _ in 0..steps {
            step(&mut state, &a, alpha).unwrap();
            prop_assert!(bounds.first_violation(&state.x).is_none());
        }
    }

    #[test]
    fn column_descent_never_raises_energy(d in spaced_diag(6, 3), x in prop::collection::vec(-1.0f64..1.0, 6)) {
        let a = triofm::io::gen_diag(&d).unwrap();
        let s = Spectrum::for_diagonal(&d);
        let bounds = DomainBounds::for_matrix(&a, 2).unwrap();
        let ctx = EnergyContext::new(&a, &s, 1).unwrap();
        let r = bounds.radii[1];
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let x: Vec<f64> = x.iter().map(|v| v * r / norm.max(1.0)).collect();
        let y = ctx.descent_step(&x, auto_stepsize(&bounds));
        prop_assert!(ctx.decrement(&x, &y) >= -1e-12 * (1.0 + ctx.energy(&x)));
    }

    #[test]
    fn evec_sign_invariant(d in spaced_diag(6, 3), x in block(6, 3), mask in 0u32..8) {
        let s = Spectrum::for_diagonal(&d);
        let a = e_vec(&x, &s).unwrap();
        let b = e_vec(&flip(&x, mask), &s).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * (1.0 + a));
    }

    #[test]
    fn every_spec_is_a_fixed_point(d in spaced_diag(5, 3)) {
        let a = triofm::io::gen_diag(&d).unwrap();
        let s = Spectrum::for_diagonal(&d);
        for spec in enumerate_specs(2, s.q()) {
            let x = construct_fixed_point(&spec, &s).unwrap();
            let r = direction(&a, &x).unwrap().frobenius_norm();
            prop_assert!(r <= 1e-12 * (1.0 + x.frobenius_norm()));
        }
    }

    #[test]
    fn norm_estimate_brackets_diagonal(d in prop::collection::vec(-5.0f64..5.0, 2..30)) {
        let a = triofm::io::gen_diag(&d).unwrap();
        let norm = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assume!(norm > 1e-3);
        let est = spectral_norm_estimate(&a, DEFAULT_RHO_REL_TOL).unwrap();
        prop_assert!(est >= norm * (1.0 - 1e-12));
        prop_assert!(est <= 1.05 * norm * (1.0 + 1e-9));
    }

    #[test]
    fn matrix_market_round_trip(n in 4usize..40, seed in 0u64..10_000, shift in -3.0f64..3.0) {
        let a = gen_random_sparse_shifted(n, 0.6, shift, seed).unwrap();
        let mut buf = Vec::new();
        write_matrix_market_to(&a, &mut buf).unwrap();
        let b = parse_matrix_market(buf.as_slice(), "buffer").unwrap();
        prop_assert_eq!(a.row_ptr(), b.row_ptr());
        prop_assert_eq!(a.col_idx(), b.col_idx());
        let same = a.values().iter().zip(b.values()).all(|(u, v)| u.to_bits() == v.to_bits());
        prop_assert!(same);
    }

    #[test]
    fn decimal_formatting_round_trips(v in any::<f64>()) {
        let back: f64 = format_f64(v).parse().unwrap();
        if v.is_nan() {
            prop_assert!(back.is_nan());
        } else {
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}

fn trace_record(p: usize) -> impl Strategy<Value = TraceRecord> {
    let vals = move || prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), p);
    (
        0usize..1_000_000,
        prop::option::of(any::<f64>().prop_filter("finite", |v| v.is_finite())),
        prop::option::of(0.0f64..10.0),
        0.0f64..1e6,
        vals(),
        prop::option::of(vals()),
        prop::option::of(vals()),
        prop::option::of(vals()),
    )
        .prop_map(|(t, e_obj, e_vec, dir_norm, col_norms, tangents, energy, residual_e)| TraceRecord {
            t,
            e_obj,
            e_vec,
            dir_norm,
            col_norms,
            tangents,
            energy,
            residual_e,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trace_csv_round_trip(records in prop::collection::vec(trace_record(3), 1..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace_csv(&records, 3, &path).unwrap();
        let back = read_trace_csv(&path).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in records.iter().zip(&back) {
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(a.t, b.t);
            prop_assert_eq!(a.e_obj.map(f64::to_bits), b.e_obj.map(f64::to_bits));
            prop_assert_eq!(a.e_vec.map(f64::to_bits), b.e_vec.map(f64::to_bits));
            prop_assert_eq!(a.dir_norm.to_bits(), b.dir_norm.to_bits());
            prop_assert_eq!(bits(&a.col_norms), bits(&b.col_norms));
            for (u, v) in [(&a.tangents, &b.tangents), (&a.energy, &b.energy), (&a.residual_e, &b.residual_e)] {
                prop_assert_eq!(u.as_deref().map(bits), v.as_deref().map(bits));
            }
        }
    }
}
