//! Random initial columns point in uniformly distributed directions.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use triofm::engine::{init_random, DomainBounds};

/// Octant index of each column over `seeds` draws.
fn octant_counts(column: usize, seeds: u64) -> [u64; 8] {
    let bounds = DomainBounds::new(2.0, 2);
    let mut counts = [0u64; 8];
    for seed in 0..seeds {
        let x = init_random(3, &bounds, seed).unwrap();
        let c = x.col(column);
        let idx = (0..3).fold(0, |acc, k| acc | usize::from(c[k] > 0.0) << k);
        counts[idx] += 1;
    }
    counts
}

fn p_value(counts: &[u64; 8]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expect = total as f64 / 8.0;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    1.0 - ChiSquared::new(7.0).unwrap().cdf(stat)
}

#[test]
fn column_directions_fill_octants_evenly() {
    for column in 0..2 {
        let counts = octant_counts(column, 10_000);
        let p = p_value(&counts);
        assert!(p > 1e-3, "column {column}: counts {counts:?}, p = {p:e}");
    }
}

#[test]
fn chi_square_detects_a_biased_sampler() {
    let mut counts = [1250u64; 8];
    counts[0] += 400;
    counts[7] -= 400;
    assert!(p_value(&counts) < 1e-3);
}
