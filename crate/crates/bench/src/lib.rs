//! Fixtures shared by the benchmarks.

use seco_core::{sample_nested_logistic, Dataset, NestedModelSpec};

/// `n` rows of a nested logistic model with `d` bivariate groups.
pub fn bivariate_groups(d: usize, n: usize, seed: u64) -> Dataset {
    let children = (0..d).map(|g| 0.2 + 0.6 * (g % 7) as f64 / 6.0).collect();
    let spec = NestedModelSpec::logistic(0.85, children, vec![2; d]).expect("valid spec");
    sample_nested_logistic(n, &spec, seed).expect("valid sample")
}
