//! Shared fixtures for the criterion benchmarks.

use shuffle_sgd::constructions::{build, ConstructionBundle, ConstructionSpec};
use shuffle_sgd::TheoremId;

/// The rotated-polygon instance at μ = 1, κ = 10⁴, n = 100, K = 20.
pub fn polygon_bundle() -> ConstructionBundle {
    build(&ConstructionSpec::new(
        TheoremId::SmallLbSc,
        100,
        1e4,
        20,
        1.0,
        1.0,
    ))
    .expect("valid parameters")
}

/// The four-block concave instance at n = 8, κ = 8, K = 25.
pub fn large_concave_bundle() -> ConstructionBundle {
    build(&ConstructionSpec::new(
        TheoremId::LargeLbConcave,
        8,
        8.0,
        25,
        1.0,
        1.0,
    ))
    .expect("valid parameters")
}
