//! Shared inputs for the benchmarks.

use tap_core::ratio::frac;
use tap_core::{generate, GenSpec, TapInstance, TreeShape};

/// A fixed batch of random-tree instances on `n` nodes, link density 1/4.
pub fn batch(n: usize, count: u64) -> Vec<TapInstance> {
    (0..count)
        .map(|seed| generate(&GenSpec::new(n, frac(1, 4), seed, TreeShape::RandomTree)).expect("valid spec"))
        .collect()
}
