//! Shared workloads for the criterion benches.

use rnml_core::{generate, BasisSpec, Dataset, Family, SynthSpec, Target};

/// A Chebyshev-featured sample of `target` with 10% noise and seed 1.
pub fn workload(target: Target, m: usize, d_x: usize) -> Dataset {
    let spec = SynthSpec {
        target,
        m,
        noise_r: 0.1,
        basis: BasisSpec::new(Family::Chebyshev, d_x).expect("valid basis"),
        seed: 1,
    };
    generate(&spec).expect("valid workload")
}
