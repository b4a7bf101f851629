//! Fixed workloads shared by the benchmarks.

use mixbound::gen::{self, Shape};
use mixbound::Assembly;

/// `count` random assemblies of size `n`, identical across runs.
pub fn workload(seed: u64, n: usize, count: usize) -> Vec<Assembly> {
    let mut rng = gen::rng(seed);
    (0..count)
        .map(|_| gen::random_assembly(&mut rng, n, &Shape::default()))
        .collect()
}
