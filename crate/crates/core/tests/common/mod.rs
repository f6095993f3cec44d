#![allow(dead_code)]

use lamom::linalg::ComplexMatrix;
use lamom::maps::{identity_map, lambda1_map, random_positive_map, transpose_map};
use lamom::states::{horodecki_state, random_separable_state, BipartiteDims, DensityMatrix};
use lamom::PositiveMapSpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const DIMS: BipartiteDims = BipartiteDims { d_a: 3, d_b: 3 };

/// Built-in qutrit maps plus a few seeded decomposable positive maps.
pub fn registry() -> Vec<PositiveMapSpec> {
    let mut maps = vec![identity_map(3), transpose_map(3), lambda1_map()];
    maps.extend((1..=3).map(|seed| random_positive_map(3, 2, seed)));
    maps
}

/// Random full-rank mixed state `GG†/Tr[GG†]` with Gaussian `G`.
pub fn random_mixed_state(dims: BipartiteDims, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dims.d();
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * &g.dagger();
    let tr = m.trace().re;
    DensityMatrix::new(
        dims,
        m.scale(1.0 / tr).hermitian_part(),
        format!("mixed-{seed}"),
    )
    .unwrap()
}

/// Horodecki members, seeded separable states and seeded mixed states.
pub fn state_registry() -> Vec<DensityMatrix> {
    let mut states: Vec<DensityMatrix> = [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]
        .iter()
        .map(|&a| horodecki_state(a).unwrap())
        .collect();
    states.extend((0..4).map(|s| random_separable_state(DIMS, 1 + 2 * s as usize, s).unwrap()));
    states.extend((0..4).map(|s| random_mixed_state(DIMS, 100 + s)));
    states
}

pub fn grid(from: f64, to: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
        .collect()
}
