//! Seeded inputs shared by the benchmarks.

use cube_amalgam::random::{random_cube, RandomOptions};
use cube_amalgam::{CubeDiagram, IdAllocator, Shape, Strategy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A random disjoint partial `k`-cube in BKL_n together with an allocator
/// positioned above its ids.
pub fn partial_cube(n: usize, k: usize, seed: u64) -> (CubeDiagram, IdAllocator) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = IdAllocator::new();
    let c = random_cube(&mut rng, &Strategy::bkl(n), k, Shape::Boundary, RandomOptions::default(), &mut ids)
        .expect("random cubes are valid");
    (c, ids)
}

/// A random disjoint full `k`-cube of the given strategy.
pub fn full_cube(strategy: &Strategy, k: usize, seed: u64) -> (CubeDiagram, IdAllocator) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = IdAllocator::new();
    let c = random_cube(&mut rng, strategy, k, Shape::Full, RandomOptions::default(), &mut ids)
        .expect("random cubes are valid");
    (c, ids)
}
