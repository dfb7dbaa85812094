//! The project-wide random number generator.
//!
//! All sampling uses ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), seeded
//! through `SeedableRng::seed_from_u64`. Its output stream is fixed by the
//! algorithm and does not depend on platform or word size, so a seed
//! reproduces the same datasets, initial samples and batches everywhere.

use rand::SeedableRng;

pub type SkdRng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SkdRng {
    SkdRng::seed_from_u64(seed)
}
