use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator used by every sampling routine.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
