use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded generator for every stochastic decoding rule.
///
/// ChaCha8 keyed through `SeedableRng::seed_from_u64`; each draw consumes one
/// `u64` and maps its top 53 bits to a uniform `f64` in `[0, 1)`. Both steps
/// are specified bit-for-bit, so draws agree across platforms.
#[derive(Debug, Clone)]
pub struct DecodeRng(ChaCha8Rng);

impl DecodeRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }
}
