use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed plus replica stream. Equal pairs give bit-identical random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Independent child stream, used by drivers that need several
    /// generators per replica.
    pub fn derive(self, tag: u64) -> Self {
        // splitmix64 of (stream, tag) keeps children of distinct streams apart
        let mut x = self.stream ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
        Self { seed: self.seed, stream: x }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }
}
