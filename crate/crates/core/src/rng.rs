//! Seeded random streams. Every consumer derives its own generator from a
//! master seed plus a label path, so adding a draw in one stage never shifts
//! the numbers another stage sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a label path into a 64-bit stream seed.
pub fn derive_seed(seed: u64, labels: &[&str]) -> u64 {
    let mut h = splitmix64(seed);
    for label in labels {
        // FNV-1a over the label, folded into the running state
        let mut f: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            f ^= b as u64;
            f = f.wrapping_mul(0x0100_0000_01b3);
        }
        h = splitmix64(h ^ f);
    }
    h
}

pub fn stream(seed: u64, labels: &[&str]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, labels))
}

/// Seed for the `index`-th item of a batch.
pub fn indexed_seed(seed: u64, labels: &[&str], index: u64) -> u64 {
    splitmix64(derive_seed(seed, labels) ^ splitmix64(index))
}

/// Stream for the `index`-th item of a batch.
pub fn indexed_stream(seed: u64, labels: &[&str], index: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(indexed_seed(seed, labels, index))
}
