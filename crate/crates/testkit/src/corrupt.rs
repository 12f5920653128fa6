use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn truncate_bytes(mut bytes: Vec<u8>, keep: usize) -> Vec<u8> {
    bytes.truncate(keep);
    bytes
}

/// XOR a range with nonzero pseudo-random bytes so the mutation never
/// accidentally leaves the input unchanged.
pub fn corrupt_range(mut bytes: Vec<u8>, offset: usize, len: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let end = (offset + len).min(bytes.len());
    for b in &mut bytes[offset.min(end)..end] {
        *b ^= rng.gen_range(1..=255u8);
    }
    bytes
}

pub fn garbage_bytes(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen()).collect()
}
