//! Counter-based hashing shared by weight generation, trial seeding and
//! hashed color refinement. Every function here is a pure function of its
//! arguments, so results are reproducible across threads and platforms.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Order-sensitive hash of a word sequence.
pub fn hash_words(words: &[u64]) -> u64 {
    let mut h = mix64(GOLDEN ^ words.len() as u64);
    for &w in words {
        h = mix64(h.rotate_left(23) ^ mix64(w.wrapping_add(GOLDEN)));
    }
    h
}

/// The `c`-th output of the stream keyed by `key`.
pub fn counter(key: u64, c: u64) -> u64 {
    mix64(key.wrapping_add(c.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Maps a 64-bit word to a uniform double in (0, 1]. Zero is never
/// produced, so `ln` stays finite in Box-Muller; the top word rounds to 1.0.
pub fn unit_interval(r: u64) -> f64 {
    ((r >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Seed of trial `trial` of sample `sample` under a global seed.
pub fn trial_seed(seed: u64, sample: u64, trial: u64) -> u64 {
    hash_words(&[seed, sample, trial])
}
