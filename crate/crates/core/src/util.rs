//! Small deterministic helpers shared across modules.

/// splitmix64 finalizer. Stable across platforms and releases, unlike the
/// standard library's default hasher.
pub(crate) fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derives an independent stream seed from a base seed and a stream index.
pub(crate) fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index))
}

/// Deterministic hash of a byte string, keyed by `seed`.
pub(crate) fn stable_hash(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = mix64(seed);
    for chunk in bytes.chunks(8) {
        let mut buf = [0u8; 8];
        buf[..chunk.len()].copy_from_slice(chunk);
        h = mix64(h ^ u64::from_le_bytes(buf));
    }
    h
}
