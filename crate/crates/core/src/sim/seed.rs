/// Seed for one independent stream, derived from the master seed, the run
/// index and a label. Streams for different labels or runs do not overlap
/// in practice, and the mapping never depends on evaluation order.
pub fn stream_seed(master: u64, run_index: u64, label: &str) -> u64 {
    // FNV-1a over the label, then SplitMix64 finalisation over the mix.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = master
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(run_index.rotate_left(32))
        ^ h;
    for _ in 0..2 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}
