//! Seed derivation. Every random decision in the crate flows through a
//! `ChaCha8Rng` seeded here, so a run is a pure function of its configured
//! seeds regardless of platform or scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; good avalanche behaviour for combining seed material.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combine a base seed with an arbitrary list of stream tags.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut acc = mix(base);
    for &t in tags {
        acc = mix(acc ^ t);
    }
    acc
}

/// Seed for work tied to one target edge (explanations, baselines, ...).
/// Derived per edge so per-target work is order-independent.
pub fn edge_seed(base: u64, edge: (usize, usize), stream: u64) -> u64 {
    derive_seed(base, &[edge.0 as u64, edge.1 as u64, stream])
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u32> = (0..8).map({
            let mut r = rng_from(7);
            move |_| r.gen()
        })
        .collect();
        let b: Vec<u32> = (0..8).map({
            let mut r = rng_from(7);
            move |_| r.gen()
        })
        .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_seeds_distinct_per_edge_and_stream() {
        let s1 = edge_seed(42, (0, 1), 0);
        let s2 = edge_seed(42, (0, 2), 0);
        let s3 = edge_seed(42, (0, 1), 1);
        assert_ne!(s1, s2);
        assert_ne!(s1, s3);
        // order of endpoints matters only through the tag list, so callers
        // pass canonical (min, max) pairs; sanity-check determinism instead.
        assert_eq!(s1, edge_seed(42, (0, 1), 0));
    }
}
