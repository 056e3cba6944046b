//! Seeded random streams.
//!
//! Every consumer of randomness gets its own stream keyed by a tuple of
//! integers, so results do not depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed with a path of integers into a single 64-bit key.
pub fn stream_key(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, path))
}

/// Calls `f` with the ascending indices in `0..len` selected by independent
/// Bernoulli(`p`) trials. Gaps are drawn geometrically, so the cost scales
/// with the number of selected indices rather than `len`.
pub fn for_each_bernoulli<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R, mut f: impl FnMut(usize)) {
    if len == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (0..len).for_each(f);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut i = 0usize;
    loop {
        // u in (0, 1]
        let u: f64 = 1.0 - rng.gen::<f64>();
        let gap = (u.ln() / log_q).floor();
        if !gap.is_finite() || gap >= (len - i) as f64 {
            return;
        }
        i += gap as usize;
        f(i);
        i += 1;
        if i >= len {
            return;
        }
    }
}
