//! Seeded, platform-independent randomness.
//!
//! Everything random in the crate goes through ChaCha8 and the helpers here, so a
//! seed reproduces the same bytes on 32- and 64-bit targets alike.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type BenchRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> BenchRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for the `stream`-th work item under `seed`.
pub fn stream(seed: u64, stream: u64) -> BenchRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform index in `0..n`. Panics on `n == 0`.
pub fn pick<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    assert!(n > 0, "pick from an empty range");
    rng.gen_range(0..n as u64) as usize
}

/// Uniformly chosen element.
pub fn choose<'a, T, R: Rng + ?Sized>(rng: &mut R, items: &'a [T]) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[pick(rng, items.len())])
    }
}

pub fn shuffle<T, R: Rng + ?Sized>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = pick(rng, i + 1);
        items.swap(i, j);
    }
}

/// Up to `k` distinct elements, in random order.
pub fn sample<T: Clone, R: Rng + ?Sized>(rng: &mut R, items: &[T], k: usize) -> Vec<T> {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    let k = k.min(items.len());
    for i in 0..k {
        let j = i + pick(rng, idx.len() - i);
        idx.swap(i, j);
    }
    idx[..k].iter().map(|&i| items[i].clone()).collect()
}
