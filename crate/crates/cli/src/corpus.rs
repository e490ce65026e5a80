//! Test and benchmark texts over symbol codes `1..=sigma`.

use lzctx::Symbol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Prefix of length `n` of the Fibonacci word `abaababaabaab...`.
pub fn fibonacci(n: usize) -> Vec<Symbol> {
    let (mut a, mut b) = (vec![1], vec![1, 2]);
    while b.len() < n {
        let next = [b.as_slice(), a.as_slice()].concat();
        a = std::mem::replace(&mut b, next);
    }
    b.truncate(n);
    b
}

/// Prefix of length `n` of the Thue-Morse word `abbabaab...`.
pub fn thue_morse(n: usize) -> Vec<Symbol> {
    (0..n).map(|i| 1 + (i.count_ones() & 1)).collect()
}

/// `a^n`.
pub fn unary(n: usize) -> Vec<Symbol> {
    vec![1; n]
}

/// Uniform symbols from `1..=sigma`.
pub fn random(n: usize, sigma: u32, seed: u64) -> Vec<Symbol> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(1..=sigma)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixes() {
        assert_eq!(fibonacci(8), vec![1, 2, 1, 1, 2, 1, 2, 1]);
        assert_eq!(fibonacci(0), vec![]);
        assert_eq!(thue_morse(8), vec![1, 2, 2, 1, 2, 1, 1, 2]);
        assert_eq!(unary(3), vec![1, 1, 1]);
        let r = random(1000, 4, 9);
        assert_eq!(r, random(1000, 4, 9));
        assert!(r.iter().all(|&c| (1..=4).contains(&c)));
    }
}
