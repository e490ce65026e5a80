//! Greedy leftmost-longest LZ77 parsing without self-reference.
//!
//! The parser works on the text extended with its alphabet prefix, so that
//! first occurrences of symbols (and runs of the reversed alphabet) can cite
//! negative sources. A suffix array with LCP values over the extended string
//! answers "longest earlier non-overlapping copy" in `O(log^2 n)` per phrase.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::input_err;
use crate::{prefix_symbol, Lz77Parse, Member, Result, Symbol};

/// Parses `text` greedily: every phrase is as long as possible, and among the
/// sources of maximal length the smallest position wins.
pub fn greedy_parse(text: &[Symbol], sigma: u32) -> Result<Lz77Parse> {
    if sigma == 0 {
        return Err(input_err!("alphabet size must be at least 1"));
    }
    if let Some((i, &c)) = text.iter().enumerate().find(|(_, &c)| c == 0 || c > sigma) {
        return Err(input_err!("symbol {c} at position {} outside 1..={sigma}", i + 1));
    }
    let offset = sigma as i64;
    let ext: Vec<Symbol> = (-offset..=0)
        .map(prefix_symbol)
        .chain(text.iter().copied())
        .collect();
    let sa = suffix_array(&ext, sigma as usize + 1);
    let mut rank = vec![0u32; ext.len()];
    for (r, &e) in sa.iter().enumerate() {
        rank[e as usize] = r as u32;
    }
    let lcp = lcp_array(&ext, &sa, &rank);
    let lcp_tree = MinTree::new(&lcp);
    let sa_tree = MinTree::new(&sa);

    // Smallest extended index sharing at least `l` symbols with suffix `r`.
    let best_source = |r: usize, l: usize| -> usize {
        let l = l as u32;
        let lo = lcp_tree.last_below(r, l).unwrap_or(0);
        let hi = lcp_tree.first_below(r + 1, l).map_or(ext.len() - 1, |j| j - 1);
        sa_tree.range_min(lo, hi) as usize
    };

    let n = text.len();
    let mut members = Vec::new();
    let mut u = 1usize;
    while u <= n {
        let e = u + sigma as usize;
        let r = rank[e] as usize;
        let feasible = |l: usize| best_source(r, l) + l <= e;
        let (mut lo, mut hi) = (1usize, n - u + 1);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let source = best_source(r, lo) as i64 - offset;
        members.push(Member::new(source, lo));
        u += lo;
    }
    Ok(Lz77Parse::from_parts(sigma, n, members))
}

/// Suffix array by prefix doubling with radix sorting. Symbols must be below
/// `alphabet`.
pub(crate) fn suffix_array(s: &[Symbol], alphabet: usize) -> Vec<u32> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let mut rank: Vec<u32> = s.to_vec();
    let mut sa: Vec<u32> = (0..n as u32).collect();
    let mut tmp = vec![0u32; n];
    let mut buckets = alphabet.max(n) + 1;
    let mut count = vec![0usize; buckets + 1];
    let mut k = 1usize;
    loop {
        let second = |i: usize| if i + k < n { rank[i + k] as usize + 1 } else { 0 };
        // Sort by the second key, then stably by the first.
        for c in count.iter_mut().take(buckets + 1) {
            *c = 0;
        }
        for i in 0..n {
            count[second(i)] += 1;
        }
        let mut sum = 0;
        for c in count.iter_mut().take(buckets + 1) {
            let t = *c;
            *c = sum;
            sum += t;
        }
        for i in 0..n {
            let key = second(i);
            tmp[count[key]] = i as u32;
            count[key] += 1;
        }
        for c in count.iter_mut().take(buckets + 1) {
            *c = 0;
        }
        for i in 0..n {
            count[rank[i] as usize] += 1;
        }
        let mut sum = 0;
        for c in count.iter_mut().take(buckets + 1) {
            let t = *c;
            *c = sum;
            sum += t;
        }
        for &i in &tmp {
            let key = rank[i as usize] as usize;
            sa[count[key]] = i;
            count[key] += 1;
        }
        let mut next = vec![0u32; n];
        let mut classes = 1u32;
        for w in 1..n {
            let (a, b) = (sa[w - 1] as usize, sa[w] as usize);
            if rank[a] != rank[b] || second(a) != second(b) {
                classes += 1;
            }
            next[b] = classes - 1;
        }
        rank = next;
        if classes as usize == n || k >= n {
            break;
        }
        buckets = classes as usize;
        k *= 2;
    }
    sa
}

/// Kasai et al.: `lcp[r]` is the longest common prefix of suffixes `sa[r-1]`
/// and `sa[r]`; `lcp[0] = 0`.
pub(crate) fn lcp_array(s: &[Symbol], sa: &[u32], rank: &[u32]) -> Vec<u32> {
    let n = s.len();
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = rank[i] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let j = sa[r - 1] as usize;
        while i + h < n && j + h < n && s[i + h] == s[j + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}

/// Minimum segment tree with "nearest smaller value" searches.
struct MinTree {
    size: usize,
    tree: Vec<u32>,
}

impl MinTree {
    fn new(values: &[u32]) -> Self {
        let size = values.len().next_power_of_two().max(1);
        let mut tree = vec![u32::MAX; 2 * size];
        tree[size..size + values.len()].copy_from_slice(values);
        for i in (1..size).rev() {
            tree[i] = tree[2 * i].min(tree[2 * i + 1]);
        }
        Self { size, tree }
    }

    fn range_min(&self, lo: usize, hi: usize) -> u32 {
        let (mut l, mut r) = (lo + self.size, hi + self.size + 1);
        let mut best = u32::MAX;
        while l < r {
            if l & 1 == 1 {
                best = best.min(self.tree[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                best = best.min(self.tree[r]);
            }
            l >>= 1;
            r >>= 1;
        }
        best
    }

    /// Largest `i <= r` with `value[i] < x`.
    fn last_below(&self, r: usize, x: u32) -> Option<usize> {
        self.last_below_in(1, 0, self.size - 1, r, x)
    }

    fn last_below_in(&self, node: usize, nl: usize, nr: usize, r: usize, x: u32) -> Option<usize> {
        if nl > r || self.tree[node] >= x {
            return None;
        }
        if nl == nr {
            return Some(nl);
        }
        let mid = (nl + nr) / 2;
        self.last_below_in(2 * node + 1, mid + 1, nr, r, x)
            .or_else(|| self.last_below_in(2 * node, nl, mid, r, x))
    }

    /// Smallest `i >= l` with `value[i] < x`.
    fn first_below(&self, l: usize, x: u32) -> Option<usize> {
        if l >= self.size {
            return None;
        }
        self.first_below_in(1, 0, self.size - 1, l, x)
    }

    fn first_below_in(&self, node: usize, nl: usize, nr: usize, l: usize, x: u32) -> Option<usize> {
        if nr < l || self.tree[node] >= x {
            return None;
        }
        if nl == nr {
            return Some(nl);
        }
        let mid = (nl + nr) / 2;
        self.first_below_in(2 * node, nl, mid, l, x)
            .or_else(|| self.first_below_in(2 * node + 1, mid + 1, nr, l, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompress_naive;
    use crate::parse::fixtures::text;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Tries every `(s, l)`; longest wins, then smallest `s`.
    fn brute_greedy(t: &[Symbol], sigma: u32) -> Vec<Member> {
        let at = |p: i64| if p <= 0 { prefix_symbol(p) } else { t[p as usize - 1] };
        let mut out = Vec::new();
        let mut u = 1i64;
        let n = t.len() as i64;
        while u <= n {
            let mut best = (0usize, 0i64);
            for s in -(sigma as i64)..u {
                let mut l = 0;
                while u + l <= n && s + l < u && at(s + l) == at(u + l) {
                    l += 1;
                }
                if l as usize > best.0 {
                    best = (l as usize, s);
                }
            }
            out.push(Member::new(best.1, best.0));
            u += best.0 as i64;
        }
        out
    }

    fn members(v: &[(i64, usize)]) -> Vec<Member> {
        v.iter().map(|&(s, l)| Member::new(s, l)).collect()
    }

    #[test]
    fn worked_examples_match_brute_force() {
        // The last phrase "ba" also occurs in the alphabet prefix at -2,
        // which is the smallest source.
        let t = text("abaababa");
        let expect = members(&[(-1, 1), (-2, 2), (1, 3), (-2, 2)]);
        assert_eq!(brute_greedy(&t, 2), expect);
        assert_eq!(greedy_parse(&t, 2).unwrap().members(), &expect[..]);

        let t = text("aaaa");
        let expect = members(&[(-1, 1), (-1, 1), (1, 2)]);
        assert_eq!(brute_greedy(&t, 1), expect);
        assert_eq!(greedy_parse(&t, 1).unwrap().members(), &expect[..]);

        let t = text("abc");
        let expect = members(&[(-1, 1), (-2, 1), (-3, 1)]);
        assert_eq!(brute_greedy(&t, 3), expect);
        assert_eq!(greedy_parse(&t, 3).unwrap().members(), &expect[..]);
    }

    #[test]
    fn rejects_out_of_range_symbols() {
        assert!(greedy_parse(&[1, 3], 2).is_err());
        assert!(greedy_parse(&[0], 2).is_err());
        assert!(greedy_parse(&[1], 0).is_err());
    }

    #[test]
    fn empty_text() {
        let p = greedy_parse(&[], 4).unwrap();
        assert_eq!(p.z(), 0);
        assert!(p.validate().is_empty());
    }

    #[test]
    fn suffix_array_sorts_suffixes() {
        let s: Vec<Symbol> = text("mississippi");
        let sa = suffix_array(&s, 27);
        for w in sa.windows(2) {
            assert!(s[w[0] as usize..] < s[w[1] as usize..]);
        }
    }

    #[test]
    fn matches_brute_force_on_small_texts() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..300 {
            let sigma = rng.gen_range(1..=4u32);
            let n = rng.gen_range(0..60);
            let t: Vec<Symbol> = (0..n).map(|_| rng.gen_range(1..=sigma)).collect();
            let p = greedy_parse(&t, sigma).unwrap();
            assert_eq!(p.members(), &brute_greedy(&t, sigma)[..], "text {t:?}");
            assert_eq!(decompress_naive(&p).unwrap(), t);
        }
    }
}
