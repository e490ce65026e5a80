use alloc::vec;
use alloc::vec::Vec;

use super::RelocateOptions;
use crate::dict::{DictCollection, SetHandle};
use crate::error::{input_err, usage_err};
use crate::meter::{words_of, Charge};
use crate::{Lz77Parse, Meter, PhraseTable, Result};

/// A single relocation call accepts at most this many pairs per phrase of
/// the parse.
pub const MAX_PAIRS_PER_PHRASE: usize = 2;

/// Moves substrings of length at most `tau` to equal copies that start no
/// later and lie inside the `tau`-context.
///
/// Phrases are visited right to left. The items starting in phrase `i`
/// (except the last `tau - 1` positions, already in the context) are cut out
/// of the dictionary, shifted onto the source of the phrase and merged back,
/// so every phrase costs a constant number of dictionary operations.
pub struct Relocator<'p> {
    parse: &'p Lz77Parse,
    table: PhraseTable,
    tau: usize,
    options: RelocateOptions,
}

impl<'p> Relocator<'p> {
    pub fn new(parse: &'p Lz77Parse, tau: usize, options: RelocateOptions) -> Result<Self> {
        if tau == 0 {
            return Err(input_err!("tau must be at least 1"));
        }
        parse.check()?;
        Ok(Self { parse, table: PhraseTable::new(parse), tau, options })
    }

    /// Largest batch accepted by [`Relocator::relocate`].
    pub fn max_batch(&self) -> usize {
        MAX_PAIRS_PER_PHRASE * self.parse.z().max(1)
    }

    pub fn relocate(&self, pairs: &[(i64, i64)], meter: &Meter) -> Result<Vec<(i64, i64)>> {
        if pairs.len() > self.max_batch() {
            return Err(usage_err!(
                "{} pairs exceed the batch limit of {}",
                pairs.len(),
                self.max_batch()
            ));
        }
        let floor = -i64::from(self.parse.sigma());
        let n = self.parse.len() as i64;
        for &(a, b) in pairs {
            if a > b || a < floor || b > n || (a <= 0 && b >= 0) {
                return Err(input_err!("pair ({a}, {b}) is not a substring of the text"));
            }
            if (b - a) as usize >= self.tau {
                return Err(usage_err!("pair ({a}, {b}) is not shorter than tau = {}", self.tau));
            }
        }
        let _pairs_charge = Charge::new(meter, 2 * words_of::<(i64, i64)>(pairs.len()));
        let starts = if self.options.bucketed && self.parse.z() > 0 {
            self.run_bucketed(pairs, meter)?
        } else {
            self.run_plain(pairs, meter)?
        };
        Ok(pairs
            .iter()
            .zip(starts)
            .map(|(&(a, b), p)| (p, p + (b - a)))
            .collect())
    }

    fn run_plain(&self, pairs: &[(i64, i64)], meter: &Meter) -> Result<Vec<i64>> {
        let mut dict =
            DictCollection::new(-i64::from(self.parse.sigma()), self.parse.len() as i64, meter);
        let mut g = dict.empty();
        for (rank, &(a, _)) in pairs.iter().enumerate() {
            let single = dict.makeset(a, rank as u32)?;
            g = dict.merge(g, single)?;
        }
        let tau = self.tau as i64;
        let mut done = Vec::new();
        for (i, m) in self.parse.members().iter().enumerate().rev() {
            if m.len <= self.tau {
                continue;
            }
            let u = self.table.start(i);
            let (a, b) = dict.split(g, u + m.len as i64 - tau)?;
            let (a_keep, a_move) = dict.split(a, u - 1)?;
            let moved = dict.shift(a_move, m.source - u)?;
            g = dict.merge(a_keep, moved)?;
            done.push(b);
        }
        done.push(g);
        collect_positions(&dict, &done, pairs.len(), |_| 0)
    }

    fn run_bucketed(&self, pairs: &[(i64, i64)], meter: &Meter) -> Result<Vec<i64>> {
        let n = self.parse.len() as i64;
        let z = self.parse.z() as i64;
        let width = ((n + z - 1) / z).max(1);
        let buckets = ((n + width - 1) / width) as usize;
        let sigma = i64::from(self.parse.sigma());
        // Bucket sets hold local coordinates 1..=width; the prefix set holds
        // global non-positive positions.
        let mut dict = DictCollection::new(-sigma, width, meter);
        let _table_charge = Charge::new(meter, words_of::<SetHandle>(buckets + 1));
        let mut prefix = dict.empty();
        let mut sets: Vec<SetHandle> = (0..buckets).map(|_| dict.empty()).collect();
        let bucket_of = |p: i64| ((p - 1) / width) as usize;
        for (rank, &(a, _)) in pairs.iter().enumerate() {
            if a <= 0 {
                let single = dict.makeset(a, rank as u32)?;
                prefix = dict.merge(prefix, single)?;
            } else {
                let c = bucket_of(a);
                let single = dict.makeset(a - c as i64 * width, rank as u32)?;
                sets[c] = dict.merge(sets[c], single)?;
            }
        }
        let tau = self.tau as i64;
        for (i, m) in self.parse.members().iter().enumerate().rev() {
            if m.len <= self.tau {
                continue;
            }
            let u = self.table.start(i);
            let last = u + m.len as i64 - tau;
            let delta = m.source - u;
            for c in bucket_of(u)..=bucket_of(last) {
                let base = c as i64 * width;
                let lo = u.max(base + 1);
                let hi = last.min(base + width);
                let (head, tail) = dict.split(sets[c], hi - base)?;
                let (keep, mut moving) = dict.split(head, lo - base - 1)?;
                sets[c] = dict.merge(keep, tail)?;
                // Route the moved items to the buckets covering their new
                // positions, splitting at each destination boundary.
                let mut dest_lo = lo + delta;
                let dest_hi = hi + delta;
                while dest_lo <= dest_hi {
                    if dest_lo <= 0 {
                        let (part, rest) = dict.split(moving, -delta - base)?;
                        let part = dict.shift(part, base + delta)?;
                        prefix = dict.merge(prefix, part)?;
                        moving = rest;
                        dest_lo = 1;
                    } else {
                        let d = bucket_of(dest_lo);
                        let bound = (d as i64 + 1) * width;
                        let (part, rest) = dict.split(moving, bound - delta - base)?;
                        let part = dict.shift(part, base + delta - d as i64 * width)?;
                        sets[d] = dict.merge(sets[d], part)?;
                        moving = rest;
                        dest_lo = bound + 1;
                    }
                }
                let leftover = dict.enumerate(moving)?;
                if !leftover.is_empty() {
                    return Err(crate::Error::Invariant(alloc::format!(
                        "bucket routing left {} items behind",
                        leftover.len()
                    )));
                }
            }
        }
        let mut handles = vec![prefix];
        handles.extend_from_slice(&sets);
        collect_positions(&dict, &handles, pairs.len(), |h| {
            if h == 0 { 0 } else { (h as i64 - 1) * width }
        })
    }
}

/// Reads every item back, placing it by rank. `base(h)` converts the
/// coordinates of `handles[h]` to text positions.
fn collect_positions(
    dict: &DictCollection<'_>,
    handles: &[SetHandle],
    count: usize,
    base: impl Fn(usize) -> i64,
) -> Result<Vec<i64>> {
    let mut out = vec![i64::MIN; count];
    for (h, &set) in handles.iter().enumerate() {
        for (pos, rank) in dict.enumerate(set)? {
            out[rank as usize] = pos + base(h);
        }
    }
    if out.contains(&i64::MIN) {
        return Err(crate::Error::Invariant("relocation lost an item".into()));
    }
    Ok(out)
}

/// Relocates `pairs` (inclusive ranges shorter than `tau`) into the
/// `tau`-context, preserving input order.
pub fn relocate_to_context(
    parse: &Lz77Parse,
    tau: usize,
    pairs: &[(i64, i64)],
    options: RelocateOptions,
    meter: &Meter,
) -> Result<Vec<(i64, i64)>> {
    Relocator::new(parse, tau, options)?.relocate(pairs, meter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::ContextMap;
    use crate::parse::fixtures::{sample, text};
    use crate::{decompress_naive, greedy_parse, prefix_symbol, Symbol};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const PLAIN: RelocateOptions = RelocateOptions { bucketed: false };
    const BUCKETED: RelocateOptions = RelocateOptions { bucketed: true };

    #[test]
    fn sample_traces() {
        let m = Meter::new();
        for opts in [PLAIN, BUCKETED] {
            assert_eq!(relocate_to_context(&sample(), 1, &[(5, 5)], opts, &m).unwrap(), vec![(-2, -2)]);
            assert_eq!(relocate_to_context(&sample(), 2, &[(5, 6)], opts, &m).unwrap(), vec![(2, 3)]);
            // Position 8 lies in the last tau - 1 positions of phrase 4.
            assert_eq!(relocate_to_context(&sample(), 2, &[(8, 8)], opts, &m).unwrap(), vec![(8, 8)]);
        }
        assert_eq!(m.live_words(), 0);
    }

    #[test]
    fn rejects_bad_pairs() {
        let m = Meter::new();
        assert!(matches!(
            relocate_to_context(&sample(), 1, &[(5, 6)], PLAIN, &m),
            Err(crate::Error::Usage(_))
        ));
        assert!(relocate_to_context(&sample(), 2, &[(0, 1)], PLAIN, &m).is_err());
        assert!(relocate_to_context(&sample(), 2, &[(8, 9)], PLAIN, &m).is_err());
        let too_many = vec![(1, 1); 9];
        assert!(relocate_to_context(&sample(), 2, &too_many, PLAIN, &m).is_err());
    }

    fn fib(n: usize) -> Vec<Symbol> {
        let (mut a, mut b) = (vec![1u32], vec![1u32, 2]);
        while b.len() < n {
            let next = [b.clone(), a].concat();
            a = b;
            b = next;
        }
        b.truncate(n);
        b
    }

    fn check_predicate(t: &[Symbol], parse: &Lz77Parse, tau: usize, seed: u64) {
        let at = |p: i64| if p <= 0 { prefix_symbol(p) } else { t[p as usize - 1] };
        let cm = ContextMap::new(parse, tau, false).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let m = Meter::new();
        let n = t.len() as i64;
        let batch = MAX_PAIRS_PER_PHRASE * parse.z();
        let pairs: Vec<(i64, i64)> = (0..batch)
            .map(|_| {
                let a = rng.gen_range(1..=n);
                (a, (a + rng.gen_range(0..tau as i64)).min(n))
            })
            .collect();
        let plain = relocate_to_context(parse, tau, &pairs, PLAIN, &m).unwrap();
        let bucketed = relocate_to_context(parse, tau, &pairs, BUCKETED, &m).unwrap();
        assert_eq!(plain, bucketed);
        for (&(a, b), &(a2, b2)) in pairs.iter().zip(&plain) {
            assert!(a2 <= a);
            assert_eq!(b2 - a2, b - a);
            for off in 0..=(b - a) {
                assert_eq!(at(a + off), at(a2 + off));
                assert!(cm.contains(a2 + off), "{a2}+{off} not in {tau}-context");
            }
        }
    }

    #[test]
    fn predicate_on_fibonacci_and_random() {
        let t = fib(3000);
        let p = greedy_parse(&t, 2).unwrap();
        for tau in [1, 2, 4, 8, 16] {
            check_predicate(&t, &p, tau, tau as u64);
        }
        let mut rng = StdRng::seed_from_u64(11);
        for sigma in [2u32, 4, 26] {
            let t: Vec<Symbol> = (0..2000).map(|_| rng.gen_range(1..=sigma)).collect();
            let p = greedy_parse(&t, sigma).unwrap();
            for tau in [1, 3, 8] {
                check_predicate(&t, &p, tau, u64::from(sigma) * 100 + tau as u64);
            }
        }
        let t = text("abaababa");
        assert_eq!(decompress_naive(&sample()).unwrap(), t);
        check_predicate(&t, &sample(), 1, 5);
    }
}
