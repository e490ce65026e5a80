use alloc::vec::Vec;

use super::{ContextMap, PiCursor, RelocateOptions, Relocator};
use crate::error::input_err;
use crate::meter::{words_of, Charge};
use crate::{Lz77Parse, Member, Meter, Result};

/// An LZ77 parse of the positive part of a context string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextParse {
    pub parse: Lz77Parse,
    pub tau: usize,
    pub dollars: bool,
}

impl ContextParse {
    pub fn words(&self) -> usize {
        words_of::<Member>(self.parse.z())
    }
}

/// Re-parses the `tau`-context string of `parse`.
///
/// Every phrase contributes its first `tau` symbols and its last `tau - 1`
/// symbols (or the rest of it, when shorter) as up to two new phrases. Their
/// sources are the matching slices of the original source, relocated into
/// the context and mapped into the context string. With `dollars`, a `$`
/// phrase goes between the two halves of every phrase that has a gap.
pub fn build_context_parse(
    parse: &Lz77Parse,
    tau: usize,
    dollars: bool,
    options: RelocateOptions,
    meter: &Meter,
) -> Result<ContextParse> {
    if tau == 0 {
        return Err(input_err!("tau must be at least 1"));
    }
    let map = ContextMap::new(parse, tau, dollars)?;
    let tau = map.tau();
    let table = map.table();

    // (related source pair, length, whether a `$` follows this piece)
    let mut pieces: Vec<((i64, i64), usize, bool)> = Vec::with_capacity(2 * parse.z());
    for (i, m) in parse.members().iter().enumerate() {
        let u = table.start(i);
        let l = m.len as i64;
        let t = tau as i64;
        let mut relevant = |a: i64, b: i64, dollar_after: bool| {
            if a <= b {
                let shift = m.source - u;
                pieces.push(((a + shift, b + shift), (b - a + 1) as usize, dollar_after));
            } else if dollar_after {
                // Only happens for an empty first half, which never has a gap.
                unreachable!("empty prefix piece with a gap");
            }
        };
        if m.len <= tau {
            relevant(u, u + l - 1, false);
        } else if m.len < 2 * tau {
            relevant(u, u + t - 1, false);
            relevant(u + t, u + l - 1, false);
        } else {
            relevant(u, u + t - 1, dollars);
            relevant(u + l - t + 1, u + l - 1, false);
        }
    }
    let _pieces_charge = Charge::new(meter, words_of::<((i64, i64), usize, bool)>(pieces.len()));

    let relocator = Relocator::new(parse, tau, options)?;
    let pairs: Vec<(i64, i64)> = pieces.iter().map(|p| p.0).collect();
    let relocated = relocator.relocate(&pairs, meter)?;
    drop(pairs);

    // Map the relocated starts in sorted order.
    let mut order: Vec<u32> = (0..relocated.len() as u32).collect();
    let _order_charge = Charge::new(meter, words_of::<u32>(order.len()) + words_of::<i64>(order.len()));
    order.sort_by_key(|&i| relocated[i as usize].0);
    let mut mapped = alloc::vec![0i64; relocated.len()];
    let mut cursor = PiCursor::new(&map);
    for &i in &order {
        mapped[i as usize] = cursor.map(relocated[i as usize].0)?;
    }

    let mut members = Vec::with_capacity(pieces.len() + if dollars { parse.z() } else { 0 });
    for (&(_, len, dollar_after), &source) in pieces.iter().zip(&mapped) {
        members.push(Member::new(source, len));
        if dollar_after {
            members.push(Member::dollar());
        }
    }
    let n = members.iter().map(|m| m.len).sum();
    let out = Lz77Parse::from_parts(parse.sigma(), n, members);
    debug_assert!(out.validate().is_empty(), "{:?}", out.validate());
    if let Some(v) = out.validate().first() {
        return Err(crate::Error::Invariant(alloc::format!("context parse: {v}")));
    }
    Ok(ContextParse { parse: out, tau, dollars })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::fixtures::{sample, text};
    use crate::{decompress_naive, greedy_parse, Symbol, DOLLAR};
    use alloc::vec;
    use alloc::vec::Vec;

    /// In-context symbols by scanning the definition; each maximal
    /// out-of-context run becomes one `$` when `dollars` is set.
    pub(crate) fn definition_scan(t: &[Symbol], parse: &Lz77Parse, tau: usize, dollars: bool) -> Vec<Symbol> {
        let mut bounds: Vec<i64> = parse.starts().collect();
        bounds.push(t.len() as i64 + 1);
        let tau = tau as i64;
        let mut out = Vec::new();
        let mut in_gap = false;
        for j in 1..=t.len() as i64 {
            if bounds.iter().any(|&u| u - tau < j && j < u + tau) {
                out.push(t[j as usize - 1]);
                in_gap = false;
            } else if dollars && !in_gap {
                out.push(DOLLAR);
                in_gap = true;
            } else {
                in_gap = true;
            }
        }
        out
    }

    #[test]
    fn sample_tau1() {
        let m = Meter::new();
        let cp = build_context_parse(&sample(), 1, false, RelocateOptions::default(), &m).unwrap();
        let expect: Vec<Member> = [(-1, 1), (-2, 1), (1, 1), (-2, 1)]
            .iter()
            .map(|&(s, l)| Member::new(s, l))
            .collect();
        assert_eq!(cp.parse.members(), &expect[..]);
        assert_eq!(decompress_naive(&cp.parse).unwrap(), text("abab"));
        assert_eq!(definition_scan(&text("abaababa"), &sample(), 1, false), text("abab"));
    }

    #[test]
    fn sample_tau1_with_separators() {
        let m = Meter::new();
        let cp = build_context_parse(&sample(), 1, true, RelocateOptions::default(), &m).unwrap();
        let expect = definition_scan(&text("abaababa"), &sample(), 1, true);
        assert_eq!(expect, vec![1, 2, DOLLAR, 1, DOLLAR, 2, DOLLAR]);
        assert_eq!(decompress_naive(&cp.parse).unwrap(), expect);
    }

    #[test]
    fn sample_tau2_and_large_tau_keep_everything() {
        let m = Meter::new();
        for tau in [2, 3, 50] {
            let cp = build_context_parse(&sample(), tau, false, RelocateOptions::default(), &m).unwrap();
            assert_eq!(decompress_naive(&cp.parse).unwrap(), text("abaababa"));
        }
    }

    #[test]
    fn matches_definition_on_greedy_parses() {
        let words = ["abaababaabaababaababa", "aaaaaaaaaaaaaaaaaaaaaaaaa", "abcabcabcabccabcabcbca"];
        let m = Meter::new();
        for w in words {
            let t = text(w);
            let p = greedy_parse(&t, 3).unwrap();
            for tau in 1..6 {
                for dollars in [false, true] {
                    for bucketed in [false, true] {
                        let cp = build_context_parse(&p, tau, dollars, RelocateOptions { bucketed }, &m)
                            .unwrap();
                        assert!(cp.parse.validate().is_empty());
                        let extra = if dollars { p.z() } else { 0 };
                        assert!(cp.parse.z() <= 2 * p.z() + extra);
                        assert_eq!(
                            decompress_naive(&cp.parse).unwrap(),
                            definition_scan(&t, &p, tau, dollars),
                            "{w} tau={tau} dollars={dollars}"
                        );
                    }
                }
            }
        }
        assert_eq!(m.live_words(), 0);
    }
}
