//! Compressed pattern matching.
//!
//! Every occurrence that crosses a phrase boundary lies in the `m`-context
//! (or the `(m + k)`-context for approximate matching). The context string
//! with `$` in place of each gap is streamed from a grammar of its re-parse
//! through an online matcher, hits are mapped back to the text, and the
//! remaining occurrences are copied out of phrase sources.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::context::{build_context_parse, ContextMap, InverseCursor, RelocateOptions};
use crate::error::input_err;
use crate::slp::Slp;
use crate::{prefix_symbol, Lz77Parse, Meter, PhraseTable, Result, Symbol, DOLLAR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Primary,
    Secondary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Occurrence {
    pub start: i64,
    pub kind: Kind,
    pub errors_used: u32,
}

/// The streamed context string and the map back to the text.
pub struct DollarContext {
    pub len: u64,
    pub map: ContextMap,
}

/// Streams the `m`-context string of `parse`, with one `$` per gap, into
/// `sink`.
pub fn stream_dollar_context(parse: &Lz77Parse, m: usize, sink: impl FnMut(Symbol)) -> Result<DollarContext> {
    stream_dollar_context_metered(parse, m, &Meter::new(), sink)
}

pub fn stream_dollar_context_metered(
    parse: &Lz77Parse,
    m: usize,
    meter: &Meter,
    sink: impl FnMut(Symbol),
) -> Result<DollarContext> {
    let map = ContextMap::new(parse, m, true)?;
    let cp = build_context_parse(parse, m, true, RelocateOptions::default(), meter)?;
    let slp = Slp::from_lz77(&cp.parse, meter)?.flatten_top(meter);
    drop(cp);
    let len = slp.len();
    let cost = slp.extract_to(1, len, sink)?;
    meter.count_slp_visits(cost.nodes_visited);
    slp.release(meter);
    Ok(DollarContext { len, map })
}

fn check_pattern(parse: &Lz77Parse, pattern: &[Symbol]) -> Result<()> {
    parse.check()?;
    if pattern.is_empty() {
        return Err(input_err!("empty pattern"));
    }
    if pattern.contains(&DOLLAR) {
        return Err(input_err!("pattern contains the separator symbol"));
    }
    let starts = parse.starts();
    for (m, u) in parse.members().iter().zip(starts) {
        if m.source <= 0 && m.source + m.len as i64 > 0 {
            return Err(input_err!("phrase at {u} copies the separator at position 0"));
        }
    }
    Ok(())
}

/// Knuth-Morris-Pratt failure function.
fn failure(p: &[Symbol]) -> Vec<usize> {
    let mut f = vec![0; p.len()];
    let mut k = 0;
    for i in 1..p.len() {
        while k > 0 && p[i] != p[k] {
            k = f[k - 1];
        }
        if p[i] == p[k] {
            k += 1;
        }
        f[i] = k;
    }
    f
}

/// Online matcher: `feed` returns the cost of the best match ending at the
/// symbol just read, if within budget.
trait Online {
    fn reset(&mut self);
    fn feed(&mut self, c: Symbol) -> Option<u32>;
}

struct Kmp<'p> {
    p: &'p [Symbol],
    f: Vec<usize>,
    state: usize,
}

impl Online for Kmp<'_> {
    fn reset(&mut self) {
        self.state = 0;
    }

    fn feed(&mut self, c: Symbol) -> Option<u32> {
        if self.state == self.p.len() {
            self.state = self.f[self.state - 1];
        }
        while self.state > 0 && self.p[self.state] != c {
            self.state = self.f[self.state - 1];
        }
        if self.p[self.state] == c {
            self.state += 1;
        }
        (self.state == self.p.len()).then_some(0)
    }
}

/// Edit-distance column with a free start, evaluated only up to the last
/// row within budget.
struct Sellers<'p> {
    p: &'p [Symbol],
    k: u32,
    col: Vec<u32>,
    /// Last row whose value is at most `k`.
    active: usize,
}

impl<'p> Sellers<'p> {
    fn new(p: &'p [Symbol], k: u32) -> Self {
        let mut s = Self { p, k, col: vec![0; p.len() + 1], active: 0 };
        s.reset();
        s
    }
}

impl Online for Sellers<'_> {
    fn reset(&mut self) {
        for (i, v) in self.col.iter_mut().enumerate() {
            *v = i as u32;
        }
        self.active = (self.k as usize).min(self.p.len());
    }

    fn feed(&mut self, c: Symbol) -> Option<u32> {
        let m = self.p.len();
        let cap = self.k + 1;
        let last = (self.active + 1).min(m);
        let mut diag = self.col[0];
        for i in 1..=last {
            let up = self.col[i - 1];
            let left = if i <= self.active { self.col[i] } else { cap };
            let v = (diag + u32::from(self.p[i - 1] != c)).min(left + 1).min(up + 1).min(cap);
            diag = self.col[i];
            self.col[i] = v;
        }
        for v in &mut self.col[last + 1..] {
            *v = cap;
        }
        let mut active = last;
        while active > 0 && self.col[active] > self.k {
            active -= 1;
        }
        self.active = active;
        (active == m).then(|| self.col[m])
    }
}

/// Matches ending at positions of the text reached through the context
/// stream, plus matches inside sources that lie in the alphabet prefix.
/// Keys are end positions, values the match cost.
fn seed_ends(parse: &Lz77Parse, width: usize, matcher: &mut impl Online) -> Result<BTreeMap<i64, u32>> {
    let mut ends = BTreeMap::new();
    if let Some(lowest) = parse.members().iter().map(|m| m.source).filter(|&s| s < 0).min() {
        matcher.reset();
        for p in lowest..0 {
            if let Some(cost) = matcher.feed(prefix_symbol(p)) {
                ends.insert(p, cost);
            }
        }
    }
    matcher.reset();
    let mut hits = Vec::new();
    let mut q = 0i64;
    let ctx = stream_dollar_context(parse, width, |c| {
        q += 1;
        if c == DOLLAR {
            matcher.reset();
        } else if let Some(cost) = matcher.feed(c) {
            hits.push((q, cost));
        }
    })?;
    let mut back = InverseCursor::new(&ctx.map);
    for (q, cost) in hits {
        ends.insert(back.map(q)?, cost);
    }
    Ok(ends)
}

/// Copies known matches (keyed by end position, each looking at the
/// `width` symbols up to its end) from every phrase source into the phrase.
fn close_over_phrases(parse: &Lz77Parse, ends: &mut BTreeMap<i64, u32>, width: usize) {
    let w = width as i64;
    let mut copies = Vec::new();
    for (m, u) in parse.members().iter().zip(parse.starts()) {
        let (lo, hi) = (m.source + w - 1, m.source + m.len as i64 - 1);
        if lo > hi {
            continue;
        }
        copies.clear();
        copies.extend(ends.range(lo..=hi).map(|(&e, &c)| (e - m.source + u, c)));
        ends.extend(copies.iter().copied());
    }
}

/// Closes a set of occurrence starts of a length-`m` pattern under phrase
/// copying. The seeds must contain every occurrence that crosses a phrase
/// boundary, and every occurrence inside a source in the alphabet prefix.
/// Returns the sorted starts at positive positions.
pub fn expand_secondary(parse: &Lz77Parse, seeds: &[i64], m: usize) -> Vec<i64> {
    let mut ends: BTreeMap<i64, u32> = seeds.iter().map(|&a| (a + m as i64 - 1, 0)).collect();
    close_over_phrases(parse, &mut ends, m);
    let starts: BTreeSet<i64> = ends.keys().map(|&e| e - m as i64 + 1).filter(|&a| a >= 1).collect();
    starts.into_iter().collect()
}

/// Whether the `width` positions ending at `end` are not all inside one
/// phrase.
fn crosses(table: &PhraseTable, end: i64, width: usize) -> Result<bool> {
    let first = end - width as i64 + 1;
    if first < 1 {
        return Ok(true);
    }
    Ok(table.locate(first)? != table.locate(end)?)
}

fn classify(parse: &Lz77Parse, ends: BTreeMap<i64, u32>, m: usize, width: usize) -> Result<Vec<Occurrence>> {
    let table = PhraseTable::new(parse);
    let mut out = Vec::new();
    for (end, errors_used) in ends {
        let start = end - m as i64 + 1;
        if start < 1 {
            continue;
        }
        let kind = if crosses(&table, end, width)? { Kind::Primary } else { Kind::Secondary };
        out.push(Occurrence { start, kind, errors_used });
    }
    Ok(out)
}

/// All occurrences of `pattern` in the text, sorted by start. An occurrence
/// is primary when it is not inside a single phrase.
pub fn find_exact(parse: &Lz77Parse, pattern: &[Symbol]) -> Result<Vec<Occurrence>> {
    check_pattern(parse, pattern)?;
    let m = pattern.len();
    let mut kmp = Kmp { p: pattern, f: failure(pattern), state: 0 };
    let mut ends = seed_ends(parse, m, &mut kmp)?;
    close_over_phrases(parse, &mut ends, m);
    classify(parse, ends, m, m)
}

/// Positions `e` where some substring ending at `e` is within edit distance
/// `k` of `pattern`, reported as starts `e - m + 1` (those below 1 are
/// dropped) with the smallest distance. Primary iff the `m + k` positions
/// ending at `e` are not inside a single phrase.
pub fn find_approx(parse: &Lz77Parse, pattern: &[Symbol], k: u32) -> Result<Vec<Occurrence>> {
    check_pattern(parse, pattern)?;
    let m = pattern.len();
    let width = m + k as usize;
    let mut dp = Sellers::new(pattern, k);
    let mut ends = seed_ends(parse, width, &mut dp)?;
    close_over_phrases(parse, &mut ends, width);
    classify(parse, ends, m, width)
}
