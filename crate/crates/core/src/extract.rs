//! Streaming extraction of substrings from a parse.
//!
//! Requested intervals are cut into blocks of at most `tau` symbols. Blocks
//! are relocated into the `tau`-context in batches of at most `z`, mapped to
//! the context string and read from a packed copy of it or from a balanced
//! grammar of it. Symbols reach the sink in request order; the text itself
//! is never held in memory except by the naive baseline.

use alloc::vec::Vec;

use crate::context::{
    build_context_parse, build_packed_context, ContextMap, PackedString, PiCursor, RelocateOptions,
    Relocator,
};
use crate::error::usage_err;
use crate::meter::{words_of, Charge};
use crate::parse::expand_into;
use crate::slp::Slp;
use crate::{prefix_symbol, Lz77Parse, Meter, Result, Symbol};

/// How the symbols are produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Decompress everything into a buffer and slice it.
    Naive,
    /// Balanced grammar of the whole text.
    Grammar,
    /// Packed context string; `tau` follows from `delta` in `[0, 1]`.
    Packed { delta: f64 },
    /// Grammar of the context string; `None` picks `ceil(log2(n/z))`.
    SlpContext { tau: Option<usize> },
}

/// Counters of one extraction call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Stats {
    pub peak_words: usize,
    pub dict_ops: u64,
    pub slp_nodes_visited: u64,
    pub batches: u64,
    /// Context parameter used (0 for the baselines).
    pub tau: usize,
    pub symbols: u64,
}

impl Stats {
    fn from_meter(meter: &Meter, tau: usize, symbols: u64) -> Self {
        Self {
            peak_words: meter.peak_words(),
            dict_ops: meter.dict_ops(),
            slp_nodes_visited: meter.slp_nodes_visited(),
            batches: meter.batches(),
            tau,
            symbols,
        }
    }
}

/// A piece of a requested interval, at most `tau` symbols long.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub start: i64,
    pub end: i64,
    /// Index of the interval it belongs to.
    pub request: usize,
}

/// Clamps a 1-based inclusive interval to `1..=n`; `None` when it is empty.
pub fn clamp_interval(i: i64, j: i64, n: usize) -> Option<(i64, i64)> {
    let (i, j) = (i.max(1), j.min(n as i64));
    (i <= j).then_some((i, j))
}

/// Blocks of clamped intervals, in request order. Intervals with `i > j`
/// produce none.
pub fn plan_blocks(intervals: &[(i64, i64)], tau: usize) -> Vec<Block> {
    BlockIter::new(intervals, tau.max(1), i64::MAX).collect()
}

struct BlockIter<'r> {
    intervals: &'r [(i64, i64)],
    tau: i64,
    n: i64,
    request: usize,
    next: i64,
}

impl<'r> BlockIter<'r> {
    fn new(intervals: &'r [(i64, i64)], tau: usize, n: i64) -> Self {
        let next = intervals.first().map_or(0, |iv| iv.0.max(1));
        Self { intervals, tau: tau as i64, n, request: 0, next }
    }
}

impl Iterator for BlockIter<'_> {
    type Item = Block;

    fn next(&mut self) -> Option<Block> {
        loop {
            let &(_, j) = self.intervals.get(self.request)?;
            let j = j.min(self.n);
            if self.next <= j {
                let start = self.next;
                let end = (start + self.tau - 1).min(j);
                self.next = end + 1;
                return Some(Block { start, end, request: self.request });
            }
            self.request += 1;
            if let Some(iv) = self.intervals.get(self.request) {
                self.next = iv.0.max(1);
            }
        }
    }
}

/// `ceil(log2(n / z))`, at least 1.
fn log_ratio_ceil(n: usize, z: usize) -> usize {
    let z = z.max(1) as u128;
    let mut k = 0;
    while z << k < n as u128 {
        k += 1;
    }
    k.max(1)
}

/// The context parameter a strategy runs with. The baselines get 1.
///
/// For `Packed { delta }` this is `floor(log2(n/z) / log2(sigma)^delta)`,
/// with `sigma = 1` read as 2; every result is clamped to
/// `1..=max(1, ceil(log2(n/z)))`.
pub fn choose_tau(n: usize, z: usize, sigma: u32, strategy: Strategy) -> usize {
    let cap = log_ratio_ceil(n, z);
    match strategy {
        Strategy::Naive | Strategy::Grammar => 1,
        Strategy::SlpContext { tau } => tau.unwrap_or(cap).clamp(1, cap),
        Strategy::Packed { delta } => {
            if n <= z || z == 0 {
                return 1;
            }
            let ratio = libm::log2(n as f64 / z as f64);
            let lg_sigma = libm::log2(f64::from(sigma.max(2)));
            let tau = libm::floor(ratio / libm::pow(lg_sigma, delta));
            (tau as usize).clamp(1, cap)
        }
    }
}

fn check_strategy(parse: &Lz77Parse, strategy: Strategy) -> Result<()> {
    match strategy {
        Strategy::Packed { delta } if !(0.0..=1.0).contains(&delta) => {
            Err(usage_err!("delta {delta} outside [0, 1]"))
        }
        Strategy::SlpContext { tau: Some(t) } => {
            let cap = log_ratio_ceil(parse.len(), parse.z());
            if t == 0 || t > cap {
                Err(usage_err!("tau {t} outside [1, {cap}]"))
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

/// Where context slices are read from.
enum Context {
    Packed(PackedString),
    Grammar(Slp),
}

/// Streams `S[i_1, j_1] .. S[i_s, j_s]` into `sink`. Intervals are clamped
/// to the text; empty ones produce nothing.
pub fn extract_streaming(
    parse: &Lz77Parse,
    intervals: &[(i64, i64)],
    strategy: Strategy,
    mut sink: impl FnMut(Symbol),
) -> Result<Stats> {
    parse.check()?;
    check_strategy(parse, strategy)?;
    let meter = Meter::new();
    let n = parse.len();
    let mut emitted = 0u64;
    let mut emit = |c: Symbol| {
        emitted += 1;
        sink(c)
    };
    if n == 0 {
        return Ok(Stats::from_meter(&meter, 0, 0));
    }
    let tau = match strategy {
        Strategy::Naive => {
            let _charge = Charge::new(&meter, words_of::<Symbol>(n));
            let mut text = Vec::with_capacity(n);
            expand_into(parse, &mut text);
            for &(i, j) in intervals {
                if let Some((i, j)) = clamp_interval(i, j, n) {
                    text[i as usize - 1..j as usize].iter().for_each(|&c| emit(c));
                }
            }
            0
        }
        Strategy::Grammar => {
            let slp = Slp::from_lz77(parse, &meter)?.flatten_top(&meter);
            let _stack = Charge::new(&meter, words_of::<u32>(slp.depth() as usize + 1));
            for &(i, j) in intervals {
                if let Some((i, j)) = clamp_interval(i, j, n) {
                    let cost = slp.extract_to(i as u64, (j - i + 1) as u64, &mut emit)?;
                    meter.count_slp_visits(cost.nodes_visited);
                }
            }
            slp.release(&meter);
            0
        }
        Strategy::Packed { .. } | Strategy::SlpContext { .. } => {
            let tau = choose_tau(n, parse.z(), parse.sigma(), strategy).min(n);
            let context = if let Strategy::Packed { .. } = strategy {
                let packed = build_packed_context(parse, tau, false, RelocateOptions::default(), &meter)?;
                meter.alloc(packed.words());
                Context::Packed(packed)
            } else {
                let cp = build_context_parse(parse, tau, false, RelocateOptions::default(), &meter)?;
                let charge = Charge::new(&meter, cp.words());
                let slp = Slp::from_lz77(&cp.parse, &meter)?;
                drop(cp);
                drop(charge);
                Context::Grammar(slp.flatten_top(&meter))
            };
            stream_blocks(parse, intervals, tau, &context, &meter, &mut emit)?;
            match context {
                Context::Packed(p) => meter.free(p.words()),
                Context::Grammar(g) => g.release(&meter),
            }
            tau
        }
    };
    Ok(Stats::from_meter(&meter, tau, emitted))
}

/// Relocates, maps and emits the blocks of `intervals` batch by batch.
fn stream_blocks(
    parse: &Lz77Parse,
    intervals: &[(i64, i64)],
    tau: usize,
    context: &Context,
    meter: &Meter,
    emit: &mut impl FnMut(Symbol),
) -> Result<()> {
    let relocator = Relocator::new(parse, tau, RelocateOptions::default())?;
    let map = ContextMap::new(parse, tau, false)?;
    let batch_size = parse.z().max(1);
    let mut blocks = BlockIter::new(intervals, tau, parse.len() as i64);
    let _buffers = Charge::new(
        meter,
        words_of::<(i64, i64)>(2 * batch_size) + words_of::<u32>(batch_size) + words_of::<i64>(batch_size),
    );
    let mut pairs: Vec<(i64, i64)> = Vec::with_capacity(batch_size);
    let mut order: Vec<u32> = Vec::with_capacity(batch_size);
    let mut mapped: Vec<i64> = Vec::with_capacity(batch_size);
    if let Context::Grammar(slp) = context {
        meter.alloc(words_of::<u32>(slp.depth() as usize + 1));
    }
    loop {
        pairs.clear();
        pairs.extend(blocks.by_ref().take(batch_size).map(|b| (b.start, b.end)));
        if pairs.is_empty() {
            break;
        }
        meter.count_batch();
        let moved = relocator.relocate(&pairs, meter)?;
        order.clear();
        order.extend(0..moved.len() as u32);
        order.sort_unstable_by_key(|&k| moved[k as usize].0.max(1));
        mapped.clear();
        mapped.resize(moved.len(), 0);
        let mut cursor = PiCursor::new(&map);
        for &k in &order {
            let (a, b) = moved[k as usize];
            if b >= 1 {
                mapped[k as usize] = cursor.map(a.max(1))?;
            }
        }
        for (&(a, b), &q) in moved.iter().zip(&mapped) {
            for p in a..=b.min(0) {
                emit(prefix_symbol(p));
            }
            if b < 1 {
                continue;
            }
            let len = (b - a.max(1) + 1) as usize;
            match context {
                Context::Packed(packed) => packed.slice(q as usize - 1, len).for_each(&mut *emit),
                Context::Grammar(slp) => {
                    let cost = slp.extract_to(q as u64, len as u64, &mut *emit)?;
                    meter.count_slp_visits(cost.nodes_visited);
                }
            }
        }
    }
    if let Context::Grammar(slp) = context {
        meter.free(words_of::<u32>(slp.depth() as usize + 1));
    }
    Ok(())
}

/// Streams the whole text.
pub fn decompress_full(parse: &Lz77Parse, strategy: Strategy, sink: impl FnMut(Symbol)) -> Result<Stats> {
    extract_streaming(parse, &[(1, parse.len() as i64)], strategy, sink)
}

/// Collects [`extract_streaming`] output into a vector.
pub fn extract_to_vec(parse: &Lz77Parse, intervals: &[(i64, i64)], strategy: Strategy) -> Result<(Vec<Symbol>, Stats)> {
    let mut out = Vec::new();
    let stats = extract_streaming(parse, intervals, strategy, |c| out.push(c))?;
    Ok((out, stats))
}
