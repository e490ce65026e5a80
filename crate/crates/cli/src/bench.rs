//! Peak-space and time measurements over generated corpora.

use std::fmt::Write;
use std::time::Instant;

use lzctx::extract::{decompress_full, Strategy};
use lzctx::{greedy_parse, Lz77Parse, Symbol};

use crate::corpus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Fib,
    ThueMorse,
    Random { sigma: u32, seed: u64 },
}

impl Family {
    pub fn generate(self, n: usize) -> Vec<Symbol> {
        match self {
            Family::Fib => corpus::fibonacci(n),
            Family::ThueMorse => corpus::thue_morse(n),
            Family::Random { sigma, seed } => corpus::random(n, sigma, seed),
        }
    }

    pub fn sigma(self) -> u32 {
        match self {
            Family::Fib | Family::ThueMorse => 2,
            Family::Random { sigma, .. } => sigma,
        }
    }
}

/// Parses sizes such as `2^10..2^22`, `2^12,2^16` or `1000`. A range lists
/// every power of two between its ends.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>, String> {
    fn one(item: &str) -> Result<(Option<u32>, usize), String> {
        let bad = || format!("bad size `{item}`");
        if let Some(exp) = item.strip_prefix("2^") {
            let e: u32 = exp.parse().map_err(|_| bad())?;
            if e > 40 {
                return Err(bad());
            }
            Ok((Some(e), 1usize << e))
        } else {
            Ok((None, item.parse().map_err(|_| bad())?))
        }
    }
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            match (one(lo)?, one(hi)?) {
                ((Some(a), _), (Some(b), _)) if a <= b => out.extend((a..=b).map(|e| 1usize << e)),
                _ => return Err(format!("bad size range `{item}` (use 2^a..2^b)")),
            }
        } else {
            out.push(one(item)?.1);
        }
    }
    if out.is_empty() {
        return Err(format!("no sizes in `{spec}`"));
    }
    Ok(out)
}

pub fn label(strategy: Strategy) -> String {
    match strategy {
        Strategy::Naive => "naive".into(),
        Strategy::Grammar => "grammar".into(),
        Strategy::Packed { delta } => format!("packed(delta={delta})"),
        Strategy::SlpContext { tau: None } => "slp(tau=default)".into(),
        Strategy::SlpContext { tau: Some(t) } => format!("slp(tau={t})"),
    }
}

pub const DEFAULT_STRATEGIES: [Strategy; 5] = [
    Strategy::Naive,
    Strategy::Grammar,
    Strategy::Packed { delta: 0.0 },
    Strategy::Packed { delta: 1.0 },
    Strategy::SlpContext { tau: None },
];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: usize,
    pub z: usize,
    pub strategy: String,
    pub peak_words: usize,
    pub seconds: f64,
}

/// Decompresses `parse` with every strategy, checking each output against
/// `text`.
pub fn measure(parse: &Lz77Parse, text: &[Symbol], strategies: &[Strategy]) -> lzctx::Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &s in strategies {
        let mut pos = 0usize;
        let mut mismatch = false;
        let started = Instant::now();
        let stats = decompress_full(parse, s, |c| {
            mismatch |= text.get(pos) != Some(&c);
            pos += 1;
        })?;
        let seconds = started.elapsed().as_secs_f64();
        if mismatch || pos != text.len() {
            return Err(lzctx::Error::Invariant(format!("{} output differs from the input", label(s))));
        }
        rows.push(Row { n: parse.len(), z: parse.z(), strategy: label(s), peak_words: stats.peak_words, seconds });
    }
    Ok(rows)
}

pub fn run_family(family: Family, sizes: &[usize], strategies: &[Strategy]) -> lzctx::Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &n in sizes {
        let text = family.generate(n);
        let parse = greedy_parse(&text, family.sigma())?;
        rows.extend(measure(&parse, &text, strategies)?);
    }
    Ok(rows)
}

pub fn to_tsv(rows: &[Row]) -> String {
    let mut out = String::from("n\tz\tstrategy\tpeak_words\tseconds\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{:.6}", r.n, r.z, r.strategy, r.peak_words, r.seconds);
    }
    out
}
