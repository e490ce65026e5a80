//! The LZ77 data model: members, parses, validation and the phrase table.

use alloc::vec::Vec;
use core::fmt;

use crate::error::input_err;
use crate::{prefix_symbol, Result, Symbol};

/// One member `(source, len)` of a parse: the phrase copies `len` symbols
/// starting at `source`, which may be a non-positive alphabet-prefix
/// position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Member {
    pub source: i64,
    pub len: usize,
}

impl Member {
    pub const fn new(source: i64, len: usize) -> Self {
        Self { source, len }
    }

    /// The `$` separator phrase.
    pub const fn dollar() -> Self {
        Self { source: 0, len: 1 }
    }
}

/// An LZ77 representation of a string of length `n` over `1..=sigma`.
///
/// Sources never overlap their phrases: `source + len <= start` for every
/// member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lz77Parse {
    sigma: u32,
    n: usize,
    members: Vec<Member>,
}

/// A violated invariant of a parse. Phrase indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyAlphabet,
    LengthMismatch { declared: usize, total: usize },
    EmptyPhrase { index: usize },
    SourceBelowAlphabet { index: usize, source: i64 },
    LongSentinel { index: usize, len: usize },
    Overlap { index: usize, source: i64, len: usize, start: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::EmptyAlphabet => write!(f, "alphabet size is zero"),
            Violation::LengthMismatch { declared, total } => {
                write!(f, "phrase lengths sum to {total}, header says n={declared}")
            }
            Violation::EmptyPhrase { index } => write!(f, "phrase {index} has length 0"),
            Violation::SourceBelowAlphabet { index, source } => {
                write!(f, "phrase {index} source {source} lies before the alphabet prefix")
            }
            Violation::LongSentinel { index, len } => {
                write!(f, "phrase {index} starts at the sentinel with length {len}")
            }
            Violation::Overlap { index, source, len, start } => write!(
                f,
                "phrase {index} overlaps its source: {source} + {len} > {start}"
            ),
        }
    }
}

impl Lz77Parse {
    /// Builds a parse from its members; `n` is the sum of their lengths.
    pub fn new(sigma: u32, members: Vec<Member>) -> Result<Self> {
        let n = members.iter().map(|m| m.len).sum();
        let parse = Self::from_parts(sigma, n, members);
        parse.check()?;
        Ok(parse)
    }

    /// Builds a parse without checking it. Use [`Lz77Parse::validate`]
    /// before handing it to anything else.
    pub fn from_parts(sigma: u32, n: usize, members: Vec<Member>) -> Self {
        Self { sigma, n, members }
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of phrases.
    pub fn z(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    /// Start positions of the phrases (`u_1 = 1`).
    pub fn starts(&self) -> impl Iterator<Item = i64> + '_ {
        self.members.iter().scan(1i64, |u, m| {
            let start = *u;
            *u += m.len as i64;
            Some(start)
        })
    }

    /// Lists every violated invariant; empty iff the parse is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.sigma == 0 {
            out.push(Violation::EmptyAlphabet);
        }
        let total: usize = self.members.iter().map(|m| m.len).sum();
        if total != self.n {
            out.push(Violation::LengthMismatch { declared: self.n, total });
        }
        let floor = -i64::from(self.sigma);
        for (index, (m, start)) in self.members.iter().zip(self.starts()).enumerate() {
            if m.len == 0 {
                out.push(Violation::EmptyPhrase { index });
                continue;
            }
            if m.source < floor {
                out.push(Violation::SourceBelowAlphabet { index, source: m.source });
            }
            if m.source == 0 && m.len != 1 {
                out.push(Violation::LongSentinel { index, len: m.len });
            }
            if m.source + m.len as i64 > start {
                out.push(Violation::Overlap { index, source: m.source, len: m.len, start });
            }
        }
        out
    }

    pub(crate) fn check(&self) -> Result<()> {
        match self.validate().first() {
            None => Ok(()),
            Some(v) => Err(input_err!("{v}")),
        }
    }
}

/// Random-access symbol storage that a parse can be expanded into.
pub trait SymbolStore {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Symbol at 0-based offset `i`.
    fn get(&self, i: usize) -> Symbol;
    fn push(&mut self, symbol: Symbol);
}

impl SymbolStore for Vec<Symbol> {
    fn len(&self) -> usize {
        Vec::len(self)
    }

    fn get(&self, i: usize) -> Symbol {
        self[i]
    }

    fn push(&mut self, symbol: Symbol) {
        Vec::push(self, symbol);
    }
}

/// Left-to-right copy of every phrase into `store`, which must start empty.
pub fn expand_into<S: SymbolStore>(parse: &Lz77Parse, store: &mut S) {
    for m in parse.members() {
        for off in 0..m.len as i64 {
            let pos = m.source + off;
            let sym = if pos <= 0 {
                prefix_symbol(pos)
            } else {
                store.get(pos as usize - 1)
            };
            store.push(sym);
        }
    }
}

/// Decompresses the whole string into a buffer.
pub fn decompress_naive(parse: &Lz77Parse) -> Result<Vec<Symbol>> {
    parse.check()?;
    let mut out = Vec::with_capacity(parse.len());
    expand_into(parse, &mut out);
    Ok(out)
}

/// Phrase start positions with the context gap of each phrase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseTable {
    /// `starts[k]` is the 1-based start of phrase `k`; the extra last entry
    /// is `n + 1`.
    starts: Vec<i64>,
}

impl PhraseTable {
    pub fn new(parse: &Lz77Parse) -> Self {
        let mut starts: Vec<i64> = parse.starts().collect();
        starts.push(parse.len() as i64 + 1);
        Self { starts }
    }

    pub fn z(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn n(&self) -> usize {
        (self.starts[self.z()] - 1) as usize
    }

    pub fn start(&self, k: usize) -> i64 {
        self.starts[k]
    }

    /// One past the last position of phrase `k`.
    pub fn end(&self, k: usize) -> i64 {
        self.starts[k + 1]
    }

    pub fn phrase_len(&self, k: usize) -> usize {
        (self.starts[k + 1] - self.starts[k]) as usize
    }

    /// Positions of phrase `k` outside the `tau`-context.
    pub fn gap(&self, k: usize, tau: usize) -> usize {
        self.phrase_len(k).saturating_sub(2 * tau - 1)
    }

    pub fn starts(&self) -> &[i64] {
        &self.starts[..self.z()]
    }

    pub fn gaps(&self, tau: usize) -> Vec<usize> {
        (0..self.z()).map(|k| self.gap(k, tau)).collect()
    }

    /// 0-based index of the phrase containing position `p`.
    pub fn locate(&self, p: i64) -> Result<usize> {
        if p < 1 || p > self.n() as i64 {
            return Err(input_err!("position {p} outside 1..={}", self.n()));
        }
        Ok(self.starts.partition_point(|&u| u <= p) - 1)
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use alloc::vec;

    #[test]
    fn sample_is_valid_and_decompresses() {
        let p = sample();
        assert!(p.validate().is_empty());
        assert_eq!(decompress_naive(&p).unwrap(), text("abaababa"));
    }

    #[test]
    fn single_literal() {
        let p = Lz77Parse::new(1, vec![Member::new(-1, 1)]).unwrap();
        assert_eq!(decompress_naive(&p).unwrap(), text("a"));
    }

    #[test]
    fn alphabet_prefix_lookups() {
        let p = Lz77Parse::new(3, vec![Member::new(-3, 1), Member::new(-2, 1), Member::new(-1, 1)])
            .unwrap();
        assert_eq!(decompress_naive(&p).unwrap(), text("cba"));
    }

    #[test]
    fn overlapping_first_phrase_is_reported() {
        let p = Lz77Parse::from_parts(2, 1, vec![Member::new(1, 1)]);
        assert_eq!(
            p.validate(),
            vec![Violation::Overlap { index: 0, source: 1, len: 1, start: 1 }]
        );
        assert!(decompress_naive(&p).is_err());
    }

    #[test]
    fn length_mismatch_is_reported() {
        let p = Lz77Parse::from_parts(2, 9, sample().members().to_vec());
        assert_eq!(p.validate(), vec![Violation::LengthMismatch { declared: 9, total: 8 }]);
    }

    #[test]
    fn sentinel_rules() {
        let ok = Lz77Parse::from_parts(1, 2, vec![Member::new(-1, 1), Member::dollar()]);
        assert!(ok.validate().is_empty());
        assert_eq!(decompress_naive(&ok).unwrap(), vec![1, crate::DOLLAR]);
        let long = Lz77Parse::from_parts(1, 3, vec![Member::new(-1, 1), Member::new(0, 2)]);
        assert!(long.validate().contains(&Violation::LongSentinel { index: 1, len: 2 }));
        let low = Lz77Parse::from_parts(1, 1, vec![Member::new(-2, 1)]);
        assert_eq!(low.validate(), vec![Violation::SourceBelowAlphabet { index: 0, source: -2 }]);
    }

    #[test]
    fn phrase_table_of_e1() {
        let t = PhraseTable::new(&sample());
        assert_eq!(t.starts(), &[1, 2, 4, 7]);
        assert_eq!(t.gaps(1), vec![0, 1, 2, 1]);
        assert_eq!(t.gaps(2), vec![0, 0, 0, 0]);
        assert_eq!(t.gaps(3), vec![0, 0, 0, 0]);
    }

    #[test]
    fn locate_in_e1() {
        let t = PhraseTable::new(&sample());
        assert_eq!(t.locate(5).unwrap(), 2);
        assert_eq!(t.locate(1).unwrap(), 0);
        assert_eq!(t.locate(8).unwrap(), 3);
        assert!(t.locate(0).is_err());
        assert!(t.locate(9).is_err());
        for (k, &u) in t.starts().iter().enumerate() {
            assert_eq!(t.locate(u).unwrap(), k);
        }
    }
}
