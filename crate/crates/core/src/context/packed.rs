use alloc::vec::Vec;

use super::{build_context_parse, RelocateOptions};
use crate::meter::Charge;
use crate::parse::{expand_into, SymbolStore};
use crate::{Lz77Parse, Meter, Result, Symbol};

/// Symbols packed into 64-bit words, `bits` per symbol, little-endian within
/// each word. Code 0 is `$`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedString {
    len: usize,
    bits: u32,
    words: Vec<u64>,
}

impl PackedString {
    /// Room for symbols `0..=sigma`.
    pub fn new(sigma: u32) -> Self {
        let bits = (32 - sigma.leading_zeros()).max(1);
        Self { len: 0, bits, words: Vec::new() }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Storage in 64-bit words.
    pub fn words(&self) -> usize {
        self.words.len()
    }

    /// Symbol at 0-based index `i`.
    pub fn get(&self, i: usize) -> Symbol {
        assert!(i < self.len, "index {i} out of bounds for length {}", self.len);
        let bit = i * self.bits as usize;
        let (w, off) = (bit / 64, (bit % 64) as u32);
        let mask = (1u64 << self.bits) - 1;
        let mut v = self.words[w] >> off;
        if off + self.bits > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        (v & mask) as Symbol
    }

    pub fn push(&mut self, symbol: Symbol) {
        debug_assert!(u64::from(symbol) >> self.bits == 0);
        let bit = self.len * self.bits as usize;
        let (w, off) = (bit / 64, (bit % 64) as u32);
        while self.words.len() * 64 < bit + self.bits as usize {
            self.words.push(0);
        }
        self.words[w] |= u64::from(symbol) << off;
        if off + self.bits > 64 {
            self.words[w + 1] |= u64::from(symbol) >> (64 - off);
        }
        self.len += 1;
    }

    /// Symbols `start..start + len` (0-based).
    pub fn slice(&self, start: usize, len: usize) -> impl Iterator<Item = Symbol> + '_ {
        (start..start + len).map(move |i| self.get(i))
    }
}

impl SymbolStore for PackedString {
    fn len(&self) -> usize {
        self.len
    }

    fn get(&self, i: usize) -> Symbol {
        PackedString::get(self, i)
    }

    fn push(&mut self, symbol: Symbol) {
        PackedString::push(self, symbol);
    }
}

/// Packs a parse's expansion, charging the words to `meter` as they grow.
struct MeteredPacked<'m> {
    packed: PackedString,
    charge: Charge<'m>,
}

impl SymbolStore for MeteredPacked<'_> {
    fn len(&self) -> usize {
        self.packed.len
    }

    fn get(&self, i: usize) -> Symbol {
        self.packed.get(i)
    }

    fn push(&mut self, symbol: Symbol) {
        let before = self.packed.words.len();
        self.packed.push(symbol);
        self.charge.grow(self.packed.words.len() - before);
    }
}

/// Builds the context string of `parse` by re-parsing it and expanding the
/// re-parse into packed storage. The returned words stay charged to
/// `meter`'s peak; the caller accounts for them while the string lives.
pub fn build_packed_context(
    parse: &Lz77Parse,
    tau: usize,
    dollars: bool,
    options: RelocateOptions,
    meter: &Meter,
) -> Result<PackedString> {
    let cp = build_context_parse(parse, tau, dollars, options, meter)?;
    let _parse_charge = Charge::new(meter, cp.words());
    let mut store = MeteredPacked { packed: PackedString::new(parse.sigma()), charge: Charge::new(meter, 0) };
    expand_into(&cp.parse, &mut store);
    Ok(store.packed)
}
