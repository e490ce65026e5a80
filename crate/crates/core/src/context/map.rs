use alloc::vec::Vec;

use crate::error::{input_err, usage_err};
use crate::{Lz77Parse, PhraseTable, Result};

/// Position mapping between a text and its `tau`-context string.
#[derive(Debug, Clone)]
pub struct ContextMap {
    table: PhraseTable,
    tau: usize,
    dollars: bool,
}

impl ContextMap {
    /// `tau` must be at least 1; values above `n` behave like `n`.
    pub fn new(parse: &Lz77Parse, tau: usize, dollars: bool) -> Result<Self> {
        if tau == 0 {
            return Err(input_err!("tau must be at least 1"));
        }
        parse.check()?;
        Ok(Self {
            table: PhraseTable::new(parse),
            tau: tau.min(parse.len().max(1)),
            dollars,
        })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn dollars(&self) -> bool {
        self.dollars
    }

    pub fn table(&self) -> &PhraseTable {
        &self.table
    }

    /// Length of the slice of the context string produced by phrase `k`.
    pub fn chunk_len(&self, k: usize) -> usize {
        let gap = self.table.gap(k, self.tau);
        self.table.phrase_len(k) - gap + usize::from(self.dollars && gap > 0)
    }

    /// Length of the (positive part of the) context string.
    pub fn context_len(&self) -> usize {
        (0..self.table.z()).map(|k| self.chunk_len(k)).sum()
    }

    pub fn contains(&self, p: i64) -> bool {
        if p <= 0 {
            return true;
        }
        match self.table.locate(p) {
            Ok(k) => {
                let off = (p - self.table.start(k)) as usize;
                off < self.tau || off >= self.tau + self.table.gap(k, self.tau)
            }
            Err(_) => false,
        }
    }

    /// Maps sorted in-context positions into the context string. Positions
    /// `<= 0` map to themselves.
    pub fn map_positions(&self, positions: &[i64]) -> Result<Vec<i64>> {
        if positions.windows(2).any(|w| w[0] > w[1]) {
            return Err(usage_err!("positions must be sorted"));
        }
        let mut cursor = PiCursor::new(self);
        positions.iter().map(|&p| cursor.map(p)).collect()
    }

    /// Maps sorted positions of the context string back to the text.
    pub fn inverse_map(&self, positions: &[i64]) -> Result<Vec<i64>> {
        if positions.windows(2).any(|w| w[0] > w[1]) {
            return Err(usage_err!("positions must be sorted"));
        }
        let mut cursor = InverseCursor::new(self);
        positions.iter().map(|&q| cursor.map(q)).collect()
    }
}

/// One left-to-right pass of the forward mapping over nondecreasing
/// positions.
pub struct PiCursor<'a> {
    map: &'a ContextMap,
    k: usize,
    /// Context symbols before the start of phrase `k`.
    before: i64,
    last: i64,
}

impl<'a> PiCursor<'a> {
    pub fn new(map: &'a ContextMap) -> Self {
        Self { map, k: 0, before: 0, last: i64::MIN }
    }

    pub fn map(&mut self, p: i64) -> Result<i64> {
        if p < self.last {
            return Err(usage_err!("positions must be sorted ({p} after {})", self.last));
        }
        self.last = p;
        if p <= 0 {
            return Ok(p);
        }
        let table = &self.map.table;
        if p > table.n() as i64 {
            return Err(input_err!("position {p} beyond text length {}", table.n()));
        }
        while p >= table.end(self.k) {
            self.before += self.map.chunk_len(self.k) as i64;
            self.k += 1;
        }
        let tau = self.map.tau;
        let gap = table.gap(self.k, tau);
        let off = (p - table.start(self.k)) as usize;
        if off < tau {
            return Ok(self.before + 1 + off as i64);
        }
        if off < tau + gap {
            return Err(input_err!("position {p} is not in the {tau}-context"));
        }
        let dollar = usize::from(self.map.dollars && gap > 0);
        Ok(self.before + 1 + (off - gap + dollar) as i64)
    }
}

/// One left-to-right pass of the inverse mapping, adding gap lengths back.
pub struct InverseCursor<'a> {
    map: &'a ContextMap,
    k: usize,
    before: i64,
    last: i64,
}

impl<'a> InverseCursor<'a> {
    pub fn new(map: &'a ContextMap) -> Self {
        Self { map, k: 0, before: 0, last: i64::MIN }
    }

    pub fn map(&mut self, q: i64) -> Result<i64> {
        if q < self.last {
            return Err(usage_err!("positions must be sorted ({q} after {})", self.last));
        }
        self.last = q;
        if q <= 0 {
            return Ok(q);
        }
        let table = &self.map.table;
        while self.k < table.z() && q > self.before + self.map.chunk_len(self.k) as i64 {
            self.before += self.map.chunk_len(self.k) as i64;
            self.k += 1;
        }
        if self.k == table.z() {
            return Err(input_err!("context position {q} beyond context length {}", self.before));
        }
        let tau = self.map.tau;
        let gap = table.gap(self.k, tau);
        let r = (q - self.before - 1) as usize;
        let start = table.start(self.k);
        if r < tau {
            return Ok(start + r as i64);
        }
        if self.map.dollars && gap > 0 {
            if r == tau {
                return Err(input_err!("context position {q} holds a separator"));
            }
            return Ok(start + (r - 1 + gap) as i64);
        }
        Ok(start + (r + gap) as i64)
    }
}
