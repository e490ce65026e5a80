//! Decompression of LZ77-compressed text in working space close to the size
//! of the parse.
//!
//! The crate is `no_std` (it needs `alloc`). Symbols are `u32` codes in
//! `1..=sigma`; the code [`DOLLAR`] (`0`) stands for the `$` separator. Text
//! positions are 1-based `i64`s. By convention the string is preceded by its
//! alphabet: position `-c` holds symbol `c` and position `0` holds `$`, so a
//! phrase may copy from negative positions.
//!
//! The main entry points:
//!
//! * [`greedy_parse`] / [`decompress_naive`] in [`parse`]: the data model.
//! * [`dict::DictCollection`]: mergeable dictionary with shifts.
//! * [`context`]: relocation of short substrings into the context of the
//!   parse, the context re-parse and the packed context string.
//! * [`slp::Slp`]: balanced straight-line programs built from a parse.
//! * [`extract`]: the streaming extraction driver.
//! * [`matcher`]: exact and approximate compressed pattern matching.
#![no_std]

extern crate alloc;

pub mod context;
pub mod dict;
pub mod extract;
pub mod greedy;
pub mod matcher;
pub mod meter;
pub mod parse;
pub mod slp;

mod error;

pub use error::{Error, Result};
pub use greedy::greedy_parse;
pub use meter::Meter;
pub use parse::{decompress_naive, Lz77Parse, Member, PhraseTable};

/// A symbol code. Valid text symbols are `1..=sigma`.
pub type Symbol = u32;

/// The code of the `$` separator symbol, which never occurs in input text.
pub const DOLLAR: Symbol = 0;

/// Symbol at a non-positive position of the alphabet prefix (`S[-c] = c`,
/// `S[0] = $`).
#[inline]
pub fn prefix_symbol(pos: i64) -> Symbol {
    debug_assert!(pos <= 0);
    (-pos) as Symbol
}
