//! The context of a parse: positions within `tau` of a phrase boundary.
//!
//! Position `j` is in the `tau`-context when `j <= 0` or `u_k - tau < j <
//! u_k + tau` for some phrase start `u_k` (the end of the text, `n + 1`,
//! counts as a boundary). Every phrase contributes its first `tau` and last
//! `tau - 1` positions; the `gap` between them is left out.
//!
//! * [`ContextMap`] maps in-context positions to positions of the context
//!   string (the in-context symbols at positive positions, in order) and
//!   back.
//! * [`Relocator`] moves short substrings to equal copies inside the context.
//! * [`build_context_parse`] re-parses the context string from the parse.
//! * [`PackedString`] stores the context string bit-packed.
//!
//! With `$` separators enabled, every gap of the context string is replaced
//! by one `$` symbol instead of being dropped.

mod map;
mod packed;
mod relocate;
mod reparse;

pub use map::{ContextMap, InverseCursor, PiCursor};
pub use packed::{build_packed_context, PackedString};
pub use relocate::{relocate_to_context, Relocator, MAX_PAIRS_PER_PHRASE};
pub use reparse::{build_context_parse, ContextParse};

/// Options shared by the relocation-based builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RelocateOptions {
    /// Keep one dictionary per bucket of `ceil(n / z)` positions.
    pub bucketed: bool,
}
