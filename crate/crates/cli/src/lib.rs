//! File formats, corpus generators, benchmarks and the `lzctx` command line.

pub mod app;
pub mod bench;
pub mod corpus;
pub mod format;

pub use app::run;
