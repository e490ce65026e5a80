//! Working-space and operation counters.
//!
//! Every structure that allocates working memory reports it here in 64-bit
//! words. The input parse, the request list and the output sink are not
//! counted.

use core::cell::Cell;

/// Number of 64-bit words occupied by `count` values of type `T`.
pub fn words_of<T>(count: usize) -> usize {
    (count * core::mem::size_of::<T>()).div_ceil(8)
}

#[derive(Debug, Default)]
pub struct Meter {
    live: Cell<usize>,
    peak: Cell<usize>,
    dict_ops: Cell<u64>,
    slp_nodes_visited: Cell<u64>,
    batches: Cell<u64>,
}

impl Meter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc(&self, words: usize) {
        let live = self.live.get() + words;
        self.live.set(live);
        if live > self.peak.get() {
            self.peak.set(live);
        }
    }

    pub fn free(&self, words: usize) {
        debug_assert!(words <= self.live.get(), "meter underflow");
        self.live.set(self.live.get().saturating_sub(words));
    }

    pub fn live_words(&self) -> usize {
        self.live.get()
    }

    pub fn peak_words(&self) -> usize {
        self.peak.get()
    }

    pub fn count_dict_op(&self) {
        self.dict_ops.set(self.dict_ops.get() + 1);
    }

    pub fn count_slp_visits(&self, nodes: u64) {
        self.slp_nodes_visited.set(self.slp_nodes_visited.get() + nodes);
    }

    pub fn count_batch(&self) {
        self.batches.set(self.batches.get() + 1);
    }

    pub fn dict_ops(&self) -> u64 {
        self.dict_ops.get()
    }

    pub fn slp_nodes_visited(&self) -> u64 {
        self.slp_nodes_visited.get()
    }

    pub fn batches(&self) -> u64 {
        self.batches.get()
    }
}

/// Words charged to a [`Meter`] that are released when the guard drops.
pub(crate) struct Charge<'a> {
    meter: &'a Meter,
    words: usize,
}

impl<'a> Charge<'a> {
    pub(crate) fn new(meter: &'a Meter, words: usize) -> Self {
        meter.alloc(words);
        Self { meter, words }
    }

    pub(crate) fn grow(&mut self, words: usize) {
        self.meter.alloc(words);
        self.words += words;
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    pub(crate) fn shrink(&mut self, words: usize) {
        let words = words.min(self.words);
        self.meter.free(words);
        self.words -= words;
    }
}

impl Drop for Charge<'_> {
    fn drop(&mut self) {
        self.meter.free(self.words);
    }
}
