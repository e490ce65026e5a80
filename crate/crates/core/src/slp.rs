//! Balanced straight-line programs.
//!
//! [`Slp::from_lz77`] turns a parse into an AVL-balanced grammar: the text
//! built so far is one balanced tree of shared rules, each phrase is
//! assembled from the maximal subtrees covering its source and appended with
//! AVL concatenation. Only `O(height)` rules are created per phrase.
//!
//! [`Slp::flatten_top`] then cuts the top levels off and keeps a wide start
//! rule `X_1 .. X_t` with `t` about the number of phrases, so every symbol
//! is reached by a binary search over the start rule plus a short descent.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{input_err, usage_err};
use crate::meter::{words_of, Charge};
use crate::{prefix_symbol, Lz77Parse, Meter, Result, Symbol, DOLLAR};

pub type RuleId = u32;

const TERMINAL: u32 = u32::MAX;
const HEIGHT_SHIFT: u32 = 56;
const LEN_MASK: u64 = (1 << HEIGHT_SHIFT) - 1;

/// A production: `left`/`right` children, or `left = symbol` and
/// `right = TERMINAL`. The expansion length and height share one word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct RuleData {
    left: u32,
    right: u32,
    len_height: u64,
}

impl RuleData {
    fn len(&self) -> u64 {
        self.len_height & LEN_MASK
    }

    fn height(&self) -> u32 {
        (self.len_height >> HEIGHT_SHIFT) as u32
    }

    fn is_terminal(&self) -> bool {
        self.right == TERMINAL
    }
}

/// Right-hand side of a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Terminal(Symbol),
    Pair(RuleId, RuleId),
}

/// Grammar under construction, with garbage collection of rules that are no
/// longer reachable from the current roots.
struct Builder<'m> {
    rules: Vec<RuleData>,
    terminals: BTreeMap<Symbol, RuleId>,
    charge: Charge<'m>,
    live_after_gc: usize,
    created: usize,
}

const RULE_WORDS: usize = 2;

impl<'m> Builder<'m> {
    fn new(meter: &'m Meter) -> Self {
        Self {
            rules: Vec::new(),
            terminals: BTreeMap::new(),
            charge: Charge::new(meter, 0),
            live_after_gc: 0,
            created: 0,
        }
    }

    fn add(&mut self, data: RuleData) -> RuleId {
        self.rules.push(data);
        self.created += 1;
        self.charge.grow(RULE_WORDS);
        self.rules.len() as RuleId - 1
    }

    fn rule(&self, id: RuleId) -> RuleData {
        self.rules[id as usize]
    }

    fn height(&self, id: RuleId) -> u32 {
        self.rules[id as usize].height()
    }

    fn children(&self, id: RuleId) -> (RuleId, RuleId) {
        let r = self.rules[id as usize];
        debug_assert!(!r.is_terminal());
        (r.left, r.right)
    }

    fn terminal(&mut self, symbol: Symbol) -> RuleId {
        if let Some(&id) = self.terminals.get(&symbol) {
            return id;
        }
        let id = self.add(RuleData { left: symbol, right: TERMINAL, len_height: 1 });
        self.terminals.insert(symbol, id);
        self.charge.grow(3);
        id
    }

    fn pair(&mut self, left: RuleId, right: RuleId) -> RuleId {
        let (l, r) = (self.rule(left), self.rule(right));
        let height = u64::from(l.height().max(r.height()) + 1);
        self.add(RuleData { left, right, len_height: (height << HEIGHT_SHIFT) | (l.len() + r.len()) })
    }

    /// AVL concatenation of two balanced rules.
    fn concat(&mut self, x: RuleId, y: RuleId) -> RuleId {
        let (hx, hy) = (self.height(x), self.height(y));
        if hx.abs_diff(hy) <= 1 {
            self.pair(x, y)
        } else if hx > hy {
            self.join_right(x, y)
        } else {
            self.join_left(x, y)
        }
    }

    /// `x` taller than `y` by at least two.
    fn join_right(&mut self, x: RuleId, y: RuleId) -> RuleId {
        let (a, c) = self.children(x);
        if self.height(c) <= self.height(y) + 1 {
            let t_height = self.height(c).max(self.height(y)) + 1;
            if t_height <= self.height(a) + 1 {
                let t = self.pair(c, y);
                return self.pair(a, t);
            }
            // Double rotation: ((a, c1), (c2, y)).
            let (c1, c2) = self.children(c);
            let left = self.pair(a, c1);
            let right = self.pair(c2, y);
            return self.pair(left, right);
        }
        let t = self.join_right(c, y);
        if self.height(t) <= self.height(a) + 1 {
            return self.pair(a, t);
        }
        let (t1, t2) = self.children(t);
        let left = self.pair(a, t1);
        self.pair(left, t2)
    }

    /// `y` taller than `x` by at least two.
    fn join_left(&mut self, x: RuleId, y: RuleId) -> RuleId {
        let (c, b) = self.children(y);
        if self.height(c) <= self.height(x) + 1 {
            let t_height = self.height(c).max(self.height(x)) + 1;
            if t_height <= self.height(b) + 1 {
                let t = self.pair(x, c);
                return self.pair(t, b);
            }
            let (c1, c2) = self.children(c);
            let left = self.pair(x, c1);
            let right = self.pair(c2, b);
            return self.pair(left, right);
        }
        let t = self.join_left(x, c);
        if self.height(t) <= self.height(b) + 1 {
            return self.pair(t, b);
        }
        let (t1, t2) = self.children(t);
        let right = self.pair(t2, b);
        self.pair(t1, right)
    }

    /// Concatenates a sequence whose heights rise to a peak and then fall,
    /// folding towards the peak from both ends.
    fn concat_all(&mut self, parts: &[RuleId]) -> Option<RuleId> {
        let peak = (0..parts.len()).max_by_key(|&i| self.height(parts[i]))?;
        let mut left = parts[0];
        for &p in &parts[1..=peak] {
            left = self.concat(left, p);
        }
        let mut right: Option<RuleId> = None;
        for &p in parts[peak + 1..].iter().rev() {
            right = Some(match right {
                None => p,
                Some(r) => self.concat(p, r),
            });
        }
        Some(match right {
            None => left,
            Some(r) => self.concat(left, r),
        })
    }

    /// Maximal subtrees of `root` covering offsets `lo..hi` (0-based,
    /// half-open), left to right.
    fn cover(&self, root: RuleId, lo: u64, hi: u64, out: &mut Vec<RuleId>) {
        let r = self.rule(root);
        if lo == 0 && hi == r.len() {
            out.push(root);
            return;
        }
        let split = self.rule(r.left).len();
        if lo < split {
            self.cover(r.left, lo, hi.min(split), out);
        }
        if hi > split {
            self.cover(r.right, lo.max(split) - split, hi - split, out);
        }
    }

    /// Drops rules unreachable from `roots`, renumbering the rest (children
    /// keep lower ids than their parents).
    fn collect_garbage(&mut self, roots: &mut [RuleId]) {
        let mut live = vec![false; self.rules.len()];
        for &r in roots.iter() {
            live[r as usize] = true;
        }
        for id in (0..self.rules.len()).rev() {
            let r = self.rules[id];
            if live[id] && !r.is_terminal() {
                live[r.left as usize] = true;
                live[r.right as usize] = true;
            }
        }
        let mut remap = vec![u32::MAX; self.rules.len()];
        let mut next = 0usize;
        for id in 0..self.rules.len() {
            if !live[id] {
                continue;
            }
            let mut r = self.rules[id];
            if !r.is_terminal() {
                r.left = remap[r.left as usize];
                r.right = remap[r.right as usize];
            }
            self.rules[next] = r;
            remap[id] = next as u32;
            next += 1;
        }
        let dropped = self.rules.len() - next;
        self.rules.truncate(next);
        self.rules.shrink_to_fit();
        self.charge.shrink(dropped * RULE_WORDS);
        let before = self.terminals.len();
        self.terminals.retain(|_, id| remap[*id as usize] != u32::MAX);
        for id in self.terminals.values_mut() {
            *id = remap[*id as usize];
        }
        self.charge.shrink(3 * (before - self.terminals.len()));
        for r in roots.iter_mut() {
            *r = remap[*r as usize];
        }
        self.live_after_gc = next;
    }

    fn maybe_collect(&mut self, roots: &mut [RuleId]) {
        if self.rules.len() >= 2 * self.live_after_gc + 64 {
            self.collect_garbage(roots);
        }
    }
}

/// A balanced straight-line program with a wide start rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slp {
    rules: Vec<RuleData>,
    start: Vec<RuleId>,
    /// `ends[j]` is the total expansion length of `start[..=j]`.
    ends: Vec<u64>,
    /// Phrase count of the parse the grammar was built from.
    phrases: usize,
    /// Rules created during construction, garbage included.
    created: usize,
}

/// Cost of one [`Slp::extract_to`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExtractCost {
    pub nodes_visited: u64,
}

impl Slp {
    /// Builds a balanced SLP whose start rule expands to the text of `parse`.
    /// Construction memory is charged to `meter`; the finished rules stay
    /// charged until the caller releases them with [`Slp::words`].
    pub fn from_lz77(parse: &Lz77Parse, meter: &Meter) -> Result<Self> {
        parse.check()?;
        let mut b = Builder::new(meter);
        let mut text: Option<RuleId> = None;
        let mut parts: Vec<RuleId> = Vec::new();
        let mut parts_charge = Charge::new(meter, 0);
        for m in parse.members() {
            parts.clear();
            let end = m.source + m.len as i64 - 1;
            if m.source <= 0 {
                for p in m.source..=end.min(0) {
                    let t = b.terminal(prefix_symbol(p));
                    parts.push(t);
                }
                // Balance the literal run by pairing neighbours round by round.
                while parts.len() > 1 {
                    let mut next = Vec::with_capacity(parts.len().div_ceil(2));
                    for chunk in parts.chunks(2) {
                        next.push(match *chunk {
                            [x, y] => b.concat(x, y),
                            [x] => x,
                            _ => unreachable!(),
                        });
                    }
                    parts = next;
                }
            }
            if end >= 1 {
                let lo = m.source.max(1);
                let root = text.expect("positive source before any text");
                b.cover(root, (lo - 1) as u64, end as u64, &mut parts);
            }
            let want = words_of::<RuleId>(parts.len());
            if want > parts_charge.words() {
                parts_charge.grow(want - parts_charge.words());
            }
            let phrase = b.concat_all(&parts).expect("phrase of positive length");
            let mut roots = [match text {
                None => phrase,
                Some(t) => b.concat(t, phrase),
            }];
            b.maybe_collect(&mut roots);
            text = Some(roots[0]);
        }
        drop(parts_charge);
        let mut roots: Vec<RuleId> = text.into_iter().collect();
        b.collect_garbage(&mut roots);
        let created = b.created;
        let rules = core::mem::take(&mut b.rules);
        // Hand the rule words over to the caller.
        let slp = Self::assemble(rules, roots, parse.z(), created);
        core::mem::forget(b.charge);
        meter.free(3 * b.terminals.len());
        Ok(slp)
    }

    fn assemble(rules: Vec<RuleData>, start: Vec<RuleId>, phrases: usize, created: usize) -> Self {
        let mut ends = Vec::with_capacity(start.len());
        let mut total = 0u64;
        for &x in &start {
            total += rules[x as usize].len();
            ends.push(total);
        }
        Self { rules, start, ends, phrases, created }
    }

    /// Replaces the top of the grammar by a start rule of at least as many
    /// symbols as the source parse had phrases (fewer only if the text is
    /// shorter), expanding the tallest start symbols first. Rules used only
    /// above the cut are dropped; the freed words are released from `meter`.
    pub fn flatten_top(self, meter: &Meter) -> Self {
        let target = self.phrases.max(1);
        let mut start = self.start;
        let rules = self.rules;
        loop {
            let tallest = start.iter().map(|&x| rules[x as usize].height()).max().unwrap_or(0);
            if start.len() >= target || tallest == 0 {
                break;
            }
            let mut next = Vec::with_capacity(2 * start.len());
            for &x in &start {
                let r = rules[x as usize];
                if r.height() == tallest {
                    next.push(r.left);
                    next.push(r.right);
                } else {
                    next.push(x);
                }
            }
            start = next;
        }
        let before = rules.len();
        let mut b = Builder::new(meter);
        b.rules = rules;
        b.collect_garbage(&mut start);
        let freed = before - b.rules.len();
        let rules = core::mem::take(&mut b.rules);
        drop(b);
        meter.free(freed * RULE_WORDS);
        let extra = words_of::<RuleId>(start.len()) + words_of::<u64>(start.len());
        meter.alloc(extra);
        Self::assemble(rules, start, self.phrases, self.created)
    }

    /// Working-space words held by this grammar (as charged by the
    /// constructors).
    pub fn words(&self) -> usize {
        self.rules.len() * RULE_WORDS + self.start_words()
    }

    fn start_words(&self) -> usize {
        if self.start.len() <= 1 {
            0
        } else {
            words_of::<RuleId>(self.start.len()) + words_of::<u64>(self.start.len())
        }
    }

    /// Releases this grammar's words from `meter`.
    pub fn release(self, meter: &Meter) {
        meter.free(self.words());
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Rules created during construction, including ones later collected.
    pub fn rules_created(&self) -> usize {
        self.created
    }

    pub fn start(&self) -> &[RuleId] {
        &self.start
    }

    pub fn phrases(&self) -> usize {
        self.phrases
    }

    /// Total expansion length.
    pub fn len(&self) -> u64 {
        self.ends.last().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest height below a start symbol (a terminal has height 0).
    pub fn depth(&self) -> u32 {
        self.start.iter().map(|&x| self.rules[x as usize].height()).max().unwrap_or(0)
    }

    pub fn rule(&self, id: RuleId) -> Result<Rule> {
        let r = self.rules.get(id as usize).ok_or_else(|| usage_err!("unknown rule {id}"))?;
        Ok(if r.is_terminal() { Rule::Terminal(r.left) } else { Rule::Pair(r.left, r.right) })
    }

    pub fn exp_len_of(&self, id: RuleId) -> Result<u64> {
        self.rules
            .get(id as usize)
            .map(RuleData::len)
            .ok_or_else(|| usage_err!("unknown rule {id}"))
    }

    /// Streams symbols `i..i + len` (1-based `i`) into `sink`.
    pub fn extract_to(&self, i: u64, len: u64, mut sink: impl FnMut(Symbol)) -> Result<ExtractCost> {
        let mut cost = ExtractCost::default();
        if len == 0 {
            return Ok(cost);
        }
        if i == 0 || i + len - 1 > self.len() {
            return Err(usage_err!("range {i}..{} outside 1..={}", i + len - 1, self.len()));
        }
        // Start symbol holding position i.
        let mut j = self.ends.partition_point(|&e| e < i);
        let mut off = i - 1 - if j == 0 { 0 } else { self.ends[j - 1] };
        // Pairs whose right child is still to be visited.
        let mut pending: Vec<RuleId> = Vec::new();
        let mut node = self.start[j];
        cost.nodes_visited += 1;
        loop {
            let r = self.rules[node as usize];
            if r.is_terminal() {
                break;
            }
            let left_len = self.rules[r.left as usize].len();
            if off < left_len {
                pending.push(node);
                node = r.left;
            } else {
                off -= left_len;
                node = r.right;
            }
            cost.nodes_visited += 1;
        }
        let mut remaining = len;
        loop {
            sink(self.rules[node as usize].left);
            remaining -= 1;
            if remaining == 0 {
                break;
            }
            node = match pending.pop() {
                Some(p) => self.rules[p as usize].right,
                None => {
                    j += 1;
                    self.start[j]
                }
            };
            cost.nodes_visited += 1;
            loop {
                let r = self.rules[node as usize];
                if r.is_terminal() {
                    break;
                }
                pending.push(node);
                node = r.left;
                cost.nodes_visited += 1;
            }
        }
        Ok(cost)
    }

    pub fn extract(&self, i: u64, len: u64) -> Result<Vec<Symbol>> {
        let mut out = Vec::with_capacity(len as usize);
        self.extract_to(i, len, |c| out.push(c))?;
        Ok(out)
    }

    /// One rule per line, `id -> a b` or `id -> 'c'` (`'$'` for the
    /// separator), then the start rule.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (id, r) in self.rules.iter().enumerate() {
            let _ = if !r.is_terminal() {
                writeln!(s, "{id} -> {} {}", r.left, r.right)
            } else if r.left == DOLLAR {
                writeln!(s, "{id} -> '$'")
            } else {
                writeln!(s, "{id} -> '{}'", r.left)
            };
        }
        let _ = write!(s, "start ->");
        for x in &self.start {
            let _ = write!(s, " {x}");
        }
        s.push('\n');
        s
    }

    /// Checks acyclicity, lengths and AVL balance of every rule.
    pub fn check_invariants(&self) -> Result<()> {
        for (id, r) in self.rules.iter().enumerate() {
            if r.is_terminal() {
                if r.len() != 1 || r.height() != 0 {
                    return Err(input_err!("terminal {id} malformed"));
                }
                continue;
            }
            if r.left as usize >= id || r.right as usize >= id {
                return Err(input_err!("rule {id} references a later rule"));
            }
            let (l, rt) = (self.rules[r.left as usize], self.rules[r.right as usize]);
            if r.len() != l.len() + rt.len() {
                return Err(input_err!("rule {id} length mismatch"));
            }
            if r.height() != l.height().max(rt.height()) + 1 || l.height().abs_diff(rt.height()) > 1 {
                return Err(input_err!("rule {id} is unbalanced"));
            }
        }
        if self.ends.windows(2).any(|w| w[0] >= w[1]) {
            return Err(input_err!("start rule has an empty symbol"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{build_context_parse, RelocateOptions};
    use crate::parse::fixtures::{sample, text};
    use crate::{decompress_naive, greedy_parse, Member};

    fn full(slp: &Slp) -> Vec<Symbol> {
        slp.extract(1, slp.len()).unwrap()
    }

    #[test]
    fn sample_and_its_context_parse() {
        let m = Meter::new();
        let slp = Slp::from_lz77(&sample(), &m).unwrap();
        slp.check_invariants().unwrap();
        assert_eq!(full(&slp), text("abaababa"));
        assert_eq!(slp.extract(3, 4).unwrap(), text("aaba"));
        assert_eq!(slp.extract(5, 0).unwrap(), vec![]);
        assert!(slp.extract(6, 4).is_err());

        let cp = build_context_parse(&sample(), 1, false, RelocateOptions::default(), &m).unwrap();
        let slp = Slp::from_lz77(&cp.parse, &m).unwrap();
        assert_eq!(full(&slp), text("abab"));
    }

    #[test]
    fn single_literal_is_one_terminal() {
        let m = Meter::new();
        let p = Lz77Parse::new(1, vec![Member::new(-1, 1)]).unwrap();
        let slp = Slp::from_lz77(&p, &m).unwrap();
        assert_eq!(slp.rule_count(), 1);
        assert_eq!(slp.rule(0).unwrap(), Rule::Terminal(1));
        assert_eq!(full(&slp), text("a"));
        assert_eq!(slp.dump(), "0 -> '1'\nstart -> 0\n");
    }

    #[test]
    fn exp_len_of_rules() {
        let m = Meter::new();
        let slp = Slp::from_lz77(&sample(), &m).unwrap();
        for id in 0..slp.rule_count() as RuleId {
            match slp.rule(id).unwrap() {
                Rule::Terminal(_) => assert_eq!(slp.exp_len_of(id).unwrap(), 1),
                Rule::Pair(a, b) => assert_eq!(
                    slp.exp_len_of(id).unwrap(),
                    slp.exp_len_of(a).unwrap() + slp.exp_len_of(b).unwrap()
                ),
            }
        }
        assert_eq!(slp.exp_len_of(slp.start()[0]).unwrap(), 8);
        assert!(slp.exp_len_of(10_000).is_err());
    }

    #[test]
    fn flatten_preserves_expansion() {
        let m = Meter::new();
        let t: Vec<Symbol> = (0..3000u32).map(|i| 1 + (i * i / 7 + i / 13) % 3).collect();
        let p = greedy_parse(&t, 3).unwrap();
        let slp = Slp::from_lz77(&p, &m).unwrap();
        slp.check_invariants().unwrap();
        let tall = slp.depth();
        let flat = slp.flatten_top(&m);
        flat.check_invariants().unwrap();
        assert!(flat.start().len() >= p.z() && flat.start().len() < 2 * p.z());
        assert!(flat.depth() < tall);
        assert_eq!(full(&flat), t);
        for (i, len) in [(1, 10), (17, 400), (2990, 11), (1500, 1)] {
            assert_eq!(flat.extract(i, len).unwrap(), t[i as usize - 1..(i + len) as usize - 1]);
        }
        let words = flat.words();
        assert_eq!(m.live_words(), words);
        flat.release(&m);
        assert_eq!(m.live_words(), 0);
    }

    #[test]
    fn sources_crossing_the_sentinel() {
        // (-1, 3) copies "a", "$" and the first text symbol.
        let p = Lz77Parse::new(2, vec![Member::new(-2, 1), Member::new(-1, 3)]).unwrap();
        let m = Meter::new();
        let slp = Slp::from_lz77(&p, &m).unwrap();
        assert_eq!(full(&slp), decompress_naive(&p).unwrap());
        assert_eq!(full(&slp), vec![2, 1, DOLLAR, 2]);
    }
}
