//! Mergeable dictionaries with shifts.
//!
//! A [`DictCollection`] holds disjoint multisets of items. Each item has a
//! position in a bounded integer universe and an immutable rank. Sets can be
//! merged even when their position ranges interleave, split at a key, and
//! shifted as a whole.
//!
//! Sets are treaps over a shared node arena. A shift only touches the root:
//! every node carries a pending offset for its subtrees, pushed down lazily.
//! Union of interleaved sets splits the lower-priority treap around the root
//! of the other and recurses on both sides.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::usage_err;
use crate::meter::words_of;
use crate::{Meter, Result};

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    pos: i64,
    /// Offset still to be applied to both subtrees.
    lazy: i64,
    rank: u32,
    prio: u32,
    left: u32,
    right: u32,
}

/// Handle to a set of a [`DictCollection`]. Handles passed to `merge`,
/// `split` or `shift` are consumed and rejected afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SetHandle {
    slot: u32,
    generation: u32,
}

pub struct DictCollection<'m> {
    nodes: Vec<Node>,
    /// Root and generation per handle slot; the root is `None` while the
    /// slot is free.
    sets: Vec<(Option<u32>, u32)>,
    free_slots: Vec<u32>,
    min_pos: i64,
    max_pos: i64,
    meter: &'m Meter,
    charged: usize,
}

impl<'m> DictCollection<'m> {
    /// An empty collection over the universe `min_pos..=max_pos`.
    pub fn new(min_pos: i64, max_pos: i64, meter: &'m Meter) -> Self {
        Self {
            nodes: Vec::new(),
            sets: Vec::new(),
            free_slots: Vec::new(),
            min_pos,
            max_pos,
            meter,
            charged: 0,
        }
    }

    fn charge(&mut self, words: usize) {
        self.meter.alloc(words);
        self.charged += words;
    }

    fn new_set(&mut self, root: u32) -> SetHandle {
        if let Some(slot) = self.free_slots.pop() {
            let entry = &mut self.sets[slot as usize];
            entry.0 = Some(root);
            return SetHandle { slot, generation: entry.1 };
        }
        self.sets.push((Some(root), 0));
        self.charge(words_of::<(Option<u32>, u32)>(1) + words_of::<u32>(1));
        SetHandle { slot: self.sets.len() as u32 - 1, generation: 0 }
    }

    fn root(&self, h: SetHandle) -> Result<u32> {
        match self.sets.get(h.slot as usize) {
            Some(&(Some(root), generation)) if generation == h.generation => Ok(root),
            Some(_) => Err(usage_err!("set handle {} was already consumed", h.slot)),
            None => Err(usage_err!("unknown set handle {}", h.slot)),
        }
    }

    fn consume(&mut self, h: SetHandle) -> Result<u32> {
        let root = self.root(h)?;
        let entry = &mut self.sets[h.slot as usize];
        *entry = (None, entry.1.wrapping_add(1));
        self.free_slots.push(h.slot);
        Ok(root)
    }

    /// A new empty set.
    pub fn empty(&mut self) -> SetHandle {
        self.new_set(NIL)
    }

    /// A new singleton set holding one item.
    pub fn makeset(&mut self, pos: i64, rank: u32) -> Result<SetHandle> {
        if pos < self.min_pos || pos > self.max_pos {
            return Err(usage_err!(
                "position {pos} outside universe {}..={}",
                self.min_pos,
                self.max_pos
            ));
        }
        self.meter.count_dict_op();
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            pos,
            lazy: 0,
            rank,
            prio: priority(id),
            left: NIL,
            right: NIL,
        });
        self.charge(words_of::<Node>(1));
        Ok(self.new_set(id))
    }

    /// Union of two live sets; both handles are consumed.
    pub fn merge(&mut self, a: SetHandle, b: SetHandle) -> Result<SetHandle> {
        if a == b {
            return Err(usage_err!("cannot merge set {} with itself", a.slot));
        }
        self.root(a)?;
        self.root(b)?;
        let (ra, rb) = (self.consume(a)?, self.consume(b)?);
        self.meter.count_dict_op();
        let root = self.union(ra, rb);
        Ok(self.new_set(root))
    }

    /// Splits a set into the items at positions `<= x` and those `> x`.
    pub fn split(&mut self, g: SetHandle, x: i64) -> Result<(SetHandle, SetHandle)> {
        let root = self.consume(g)?;
        self.meter.count_dict_op();
        let (a, b) = self.split_at(root, x);
        Ok((self.new_set(a), self.new_set(b)))
    }

    /// Moves every item of a set by `delta`.
    pub fn shift(&mut self, g: SetHandle, delta: i64) -> Result<SetHandle> {
        let root = self.root(g)?;
        if root != NIL && delta != 0 {
            let (lo, hi) = (self.extreme(root, false), self.extreme(root, true));
            if lo + delta < self.min_pos || hi + delta > self.max_pos {
                return Err(usage_err!(
                    "shift by {delta} moves {lo}..={hi} outside universe {}..={}",
                    self.min_pos,
                    self.max_pos
                ));
            }
            let node = &mut self.nodes[root as usize];
            node.pos += delta;
            node.lazy += delta;
        }
        self.consume(g)?;
        self.meter.count_dict_op();
        Ok(self.new_set(root))
    }

    /// Items of a live set as `(position, rank)` in nondecreasing position
    /// order. The set stays live.
    pub fn enumerate(&self, g: SetHandle) -> Result<Vec<(i64, u32)>> {
        let root = self.root(g)?;
        let mut out = Vec::new();
        // In-order walk accumulating pending offsets on the way down.
        let mut stack: Vec<(u32, i64)> = Vec::new();
        let mut cur = (root, 0i64);
        loop {
            while cur.0 != NIL {
                stack.push(cur);
                let node = &self.nodes[cur.0 as usize];
                cur = (node.left, cur.1 + node.lazy);
            }
            let Some((id, off)) = stack.pop() else { break };
            let node = &self.nodes[id as usize];
            out.push((node.pos + off, node.rank));
            cur = (node.right, off + node.lazy);
        }
        Ok(out)
    }

    /// `pos:rank` pairs separated by spaces, for logs.
    pub fn dump(&self, g: SetHandle) -> Result<String> {
        let mut s = String::new();
        for (i, (pos, rank)) in self.enumerate(g)?.into_iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{pos}:{rank}");
        }
        Ok(s)
    }

    fn push(&mut self, id: u32) {
        let node = self.nodes[id as usize];
        if node.lazy == 0 {
            return;
        }
        for child in [node.left, node.right] {
            if child != NIL {
                let c = &mut self.nodes[child as usize];
                c.pos += node.lazy;
                c.lazy += node.lazy;
            }
        }
        self.nodes[id as usize].lazy = 0;
    }

    fn extreme(&self, root: u32, rightmost: bool) -> i64 {
        let mut id = root;
        let mut off = 0;
        loop {
            let node = &self.nodes[id as usize];
            let next = if rightmost { node.right } else { node.left };
            if next == NIL {
                return node.pos + off;
            }
            off += node.lazy;
            id = next;
        }
    }

    fn split_at(&mut self, t: u32, x: i64) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        self.push(t);
        let node = self.nodes[t as usize];
        if node.pos <= x {
            let (l, r) = self.split_at(node.right, x);
            self.nodes[t as usize].right = l;
            (t, r)
        } else {
            let (l, r) = self.split_at(node.left, x);
            self.nodes[t as usize].left = r;
            (l, t)
        }
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        let (a, b) = if self.nodes[a as usize].prio >= self.nodes[b as usize].prio {
            (a, b)
        } else {
            (b, a)
        };
        self.push(a);
        let node = self.nodes[a as usize];
        let (bl, br) = self.split_at(b, node.pos);
        let left = self.union(node.left, bl);
        let right = self.union(node.right, br);
        let n = &mut self.nodes[a as usize];
        n.left = left;
        n.right = right;
        a
    }
}

impl Drop for DictCollection<'_> {
    fn drop(&mut self) {
        self.meter.free(self.charged);
    }
}

/// Treap priority of node `id` (splitmix64 finalizer).
fn priority(id: u32) -> u32 {
    let mut x = u64::from(id).wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    (x ^ (x >> 31)) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn set_of(d: &mut DictCollection<'_>, items: &[i64]) -> SetHandle {
        let mut h = d.empty();
        for (i, &p) in items.iter().enumerate() {
            let s = d.makeset(p, i as u32).unwrap();
            h = d.merge(h, s).unwrap();
        }
        h
    }

    fn positions(d: &DictCollection<'_>, h: SetHandle) -> Vec<i64> {
        d.enumerate(h).unwrap().into_iter().map(|(p, _)| p).collect()
    }

    #[test]
    fn makeset_variants() {
        let m = Meter::new();
        let mut d = DictCollection::new(-2, 10, &m);
        let a = d.makeset(5, 1).unwrap();
        assert_eq!(d.enumerate(a).unwrap(), vec![(5, 1)]);
        let b = d.makeset(-2, 7).unwrap();
        assert_eq!(d.enumerate(b).unwrap(), vec![(-2, 7)]);
        let c = d.makeset(5, 2).unwrap();
        assert_eq!(d.enumerate(c).unwrap(), vec![(5, 2)]);
        assert_eq!(d.enumerate(a).unwrap(), vec![(5, 1)]);
        assert!(d.makeset(11, 0).is_err());
    }

    #[test]
    fn merge_interleaved_and_duplicates() {
        let m = Meter::new();
        let mut d = DictCollection::new(-2, 10, &m);
        let a = set_of(&mut d, &[1, 4]);
        let b = set_of(&mut d, &[2, 3]);
        let c = d.merge(a, b).unwrap();
        assert_eq!(positions(&d, c), vec![1, 2, 3, 4]);

        let a = set_of(&mut d, &[-2, -1, 1]);
        let b = set_of(&mut d, &[-2]);
        let c = d.merge(a, b).unwrap();
        assert_eq!(positions(&d, c), vec![-2, -2, -1, 1]);

        let a = set_of(&mut d, &[3, 7]);
        let e = d.empty();
        let c = d.merge(a, e).unwrap();
        assert_eq!(positions(&d, c), vec![3, 7]);
    }

    #[test]
    fn consumed_handles_are_rejected() {
        let m = Meter::new();
        let mut d = DictCollection::new(0, 10, &m);
        let a = d.makeset(1, 0).unwrap();
        let b = d.makeset(2, 1).unwrap();
        assert!(d.merge(a, a).is_err());
        let _c = d.merge(a, b).unwrap();
        assert!(matches!(d.enumerate(a), Err(crate::Error::Usage(_))));
        assert!(d.split(b, 3).is_err());
        assert!(d.shift(a, 1).is_err());
    }

    #[test]
    fn split_boundaries() {
        let m = Meter::new();
        let mut d = DictCollection::new(0, 10, &m);
        let g = set_of(&mut d, &[1, 2, 3, 4]);
        let (a, b) = d.split(g, 2).unwrap();
        assert_eq!((positions(&d, a), positions(&d, b)), (vec![1, 2], vec![3, 4]));
        let g = d.makeset(5, 0).unwrap();
        let (a, b) = d.split(g, 5).unwrap();
        assert_eq!((positions(&d, a), positions(&d, b)), (vec![5], vec![]));
        let g = d.makeset(5, 0).unwrap();
        let (a, b) = d.split(g, 8).unwrap();
        assert_eq!((positions(&d, a), positions(&d, b)), (vec![5], vec![]));
    }

    #[test]
    fn shift_examples() {
        let m = Meter::new();
        let mut d = DictCollection::new(-2, 8, &m);
        let g = d.makeset(5, 3).unwrap();
        let g = d.shift(g, -3).unwrap();
        assert_eq!(d.enumerate(g).unwrap(), vec![(2, 3)]);
        let g = d.shift(g, -4).unwrap();
        assert_eq!(d.enumerate(g).unwrap(), vec![(-2, 3)]);
        let g = d.shift(g, 0).unwrap();
        assert_eq!(d.enumerate(g).unwrap(), vec![(-2, 3)]);
        assert!(d.shift(g, -1).is_err());
        // A rejected shift leaves the set live.
        assert_eq!(d.dump(g).unwrap(), "-2:3");
    }

    #[test]
    fn lazy_offsets_survive_split_and_merge() {
        let m = Meter::new();
        let mut d = DictCollection::new(-100, 100, &m);
        let g = set_of(&mut d, &[1, 5, 9, 13]);
        let g = d.shift(g, 10).unwrap();
        let (a, b) = d.split(g, 15).unwrap();
        let a = d.shift(a, -20).unwrap();
        let h = set_of(&mut d, &[-10, 0]);
        let c = d.merge(a, h).unwrap();
        let c = d.merge(c, b).unwrap();
        assert_eq!(positions(&d, c), vec![-10, -9, -5, 0, 19, 23]);
        assert_eq!(d.dump(c).unwrap(), "-10:0 -9:0 -5:1 0:1 19:2 23:3");
    }

    #[test]
    fn meter_is_released_on_drop() {
        let m = Meter::new();
        {
            let mut d = DictCollection::new(0, 10, &m);
            let a = d.makeset(1, 0).unwrap();
            let b = d.makeset(2, 0).unwrap();
            d.merge(a, b).unwrap();
            assert!(m.live_words() > 0);
        }
        assert_eq!(m.live_words(), 0);
        assert_eq!(m.dict_ops(), 3);
    }
}
