//! Seed vocabulary: the most frequent valid substrings of the training
//! units, counted through a suffix sort truncated at the maximum piece
//! length.
//!
//! Every distinct substring is one (lcp-interval, length) pair of the sorted
//! suffixes, so all of them are visited without materializing the counts.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::granularity::{token_valid, Level};
use crate::units::Units;

const SEP: u32 = u32::MAX;

#[derive(PartialEq, Eq)]
struct Cand {
    freq: u64,
    text: String,
}

impl Ord for Cand {
    /// Greater is better: more frequent, then longer, then smaller string.
    fn cmp(&self, other: &Self) -> Ordering {
        self.freq
            .cmp(&other.freq)
            .then_with(|| self.text.chars().count().cmp(&other.text.chars().count()))
            .then_with(|| other.text.cmp(&self.text))
    }
}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Collector {
    heap: BinaryHeap<Reverse<Cand>>,
    limit: usize,
}

impl Collector {
    fn offer(&mut self, freq: u64, node: &[u32], level: Level) {
        if freq == 0 || self.limit == 0 {
            return;
        }
        if self.heap.len() == self.limit {
            let worst = &self.heap.peek().unwrap().0;
            if freq < worst.freq || (freq == worst.freq && node.len() < worst.text.chars().count()) {
                return;
            }
        }
        let s: String = node.iter().map(|&c| char::from_u32(c).unwrap()).collect();
        if !token_valid(&s, level) {
            return;
        }
        let cand = Cand { freq, text: s };
        if self.heap.len() < self.limit {
            self.heap.push(Reverse(cand));
        } else if cand > self.heap.peek().unwrap().0 {
            self.heap.pop();
            self.heap.push(Reverse(cand));
        }
    }
}

/// Up to `limit` multi-char seed pieces with their weighted frequencies,
/// best first.
pub(crate) fn seed_substrings(
    units: &Units,
    level: Level,
    max_len: usize,
    limit: usize,
) -> Vec<(String, u64)> {
    let max_len = max_len.min(u8::MAX as usize);
    let total = units.total_chars() + units.len();
    let mut text: Vec<u32> = Vec::with_capacity(total);
    let mut weight: Vec<u32> = Vec::with_capacity(total);
    for (t, &w) in units.texts.iter().zip(&units.weights) {
        let w = u32::try_from(w).unwrap_or(u32::MAX);
        for &c in t {
            text.push(c as u32);
            weight.push(w);
        }
        text.push(SEP);
        weight.push(0);
    }
    // Window per position: up to the end of its unit, capped at the
    // longest piece.
    let mut wl = vec![0u8; text.len()];
    let mut run = 0usize;
    for p in (0..text.len()).rev() {
        run = if text[p] == SEP { 0 } else { run + 1 };
        wl[p] = run.min(max_len) as u8;
    }
    let window = |p: u32| &text[p as usize..p as usize + wl[p as usize] as usize];
    let mut sa: Vec<u32> = (0..text.len() as u32).filter(|&p| text[p as usize] != SEP).collect();
    sa.par_sort_unstable_by(|&a, &b| window(a).cmp(window(b)).then(a.cmp(&b)));
    let n = sa.len();
    // lcp[i]: common prefix of sa[i - 1] and sa[i]; lcp[0] = lcp[n] = 0.
    let mut lcp = vec![0u8; n + 1];
    for i in 1..n {
        let (a, b) = (window(sa[i - 1]), window(sa[i]));
        lcp[i] = a.iter().zip(b).take_while(|(x, y)| x == y).count() as u8;
    }
    let mut wsum = vec![0u64; n + 1];
    for i in 0..n {
        wsum[i + 1] = wsum[i] + weight[sa[i] as usize] as u64;
    }

    let mut out = Collector {
        heap: BinaryHeap::new(),
        limit,
    };
    let mut offer_range = |freq: u64, p: usize, lengths: std::ops::RangeInclusive<usize>| {
        for len in lengths.rev() {
            out.offer(freq, &text[p..p + len], level);
        }
    };
    // Substrings occurring at a single suffix: longer than both neighbour
    // overlaps.
    for i in 0..n {
        let p = sa[i] as usize;
        let lo = lcp[i].max(lcp[i + 1]) as usize + 1;
        offer_range(weight[p] as u64, p, lo.max(2)..=wl[p] as usize);
    }
    // Internal lcp-intervals, bottom-up with a stack of (lcp, left bound).
    // Lengths between the parent's lcp and the interval's own share its
    // occurrence set.
    let mut stack: Vec<(u8, usize)> = vec![(0, 0)];
    for i in 1..=n {
        let cur = lcp[i];
        let mut lb = i - 1;
        while cur < stack.last().unwrap().0 {
            let (h, l) = stack.pop().unwrap();
            let parent = cur.max(stack.last().unwrap().0) as usize;
            offer_range(wsum[i] - wsum[l], sa[l] as usize, (parent + 1).max(2)..=h as usize);
            lb = l;
        }
        if cur > stack.last().unwrap().0 {
            stack.push((cur, lb));
        }
    }
    let mut seeds: Vec<Cand> = out.heap.into_iter().map(|r| r.0).collect();
    seeds.sort_by(|a, b| b.cmp(a));
    seeds.into_iter().map(|c| (c.text, c.freq)).collect()
}
